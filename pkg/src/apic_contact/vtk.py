"""Legacy ASCII VTK snapshots of the tetrahedral meshes."""

from __future__ import annotations

from pathlib import Path

import numpy as np

VTK_TETRA = 10


def _fmt(v) -> str:
    return f"{v:.17g}"


def snapshot_text(x, tets, velocity, body, title="apic_contact snapshot") -> str:
    """The file contents as a string (current coordinates, tets, point data)."""
    x = np.asarray(x, dtype=float).reshape(-1, 3)
    tets = np.asarray(tets, dtype=np.int64).reshape(-1, 4)
    velocity = np.asarray(velocity, dtype=float).reshape(-1, 3)
    body = np.asarray(body, dtype=np.int64).reshape(-1)
    n, e = len(x), len(tets)
    lines = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET UNSTRUCTURED_GRID"]
    lines.append(f"POINTS {n} double")
    lines.extend(" ".join(_fmt(c) for c in p) for p in x)
    lines.append(f"CELLS {e} {5 * e}")
    lines.extend("4 " + " ".join(str(int(i)) for i in t) for t in tets)
    lines.append(f"CELL_TYPES {e}")
    lines.extend([str(VTK_TETRA)] * e)
    lines.append(f"POINT_DATA {n}")
    lines.append("VECTORS velocity double")
    lines.extend(" ".join(_fmt(c) for c in v) for v in velocity)
    lines.append("SCALARS body int 1")
    lines.append("LOOKUP_TABLE default")
    lines.extend(str(int(b)) for b in body)
    return "\n".join(lines) + "\n"


def write_snapshot(model, state, path) -> Path:
    """Write the model mesh at ``state`` to ``path``."""
    path = Path(path)
    text = snapshot_text(state.x, model.mesh.tets, state.v, model.mesh.body, title=f"t = {_fmt(state.t)}")
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write snapshot {path}: {exc.strerror}") from exc
    return path


def read_snapshot(path) -> dict:
    """Parse a file written by :func:`write_snapshot` (points, cells, point data)."""
    tokens = Path(path).read_text().split("\n")
    out = {}
    i = 0
    while i < len(tokens):
        line = tokens[i].split()
        if not line:
            i += 1
            continue
        if line[0] == "POINTS":
            n = int(line[1])
            out["points"] = np.array([[float(c) for c in tokens[i + 1 + j].split()] for j in range(n)])
            i += n + 1
        elif line[0] == "CELLS":
            e = int(line[1])
            out["cells"] = np.array([[int(c) for c in tokens[i + 1 + j].split()[1:]] for j in range(e)], dtype=np.int64)
            i += e + 1
        elif line[0] == "CELL_TYPES":
            e = int(line[1])
            out["cell_types"] = np.array([int(tokens[i + 1 + j]) for j in range(e)])
            i += e + 1
        elif line[0] == "VECTORS":
            n = len(out["points"])
            out[line[1]] = np.array([[float(c) for c in tokens[i + 1 + j].split()] for j in range(n)])
            i += n + 1
        elif line[0] == "SCALARS":
            n = len(out["points"])
            out[line[1]] = np.array([int(tokens[i + 2 + j]) for j in range(n)])
            i += n + 2
        else:
            i += 1
    return out
