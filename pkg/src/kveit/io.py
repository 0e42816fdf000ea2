"""File output: legacy VTK meshes and fields, CSV tables, atomic writes."""
import csv
import io
import os
import tempfile

import numpy as np


def atomic_write(path, text):
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def vtk_text(mesh, point_data=None, title="kveit mesh"):
    """Legacy ASCII VTK unstructured grid with triangle cells (type 5)."""
    point_data = point_data or {}
    n, nt = mesh.n_nodes, mesh.n_triangles
    out = io.StringIO()
    out.write("# vtk DataFile Version 3.0\n")
    out.write(f"{title}\n")
    out.write("ASCII\n")
    out.write("DATASET UNSTRUCTURED_GRID\n")
    out.write(f"POINTS {n} double\n")
    for x1, x2 in mesh.nodes:
        out.write(f"{x1:.17g} {x2:.17g} 0\n")
    out.write(f"CELLS {nt} {4 * nt}\n")
    for a, b, c in mesh.triangles:
        out.write(f"3 {a} {b} {c}\n")
    out.write(f"CELL_TYPES {nt}\n")
    out.write("5\n" * nt)
    if point_data:
        out.write(f"POINT_DATA {n}\n")
        for name, values in point_data.items():
            values = np.asarray(values, dtype=float)
            if values.shape != (n,):
                raise ValueError(f"point data {name!r} has shape {values.shape}, expected ({n},)")
            out.write(f"SCALARS {name} double 1\n")
            out.write("LOOKUP_TABLE default\n")
            out.write("".join(f"{v:.17g}\n" for v in values))
    return out.getvalue()


def write_vtk(path, mesh, point_data=None, title="kveit mesh"):
    atomic_write(path, vtk_text(mesh, point_data, title))


def read_vtk_points(path):
    """Read back POINTS and POINT_DATA scalars from a file written by :func:`write_vtk`."""
    with open(path) as fh:
        lines = fh.read().split("\n")
    it = iter(lines)
    points, data = None, {}
    for line in it:
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "POINTS":
            n = int(parts[1])
            points = np.array([[float(v) for v in next(it).split()] for _ in range(n)])
        elif parts[0] == "SCALARS":
            next(it)  # LOOKUP_TABLE
            data[parts[1]] = np.array([float(next(it)) for _ in range(len(points))])
    return points, data


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    if value is None:
        return ""
    return str(value)


def csv_text(rows, fields, display=()):
    """CSV with full-precision numbers; columns in ``display`` also get a
    rounded ``<name>_display`` companion (5 significant digits)."""
    header = list(fields) + [f"{name}_display" for name in display]
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        get = row.get if isinstance(row, dict) else (lambda k, r=row: getattr(r, k))
        vals = [_fmt(get(k)) for k in fields]
        for name in display:
            v = get(name)
            vals.append("" if v is None else f"{float(v):.4e}")
        w.writerow(vals)
    return out.getvalue()


def write_csv(path, rows, fields, display=()):
    atomic_write(path, csv_text(rows, fields, display))
