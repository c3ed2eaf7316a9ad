"""File formats of the experiment harness.

CSV outputs begin with ``# key=value`` comment lines carrying run
metadata (always including the RNG seed), followed by the documented
header; readers should skip ``#`` lines.  Field snapshots are written as
legacy ASCII VTK unstructured grids.  Run configuration files are plain
``key = value`` text.
"""

from __future__ import annotations

import json

import numpy as np

__all__ = [
    "write_csv",
    "write_trace_csv",
    "write_eoc_csv",
    "write_growth_csv",
    "write_summary_json",
    "write_vtk",
    "parse_config_file",
]

TRACE_HEADER = "step,t,du_rate,dv_rate,nonlin_iters,inner_iters,wall_ms"
EOC_HEADER = "level,tau,n,E_u,E_v,alpha_u,alpha_v"
GROWTH_HEADER = "step,t,ratio,theory"


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_csv(path, header: str, rows, meta: dict | None = None) -> None:
    lines = []
    for key, value in (meta or {}).items():
        lines.append(f"# {key}={value}")
    lines.append(header)
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_trace_csv(path, trace, meta: dict | None = None) -> None:
    meta = dict(meta or {})
    meta.setdefault("seed", trace.seed)
    rows = [
        (r.step, r.t, r.du_rate, r.dv_rate, r.nonlin_iters, r.inner_iters, r.wall_ms)
        for r in trace.records
    ]
    write_csv(path, TRACE_HEADER, rows, meta)


def write_eoc_csv(path, report, meta: dict | None = None) -> None:
    rows = []
    for i, row in enumerate(report.rows):
        alpha_u = report.alpha_u[i - 1] if i > 0 else ""
        alpha_v = report.alpha_v[i - 1] if i > 0 else ""
        rows.append(
            (row.level, row.tau, row.n, row.error_u, row.error_v, alpha_u, alpha_v)
        )
    write_csv(path, EOC_HEADER, rows, meta)


def write_growth_csv(path, series, meta: dict | None = None) -> None:
    rows = [
        (step, t, ratio, series.theory)
        for step, t, ratio in zip(series.steps, series.times, series.ratios)
    ]
    write_csv(path, GROWTH_HEADER, rows, meta)


def write_summary_json(path, summary: dict) -> None:
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


_VTK_CELL_TYPE = {2: 5, 3: 10}  # triangle, tetrahedron


def write_vtk(path, mesh, fields: dict, title: str = "rdfem fields") -> None:
    """Legacy ASCII VTK unstructured grid with nodal scalar fields."""
    lines = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {mesh.n_vertices} double",
    ]
    for vtx in mesh.vertices:
        coords = list(vtx) + [0.0] * (3 - mesh.dim)
        lines.append(" ".join(repr(float(c)) for c in coords))
    nloc = mesh.dim + 1
    lines.append(f"CELLS {mesh.n_cells} {mesh.n_cells * (nloc + 1)}")
    for cell in mesh.cells:
        lines.append(f"{nloc} " + " ".join(str(int(i)) for i in cell))
    lines.append(f"CELL_TYPES {mesh.n_cells}")
    lines.extend([str(_VTK_CELL_TYPE[mesh.dim])] * mesh.n_cells)
    lines.append(f"POINT_DATA {mesh.n_vertices}")
    for name, values in fields.items():
        values = np.asarray(values, float)
        lines.append(f"SCALARS {name} double 1")
        lines.append("LOOKUP_TABLE default")
        lines.extend(repr(float(x)) for x in values)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def parse_config_file(path) -> dict:
    """Read ``key = value`` lines; blank lines and ``#`` comments ignored."""
    out = {}
    with open(path) as fh:
        for no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{no}: expected 'key = value'")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out
