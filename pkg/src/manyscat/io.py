"""Text formats for ensembles, effective-field solutions and voxel grids.

All three share a layout: a magic line ``# manyscat <kind> v1``, one line
``# {json header}``, then comma- or space-separated records. Floats are
written with ``repr`` so read-back is bit-exact.

Ensemble manifest (``kind = ensemble``)::

    # manyscat ensemble v1
    # {"a": ..., "kappa": ..., "kappa1": ..., "seed": ..., "pitch": ..., "box": {...}, "cube_counts": [...], "count": M}
    index,x,y,z,re_zeta,im_zeta
    0,0.05,0.05,0.05,10.0,0.0

Solution (``kind = solution``): header with residual, iterations, M, a,
kappa, kappa1, solver; records ``index,re_u,im_u,re_q,im_q``.

Grid (``kind = grid``): header with lo, hi, resolution and optional k;
records ``re im``, one per voxel, in C order (x slowest, z fastest).
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .ensemble import ParticleEnsemble
from .geometry import DomainBox, GridField
from .manybody import EffectiveFieldSolution
from .scaling import ScalingLaw


class FormatError(ValueError):
    pass


def _f(x: float) -> str:
    return repr(float(x))


def _write(path, kind: str, header: dict, columns: list[str] | None, rows) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(f"# manyscat {kind} v1\n")
        fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
        if columns:
            fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(row + "\n")


def _read(path, kind: str):
    lines = Path(path).read_text().splitlines()
    if len(lines) < 2 or lines[0].strip() != f"# manyscat {kind} v1":
        raise FormatError(f"{path}: not a manyscat {kind} file")
    try:
        header = json.loads(lines[1][2:])
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: bad header: {exc}") from exc
    return header, lines[2:]


def write_manifest(path, ens: ParticleEnsemble) -> None:
    header = {
        "a": ens.a,
        "kappa": ens.law.kappa,
        "kappa1": ens.law.kappa1,
        "seed": ens.seed,
        "pitch": ens.pitch,
        "box": ens.box.to_dict() if ens.box else None,
        "cube_counts": list(ens.cube_counts),
        "count": len(ens),
    }
    rows = (
        f"{i},{_f(x)},{_f(y)},{_f(z)},{_f(zeta.real)},{_f(zeta.imag)}"
        for i, ((x, y, z), zeta) in enumerate(zip(ens.centers, ens.zeta))
    )
    _write(path, "ensemble", header, ["index", "x", "y", "z", "re_zeta", "im_zeta"], rows)


def read_manifest(path) -> tuple[dict, np.ndarray, np.ndarray]:
    """Header, centers (M, 3) and impedances (M,) of a manifest."""
    header, lines = _read(path, "ensemble")
    data = list(csv.reader(lines[1:]))
    centers = np.array([[float(r[1]), float(r[2]), float(r[3])] for r in data]).reshape(-1, 3)
    zeta = np.array([complex(float(r[4]), float(r[5])) for r in data], dtype=complex)
    if len(centers) != header.get("count", len(centers)):
        raise FormatError(f"{path}: header count does not match records")
    return header, centers, zeta


def ensemble_from_manifest(path) -> ParticleEnsemble:
    """Rebuild an ensemble; its law's h is looked up from the stored impedances."""
    header, centers, zeta = read_manifest(path)
    a, kappa = header["a"], header["kappa"]
    h_values = zeta * a**kappa

    def h(points):
        d = np.linalg.norm(np.atleast_2d(points)[:, None, :] - centers[None, :, :], axis=-1)
        return h_values[np.argmin(d, axis=1)]

    law = ScalingLaw(kappa, header["kappa1"], a, h if len(centers) else 0.0)
    box = DomainBox.from_dict(header["box"]) if header.get("box") else None
    return ParticleEnsemble(centers, a, zeta, law, header.get("seed"), box,
                            header.get("cube_counts", ()), header.get("pitch"))


def write_solution(path, sol: EffectiveFieldSolution, ens: ParticleEnsemble) -> None:
    header = {
        "residual": sol.residual_norm,
        "iterations": sol.iterations,
        "M": len(ens),
        "a": ens.a,
        "kappa": ens.law.kappa,
        "kappa1": ens.law.kappa1,
        "solver": sol.solver_kind,
        "leading_order": sol.leading_order,
    }
    rows = (
        f"{i},{_f(u.real)},{_f(u.imag)},{_f(q.real)},{_f(q.imag)}"
        for i, (u, q) in enumerate(zip(sol.u_at_centers, sol.charges))
    )
    _write(path, "solution", header, ["index", "re_u", "im_u", "re_q", "im_q"], rows)


def read_solution(path) -> tuple[dict, EffectiveFieldSolution]:
    header, lines = _read(path, "solution")
    data = list(csv.reader(lines[1:]))
    u = np.array([complex(float(r[1]), float(r[2])) for r in data], dtype=complex)
    q = np.array([complex(float(r[3]), float(r[4])) for r in data], dtype=complex)
    sol = EffectiveFieldSolution(u, q, header["residual"], header["iterations"],
                                 header["solver"], header.get("leading_order", False))
    return header, sol


def write_grid(path, grid: GridField, k: float | None = None) -> None:
    header = {
        "lo": list(grid.box.lo),
        "hi": list(grid.box.hi),
        "resolution": list(grid.resolution),
        "order": "C",
    }
    if k is not None:
        header["k"] = k
    vals = np.asarray(grid.values, complex).reshape(-1)
    _write(path, "grid", header, None, (f"{_f(v.real)} {_f(v.imag)}" for v in vals))


def read_grid(path) -> tuple[GridField, dict]:
    header, lines = _read(path, "grid")
    res = tuple(header["resolution"])
    vals = np.array([complex(*map(float, ln.split())) for ln in lines if ln.strip()])
    if vals.size != int(np.prod(res)):
        raise FormatError(f"{path}: expected {int(np.prod(res))} voxels, found {vals.size}")
    box = DomainBox(tuple(header["lo"]), tuple(header["hi"]))
    return GridField(box, res, vals.reshape(res)), header


def write_slice_csv(path, grid: GridField, axis: int = 2, index: int | None = None) -> None:
    """Plane ``index`` normal to ``axis``: in-plane coordinates, Re u, Im u, |u|."""
    if index is None:
        index = grid.resolution[axis] // 2
    names = ["x", "y", "z"]
    other = [i for i in range(3) if i != axis]
    pts = grid.centers().reshape(*grid.resolution, 3)
    plane_pts = np.take(pts, index, axis=axis).reshape(-1, 3)
    plane = np.take(np.asarray(grid.values, complex), index, axis=axis).reshape(-1)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([names[other[0]], names[other[1]], "re_u", "im_u", "abs_u"])
        for p, v in zip(plane_pts, plane):
            w.writerow([_f(p[other[0]]), _f(p[other[1]]), _f(v.real), _f(v.imag), _f(abs(v))])


def write_points_csv(path, points: np.ndarray, values: np.ndarray, reference: np.ndarray | None = None) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        cols = ["x", "y", "z", "re_u", "im_u", "abs_u"]
        if reference is not None:
            cols += ["re_u0", "im_u0"]
        w.writerow(cols)
        for i, (p, v) in enumerate(zip(points, values)):
            row = [_f(p[0]), _f(p[1]), _f(p[2]), _f(v.real), _f(v.imag), _f(abs(v))]
            if reference is not None:
                row += [_f(reference[i].real), _f(reference[i].imag)]
            w.writerow(row)


def read_points_csv(path) -> tuple[np.ndarray, np.ndarray]:
    with Path(path).open() as fh:
        r = csv.DictReader(fh)
        rows = list(r)
    pts = np.array([[float(d["x"]), float(d["y"]), float(d["z"])] for d in rows]).reshape(-1, 3)
    vals = np.array([complex(float(d["re_u"]), float(d["im_u"])) for d in rows], dtype=complex)
    return pts, vals


def write_table_csv(path, rows: list[dict]) -> None:
    if not rows:
        Path(path).write_text("")
        return
    with Path(path).open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        for r in rows:
            w.writerow({k: (_f(v) if isinstance(v, float) else v) for k, v in r.items()})


def write_json(path, data) -> None:
    Path(path).write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj
