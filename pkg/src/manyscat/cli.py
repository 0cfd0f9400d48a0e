"""Command-line driver: ``manyscat {simulate,homogenize,converge,design,validate}``.

Parameters come from an optional JSON config (``--config``) overridden by
flags. Every parameter is checked before any computation starts. Each run
writes into its own directory: ``config.json`` (the resolved config), CSV
and voxel outputs, ``summary.json`` and PNG figures.

Exit codes: 0 success, 2 validation or regime refusal, 3 solver or
verification failure, 4 I/O error. Failures also print a one-line JSON error
record on stderr and write ``error.json`` into the run directory.

Environment: ``MANYSCAT_OUTPUT_DIR`` (parent of run directories) and
``MANYSCAT_THREADS`` (BLAS/FFT threads).
"""

from __future__ import annotations

import argparse
import contextlib
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import io, oracle
from .ensemble import CapacityError, InvalidDensityError, place_particles
from .geometry import DomainBox, GridField
from .homogenized import ls_solve, pde_residual, power_balance
from .kernels import (
    REFERENCE_QUADRATURE_ORDER,
    DomainError,
    UnsupportedBackgroundError,
    WaveContext,
    incident_field,
    surface_self_integral,
)
from .manybody import NearFieldError, SolverError, evaluate_field, solve_effective_field, validity_ratio
from .recipe import PassivityError, RoundTripError, design_ensemble, p_to_hN, round_trip, target_to_p
from .scaling import (
    RegimeError,
    ResonanceError,
    ScalingLaw,
    classify_regime,
    effective_potential,
    monopole_charge,
    volume_fraction,
)
from .study import convergence_study, exterior_probes, far_mask

log = logging.getLogger("manyscat")

EXIT_OK, EXIT_REFUSED, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4

DEFAULTS = {
    "k": 1.0,
    "alpha": [0.0, 0.0, 1.0],
    "kappa": 0.5,
    "kappa1": None,
    "a": 0.02,
    "a_sweep": [0.04, 0.02, 0.01],
    "h": 1.0,
    "N": 1.0,
    "box": {"lo": [0.0, 0.0, 0.0], "hi": [1.0, 1.0, 1.0]},
    "cube_side": None,
    "grid": 16,
    "reference_resolution": 32,
    "seed": 0,
    "tol": 1e-10,
    "spacing_factor": None,
    "coupling": None,
    "probe_points": 9,
    "N_const": 1.0,
    "nsq": None,
    "n0sq": None,
    "p": None,
    "figures": True,
    "deterministic": False,
    "threads": None,
    "output_dir": "runs",
    "validate_cases": [[0.5, 1.0], [1.0, 1.0], [2.0, 10.0]],
    "validate_a_sweep": [0.02, 0.01, 0.005],
}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- config


def _complex_spec(value, name):
    """Constant (number, [re, im] or "1-0.5j") or path to a grid file."""
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", "")) if "j" in value else float(value)
        except ValueError:
            grid, _ = io.read_grid(value)
            return grid
    raise ConfigError(f"cannot interpret {name}={value!r}")


def load_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        try:
            cfg.update(json.loads(Path(args.config).read_text()))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    for key, value in vars(args).items():
        if key in ("command", "config", "verbose") or value is None:
            continue
        if key == "box_lo":
            cfg["box"] = {**cfg["box"], "lo": value}
        elif key == "box_hi":
            cfg["box"] = {**cfg["box"], "hi": value}
        else:
            cfg[key] = value
    if os.environ.get("MANYSCAT_OUTPUT_DIR"):
        cfg["output_dir"] = os.environ["MANYSCAT_OUTPUT_DIR"]
    if os.environ.get("MANYSCAT_THREADS"):
        cfg["threads"] = int(os.environ["MANYSCAT_THREADS"])
    unknown = set(cfg) - set(DEFAULTS) - {"run_dir"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return cfg


def _num(cfg, key, positive=False, nonneg=False):
    try:
        v = float(cfg[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} must be a number, got {cfg[key]!r}") from exc
    if not np.isfinite(v):
        raise ConfigError(f"{key} must be finite")
    if positive and not v > 0:
        raise ConfigError(f"{key} must be positive, got {v}")
    if nonneg and v < 0:
        raise ConfigError(f"{key} must be >= 0, got {v}")
    return v


def _context(cfg) -> WaveContext:
    k = _num(cfg, "k", nonneg=True)
    alpha = np.asarray(cfg["alpha"], dtype=float)
    if alpha.shape != (3,) or abs(np.linalg.norm(alpha) - 1) > 1e-12:
        raise ConfigError(f"alpha must be a unit 3-vector, got {cfg['alpha']}")
    return WaveContext(k, tuple(alpha))


def _box(cfg, default_cubes=2) -> DomainBox:
    b = cfg["box"]
    try:
        box = DomainBox(tuple(b["lo"]), tuple(b["hi"]))
        side = cfg["cube_side"] if cfg["cube_side"] is not None else min(box.sides) / default_cubes
        return DomainBox(box.lo, box.hi, float(side))
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad box specification {b!r}") from exc


def _check_passive(spec, name, box: DomainBox):
    pts = GridField.constant(box, 4, 0).centers()
    if isinstance(spec, GridField):
        vals = spec.values
    elif callable(spec):
        vals = spec(pts)
    else:
        vals = np.asarray([spec])
    if name == "h" and np.any(np.imag(vals) > 0):
        raise ConfigError("h must be passive: Im h <= 0")
    if name == "N" and (np.any(np.real(vals) < 0) or np.any(np.imag(vals) != 0)):
        raise ConfigError("N must be real and nonnegative")


def _law(cfg, box: DomainBox, a_key="a") -> ScalingLaw:
    kappa = _num(cfg, "kappa")
    kappa1 = _kappa1(cfg, kappa)
    if a_key == "a":
        a = _num(cfg, "a", positive=True)
    else:
        a = max(_a_sweep(cfg))
    h = _complex_spec(cfg["h"], "h")
    N = _complex_spec(cfg["N"], "N")
    if isinstance(N, complex):
        raise ConfigError("N must be real")
    _check_passive(h, "h", box)
    _check_passive(N, "N", box)
    law = ScalingLaw(kappa, kappa1, a, h, N)
    law.check()
    return law


def _kappa1(cfg, kappa: float) -> float:
    """Explicit kappa1, else the value for which a limit exists."""
    if cfg["kappa1"] is None:
        return (2 - kappa) / 3 if kappa < 1 else 1 / 3
    return _num(cfg, "kappa1")


def _a_sweep(cfg) -> list[float]:
    sweep = cfg["a_sweep"]
    if not isinstance(sweep, (list, tuple)) or len(sweep) < 1:
        raise ConfigError("a_sweep must be a non-empty list")
    out = [float(a) for a in sweep]
    if any(not (a > 0 and np.isfinite(a)) for a in out):
        raise ConfigError("every a in a_sweep must be positive")
    return sorted(out, reverse=True)


def _require_limit(law: ScalingLaw, command: str) -> None:
    rep = classify_regime(law)
    if not rep.limit_exists:
        raise RegimeError(
            f"{command} needs a homogenized limit, but the classifier reports "
            f"{rep.case_label} with limit_exists=false for kappa={law.kappa}, "
            f"kappa1={law.kappa1} (the limit requires kappa1={rep.matched_kappa1:.6g})"
        )


def _coupling(cfg, default_leading: bool) -> bool:
    c = cfg["coupling"]
    if c is None:
        return default_leading
    if c not in ("leading", "full"):
        raise ConfigError("coupling must be 'leading' or 'full'")
    return c == "leading"


def _run_dir(cfg, command: str) -> Path:
    if cfg.get("run_dir"):
        return Path(cfg["run_dir"])
    canon = json.dumps({k: v for k, v in cfg.items() if k != "output_dir"}, sort_keys=True, default=str)
    tag = hashlib.sha1(canon.encode()).hexdigest()[:8]
    return Path(cfg["output_dir"]) / f"{command}-seed{cfg['seed']}-{tag}"


@contextlib.contextmanager
def _threads(cfg):
    n = 1 if cfg["deterministic"] else cfg["threads"]
    if n is None:
        yield None
        return
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:  # pragma: no cover
        yield n
        return
    with threadpool_limits(limits=int(n)):
        yield n


# ---------------------------------------------------------------- commands


def cmd_simulate(cfg, out: Path) -> dict:
    ctx = _context(cfg)
    box = _box(cfg)
    law = _law(cfg, box)
    report = classify_regime(law)
    leading = _coupling(cfg, default_leading=False)
    ens = place_particles(law, box, int(cfg["seed"]), cfg["spacing_factor"])
    sol = solve_effective_field(ens, ctx, tol=cfg["tol"], leading_order=leading,
                                deterministic=cfg["deterministic"])
    probes = exterior_probes(box, int(cfg["probe_points"]))
    probes = probes[far_mask(probes, ens, 3.0)]
    u = evaluate_field(sol, ens, ctx, probes)
    u0 = incident_field(ctx, probes)
    io.write_manifest(out / "ensemble.csv", ens)
    io.write_solution(out / "solution.csv", sol, ens)
    io.write_points_csv(out / "probes.csv", probes, u, u0)
    summary = {
        "command": "simulate",
        "M": len(ens),
        "residual": sol.residual_norm,
        "iterations": sol.iterations,
        "solver": sol.solver_kind,
        "validity_ratio": validity_ratio(ens, ctx),
        "volume_fraction": volume_fraction(law),
        "particle_volume_total": 4 / 3 * np.pi * law.a**3 * len(ens),
        "pitch": ens.pitch,
        "regime": report.to_dict(),
        "leading_order": leading,
        "max_scattered_on_probes": float(np.max(np.abs(u - u0))) if len(u) else 0.0,
    }
    if cfg["figures"]:
        from . import plotting

        plotting.plot_ensemble(ens.centers, out / "ensemble.png", box)
        plotting.plot_probe_planes(probes, u, out / "probes.png", u0)
    return summary


def _homogenize_inputs(cfg):
    ctx = _context(cfg)
    res = int(cfg["grid"])
    if res < 2:
        raise ConfigError("grid resolution must be >= 2")
    if cfg["p"] is not None:
        p, _ = io.read_grid(cfg["p"])
        box, law = p.box, None
        if np.any(np.imag(p.values) > 0):
            raise ConfigError("p must satisfy Im p <= 0 (passive medium)")
    else:
        box = _box(cfg)
        law = _law(cfg, box)
        _require_limit(law, "homogenize")
        p = GridField.from_function(DomainBox(box.lo, box.hi), res, lambda x: effective_potential(law, x))
    if cfg["n0sq"] is not None:
        n0sq, _ = io.read_grid(cfg["n0sq"])
        if np.any(np.imag(n0sq.values) < 0):
            raise PassivityError("background must be passive: Im n0^2 >= 0")
        ctx = WaveContext(ctx.k, ctx.alpha, n0sq)
    return ctx, p, law


def cmd_homogenize(cfg, out: Path) -> dict:
    ctx, p, law = _homogenize_inputs(cfg)
    with _threads(cfg) as n:
        result = ls_solve(p, ctx, tol=cfg["tol"], workers=n)
    io.write_grid(out / "field.vox", result, ctx.k)
    io.write_grid(out / "p.vox", p, ctx.k)
    io.write_slice_csv(out / "slice_z.csv", result, axis=2)
    summary = {
        "command": "homogenize",
        "resolution": list(result.resolution),
        "residual": result.residual_norm,
        "iterations": result.iterations,
        "solver": result.solver_kind,
        "stable": result.stable,
        "power": power_balance(result, ctx),
        "regime": classify_regime(law).to_dict() if law else None,
    }
    if min(result.resolution) >= 16:
        summary["pde_residual"] = pde_residual(result, p, ctx)
    if cfg["figures"]:
        from . import plotting

        plotting.plot_slice(result, out / "slice_z.png", title="homogenized field, central z-plane")
    return summary


def cmd_converge(cfg, out: Path) -> dict:
    ctx = _context(cfg)
    box = _box(cfg)
    sweep = _a_sweep(cfg)
    law = _law(cfg, box, a_key="sweep")
    _require_limit(law, "converge")
    leading = _coupling(cfg, default_leading=True)
    runs = []
    report = convergence_study(
        law, sweep, box, ctx, seed=int(cfg["seed"]), tol=cfg["tol"],
        reference_resolution=int(cfg["reference_resolution"]), leading_order=leading,
        deterministic=cfg["deterministic"], probes=exterior_probes(box, int(cfg["probe_points"])),
        keep=runs,
    )
    rows = [r.to_dict() for r in report.rows]
    io.write_table_csv(out / "convergence.csv", rows)
    for ens, sol in runs:
        io.write_manifest(out / f"ensemble_a{ens.a:g}.csv", ens)
    summary = {"command": "converge", **report.to_dict()}
    if not report.strictly_decreasing():
        summary["warning"] = "discrepancy sequence is not strictly decreasing"
    if cfg["figures"]:
        from . import plotting

        plotting.plot_convergence([r.a for r in report.rows], report.discrepancies, out / "convergence.png")
    return summary


def _target_grids(cfg):
    if cfg["nsq"] is None:
        raise ConfigError("design needs a target n^2 (voxel file or number)")
    if isinstance(cfg["nsq"], str) and not _looks_numeric(cfg["nsq"]):
        nsq, _ = io.read_grid(cfg["nsq"])
    else:
        box = _box(cfg)
        nsq = GridField.constant(DomainBox(box.lo, box.hi), int(cfg["grid"]), _complex_spec(cfg["nsq"], "nsq"))
    if cfg["n0sq"] is None:
        n0sq = nsq.with_values(np.ones(nsq.resolution, complex))
    elif isinstance(cfg["n0sq"], str) and not _looks_numeric(cfg["n0sq"]):
        n0sq, _ = io.read_grid(cfg["n0sq"])
    else:
        n0sq = nsq.with_values(np.full(nsq.resolution, _complex_spec(cfg["n0sq"], "n0sq"), complex))
    return nsq, n0sq


def _looks_numeric(s: str) -> bool:
    try:
        complex(s.replace(" ", ""))
        return True
    except ValueError:
        return False


def cmd_design(cfg, out: Path) -> dict:
    ctx = _context(cfg)
    nsq, n0sq = _target_grids(cfg)
    kappa = _num(cfg, "kappa")
    if not 0 < kappa < 1:
        raise RegimeError(f"the design recipe needs 0 < kappa < 1, got {kappa}")
    if cfg["kappa1"] is not None:
        matched = (2 - kappa) / 3
        if abs(_num(cfg, "kappa1") - matched) > 1e-12:
            raise RegimeError(
                f"design needs kappa1 = (2 - kappa)/3 = {matched:.6g}, got {cfg['kappa1']}"
            )
    N_const = _num(cfg, "N_const", positive=True)
    sweep = _a_sweep(cfg)
    p = target_to_p(n0sq, nsq, ctx.k)
    design = p_to_hN(p, N_const, kappa)
    box = DomainBox(p.box.lo, p.box.hi)
    cube_side = cfg["cube_side"] if cfg["cube_side"] is not None else min(box.sides) / 2
    for name in ("p", "N", "h1", "h2"):
        io.write_grid(out / f"design_{name}.vox", getattr(design, name), ctx.k)
    summary = {
        "command": "design",
        "kappa": kappa,
        "kappa1": design.kappa1,
        "N_const": N_const,
        "empty": design.empty,
        "h1_mean": float(design.h1.values.mean()),
        "h2_mean": float(design.h2.values.mean()),
    }
    background_free = bool(np.all(n0sq.values == 1))
    if design.empty:
        ens = design_ensemble(design, sweep[-1], seed=int(cfg["seed"]), cube_side=cube_side)
        io.write_manifest(out / f"ensemble_a{sweep[-1]:g}.csv", ens)
        summary["particles"] = {str(sweep[-1]): len(ens)}
        summary["round_trip"] = None
    elif not background_free:
        summary["round_trip"] = None
        summary["note"] = "round trip skipped: the many-body model needs n0^2 = 1"
        for a in sweep:
            ens = design_ensemble(design, a, seed=int(cfg["seed"]), cube_side=cube_side)
            io.write_manifest(out / f"ensemble_a{a:g}.csv", ens)
    else:
        runs = []
        report = round_trip(
            design, sweep, ctx, seed=int(cfg["seed"]), tol=cfg["tol"], cube_side=cube_side,
            reference_resolution=int(cfg["reference_resolution"]),
            probes=exterior_probes(box, int(cfg["probe_points"])),
            leading_order=_coupling(cfg, default_leading=False), keep=runs,
        )
        for ens, _ in runs:
            io.write_manifest(out / f"ensemble_a{ens.a:g}.csv", ens)
        io.write_table_csv(out / "round_trip.csv", [r.to_dict() for r in report.rows])
        summary["round_trip"] = report.to_dict()
        summary["particles"] = {str(r.a): r.particles for r in report.rows}
        if cfg["figures"]:
            from . import plotting

            plotting.plot_convergence([r.a for r in report.rows],
                                      [r.relative_discrepancy for r in report.rows],
                                      out / "round_trip.png", label="designed vs target medium")
    summary["cube_counts"] = {str(a): c for a, c in design.counts.items()}
    return summary


def cmd_validate(cfg, out: Path) -> dict:
    ctx = _context(cfg)
    if ctx.k <= 0:
        raise ConfigError("validate needs k > 0")
    checks = []
    for a in (0.5, 1.0, 2.0):
        t = np.array([0.3, -0.4, np.sqrt(1 - 0.25)]) * a
        val = surface_self_integral(a, t, REFERENCE_QUADRATURE_ORDER)
        checks.append({"check": "surface_identity", "a": a, "value": val,
                       "error": abs(val - a), "passed": abs(val - a) <= 1e-6 * a})
    sweep = [float(a) for a in cfg["validate_a_sweep"]]
    rows = []
    for kappa, h in cfg["validate_cases"]:
        kappa, h = float(kappa), complex(*h) if isinstance(h, list) else float(h)
        devs = []
        for a in sweep:
            zeta = h / a**kappa
            sol = oracle.sphere_series(a, ctx, zeta)
            q_exact = oracle.extract_monopole(sol)
            q_formula = monopole_charge(ScalingLaw(kappa, 1 / 3, a, h), np.zeros(3), 1.0)
            dev = abs(q_exact / q_formula - 1)
            devs.append(dev)
            rows.append({"kappa": kappa, "h": str(h), "a": a, "ka": ctx.k * a,
                         "q_exact": q_exact, "q_formula": q_formula, "deviation": dev})
        decreasing = all(y < x for x, y in zip(devs, devs[1:]))
        checks.append({"check": "oracle_vs_formula", "kappa": kappa, "h": str(h),
                       "deviations": devs, "passed": bool(devs[0] <= 0.10 and decreasing)})
        a = sweep[-1]
        sol = oracle.sphere_series(a, ctx, h / a**kappa)
        rng = np.random.default_rng(int(cfg["seed"]))
        v = rng.normal(size=(200, 3))
        surf = a * v / np.linalg.norm(v, axis=1, keepdims=True)
        bc = sol.boundary_residual(surf)
        more = oracle.sphere_series(a, ctx, h / a**kappa, l_max=sol.l_max + 5)
        trunc = abs(oracle.extract_monopole(more) / oracle.extract_monopole(sol) - 1)
        checks.append({"check": "series_self_consistency", "kappa": kappa, "a": a,
                       "boundary_residual": bc, "truncation_change": trunc,
                       "passed": bc <= 1e-8 and trunc <= 1e-10})
    io.write_table_csv(out / "oracle.csv", [
        {**r, "q_exact": repr(r["q_exact"]), "q_formula": repr(r["q_formula"])} for r in rows
    ])
    if cfg["figures"]:
        from . import plotting

        series = {}
        for kappa, h in cfg["validate_cases"]:
            series[f"kappa={kappa}, h={h}"] = [r["deviation"] for r in rows if r["kappa"] == float(kappa)]
        first = next(iter(series))
        plotting.plot_convergence(sweep, series.pop(first), out / "oracle.png", label=first, extra=series)
    return {"command": "validate", "checks": checks, "passed": all(c["passed"] for c in checks)}


COMMANDS = {
    "simulate": cmd_simulate,
    "homogenize": cmd_homogenize,
    "converge": cmd_converge,
    "design": cmd_design,
    "validate": cmd_validate,
}


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="manyscat", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--k", type=float)
        p.add_argument("--alpha", type=float, nargs=3)
        p.add_argument("--kappa", type=float)
        p.add_argument("--kappa1", type=float)
        p.add_argument("--a", type=float)
        p.add_argument("--a-sweep", dest="a_sweep", type=float, nargs="+")
        p.add_argument("--h", help="number, complex like 1-0.5j, or grid file")
        p.add_argument("--N", help="number or grid file")
        p.add_argument("--box-lo", dest="box_lo", type=float, nargs=3)
        p.add_argument("--box-hi", dest="box_hi", type=float, nargs=3)
        p.add_argument("--cube-side", dest="cube_side", type=float)
        p.add_argument("--grid", type=int)
        p.add_argument("--reference-resolution", dest="reference_resolution", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--tol", type=float)
        p.add_argument("--spacing-factor", dest="spacing_factor", type=float)
        p.add_argument("--coupling", choices=["leading", "full"])
        p.add_argument("--probe-points", dest="probe_points", type=int)
        p.add_argument("--N-const", dest="N_const", type=float)
        p.add_argument("--nsq", help="target n^2: grid file or number")
        p.add_argument("--n0sq", help="background n0^2: grid file or number")
        p.add_argument("--p", help="potential grid file (homogenize)")
        p.add_argument("--output-dir", dest="output_dir")
        p.add_argument("--run-dir", dest="run_dir")
        p.add_argument("--threads", type=int)
        p.add_argument("--deterministic", action="store_true", default=None)
        p.add_argument("--no-figures", dest="figures", action="store_false", default=None)
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _classify_error(exc: BaseException) -> int:
    if isinstance(exc, RoundTripError):
        return _classify_error(exc.cause)
    if isinstance(exc, (io.FormatError, OSError)):
        return EXIT_IO
    if isinstance(exc, (SolverError, np.linalg.LinAlgError, ArithmeticError)) and not isinstance(exc, ResonanceError):
        return EXIT_SOLVER
    if isinstance(exc, (ConfigError, RegimeError, PassivityError, DomainError, CapacityError,
                        InvalidDensityError, UnsupportedBackgroundError, NearFieldError,
                        ResonanceError, ValueError, KeyError, TypeError)):
        return EXIT_REFUSED
    return EXIT_SOLVER


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = None
    try:
        cfg = load_config(args)
        out = _run_dir(cfg, args.command)
        out.mkdir(parents=True, exist_ok=True)
        io.write_json(out / "config.json", {"command": args.command, **cfg})
        with _threads(cfg):
            summary = COMMANDS[args.command](cfg, out)
        io.write_json(out / "summary.json", summary)
    except Exception as exc:  # every failure maps to an exit code and a record
        code = _classify_error(exc)
        record = {"status": "error", "exit_code": code, "error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(record), file=sys.stderr)
        if out is not None and out.is_dir():
            with contextlib.suppress(OSError):
                io.write_json(out / "error.json", record)
        log.debug("failure", exc_info=True)
        return code
    print(json.dumps({"status": "ok", "run_dir": str(out)}))
    if args.command == "validate" and not summary["passed"]:
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
