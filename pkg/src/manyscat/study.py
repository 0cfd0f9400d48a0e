"""Convergence of the many-body field toward the homogenized field along an a-sweep."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .ensemble import ParticleEnsemble, place_particles
from .geometry import DomainBox, GridField
from .homogenized import LSResult, field_at, ls_solve
from .kernels import WaveContext
from .manybody import evaluate_field, solve_effective_field, validity_ratio
from .scaling import RegimeError, ScalingLaw, classify_regime, effective_potential

log = logging.getLogger(__name__)

REFERENCE_RESOLUTION = 32


def exterior_probes(box: DomainBox, n: int = 9, gap: float = 0.5) -> np.ndarray:
    """Two n-by-n planar grids, ``gap * side`` below and above the box along z.

    The planes span the box footprint enlarged by ``gap`` on each side, so they
    catch both back-scattered and forward (shadow) fields for incidence along z.
    """
    lo, hi = np.array(box.lo), np.array(box.hi)
    side = hi - lo
    xs = np.linspace(lo[0] - gap * side[0], hi[0] + gap * side[0], n)
    ys = np.linspace(lo[1] - gap * side[1], hi[1] + gap * side[1], n)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    planes = [
        np.stack([X.ravel(), Y.ravel(), np.full(X.size, z)], axis=1)
        for z in (lo[2] - gap * side[2], hi[2] + gap * side[2])
    ]
    return np.concatenate(planes)


def far_mask(points: np.ndarray, ensemble: ParticleEnsemble, radii: float = 5.0) -> np.ndarray:
    """True for points at least ``radii * a`` from every particle center."""
    keep = np.ones(len(points), bool)
    if not len(ensemble):
        return keep
    for start in range(0, len(points), 256):
        blk = points[start : start + 256]
        d = np.linalg.norm(blk[:, None, :] - ensemble.centers[None, :, :], axis=-1)
        keep[start : start + 256] = d.min(axis=1) >= radii * ensemble.a
    return keep


def refine_grid(p: GridField, min_resolution: int) -> GridField:
    """Nearest-voxel resampling of ``p`` onto an integer refinement with >= min_resolution per axis."""
    m = max(1, int(np.ceil(min_resolution / min(p.resolution))))
    if m == 1:
        return p
    res = tuple(n * m for n in p.resolution)
    return GridField.from_function(p.box, res, p.sample)


def limit_potential(law: ScalingLaw, box: DomainBox, resolution: int) -> GridField:
    return GridField.from_function(box, resolution, lambda x: effective_potential(law, x))


@dataclass
class SweepRow:
    a: float
    particles: int
    discrepancy: float
    relative_discrepancy: float
    residual: float
    validity_ratio: float
    spacing: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class SweepReport:
    rows: list[SweepRow]
    reference_resolution: int
    reference_residual: float
    probes: np.ndarray = field(repr=False)
    extra: dict = field(default_factory=dict)

    @property
    def discrepancies(self) -> list[float]:
        return [r.discrepancy for r in self.rows]

    def strictly_decreasing(self) -> bool:
        d = self.discrepancies
        return all(y < x for x, y in zip(d, d[1:]))

    def non_increasing(self, slack: float = 0.0) -> bool:
        d = self.discrepancies
        return all(y <= (1 + slack) * x for x, y in zip(d, d[1:]))

    def to_dict(self) -> dict:
        return {
            "rows": [r.to_dict() for r in self.rows],
            "reference_resolution": self.reference_resolution,
            "reference_residual": self.reference_residual,
            "strictly_decreasing": self.strictly_decreasing(),
            **self.extra,
        }


def run_sweep(
    make_law,
    a_sweep,
    box: DomainBox,
    ctx: WaveContext,
    reference: LSResult,
    probes: np.ndarray,
    seed: int = 0,
    tol: float = 1e-10,
    leading_order: bool = False,
    deterministic: bool = False,
    spacing_factor: float | None = None,
    keep=None,
) -> SweepReport:
    """Many-body solves along ``a_sweep`` compared to ``reference`` on the probes.

    ``make_law(a)`` returns the scaling law at radius a. Probes within 5a of any
    particle are excluded. ``keep`` collects (ensemble, solution) pairs if given.
    """
    u_ref_all = field_at(reference, ctx, probes)
    rows = []
    for a in sorted(a_sweep, reverse=True):
        law = make_law(a)
        ens = place_particles(law, box, seed, spacing_factor=spacing_factor)
        sol = solve_effective_field(ens, ctx, tol=tol, leading_order=leading_order,
                                    deterministic=deterministic)
        mask = far_mask(probes, ens)
        pts, u_ref = probes[mask], u_ref_all[mask]
        u = evaluate_field(sol, ens, ctx, pts) if len(pts) else np.zeros(0)
        diff = float(np.max(np.abs(u - u_ref))) if len(pts) else 0.0
        rel = diff / float(np.max(np.abs(u_ref))) if len(pts) else 0.0
        rows.append(SweepRow(a, len(ens), diff, rel, sol.residual_norm, validity_ratio(ens), ens.pitch or 0.0))
        log.info("a=%g M=%d discrepancy=%.4e", a, len(ens), diff)
        if keep is not None:
            keep.append((ens, sol))
    return SweepReport(rows, reference.resolution[0], reference.residual_norm, probes)


def convergence_study(
    law: ScalingLaw,
    a_sweep,
    box: DomainBox,
    ctx: WaveContext,
    seed: int = 0,
    tol: float = 1e-10,
    reference_resolution: int = REFERENCE_RESOLUTION,
    leading_order: bool = True,
    deterministic: bool = False,
    probes: np.ndarray | None = None,
    keep=None,
) -> SweepReport:
    """Many-body vs homogenized fields for ``law`` at each radius in ``a_sweep``.

    Requires a regime with a limiting medium. ``leading_order=True`` uses the
    couplings 4 pi h a^(2-kappa) (kappa < 1) and 4 pi a (kappa > 1).
    """
    report = classify_regime(law)
    if not report.limit_exists:
        raise RegimeError(
            f"{report.case_label}: no homogenized limit for kappa={law.kappa}, "
            f"kappa1={law.kappa1}; the limit needs kappa1={report.matched_kappa1:.6g}"
        )
    p = limit_potential(law, box, reference_resolution)
    reference = ls_solve(p, ctx, tol=tol)
    if probes is None:
        probes = exterior_probes(box)
    sweep = run_sweep(
        law.with_radius, a_sweep, box, ctx, reference, probes, seed, tol,
        leading_order, deterministic, keep=keep,
    )
    sweep.extra["regime"] = report.to_dict()
    sweep.extra["leading_order"] = leading_order
    return sweep
