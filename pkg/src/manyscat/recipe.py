"""Design of a particle suspension with a prescribed refraction coefficient.

Given the background n0^2 and the target n^2 on a voxel grid, the potential
p = k^2 (n0^2 - n^2) has to be produced by particles with p = 4 pi h N. With
N held constant on the support of p, h = p / (4 pi N); each partition cube
then receives round(a^-(2 - kappa) * int N) balls of impedance h(x_m)/a^kappa.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ensemble import ParticleEnsemble, place_particles
from .geometry import DomainBox, GridField
from .homogenized import ls_solve
from .kernels import UnsupportedBackgroundError, WaveContext
from .scaling import RegimeError, ScalingLaw
from .study import REFERENCE_RESOLUTION, SweepReport, exterior_probes, refine_grid, run_sweep

#: relative growth tolerated between consecutive a in a round-trip sweep
ROUND_TRIP_SLACK = 0.10
DEFAULT_KAPPA = 0.5


class PassivityError(ValueError):
    """Target or background refraction coefficient with Im n^2 < 0."""


class RoundTripError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"round_trip failed at stage {stage!r}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True, eq=False)
class RecipeDesign:
    p: GridField
    N: GridField
    h1: GridField
    h2: GridField
    kappa: float = DEFAULT_KAPPA
    counts: dict = field(default_factory=dict)

    @property
    def kappa1(self) -> float:
        return (2 - self.kappa) / 3

    @property
    def h(self) -> GridField:
        return self.h1.with_values(self.h1.values + 1j * self.h2.values)

    @property
    def empty(self) -> bool:
        return not np.any(self.N.values)

    def law(self, a: float) -> ScalingLaw:
        return ScalingLaw(self.kappa, self.kappa1, a, self.h, self.N)


def target_to_p(n0sq: GridField, nsq: GridField, k: float) -> GridField:
    """p = k^2 (n0^2 - n^2); passivity Im n^2 >= 0 gives Im p <= 0."""
    if not n0sq.conformal(nsq):
        raise ValueError("n0^2 and n^2 grids must be conformal")
    if np.any(np.imag(nsq.values) < 0):
        raise PassivityError("target must be passive: Im n^2 >= 0 everywhere")
    if np.any(np.imag(n0sq.values) < 0):
        raise PassivityError("background must be passive: Im n0^2 >= 0 everywhere")
    p = k**2 * (np.asarray(n0sq.values, complex) - np.asarray(nsq.values, complex))
    # n^2 = n0^2 must give exactly zero, not rounding noise
    p[nsq.values == n0sq.values] = 0.0
    return nsq.with_values(p)


def p_to_hN(p: GridField, N_const: float = 1.0, kappa: float = DEFAULT_KAPPA) -> RecipeDesign:
    """Constant-density allocation: N = N_const and h = p/(4 pi N) on the support of p."""
    if not N_const > 0:
        raise ValueError("N_const must be positive")
    if not 0 < kappa < 1:
        raise RegimeError(f"the recipe needs 0 < kappa < 1, got {kappa}")
    pv = np.asarray(p.values, complex)
    if np.any(pv.imag > 0):
        raise PassivityError("Im p must be <= 0")
    support = pv != 0
    N = np.where(support, float(N_const), 0.0)
    h = np.where(support, pv / (4 * np.pi * N_const), 0.0)
    return RecipeDesign(
        p=p.with_values(pv),
        N=p.with_values(N),
        h1=p.with_values(h.real.copy()),
        h2=p.with_values(h.imag.copy()),
        kappa=kappa,
    )


def design_box(design: RecipeDesign, cube_side: float | None = None) -> DomainBox:
    box = design.p.box
    if cube_side is None:
        cube_side = min(box.sides) / 2
    return DomainBox(box.lo, box.hi, cube_side)


def design_ensemble(
    design: RecipeDesign,
    a: float,
    kappa: float | None = None,
    seed: int = 0,
    cube_side: float | None = None,
    spacing_factor: float | None = None,
) -> ParticleEnsemble:
    """Place the design's particles at radius a with spacing a^((2 - kappa)/3)."""
    if kappa is not None and kappa != design.kappa:
        design = RecipeDesign(design.p, design.N, design.h1, design.h2, kappa)
    if not 0 < design.kappa < 1:
        raise RegimeError(f"the recipe needs 0 < kappa < 1, got {design.kappa}")
    ens = place_particles(design.law(a), design_box(design, cube_side), seed, spacing_factor)
    design.counts[a] = list(ens.cube_counts)
    return ens


def round_trip(
    design: RecipeDesign,
    a_sweep,
    ctx: WaveContext,
    seed: int = 0,
    tol: float = 1e-10,
    cube_side: float | None = None,
    reference_resolution: int = REFERENCE_RESOLUTION,
    probes: np.ndarray | None = None,
    leading_order: bool = False,
    keep=None,
) -> SweepReport:
    """Compare the designed suspension with the target medium along an a-sweep.

    The reference is the volume solve with the target p (refined to at least
    ``reference_resolution`` voxels per axis); discrepancies are relative sup
    norms on exterior probes. ``report.extra['non_increasing']`` applies the
    ROUND_TRIP_SLACK tolerance.
    """
    if not ctx.free_space:
        raise UnsupportedBackgroundError("round_trip needs a free-space background (n0^2 = 1)")
    stage = "reference"
    runs = [] if keep is None else keep
    try:
        box = design_box(design, cube_side)
        p_ref = refine_grid(design.p, reference_resolution)
        reference = ls_solve(p_ref, ctx, tol=tol)
        if probes is None:
            probes = exterior_probes(box)
        stage = "many-body"
        report = run_sweep(
            design.law, a_sweep, box, ctx, reference, probes, seed, tol,
            leading_order, keep=runs,
        )
    except Exception as exc:
        raise RoundTripError(stage, exc) from exc
    for ens, _ in runs[-len(report.rows):]:
        design.counts[ens.a] = list(ens.cube_counts)
    report.extra["non_increasing"] = report.non_increasing(ROUND_TRIP_SLACK)
    report.extra["slack"] = ROUND_TRIP_SLACK
    return report
