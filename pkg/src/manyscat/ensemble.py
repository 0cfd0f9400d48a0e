"""Particle configurations: per-cube counts and seeded lattice placement."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import DomainBox
from .scaling import RegimeError, ScalingLaw, classify_regime

#: cube_side must be at least this many radii for counting to make sense
MIN_CUBE_RADII = 10.0


class InvalidDensityError(ValueError):
    pass


class CapacityError(ValueError):
    """A cube cannot hold its particle count on a lattice of the requested pitch."""


@dataclass(frozen=True, eq=False)
class ParticleEnsemble:
    centers: np.ndarray = field(repr=False)
    a: float
    zeta: np.ndarray = field(repr=False)
    law: ScalingLaw
    seed: int | None = None
    box: DomainBox | None = None
    cube_counts: tuple[int, ...] = ()
    pitch: float | None = None

    def __post_init__(self):
        c = np.array(self.centers, dtype=float).reshape(-1, 3)
        z = np.array(self.zeta, dtype=complex).reshape(-1)
        if len(z) != len(c):
            raise ValueError("one impedance per center is required")
        c.setflags(write=False)
        z.setflags(write=False)
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "zeta", z)
        object.__setattr__(self, "cube_counts", tuple(int(n) for n in self.cube_counts))

    @classmethod
    def from_centers(cls, centers, law: ScalingLaw, box: DomainBox | None = None):
        """Hand-built ensemble; balls may not overlap."""
        c = np.array(centers, dtype=float).reshape(-1, 3)
        if len(c) > 1 and min_pairwise_distance(c) <= 2 * law.a:
            raise ValueError("balls overlap")
        return cls(c, law.a, law.zeta_at(c) if len(c) else [], law, box=box)

    def __len__(self) -> int:
        return len(self.centers)

    @property
    def h(self) -> np.ndarray:
        """h(x_m) recovered as zeta_m * a**kappa."""
        return self.zeta * self.a**self.law.kappa


def min_pairwise_distance(points: np.ndarray) -> float:
    p = np.asarray(points, dtype=float)
    if len(p) < 2:
        return np.inf
    best = np.inf
    for start in range(0, len(p), 512):
        blk = p[start : start + 512]
        d = np.linalg.norm(blk[:, None, :] - p[None, :, :], axis=-1)
        idx = np.arange(start, start + len(blk))
        d[np.arange(len(blk)), idx] = np.inf
        best = min(best, float(d.min()))
    return best


def _integrate_N(law: ScalingLaw, cube: DomainBox, refine: int) -> float:
    """Midpoint rule for the integral of N over a cube with refine**3 cells."""
    axes = [lo + (np.arange(refine) + 0.5) * (hi - lo) / refine for lo, hi in zip(cube.lo, cube.hi)]
    X, Y, Z = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)
    N = law.N_at(pts)
    if np.any(N < 0):
        raise InvalidDensityError(f"negative density N inside cube at {cube.lo}")
    return float(N.mean() * cube.volume)


def expected_count(law: ScalingLaw, cube: DomainBox, refine: int = 4) -> float:
    """Unrounded particle count a**(-3 kappa1) * integral of N over the cube."""
    return law.a ** (-3 * law.kappa1) * _integrate_N(law, cube, refine)


def cube_count(law: ScalingLaw, cube: DomainBox, refine: int = 4) -> int:
    """Nearest integer (ties to even) to a**(-3 kappa1) * integral of N over the cube.

    When kappa1 = (2 - kappa)/3 the prefactor is a**-(2 - kappa).
    """
    if not classify_regime(law).approximation_valid:
        raise RegimeError(f"particle counting needs 0 <= kappa1 < 1, got {law.kappa1}")
    return int(np.rint(expected_count(law, cube, refine)))


def _lattice_side(count: int) -> int:
    n = max(int(round(count ** (1 / 3))), 1)
    while n**3 < count:
        n += 1
    while n > 1 and (n - 1) ** 3 >= count:
        n -= 1
    return n


def auto_spacing_factor(law: ScalingLaw, b: float, counts) -> float:
    """Largest prefactor <= 1 for which every cube's count fits its sub-lattice."""
    d = law.spacing
    factor = 1.0
    for n in counts:
        if n > 0:
            side = _lattice_side(n)
            if side > 1:
                factor = min(factor, b / (side * d))
    return factor


def _symmetric_order(n_side: int, rng: np.random.Generator) -> np.ndarray:
    """Site order over an n_side**3 lattice built from point-reflected pairs."""
    n = n_side**3
    mirror = n - 1 - np.arange(n)  # C-order index of the reflected site
    first = np.flatnonzero(np.arange(n) < mirror)
    rng.shuffle(first)
    order = np.empty(n, dtype=int)
    start = 0
    if n % 2:
        order[0] = n // 2
        start = 1
    order[start::2] = first
    order[start + 1 :: 2] = mirror[first]
    return order


def place_particles(
    law: ScalingLaw,
    box: DomainBox,
    seed: int = 0,
    spacing_factor: float | None = None,
    refine: int = 4,
    symmetric: bool = True,
) -> ParticleEnsemble:
    """Fill each cube of ``box`` with its :func:`cube_count` particles.

    Each cube carries a centered cubic sub-lattice of pitch
    ``spacing_factor * a**kappa1``; sites are drawn in a seeded random order.
    ``spacing_factor=None`` picks the largest factor <= 1 that makes every
    cube feasible, so the pitch is exactly a**kappa1 whenever that fits.

    With ``symmetric=True`` sites are drawn in pairs mirrored through the
    cube center (the center site first when the lattice has one), so a
    partially filled cube keeps its centroid at the cube center. With
    ``symmetric=False`` the order is a plain permutation.
    """
    law.check()
    if box.cube_side is None:
        raise ValueError("box needs a cube partition (cube_side)")
    a, b = law.a, box.cube_side
    if b < MIN_CUBE_RADII * a:
        raise ValueError(f"cube_side {b} must be >= {MIN_CUBE_RADII:g} a = {MIN_CUBE_RADII * a}")
    cubes = box.cubes()
    counts = [cube_count(law, c, refine) for c in cubes]
    if spacing_factor is None:
        spacing_factor = auto_spacing_factor(law, b, counts)
    if not spacing_factor > 0:
        raise ValueError("spacing_factor must be positive")
    pitch = spacing_factor * law.spacing
    n_side = max(int(np.floor(b / pitch * (1 + 1e-12))), 1)
    offset = 0.5 * (b - (n_side - 1) * pitch)
    if offset < a:
        raise CapacityError(f"lattice pitch {pitch:.4g} leaves less than a clearance from cube faces")
    local = offset + pitch * np.arange(n_side)
    L = np.stack(np.meshgrid(local, local, local, indexing="ij"), axis=-1).reshape(-1, 3)

    rng = np.random.default_rng(seed)
    pieces = []
    for idx, (cube, n) in enumerate(zip(cubes, counts)):
        if n > len(L):
            raise CapacityError(
                f"cube {idx} at {cube.lo} needs {n} particles but its pitch-{pitch:.4g} "
                f"sub-lattice has {len(L)} sites"
            )
        order = _symmetric_order(n_side, rng) if symmetric else rng.permutation(len(L))
        pieces.append(np.array(cube.lo) + L[np.sort(order[:n])])
    centers = np.concatenate(pieces) if pieces else np.zeros((0, 3))
    zeta = law.zeta_at(centers) if len(centers) else np.zeros(0, complex)
    return ParticleEnsemble(centers, a, zeta, law, seed, box, counts, pitch)


def empirical_density(ensemble: ParticleEnsemble, probe: DomainBox) -> float:
    """Empirical N: (centers in probe) * a**(3 kappa1) / |probe|."""
    if not probe.volume > 0:
        raise ValueError("probe has zero volume")
    n = int(np.count_nonzero(probe.contains(ensemble.centers))) if len(ensemble) else 0
    return n * ensemble.a ** (3 * ensemble.law.kappa1) / probe.volume
