"""Scaling laws zeta = h / a**kappa, d ~ a**kappa1 and the resulting charges.

A :class:`ScalingLaw` carries the two exponents, the particle radius and the
position-dependent impedance weight ``h(x)`` and density ``N(x)``. The
functions here turn it into the single-particle surface density, monopole
charge and the potential of the limiting medium.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .geometry import GridField

EXPONENT_TOL = 1e-12

CASE1 = "Case1"
THEOREM1 = "Theorem1"
CASE2 = "Case2"
UNSUPPORTED = "Unsupported"

FieldSpec = Union[complex, float, GridField, Callable[[np.ndarray], np.ndarray]]


class RegimeError(ValueError):
    """The scaling law is outside the range where an operation is valid."""


class ResonanceError(ArithmeticError):
    """Vanishing denominator 1 + h a**(1 - kappa)."""


def as_field(spec: FieldSpec) -> Callable[[np.ndarray], np.ndarray]:
    """Wrap a constant, a GridField or a callable as a vectorized evaluator."""
    if isinstance(spec, GridField):
        return spec.sample
    if callable(spec):
        return spec
    value = complex(spec) if np.iscomplexobj(spec) else float(spec)

    def const(points):
        return np.full(len(np.atleast_2d(points)), value)

    const.constant = value
    return const


@dataclass(frozen=True, eq=False)
class ScalingLaw:
    kappa: float
    kappa1: float
    a: float
    h: FieldSpec = 1.0
    N: FieldSpec = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.a) and self.a > 0):
            raise RegimeError(f"particle radius must be positive, got {self.a}")
        if not (np.isfinite(self.kappa) and np.isfinite(self.kappa1)):
            raise RegimeError("exponents must be finite")
        object.__setattr__(self, "_h", as_field(self.h))
        object.__setattr__(self, "_N", as_field(self.N))

    def h_at(self, x) -> np.ndarray:
        return np.asarray(self._h(np.atleast_2d(x)), dtype=complex)

    def N_at(self, x) -> np.ndarray:
        return np.real(np.asarray(self._N(np.atleast_2d(x)))).astype(float)

    def zeta_at(self, x) -> np.ndarray:
        """Boundary impedance h(x) / a**kappa."""
        return self.h_at(x) / self.a**self.kappa

    @property
    def spacing(self) -> float:
        """Nominal neighbor distance a**kappa1."""
        return self.a**self.kappa1

    def with_radius(self, a: float) -> "ScalingLaw":
        return ScalingLaw(self.kappa, self.kappa1, a, self.h, self.N)

    def check(self, points=None) -> None:
        """Raise :class:`RegimeError` unless the law's invariants hold.

        ``h`` and ``N`` are sampled at ``points`` when given.
        """
        if not self.kappa > -1:
            raise RegimeError(f"kappa must exceed -1, got {self.kappa}")
        if not 0 <= self.kappa1 < 1:
            raise RegimeError(
                f"kappa1 must lie in [0, 1) for the monopole approximation, got {self.kappa1}"
            )
        if points is not None:
            h = self.h_at(points)
            if np.any(h.imag > 0):
                raise RegimeError("impedance weight must be passive: Im h <= 0")
            if np.any(self.N_at(points) < 0):
                raise RegimeError("density N must be nonnegative")


@dataclass(frozen=True)
class RegimeReport:
    case_label: str
    limit_exists: bool
    matched_kappa1: float
    approximation_valid: bool
    volume_fraction_exponent: float
    potential_law: str

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def classify_regime(law: ScalingLaw) -> RegimeReport:
    kappa, kappa1 = law.kappa, law.kappa1
    approx = 0 <= kappa1 < 1
    vf = 3 - 3 * kappa1
    remark_case = abs(kappa + 1) <= EXPONENT_TOL and abs(kappa1 - 1) <= EXPONENT_TOL
    if not approx or kappa <= -1 or remark_case:
        matched = (2 - kappa) / 3 if kappa < 1 else 1 / 3
        return RegimeReport(UNSUPPORTED, False, matched, approx and not remark_case, vf, "none")
    if abs(kappa - 1) <= EXPONENT_TOL:
        matched = 1 / 3
        label, law_name = THEOREM1, "4*pi*N*h/(1+h)"
        exists = abs(kappa1 - matched) <= EXPONENT_TOL
    elif kappa < 1:
        matched = (2 - kappa) / 3
        label, law_name = CASE1, "4*pi*h*N"
        # kappa <= 0 lies outside the proven range 0 < kappa < 1
        exists = kappa > 0 and abs(kappa1 - matched) <= EXPONENT_TOL
    else:
        matched = 1 / 3
        label, law_name = CASE2, "4*pi*N"
        exists = abs(kappa1 - matched) <= EXPONENT_TOL
    return RegimeReport(label, exists, matched, approx, vf, law_name)


def _denominator(law: ScalingLaw, h: np.ndarray) -> np.ndarray:
    denom = 1 + h * law.a ** (1 - law.kappa)
    if np.any(np.abs(denom) < 1e-12):
        raise ResonanceError("1 + h a^(1-kappa) vanishes: resonant impedance")
    return denom


def _require_approximation(law: ScalingLaw) -> None:
    if not classify_regime(law).approximation_valid:
        raise RegimeError(
            f"monopole approximation needs 0 <= kappa1 < 1, got kappa1={law.kappa1}"
        )


def _scalar_if(x_m, value):
    return complex(value[0]) if np.ndim(x_m) == 1 else value


def surface_density(law: ScalingLaw, x_m, u_e_at_xm):
    """Asymptotic surface density -h u_e a**-kappa / (1 + h a**(1 - kappa)).

    Reduces to -h u_e / a**kappa for kappa < 1 and to -u_e / a for kappa > 1.
    Vectorized over an (n, 3) array of centers.
    """
    _require_approximation(law)
    h = law.h_at(x_m)
    sigma = -h * np.asarray(u_e_at_xm) * law.a ** (-law.kappa) / _denominator(law, h)
    return _scalar_if(x_m, np.atleast_1d(sigma))


def monopole_charge(law: ScalingLaw, x_m, u_e_at_xm):
    """Total charge 4 pi a^2 * surface density of a ball of radius a.

    Equals -4 pi h a**(2-kappa) u_e / (1 + h a**(1-kappa)); the (4 pi/3) a^3
    Laplacian term is not included.
    """
    sigma = np.atleast_1d(surface_density(law, x_m, u_e_at_xm))
    return _scalar_if(x_m, 4 * np.pi * law.a**2 * sigma)


def coupling(law: ScalingLaw, x_m, leading_order: bool = False) -> np.ndarray:
    """Per-particle coupling g with Q = -g u_e.

    ``leading_order`` drops the denominator for kappa < 1 and uses 4 pi a for
    kappa > 1; at kappa = 1 the full ratio is already the leading term.
    """
    _require_approximation(law)
    h = law.h_at(x_m)
    a, kappa = law.a, law.kappa
    if leading_order:
        label = classify_regime(law).case_label
        if label == CASE1:
            return 4 * np.pi * h * a ** (2 - kappa)
        if label == CASE2:
            return np.full(h.shape, 4 * np.pi * a, dtype=complex)
    return 4 * np.pi * h * a ** (2 - kappa) / _denominator(law, h)


def effective_potential(law: ScalingLaw, x):
    """Potential p(x) of the limiting medium for the law's regime."""
    report = classify_regime(law)
    if not report.limit_exists:
        raise RegimeError(
            f"no limiting medium for kappa={law.kappa}, kappa1={law.kappa1} "
            f"({report.case_label}; the limit needs kappa1={report.matched_kappa1:.6g})"
        )
    N = law.N_at(x)
    if report.case_label == CASE2:
        p = 4 * np.pi * N.astype(complex)
    else:
        h = law.h_at(x)
        if report.case_label == CASE1:
            p = 4 * np.pi * h * N
        else:
            if np.any(np.abs(1 + h) < 1e-14):
                raise ZeroDivisionError("h = -1 makes 4 pi N h / (1 + h) singular")
            p = 4 * np.pi * N * h / (1 + h)
    return _scalar_if(x, np.atleast_1d(p))


def volume_fraction(law: ScalingLaw) -> float:
    """Order of the total particle volume, a**(3 - 3 kappa1)."""
    return law.a ** (3 - 3 * law.kappa1)
