"""Exact plane-wave scattering by a single impedance ball (separation of variables).

The total field outside the ball of radius a centered at x_c is

    u = u0(x_c) * sum_l i^l (2l + 1) [j_l(kr) + c_l h_l(kr)] P_l(cos theta),

theta measured from the incident direction, with c_l fixed by the Robin
condition du/dr = zeta u at r = a (r pointing out of the ball).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import eval_legendre

from .kernels import DomainError, WaveContext, incident_field
from .scaling import ResonanceError
from .special import hn1_and_derivative, jn_and_derivative

L_MARGIN = 10


@dataclass(frozen=True, eq=False)
class SphereSeriesSolution:
    a: float
    k: float
    zeta: complex
    coeffs: np.ndarray = field(repr=False)
    l_max: int
    center: tuple = (0.0, 0.0, 0.0)
    alpha: tuple = (0.0, 0.0, 1.0)
    amplitude: complex = 1.0

    def _polar(self, points):
        d = np.atleast_2d(points) - np.asarray(self.center)
        r = np.linalg.norm(d, axis=1)
        cos_t = np.clip(d @ np.asarray(self.alpha) / r, -1.0, 1.0)
        return r, cos_t

    def _series(self, r: np.ndarray, cos_t: np.ndarray, scattered_only=False):
        ell = np.arange(self.l_max + 1)
        pref = (1j**ell) * (2 * ell + 1)
        P = eval_legendre(ell[:, None], cos_t[None, :])
        u = np.zeros(len(r), complex)
        du = np.zeros(len(r), complex)
        for i, ri in enumerate(r):
            kr = self.k * ri
            h, hp = hn1_and_derivative(self.l_max, kr)
            radial = self.coeffs * h
            dradial = self.coeffs * hp
            if not scattered_only:
                j, jp = jn_and_derivative(self.l_max, kr)
                radial = radial + j
                dradial = dradial + jp
            u[i] = np.sum(pref * radial * P[:, i])
            du[i] = self.k * np.sum(pref * dradial * P[:, i])
        return self.amplitude * u, self.amplitude * du

    def field(self, points) -> np.ndarray:
        """Total field at points with |x - center| >= a.

        The incident part is the exact plane wave; only the scattered part is
        a truncated series, so accuracy does not degrade with distance.
        """
        r, c = self._polar(points)
        if np.any(r < self.a * (1 - 1e-12)):
            raise DomainError("series field is only valid outside the ball")
        incident = self.amplitude * np.exp(1j * self.k * r * c)
        return incident + self._series(r, c, scattered_only=True)[0]

    def scattered(self, points) -> np.ndarray:
        r, c = self._polar(points)
        return self._series(r, c, scattered_only=True)[0]

    def boundary_residual(self, points) -> float:
        """max |du/dr - zeta u| / (|du/dr| + |zeta u| + k|u|) at surface points."""
        r, c = self._polar(points)
        if np.any(np.abs(r - self.a) > 1e-10 * self.a):
            raise DomainError("points must lie on the sphere")
        u, du = self._series(r, c)
        scale = np.abs(du) + np.abs(self.zeta * u) + self.k * np.abs(u)
        return float(np.max(np.abs(du - self.zeta * u) / scale))


def sphere_series(
    a: float,
    ctx: WaveContext,
    zeta: complex,
    l_max: int | None = None,
    center=(0.0, 0.0, 0.0),
) -> SphereSeriesSolution:
    if not ctx.free_space:
        raise DomainError("sphere_series needs the free-space background")
    if not (a > 0 and ctx.k > 0):
        raise DomainError("sphere_series needs a > 0 and k > 0")
    ka = ctx.k * a
    if l_max is None:
        l_max = int(np.ceil(ka)) + L_MARGIN
    if l_max < ka + L_MARGIN:
        raise DomainError(f"l_max must be >= ka + {L_MARGIN}")
    j, jp = jn_and_derivative(l_max, ka)
    h, hp = hn1_and_derivative(l_max, ka)
    num = ctx.k * jp - zeta * j
    den = ctx.k * hp - zeta * h
    if np.any(np.abs(den) < 1e-12 * (np.abs(ctx.k * hp) + np.abs(zeta * h))):
        raise ResonanceError("impedance sphere is resonant for some order l")
    coeffs = -num / den
    amp = incident_field(ctx, np.asarray(center, dtype=float))
    return SphereSeriesSolution(a, ctx.k, complex(zeta), coeffs, l_max, tuple(center), ctx.alpha, amp)


def extract_monopole(sol: SphereSeriesSolution) -> complex:
    """Q with the l = 0 scattered term equal to Q exp(ikr)/(4 pi r).

    h_0(z) = -i exp(iz)/z, so Q = -4 pi i c_0 / k (times the incident amplitude).
    """
    return complex(-4j * np.pi * sol.coeffs[0] / sol.k * sol.amplitude)


def surface_charge(sol: SphereSeriesSolution, order: int = 32) -> complex:
    """Integral over the sphere of the single-layer density of the scattered field.

    The density is minus the jump of the radial derivative between the outgoing
    exterior field and the interior regular field with the same surface trace,
    integrated by Gauss-Legendre quadrature in cos(theta).
    """
    x, w = np.polynomial.legendre.leggauss(order)
    ka = sol.k * sol.a
    ell = np.arange(sol.l_max + 1)
    j, jp = jn_and_derivative(sol.l_max, ka)
    h, hp = hn1_and_derivative(sol.l_max, ka)
    trace = sol.coeffs * h
    d_out = sol.k * sol.coeffs * hp
    d_in = sol.k * trace * jp / j
    pref = (1j**ell) * (2 * ell + 1)
    P = eval_legendre(ell[:, None], x[None, :])
    sigma = -(pref * (d_out - d_in)) @ P
    return complex(2 * np.pi * sol.a**2 * np.sum(w * sigma) * sol.amplitude)
