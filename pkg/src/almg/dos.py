"""Density of states on the per-particle energy axis eps = E / N.

The semiclassical density integrates delta(eps - H(phi, x)) over the sphere
coordinates phi in [0, 2 pi), x in [-1, 1] with measure 1 / (4 pi).  For
fixed phi, H is quadratic in x, so the x integral collapses onto the roots
x_i(phi, eps) and contributes 1 / |dH/dx| = 1 / sqrt(disc) per root inside
[-1, 1].  Both roots can lie in the physical range when alpha < 0, so the
root count is kept explicit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import meanfield
from .eigensolver import FullSpectrum
from .model import ModelParams

QUAD_TOL = 1e-8


@dataclass(frozen=True)
class DosCurve:
    epsilons: np.ndarray
    values: np.ndarray
    params: ModelParams
    meta: dict = field(default_factory=dict)

    def integral(self) -> float:
        return float(np.trapezoid(self.values, self.epsilons))


def _quadratic_roots(a, b, c):
    """Real roots of a t^2 + b t + c (a != 0), ascending, without cancellation."""
    d = b * b - 4 * a * c
    if d < 0:
        return []
    q = -0.5 * (b + math.copysign(math.sqrt(d), b))
    if q == 0.0:
        return [0.0, 0.0]
    return sorted([q / a, c / q])


class _EnergySlice:
    """H(phi, x) = eps at fixed eps, as a quadratic A x^2 + B x + C in x.

    With c = cos^2(phi) the discriminant is a c^2 + b c + k.  When it has
    real roots it is evaluated in factored form, each factor written in c or
    in s = sin^2(phi) = 1 - c, whichever keeps relative precision.  Its sign
    then flips exactly at the breakpoints, even close to the ground energy
    where the unfactored expression is dominated by cancellation.
    """

    def __init__(self, eps, xi, alpha):
        self.xi, self.alpha = xi, alpha
        self.B = 0.5 * (1 - xi + alpha)
        self.K = 0.25 * (2 + 2 * xi + alpha) - eps
        self.a = 4 * xi * xi
        self.b = xi * (alpha - 4 * self.K)
        self.k = self.B * self.B - alpha * self.K
        self.factors = []  # (in_s, root)
        if xi > 0:
            c_roots = _quadratic_roots(self.a, self.b, self.k)
            s_roots = _quadratic_roots(self.a, -(2 * self.a + self.b), self.a + self.b + self.k)
            if len(c_roots) == 2 and len(s_roots) == 2:
                for c_r, s_r in zip(c_roots, reversed(s_roots)):
                    self.factors.append((False, c_r) if c_r <= 0.5 else (True, s_r))

    def discriminant(self, phi):
        c = math.cos(phi) ** 2
        if not self.factors:
            return (self.a * c + self.b) * c + self.k
        s = math.sin(phi) ** 2
        d = self.a
        for in_s, r in self.factors:
            d *= (r - s) if in_s else (c - r)
        return d

    def roots(self, phi):
        c = math.cos(phi) ** 2
        A = 0.25 * self.alpha + self.xi * c
        C = self.K - self.xi * c
        disc = self.discriminant(phi)
        if disc < 0:
            return [], disc
        q = -0.5 * (self.B + math.copysign(math.sqrt(disc), self.B))
        out = []
        if A != 0.0:
            out.append(q / A)
        if q != 0.0:
            out.append(C / q)
        return out, disc

    def integrand(self, phi):
        roots, disc = self.roots(phi)
        if disc <= 0:
            return 0.0
        return sum(1 for x in roots if -1.0 <= x <= 1.0) / math.sqrt(disc)

    def smoothed(self, t, lo, hi):
        # phi = lo + (hi - lo)(1 - cos t) / 2 cancels the inverse square-root
        # singularities that sit at discriminant zeros
        half = 0.5 * (hi - lo)
        return self.integrand(lo + half * (1.0 - math.cos(t))) * half * math.sin(t)

    def breakpoints(self):
        """Angles in [0, pi/2] where the discriminant vanishes or A changes sign."""
        pts = [0.0, 0.5 * math.pi]
        for in_s, r in self.factors:
            if 0.0 < r < 1.0:
                pts.append(math.asin(math.sqrt(r)) if in_s else math.acos(math.sqrt(r)))
        if self.xi > 0:
            c4 = -self.alpha / (4 * self.xi)
            if 0.0 < c4 < 1.0:
                pts.append(math.acos(math.sqrt(c4)))
        return sorted(set(pts))


def energy_roots(phi: float, eps: float, xi: float, alpha: float) -> tuple[list[float], float]:
    """Real roots in x of H(phi, x) = eps and the discriminant B^2 - 4AC.

    |dH/dx| equals sqrt(disc) at every root.
    """
    return _EnergySlice(eps, xi, alpha).roots(phi)


def dos_integrand(phi: float, eps: float, xi: float, alpha: float) -> float:
    """Sum of 1 / |dH/dx| over the roots of H(phi, x) = eps with x in [-1, 1]."""
    return _EnergySlice(eps, xi, alpha).integrand(phi)


def _breakpoints(eps, xi, alpha):
    return _EnergySlice(eps, xi, alpha).breakpoints()


def semiclassical_dos(params: ModelParams, eps: float, tol: float = QUAD_TOL) -> float:
    return dos_value(eps, params.xi, params.alpha, tol)


def dos_value(eps, xi, alpha, tol=QUAD_TOL):
    lo = meanfield.ground_state_energy(xi, alpha)
    hi = meanfield.max_energy(xi, alpha)
    if eps < lo or eps > hi:
        return 0.0
    # the support shrinks to a point at its ends; take the limit from inside
    edge = 1e-9 * (hi - lo)
    eps = min(max(eps, lo + edge), hi - edge)
    sl = _EnergySlice(eps, xi, alpha)
    pts = sl.breakpoints()
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        if b - a < 1e-15:
            continue
        val, _ = integrate.quad(sl.smoothed, 0.0, math.pi, args=(a, b), epsabs=tol, epsrel=tol, limit=200)
        total += val
    # (1 / 4 pi) over [0, 2 pi) equals (1 / pi) over [0, pi / 2] by cos^2 symmetry
    return total / math.pi


def offset_grid(eps_grid: np.ndarray, avoid) -> np.ndarray:
    """Shift grid points that land on a critical energy by half a spacing."""
    eps_grid = np.array(eps_grid, dtype=float)
    if len(eps_grid) < 2:
        return eps_grid
    h = float(np.min(np.diff(eps_grid)))
    for e in avoid:
        hit = np.abs(eps_grid - e) < 1e-9 * max(1.0, abs(e))
        eps_grid[hit] += 0.5 * h
    return eps_grid


def dos_curve(params: ModelParams, eps_grid, tol: float = QUAD_TOL) -> DosCurve:
    eps_grid = np.asarray(eps_grid, dtype=float)
    if np.any(np.diff(eps_grid) <= 0):
        raise ValueError("energy grid must be strictly ascending")
    crit = list(meanfield.critical_energies(params.xi, params.alpha).values())
    crit.append(params.xi)
    if params.xi == 0.0:
        # without the cos^2 term the top of the surface is a whole circle,
        # and nu diverges there like an inverse square root
        crit.append(meanfield.max_energy(params.xi, params.alpha))
    eps_grid = offset_grid(eps_grid, crit)
    values = np.array([dos_value(e, params.xi, params.alpha, tol) for e in eps_grid])
    return DosCurve(eps_grid, values, params, {"quadrature_tol": tol})


def default_grid(params: ModelParams, points: int) -> np.ndarray:
    """Uniform grid spanning [E_gs, E_max] of the classical energy surface."""
    lo = meanfield.ground_state_energy(params.xi, params.alpha)
    hi = meanfield.max_energy(params.xi, params.alpha)
    return np.linspace(lo, hi, points)


def histogram_dos(spec: FullSpectrum, bins: int) -> DosCurve:
    """Normalized level histogram of E / N over both parity sectors."""
    if bins < 10:
        raise ValueError("bins must be >= 10")
    eps = spec.energies / spec.params.N
    counts, edges = np.histogram(eps, bins=bins, range=(eps.min(), eps.max()))
    width = edges[1] - edges[0]
    density = counts / (counts.sum() * width)
    centers = 0.5 * (edges[1:] + edges[:-1])
    return DosCurve(centers, density, spec.params, {"bins": bins, "edges": edges})


def bin_averaged_dos(params: ModelParams, edges: np.ndarray, sub: int = 8, tol: float = QUAD_TOL) -> np.ndarray:
    """Mean of the semiclassical density over each histogram bin (midpoint rule)."""
    out = np.empty(len(edges) - 1)
    for k, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
        mids = a + (np.arange(sub) + 0.5) * (b - a) / sub
        out[k] = np.mean([dos_value(e, params.xi, params.alpha, tol) for e in mids])
    return out


def local_maxima(curve: DosCurve) -> np.ndarray:
    """Energies of interior local maxima of a sampled curve."""
    v = curve.values
    idx = np.where((v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:]))[0] + 1
    return curve.epsilons[idx]
