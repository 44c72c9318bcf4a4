"""Finite-size analysis: spline peak location, power-law fits and the
E_max = E_cl + c N^-b extrapolation used to locate the alpha threshold."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.stats import linregress

from . import meanfield
from .eigensolver import eigh_tridiagonal, full_spectrum
from .model import ModelParams, ParitySector, build_hamiltonian_block
from .observables import qfs_series

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class FitError(RuntimeError):
    pass


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    exponent_stderr: float
    prefactor: float
    r_squared: float


@dataclass(frozen=True)
class ExtrapolationFit:
    E_cl: float
    c: float
    b: float
    residual_norm: float
    identifiable: bool = True
    history: tuple = field(default=(), repr=False)


def spline_peak(xs, ys, refine: int = 1000) -> tuple[float, float]:
    """Locate a local maximum of sampled data through a cubic spline.

    The spline uses not-a-knot end conditions, which reproduce any cubic
    exactly.  The maximum is searched on a ``refine``-point grid over the two
    intervals around the largest interior sample and then polished by
    bisection on the spline derivative.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < 5:
        raise ValueError("spline_peak needs at least 5 points")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("abscissae must be strictly increasing")
    k = int(np.argmax(ys))
    if k == 0 or k == len(ys) - 1:
        raise FitError("no interior maximum in the sampled data")
    spline = CubicSpline(xs, ys, bc_type="not-a-knot")
    deriv = spline.derivative()
    grid = np.linspace(xs[k - 1], xs[k + 1], refine)
    vals = spline(grid)
    j = int(np.argmax(vals))
    x_best = grid[j]
    lo, hi = grid[max(j - 1, 0)], grid[min(j + 1, refine - 1)]
    dlo, dhi = deriv(lo), deriv(hi)
    if dlo > 0 > dhi:
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if deriv(mid) > 0:
                lo = mid
            else:
                hi = mid
        x_best = 0.5 * (lo + hi)
    return float(x_best), float(spline(x_best))


def peak_window(xs, ys, center_index: int, half_width: int = 10, minimum: int = 7):
    """Samples within +/- ``half_width`` levels of a discrete maximum."""
    half_width = max(half_width, (minimum + 1) // 2)
    lo = max(center_index - half_width, 0)
    hi = min(center_index + half_width + 1, len(xs))
    return np.asarray(xs)[lo:hi], np.asarray(ys)[lo:hi]


def powerlaw_fit(Ns, values) -> PowerLawFit:
    """Least-squares line through (ln N, ln value)."""
    Ns = np.asarray(Ns, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(Ns) < 3:
        raise ValueError("power-law fit needs at least 3 sizes")
    if np.any(values <= 0) or np.any(Ns <= 0):
        raise ValueError("power-law fit needs positive sizes and values")
    res = linregress(np.log(Ns), np.log(values))
    stderr = float(res.stderr) if np.isfinite(res.stderr) else 0.0
    return PowerLawFit(float(res.slope), stderr, float(math.exp(res.intercept)), float(res.rvalue**2))


def _linear_part(Ns, E, b):
    A = np.column_stack([np.ones_like(Ns), Ns ** (-b)])
    coef, *_ = np.linalg.lstsq(A, E, rcond=None)
    r = A @ coef - E
    return coef, float(r @ r)


def extrapolate_max_energy(Ns, Emaxs, b_max: float = 4.0, tol: float = 1e-6) -> ExtrapolationFit:
    """Fit E_max(N) = E_cl + c N^-b.

    The model is linear in (E_cl, c) for fixed b, so only b is searched, by
    golden sections on (0, b_max]; each trial b gets an exact least-squares
    solve.  ``history`` records the best residual after every section.
    """
    Ns = np.asarray(Ns, dtype=float)
    E = np.asarray(Emaxs, dtype=float)
    if len(Ns) < 4:
        raise ValueError("extrapolation needs at least 4 sizes")
    if np.ptp(E) <= 1e-15 * max(1.0, np.max(np.abs(E))):
        return ExtrapolationFit(float(np.mean(E)), 0.0, float("nan"), 0.0, identifiable=False)

    lo, hi = 0.0, float(b_max)
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    r1 = _linear_part(Ns, E, x1)[1]
    r2 = _linear_part(Ns, E, x2)[1]
    history = [min(r1, r2)]
    while hi - lo >= tol:
        if r1 <= r2:
            hi, x2, r2 = x2, x1, r1
            x1 = hi - GOLDEN * (hi - lo)
            r1 = _linear_part(Ns, E, x1)[1]
        else:
            lo, x1, r1 = x1, x2, r2
            x2 = lo + GOLDEN * (hi - lo)
            r2 = _linear_part(Ns, E, x2)[1]
        history.append(min(history[-1], r1, r2))
    b = x1 if r1 <= r2 else x2
    (E_cl, c), res = _linear_part(Ns, E, b)
    # a minimum pinned to the search bounds means the data do not fix b
    identifiable = 10 * tol < b < b_max - 10 * tol
    return ExtrapolationFit(float(E_cl), float(c), float(b), math.sqrt(res), identifiable, tuple(history))


def max_excitation_per_particle(params: ModelParams) -> float:
    """(largest level - ground level) / N over both parity sectors."""
    spec = full_spectrum(params)
    return float((spec.energies[-1] - spec.energies[0]) / params.N)


@dataclass(frozen=True)
class ThresholdPoint:
    alpha: float
    fit: ExtrapolationFit
    f2: float
    emax: tuple

    @property
    def raw_difference(self) -> float:
        return self.fit.E_cl - self.f2

    @property
    def difference(self) -> float:
        """E_cl - f2, or NaN when the fit could not pin down the exponent."""
        return self.raw_difference if self.fit.identifiable else float("nan")


def threshold_point(xi: float, alpha: float, Ns) -> ThresholdPoint:
    emax = tuple(max_excitation_per_particle(ModelParams(int(N), xi, alpha)) for N in Ns)
    fit = extrapolate_max_energy(Ns, emax)
    return ThresholdPoint(float(alpha), fit, meanfield.f2_formula(xi, alpha), emax)


def threshold_scan(xi: float, alphas, Ns, mapper=map) -> list[ThresholdPoint]:
    """E_cl - f2 along an alpha scan at fixed xi.

    f2 is the piecewise separatrix expression evaluated on both sides of the
    threshold; above it the expression equals the top of the spectrum.
    """
    alphas = list(alphas)
    Ns = [int(N) for N in Ns]
    if not alphas:
        raise ValueError("empty alpha grid")
    if len(Ns) < 4:
        raise ValueError("threshold scan needs at least 4 system sizes")
    return list(mapper(_threshold_job, [(xi, a, tuple(Ns)) for a in alphas]))


def _threshold_job(args):
    return threshold_point(*args)


def threshold_crossing(alphas, differences, tol: float = 1e-4) -> float:
    """Alpha at which E_cl - f2 reaches zero, scanning upward in alpha.

    Below the threshold the gap E_cl - f2 is positive; above it the two agree
    to fit accuracy.  The crossing is where the difference first drops to
    ``tol``, linearly interpolated between the bracketing scan points.
    Points with a NaN difference (unidentifiable fits) are skipped.
    """
    a = np.asarray(alphas, dtype=float)
    d = np.asarray(differences, dtype=float)
    keep = np.isfinite(d)
    a, d = a[keep], d[keep]
    if len(a) < 2:
        raise FitError("fewer than two usable scan points")
    order = np.argsort(a)
    a, d = a[order], d[order] - tol
    if d[0] <= 0:
        raise FitError("difference is already zero at the lowest alpha of the scan")
    for k in range(1, len(a)):
        if d[k] <= 0:
            return float(a[k - 1] + (a[k] - a[k - 1]) * d[k - 1] / (d[k - 1] - d[k]))
    raise FitError("no zero crossing inside the alpha range")


@dataclass
class PeakScaling:
    """QFS peak heights and positions versus N for one separatrix."""

    name: str
    critical_energy: float
    Ns: list = field(default_factory=list)
    heights: list = field(default_factory=list)
    positions: list = field(default_factory=list)

    @property
    def position_errors(self) -> np.ndarray:
        return np.abs(np.asarray(self.positions) - self.critical_energy)

    def height_fit(self) -> PowerLawFit:
        return powerlaw_fit(self.Ns, self.heights)

    def position_fit(self) -> PowerLawFit:
        return powerlaw_fit(self.Ns, self.position_errors)


def locate_qfs_peak(eps, chi, target: float, window: float, half_width: int = 10):
    """Spline maximum of a QFS curve (vs E/N) near ``target``."""
    eps = np.asarray(eps)
    chi = np.asarray(chi)
    sel = np.where(np.abs(eps - target) <= window)[0]
    if len(sel) == 0:
        raise FitError(f"no levels within {window} of E/N = {target}")
    k = int(sel[np.argmax(chi[sel])])
    xs, ys = peak_window(eps, chi, k, half_width)
    return spline_peak(xs, ys)


def _qfs_job(args):
    N, xi, alpha, sector_value = args
    params = ModelParams(N, xi, alpha)
    sector = ParitySector(sector_value)
    spec = eigh_tridiagonal(build_hamiltonian_block(params, sector))
    series = qfs_series(spec, params)
    return series.energy_per_particle, series.value


def qfs_peak_scaling(xi: float, alpha: float, Ns, sector=None, half_width: int = 10, mapper=map):
    """Track the QFS maxima next to each existing separatrix as N grows.

    Peaks are searched on the E / N axis of one parity sector (even by
    default) within half the distance between the critical energies.
    Returns ({name: PeakScaling}, [(N, eps, chi), ...]).
    """
    sector = ParitySector.EVEN if sector is None else sector
    crit = meanfield.critical_energies(xi, alpha)
    if not crit:
        raise FitError(f"no separatrix at xi={xi}, alpha={alpha}")
    vals = sorted(crit.values())
    window = 0.5 * (vals[1] - vals[0]) if len(vals) > 1 else 0.05
    peaks = {name: PeakScaling(name, e) for name, e in crit.items()}
    curves = list(mapper(_qfs_job, [(int(N), xi, alpha, sector.value) for N in Ns]))
    for N, (eps, chi) in zip(Ns, curves):
        for pk in peaks.values():
            x, y = locate_qfs_peak(eps, chi, pk.critical_energy, window, half_width)
            pk.Ns.append(int(N))
            pk.positions.append(x)
            pk.heights.append(y)
    return peaks, [(int(N), eps, chi) for N, (eps, chi) in zip(Ns, curves)]
