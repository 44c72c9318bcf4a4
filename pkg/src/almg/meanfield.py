"""Coherent-state (large-N) limit of the anharmonic LMG model.

All energies here are per particle.  The phase space is the disk
q^2 + p^2 <= 2; its boundary circle is a single point of the Bloch sphere
(the state n = N), so the energy is constant there and equal to 1 + alpha.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

XI_C = 0.2


class StationaryLabel(enum.Enum):
    P0 = 0
    P1 = 1
    P2 = 2
    P3 = 3


@dataclass(frozen=True)
class PhasePoint:
    q: float
    p: float

    @property
    def in_domain(self) -> bool:
        return self.q * self.q + self.p * self.p <= 2.0


@dataclass(frozen=True)
class StationaryPoint:
    label: StationaryLabel
    q_sq: float | None
    p_sq: float | None
    energy: float | None
    exists: bool


@dataclass(frozen=True)
class SeparatrixPoint:
    xi: float
    alpha: float
    excitation: float | None

    @property
    def defined(self) -> bool:
        return self.excitation is not None


def classical_energy(q, p, xi: float, alpha: float):
    """Energy surface H(q, p); evaluated outside the disk too (unphysical there)."""
    r2 = np.asarray(q) ** 2 + np.asarray(p) ** 2
    q2 = np.asarray(q) ** 2
    return 0.5 * (1 - xi) * r2 + 0.25 * alpha * r2 * r2 + xi * q2 * (r2 - 2.0) + xi


def sphere_energy(phi, x, xi: float, alpha: float):
    """Same energy surface in the canonical pair (phi, x = j_z / j), x in [-1, 1].

    Related to (q, p) by 1 + x = q^2 + p^2 and cos^2(phi) = q^2 / (q^2 + p^2).
    """
    x = np.asarray(x)
    c2 = np.cos(phi) ** 2
    return 0.5 * (1 - xi) * (1 + x) + 0.25 * alpha * (1 + x) ** 2 + xi * (1 - (1 - x * x) * c2)


def _point(label, q_sq, p_sq, xi, alpha):
    # squares that are zero up to rounding (on a threshold) count as zero
    if q_sq is not None and -1e-12 < q_sq < 0.0:
        q_sq = 0.0
    if p_sq is not None and -1e-12 < p_sq < 0.0:
        p_sq = 0.0
    ok = (
        q_sq is not None
        and p_sq is not None
        and np.isfinite(q_sq)
        and np.isfinite(p_sq)
        and q_sq >= 0.0
        and p_sq >= 0.0
        and q_sq + p_sq <= 2.0 + 1e-12
    )
    if not ok:
        return StationaryPoint(label, q_sq, p_sq, None, False)
    energy = float(classical_energy(np.sqrt(q_sq), np.sqrt(p_sq), xi, alpha))
    return StationaryPoint(label, float(q_sq), float(p_sq), energy, True)


def stationary_points(xi: float, alpha: float) -> list[StationaryPoint]:
    """The four critical points P0..P3 of H(q, p) with existence flags.

    P1 is the broken-symmetry minimum, P2 sits on the disk boundary and P3
    is the maximum that appears once alpha <= (xi - 1) / 2.
    """
    pts = [_point(StationaryLabel.P0, 0.0, 0.0, xi, alpha)]

    if xi > XI_C and 4 * xi + alpha > 0:
        q1 = (5 * xi - 1) / (4 * xi + alpha)
        pts.append(_point(StationaryLabel.P1, q1, 0.0, xi, alpha))
    else:
        pts.append(StationaryPoint(StationaryLabel.P1, None, None, None, False))

    if xi > 0:
        q2 = (xi - 1 - 2 * alpha) / (2 * xi)
        p2 = (1 + 2 * alpha + 3 * xi) / (2 * xi)
        pts.append(_point(StationaryLabel.P2, q2, p2, xi, alpha))
    else:
        pts.append(StationaryPoint(StationaryLabel.P2, None, None, None, False))

    if alpha < 0:
        pts.append(_point(StationaryLabel.P3, 0.0, (xi - 1) / alpha, xi, alpha))
    else:
        pts.append(StationaryPoint(StationaryLabel.P3, None, None, None, False))
    return pts


def _p1_inside(xi, alpha):
    return xi > XI_C and 4 * xi + alpha > 0 and (5 * xi - 1) / (4 * xi + alpha) <= 2.0


def ground_state_energy(xi: float, alpha: float) -> float:
    """Minimum of H over the disk.

    For alpha < -(1 + 3 xi) / 2 the interior minimum would sit outside the
    disk and the boundary value 1 + alpha takes over.
    """
    if not 0.0 <= xi <= 1.0:
        raise ValueError(f"xi must lie in [0, 1], got {xi}")
    if xi <= XI_C:
        return float(min(xi, 1 + alpha))
    if alpha + 4 * xi <= 0:
        raise ValueError(f"alpha + 4 xi must be positive in the broken phase (xi={xi}, alpha={alpha})")
    if not _p1_inside(xi, alpha):
        return float(1 + alpha)
    return (-1 + xi * (10 + 4 * alpha - 9 * xi)) / (4 * (alpha + 4 * xi))


def alpha_threshold(xi: float) -> float:
    """Largest alpha for which the second (boundary) ESQPT exists."""
    return (xi - 1) / 2


def f1(xi: float, alpha: float) -> SeparatrixPoint:
    """Excitation energy of the ESQPT tied to the local maximum at the origin."""
    if not _p1_inside(xi, alpha):
        return SeparatrixPoint(xi, alpha, None)
    return SeparatrixPoint(xi, alpha, (1 - 5 * xi) ** 2 / (4 * (4 * xi + alpha)))


def f2_formula(xi: float, alpha: float) -> float:
    """Piecewise expression for the second separatrix, without the existence check.

    For alpha above the threshold this is the excitation energy of the
    boundary value 1 + alpha, which is then the top of the spectrum.
    """
    if xi <= XI_C:
        return 1 + alpha - xi
    return (1 + 2 * alpha + 3 * xi) ** 2 / (4 * (alpha + 4 * xi))


def f2(xi: float, alpha: float) -> SeparatrixPoint:
    """Excitation energy of the anharmonicity-induced ESQPT (absent above threshold)."""
    p2 = stationary_points(xi, alpha)[2]
    if not p2.exists:
        return SeparatrixPoint(xi, alpha, None)
    return SeparatrixPoint(xi, alpha, f2_formula(xi, alpha))


def max_energy(xi: float, alpha: float) -> float:
    if alpha < 0 and alpha <= alpha_threshold(xi):
        return (-1 + (2 + 4 * alpha - xi) * xi) / (4 * alpha)
    return 1 + alpha


def critical_energies(xi: float, alpha: float) -> dict[str, float]:
    """Absolute per-particle energies f + E_gs of the separatrices that exist."""
    egs = ground_state_energy(xi, alpha)
    out = {}
    for name, sep in (("f1", f1(xi, alpha)), ("f2", f2(xi, alpha))):
        if sep.defined:
            out[name] = sep.excitation + egs
    return out


@dataclass(frozen=True)
class ContourGrid:
    q: np.ndarray
    p: np.ndarray
    energy: np.ndarray
    in_domain: np.ndarray

    def rows(self):
        """Row-major (q outer, p inner) iteration of (q, p, energy, in_domain)."""
        for i, qv in enumerate(self.q):
            for j, pv in enumerate(self.p):
                yield qv, pv, self.energy[i, j], bool(self.in_domain[i, j])


def contour_grid(xi: float, alpha: float, resolution: int) -> ContourGrid:
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    axis = np.linspace(-np.sqrt(2.0), np.sqrt(2.0), resolution)
    Q, P = np.meshgrid(axis, axis, indexing="ij")
    return ContourGrid(axis, axis.copy(), classical_energy(Q, P, xi, alpha), Q * Q + P * P <= 2.0)
