"""Static ESQPT diagnostics evaluated on every eigenstate of a parity sector.

Each series carries the absolute energy E, E / N and the excitation energy
(E - E0) / N measured from the global ground state E0, so figures can use
either axis.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

from .eigensolver import SpectrumBlock, eigh_tridiagonal, solve_sectors
from .model import (
    ModelParams,
    ParitySector,
    TridiagonalBlock,
    build_hamiltonian_block,
    build_interaction_block,
)


class ObservableKind(enum.Enum):
    GAP = "gap"
    NUMBER = "number"
    PR = "pr"
    QFS = "qfs"


@dataclass
class ObservableSeries:
    kind: ObservableKind
    params: ModelParams
    sector: ParitySector | None  # None means both sectors merged
    state_index: np.ndarray
    energy: np.ndarray
    value: np.ndarray
    ground_energy: float
    value_normalized: np.ndarray | None = None
    parity: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def energy_per_particle(self) -> np.ndarray:
        return self.energy / self.params.N

    @property
    def excitation_per_particle(self) -> np.ndarray:
        return (self.energy - self.ground_energy) / self.params.N

    def __len__(self):
        return len(self.value)


def _ground(spec: SpectrumBlock, ground_energy):
    return float(spec.eigenvalues[0]) if ground_energy is None else float(ground_energy)


def energy_gaps(spec: SpectrumBlock, params: ModelParams, ground_energy: float | None = None) -> ObservableSeries:
    """Adjacent-level spacings within one sector, placed at the pair midpoint."""
    E = spec.eigenvalues
    if len(E) < 2:
        raise ValueError("need at least two levels for a gap")
    return ObservableSeries(
        ObservableKind.GAP,
        params,
        spec.sector,
        np.arange(len(E) - 1),
        0.5 * (E[1:] + E[:-1]),
        np.diff(E),
        _ground(spec, ground_energy),
    )


def number_expectation(spec: SpectrumBlock, params: ModelParams, ground_energy: float | None = None) -> ObservableSeries:
    """<n> = <S + S_z> per eigenstate; n is diagonal in the u(1) basis."""
    weights = spec.eigenvectors**2
    return ObservableSeries(
        ObservableKind.NUMBER,
        params,
        spec.sector,
        np.arange(spec.dim),
        spec.eigenvalues.copy(),
        spec.basis_n.astype(float) @ weights,
        _ground(spec, ground_energy),
    )


def participation_ratio(spec: SpectrumBlock, params: ModelParams, ground_energy: float | None = None) -> ObservableSeries:
    """1 / sum |C_n|^4 in the u(1) basis of the sector.

    The normalized column divides by the sector dimension.
    """
    weights = spec.eigenvectors**2
    pr = 1.0 / np.sum(weights**2, axis=0)
    return ObservableSeries(
        ObservableKind.PR,
        params,
        spec.sector,
        np.arange(spec.dim),
        spec.eigenvalues.copy(),
        pr,
        _ground(spec, ground_energy),
        value_normalized=pr / spec.dim,
        meta={"normalization": "sector_dimension", "D": spec.dim},
    )


def interaction_matrix(spec: SpectrumBlock, params: ModelParams, columns=None) -> np.ndarray:
    """<psi_i| H^I |psi_j> for all i and the requested columns j."""
    hint = build_interaction_block(params, spec.sector)
    V = spec.eigenvectors
    cols = V if columns is None else V[:, columns]
    return V.T @ hint.matvec(cols)


def qfs_block(spec: SpectrumBlock, params: ModelParams, chunk: int = 256) -> np.ndarray:
    """chi^(j) = sum_{i != j} |<i|H^I|j>|^2 / (E_i - E_j)^2 for every state j of a sector.

    Columns of the transformed interaction are formed in chunks so memory
    stays at O(d * chunk) on top of the eigenvectors.
    """
    E = spec.eigenvalues
    d = len(E)
    if d == 1 or params.xi == 0.0:
        # H^I is then diagonal in the eigenbasis of H
        return np.zeros(d)
    if np.any(np.diff(E) <= 0.0):
        raise FloatingPointError(
            f"coincident eigenvalues in the {spec.sector.label} sector; QFS undefined"
        )
    hint = build_interaction_block(params, spec.sector)
    V = spec.eigenvectors
    chi = np.empty(d)
    for start in range(0, d, chunk):
        stop = min(start + chunk, d)
        M = V.T @ hint.matvec(V[:, start:stop])
        dE = E[:, None] - E[None, start:stop]
        j = np.arange(start, stop)
        dE[j, j - start] = 1.0
        terms = (M / dE) ** 2
        terms[j, j - start] = 0.0
        chi[start:stop] = terms.sum(axis=0)
    return chi


def qfs_series(spec: SpectrumBlock, params: ModelParams, ground_energy: float | None = None) -> ObservableSeries:
    chi = qfs_block(spec, params)
    return ObservableSeries(
        ObservableKind.QFS,
        params,
        spec.sector,
        np.arange(spec.dim),
        spec.eigenvalues.copy(),
        chi,
        _ground(spec, ground_energy),
        value_normalized=chi / params.N**2,
    )


def merge_series(parts: list[ObservableSeries]) -> ObservableSeries:
    """Combine per-sector series into one ordered by energy (even first on ties)."""
    first = parts[0]
    energy = np.concatenate([s.energy for s in parts])
    parity = np.concatenate([np.full(len(s), s.sector.value) for s in parts])
    order = np.lexsort((parity, energy))
    norm = None
    if first.value_normalized is not None:
        norm = np.concatenate([s.value_normalized for s in parts])[order]
    return ObservableSeries(
        first.kind,
        first.params,
        None,
        np.concatenate([s.state_index for s in parts])[order],
        energy[order],
        np.concatenate([s.value for s in parts])[order],
        min(s.ground_energy for s in parts),
        value_normalized=norm,
        parity=parity[order],
        meta=_merged_meta(parts),
    )


def _merged_meta(parts):
    # keys whose values differ between sectors are kept per sector
    out = {}
    for key in parts[0].meta:
        vals = {s.sector.label: s.meta.get(key) for s in parts}
        distinct = {repr(v) for v in vals.values()}
        out[key] = parts[0].meta[key] if len(distinct) == 1 else vals
    return out


def qfs_all_states(params: ModelParams) -> ObservableSeries:
    """QFS of every eigenstate, both sectors merged.

    H^I conserves parity, so cross-sector matrix elements vanish and each
    sector is handled on its own.
    """
    blocks = solve_sectors(params, vectors=True)
    e0 = min(b.eigenvalues[0] for b in blocks.values())
    return merge_series([qfs_series(blocks[s], params, e0) for s in ParitySector])


def sector_series(kind: ObservableKind, params: ModelParams, sectors=(ParitySector.EVEN,)) -> ObservableSeries:
    """Compute one diagnostic for the requested sectors; E0 is always the global minimum."""
    need_vectors = kind is not ObservableKind.GAP
    blocks = solve_sectors(params, vectors=need_vectors)
    e0 = min(b.eigenvalues[0] for b in blocks.values())
    fn = {
        ObservableKind.GAP: energy_gaps,
        ObservableKind.NUMBER: number_expectation,
        ObservableKind.PR: participation_ratio,
        ObservableKind.QFS: qfs_series,
    }[kind]
    parts = [fn(blocks[s], params, e0) for s in sectors]
    return parts[0] if len(parts) == 1 else merge_series(parts)


def interior_minima(series: ObservableSeries, rel_prominence: float = 0.2) -> np.ndarray:
    """Indices of pronounced interior local minima of ``series.value``.

    A minimum counts when its prominence exceeds ``rel_prominence`` times the
    median of the series; the end points are never reported.
    """
    v = np.asarray(series.value, dtype=float)
    idx, _ = find_peaks(-v, prominence=rel_prominence * np.median(np.abs(v)))
    return idx


def interior_maxima(series: ObservableSeries, rel_prominence: float = 0.2) -> np.ndarray:
    v = np.asarray(series.value, dtype=float)
    idx, _ = find_peaks(v, prominence=rel_prominence * np.median(np.abs(v)))
    return idx


def squared_components(spec: SpectrumBlock, k: int) -> np.ndarray:
    """|C_n|^2 of eigenstate k on ``spec.basis_n`` (PR insets)."""
    return spec.eigenvectors[:, k] ** 2


def fidelity_qfs(params: ModelParams, sector: ParitySector, dlam: float = 1e-5) -> np.ndarray:
    """QFS from the overlap definition -2 ln F / dlam^2, averaged over +/- dlam.

    Independent of the perturbative sum: it only diagonalizes H(0) and
    H(+/- dlam) = H + (+/- dlam) H^I.  Uses |psi(0) - psi(dlam)|^2 = 2 (1 - F)
    for sign-aligned unit vectors to avoid cancellation in 1 - F.
    """
    h0 = build_hamiltonian_block(params, sector)
    hint = build_interaction_block(params, sector)
    ref = eigh_tridiagonal(h0).eigenvectors
    est = []
    for lam in (dlam, -dlam):
        shifted = TridiagonalBlock(sector, h0.diag + lam * hint.diag, h0.sub + lam * hint.sub, h0.basis_n)
        V = eigh_tridiagonal(shifted).eigenvectors
        V = V * np.sign(np.sum(V * ref, axis=0))
        dist2 = np.sum((V - ref) ** 2, axis=0)
        est.append(-2.0 * np.log1p(-0.5 * dist2) / lam**2)
    return 0.5 * (est[0] + est[1])
