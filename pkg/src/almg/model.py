"""Anharmonic LMG Hamiltonian in the u(1) basis |S, M_z>, split by parity.

States are labelled by the excitation number n = S + M_z in {0, ..., N}.
The Hamiltonian only couples n to n and n +/- 2, so each parity sector is a
real symmetric tridiagonal matrix once the rows are ordered by ascending n.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np


class ParitySector(enum.Enum):
    EVEN = 0
    ODD = 1

    @property
    def label(self) -> str:
        return self.name.lower()


def parity_of(n: int) -> ParitySector:
    return ParitySector.EVEN if n % 2 == 0 else ParitySector.ODD


@dataclass(frozen=True)
class ModelParams:
    """System size and control parameters of the anharmonic LMG model.

    ``xi`` must lie in [0, 1].  Positive ``alpha`` is accepted with a warning:
    the Hamiltonian is well defined there but nothing in this package has
    been checked in that regime.
    """

    N: int
    xi: float
    alpha: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2 or self.N % 2:
            raise ValueError(f"N must be an even integer >= 2, got {self.N!r}")
        if not np.isfinite(self.xi) or not 0.0 <= self.xi <= 1.0:
            raise ValueError(f"xi must lie in [0, 1], got {self.xi!r}")
        if not np.isfinite(self.alpha):
            raise ValueError(f"alpha must be finite, got {self.alpha!r}")
        if self.alpha > 0:
            warnings.warn(
                f"alpha={self.alpha} > 0 lies outside the studied regime alpha <= 0",
                stacklevel=3,
            )
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "xi", float(self.xi))
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def S(self) -> int:
        return self.N // 2

    @property
    def dim(self) -> int:
        return self.N + 1

    def sector_dim(self, sector: ParitySector) -> int:
        return self.S + 1 if sector is ParitySector.EVEN else self.S

    def sector_basis(self, sector: ParitySector) -> np.ndarray:
        return np.arange(sector.value, self.N + 1, 2)

    def as_dict(self) -> dict:
        return {"N": self.N, "xi": self.xi, "alpha": self.alpha}


@dataclass(frozen=True)
class TridiagonalBlock:
    """One parity sector stored as diagonal + first subdiagonal."""

    sector: ParitySector
    diag: np.ndarray
    sub: np.ndarray
    basis_n: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.diag)

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.sub, 1) + np.diag(self.sub, -1)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        """Multiply the block into ``v`` (a vector or a matrix of columns)."""
        v = np.asarray(v, dtype=float)
        d = self.diag if v.ndim == 1 else self.diag[:, None]
        e = self.sub if v.ndim == 1 else self.sub[:, None]
        out = d * v
        out[:-1] += e * v[1:]
        out[1:] += e * v[:-1]
        return out


def _check_mz(params: ModelParams, Mz, hi: int) -> np.ndarray:
    mz = np.asarray(Mz)
    if np.any(mz != np.round(mz)) or np.any(mz < -params.S) or np.any(mz > hi):
        raise ValueError(f"M_z={Mz!r} outside [{-params.S}, {hi}] for S={params.S}")
    return mz.astype(float)


def u1_diagonal(params: ModelParams, Mz) -> np.ndarray:
    """Number and anharmonic terms: (1 - xi) n + (alpha / 2S) n (n + 1)."""
    S = float(params.S)
    mz = _check_mz(params, Mz, params.S)
    return (1.0 - params.xi) * (S + mz) + 0.5 * params.alpha * (
        S + 1.0 + (2.0 + 1.0 / S) * mz + mz * mz / S
    )


def pairing_diagonal(params: ModelParams, Mz) -> np.ndarray:
    """Diagonal part of (2 xi / S)(S^2 - S_x^2)."""
    S = float(params.S)
    mz = _check_mz(params, Mz, params.S)
    return (params.xi / (2.0 * S)) * (
        4.0 * S * S - (S - mz) * (S + mz + 1.0) - (S + mz) * (S - mz + 1.0)
    )


def diagonal_element(params: ModelParams, Mz):
    """<S, Mz| H |S, Mz> of the anharmonic LMG Hamiltonian."""
    val = u1_diagonal(params, Mz) + pairing_diagonal(params, Mz)
    return float(val) if np.ndim(val) == 0 else val


def offdiagonal_element(params: ModelParams, Mz):
    """<S, Mz + 2| H |S, Mz>; the only nonzero off-diagonal coupling."""
    S = float(params.S)
    mz = _check_mz(params, Mz, params.S - 2)
    val = -(params.xi / (2.0 * S)) * np.sqrt(
        (S - mz) * (S - mz - 1.0) * (S + mz + 2.0) * (S + mz + 1.0)
    )
    return float(val) if np.ndim(val) == 0 else val


def _sector_mz(params: ModelParams, sector: ParitySector):
    n = params.sector_basis(sector)
    return n, n - params.S


def build_hamiltonian_block(params: ModelParams, sector: ParitySector) -> TridiagonalBlock:
    n, mz = _sector_mz(params, sector)
    diag = u1_diagonal(params, mz) + pairing_diagonal(params, mz)
    sub = offdiagonal_element(params, mz[:-1]) if len(n) > 1 else np.zeros(0)
    return TridiagonalBlock(sector, np.asarray(diag, float), np.atleast_1d(sub).astype(float), n)


def build_interaction_block(params: ModelParams, sector: ParitySector) -> TridiagonalBlock:
    """Perturbation H^I with H(lambda) = H + lambda H^I.

    H^I is the pairing part minus the u(1) part, so H(-1) is diagonal in the
    u(1) basis and H(0) is the original Hamiltonian.
    """
    n, mz = _sector_mz(params, sector)
    diag = pairing_diagonal(params, mz) - u1_diagonal(params, mz)
    sub = offdiagonal_element(params, mz[:-1]) if len(n) > 1 else np.zeros(0)
    return TridiagonalBlock(sector, np.asarray(diag, float), np.atleast_1d(sub).astype(float), n)


def u1_energies(params: ModelParams) -> np.ndarray:
    """u(1) part of the diagonal for n = 0..N; this is the whole spectrum at xi = 0."""
    n = np.arange(params.N + 1, dtype=float)
    return (1.0 - params.xi) * n + params.alpha * n * (n + 1.0) / params.N
