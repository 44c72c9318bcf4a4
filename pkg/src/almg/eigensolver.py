"""Symmetric tridiagonal eigensolver and full-spectrum assembly.

The decomposition is the implicit-shift QL iteration with Wilkinson-type
shifts (the tql2 family).  Eigenvectors are accumulated as rows of a
row-major array so every Givens rotation touches two contiguous rows.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from .model import (
    ModelParams,
    ParitySector,
    TridiagonalBlock,
    build_hamiltonian_block,
)

MAX_SWEEPS = 50


class EigensolverError(RuntimeError):
    """QL iteration failed to converge within the sweep cap."""


@njit(cache=True)
def _tql(d, e, zt, want_vectors, max_iter):
    # d: diagonal (overwritten by eigenvalues), e: subdiagonal padded to len(d)
    # with e[i] coupling rows i and i + 1; zt rows are the eigenvectors.
    # Returns -1 on success or the index of the eigenvalue that did not converge.
    n = d.shape[0]
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) + dd == dd:
                    break
                m += 1
            if m == l:
                break
            if it == max_iter:
                return l
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + (r if g >= 0.0 else -r))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if want_vectors:
                    for k in range(n):
                        f = zt[i + 1, k]
                        zt[i + 1, k] = s * zt[i, k] + c * f
                        zt[i, k] = c * zt[i, k] - s * f
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return -1


def tridiagonal_eigensystem(diag, sub, vectors: bool = True, max_sweeps: int = MAX_SWEEPS):
    """Eigenvalues (ascending) and, optionally, eigenvectors as columns.

    Each eigenvector's largest-magnitude component is made positive, which
    fixes the output bit-for-bit for a given input.
    """
    d = np.array(diag, dtype=np.float64)
    n = d.shape[0]
    if n == 0:
        raise ValueError("empty tridiagonal matrix")
    sub = np.asarray(sub, dtype=np.float64)
    if sub.shape != (n - 1,):
        raise ValueError(f"subdiagonal must have length {n - 1}, got {sub.shape}")
    e = np.zeros(n)
    e[: n - 1] = sub
    zt = np.eye(n) if vectors else np.zeros((1, 1))
    status = _tql(d, e, zt, vectors, max_sweeps)
    if status >= 0:
        raise EigensolverError(
            f"QL iteration did not converge for eigenvalue {status} of a "
            f"{n}x{n} tridiagonal block after {max_sweeps} sweeps"
        )
    order = np.argsort(d, kind="stable")
    evals = d[order]
    if not vectors:
        return evals, None
    zt = zt[order]
    peak = np.argmax(np.abs(zt), axis=1)
    signs = np.where(zt[np.arange(n), peak] < 0.0, -1.0, 1.0)
    zt *= signs[:, None]
    return evals, np.ascontiguousarray(zt.T)


@dataclass(frozen=True)
class SpectrumBlock:
    """Eigen-decomposition of one parity block; column k of ``eigenvectors``
    belongs to ``eigenvalues[k]`` and is expressed on ``basis_n``."""

    sector: ParitySector
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    basis_n: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)


def eigh_tridiagonal(block: TridiagonalBlock, vectors: bool = True) -> SpectrumBlock:
    try:
        evals, evecs = tridiagonal_eigensystem(block.diag, block.sub, vectors=vectors)
    except EigensolverError as exc:
        raise EigensolverError(f"{exc} (sector={block.sector.label}, dim={block.dim})") from exc
    return SpectrumBlock(block.sector, evals, evecs, block.basis_n)


def degeneracy_tolerance(N: int) -> float:
    return 1e-8 * N


@dataclass(frozen=True)
class FullSpectrum:
    """Both parity sectors merged and sorted by energy.

    ``energies``, ``sectors`` and ``index_in_sector`` are parallel arrays of
    length N + 1; ``sectors`` holds ParitySector values (0 even, 1 odd).
    """

    params: ModelParams
    energies: np.ndarray
    sectors: np.ndarray
    index_in_sector: np.ndarray
    blocks: dict

    @property
    def ground_energy(self) -> float:
        return float(self.energies[0])

    @property
    def ground_sector(self) -> ParitySector:
        """Sector of the ground state; EVEN wins ties within the degeneracy tolerance."""
        even = self.blocks[ParitySector.EVEN].eigenvalues[0]
        odd = self.blocks[ParitySector.ODD].eigenvalues[0]
        if even <= odd + degeneracy_tolerance(self.params.N):
            return ParitySector.EVEN
        return ParitySector.ODD

    def excitation_per_particle(self) -> np.ndarray:
        return (self.energies - self.ground_energy) / self.params.N


def solve_sectors(params: ModelParams, vectors: bool = True, parallel: bool = False) -> dict:
    """Decompose both parity blocks, optionally on two threads."""
    blocks = [build_hamiltonian_block(params, s) for s in ParitySector]
    if parallel:
        with ThreadPoolExecutor(max_workers=2) as pool:
            spectra = list(pool.map(lambda b: eigh_tridiagonal(b, vectors), blocks))
    else:
        spectra = [eigh_tridiagonal(b, vectors) for b in blocks]
    return {s.sector: s for s in spectra}


def full_spectrum(params: ModelParams, vectors: bool = False) -> FullSpectrum:
    blocks = solve_sectors(params, vectors=vectors)
    even = blocks[ParitySector.EVEN].eigenvalues
    odd = blocks[ParitySector.ODD].eigenvalues
    energies = np.concatenate([even, odd])
    sectors = np.concatenate([np.zeros(len(even), int), np.ones(len(odd), int)])
    index = np.concatenate([np.arange(len(even)), np.arange(len(odd))])
    order = np.lexsort((sectors, energies))
    spec = FullSpectrum(params, energies[order], sectors[order], index[order], blocks)
    if spec.ground_sector is not ParitySector.EVEN:
        warnings.warn(f"ground state found in the odd sector for {params}", stacklevel=2)
    return spec


def parity_splittings(spec: FullSpectrum) -> tuple[np.ndarray, np.ndarray]:
    """Pair the k-th even and odd levels; return (excitation per particle, |E_even - E_odd|)."""
    even = spec.blocks[ParitySector.EVEN].eigenvalues
    odd = spec.blocks[ParitySector.ODD].eigenvalues
    k = min(len(even), len(odd))
    exc = (even[:k] - spec.ground_energy) / spec.params.N
    return exc, np.abs(even[:k] - odd[:k])
