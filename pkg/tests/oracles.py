"""Independent reference implementations used only by the tests.

Nothing here reuses the package's matrix-element formulas or solvers.
"""

from __future__ import annotations

import numpy as np


def spin_operators(S: int):
    """Dense S_z, S_+, S_- on the basis M_z = -S, ..., S."""
    m = np.arange(-S, S + 1, dtype=float)
    Sz = np.diag(m)
    # <m+1|S_+|m> = sqrt(S(S+1) - m(m+1))
    Sp = np.diag(np.sqrt(S * (S + 1) - m[:-1] * (m[:-1] + 1)), k=-1)
    return Sz, Sp, Sp.T.copy()


def dense_hamiltonian(N: int, xi: float, alpha: float) -> np.ndarray:
    """Operator form (1-xi) n + (alpha/2S) n (n+1) + (2 xi/S)(S^2 - S_x^2), n = S + S_z."""
    S = N // 2
    Sz, Sp, Sm = spin_operators(S)
    one = np.eye(2 * S + 1)
    n = S * one + Sz
    Sx = 0.5 * (Sp + Sm)
    return (1 - xi) * n + alpha / (2 * S) * n @ (n + one) + 2 * xi / S * (S * S * one - Sx @ Sx)


def dense_interaction(N: int, xi: float, alpha: float) -> np.ndarray:
    S = N // 2
    Sz, Sp, Sm = spin_operators(S)
    one = np.eye(2 * S + 1)
    n = S * one + Sz
    Sx = 0.5 * (Sp + Sm)
    return -(1 - xi) * n - alpha / (2 * S) * n @ (n + one) + 2 * xi / S * (S * S * one - Sx @ Sx)


def parity_blocks(H: np.ndarray):
    """Split a dense matrix on n = 0..N into (even, odd) principal submatrices."""
    n = np.arange(H.shape[0])
    ev, od = n[n % 2 == 0], n[n % 2 == 1]
    return H[np.ix_(ev, ev)], H[np.ix_(od, od)]


def jacobi_eigh(A: np.ndarray, tol: float = 1e-15, max_sweeps: int = 100):
    """Cyclic Jacobi rotations; returns ascending eigenvalues and column eigenvectors."""
    A = np.array(A, dtype=float)
    d = A.shape[0]
    V = np.eye(d)
    scale = max(np.linalg.norm(A), 1e-300)
    mask = ~np.eye(d, dtype=bool)
    for _ in range(max_sweeps):
        if np.sqrt(np.sum(A[mask] ** 2)) <= tol * scale:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                if abs(A[p, q]) <= 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2 * A[p, q])
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1))
                c = 1 / np.sqrt(t * t + 1)
                s = t * c
                J = np.array([[c, s], [-s, c]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ J
                A[idx, :] = J.T @ A[idx, :]
                V[:, idx] = V[:, idx] @ J
    else:
        raise RuntimeError("Jacobi oracle did not converge")
    w = np.diag(A)
    order = np.argsort(w)
    return w[order], V[:, order]


def sphere_energy(phi, x, xi, alpha):
    c2 = np.cos(phi) ** 2
    return 0.5 * (1 - xi) * (1 + x) + 0.25 * alpha * (1 + x) ** 2 + xi * (1 - (1 - x * x) * c2)


def phase_space_histogram(xi, alpha, edges, n_phi=2000, n_x=2000):
    """Fraction of the uniform (phi, x) measure per unit energy in each bin.

    Midpoint grid on [0, 2 pi) x [-1, 1]; no root finding involved.
    """
    phi = (np.arange(n_phi) + 0.5) * (2 * np.pi / n_phi)
    x = -1 + (np.arange(n_x) + 0.5) * (2.0 / n_x)
    P, X = np.meshgrid(phi, x, indexing="ij")
    E = sphere_energy(P, X, xi, alpha).ravel()
    counts, _ = np.histogram(E, bins=edges)
    return counts / (E.size * np.diff(edges))


def smoothed_delta_dos(eps, xi, alpha, sigma=2e-3, n_phi=400, n_x=4000):
    """(1/4 pi) double integral of a narrow Gaussian delta(eps - H) by midpoint rule."""
    phi = (np.arange(n_phi) + 0.5) * (2 * np.pi / n_phi)
    x = -1 + (np.arange(n_x) + 0.5) * (2.0 / n_x)
    P, X = np.meshgrid(phi, x, indexing="ij")
    E = sphere_energy(P, X, xi, alpha)
    g = np.exp(-0.5 * ((eps - E) / sigma) ** 2) / (sigma * np.sqrt(2 * np.pi))
    return float(g.sum() * (2 * np.pi / n_phi) * (2.0 / n_x) / (4 * np.pi))


def overlap_qfs(N, xi, alpha, sector_parity, dlam=1e-5):
    """-2 ln|<psi_j(0)|psi_j(dlam)>| / dlam^2 from dense numpy diagonalizations."""
    H = dense_hamiltonian(N, xi, alpha)
    HI = dense_interaction(N, xi, alpha)
    blocks = [parity_blocks(M)[sector_parity] for M in (H, HI)]
    _, V0 = np.linalg.eigh(blocks[0])
    est = []
    for lam in (dlam, -dlam):
        _, V = np.linalg.eigh(blocks[0] + lam * blocks[1])
        ov = np.abs(np.sum(V0 * V, axis=0))
        # 1 - |ov| computed through the vector distance to avoid cancellation
        V = V * np.sign(np.sum(V0 * V, axis=0))
        dist2 = np.sum((V - V0) ** 2, axis=0)
        est.append(-2 * np.log1p(-0.5 * dist2) / lam**2)
        assert np.allclose(ov, 1 - 0.5 * dist2, atol=1e-12)
    return 0.5 * (est[0] + est[1])
