import numpy as np
import pytest

from almg import meanfield as mf
from almg.eigensolver import SpectrumBlock, eigh_tridiagonal, solve_sectors
from almg.model import ModelParams, ParitySector, build_hamiltonian_block
from almg.observables import (
    ObservableKind,
    energy_gaps,
    fidelity_qfs,
    interaction_matrix,
    interior_maxima,
    interior_minima,
    merge_series,
    number_expectation,
    participation_ratio,
    qfs_all_states,
    qfs_block,
    qfs_series,
    sector_series,
    squared_components,
)
from oracles import dense_hamiltonian, dense_interaction, overlap_qfs, parity_blocks

EVEN, ODD = ParitySector.EVEN, ParitySector.ODD


def block(N, xi, alpha, sector=EVEN):
    p = ModelParams(N, xi, alpha)
    return p, eigh_tridiagonal(build_hamiltonian_block(p, sector))


class TestGaps:
    def test_u1_unit_gaps(self):
        p, sp = block(40, 0.0, 0.0, ODD)
        g = energy_gaps(sp, p)
        # adjacent levels within one parity sector differ by 2 in n
        assert g.value == pytest.approx(np.full(sp.dim - 1, 2.0))
        assert g.energy == pytest.approx(0.5 * (sp.eigenvalues[1:] + sp.eigenvalues[:-1]))

    def test_full_u1_spectrum_unit_gaps(self):
        p = ModelParams(40, 0.0, 0.0)
        merged = np.sort(np.concatenate([b.eigenvalues for b in solve_sectors(p, vectors=False).values()]))
        assert np.diff(merged) == pytest.approx(np.ones(40))

    def test_positive(self):
        p, sp = block(300, 0.6, -0.6)
        assert np.all(energy_gaps(sp, p).value > 0)

    def test_needs_two_levels(self):
        p, sp = block(2, 0.5, 0.0, ODD)
        with pytest.raises(ValueError):
            energy_gaps(sp, p)

    def test_minimum_sharpens_with_N(self):
        mins = []
        for N in (120, 1200):
            s = sector_series(ObservableKind.GAP, ModelParams(N, 0.15, -0.6))
            exc = s.excitation_per_particle
            window = np.abs(exc - 0.25) < 0.03
            mins.append(np.min(s.value[window]))
        assert mins[1] < mins[0]


class TestNumber:
    def test_u1_exact(self):
        p, sp = block(30, 0.0, -0.4)
        assert np.array_equal(number_expectation(sp, p).value, sp.basis_n.astype(float))

    def test_n2_ground_state_oracle(self):
        p, sp = block(2, 0.2, 0.0)
        w, V = np.linalg.eigh(parity_blocks(dense_hamiltonian(2, 0.2, 0.0))[0])
        ref = np.array([0, 2]) @ V[:, 0] ** 2
        assert number_expectation(sp, p).value[0] == pytest.approx(ref, abs=1e-14)
        assert ref == pytest.approx(0.0298575, abs=1e-7)

    def test_bounds(self):
        for sector in ParitySector:
            p, sp = block(200, 0.6, -0.6, sector)
            v = number_expectation(sp, p).value
            assert np.all(v >= -1e-12) and np.all(v <= 200 + 1e-12)

    def test_extrema_at_separatrices(self):
        xi, alpha = 0.6, -0.6
        s = sector_series(ObservableKind.NUMBER, ModelParams(1200, xi, alpha))
        eps = s.energy_per_particle
        crit = mf.critical_energies(xi, alpha)
        mins, maxs = eps[interior_minima(s)], eps[interior_maxima(s)]
        assert np.min(np.abs(mins - crit["f1"])) < 0.01
        assert np.min(np.abs(maxs - crit["f2"])) < 0.01


class TestPR:
    def test_basis_vector_is_one(self):
        p, sp = block(20, 0.0, -0.3)
        assert participation_ratio(sp, p).value == pytest.approx(np.ones(sp.dim))

    def test_uniform_vector_is_d(self):
        d = 9
        V = np.full((d, d), 0.0)
        V[:, 0] = 1 / np.sqrt(d)
        V[:, 1:] = np.linalg.qr(np.column_stack([V[:, 0], np.eye(d)[:, 1:]]))[0][:, 1:]
        sp = SpectrumBlock(EVEN, np.arange(d, dtype=float), V, np.arange(0, 2 * d, 2))
        pr = participation_ratio(sp, ModelParams(16, 0.5, 0.0))
        assert pr.value[0] == pytest.approx(d)
        assert pr.value_normalized[0] == pytest.approx(1.0)

    def test_bounds(self):
        p, sp = block(400, 0.3, -0.6)
        v = participation_ratio(sp, p).value
        assert np.all(v >= 1 - 1e-12) and np.all(v <= sp.dim + 1e-9)

    def test_localizes_on_last_state(self):
        p, sp = block(600, 0.15, -0.6)
        s = participation_ratio(sp, p)
        mins = interior_minima(s)
        assert len(mins) >= 1
        hits = [k for k in mins if sp.basis_n[np.argmax(squared_components(sp, int(k)))] == 600]
        assert hits
        assert abs(s.excitation_per_particle[hits[0]] - mf.f2(0.15, -0.6).excitation) < 0.01


class TestQFS:
    def test_n2_oracle(self):
        p = ModelParams(2, 0.2, 0.0)
        blocks = solve_sectors(p)
        chi = qfs_block(blocks[EVEN], p)
        # dense oracle: M = V^T H^I V with numpy eigenvectors
        w, V = np.linalg.eigh(parity_blocks(dense_hamiltonian(2, 0.2, 0.0))[0])
        M = V.T @ parity_blocks(dense_interaction(2, 0.2, 0.0))[0] @ V
        ref = M[0, 1] ** 2 / (w[1] - w[0]) ** 2
        assert chi == pytest.approx([ref, ref], rel=1e-12)
        assert ref == pytest.approx(0.0553633, rel=1e-6)
        assert qfs_block(blocks[ODD], p) == pytest.approx([0.0])

    def test_u1_zero(self):
        p, sp = block(40, 0.0, -0.6)
        assert np.all(qfs_block(sp, p) == 0)

    def test_interaction_matrix_columns(self):
        p, sp = block(60, 0.4, -0.2)
        full = interaction_matrix(sp, p)
        assert np.allclose(full, full.T, atol=1e-12)
        assert np.allclose(interaction_matrix(sp, p, columns=[3, 7]), full[:, [3, 7]])

    def test_chunking_invariant(self):
        p, sp = block(300, 0.3, -0.6)
        assert np.allclose(qfs_block(sp, p, chunk=7), qfs_block(sp, p, chunk=1000), rtol=1e-12, atol=0)

    def test_coincident_eigenvalues_fail_loudly(self):
        sp = SpectrumBlock(EVEN, np.array([1.0, 1.0]), np.eye(2), np.array([0, 2]))
        with pytest.raises(FloatingPointError):
            qfs_block(sp, ModelParams(2, 0.5, 0.0))

    @pytest.mark.parametrize("N,xi,alpha", [(10, 0.6, -0.6), (24, 0.3, -0.6), (40, 0.15, -0.6)])
    def test_overlap_definition(self, N, xi, alpha):
        p = ModelParams(N, xi, alpha)
        for sector in ParitySector:
            chi = qfs_block(eigh_tridiagonal(build_hamiltonian_block(p, sector)), p)
            ref = overlap_qfs(N, xi, alpha, sector.value)
            assert chi == pytest.approx(ref, rel=1e-3)
            assert chi == pytest.approx(fidelity_qfs(p, sector), rel=1e-3)

    def test_all_states_merged(self):
        p = ModelParams(50, 0.3, -0.6)
        s = qfs_all_states(p)
        assert len(s) == 51
        assert np.all(np.diff(s.energy) >= 0) and np.all(s.value >= 0)
        assert set(s.parity) == {0, 1}
        assert s.value_normalized == pytest.approx(s.value / 2500)

    def test_two_peaks_lower_higher(self):
        xi, alpha = 0.3, -0.6
        p, sp = block(1024, xi, alpha)
        s = qfs_series(sp, p)
        eps = s.energy_per_particle
        crit = mf.critical_energies(xi, alpha)
        peaks = []
        for e in (crit["f1"], crit["f2"]):
            win = np.abs(eps - e) < 0.05
            k = np.flatnonzero(win)[np.argmax(s.value[win])]
            assert abs(eps[k] - e) < 0.01
            peaks.append(s.value_normalized[k])
        assert peaks[0] > peaks[1]


def test_merge_orders_by_energy_even_first():
    p = ModelParams(20, 0.0, 0.0)
    blocks = solve_sectors(p)
    parts = [number_expectation(blocks[s], p) for s in ParitySector]
    m = merge_series(parts)
    assert m.sector is None
    assert np.all(np.diff(m.energy) >= 0)
    assert m.value == pytest.approx(np.arange(21))
    assert list(m.parity[:2]) == [0, 1]


def test_sector_series_uses_global_ground():
    p = ModelParams(40, 0.6, -0.6)
    s = sector_series(ObservableKind.PR, p, sectors=(ODD,))
    e0 = min(b.eigenvalues[0] for b in solve_sectors(p, vectors=False).values())
    assert s.ground_energy == pytest.approx(e0)
    assert s.excitation_per_particle[0] > 0
