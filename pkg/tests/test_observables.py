import numpy as np
import pytest

from wqed.linalg import ground_projector, kron, partial_trace_pair
from wqed.observables import (
    avg_pairwise_concurrence,
    concurrence,
    concurrence_shortcut_2atom,
    onset_time,
    pairwise_concurrences,
    prob_ground,
    prob_single_excitation,
    spin_flipped,
    survival_time,
)

rng = np.random.default_rng(7)


def ket(*amplitudes):
    v = np.array(amplitudes, dtype=complex)
    return v / np.linalg.norm(v)


def dm(psi):
    return np.outer(psi, psi.conj())


def bell():
    return dm(ket(0, 1, 1, 0))


def random_density_matrix(dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def haar_unitary_2():
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def reference_concurrence(rho):
    """Independent oracle route: numpy eigendecomposition of rho*rho_tilde."""
    lam = np.linalg.eigvals(rho @ spin_flipped(rho))
    lam = np.sqrt(np.clip(np.sort(lam.real)[::-1], 0, None))
    return max(0.0, lam[0] - lam[1] - lam[2] - lam[3])


class TestPopulations:
    def test_ground_has_no_excitation(self):
        assert prob_single_excitation(ground_projector(3)) == 0.0

    def test_first_atom_excited(self):
        rho = np.zeros((8, 8), dtype=complex)
        rho[4, 4] = 1.0  # |egg>
        assert prob_single_excitation(rho) == pytest.approx(1.0)

    def test_prob_ground_initial(self):
        assert prob_ground(ground_projector(4)) == pytest.approx(1.0)

    def test_prob_ground_maximally_mixed_single_atom(self):
        assert prob_ground(0.5 * np.eye(2, dtype=complex)) == pytest.approx(0.5)


class TestConcurrence:
    def test_bell_state_is_maximal(self):
        assert concurrence(bell()) == pytest.approx(1.0, abs=1e-9)

    def test_product_state_is_zero(self):
        psi = kron(ket(0.6, 0.8).reshape(2, 1), ket(1, 1j).reshape(2, 1)).ravel()
        assert concurrence(dm(psi)) == pytest.approx(0.0, abs=1e-9)

    def test_werner_state(self):
        # p |Phi+><Phi+| + (1-p) I/4 has concurrence max(0, (3p-1)/2)
        phi_plus = dm(ket(1, 0, 0, 1))
        for p in (0.5, 0.8, 0.2):
            rho = p * phi_plus + (1 - p) * np.eye(4) / 4.0
            expected = max(0.0, (3 * p - 1) / 2)
            assert concurrence(rho) == pytest.approx(expected, abs=1e-6)
            assert concurrence(rho) == pytest.approx(reference_concurrence(rho), abs=1e-9)

    def test_matches_reference_on_random_states(self):
        for _ in range(20):
            rho = random_density_matrix(4)
            assert concurrence(rho) == pytest.approx(reference_concurrence(rho), abs=1e-8)

    def test_local_unitary_invariance(self):
        rho = random_density_matrix(4)
        c0 = concurrence(rho)
        for _ in range(10):
            u = kron(haar_unitary_2(), haar_unitary_2())
            assert concurrence(u @ rho @ u.conj().T) == pytest.approx(c0, abs=1e-8)

    def test_range_on_random_psd_inputs(self):
        for _ in range(25):
            c = concurrence(random_density_matrix(4))
            assert 0.0 <= c <= 1.0 + 1e-12


class TestShortcut:
    def test_ground_state(self):
        assert concurrence_shortcut_2atom(ground_projector(2)) == 0.0

    def test_bell_state(self):
        # rho_c = <eg|rho|eg> = 1/2, rho_4 = 0
        assert concurrence_shortcut_2atom(bell()) == pytest.approx(1.0)

    def test_agrees_with_general_on_symmetric_states(self):
        # symmetric single-excitation mixture: m * outer coherence block
        for m in (0.02, 0.1, 0.24):
            rho = np.zeros((4, 4), dtype=complex)
            rho[0, 0] = 1 - 2 * m
            rho[1:3, 1:3] = m
            assert concurrence_shortcut_2atom(rho) == pytest.approx(
                concurrence(rho), abs=1e-10
            )


class TestPairwiseAverage:
    def test_two_atoms_both_modes_equal_single_pair(self):
        rho = random_density_matrix(4)
        c = concurrence(rho)
        assert avg_pairwise_concurrence(rho, 2, "all-pairs") == pytest.approx(c)
        assert avg_pairwise_concurrence(rho, 2, "paper-n-half") == pytest.approx(c)

    def test_w_state_all_pairs(self):
        # W state on 3 atoms: every reduced pair has concurrence 2/3
        psi = np.zeros(8, dtype=complex)
        psi[[4, 2, 1]] = 1 / np.sqrt(3)
        rho = dm(psi)
        pairs = pairwise_concurrences(rho, 3)
        for val in pairs.values():
            ref = reference_concurrence(partial_trace_pair(rho, (1, 2), 3))
            assert val == pytest.approx(ref, abs=1e-9)
            assert val == pytest.approx(2.0 / 3.0, abs=1e-9)
        assert avg_pairwise_concurrence(rho, 3, "all-pairs") == pytest.approx(2 / 3, abs=1e-9)

    def test_paper_mode_normalization(self):
        psi = np.zeros(8, dtype=complex)
        psi[[4, 2, 1]] = 1 / np.sqrt(3)
        rho = dm(psi)
        total = sum(pairwise_concurrences(rho, 3).values())
        assert avg_pairwise_concurrence(rho, 3, "paper-n-half") == pytest.approx(total / 1.5)

    def test_permutation_invariance(self):
        rho = random_density_matrix(8)
        # swap atoms 1 and 3: reverse each index's bits 0 and 2
        perm = [int(f"{i:03b}"[::-1], 2) for i in range(8)]
        rho_swapped = rho[np.ix_(perm, perm)]
        a = avg_pairwise_concurrence(rho, 3, "all-pairs")
        b = avg_pairwise_concurrence(rho_swapped, 3, "all-pairs")
        assert a == pytest.approx(b, abs=1e-10)

    def test_rejects_single_atom(self):
        with pytest.raises(ValueError):
            avg_pairwise_concurrence(np.eye(2, dtype=complex) / 2, 1)


class TestSurvival:
    def test_constant_zero_curve(self):
        t = np.linspace(0, 10, 101)
        s = survival_time(t, np.zeros_like(t))
        assert s.survival_time == 0.0
        assert s.flat_curve

    def test_rectangular_pulse(self):
        dt = 0.01
        t = np.arange(0, 10, dt)
        v = np.where((t >= 2.0) & (t < 5.0), 1.0, 0.0)
        s = survival_time(t, v)
        assert s.survival_time == pytest.approx(3.0, abs=2 * dt)
        assert s.peak_value == 1.0
        assert s.threshold_used == pytest.approx(0.02)

    def test_normalization(self):
        t = np.arange(0, 10, 0.01)
        v = np.where((t >= 1.0) & (t < 5.85), 1.0, 0.0)
        s = survival_time(t, v, normalize_by=4.85)
        assert s.normalized_survival == pytest.approx(1.0, abs=0.01)

    def test_onset_time(self):
        t = np.linspace(0, 10, 1001)
        v = np.clip(t - 4.0, 0.0, None)
        assert onset_time(t, v) == pytest.approx(4.12, abs=0.02)
