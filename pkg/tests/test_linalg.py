import numpy as np
import pytest

from wqed.linalg import (
    IDENTITY_2,
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_Y,
    SIGMA_Z,
    atomic_lowering,
    eigenvalues_4x4,
    ground_projector,
    kron,
    partial_trace_pair,
    single_excitation_indices,
)

rng = np.random.default_rng(20260809)


def random_density_matrix(dim, rng=rng):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def test_kron_identity():
    assert np.allclose(kron(IDENTITY_2, IDENTITY_2), np.eye(4))


def test_kron_sigma_y_pair():
    # expanded by hand from sigma_y entries: anti-diagonal (-1, 1, 1, -1)
    # reading from the top-right corner
    expected = np.array(
        [[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=complex
    )
    assert np.allclose(kron(SIGMA_Y, SIGMA_Y), expected)


def test_kron_embedding_is_lowering():
    assert np.allclose(kron(SIGMA_MINUS, IDENTITY_2), atomic_lowering(1, 2))


def test_kron_matches_index_formula():
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    out = kron(a, b)
    for i in range(2):
        for j in range(2):
            for k in range(3):
                for l in range(3):
                    assert out[i * 3 + k, j * 3 + l] == pytest.approx(a[i, j] * b[k, l])


def test_kron_associativity():
    mats = []
    for _ in range(3):
        m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        mats.append(m / np.linalg.norm(m))
    a, b, c = mats
    assert np.max(np.abs(kron(kron(a, b), c) - kron(a, kron(b, c)))) < 1e-12


def test_atomic_lowering_action():
    sm = atomic_lowering(1, 1)
    e = np.array([0.0, 1.0], dtype=complex)
    g = np.array([1.0, 0.0], dtype=complex)
    assert np.allclose(sm @ e, g)
    assert np.allclose(sm @ g, 0.0)


def test_atomic_lowering_nilpotent():
    sm = atomic_lowering(2, 2)
    assert np.allclose(sm @ sm, 0.0)


def test_commutation_relations():
    # [sigma_i^+, sigma_j^-] = sigma_z_i delta_ij
    s1m, s2m = atomic_lowering(1, 2), atomic_lowering(2, 2)
    s1p = s1m.conj().T
    assert np.allclose(s1p @ s2m - s2m @ s1p, 0.0)
    comm = s1p @ s1m - s1m @ s1p
    assert np.allclose(comm, kron(SIGMA_Z, IDENTITY_2))


def test_atomic_lowering_index_errors():
    with pytest.raises(IndexError):
        atomic_lowering(0, 2)
    with pytest.raises(IndexError):
        atomic_lowering(3, 2)


def test_single_excitation_indices_ordering():
    # atom 1 is the most significant bit
    assert single_excitation_indices(2) == [2, 1]
    assert single_excitation_indices(3) == [4, 2, 1]


def bell_density_matrix():
    psi = np.zeros(4, dtype=complex)
    psi[1] = psi[2] = 1 / np.sqrt(2)  # (|ge> + |eg>)/sqrt(2)
    return np.outer(psi, psi.conj())


def brute_force_pair_trace(rho, keep, n):
    """Independent oracle: explicit index summation over traced-out atoms."""
    a, b = keep[0] - 1, keep[1] - 1
    rest = [k for k in range(n) if k not in (a, b)]
    out = np.zeros((4, 4), dtype=complex)
    def bits(idx):
        return [(idx >> (n - 1 - k)) & 1 for k in range(n)]
    def idx_of(bitlist):
        out_ = 0
        for bit in bitlist:
            out_ = (out_ << 1) | bit
        return out_
    for r in range(4):
        for c in range(4):
            ra, rb = (r >> 1) & 1, r & 1
            ca, cb = (c >> 1) & 1, c & 1
            for m in range(2 ** len(rest)):
                rowbits = [0] * n
                colbits = [0] * n
                rowbits[a], rowbits[b] = ra, rb
                colbits[a], colbits[b] = ca, cb
                for kk, pos in enumerate(rest):
                    bit = (m >> kk) & 1
                    rowbits[pos] = bit
                    colbits[pos] = bit
                out[r, c] += rho[idx_of(rowbits), idx_of(colbits)]
    return out


def test_partial_trace_product_state():
    rho = ground_projector(4)
    red = partial_trace_pair(rho, (2, 3), 4)
    assert np.allclose(red, ground_projector(2))


def test_partial_trace_bell_factor_recovery():
    rho = kron(bell_density_matrix(), np.diag([1.0, 0.0]).astype(complex))
    red = partial_trace_pair(rho, (1, 2), 3)
    assert np.allclose(red, bell_density_matrix())


def test_partial_trace_keep_1_3_against_brute_force():
    rho = kron(bell_density_matrix(), np.diag([1.0, 0.0]).astype(complex))
    red = partial_trace_pair(rho, (1, 3), 3)
    assert np.allclose(red, brute_force_pair_trace(rho, (1, 3), 3))
    # expected: maximally mixed on atom 1, ground on atom 3
    assert np.allclose(red, kron(0.5 * np.eye(2), np.diag([1.0, 0.0])))


def test_partial_trace_random_states_match_oracle():
    for n in (3, 4, 5):
        rho = random_density_matrix(2**n)
        for keep in [(1, 2), (2, n), (1, n)]:
            red = partial_trace_pair(rho, keep, n)
            assert np.allclose(red, brute_force_pair_trace(rho, keep, n), atol=1e-12)
            assert abs(np.trace(red) - np.trace(rho)) < 1e-12
            assert np.max(np.abs(red - red.conj().T)) < 1e-12


def test_partial_trace_invalid_indices():
    rho = random_density_matrix(8)
    with pytest.raises(ValueError):
        partial_trace_pair(rho, (1, 1), 3)
    with pytest.raises(ValueError):
        partial_trace_pair(rho, (0, 2), 3)
    with pytest.raises(ValueError):
        partial_trace_pair(rho, (1, 4), 3)


def spin_flip_product(rho):
    yy = kron(SIGMA_Y, SIGMA_Y)
    return rho @ yy @ rho.conj() @ yy


def test_eigenvalues_diagonal():
    vals = eigenvalues_4x4(np.diag([4.0, 3.0, 2.0, 1.0]).astype(complex))
    assert np.allclose(vals, [4, 3, 2, 1])


def test_eigenvalues_bell_spin_flip():
    # a Bell state equals its own spin flip, so rho @ rho_tilde = rho with
    # spectrum (1, 0, 0, 0)
    m = spin_flip_product(bell_density_matrix())
    vals = eigenvalues_4x4(m)
    assert np.allclose(vals, [1, 0, 0, 0], atol=1e-9)


def test_eigenvalues_ground_spin_flip():
    m = spin_flip_product(ground_projector(2))
    assert np.allclose(eigenvalues_4x4(m), 0.0, atol=1e-12)


def test_eigenvalues_hermitian_against_symmetric_solver():
    for _ in range(25):
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        h = a + a.conj().T
        mine = np.sort(eigenvalues_4x4(h).real)
        ref = np.sort(np.linalg.eigvalsh(h))
        assert np.max(np.abs(mine - ref)) < 1e-9


def test_eigenvalues_general_against_numpy():
    for _ in range(25):
        m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        mine = eigenvalues_4x4(m, clamp_tol=0.0)
        ref = np.linalg.eigvals(m)
        mine = np.sort_complex(mine)
        ref = np.sort_complex(ref)
        assert np.max(np.abs(mine - ref)) < 1e-8


def test_eigenvalues_defective_matrix():
    # Jordan block: defective, eigenvalue 2 with multiplicity 4
    j = 2.0 * np.eye(4) + np.diag([1.0, 1.0, 1.0], k=1)
    vals = eigenvalues_4x4(j.astype(complex))
    assert np.allclose(vals.real, 2.0, atol=1e-3)


def test_eigenvalues_rejects_wrong_shape():
    with pytest.raises(ValueError):
        eigenvalues_4x4(np.eye(3, dtype=complex))
