"""Dense complex operator kernel for small multi-qubit registers.

Operators are plain ``numpy.ndarray`` of complex128, shape (dim, dim) with
dim = 2**n_atoms. Basis ordering is atom-1-major: atom 1 is the leftmost
tensor factor (most significant bit), and each qubit is ordered
(ground, excited), so e.g. for two atoms the basis reads
|gg>, |ge>, |eg>, |ee>.
"""

from __future__ import annotations

import numpy as np

# single-qubit building blocks, basis (g, e)
IDENTITY_2 = np.eye(2, dtype=complex)
SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)   # |g><e|
SIGMA_PLUS = np.array([[0, 0], [1, 0]], dtype=complex)    # |e><g|
SIGMA_Z = np.array([[-1, 0], [0, 1]], dtype=complex)      # |e><e| - |g><g|
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product; (kron(a,b))[i*db+k, j*db+l] = a[i,j] * b[k,l]."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def embed_single_qubit(op: np.ndarray, i: int, n_atoms: int) -> np.ndarray:
    """Place a 2x2 operator at slot i (1-based, slot 1 leftmost) of an
    n_atoms register, identity elsewhere."""
    if not 1 <= i <= n_atoms:
        raise IndexError(f"atom index {i} out of range 1..{n_atoms}")
    out = np.ones((1, 1), dtype=complex)
    for slot in range(1, n_atoms + 1):
        out = kron(out, op if slot == i else IDENTITY_2)
    return out


def atomic_lowering(i: int, n_atoms: int) -> np.ndarray:
    """Lowering operator |g_i><e_i| embedded in the n-atom register."""
    return embed_single_qubit(SIGMA_MINUS, i, n_atoms)


def ground_projector(n_atoms: int) -> np.ndarray:
    """|G><G| with every atom in its ground state."""
    dim = 2**n_atoms
    out = np.zeros((dim, dim), dtype=complex)
    out[0, 0] = 1.0
    return out


def single_excitation_indices(n_atoms: int) -> list[int]:
    """Basis indices of the states with exactly atom i excited, i = 1..N."""
    return [2 ** (n_atoms - i) for i in range(1, n_atoms + 1)]


def partial_trace_pair(rho: np.ndarray, keep: tuple[int, int], n_atoms: int) -> np.ndarray:
    """Reduced 4x4 density matrix over the kept pair of atoms (1-based),
    first listed atom becomes the first slot of the output."""
    a, b = keep
    if a == b:
        raise ValueError("keep indices must be distinct")
    for idx in (a, b):
        if not 1 <= idx <= n_atoms:
            raise ValueError(f"atom index {idx} out of range 1..{n_atoms}")
    dim = 2**n_atoms
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (dim, dim):
        raise ValueError(f"expected shape {(dim, dim)}, got {rho.shape}")
    t = rho.reshape((2,) * (2 * n_atoms))
    keep0 = [a - 1, b - 1]
    rest = [k for k in range(n_atoms) if k not in keep0]
    perm = keep0 + rest
    t = t.transpose(perm + [n_atoms + p for p in perm])
    t = t.reshape(4, 2 ** (n_atoms - 2), 4, 2 ** (n_atoms - 2))
    return np.einsum("ikjk->ij", t)


def _householder_hessenberg(m: np.ndarray) -> np.ndarray:
    """Reduce a small complex matrix to upper Hessenberg form."""
    h = np.array(m, dtype=complex)
    n = h.shape[0]
    for k in range(n - 2):
        x = h[k + 1 :, k].copy()
        nx = np.linalg.norm(x)
        if nx < 1e-300:
            continue
        # complex Householder: v aligned with x, phase taken from x[0]
        alpha = -np.exp(1j * np.angle(x[0])) * nx if abs(x[0]) > 0 else -nx
        v = x.copy()
        v[0] -= alpha
        nv = np.linalg.norm(v)
        if nv < 1e-300:
            continue
        v /= nv
        # H = I - 2 v v^dag applied from both sides
        h[k + 1 :, k:] -= 2.0 * np.outer(v, v.conj() @ h[k + 1 :, k:])
        h[:, k + 1 :] -= 2.0 * np.outer(h[:, k + 1 :] @ v, v.conj())
        h[k + 2 :, k] = 0.0
    return h


def _eig_2x2(a, b, c, d) -> tuple[complex, complex]:
    """Eigenvalues of [[a, b], [c, d]]."""
    tr = a + d
    disc = np.sqrt((a - d) ** 2 / 4.0 + b * c + 0j)
    return tr / 2.0 + disc, tr / 2.0 - disc


def _wilkinson_shift(h: np.ndarray, k: int) -> complex:
    """Shift from the trailing 2x2 of the active block ending at index k."""
    a, b = h[k - 1, k - 1], h[k - 1, k]
    c, d = h[k, k - 1], h[k, k]
    l1, l2 = _eig_2x2(a, b, c, d)
    return l1 if abs(l1 - d) <= abs(l2 - d) else l2


def _qr_step_hessenberg(h: np.ndarray, lo: int, hi: int, mu: complex) -> None:
    """One shifted QR sweep on the active Hessenberg block h[lo:hi+1, lo:hi+1],
    in place, via Givens rotations."""
    n = hi - lo + 1
    g = []
    for i in range(lo, lo + n):
        h[i, i] -= mu
    # eliminate the subdiagonal of (H - mu I) -> R
    for i in range(lo, hi):
        a, b = h[i, i], h[i + 1, i]
        r = np.hypot(abs(a), abs(b))
        if r < 1e-300:
            cth, sth = 1.0 + 0j, 0.0 + 0j
        else:
            cth, sth = a / r, b / r
        g.append((cth, sth))
        row_i = h[i, i:hi + 1].copy()
        row_j = h[i + 1, i:hi + 1].copy()
        h[i, i:hi + 1] = np.conj(cth) * row_i + np.conj(sth) * row_j
        h[i + 1, i:hi + 1] = -sth * row_i + cth * row_j
    # form RQ
    for idx, i in enumerate(range(lo, hi)):
        cth, sth = g[idx]
        col_i = h[lo:hi + 1, i].copy()
        col_j = h[lo:hi + 1, i + 1].copy()
        h[lo:hi + 1, i] = col_i * cth + col_j * sth
        h[lo:hi + 1, i + 1] = -col_i * np.conj(sth) + col_j * np.conj(cth)
    for i in range(lo, lo + n):
        h[i, i] += mu


def eigenvalues_4x4(
    m: np.ndarray,
    max_sweeps: int = 200,
    subdiag_tol: float = 1e-12,
    clamp_tol: float = 1e-9,
) -> np.ndarray:
    """All four eigenvalues of a general (non-Hermitian) 4x4 matrix, sorted
    by descending real part.

    Hessenberg reduction followed by Wilkinson-shifted QR iteration with
    deflation; blocks of size <= 2 are finished off in closed form.
    Imaginary parts and negative real parts smaller than ``clamp_tol`` are
    clamped to zero (they arise from floating error when the input is a
    product of physical density matrices whose spectrum feeds square roots).

    Raises RuntimeError if the iteration has not deflated within
    ``max_sweeps`` sweeps.
    """
    m = np.asarray(m, dtype=complex)
    if m.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {m.shape}")
    h = _householder_hessenberg(m)
    eigs: list[complex] = []
    hi = 3
    sweeps = 0
    while hi >= 0:
        if hi == 0:
            eigs.append(h[0, 0])
            break
        # deflate any negligible subdiagonal in the active block
        deflated = False
        for i in range(hi, 0, -1):
            if abs(h[i, i - 1]) <= subdiag_tol * (abs(h[i - 1, i - 1]) + abs(h[i, i]) + 1e-300):
                h[i, i - 1] = 0.0
                if i == hi:
                    eigs.append(h[hi, hi])
                    hi -= 1
                    deflated = True
                    break
                if i == hi - 1:
                    l1, l2 = _eig_2x2(h[hi - 1, hi - 1], h[hi - 1, hi], h[hi, hi - 1], h[hi, hi])
                    eigs.extend([l1, l2])
                    hi -= 2
                    deflated = True
                    break
        if deflated:
            continue
        if hi == 1:
            l1, l2 = _eig_2x2(h[0, 0], h[0, 1], h[1, 0], h[1, 1])
            eigs.extend([l1, l2])
            break
        if sweeps >= max_sweeps:
            raise RuntimeError(f"QR iteration failed to converge within {max_sweeps} sweeps")
        _qr_step_hessenberg(h, 0, hi, _wilkinson_shift(h, hi))
        sweeps += 1
    vals = np.array(eigs[:4], dtype=complex)
    re, im = vals.real.copy(), vals.imag.copy()
    im[np.abs(im) < clamp_tol] = 0.0
    re[(re < 0) & (re > -clamp_tol)] = 0.0
    vals = re + 1j * im
    return vals[np.argsort(-vals.real)]
