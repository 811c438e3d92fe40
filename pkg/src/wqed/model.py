"""Chain configuration, the Gaussian drive, and the right-hand-side
superoperators of the single-photon hierarchy.

Physics conventions
-------------------
Rates are in units of gamma, times in 1/gamma, positions in units of the
resonant wavelength lambda_0. Atom 1 sits leftmost and is reached first by
the right-moving drive. For atoms i, j the waveguide-mediated coupling
carries the propagation phase

    theta_ij = 2*pi * k0_wavelengths * |d_i - d_j|,

a function of the travelled distance for both the right- and left-moving
channel, while the drive picks up phi_i = 2*pi * k0_wavelengths * d_i at
atom i. The cooperative (cascaded) term is

    L_cd[x] = - sum_{i != j} K_ij [ e^{+i theta_ij} (s_i^+ s_j^- x - s_j^- x s_i^+)
                                  + e^{-i theta_ij} (x s_j^+ s_i^- - s_i^- x s_j^+) ],

    K_ij = sqrt(gamma_iR gamma_jR) for i > j  (right movers, downstream)
         = sqrt(gamma_iL gamma_jL) for i < j  (left movers, upstream),

which is Hermiticity- and trace-preserving for arbitrary phases and reduces
at zero phase to the familiar bidirectional cooperative decay. Together with
pure decay it is exactly D[L_R] + D[L_L] plus the cascade interaction, with
collective jump operators L_R = sum_i sqrt(gamma_iR) e^{-i phi_i} s_i^- and
L_L = sum_i sqrt(gamma_iL) e^{+i phi_i} s_i^-.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .linalg import atomic_lowering

NORMALIZATIONS = ("as-written", "l2-normalized")
DRIVE_COEFFICIENTS = ("sqrt-2-gamma", "sqrt-gamma")


@dataclass(frozen=True)
class AtomParams:
    """Decay rates into the two continua, detuning from the pulse carrier,
    and position along the waveguide."""

    gamma_left: float = 1.0
    gamma_right: float = 1.0
    detuning: float = 0.0
    position: float = 0.0

    def __post_init__(self):
        # zero total rate is allowed here (decoupled-atom edge cases);
        # config validation flags it as physically suspect
        if self.gamma_left < 0 or self.gamma_right < 0:
            raise ValueError("decay rates must be non-negative")


@dataclass(frozen=True)
class ChainConfig:
    """An ordered chain of atoms plus the photon wavenumber.

    ``k0_wavelengths`` scales all propagation phases: a pair separated by
    ``s`` wavelengths acquires 2*pi*k0_wavelengths*s.
    """

    atoms: tuple[AtomParams, ...]
    k0_wavelengths: float = 1.0

    def __post_init__(self):
        if len(self.atoms) == 0:
            raise ValueError("need at least one atom")
        pos = [a.position for a in self.atoms]
        if any(b < a for a, b in zip(pos, pos[1:])):
            raise ValueError("positions must be non-decreasing with atom index")

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    @property
    def dim(self) -> int:
        return 2**self.n_atoms


def uniform_chain(
    n_atoms: int,
    gamma_right: float = 1.0,
    gamma_left: float = 1.0,
    detuning: float = 0.0,
    spacing: float = 0.0,
    k0_wavelengths: float = 1.0,
) -> ChainConfig:
    """Identical atoms on a uniform grid, atom i at (i-1)*spacing."""
    atoms = tuple(
        AtomParams(gamma_left, gamma_right, detuning, i * spacing)
        for i in range(n_atoms)
    )
    return ChainConfig(atoms=atoms, k0_wavelengths=k0_wavelengths)


@dataclass(frozen=True)
class PulseSpec:
    """Gaussian envelope g(t) with mean and width in units of 1/gamma.

    normalization:
        "as-written"     g(t) = exp(-(t-mean)^2 / (2 width^2)) / (sqrt(2 pi) width),
                         unit time-integral of g itself.
        "l2-normalized"  same shape rescaled so the integral of |g|^2 is 1,
                         the single-photon normalization.

    drive_coefficient:
        "sqrt-2-gamma"   the density-matrix drive couples with sqrt(2 gamma_iR)
                         per atom while the vacuum-coherence source keeps
                         sqrt(gamma_iR).
        "sqrt-gamma"     both couplings use sqrt(gamma_iR).
    """

    mean: float = 5.0
    width: float = 1.5
    normalization: str = "l2-normalized"
    drive_coefficient: str = "sqrt-2-gamma"

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("width must be positive")
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"unknown normalization {self.normalization!r}")
        if self.drive_coefficient not in DRIVE_COEFFICIENTS:
            raise ValueError(f"unknown drive_coefficient {self.drive_coefficient!r}")

    @property
    def amplitude(self) -> float:
        if self.normalization == "as-written":
            return 1.0 / (np.sqrt(2.0 * np.pi) * self.width)
        return 1.0 / (np.pi**0.25 * np.sqrt(self.width))


@dataclass(frozen=True)
class DriveSample:
    """Complex amplitude of g at one evaluation time."""

    g_value: complex


def gaussian_envelope(t: float, spec: PulseSpec) -> DriveSample:
    """Evaluate the Gaussian drive amplitude at time t."""
    val = spec.amplitude * np.exp(-((t - spec.mean) ** 2) / (2.0 * spec.width**2))
    return DriveSample(g_value=complex(val))


@dataclass
class ChainOperators:
    """Precomputed operator tables for one chain configuration.

    ``effective`` is the non-Hermitian generator G collecting the coherent
    part, half the pure decay, and the cascade couplings; the full vacuum
    Liouvillian acts as L[x] = G x + x G^dag + sum_a s_a x collapse[a]."""

    n_atoms: int
    hamiltonian: np.ndarray
    lowering: np.ndarray            # (N, dim, dim)
    raising: np.ndarray             # (N, dim, dim)
    effective: np.ndarray           # G
    collapse: np.ndarray            # (N, dim, dim), R_a = sum_b W_ab s_b^dag
    w_matrix: np.ndarray            # (N, N) sandwich coefficient matrix
    drive_phases: np.ndarray        # e^{+i phi_i}
    gamma_right: np.ndarray
    gamma_rl: np.ndarray


def _chain_operators_uncached(cfg: ChainConfig) -> ChainOperators:
    n = cfg.n_atoms
    g_r = np.array([a.gamma_right for a in cfg.atoms], dtype=float)
    g_l = np.array([a.gamma_left for a in cfg.atoms], dtype=float)
    det = np.array([a.detuning for a in cfg.atoms], dtype=float)
    pos = np.array([a.position for a in cfg.atoms], dtype=float)
    g_rl = (g_r + g_l) / 2.0

    sig = np.array([atomic_lowering(i, n) for i in range(1, n + 1)])
    sdg = sig.conj().transpose(0, 2, 1)
    proj = np.array([sdg[i] @ sig[i] for i in range(n)])

    ham = sum(det[i] * proj[i] for i in range(n))

    signed = 2.0 * np.pi * cfg.k0_wavelengths * (pos[:, None] - pos[None, :])
    theta = np.abs(signed)

    eff = -1j * ham - sum(g_rl[i] * proj[i] for i in range(n))
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            k_ij = np.sqrt(g_r[i] * g_r[j]) if i > j else np.sqrt(g_l[i] * g_l[j])
            eff = eff - k_ij * np.exp(1j * theta[i, j]) * (sdg[i] @ sig[j])

    w = (np.sqrt(np.outer(g_r, g_r)) * np.exp(-1j * signed)
         + np.sqrt(np.outer(g_l, g_l)) * np.exp(+1j * signed))
    collapse = np.einsum("ab,bij->aij", w, sdg)

    return ChainOperators(
        n_atoms=n,
        hamiltonian=ham,
        lowering=sig,
        raising=sdg,
        effective=eff,
        collapse=collapse,
        w_matrix=w,
        drive_phases=np.exp(1j * 2.0 * np.pi * cfg.k0_wavelengths * pos),
        gamma_right=g_r,
        gamma_rl=g_rl,
    )


@lru_cache(maxsize=64)
def chain_operators(cfg: ChainConfig) -> ChainOperators:
    return _chain_operators_uncached(cfg)


def drive_couplings(cfg: ChainConfig, pulse: PulseSpec) -> tuple[np.ndarray, np.ndarray]:
    """Per-atom drive coefficients (c_s for the density-matrix equation,
    c_10 for the vacuum-coherence source)."""
    ops = chain_operators(cfg)
    c10 = np.sqrt(ops.gamma_right)
    if pulse.drive_coefficient == "sqrt-2-gamma":
        cs = np.sqrt(2.0 * ops.gamma_right)
    else:
        cs = np.sqrt(ops.gamma_right)
    return cs, c10


def build_hamiltonian(cfg: ChainConfig) -> np.ndarray:
    """Sum of detuning * |e_i><e_i| terms; diagonal in the product basis."""
    return chain_operators(cfg).hamiltonian.copy()


def _check_dim(rho: np.ndarray, cfg: ChainConfig) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (cfg.dim, cfg.dim):
        raise ValueError(f"operator shape {rho.shape} does not match dim {cfg.dim}")
    return rho


def apply_coherent(rho: np.ndarray, cfg: ChainConfig) -> np.ndarray:
    """-i [H, rho]."""
    rho = _check_dim(rho, cfg)
    h = chain_operators(cfg).hamiltonian
    return -1j * (h @ rho - rho @ h)


def apply_pure_decay(rho: np.ndarray, cfg: ChainConfig) -> np.ndarray:
    """Independent-atom dissipator at rates (gamma_iR + gamma_iL)/2 in the
    convention where an excited atom's population decays at the total rate
    gamma_iR + gamma_iL."""
    rho = _check_dim(rho, cfg)
    ops = chain_operators(cfg)
    out = np.zeros_like(rho)
    for i in range(ops.n_atoms):
        sm, sp = ops.lowering[i], ops.raising[i]
        pe = sp @ sm
        out += ops.gamma_rl[i] * (2.0 * (sm @ rho @ sp) - pe @ rho - rho @ pe)
    return out


def apply_cooperative_decay(rho: np.ndarray, cfg: ChainConfig) -> np.ndarray:
    """Waveguide-mediated inter-atom dissipative coupling (zero for N = 1).

    Cascaded double sum over ordered pairs; see the module docstring for the
    exact form and phase convention. Traceless and Hermiticity-preserving for
    arbitrary phases.
    """
    rho = _check_dim(rho, cfg)
    ops = chain_operators(cfg)
    n = ops.n_atoms
    out = np.zeros_like(rho)
    if n == 1:
        return out
    g_r = ops.gamma_right
    g_l = 2.0 * ops.gamma_rl - g_r
    pos = np.array([a.position for a in cfg.atoms], dtype=float)
    theta = 2.0 * np.pi * cfg.k0_wavelengths * np.abs(pos[:, None] - pos[None, :])
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            k_ij = np.sqrt(g_r[i] * g_r[j]) if i > j else np.sqrt(g_l[i] * g_l[j])
            if k_ij == 0.0:
                continue
            sp_i, sm_j = ops.raising[i], ops.lowering[j]
            sm_i, sp_j = ops.lowering[i], ops.raising[j]
            ph = np.exp(1j * theta[i, j])
            out -= k_ij * (
                ph * (sp_i @ sm_j @ rho - sm_j @ rho @ sp_i)
                + np.conj(ph) * (rho @ sp_j @ sm_i - sm_i @ rho @ sp_j)
            )
    return out


def apply_vacuum_liouvillian(rho: np.ndarray, cfg: ChainConfig) -> np.ndarray:
    """Coherent + pure decay + cooperative decay, the undriven generator."""
    return (
        apply_coherent(rho, cfg)
        + apply_pure_decay(rho, cfg)
        + apply_cooperative_decay(rho, cfg)
    )


def apply_drive_s(
    rho01: np.ndarray,
    rho10: np.ndarray,
    t: float,
    cfg: ChainConfig,
    pulse: PulseSpec,
) -> np.ndarray:
    """Single-photon drive contribution to d rho_s/dt.

    sum_i c_i ( e^{+i phi_i} g(t) [rho01, s_i^+] + e^{-i phi_i} g*(t) [s_i^-, rho10] )
    with c_i selected by pulse.drive_coefficient; the caller supplies
    rho01 = rho10^dag. Traceless by construction.
    """
    rho01 = _check_dim(rho01, cfg)
    rho10 = _check_dim(rho10, cfg)
    ops = chain_operators(cfg)
    cs, _ = drive_couplings(cfg, pulse)
    g = gaussian_envelope(t, pulse).g_value
    a_op = np.einsum("i,iuv->uv", cs * ops.drive_phases, ops.raising)
    b_op = a_op.conj().T
    return g * (rho01 @ a_op - a_op @ rho01) + np.conj(g) * (b_op @ rho10 - rho10 @ b_op)


def apply_drive_10(
    rho00: np.ndarray,
    t: float,
    cfg: ChainConfig,
    pulse: PulseSpec,
) -> np.ndarray:
    """Source term feeding the vacuum-coherence operator from rho00:
    sum_i c10_i e^{+i phi_i} g(t) [rho00, s_i^+]; zero whenever g(t) = 0."""
    rho00 = _check_dim(rho00, cfg)
    ops = chain_operators(cfg)
    _, c10 = drive_couplings(cfg, pulse)
    g = gaussian_envelope(t, pulse).g_value
    c_op = np.einsum("i,iuv->uv", c10 * ops.drive_phases, ops.raising)
    return g * (rho00 @ c_op - c_op @ rho00)
