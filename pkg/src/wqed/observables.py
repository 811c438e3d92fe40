"""Populations, two-qubit concurrence, pairwise averages and survival times."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .linalg import (
    SIGMA_Y,
    eigenvalues_4x4,
    kron,
    partial_trace_pair,
    single_excitation_indices,
)

AVG_MODES = ("all-pairs", "paper-n-half")

_YY = kron(SIGMA_Y, SIGMA_Y)


def _n_atoms_of(rho: np.ndarray) -> int:
    dim = rho.shape[0]
    n = dim.bit_length() - 1
    if 2**n != dim or rho.shape != (dim, dim):
        raise ValueError(f"operator shape {rho.shape} is not a qubit register")
    return n


def prob_single_excitation(rho: np.ndarray) -> float:
    """Total population of the N basis states with exactly one atom excited."""
    n = _n_atoms_of(rho)
    return float(sum(rho[k, k].real for k in single_excitation_indices(n)))


def prob_ground(rho: np.ndarray) -> float:
    """Population of the all-ground state (the (1,1) element)."""
    return float(rho[0, 0].real)


def spin_flipped(rho: np.ndarray) -> np.ndarray:
    """(sigma_y x sigma_y) rho* (sigma_y x sigma_y) in the product basis."""
    return _YY @ rho.conj() @ _YY


def concurrence(rho_pair: np.ndarray) -> float:
    """Wootters concurrence of a two-qubit density matrix.

    Square roots of the descending eigenvalues of rho * rho_tilde; eigenvalues
    are clamped to [0, inf) before the square root.
    """
    rho_pair = np.asarray(rho_pair, dtype=complex)
    if rho_pair.shape != (4, 4):
        raise ValueError("concurrence needs a 4x4 two-qubit density matrix")
    lam = eigenvalues_4x4(rho_pair @ spin_flipped(rho_pair)).real
    lam = np.sqrt(np.clip(lam, 0.0, None))
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def concurrence_shortcut_2atom(rho: np.ndarray) -> float:
    """Compact two-atom form 2*rho_c - |rho_4| with rho_c = <eg|rho|eg> and
    rho_4 = <gg|rho|ee>.

    Valid as a cross-check in the symmetric two-atom regime (identical atoms,
    zero relative phase, symmetric drive); misuse shows up as disagreement
    with the general formula.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError("two-atom shortcut needs a 4x4 density matrix")
    rho_c = rho[2, 2].real
    rho_4 = abs(rho[0, 3])
    return float(2.0 * rho_c - rho_4)


def pairwise_concurrences(rho_full: np.ndarray, n_atoms: int) -> dict[tuple[int, int], float]:
    """Concurrence of every reduced atom pair (1-based index pairs)."""
    out = {}
    for a, b in combinations(range(1, n_atoms + 1), 2):
        out[(a, b)] = concurrence(partial_trace_pair(rho_full, (a, b), n_atoms))
    return out


def avg_pairwise_concurrence(
    rho_full: np.ndarray, n_atoms: int, mode: str = "all-pairs"
) -> float:
    """Pairwise-averaged concurrence of an N-atom state.

    "all-pairs" divides the sum over all N(N-1)/2 reduced pairs by the number
    of pairs; "paper-n-half" divides the same sum by N/2.
    """
    if n_atoms < 2:
        raise ValueError("pairwise concurrence needs at least two atoms")
    if mode not in AVG_MODES:
        raise ValueError(f"unknown averaging mode {mode!r}")
    vals = pairwise_concurrences(rho_full, n_atoms)
    total = sum(vals.values())
    if mode == "all-pairs":
        return float(total / len(vals))
    return float(total / (n_atoms / 2.0))


@dataclass
class ObservableRecord:
    """One sampled point of a trajectory."""

    t: float
    p_single: float
    p_ground: float
    pairwise_concurrences: dict[tuple[int, int], float] = field(default_factory=dict)
    avg_concurrence: float = 0.0
    pulse_value: float = 0.0


@dataclass
class SurvivalSummary:
    peak_value: float
    peak_time: float
    survival_time: float
    threshold_used: float
    flat_curve: bool = False
    normalized_survival: float | None = None


def survival_time(
    times: np.ndarray,
    values: np.ndarray,
    threshold_fraction: float = 0.02,
    normalize_by: float | None = None,
) -> SurvivalSummary:
    """Total duration a sampled curve spends at or above a fraction of its
    own peak (default 2%). ``normalize_by`` divides the result by a reference
    duration, e.g. a pulse length."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.size == 0 or times.size != values.size:
        raise ValueError("need matching non-empty time and value arrays")
    peak_idx = int(np.argmax(values))
    peak = float(values[peak_idx])
    if peak <= 0.0:
        return SurvivalSummary(0.0, float(times[peak_idx]), 0.0, 0.0, flat_curve=True,
                               normalized_survival=0.0 if normalize_by else None)
    thr = threshold_fraction * peak
    if times.size == 1:
        duration = 0.0
    else:
        dt = float(np.median(np.diff(times)))
        duration = float(np.count_nonzero(values >= thr) * dt)
    return SurvivalSummary(
        peak_value=peak,
        peak_time=float(times[peak_idx]),
        survival_time=duration,
        threshold_used=thr,
        normalized_survival=(duration / normalize_by) if normalize_by else None,
    )


def onset_time(times: np.ndarray, values: np.ndarray, threshold_fraction: float = 0.02) -> float:
    """First time the curve reaches a fraction of its own peak; nan if flat."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    peak = values.max(initial=0.0)
    if peak <= 0.0:
        return float("nan")
    idx = int(np.argmax(values >= threshold_fraction * peak))
    return float(times[idx])
