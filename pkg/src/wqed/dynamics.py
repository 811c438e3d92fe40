"""Joint fixed-step integration of the (rho00, rho10, rho_s) hierarchy.

The three operators evolve under the same vacuum Liouvillian; rho00 feeds
rho10 through the single-photon source term and rho10 (with its adjoint)
drives rho_s. Nothing couples back upward, so the stack is integrated
together with one classical RK4 step.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _kernel
from .linalg import ground_projector
from .model import (
    ChainConfig,
    PulseSpec,
    chain_operators,
    drive_couplings,
    gaussian_envelope,
)

# jitted stepping is used whenever numba imports; flip off to force the
# dense numpy path (the two agree to roundoff)
KERNEL_ENABLED = _kernel.HAVE_NUMBA
from .observables import (
    ObservableRecord,
    avg_pairwise_concurrence,
    pairwise_concurrences,
    prob_ground,
    prob_single_excitation,
)

TRACE_TOL = 1e-6
HERM_TOL = 1e-8
POSITIVITY_TOL = -1e-6


@dataclass(frozen=True)
class HierarchyState:
    """The jointly evolved triple at time t. rho_s is the physical density
    matrix; rho_10 is generally non-Hermitian; rho_01 is never stored and is
    materialized as rho_10^dag wherever needed."""

    rho_s: np.ndarray
    rho_10: np.ndarray
    rho_00: np.ndarray
    t: float


@dataclass(frozen=True)
class HierarchyDerivative:
    d_rho_s: np.ndarray
    d_rho_10: np.ndarray
    d_rho_00: np.ndarray


class _Engine:
    """Precomputed RHS evaluator acting on the stacked (3, dim, dim) state,
    stack order (rho00, rho10, rho_s).

    The hot path is organized around a few large GEMMs: the batch of three
    sectors is flattened into wide/tall 2D views so that the generator and
    each collapse contraction run as single BLAS calls instead of many
    small broadcast products.
    """

    def __init__(self, cfg: ChainConfig, pulse: PulseSpec | None):
        ops = chain_operators(cfg)
        d = cfg.dim
        n = ops.n_atoms
        self.dim = d
        self.n = n
        self.g_eff = np.ascontiguousarray(ops.effective)
        self.g_eff_dag = np.ascontiguousarray(ops.effective.conj().T)
        self.sig = ops.lowering
        self.collapse = ops.collapse
        # (N*d, d) stack of lowering operators and the (3N, d, d) tile of
        # collapse partners used by the batched sandwich contraction
        self.sig_v = np.ascontiguousarray(ops.lowering.reshape(n * d, d))
        self.collapse_tiled = np.ascontiguousarray(
            np.tile(ops.collapse, (3, 1, 1))
        )
        self.pulse = pulse
        if pulse is not None:
            cs, c10 = drive_couplings(cfg, pulse)
            self.a_op = np.einsum("i,iuv->uv", cs * ops.drive_phases, ops.raising)
            self.b_op = self.a_op.conj().T
            self.c_op = np.einsum("i,iuv->uv", c10 * ops.drive_phases, ops.raising)
            self._amp = pulse.amplitude
            self._mean = pulse.mean
            self._two_w2 = 2.0 * pulse.width**2
        # nonzero tables for the jitted kernel
        self._gr, self._gc, self._gv = _kernel.sparse_triplets(self.g_eff)
        self._src, self._dst = _kernel.excited_index_tables(n)
        self._w = np.ascontiguousarray(ops.w_matrix)
        empty_i = np.zeros(0, dtype=np.int64)
        empty_c = np.zeros(0, dtype=np.complex128)
        if pulse is not None:
            self._ar, self._ac, self._av = _kernel.sparse_triplets(self.a_op)
            self._cr, self._cc, self._cv = _kernel.sparse_triplets(self.c_op)
        else:
            self._ar = self._ac = self._cr = self._cc = empty_i
            self._av = self._cv = empty_c

    def _g(self, t: float) -> float:
        return self._amp * np.exp(-((t - self._mean) ** 2) / self._two_w2)

    def advance(self, stack: np.ndarray, t: float, n_steps: int, dt: float) -> np.ndarray:
        """n_steps RK4 steps starting at time t; mutates and returns stack."""
        if KERNEL_ENABLED:
            drive_on = self.pulse is not None
            _kernel.rk4_advance(
                stack, t, dt, n_steps,
                self._gr, self._gc, self._gv, self._w, self._src, self._dst,
                drive_on,
                self._amp if drive_on else 0.0,
                self._mean if drive_on else 0.0,
                self._two_w2 if drive_on else 1.0,
                self._ar, self._ac, self._av, self._cr, self._cc, self._cv,
            )
            return stack
        for k in range(n_steps):
            stack = _rk4_stack(self, stack, t + k * dt, dt)
        return stack

    def vacuum(self, x: np.ndarray) -> np.ndarray:
        """Vacuum Liouvillian on a batch of operators, shape (3, d, d)
        (or (1, d, d))."""
        b, d, n = x.shape[0], self.dim, self.n
        xw = x.transpose(1, 0, 2).reshape(d, b * d)          # columns = sectors
        gx = (self.g_eff @ xw).reshape(d, b, d).transpose(1, 0, 2)
        xg = (x.reshape(b * d, d) @ self.g_eff_dag).reshape(b, d, d)
        y = (self.sig_v @ xw).reshape(n, d, b, d).transpose(2, 0, 1, 3)
        y = np.ascontiguousarray(y).reshape(b * n, d, d)
        if b == 3:
            z = np.matmul(y, self.collapse_tiled)
        else:
            z = np.matmul(y, np.tile(self.collapse, (b, 1, 1)))
        return gx + xg + z.reshape(b, n, d, d).sum(axis=1)

    def rhs(self, t: float, stack: np.ndarray) -> np.ndarray:
        out = self.vacuum(stack)
        if self.pulse is not None:
            g = self._g(t)
            if g != 0.0:
                r00, r10 = stack[0], stack[1]
                out[1] += g * (r00 @ self.c_op - self.c_op @ r00)
                r01 = r10.conj().T
                out[2] += g * (r01 @ self.a_op - self.a_op @ r01)
                out[2] += np.conj(g) * (self.b_op @ r10 - r10 @ self.b_op)
        return out


@lru_cache(maxsize=32)
def _engine(cfg: ChainConfig, pulse: PulseSpec | None) -> _Engine:
    return _Engine(cfg, pulse)


def initial_state(cfg: ChainConfig, t0: float = 0.0) -> HierarchyState:
    """All atoms in the ground state: rho_s = rho00 = |G><G|, rho10 = 0."""
    g = ground_projector(cfg.n_atoms)
    zero = np.zeros_like(g)
    return HierarchyState(rho_s=g.copy(), rho_10=zero, rho_00=g.copy(), t=t0)


def _stack(state: HierarchyState) -> np.ndarray:
    return np.stack([state.rho_00, state.rho_10, state.rho_s])


def rhs(state: HierarchyState, t: float, cfg: ChainConfig,
        pulse: PulseSpec | None) -> HierarchyDerivative:
    """Time derivative of the full hierarchy at time t."""
    d = _engine(cfg, pulse).rhs(t, _stack(state))
    return HierarchyDerivative(d_rho_s=d[2], d_rho_10=d[1], d_rho_00=d[0])


def _rk4_stack(engine: _Engine, stack: np.ndarray, t: float, dt: float) -> np.ndarray:
    k1 = engine.rhs(t, stack)
    k2 = engine.rhs(t + dt / 2.0, stack + (dt / 2.0) * k1)
    k3 = engine.rhs(t + dt / 2.0, stack + (dt / 2.0) * k2)
    k4 = engine.rhs(t + dt, stack + dt * k3)
    return stack + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_step(state: HierarchyState, dt: float, cfg: ChainConfig,
             pulse: PulseSpec | None) -> HierarchyState:
    """One classical 4th-order Runge-Kutta step of the stacked hierarchy."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    new = _rk4_stack(_engine(cfg, pulse), _stack(state), state.t, dt)
    if not np.isfinite(new).all():
        raise FloatingPointError("integration produced non-finite entries")
    return HierarchyState(rho_s=new[2], rho_10=new[1], rho_00=new[0], t=state.t + dt)


@dataclass
class Trajectory:
    """Sampled observables of one integration plus invariant-drift stats."""

    times: np.ndarray
    records: list[ObservableRecord]
    config_echo: dict
    stats: dict = field(default_factory=dict)
    states: list[HierarchyState] | None = None

    def series(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    @property
    def p_single(self) -> np.ndarray:
        return self.series("p_single")

    @property
    def p_ground(self) -> np.ndarray:
        return self.series("p_ground")

    @property
    def avg_concurrence(self) -> np.ndarray:
        return self.series("avg_concurrence")

    @property
    def pulse_value(self) -> np.ndarray:
        return self.series("pulse_value")

    def pair_series(self, pair: tuple[int, int]) -> np.ndarray:
        return np.array([r.pairwise_concurrences.get(pair, 0.0) for r in self.records])


def _sample_checks(rho_s: np.ndarray, rho_00: np.ndarray, stats: dict) -> list[str]:
    breaches = []
    tr_err = abs(np.trace(rho_s).real - 1.0) + abs(np.trace(rho_s).imag)
    herm_err = float(np.max(np.abs(rho_s - rho_s.conj().T)))
    min_eig = float(np.linalg.eigvalsh((rho_s + rho_s.conj().T) / 2.0).min())
    tr00_err = abs(np.trace(rho_00) - 1.0)
    stats["max_trace_error"] = max(stats.get("max_trace_error", 0.0), tr_err)
    stats["max_herm_error"] = max(stats.get("max_herm_error", 0.0), herm_err)
    stats["min_eigenvalue"] = min(stats.get("min_eigenvalue", 0.0), min_eig)
    stats["max_trace00_error"] = max(stats.get("max_trace00_error", 0.0), tr00_err)
    if tr_err > TRACE_TOL:
        breaches.append(f"trace error {tr_err:.3e}")
    if herm_err > HERM_TOL:
        breaches.append(f"hermiticity drift {herm_err:.3e}")
    if min_eig < POSITIVITY_TOL:
        breaches.append(f"negative eigenvalue {min_eig:.3e}")
    return breaches


def integrate(
    cfg: ChainConfig,
    pulse: PulseSpec | None,
    t_end: float,
    dt: float = 1e-3,
    sample_every: float = 0.01,
    check: str = "warn",
    initial: HierarchyState | None = None,
    avg_mode: str = "all-pairs",
    keep_states: bool = False,
) -> Trajectory:
    """Fixed-step RK4 integration with per-sample observable extraction and
    invariant checks (trace, hermiticity, positivity).

    check: "warn" emits a single summary warning when any sampled state
    breaches a tolerance; "abort" raises at the first breach.
    """
    if check not in ("warn", "abort"):
        raise ValueError("check must be 'warn' or 'abort'")
    state = initial if initial is not None else initial_state(cfg)
    if t_end <= state.t:
        raise ValueError("t_end must exceed the initial time")
    if dt > sample_every + 1e-15:
        raise ValueError("dt must not exceed the sample interval")
    engine = _engine(cfg, pulse)
    stack = _stack(state)
    t = state.t
    n_steps = int(round((t_end - state.t) / dt))
    stride = max(1, int(round(sample_every / dt)))
    n = cfg.n_atoms

    times: list[float] = []
    records: list[ObservableRecord] = []
    states: list[HierarchyState] = []
    stats: dict = {}
    breach_count = 0
    first_breach = None

    def take_sample(t_now: float) -> None:
        nonlocal breach_count, first_breach
        rho_s, rho_00 = stack[2], stack[0]
        breaches = _sample_checks(rho_s, rho_00, stats)
        if breaches:
            breach_count += 1
            if first_breach is None:
                first_breach = (t_now, breaches)
            if check == "abort":
                raise RuntimeError(
                    f"invariant breach at t={t_now:.4f}: {'; '.join(breaches)}"
                )
        if pulse is not None:
            pulse_val = 2.0 * abs(gaussian_envelope(t_now, pulse).g_value)
        else:
            pulse_val = 0.0
        pairs = pairwise_concurrences(rho_s, n) if n >= 2 else {}
        avg_c = avg_pairwise_concurrence(rho_s, n, avg_mode) if n >= 2 else 0.0
        records.append(
            ObservableRecord(
                t=t_now,
                p_single=prob_single_excitation(rho_s),
                p_ground=prob_ground(rho_s),
                pairwise_concurrences=pairs,
                avg_concurrence=avg_c,
                pulse_value=pulse_val,
            )
        )
        times.append(t_now)
        if keep_states:
            states.append(
                HierarchyState(rho_s=stack[2].copy(), rho_10=stack[1].copy(),
                               rho_00=stack[0].copy(), t=t_now)
            )

    take_sample(t)
    done = 0
    while done < n_steps:
        seg = min(stride, n_steps - done)
        stack = engine.advance(stack, state.t + done * dt, seg, dt)
        done += seg
        t = state.t + done * dt
        if not np.isfinite(stack).all():
            raise FloatingPointError(f"integration blew up near t={t:.4f}")
        take_sample(t)

    if breach_count and check == "warn":
        t_b, what = first_breach
        warnings.warn(
            f"{breach_count} sampled state(s) breached invariants "
            f"(first at t={t_b:.3f}: {'; '.join(what)})",
            RuntimeWarning,
            stacklevel=2,
        )

    echo = {
        "n_atoms": n,
        "t_end": t_end,
        "dt": dt,
        "sample_every": sample_every,
        "avg_mode": avg_mode,
        "check": check,
        "basis_ordering": "atom-1-major, qubit order (ground, excited)",
    }
    traj = Trajectory(times=np.array(times), records=records, config_echo=echo, stats=stats)
    if keep_states:
        traj.states = states
    return traj


def integrate_vacuum(
    cfg: ChainConfig,
    rho0: np.ndarray,
    t_end: float,
    dt: float = 1e-3,
    sample_every: float = 0.01,
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Undriven evolution of a single operator under the vacuum Liouvillian;
    returns (times, sampled operators)."""
    engine = _engine(cfg, None)
    x = np.ascontiguousarray(np.asarray(rho0, dtype=complex)[None])
    n_steps = int(round(t_end / dt))
    stride = max(1, int(round(sample_every / dt)))
    times, mats = [0.0], [x[0].copy()]
    done = 0
    while done < n_steps:
        seg = min(stride, n_steps - done)
        x = engine.advance(x, done * dt, seg, dt)
        done += seg
        times.append(done * dt)
        mats.append(x[0].copy())
    return np.array(times), mats
