"""Time evolution of the qubit train coupled to the damped oscillator.

The model: qubits enter a cavity one at a time, qubit k at time (k-1) tau,
and interact for a transit time tau_p under the resonant interaction-picture
Jaynes-Cummings coupling lam (a^dag sigma_-^(k) + a sigma_+^(k)).  The
cavity mode is damped at rate gamma by the standard zero-temperature
Lindblad dissipator at all times.  Reference qubits (or any other
spectator factors) ride along untouched.

Integration is fixed-step fourth-order Runge-Kutta on the density matrix,
re-symmetrized after every step.  Because the cavity starts in its ground
state and the coupling conserves total excitation number, a Fock cutoff of
n_uses plus one guard level is exact; the guard level's population is
checked against 1e-10 on every run.

Windows with the coupling off evolve only under the dissipator, whose
slowest rate is gamma/2, so they are integrated with a step tied to the
damping time (idle_dt, default 0.005/gamma) rather than the much smaller
transit step dt.  Both steps halve together in convergence checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .qlinalg import SpaceLayout, kron_chain, partial_trace
from .states import DensityMatrix, Ensemble

OSC_LABEL = "O"

SIGMA_MINUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)  # |g><e|
SIGMA_PLUS = SIGMA_MINUS.conj().T
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)  # |g><g| - |e><e|

TRACE_CHECK = 1e-9
EIG_CHECK = 1e-10
GUARD_CHECK = 1e-10


class IntegrationError(RuntimeError):
    """An evolved state violated its invariants beyond tolerance."""


def lowering_op(dim: int) -> np.ndarray:
    """Oscillator annihilation operator truncated to ``dim`` Fock levels."""
    return np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)


def number_op(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim)).astype(complex)


@dataclass(frozen=True)
class ChannelSchedule:
    """Physical parameters and timing of a run of channel uses.

    lam      : qubit-oscillator coupling (Rabi frequency of |e,0> <-> |g,1>)
    tau_p    : transit time of one qubit through the cavity
    tau      : entry-to-entry separation of consecutive qubits (tau >= tau_p)
    gamma    : oscillator damping rate (tau_d = 1/gamma)
    n_uses   : number of qubits sent
    fock_cutoff : highest Fock level kept; oscillator dimension is cutoff+1.
        Defaults to n_uses + 1 so the top level is a guard that must stay
        empty.  Must be at least n_uses (total excitation never exceeds it).
    dt       : integrator step for transit windows;
        defaults to min(tau_p, 1/gamma, 1/lam)/1000 and must be <= tau_p/100
    idle_dt  : integrator step for damping-only windows; defaults to 0.005/gamma
    dephase_between_uses : if True, kill all oscillator Fock coherences after
        each use except the last
    """

    lam: float
    tau_p: float
    tau: float
    gamma: float
    n_uses: int = 2
    fock_cutoff: int | None = None
    dt: float | None = None
    idle_dt: float | None = None
    dephase_between_uses: bool = False

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("coupling lam must be positive")
        if self.tau_p <= 0:
            raise ValueError("transit time tau_p must be positive")
        if self.tau < self.tau_p:
            raise ValueError(
                f"tau={self.tau} < tau_p={self.tau_p}: qubits would overlap in the "
                "cavity (the low-rate regime requires tau >= tau_p)"
            )
        if self.gamma < 0:
            raise ValueError("damping rate gamma must be nonnegative")
        if self.n_uses < 1:
            raise ValueError("n_uses must be at least 1")
        if self.fock_cutoff is None:
            object.__setattr__(self, "fock_cutoff", self.n_uses + 1)
        if self.fock_cutoff < self.n_uses:
            raise ValueError(
                f"fock_cutoff={self.fock_cutoff} < n_uses={self.n_uses}: with the "
                "oscillator starting in |0> up to n_uses excitations can accumulate"
            )
        if self.dt is None:
            scale = min(self.tau_p, 1.0 / self.lam)
            if self.gamma > 0:
                scale = min(scale, 1.0 / self.gamma)
            object.__setattr__(self, "dt", scale / 1000.0)
        if not 0 < self.dt <= self.tau_p / 100.0:
            raise ValueError(f"dt={self.dt} must lie in (0, tau_p/100]")
        if self.idle_dt is None:
            object.__setattr__(
                self, "idle_dt", 0.005 / self.gamma if self.gamma > 0 else self.tau
            )
        if self.idle_dt <= 0:
            raise ValueError("idle_dt must be positive")

    @property
    def osc_dim(self) -> int:
        return self.fock_cutoff + 1

    @property
    def tau_d(self) -> float:
        return 1.0 / self.gamma if self.gamma > 0 else math.inf

    @property
    def memory_mu(self) -> float:
        """Memory parameter tau_d / (tau + tau_d); 0 is memoryless, 1 full memory."""
        if self.gamma == 0:
            return 1.0
        return 1.0 / (1.0 + self.gamma * self.tau)

    def qubit_labels(self) -> tuple[str, ...]:
        return tuple(f"Q{k + 1}" for k in range(self.n_uses))


def jc_hamiltonian(active_qubit: str, layout: SpaceLayout, lam: float) -> np.ndarray:
    """lam (a^dag sigma_- + a sigma_+) on (active_qubit, oscillator), identity elsewhere."""
    q_pos = layout.index(active_qubit)
    o_pos = layout.index(OSC_LABEL)
    if layout.dim_of(active_qubit) != 2:
        raise ValueError(f"active qubit {active_qubit!r} must have dimension 2")
    ops = []
    for i, (lbl, dim) in enumerate(layout.factors):
        if i == q_pos:
            ops.append(SIGMA_MINUS)
        elif i == o_pos:
            ops.append(lowering_op(dim).conj().T)
        else:
            ops.append(np.eye(dim, dtype=complex))
    term = kron_chain(ops)
    return lam * (term + term.conj().T)


def lindblad_rhs(
    rho: DensityMatrix, H: np.ndarray | None, gamma: float, layout: SpaceLayout | None = None
) -> np.ndarray:
    """Right-hand side -i[H, rho] + gamma (a rho a^dag - {a^dag a, rho}/2).

    Reference implementation built from the explicit jump operator; the
    integrator's optimized inner loop is tested against it.
    """
    layout = layout or rho.layout
    op = rho.op
    if H is not None:
        H = np.asarray(H)
        if H.shape != op.shape:
            raise ValueError(f"Hamiltonian shape {H.shape} does not match state {op.shape}")
    o_pos = layout.index(OSC_LABEL)
    a_full = kron_chain(
        [
            lowering_op(dim) if i == o_pos else np.eye(dim, dtype=complex)
            for i, (lbl, dim) in enumerate(layout.factors)
        ]
    )
    out = np.zeros_like(op)
    if H is not None:
        out += -1j * (H @ op - op @ H)
    if gamma:
        n_full = a_full.conj().T @ a_full
        out += gamma * (a_full @ op @ a_full.conj().T - 0.5 * (n_full @ op + op @ n_full))
    return out


class _WindowEngine:
    """Fixed-step RK4 for stacks of operators on a layout with the oscillator last.

    The dissipator is applied without forming the jump operator: with the
    oscillator as the trailing factor, a rho a^dag is a masked one-step
    diagonal shift of the matrix, and {a^dag a, rho} is an element-wise
    weight.  Transit windows then need two matrix products per evaluation
    (K rho + rho K^dag with K = -iH - gamma/2 a^dag a); idle windows need
    none.
    """

    def __init__(self, layout: SpaceLayout, gamma: float):
        if layout.factors[-1][0] != OSC_LABEL:
            raise ValueError("oscillator factor must be the last tensor factor")
        self.layout = layout
        self.gamma = gamma
        self.d = layout.dim
        self.f = layout.factors[-1][1]
        n_full = np.tile(np.arange(self.f, dtype=float), self.d // self.f)
        self._n_full = n_full
        self._decay = -(gamma / 2.0) * (n_full[:, None] + n_full[None, :])
        s = np.concatenate([np.sqrt(np.arange(1.0, self.f)), [0.0]])
        s_full = np.tile(s, self.d // self.f)
        self._jump = gamma * (s_full[:, None] * s_full[None, :])

    def drift(self, H: np.ndarray | None) -> np.ndarray | None:
        if H is None:
            return None
        return -1j * H - (self.gamma / 2.0) * np.diag(self._n_full)

    def _rhs(self, x, K, KH, out, buf):
        buf.fill(0.0)
        buf[..., :-1, :-1] = x[..., 1:, 1:]
        buf *= self._jump  # gamma * a x a^dag, boundary rows masked to zero
        if K is None:
            np.multiply(self._decay, x, out=out)
            out += buf
        else:
            np.matmul(x, KH, out=out)
            out += buf
            np.matmul(K, x, out=buf)
            out += buf
        return out

    def _step(self, x, h, K, KH, bufs):
        k1, k2, k3, k4, tmp, buf = bufs
        self._rhs(x, K, KH, k1, buf)
        np.multiply(k1, 0.5 * h, out=tmp)
        tmp += x
        self._rhs(tmp, K, KH, k2, buf)
        np.multiply(k2, 0.5 * h, out=tmp)
        tmp += x
        self._rhs(tmp, K, KH, k3, buf)
        np.multiply(k3, h, out=tmp)
        tmp += x
        self._rhs(tmp, K, KH, k4, buf)
        np.add(k2, k3, out=k2)
        np.add(k1, k4, out=k1)
        k1 += 2.0 * k2
        np.multiply(k1, h / 6.0, out=tmp)
        x += tmp
        # re-symmetrize to suppress hermiticity drift
        np.conjugate(x.swapaxes(-1, -2), out=tmp)
        x += tmp
        x *= 0.5
        return x

    def evolve(self, stack: np.ndarray, H: np.ndarray | None, duration: float, dt: float) -> np.ndarray:
        if duration < 0:
            raise ValueError("duration must be nonnegative")
        if duration == 0 or (H is None and self.gamma == 0):
            return stack
        K = self.drift(H)
        KH = K.conj().T if K is not None else None
        bufs = tuple(np.empty_like(stack) for _ in range(6))
        n_steps = int(math.floor(duration / dt + 1e-9))
        remainder = max(duration - n_steps * dt, 0.0)
        x = stack.copy()
        for _ in range(n_steps):
            x = self._step(x, dt, K, KH, bufs)
        if remainder > 1e-9 * dt:  # shortened final step lands on duration
            x = self._step(x, remainder, K, KH, bufs)
        return x


def _with_oscillator(rho: DensityMatrix, osc_dim: int) -> tuple[np.ndarray, SpaceLayout]:
    if OSC_LABEL in rho.layout.labels:
        raise ValueError("input state already contains an oscillator factor")
    ground = np.zeros((osc_dim, osc_dim), dtype=complex)
    ground[0, 0] = 1.0
    return np.kron(rho.op, ground), rho.layout.extended(OSC_LABEL, osc_dim)


def _guard_population(op: np.ndarray, f: int) -> float:
    diag = np.real(np.diagonal(op, axis1=-2, axis2=-1))
    return float(diag[..., f - 1 :: f].sum(axis=-1).max())


def _check_states(stack: np.ndarray, layout: SpaceLayout, schedule: ChannelSchedule, where: str):
    tr_dev = np.abs(np.trace(stack, axis1=-2, axis2=-1) - 1.0).max()
    if tr_dev > TRACE_CHECK:
        raise IntegrationError(
            f"trace deviates by {tr_dev:.3e} {where} (step too large?)"
        )
    min_eig = np.linalg.eigvalsh(stack).min()
    if min_eig < -EIG_CHECK:
        raise IntegrationError(
            f"negative eigenvalue {min_eig:.3e} {where} (step too large?)"
        )
    if schedule.fock_cutoff > schedule.n_uses:
        guard = _guard_population(stack, layout.factors[-1][1])
        if guard > GUARD_CHECK:
            raise IntegrationError(
                f"guard Fock level holds population {guard:.3e} {where} "
                "(Fock cutoff too small)"
            )


def _dephase_stack(stack: np.ndarray, f: int) -> np.ndarray:
    stack = np.ascontiguousarray(stack)
    q = stack.shape[-1] // f
    view = stack.reshape(stack.shape[:-2] + (q, f, q, f))
    view *= np.eye(f)[None, :, None, :]
    return stack


def _run_stack(
    stack: np.ndarray,
    layout: SpaceLayout,
    schedule: ChannelSchedule,
    extra_idle_windows: int,
    check: bool,
) -> np.ndarray:
    engine = _WindowEngine(layout, schedule.gamma)
    idle = schedule.tau - schedule.tau_p
    for k in range(schedule.n_uses):
        H = jc_hamiltonian(f"Q{k + 1}", layout, schedule.lam)
        stack = engine.evolve(stack, H, schedule.tau_p, schedule.dt)
        stack = engine.evolve(stack, None, idle, schedule.idle_dt)
        if schedule.dephase_between_uses and k < schedule.n_uses - 1:
            stack = _dephase_stack(stack, engine.f)
        if check:
            _check_states(stack, layout, schedule, f"after use {k + 1}")
    for j in range(extra_idle_windows):
        stack = engine.evolve(stack, None, schedule.tau, schedule.idle_dt)
        if check:
            _check_states(stack, layout, schedule, f"after idle window {j + 1}")
    return stack


def run_schedule(
    rho_in: DensityMatrix, schedule: ChannelSchedule, extra_idle_windows: int = 0
) -> DensityMatrix:
    """Send the qubits of ``rho_in`` through the cavity on the given schedule.

    The input layout must contain the system qubits Q1..Qn (n = n_uses);
    any other factors (references) are spectators.  The oscillator starts
    in its ground state and is appended as the last factor of the output.
    Each use is a transit window of length tau_p followed by a damping-only
    window of length tau - tau_p; ``extra_idle_windows`` appends further
    damping-only windows of length tau each.

    Raises IntegrationError if any evolved state drifts beyond the trace,
    positivity, or guard-level tolerances.
    """
    for lbl in schedule.qubit_labels():
        if rho_in.layout.dim_of(lbl) != 2:
            raise ValueError(f"system qubit {lbl!r} must have dimension 2")
    op, layout = _with_oscillator(rho_in, schedule.osc_dim)
    stack = _run_stack(op[None], layout, schedule, extra_idle_windows, check=True)
    return DensityMatrix.trusted(stack[0], layout)


def run_ensemble(
    ensemble: Ensemble,
    schedule: ChannelSchedule,
    extra_idle_windows: int = 0,
    keep_oscillator: bool = False,
) -> Ensemble:
    """Evolve every ensemble member through the schedule (batched).

    Member weights are unchanged.  The oscillator is traced out of the
    outputs unless ``keep_oscillator`` is set.
    """
    ops_layouts = [_with_oscillator(dm, schedule.osc_dim) for _, dm in ensemble.members]
    layout = ops_layouts[0][1]
    stack = np.stack([op for op, _ in ops_layouts])
    stack = _run_stack(stack, layout, schedule, extra_idle_windows, check=True)
    out_members = []
    for (w, _), op in zip(ensemble.members, stack):
        dm = DensityMatrix.trusted(op, layout)
        if not keep_oscillator:
            dm = dm.ptrace([lbl for lbl in layout.labels if lbl != OSC_LABEL])
        out_members.append((w, dm))
    return Ensemble(tuple(out_members))


def evolve_window(
    rho: DensityMatrix, schedule: ChannelSchedule, H: np.ndarray | None, duration: float
) -> DensityMatrix:
    """Integrate one window of duration ``duration`` with step ``schedule.dt``.

    ``H`` is the (full-space) Hamiltonian for the window, or None for a
    damping-only window.  The final partial step is shortened to land
    exactly on ``duration``.  Fails with diagnostics if the output violates
    density-matrix invariants beyond 1e-8.
    """
    if OSC_LABEL not in rho.layout.labels:
        raise ValueError("evolve_window expects a state that includes the oscillator")
    engine = _WindowEngine(rho.layout, schedule.gamma)
    out = engine.evolve(rho.op[None], H, duration, schedule.dt)[0]
    tr_dev = abs(out.trace() - 1.0)
    min_eig = np.linalg.eigvalsh(out).min()
    if tr_dev > 1e-8 or min_eig < -1e-8:
        raise IntegrationError(
            f"window output invalid: |tr-1|={tr_dev:.3e}, min eig={min_eig:.3e} "
            "(step too large or Fock cutoff too small)"
        )
    return DensityMatrix.trusted(out, rho.layout)


def dephase_oscillator(rho: DensityMatrix) -> DensityMatrix:
    """Zero every matrix element off-diagonal in the oscillator Fock index."""
    layout = rho.layout
    pos = layout.index(OSC_LABEL)
    dims = layout.dims
    n = len(dims)
    f = dims[pos]
    mask_shape = [1] * (2 * n)
    mask_shape[pos] = f
    mask_shape[n + pos] = f
    mask = np.eye(f).reshape(mask_shape)
    out = (rho.op.reshape(dims + dims) * mask).reshape(rho.op.shape)
    return DensityMatrix.trusted(out, layout)


def pi0_reset(rho: DensityMatrix) -> DensityMatrix:
    """Discard qubit-oscillator correlations and reset the oscillator to |0>.

    Returns Tr_O[rho] (x) |0><0| with the oscillator as the last factor.
    """
    layout = rho.layout
    f = layout.dim_of(OSC_LABEL)
    keep = [lbl for lbl in layout.labels if lbl != OSC_LABEL]
    reduced = partial_trace(rho.op, layout, keep)
    ground = np.zeros((f, f), dtype=complex)
    ground[0, 0] = 1.0
    out_layout = layout.restricted_to(keep).extended(OSC_LABEL, f)
    return DensityMatrix.trusted(np.kron(reduced, ground), out_layout)


def _hermitian_basis(d: int) -> tuple[np.ndarray, list[tuple[int, int, str]]]:
    """Hermitian operator basis of the d x d matrices, with unit tags."""
    ops, tags = [], []
    for i in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[i, i] = 1.0
        ops.append(e)
        tags.append((i, i, "p"))
    for i in range(d):
        for j in range(i + 1, d):
            x = np.zeros((d, d), dtype=complex)
            x[i, j] = x[j, i] = 1.0
            ops.append(x)
            tags.append((i, j, "x"))
            y = np.zeros((d, d), dtype=complex)
            y[i, j] = -1j
            y[j, i] = 1j
            ops.append(y)
            tags.append((i, j, "y"))
    return np.stack(ops), tags


def channel_superoperator(
    schedule: ChannelSchedule, keep_oscillator: bool = False
) -> np.ndarray:
    """Process map of the full n_uses run on the system qubits.

    Returns S with shape (d_out, d_out, d_in, d_in) where d_in = 2**n_uses,
    such that the channel output of ``rho`` is
    ``einsum('abij,ij->ab', S, rho)``.  Obtained by evolving a Hermitian
    operator basis of the input space through the schedule (the evolution
    is linear, so this is plain process tomography).  With
    ``keep_oscillator`` the output space includes the oscillator factor.
    """
    d_in = 2**schedule.n_uses
    basis, tags = _hermitian_basis(d_in)
    qubit_layout = SpaceLayout([(lbl, 2) for lbl in schedule.qubit_labels()])
    layout = qubit_layout.extended(OSC_LABEL, schedule.osc_dim)
    ground = np.zeros((schedule.osc_dim, schedule.osc_dim), dtype=complex)
    ground[0, 0] = 1.0
    stack = np.stack([np.kron(b, ground) for b in basis])
    stack = _run_stack(stack, layout, schedule, 0, check=False)
    if not keep_oscillator:
        keep = list(qubit_layout.labels)
        stack = np.stack([partial_trace(op, layout, keep) for op in stack])
    d_out = stack.shape[-1]
    S = np.zeros((d_out, d_out, d_in, d_in), dtype=complex)
    outs = {tag: op for tag, op in zip(tags, stack)}
    for i in range(d_in):
        S[:, :, i, i] = outs[(i, i, "p")]
        for j in range(i + 1, d_in):
            ex = outs[(i, j, "x")]
            ey = outs[(i, j, "y")]
            S[:, :, i, j] = 0.5 * (ex + 1j * ey)
            S[:, :, j, i] = 0.5 * (ex - 1j * ey)
    return S


def apply_channel_map(
    S: np.ndarray, rho: DensityMatrix, acted_labels: Sequence[str]
) -> DensityMatrix:
    """Apply a process map to the named factors of ``rho``, identity elsewhere.

    ``acted_labels`` must list the factors in the order the map was built
    over (Q1, Q2, ...).  The map must preserve the acted dimension, so
    reference factors keep their positions and the output layout equals the
    input layout.
    """
    layout = rho.layout
    dims = layout.dims
    n = len(dims)
    positions = [layout.index(lbl) for lbl in acted_labels]
    acted_dims = [dims[p] for p in positions]
    d_act = int(np.prod(acted_dims))
    if S.shape != (d_act, d_act, d_act, d_act):
        raise ValueError(f"map shape {S.shape} incompatible with acted dims {acted_dims}")
    m = len(positions)
    S_t = S.reshape(tuple(acted_dims) * 4)
    rho_t = rho.op.reshape(dims + dims)
    rho_sub = list(range(2 * n))
    s_sub = (
        [2 * n + k for k in range(m)]
        + [2 * n + m + k for k in range(m)]
        + [positions[k] for k in range(m)]
        + [n + positions[k] for k in range(m)]
    )
    out_sub = list(range(2 * n))
    for k, p in enumerate(positions):
        out_sub[p] = 2 * n + k
        out_sub[n + p] = 2 * n + m + k
    out = np.einsum(rho_t, rho_sub, S_t, s_sub, out_sub)
    d = layout.dim
    return DensityMatrix.trusted(np.ascontiguousarray(out.reshape(d, d)), layout)


def apply_channel_to_ensemble(S: np.ndarray, ensemble: Ensemble) -> Ensemble:
    """Push every ensemble member through a process map with no spectators."""
    if S.shape[0] != S.shape[2] or S.shape[2] != ensemble.layout.dim:
        raise ValueError("process map must be square over the ensemble's space")
    members = []
    for w, dm in ensemble.members:
        out = np.einsum("abij,ij->ab", S, dm.op)
        members.append((w, DensityMatrix.trusted(np.ascontiguousarray(out), dm.layout)))
    return Ensemble(tuple(members))
