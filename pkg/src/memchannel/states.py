"""Density matrices, purifications, and the channel input ensembles.

Label conventions used throughout the package: system qubits are "Q1",
"Q2", ...; the reference qubit purifying "Qk" is "Rk"; the oscillator
factor appended by the dynamics is "O".  The entropy routines rely on the
R/Q prefixes to split a joint output into reference and system parts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qlinalg import SpaceLayout, eigvals_hermitian, kron, partial_trace

TRACE_TOL = 1e-10
PSD_TOL = 1e-10

KET_G = np.array([1.0, 0.0], dtype=complex)
KET_E = np.array([0.0, 1.0], dtype=complex)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite operator with a layout."""

    op: np.ndarray
    layout: SpaceLayout

    def __post_init__(self):
        op = np.ascontiguousarray(np.asarray(self.op, dtype=complex))
        object.__setattr__(self, "op", op)
        d = self.layout.dim
        if op.shape != (d, d):
            raise ValueError(f"operator shape {op.shape} does not match layout dim {d}")
        herm_dev = np.abs(op - op.conj().T).max()
        if herm_dev > TRACE_TOL:
            raise ValueError(f"not Hermitian: max|rho - rho^dag| = {herm_dev:.3e}")
        tr_dev = abs(op.trace() - 1.0)
        if tr_dev > TRACE_TOL:
            raise ValueError(f"trace deviates from 1 by {tr_dev:.3e}")
        min_eig = eigvals_hermitian(op)[0]
        if min_eig < -PSD_TOL:
            raise ValueError(f"not positive semidefinite: min eigenvalue {min_eig:.3e}")

    @classmethod
    def trusted(cls, op: np.ndarray, layout: SpaceLayout) -> "DensityMatrix":
        """Wrap an operator the caller has already validated (skips checks)."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "op", np.ascontiguousarray(np.asarray(op, dtype=complex)))
        object.__setattr__(obj, "layout", layout)
        return obj

    @property
    def dim(self) -> int:
        return self.layout.dim

    def ptrace(self, keep) -> "DensityMatrix":
        """Reduced state on the kept factors."""
        out = partial_trace(self.op, self.layout, keep)
        return DensityMatrix.trusted(out, self.layout.restricted_to(keep))


@dataclass(frozen=True)
class Ensemble:
    """Classical-quantum source: weighted density matrices on one layout."""

    members: tuple[tuple[float, DensityMatrix], ...]

    def __post_init__(self):
        members = tuple((float(w), dm) for w, dm in self.members)
        object.__setattr__(self, "members", members)
        if not members:
            raise ValueError("ensemble has no members")
        weights = np.array([w for w, _ in members])
        if (weights < 0).any():
            raise ValueError("ensemble probabilities must be nonnegative")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError(f"ensemble probabilities sum to {weights.sum()!r}, not 1")
        layouts = {dm.layout for _, dm in members}
        if len(layouts) != 1:
            raise ValueError("all ensemble members must share one layout")

    @property
    def layout(self) -> SpaceLayout:
        return self.members[0][1].layout

    def average_state(self) -> DensityMatrix:
        avg = sum(w * dm.op for w, dm in self.members)
        return DensityMatrix(avg, self.layout)


def single_qubit_input(p: float, r: complex, label: str = "Q1") -> DensityMatrix:
    """Generic qubit state [[1-p, r], [r*, p]] in the {|g>, |e>} basis.

    Positivity requires |r| <= sqrt(p(1-p)).
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"excited population p={p} outside [0, 1]")
    r = complex(r)
    r_max = np.sqrt(p * (1.0 - p))
    if abs(r) > r_max + 1e-12:
        raise ValueError(f"|r|={abs(r):.6g} exceeds sqrt(p(1-p))={r_max:.6g}; state not positive")
    op = np.array([[1.0 - p, r], [np.conj(r), p]], dtype=complex)
    return DensityMatrix(op, SpaceLayout([(label, 2)]))


def _purification_ket(rho: DensityMatrix) -> np.ndarray:
    """Ket on (reference, system) with the reference in descending eigenvalue order."""
    vals, vecs = np.linalg.eigh(rho.op)
    order = np.argsort(vals)[::-1]
    vals, vecs = vals[order], vecs[:, order]
    vals = np.clip(vals, 0.0, None)
    d = rho.dim
    ket = np.zeros(d * d, dtype=complex)
    for i in range(d):
        ref = np.zeros(d, dtype=complex)
        ref[i] = 1.0
        ket += np.sqrt(vals[i]) * np.kron(ref, vecs[:, i])
    return ket


def purify(rho: DensityMatrix, ref_label: str = "R") -> DensityMatrix:
    """Pure state on reference x system whose system marginal is ``rho``.

    The reference factor (same dimension as the input) is prepended to the
    layout.  Entropic quantities downstream do not depend on which
    purification is chosen; this one pairs reference basis states with
    eigenvectors in descending eigenvalue order.
    """
    ket = _purification_ket(rho)
    layout = SpaceLayout([(ref_label, rho.dim)] + list(rho.layout.factors))
    return DensityMatrix(np.outer(ket, ket.conj()), layout)


def diagonal_product_input(p: float, n: int) -> DensityMatrix:
    """n-fold product of the diagonal qubit state (1-p)|g><g| + p|e><e|."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"excited population p={p} outside [0, 1]")
    if n < 1:
        raise ValueError("need at least one qubit")
    single = np.array([[1.0 - p, 0.0], [0.0, p]], dtype=complex)
    op = np.array([[1.0 + 0j]])
    for _ in range(n):
        op = kron(op, single)
    layout = SpaceLayout([(f"Q{k + 1}", 2) for k in range(n)])
    return DensityMatrix(op, layout)


def purified_qubit_train(p: float, r: complex, n: int) -> DensityMatrix:
    """Pure input for n channel uses, one reference qubit per system qubit.

    Each qubit [[1-p, r], [r*, p]] is purified separately so the joint
    layout reads R1, Q1, R2, Q2, ...; tracing a (Rk, Qk) pair leaves the
    other uses' purifications intact, which is what the per-use entropy
    decompositions assume.
    """
    single = single_qubit_input(p, r, label="Q1")
    ket1 = _purification_ket(single)
    ket = np.array([1.0 + 0j])
    factors = []
    for k in range(n):
        ket = np.kron(ket, ket1)
        factors += [(f"R{k + 1}", 2), (f"Q{k + 1}", 2)]
    return DensityMatrix(np.outer(ket, ket.conj()), SpaceLayout(factors))


def codeword_kets(p_tilde: float) -> tuple[np.ndarray, np.ndarray]:
    """The pair |psi_0>, |psi_1> = sqrt(1-p)|g> +/- sqrt(p)|e>."""
    if not 0.0 <= p_tilde <= 1.0:
        raise ValueError(f"codeword parameter p_tilde={p_tilde} outside [0, 1]")
    a, b = np.sqrt(1.0 - p_tilde), np.sqrt(p_tilde)
    return a * KET_G + b * KET_E, a * KET_G - b * KET_E


def _two_qubit_pure(ket: np.ndarray) -> DensityMatrix:
    layout = SpaceLayout([("Q1", 2), ("Q2", 2)])
    return DensityMatrix(np.outer(ket, ket.conj()), layout)


def holevo_separable_ensemble(p_tilde: float) -> Ensemble:
    """Four equiprobable products of |psi_0>, |psi_1> over two uses.

    In the memoryless limit this ensemble is the optimal product encoding
    for classical transmission through the amplitude-damping channel.
    """
    psi0, psi1 = codeword_kets(p_tilde)
    kets = [np.kron(x, y) for x in (psi0, psi1) for y in (psi0, psi1)]
    return Ensemble(tuple((0.25, _two_qubit_pure(k)) for k in kets))


def theta_ensemble(theta: float, p_tilde: float) -> Ensemble:
    """One-parameter family interpolating from separable to entangled codewords.

    The four states are normalized combinations
        cos(theta) |psi_0 psi_1> + sin(theta) |psi_1 psi_0>
        sin(theta) |psi_0 psi_1> - cos(theta) |psi_1 psi_0>
        cos(theta) |psi_0 psi_0> + sin(theta) |psi_1 psi_1>
        sin(theta) |psi_0 psi_0> - cos(theta) |psi_1 psi_1>
    with equal probabilities.  At theta = l*pi/2 this permutes the
    separable ensemble; at p_tilde = 1/2, theta = pi/4 + m*pi/2 the states
    are maximally entangled.
    """
    psi0, psi1 = codeword_kets(p_tilde)
    c, s = np.cos(theta), np.sin(theta)
    raw = [
        c * np.kron(psi0, psi1) + s * np.kron(psi1, psi0),
        s * np.kron(psi0, psi1) - c * np.kron(psi1, psi0),
        c * np.kron(psi0, psi0) + s * np.kron(psi1, psi1),
        s * np.kron(psi0, psi0) - c * np.kron(psi1, psi1),
    ]
    kets = []
    for i, k in enumerate(raw):
        norm = np.linalg.norm(k)
        if norm < 1e-6:
            raise ValueError(
                f"codeword {i} has vanishing norm at theta={theta}, p_tilde={p_tilde}; "
                "the two base kets are (anti)parallel there"
            )
        kets.append(k / norm)  # normalization constants chosen real positive
    return Ensemble(tuple((0.25, _two_qubit_pure(k)) for k in kets))
