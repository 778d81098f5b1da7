"""Dense complex linear algebra on labeled tensor-product spaces.

Operators are plain ``numpy.ndarray`` of shape ``(d, d)`` and dtype
complex128.  A :class:`SpaceLayout` records how the flat index of such an
operator factorizes into labeled subsystems, which is all the bookkeeping
needed for partial traces over arbitrary factors.

Dimensions in this project never exceed 64 (two reference qubits, two
system qubits, a four-level oscillator), so everything is dense and
delegates to LAPACK via numpy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

HERMITICITY_TOL = 1e-10


@dataclass(frozen=True)
class SpaceLayout:
    """Ordered list of labeled tensor factors of a Hilbert space."""

    factors: tuple[tuple[str, int], ...]

    def __init__(self, factors: Iterable[tuple[str, int]]):
        factors = tuple((str(lbl), int(dim)) for lbl, dim in factors)
        labels = [lbl for lbl, _ in factors]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate factor labels in layout: {labels}")
        for lbl, dim in factors:
            if dim < 1:
                raise ValueError(f"factor {lbl!r} has non-positive dimension {dim}")
        object.__setattr__(self, "factors", factors)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lbl for lbl, _ in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self.factors)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims)) if self.factors else 1

    def index(self, label: str) -> int:
        for i, (lbl, _) in enumerate(self.factors):
            if lbl == label:
                return i
        raise ValueError(f"unknown factor label {label!r}; layout has {self.labels}")

    def dim_of(self, label: str) -> int:
        return self.factors[self.index(label)][1]

    def restricted_to(self, keep: Iterable[str]) -> "SpaceLayout":
        """Sub-layout of the kept labels, preserving factor order."""
        keep = set(keep)
        for lbl in keep:
            self.index(lbl)
        return SpaceLayout([f for f in self.factors if f[0] in keep])

    def extended(self, label: str, dim: int) -> "SpaceLayout":
        return SpaceLayout(self.factors + ((label, dim),))


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product of two operators."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def kron_chain(ops: Sequence[np.ndarray]) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def dagger(op: np.ndarray) -> np.ndarray:
    return op.conj().T


def partial_trace(op: np.ndarray, layout: SpaceLayout, keep: Iterable[str]) -> np.ndarray:
    """Trace out every factor of ``layout`` that is not listed in ``keep``.

    The kept factors retain their relative order.  Trace and hermiticity
    are preserved by construction.
    """
    keep = set(keep)
    for lbl in keep:
        layout.index(lbl)  # raises on unknown label, naming it
    dims = layout.dims
    n = len(dims)
    op = np.asarray(op)
    if op.shape != (layout.dim, layout.dim):
        raise ValueError(f"operator shape {op.shape} does not match layout dim {layout.dim}")
    tensor = op.reshape(dims + dims)
    keep_pos = [i for i, (lbl, _) in enumerate(layout.factors) if lbl in keep]
    # einsum with integer subscripts: traced factors share the row/col index
    row_sub = list(range(n))
    col_sub = [i if i not in keep_pos else n + i for i in range(n)]
    out_sub = [i for i in keep_pos] + [n + i for i in keep_pos]
    out = np.einsum(tensor, row_sub + col_sub, out_sub)
    d_keep = int(np.prod([dims[i] for i in keep_pos])) if keep_pos else 1
    return np.ascontiguousarray(out.reshape(d_keep, d_keep))


def eigvals_hermitian(op: np.ndarray) -> np.ndarray:
    """Eigenvalues of a Hermitian operator, ascending.

    Rejects inputs whose anti-Hermitian part exceeds ``HERMITICITY_TOL``.
    """
    op = np.asarray(op)
    dev = np.abs(op - op.conj().T).max()
    if dev > HERMITICITY_TOL:
        raise ValueError(f"operator is not Hermitian: max|A - A^dag| = {dev:.3e}")
    return np.linalg.eigvalsh(op)


def trace_norm_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Trace norm ||a - b||_1, the sum of singular values of the difference."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.svd(a - b, compute_uv=False).sum())
