"""Entropic quantities of channel outputs.

All entropies are in bits.  Joint channel outputs follow the package's
label convention: factors named "R*" are references that purify the input,
factors named "Q*" are the transmitted qubits, and the oscillator "O" is
expected to have been traced out before any quantity here is computed.

Coherent information of a joint reference/output state is
S(output marginal) - S(joint); the joint entropy is the entropy exchange.
Holevo information of an output ensemble is S(average) - average of S.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .qlinalg import SpaceLayout, eigvals_hermitian
from .states import DensityMatrix, Ensemble

CLIP_NEGATIVE = 1e-12  # eigenvalues in [-CLIP_NEGATIVE, 0) are rounding noise
FLOOR = 1e-15


def _clipped_spectrum(op: np.ndarray) -> np.ndarray:
    vals = eigvals_hermitian(op)
    if vals[0] < -CLIP_NEGATIVE:
        raise ValueError(
            f"eigenvalue {vals[0]:.3e} below -{CLIP_NEGATIVE}; this signals integrator "
            "failure rather than rounding noise"
        )
    return np.clip(vals, 0.0, 1.0)


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """S(rho) = -sum_i lambda_i log2 lambda_i over the clipped spectrum."""
    vals = _clipped_spectrum(rho.op)
    vals = vals[vals > FLOOR]
    return float(-(vals * np.log2(vals)).sum())


class CoherentInfo(NamedTuple):
    ic: float
    s_out: float
    s_exchange: float


def _split_reference_labels(layout: SpaceLayout) -> tuple[list[str], list[str]]:
    refs = [lbl for lbl in layout.labels if lbl.startswith("R")]
    outs = [lbl for lbl in layout.labels if lbl.startswith("Q")]
    if not refs or not outs:
        raise ValueError(f"layout {layout.labels} does not split into R*/Q* factors")
    if len(refs) + len(outs) != len(layout.labels):
        raise ValueError(f"layout {layout.labels} has factors outside the R*/Q* convention")
    return refs, outs


def coherent_information(joint_out: DensityMatrix) -> CoherentInfo:
    """Ic = S(Q') - S(R'Q') for a joint reference/output state.

    The input must be the channel output of a purified input, with the
    oscillator already traced out.  The joint entropy is the entropy
    exchange; Ic may be negative for very noisy channels.
    """
    refs, outs = _split_reference_labels(joint_out.layout)
    s_exchange = von_neumann_entropy(joint_out)
    s_out = von_neumann_entropy(joint_out.ptrace(outs))
    return CoherentInfo(s_out - s_exchange, s_out, s_exchange)


class HolevoInfo(NamedTuple):
    chi: float
    s_out: float
    avg_s_out: float


def holevo_information(outputs: Ensemble) -> HolevoInfo:
    """chi = S(sum_k xi_k sigma_k') - sum_k xi_k S(sigma_k')."""
    s_out = von_neumann_entropy(outputs.average_state())
    avg = sum(w * von_neumann_entropy(dm) for w, dm in outputs.members)
    return HolevoInfo(s_out - avg, s_out, float(avg))


def per_use_reduction(joint_out: DensityMatrix, use_index: int) -> CoherentInfo:
    """Single-use quantities of use ``use_index``, tracing out the other use.

    Keeps (R_i, Q_i) of a two-use joint output and computes the coherent
    information, output entropy, and entropy exchange on what remains.
    Because the input purifies each qubit separately, use 1 of the
    reduction coincides with a stand-alone single use of the channel.
    """
    if use_index not in (1, 2):
        raise ValueError("use_index must be 1 or 2")
    keep = [f"R{use_index}", f"Q{use_index}"]
    return coherent_information(joint_out.ptrace(keep))


def per_use_holevo(outputs: Ensemble, use_index: int) -> HolevoInfo:
    """Holevo quantities of one use: every output traced to Q_i first."""
    keep = [f"Q{use_index}"]
    reduced = Ensemble(tuple((w, dm.ptrace(keep)) for w, dm in outputs.members))
    return holevo_information(reduced)


def mutual_information(
    joint: DensityMatrix, labels_a: Sequence[str], labels_b: Sequence[str]
) -> float:
    """Quantum mutual information S(A) + S(B) - S(AB) of a bipartition."""
    labels_a, labels_b = list(labels_a), list(labels_b)
    if set(labels_a) & set(labels_b):
        raise ValueError("partition blocks overlap")
    if set(labels_a) | set(labels_b) != set(joint.layout.labels):
        raise ValueError("partition does not cover the layout")
    s_a = von_neumann_entropy(joint.ptrace(labels_a))
    s_b = von_neumann_entropy(joint.ptrace(labels_b))
    return s_a + s_b - von_neumann_entropy(joint)


def holevo_via_enlarged(outputs: Ensemble) -> float:
    """chi recomputed as the mutual information of a classical flag with Q'.

    Builds rho_AQ' = sum_k xi_k |k><k| (x) sigma_k' explicitly and returns
    S(A:Q'); must agree with :func:`holevo_information` to rounding.
    """
    k = len(outputs.members)
    d = outputs.layout.dim
    big = np.zeros((k * d, k * d), dtype=complex)
    for i, (w, dm) in enumerate(outputs.members):
        big[i * d : (i + 1) * d, i * d : (i + 1) * d] = w * dm.op
    layout = SpaceLayout([("Aflag", k)] + list(outputs.layout.factors))
    joint = DensityMatrix.trusted(big, layout)
    return mutual_information(joint, ["Aflag"], list(outputs.layout.labels))


@dataclass(frozen=True)
class TwoUseReport:
    """Entropic summary of one two-use run at a single grid point.

    Coherent runs fill the ic/se/s_out family; Holevo runs fill the
    chi/avg_s_out family and reuse s_out* for the average-state output
    entropies.  corr_rq is the inter-use correlation measure
    Se_1 + Se_2 - Se (zero in the memoryless limit).
    """

    tau: float
    ic: float | None = None
    s_exchange: float | None = None
    s_out: float | None = None
    ic_1: float | None = None
    ic_2: float | None = None
    se_1: float | None = None
    se_2: float | None = None
    s_out_1: float | None = None
    s_out_2: float | None = None
    corr_rq: float | None = None
    chi: float | None = None
    chi_1: float | None = None
    chi_2: float | None = None
    avg_s_out: float | None = None
    avg_s_out_1: float | None = None
    avg_s_out_2: float | None = None

    def __post_init__(self):
        for name in ("s_exchange", "s_out", "se_1", "se_2", "s_out_1", "s_out_2",
                     "avg_s_out", "avg_s_out_1", "avg_s_out_2"):
            val = getattr(self, name)
            if val is not None and val < -1e-9:
                raise ValueError(f"entropy {name}={val} is negative beyond tolerance")
        if self.corr_rq is not None and self.corr_rq < -1e-9:
            raise ValueError(f"corr_rq={self.corr_rq} violates subadditivity beyond tolerance")
