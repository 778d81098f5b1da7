"""Simulator and analysis library for a damped-cavity quantum memory channel.

A train of qubits crosses a leaky cavity one at a time under a resonant
Jaynes-Cummings coupling; because the cavity keeps (and slowly loses) a
record of earlier qubits, consecutive channel uses are correlated.  The
package integrates the exact two-use dynamics, evaluates coherent and
Holevo information against the memoryless amplitude-damping baselines, and
verifies the forgetfulness bound that makes capacity statements meaningful
for this channel.
"""

from .admap import (
    AmplitudeDampingChannel,
    analytic_single_use,
    apply_ad_channel,
    binary_entropy,
    coherent_info_diagonal,
    eta_gamma,
    eta_weak_damping,
    holevo_info_binary,
    memoryless_C1,
    memoryless_Q,
    transit_amplitude,
)
from .dynamics import (
    ChannelSchedule,
    IntegrationError,
    apply_channel_map,
    apply_channel_to_ensemble,
    channel_superoperator,
    dephase_oscillator,
    evolve_window,
    jc_hamiltonian,
    lindblad_rhs,
    lowering_op,
    number_op,
    pi0_reset,
    run_ensemble,
    run_schedule,
)
from .experiments import (
    BlockingBoundRecord,
    DephasingPair,
    ForgetfulnessRecord,
    SweepRecord,
    ThetaRecord,
    argmax_theta,
    blocking_bound_check,
    coherent_sweep,
    default_tau_grid,
    dephasing_comparison,
    forgetfulness_check,
    holevo_sweep,
    optimize_input,
    theta_sweep,
)
from .infomeasures import (
    CoherentInfo,
    HolevoInfo,
    TwoUseReport,
    coherent_information,
    holevo_information,
    holevo_via_enlarged,
    mutual_information,
    per_use_holevo,
    per_use_reduction,
    von_neumann_entropy,
)
from .qlinalg import (
    SpaceLayout,
    eigvals_hermitian,
    kron,
    partial_trace,
    trace_norm_distance,
)
from .states import (
    DensityMatrix,
    Ensemble,
    codeword_kets,
    diagonal_product_input,
    holevo_separable_ensemble,
    purified_qubit_train,
    purify,
    single_qubit_input,
    theta_ensemble,
)

__version__ = "0.1.0"
