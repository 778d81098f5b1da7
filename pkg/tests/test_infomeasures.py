import numpy as np
import pytest

from memchannel.admap import (
    AmplitudeDampingChannel,
    apply_ad_channel,
    binary_entropy,
    coherent_info_diagonal,
    eta_gamma,
    holevo_info_binary,
)
from memchannel.dynamics import ChannelSchedule, run_schedule
from memchannel.infomeasures import (
    coherent_information,
    holevo_information,
    holevo_via_enlarged,
    mutual_information,
    per_use_reduction,
    von_neumann_entropy,
)
from memchannel.qlinalg import SpaceLayout, kron
from memchannel.states import (
    DensityMatrix,
    Ensemble,
    codeword_kets,
    purified_qubit_train,
    purify,
    single_qubit_input,
)


def random_state(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def bell_pair(labels=("R1", "Q1")):
    ket = np.zeros(4, dtype=complex)
    ket[0] = ket[3] = 1 / np.sqrt(2)
    return DensityMatrix(np.outer(ket, ket), SpaceLayout([(labels[0], 2), (labels[1], 2)]))


def test_entropy_pure_and_mixed():
    lay = SpaceLayout([("Q1", 2)])
    assert von_neumann_entropy(DensityMatrix(np.diag([1.0, 0.0]), lay)) == 0.0
    assert von_neumann_entropy(DensityMatrix(np.eye(2) / 2, lay)) == pytest.approx(1.0)
    dm = DensityMatrix(np.diag([0.5249, 0.4751]), lay)
    assert von_neumann_entropy(dm) == pytest.approx(binary_entropy(0.4751), abs=1e-12)


def test_entropy_bounded_by_log_dim():
    rng = np.random.default_rng(41)
    lay = SpaceLayout([("Q1", 2), ("Q2", 2)])
    for _ in range(5):
        s = von_neumann_entropy(DensityMatrix(random_state(rng, 4), lay))
        assert -1e-12 <= s <= 2.0


def test_entropy_flags_integrator_failure():
    lay = SpaceLayout([("Q1", 2)])
    # passes state validation (above -1e-10) but is beyond entropy's rounding clip
    dm = DensityMatrix(np.diag([1.0 + 5e-12, -5e-12]), lay)
    with pytest.raises(ValueError, match="integrator"):
        von_neumann_entropy(dm)


def test_coherent_information_identity_channel():
    ci = coherent_information(bell_pair())
    assert ci.ic == pytest.approx(1.0, abs=1e-12)
    assert ci.s_out == pytest.approx(1.0, abs=1e-12)
    assert ci.s_exchange == pytest.approx(0.0, abs=1e-12)


def test_coherent_information_useless_channel_is_negative():
    lay = SpaceLayout([("R1", 2), ("Q1", 2)])
    ci = coherent_information(DensityMatrix(np.eye(4) / 4, lay))
    assert ci.s_out == pytest.approx(1.0, abs=1e-12)
    assert ci.s_exchange == pytest.approx(2.0, abs=1e-12)
    assert ci.ic == pytest.approx(-1.0, abs=1e-12)


def test_coherent_information_rejects_unlabeled_layouts():
    lay = SpaceLayout([("A", 2), ("B", 2)])
    with pytest.raises(ValueError, match="R\\*/Q\\*"):
        coherent_information(DensityMatrix(np.eye(4) / 4, lay))


def test_single_use_coherent_info_matches_degradable_form():
    gamma, lam, tau_p, p = 0.05, 1.0, 0.225, 0.4751
    sched = ChannelSchedule(lam=lam, tau_p=tau_p, tau=tau_p, gamma=gamma, n_uses=1)
    psi = purify(single_qubit_input(p, 0.0), "R1")
    joint = run_schedule(psi, sched).ptrace(["R1", "Q1"])
    eta = eta_gamma(gamma, lam, tau_p)
    assert coherent_information(joint).ic == pytest.approx(
        coherent_info_diagonal(p, eta), abs=1e-8
    )


def test_holevo_orthogonal_and_degenerate():
    lay = SpaceLayout([("Q1", 2), ("Q2", 2)])
    basis = [np.zeros((4, 4), dtype=complex) for _ in range(4)]
    for i, b in enumerate(basis):
        b[i, i] = 1.0
    orth = Ensemble(tuple((0.25, DensityMatrix(b, lay)) for b in basis))
    assert holevo_information(orth).chi == pytest.approx(2.0, abs=1e-12)
    assert holevo_via_enlarged(orth) == pytest.approx(2.0, abs=1e-9)

    same = Ensemble(tuple((0.25, DensityMatrix(basis[0], lay)) for _ in range(4)))
    assert holevo_information(same).chi == pytest.approx(0.0, abs=1e-12)
    assert holevo_via_enlarged(same) == pytest.approx(0.0, abs=1e-9)


def test_single_use_holevo_matches_closed_form():
    eta, p_tilde = 0.80, 0.4329
    chan = AmplitudeDampingChannel(eta)
    psi0, psi1 = codeword_kets(p_tilde)
    lay = SpaceLayout([("Q1", 2)])
    outs = Ensemble(
        tuple(
            (0.5, apply_ad_channel(chan, DensityMatrix(np.outer(k, k.conj()), lay)))
            for k in (psi0, psi1)
        )
    )
    assert holevo_information(outs).chi == pytest.approx(
        holevo_info_binary(p_tilde, eta), abs=1e-12
    )


def test_per_use_reduction_memoryless_product():
    gamma, lam, tau_p, p = 0.5, 1.0, 0.464, 0.4497
    sched = ChannelSchedule(lam=lam, tau_p=tau_p, tau=tau_p + 40 / gamma, gamma=gamma)
    joint = run_schedule(purified_qubit_train(p, 0.0, 2), sched).ptrace(
        ["R1", "Q1", "R2", "Q2"]
    )
    u1 = per_use_reduction(joint, 1)
    u2 = per_use_reduction(joint, 2)
    memoryless = coherent_info_diagonal(p, eta_gamma(gamma, lam, tau_p))
    assert u1.ic == pytest.approx(memoryless, abs=1e-6)
    assert u2.ic == pytest.approx(memoryless, abs=1e-3)  # residual memory at finite tau


def test_first_use_is_tau_independent():
    gamma, lam, tau_p, p = 0.5, 1.0, 0.464, 0.4496
    values = []
    for tau in (tau_p, tau_p + 1.0):
        sched = ChannelSchedule(lam=lam, tau_p=tau_p, tau=tau, gamma=gamma)
        joint = run_schedule(purified_qubit_train(p, 0.0, 2), sched).ptrace(
            ["R1", "Q1", "R2", "Q2"]
        )
        values.append(per_use_reduction(joint, 1).ic)
    assert abs(values[0] - values[1]) < 1e-9


def test_mutual_information_product_and_bell():
    rng = np.random.default_rng(42)
    lay = SpaceLayout([("R1", 2), ("Q1", 2)])
    prod = DensityMatrix(kron(random_state(rng, 2), random_state(rng, 2)), lay)
    assert mutual_information(prod, ["R1"], ["Q1"]) == pytest.approx(0.0, abs=1e-10)
    assert mutual_information(bell_pair(), ["R1"], ["Q1"]) == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(ValueError, match="cover"):
        mutual_information(bell_pair(), ["R1"], [])


def test_mutual_information_identity_on_two_use_run():
    sched = ChannelSchedule(lam=1.0, tau_p=0.225, tau=0.475, gamma=0.05)
    psi = purified_qubit_train(0.4751, 0.0, 2)
    s_r = von_neumann_entropy(psi.ptrace(["R1", "R2"]))
    joint = run_schedule(psi, sched).ptrace(["R1", "Q1", "R2", "Q2"])
    mi = mutual_information(joint, ["R1", "R2"], ["Q1", "Q2"])
    ic = coherent_information(joint).ic
    assert abs(mi - s_r - ic) < 1e-9


def test_enlarged_holevo_matches_on_simulated_run():
    from memchannel.dynamics import run_ensemble
    from memchannel.states import holevo_separable_ensemble

    sched = ChannelSchedule(lam=1.0, tau_p=0.464, tau=0.714, gamma=0.05)
    outs = run_ensemble(holevo_separable_ensemble(0.4329), sched)
    hi = holevo_information(outs)
    assert abs(holevo_via_enlarged(outs) - hi.chi) < 1e-9
    assert hi.chi >= -1e-9


def test_entropy_subadditive_on_random_states():
    rng = np.random.default_rng(43)
    lay = SpaceLayout([("R1", 2), ("Q1", 3)])
    for _ in range(8):
        dm = DensityMatrix(random_state(rng, 6), lay)
        s_ab = von_neumann_entropy(dm)
        s_a = von_neumann_entropy(dm.ptrace(["R1"]))
        s_b = von_neumann_entropy(dm.ptrace(["Q1"]))
        assert s_ab <= s_a + s_b + 1e-9


def test_entropy_exchange_independent_of_purification():
    rng = np.random.default_rng(44)
    sched = ChannelSchedule(lam=1.0, tau_p=0.464, tau=0.6, gamma=0.5, n_uses=1)
    rho = DensityMatrix(random_state(rng, 2), SpaceLayout([("Q1", 2)]))
    psi = purify(rho, "R1")
    # a second purification: rotate the reference by a random unitary
    q, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    u = kron(q, np.eye(2))
    psi2 = DensityMatrix(u @ psi.op @ u.conj().T, psi.layout)
    se1 = coherent_information(run_schedule(psi, sched).ptrace(["R1", "Q1"])).s_exchange
    se2 = coherent_information(run_schedule(psi2, sched).ptrace(["R1", "Q1"])).s_exchange
    assert abs(se1 - se2) < 1e-9
