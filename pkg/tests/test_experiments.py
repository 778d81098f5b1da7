import numpy as np
import pytest

from memchannel.admap import (
    coherent_info_diagonal,
    eta_gamma,
    holevo_info_binary,
    memoryless_C1,
    memoryless_Q,
)
from memchannel.dynamics import ChannelSchedule
from memchannel.experiments import (
    blocking_bound_check,
    coherent_sweep,
    default_tau_grid,
    dephasing_comparison,
    forgetfulness_check,
    holevo_sweep,
    optimize_input,
    theta_sweep,
)
from memchannel.states import purified_qubit_train


def fig1_top():
    return ChannelSchedule(lam=1.0, tau_p=0.225, tau=0.225, gamma=0.05)


def strong_damping():
    return ChannelSchedule(lam=1.0, tau_p=0.464, tau=0.464, gamma=0.5)


def test_default_tau_grid():
    grid = default_tau_grid(fig1_top())
    assert len(grid) == 41
    assert grid[0] == pytest.approx(0.225)
    assert grid[-1] == pytest.approx(10.225)


def test_coherent_sweep_memory_enhancement():
    sched = fig1_top()
    taus = [sched.tau_p, sched.tau_p + 1.0, sched.tau_p + 3.0]
    recs = coherent_sweep(sched, taus, p=0.4751)
    ics = [r.report.ic for r in recs]
    assert all(b <= a + 1e-9 for a, b in zip(ics, ics[1:]))  # decreasing in tau
    assert recs[0].report.ic / 2 > recs[0].q_memoryless + 0.005
    assert all(r.identity_gap < 1e-9 for r in recs)
    assert all(r.report.corr_rq >= -1e-9 for r in recs)
    assert recs[0].q_memoryless == pytest.approx(
        memoryless_Q(eta_gamma(0.05, 1.0, 0.225))[0]
    )
    # first use is exactly the memoryless channel
    assert recs[0].report.ic_1 == pytest.approx(recs[0].q_memoryless, abs=1e-4)
    assert recs[0].report.ic_2 < recs[0].q_memoryless


def test_coherent_sweep_reaches_memoryless_limit():
    gamma = 0.5
    sched = ChannelSchedule(lam=1.0, tau_p=0.464, tau=0.464, gamma=gamma)
    tau_inf = sched.tau_p + 40.0 / gamma
    rec = coherent_sweep(sched, [tau_inf], p=0.4497)[0]
    closed = coherent_info_diagonal(0.4497, eta_gamma(gamma, 1.0, 0.464))
    assert abs(rec.report.ic / 2 - closed) < 0.01
    assert rec.mu < 0.03


def test_holevo_sweep_basics():
    sched = ChannelSchedule(lam=1.0, tau_p=0.464, tau=0.464, gamma=0.05)
    taus = [sched.tau_p, sched.tau_p + 2.0]
    recs = holevo_sweep(sched, taus, p_tilde=0.4329)
    assert recs[0].report.chi / 2 > recs[0].c1_memoryless + 0.005
    assert recs[0].report.chi >= recs[1].report.chi - 1e-9
    for r in recs:
        assert r.identity_gap < 1e-9
        assert r.report.chi >= r.report.chi_1 + r.report.chi_2 - 1e-9
        assert r.report.avg_s_out <= r.report.avg_s_out_1 + r.report.avg_s_out_2 + 1e-9
    assert recs[0].c1_memoryless == pytest.approx(
        memoryless_C1(eta_gamma(0.05, 1.0, 0.464))[0]
    )


def test_holevo_sweep_reaches_memoryless_limit():
    gamma = 0.5
    sched = ChannelSchedule(lam=1.0, tau_p=0.464, tau=0.464, gamma=gamma)
    rec = holevo_sweep(sched, [sched.tau_p + 40.0 / gamma], p_tilde=0.4338)[0]
    closed = holevo_info_binary(0.4338, eta_gamma(gamma, 1.0, 0.464))
    assert abs(rec.report.chi / 2 - closed) < 0.01


def test_optimize_input_recovers_memoryless_optimum():
    gamma = 0.5
    sched = ChannelSchedule(lam=1.0, tau_p=0.464, tau=0.464 + 40.0 / gamma, gamma=gamma)
    eta = eta_gamma(gamma, 1.0, 0.464)
    p_opt, value = optimize_input(sched, "coherent")
    q, p_star = memoryless_Q(eta)
    assert abs(p_opt - p_star) < 1e-3
    assert abs(value / 2 - q) < 1e-4


def test_optimize_input_gain_over_fixed_p_is_small():
    # strongest-memory point of the low-quality channel: re-optimizing the
    # input beats the memoryless-optimal population by almost nothing
    sched = ChannelSchedule(lam=1.0, tau_p=0.685, tau=0.685, gamma=0.5)
    eta = eta_gamma(0.5, 1.0, 0.685)
    _, p_bar = memoryless_Q(eta)
    p_opt, value = optimize_input(sched, "coherent")
    fixed = coherent_sweep(sched, [sched.tau], p=p_bar)[0].report.ic
    assert value >= fixed - 1e-9  # optimizer contract
    assert value - fixed < 0.01


def test_optimize_input_holevo_quantity():
    gamma = 0.5
    sched = ChannelSchedule(lam=1.0, tau_p=0.464, tau=0.464 + 40.0 / gamma, gamma=gamma)
    c1, p_star = memoryless_C1(eta_gamma(gamma, 1.0, 0.464))
    p_opt, value = optimize_input(sched, "holevo")
    assert abs(p_opt - p_star) < 1e-3
    assert abs(value / 2 - c1) < 1e-4


def test_theta_sweep_separable_maximum_and_symmetry():
    sched = strong_damping()
    thetas = np.arange(0.0, np.pi / 2 + 1e-12, np.pi / 8)
    taus = [sched.tau_p, sched.tau_p + 1.0]
    recs = theta_sweep(sched, 0.4339, thetas, taus)
    assert all(r.identity_gap < 1e-9 for r in recs)
    for tau in taus:
        at_tau = [r for r in recs if r.tau == tau]
        best = max(at_tau, key=lambda r: r.chi)
        assert min(abs(best.theta - k * np.pi / 2) for k in range(2)) < 1e-12
    # curves are ordered by memory: smaller tau wins at every theta
    for r0, r1 in zip(recs[: len(thetas)], recs[len(thetas) :]):
        assert r0.chi >= r1.chi - 1e-9


def test_theta_sweep_pi_periodicity():
    sched = strong_damping()
    thetas = np.array([0.3, 1.1])
    recs_a = theta_sweep(sched, 0.4339, thetas, [sched.tau_p])
    recs_b = theta_sweep(sched, 0.4339, thetas + np.pi, [sched.tau_p])
    for a, b in zip(recs_a, recs_b):
        assert abs(a.chi - b.chi) < 1e-9


def test_dephasing_comparison_coherent():
    sched = strong_damping()
    taus = [sched.tau_p, sched.tau_p + 3.0]
    pairs = dephasing_comparison(sched, "coherent", 0.4496, tau_grid=taus)
    for pair in pairs:
        assert pair.dephased.report.ic <= pair.plain.report.ic + 1e-9
    # killing the oscillator coherences destroys most inter-use correlation
    assert pairs[0].dephased.report.corr_rq < 0.25 * pairs[0].plain.report.corr_rq


def test_dephasing_comparison_converges_at_large_tau():
    gamma = 0.5
    sched = ChannelSchedule(lam=1.0, tau_p=0.464, tau=0.464, gamma=gamma)
    pairs = dephasing_comparison(
        sched, "coherent", 0.4496, tau_grid=[sched.tau_p + 40.0 / gamma]
    )
    assert abs(pairs[0].plain.report.ic - pairs[0].dephased.report.ic) < 1e-3


def test_dephasing_comparison_holevo():
    sched = strong_damping()
    pairs = dephasing_comparison(sched, "holevo", 0.4339, tau_grid=[sched.tau_p])
    assert pairs[0].dephased.report.chi <= pairs[0].plain.report.chi + 1e-9


def test_forgetfulness_bound_and_decay():
    sched = ChannelSchedule(lam=1.0, tau_p=0.464, tau=1.0, gamma=0.5)
    recs = forgetfulness_check(sched, [0, 2, 4], p=1.0)
    for r in recs:
        assert r.lhs <= r.bound
        assert r.multi_block_bound == pytest.approx(r.bound)  # m_blocks = 2
    lhs = [r.lhs for r in recs]
    assert all(b < a for a, b in zip(lhs, lhs[1:]))


def test_forgetfulness_long_idle_is_negligible():
    # L gamma tau = 20 wipes the memory to below 1e-3 in trace norm
    sched = ChannelSchedule(lam=1.0, tau_p=0.464, tau=1.0, gamma=0.5)
    rec = forgetfulness_check(sched, [40], p=1.0)[0]
    assert rec.lhs < 1e-3


def test_forgetfulness_requires_damping():
    sched = ChannelSchedule(lam=1.0, tau_p=0.464, tau=1.0, gamma=0.0)
    with pytest.raises(ValueError, match="damping"):
        forgetfulness_check(sched, [0, 1])


def test_blocking_bound_holds_at_generic_points():
    sched = fig1_top()
    for p in (0.1, 0.4751, 0.9):
        rec = blocking_bound_check(sched, purified_qubit_train(p, 0.0, 2))
        assert rec.slack >= -1e-9
        assert rec.n_idle == 1


def test_blocking_bound_noiseless_equality_edge():
    # nearly-identity channel: discarding one of two Bell halves costs
    # exactly the one-qubit allowance, so the bound is tight
    sched = ChannelSchedule(lam=1.0, tau_p=0.005, tau=0.005, gamma=0.0)
    rec = blocking_bound_check(sched, purified_qubit_train(0.5, 0.0, 2))
    assert rec.lhs_ic == pytest.approx(2.0, abs=1e-3)
    assert rec.rhs_ic == pytest.approx(1.0, abs=1e-3)
    assert -1e-9 <= rec.slack < 1e-3


def test_blocking_bound_rejects_bad_split():
    sched = fig1_top()
    with pytest.raises(ValueError, match="idle"):
        blocking_bound_check(sched, purified_qubit_train(0.5, 0.0, 2), n_coding=2)
