"""Model constructors against closed forms and cross-model consistency."""

import numpy as np
import pytest

from nonrecip import qcore
from nonrecip.channels import (
    average_gate_fidelity,
    channel_from_matrix,
    conditional_reduced_channel,
    kraus_channel,
)
from nonrecip.liouville import Lindbladian, asymptotic_channel, liouvillian, propagate
from nonrecip.models import (
    BRRates,
    EffectiveParams,
    GateSpaces,
    UnitarityReport,
    bloch_redfield_rates,
    bloch_redfield_rates_exact,
    cascade_effective_unitary,
    cascaded,
    cavity_qubit_reservoir,
    chiral_cascade,
    coupling_for_target_unitary,
    directional,
    effective_params,
    feedforward_kraus,
    gate_protocol_spaces,
    generalized_unitarity_check,
    generalized_unitary_from_generator,
    lambda_c_for_angle,
    multi_dissipator_two_mode,
    steady_state_map,
    two_mode_unitary_grid,
)
from nonrecip.qcore import (
    CompositeSpace,
    Operator,
    basis_ket,
    destroy,
    basis_ket as fock,
    random_sample,
    sigma,
    single_site,
)


def rotation(theta):
    return Operator(single_site(2), qcore.expm(-1j * theta * sigma("z").data / 2))


# -- one-way and cascaded builders ---------------------------------------------

def test_directional_jump_structure():
    gamma, theta = 1.3, np.pi / 5
    l = directional(destroy(3), rotation(theta), gamma)
    assert l.hamiltonian is None
    assert len(l.jumps) == 1
    rate, jump = l.jumps[0]
    assert rate == gamma
    want = np.kron(destroy(3).data, rotation(theta).data)
    np.testing.assert_allclose(jump.data, want, atol=1e-14)


def test_directional_rejects_nonunitary_kick():
    with pytest.raises(ValueError):
        directional(destroy(3), sigma("-"), 1.0)


def test_directional_source_dynamics_closes():
    # the emitter's reduced channel is the same for any conditioned-side state
    l = directional(destroy(3), rotation(0.7), 1.0)
    t = 0.8
    chois = []
    for s in [basis_ket(2, 0), basis_ket(2, 1), random_sample("pure_state", 2, 1)]:
        chois.append(conditional_reduced_channel(l, {1: s}, 0, t).choi)
    assert np.abs(chois[0] - chois[1]).max() < 1e-12
    assert np.abs(chois[0] - chois[2]).max() < 1e-12
    # and it equals plain damping of the emitter alone
    la = Lindbladian(single_site(3), None, ((1.0, destroy(3)),))
    local = qcore.expm(t * liouvillian(la).matrix)
    want = channel_from_matrix(local, la.space, la.space).choi
    assert np.abs(chois[0] - want).max() < 1e-11


def test_cascaded_source_reduces_to_damping():
    rate = 0.9
    l = cascaded(sigma("-"), sigma("-"), rate)
    t = 1.4
    cond = conditional_reduced_channel(l, {1: basis_ket(2, 1)}, 0, t)
    la = Lindbladian(single_site(2), None, ((rate, sigma("-")),))
    want = channel_from_matrix(
        qcore.expm(t * liouvillian(la).matrix), la.space, la.space
    ).choi
    assert np.abs(cond.choi - want).max() < 1e-11


def test_cascaded_target_feels_the_source():
    l = cascaded(sigma("-"), sigma("-"), 1.0)
    c0 = conditional_reduced_channel(l, {0: basis_ket(2, 0)}, 1, 1.0)
    c1 = conditional_reduced_channel(l, {0: basis_ket(2, 1)}, 1, 1.0)
    assert np.abs(c0.choi - c1.choi).max() > 0.1


# -- feedforward Kraus step -------------------------------------------------------

def test_kraus_pair_resolves_identity_to_second_order():
    a, u, gamma = destroy(3), rotation(0.5), 1.2
    resid = {}
    for dt in (1e-2, 5e-3):
        m1, m2 = feedforward_kraus(a, u, gamma, dt)
        s = m1.dag() @ m1 + m2.dag() @ m2
        resid[dt] = np.abs(s.data - np.eye(s.space.dim)).max()
    assert resid[1e-2] / resid[5e-3] == pytest.approx(4.0, rel=0.05)


def test_kraus_step_approximates_generator_to_second_order():
    a, u, gamma = destroy(2), rotation(0.9), 1.0
    l = directional(a, u, gamma)
    lv = liouvillian(l).matrix
    err = {}
    for dt in (2e-3, 1e-3):
        m1, m2 = feedforward_kraus(a, u, gamma, dt)
        step = kraus_channel([m1, m2], l.space, check_tp=False).superop_matrix()
        err[dt] = np.abs(step - qcore.expm(dt * lv)).max()
    assert err[2e-3] / err[1e-3] == pytest.approx(4.0, rel=0.1)


# -- gate subspaces ----------------------------------------------------------------

def test_gate_spaces_for_lowering_operator():
    gs = gate_protocol_spaces(destroy(3))
    assert gs.dark.shape == (3, 1)
    assert abs(abs(gs.dark[0, 0]) - 1.0) < 1e-12
    assert gs.ready.shape == (3, 1)
    assert abs(abs(gs.ready[1, 0]) - 1.0) < 1e-12


def test_gate_spaces_two_dimensional_dark():
    a = np.zeros((3, 3), dtype=complex)
    a[0, 2] = 1.0  # annihilates |0>, |1>; sends |2> into the dark space
    gs = gate_protocol_spaces(Operator(single_site(3), a))
    assert gs.dark.shape[1] == 2
    assert gs.ready.shape[1] == 1
    assert abs(abs(gs.ready[2, 0]) - 1.0) < 1e-12
    # outputs are orthonormal and mutually orthogonal
    np.testing.assert_allclose(gs.dark.conj().T @ gs.dark, np.eye(2), atol=1e-12)
    assert np.abs(gs.dark.conj().T @ gs.ready).max() < 1e-12


def test_gate_spaces_reject_kernel_free_operator():
    u = random_sample("haar_unitary", 3, 5)
    with pytest.raises(ValueError):
        gate_protocol_spaces(u)


# -- cavity/qubit/reservoir model ----------------------------------------------------

def test_effective_params_formulas():
    p = effective_params(j=0.5, kappa_c=2.0, lambda_c=1.0)
    denom = 4.0 + 1.0
    assert p.gamma_eff == pytest.approx(4 * 0.25 * 2.0 / denom)
    assert p.lambda_eff == pytest.approx(-4 * 0.25 * 1.0 / denom)
    assert p.theta_eff == pytest.approx(2 * np.arctan(0.5))


def test_lambda_c_for_angle_roundtrip():
    kappa = 3.0
    for theta in (np.pi / 6, -np.pi / 3, 0.9 * np.pi):
        lam = lambda_c_for_angle(theta, kappa)
        assert effective_params(1.0, kappa, lam).theta_eff == pytest.approx(theta)
    with pytest.raises(ValueError):
        lambda_c_for_angle(np.pi, kappa)


def test_truncation_is_exact_at_initial_excitation_number():
    # the interaction conserves total photon number and the loss only
    # lowers it, so cutoffs at the initial count change nothing
    theta = np.pi / 6
    kappa_over_j = 8.0
    j = 1.0
    lam_c = lambda_c_for_angle(theta, kappa_over_j * j)
    p = effective_params(j, kappa_over_j * j, lam_c)
    t = 2.0 / p.gamma_eff
    chois = []
    for extra in (0, 1):
        l = cavity_qubit_reservoir(j, kappa_over_j * j, lam_c, -p.lambda_eff,
                                   n_max_a=1 + extra, n_max_c=1 + extra)
        ch = conditional_reduced_channel(
            l, {0: fock(2 + extra, 1), 2: fock(2 + extra, 0)}, 1, t
        )
        chois.append(ch.choi)
    assert np.abs(chois[0] - chois[1]).max() < 1e-10


def test_full_model_approaches_directional_limit():
    # adiabatic elimination: at large kappa/J the qubit kick channel matches
    # the one-way model with the effective rate and angle
    theta = np.pi / 6
    j = 1.0
    kappa = 16.0
    lam_c = lambda_c_for_angle(theta, kappa)
    p = effective_params(j, kappa, lam_c)
    t = 3.0 / p.gamma_eff
    full = cavity_qubit_reservoir(j, kappa, lam_c, -p.lambda_eff,
                                  n_max_a=1, n_max_c=1)
    ch_full = conditional_reduced_channel(full, {0: fock(2, 1), 2: fock(2, 0)},
                                          1, t)
    eff = directional(destroy(2), rotation(theta), p.gamma_eff)
    ch_eff = conditional_reduced_channel(eff, {0: fock(2, 1)}, 1, t)
    assert np.abs(ch_full.choi - ch_eff.choi).max() < 0.02
    # and the conditioning unitary is approached at long times
    ch_late = conditional_reduced_channel(full, {0: fock(2, 1), 2: fock(2, 0)},
                                          1, 30.0 / p.gamma_eff)
    agf = average_gate_fidelity(ch_late, rotation(theta))
    assert 1 - agf < 1e-2


# -- two-mode grid ---------------------------------------------------------------------

def test_grid_unitarity_equal_rates():
    grid = two_mode_unitary_grid(np.pi / 4, np.pi / 4, 1.0, 1.0)
    rep = generalized_unitarity_check(grid)
    assert rep.passed
    assert rep.violation.max() < 1e-12
    assert rep.normalization == pytest.approx(rep.expected_normalization)


def test_grid_unitarity_fails_for_split_rates():
    grid = two_mode_unitary_grid(np.pi / 4, np.pi / 4, 2.0, 0.0)
    rep = generalized_unitarity_check(grid)
    assert not rep.passed
    # off-diagonal residual is sin(t)cos(t)|g2-g1|/mean = 1 at these values
    assert rep.violation[0, 1] == pytest.approx(1.0, abs=1e-12)


def test_generator_route_reproduces_grid():
    theta, phi = np.pi / 2, np.pi / 4
    sz, sx = sigma("z"), sigma("x")
    h = [[phi * sz, theta * sx], [theta * sx, -1.0 * phi * sz]]
    built = generalized_unitary_from_generator(h)
    want = two_mode_unitary_grid(theta, phi, 1.0, 1.0)
    for r in range(2):
        for c in range(2):
            np.testing.assert_allclose(built[r][c].data, want[r][c].data,
                                       atol=1e-12)
    assert generalized_unitarity_check(built).passed


def test_multi_dissipator_rates_fold_into_grid():
    l = multi_dissipator_two_mode(np.pi / 4, np.pi / 4, 2.0, 0.0, cutoff=1)
    rates = [r for r, _ in l.jumps]
    assert rates == [1.0, 1.0]  # mean rate on both, asymmetry inside the ops
    # second dissipator must carry zero weight on its own mode
    assert np.abs(l.jumps[1][1].data).max() == pytest.approx(0.0, abs=1e-14)


def test_multi_dissipator_space_truncation():
    l = multi_dissipator_two_mode(np.pi / 3, 0.3, 1.0, 1.0, cutoff=2)
    assert l.space.dims == (3, 3, 2)
    assert l.space.cutoff == 2 and l.space.counted == (0, 1)
    assert l.space.dim == 12


def test_steady_state_map_matches_long_time_dynamics():
    # single mode occupied: propagate the full model out to many lifetimes
    # and compare the conditioned qubit state against the closed-form map
    theta, phi = np.pi / 4, np.pi / 4
    grid = two_mode_unitary_grid(theta, phi, 1.0, 1.0)
    l = multi_dissipator_two_mode(theta, phi, 1.0, 1.0, cutoff=1)
    rho_q = random_sample("density", 2, 8)
    for mode in (0, 1):
        occ = [0, 0]
        occ[mode] = 1
        psi_modes = qcore.product_ket(l.space, tuple(occ) + (0,)).density().data
        # build product state: modes in Fock, qubit in rho_q
        ins = np.zeros((l.space.dim, l.space.dim), dtype=complex)
        for i, oi in enumerate(l.space.basis):
            for jj, oj in enumerate(l.space.basis):
                if oi[:2] == tuple(occ) and oj[:2] == tuple(occ):
                    ins[i, jj] = rho_q.data[oi[2], oj[2]]
        rho0 = Operator(l.space, ins)
        (late,) = propagate(l, rho0, [40.0])
        got = qcore.partial_trace(late, 2).data
        want = steady_state_map(grid, mode, 1).apply(rho_q).data
        np.testing.assert_allclose(got, want, atol=1e-8)


def test_steady_state_map_requires_isometric_column():
    # at theta = pi/4 the columns stay isometric even for split rates, so
    # use an angle where the column normalization itself breaks
    grid = two_mode_unitary_grid(np.pi / 6, np.pi / 4, 2.0, 0.0)
    with pytest.raises(ValueError, match="isometric"):
        steady_state_map(grid, 0, 1)


def test_steady_state_map_zero_applications_is_identity():
    grid = two_mode_unitary_grid(0.7, 0.2, 1.0, 1.0)
    ch = steady_state_map(grid, 0, 0)
    ident = np.eye(4)
    np.testing.assert_allclose(ch.superop_matrix(), ident, atol=1e-14)


# -- slowly driven phase ------------------------------------------------------------------

def test_br_rates_static_phase():
    g, tau = 0.8, 1.7
    r = bloch_redfield_rates(g, tau, lambda t: 0.3, t=2.0)
    assert r.gamma == pytest.approx(2 * g**2 * tau, abs=1e-12)
    assert r.sigma == pytest.approx(0.0, abs=1e-12)
    assert r.in_window


def test_br_rates_linear_drive_against_quadrature():
    g, tau = 1.0, 1.0
    v = 0.05 / tau  # slow-drive parameter tau * dtheta/dt = 0.05
    theta = lambda t: v * t
    t = 30 * tau
    approx = bloch_redfield_rates(g, tau, theta, t)
    sig_exact, gam_exact = bloch_redfield_rates_exact(g, tau, theta, t)
    assert approx.gamma == pytest.approx(gam_exact, rel=1e-2)
    assert approx.sigma == pytest.approx(sig_exact, rel=1e-2)
    assert approx.in_window


def test_br_exact_linear_drive_closed_form():
    # at constant phase velocity the late-time rates are analytic
    g, tau, v = 0.7, 1.3, 0.4
    t = 40 * tau
    sig, gam = bloch_redfield_rates_exact(g, tau, lambda s: v * s, t)
    x = v * tau
    assert gam == pytest.approx(2 * g**2 * tau / (1 + x * x), rel=1e-6)
    assert sig == pytest.approx(-g**2 * tau**2 * v / (1 + x * x), rel=1e-6)


def test_br_fast_drive_flagged():
    r = bloch_redfield_rates(1.0, 1.0, lambda t: 0.5 * t, t=5.0)
    assert not r.in_window


# -- relay cascade ---------------------------------------------------------------------------

def test_cascade_effective_unitary_roundtrip():
    rng = np.random.default_rng(20)
    e = rng.standard_normal((2, 2))
    e_b = Operator(single_site(2), 1.2 * (e + e.T) / 2)
    lam, gamma_c = 0.8, 2.0
    m = coupling_for_target_unitary(e_b, lam, gamma_c)
    u = cascade_effective_unitary(gamma_c, lam, m)
    want = qcore.expm(-1j * e_b.data)
    np.testing.assert_allclose(u.data, want, atol=1e-12)


def test_coupling_rejects_eigenphase_at_pi():
    e_b = Operator(single_site(2), np.pi * np.diag([1.0, -1.0]))
    with pytest.raises(ValueError, match="inside"):
        coupling_for_target_unitary(e_b, 1.0, 1.0)


def test_chiral_cascade_structure_and_propagation():
    m_b = Operator(single_site(2), 0.3 * sigma("z").data)
    l = chiral_cascade(1.0, 20.0, 1.5, m_b, n_max_a=1, n_max_c=1)
    assert l.space.dims == (2, 2, 2)
    rho0 = qcore.product_ket(l.space, (1, 0, 0)).density()
    states = propagate(l, rho0, [0.5, 3.0])
    for s in states:
        assert abs(s.trace() - 1) < 1e-9
    # emitter decays into the relay and out
    n_a = qcore.place(l.space, {0: qcore.number(2)})
    late = np.real(np.trace(n_a.data @ states[-1].data))
    assert late < 0.1


def test_chiral_cascade_approaches_effective_one_way_model():
    # fast relay: conditioned-side channel matches the one-way model built
    # from the Cayley-transform unitary
    m_b = Operator(single_site(2), 0.4 * sigma("z").data)
    gamma_a, gamma_c, lam = 1.0, 100.0, 30.0
    l = chiral_cascade(gamma_a, gamma_c, lam, m_b, n_max_a=1, n_max_c=1)
    u_eff = cascade_effective_unitary(gamma_c, lam, m_b)
    eff = directional(destroy(2), u_eff, gamma_a)
    t = 4.0 / gamma_a
    ch_full = conditional_reduced_channel(
        l, {0: fock(2, 1), 2: fock(2, 0)}, 1, t
    )
    ch_eff = conditional_reduced_channel(eff, {0: fock(2, 1)}, 1, t)
    assert np.abs(ch_full.choi - ch_eff.choi).max() < 0.05
