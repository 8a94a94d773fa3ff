"""Choi-matrix channels, reduced/conditional maps, and gate fidelity."""

import numpy as np
import pytest

from nonrecip import qcore
from nonrecip.channels import (
    Channel,
    average_gate_fidelity,
    channel_from_matrix,
    channel_from_superop,
    compose,
    conditional_reduced_channel,
    identity_channel,
    kraus_channel,
    trace_out_channel,
    unitary_channel,
)
from nonrecip.liouville import Lindbladian, Superoperator, liouvillian, propagate
from nonrecip.qcore import (
    CompositeSpace,
    Operator,
    basis_ket,
    destroy,
    embed,
    partial_trace,
    place,
    random_sample,
    sigma,
    single_site,
    tensor,
)


def random_kraus_channel(dim, n_kraus, seed):
    # columns of a Haar isometry give a random CPTP map
    u = random_sample("haar_unitary", dim * n_kraus, seed).data
    iso = u[:, :dim]
    ops = [iso[k * dim:(k + 1) * dim, :] for k in range(n_kraus)]
    return kraus_channel(ops, single_site(dim))


# -- conventions ---------------------------------------------------------------

def test_identity_channel_choi_structure():
    ch = identity_channel(single_site(2))
    # Choi of the identity is the unnormalized maximally entangled projector
    omega = np.array([1, 0, 0, 1], dtype=complex)
    np.testing.assert_allclose(ch.choi, np.outer(omega, omega), atol=1e-14)
    rho = random_sample("density", 2, 1)
    np.testing.assert_allclose(ch.apply(Operator(ch.in_space, rho.data)).data,
                               rho.data, atol=1e-14)


def test_choi_elements_match_map_action():
    # J[i, m, j, n] = <m| Phi(|i><j|) |n> for Phi(rho) = A rho B
    rng = np.random.default_rng(2)
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    b = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    sp = single_site(3)
    ch = channel_from_matrix(np.kron(b.T, a), sp, sp, check_tp=False)
    j4 = ch.choi.reshape(3, 3, 3, 3)
    for i in range(3):
        for j in range(3):
            e_ij = np.zeros((3, 3), dtype=complex)
            e_ij[i, j] = 1.0
            np.testing.assert_allclose(j4[i, :, j, :], a @ e_ij @ b, atol=1e-13)


def test_superop_choi_roundtrip():
    rng = np.random.default_rng(3)
    for din, dout in [(2, 2), (3, 3), (4, 2)]:
        m = (rng.standard_normal((dout**2, din**2))
             + 1j * rng.standard_normal((dout**2, din**2)))
        ch = channel_from_matrix(m, single_site(din), single_site(dout),
                                 check_tp=False)
        np.testing.assert_allclose(ch.superop_matrix(), m, atol=1e-13)


def test_apply_agrees_with_superop_action():
    ch = random_kraus_channel(3, 2, seed=4)
    rho = random_sample("density", 3, 5)
    via_choi = ch.apply(Operator(ch.in_space, rho.data)).data
    from nonrecip.liouville import unvec, vec
    via_superop = unvec(ch.superop_matrix() @ vec(rho.data), 3)
    np.testing.assert_allclose(via_choi, via_superop, atol=1e-13)


# -- validation -----------------------------------------------------------------

def test_random_kraus_channel_is_cptp():
    ch = random_kraus_channel(3, 3, seed=6)
    assert ch.is_cptp()
    assert ch.tp_violation() < 1e-12
    assert ch.cp_violation() < 1e-12


def test_non_tp_map_rejected():
    sp = single_site(2)
    with pytest.raises(ValueError, match="trace preserving"):
        kraus_channel([sigma("-")], sp)


def test_transpose_map_is_not_cp():
    # the transpose map is TP but famously not CP
    d = 2
    s = np.zeros((4, 4), dtype=complex)
    for r in range(d):
        for c in range(d):
            # maps |r><c| to |c><r|
            s[r * d + c, c * d + r] = 1.0
    ch = channel_from_matrix(s, single_site(2), single_site(2))
    assert ch.tp_violation() < 1e-14
    assert ch.cp_violation() > 0.5
    assert not ch.is_cptp()


def test_unitary_channel_requires_unitary():
    with pytest.raises(ValueError):
        unitary_channel(sigma("-"))


# -- composition and partial trace -----------------------------------------------

def test_compose_matches_sequential_application():
    e1 = random_kraus_channel(3, 2, seed=7)
    e2 = random_kraus_channel(3, 3, seed=8)
    rho = Operator(e1.in_space, random_sample("density", 3, 9).data)
    chained = compose(e2, e1)
    np.testing.assert_allclose(
        chained.apply(rho).data, e2.apply(e1.apply(rho)).data, atol=1e-12
    )
    assert chained.is_cptp()


def test_trace_out_channel_equals_partial_trace():
    sp = CompositeSpace((2, 3, 2), cutoff=2, counted=(1,))
    rng = np.random.default_rng(10)
    m = rng.standard_normal((sp.dim,) * 2) + 1j * rng.standard_normal((sp.dim,) * 2)
    m = m @ m.conj().T
    m /= np.trace(m)
    op = Operator(sp, m)
    for keep in [(0,), (1, 2), (0, 2)]:
        ch = trace_out_channel(sp, keep)
        np.testing.assert_allclose(
            ch.apply(op).data, partial_trace(op, keep).data, atol=1e-13
        )
        assert ch.is_cptp()


# -- conditional reduced channels -------------------------------------------------

def uncoupled_two_site_model():
    sp = CompositeSpace((3, 2))
    ha = np.diag([0.0, 1.0, 2.3])
    h = place(sp, {0: Operator(single_site(3), ha)})
    jump_a = embed(destroy(3), sp, 0)
    jump_b = embed(sigma("-"), sp, 1)
    l = Lindbladian(sp, h, ((0.8, jump_a), (0.5, jump_b)))
    la = Lindbladian(single_site(3), Operator(single_site(3), ha),
                     ((0.8, destroy(3)),))
    return l, la


def test_conditional_channel_of_uncoupled_model_is_local_propagator():
    l, la = uncoupled_two_site_model()
    t = 0.9
    for fixed_state in [basis_ket(2, 0), basis_ket(2, 1),
                        random_sample("density", 2, 11)]:
        cond = conditional_reduced_channel(l, {1: fixed_state}, keep=0, t=t)
        local = channel_from_matrix(
            qcore.expm(t * liouvillian(la).matrix), la.space, la.space
        )
        assert np.abs(cond.choi - local.choi).max() < 1e-11
        assert cond.is_cptp()


def test_conditional_channel_at_time_zero_is_identity():
    l, _ = uncoupled_two_site_model()
    cond = conditional_reduced_channel(l, {0: basis_ket(3, 1)}, keep=1, t=0.0)
    ident = identity_channel(single_site(2))
    np.testing.assert_allclose(cond.choi, ident.choi, atol=1e-12)


def test_conditional_channel_coupled_model_is_cptp():
    sp = CompositeSpace((2, 2))
    rng = np.random.default_rng(12)
    h = rng.standard_normal((4, 4))
    h = Operator(sp, (h + h.T) / 2)
    j = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    l = Lindbladian(sp, h, ((0.6, Operator(sp, j / 2)),))
    cond = conditional_reduced_channel(
        l, {1: random_sample("pure_state", 2, 13)}, keep=0, t=1.7
    )
    assert cond.is_cptp()


def test_conditional_channel_multi_site_keep_on_truncated_space():
    sp = CompositeSpace((3, 3, 2), cutoff=2, counted=(0, 1))
    a1 = place(sp, {0: destroy(3)})
    h = place(sp, {0: Operator(single_site(3), np.diag([0, 1.0, 2.0])),
                   2: sigma("z")})
    l = Lindbladian(sp, h, ((1.0, a1),))
    cond = conditional_reduced_channel(
        l, {2: basis_ket(2, 0)}, keep=(0, 1), t=0.5
    )
    assert cond.in_space == sp.reduced((0, 1))
    assert cond.in_space.dim == 6
    assert cond.is_cptp()


def test_insertion_rejects_states_clipped_by_cutoff():
    sp = CompositeSpace((3, 3), cutoff=2)
    l = Lindbladian(sp, None, ((1.0, place(sp, {0: destroy(3)})),))
    with pytest.raises(ValueError, match="truncated"):
        conditional_reduced_channel(l, {1: basis_ket(3, 2)}, keep=0, t=0.1)


def test_conditional_channel_matches_direct_propagation():
    # dual route: apply the channel vs propagate the inserted product state
    sp = CompositeSpace((2, 2))
    rng = np.random.default_rng(14)
    h = rng.standard_normal((4, 4))
    h = Operator(sp, (h + h.T) / 2)
    l = Lindbladian(sp, h, ((0.4, embed(sigma("-"), sp, 0)),))
    phi = random_sample("pure_state", 2, 15)
    rho_a = random_sample("density", 2, 16)
    t = 1.1
    cond = conditional_reduced_channel(l, {1: phi}, keep=0, t=t)
    got = cond.apply(Operator(single_site(2), rho_a.data)).data
    full0 = tensor(Operator(single_site(2), rho_a.data), phi.density(),
                   out_space=sp)
    (full_t,) = propagate(l, full0, [t])
    want = partial_trace(full_t, 0).data
    np.testing.assert_allclose(got, want, atol=1e-10)


# -- average gate fidelity ---------------------------------------------------------

def test_agf_of_exact_unitary_is_one():
    u = random_sample("haar_unitary", 3, 17)
    ch = unitary_channel(u)
    assert average_gate_fidelity(ch, u) == pytest.approx(1.0, abs=1e-12)


def test_agf_between_unitaries_closed_form():
    u = random_sample("haar_unitary", 2, 18)
    v = random_sample("haar_unitary", 2, 19)
    ch = unitary_channel(v)
    d = 2
    f_pro = abs(np.trace(u.data.conj().T @ v.data)) ** 2 / d**2
    want = (d * f_pro + 1) / (d + 1)
    assert average_gate_fidelity(ch, u) == pytest.approx(want, abs=1e-12)


def test_agf_pi_rotation_against_identity():
    u = Operator(single_site(2), qcore.expm(-1j * np.pi * sigma("z").data / 2))
    ch = unitary_channel(u)
    ident = Operator(single_site(2), np.eye(2))
    assert average_gate_fidelity(ch, ident) == pytest.approx(1 / 3, abs=1e-12)


def test_agf_depolarizing_is_half():
    sp = single_site(2)
    from nonrecip.liouville import vec
    s = np.outer(vec(np.eye(2) / 2), vec(np.eye(2)).conj())
    ch = channel_from_matrix(s, sp, sp)
    ident = Operator(sp, np.eye(2))
    assert average_gate_fidelity(ch, ident) == pytest.approx(0.5, abs=1e-12)


def test_agf_monte_carlo_oracle():
    ch = random_kraus_channel(2, 2, seed=20)
    u = random_sample("haar_unitary", 2, 21)
    vals = []
    for s in range(4000):
        psi = random_sample("pure_state", 2, 1000 + s)
        out = ch.apply(psi.density()).data
        target = u.data @ psi.amplitudes
        vals.append(np.real(target.conj() @ out @ target))
    assert average_gate_fidelity(ch, u) == pytest.approx(np.mean(vals), abs=0.01)
