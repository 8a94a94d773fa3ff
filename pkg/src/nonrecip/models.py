"""Model builders: directional reservoir couplings and their microscopic
realizations, feedforward Kraus steps, multi-channel generalizations, and
the closed-form rate/unitary formulas the tests pin down."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.integrate
import scipy.linalg

from . import qcore
from .channels import Channel, channel_from_matrix
from .liouville import Lindbladian
from .qcore import CompositeSpace, Operator, destroy, number, place, sigma, tensor


def _combined_space(sa: CompositeSpace, sb: CompositeSpace) -> CompositeSpace:
    if sb.cutoff is not None:
        raise ValueError("conditioning-side space must be untruncated")
    if sa.cutoff is None:
        return CompositeSpace(sa.dims + sb.dims)
    return CompositeSpace(sa.dims + sb.dims, cutoff=sa.cutoff, counted=sa.counted)


def directional(a_op: Operator, u_b: Operator, gamma: float) -> Lindbladian:
    """One-way model: a single dissipator with jump operator A (x) U_B.

    The emitting side sees plain damping by A no matter what the other side
    does; the conditioned side is kicked by the unitary U_B once per quantum
    the emitter loses.
    """
    if gamma < 0:
        raise ValueError("rate must be nonnegative")
    if not u_b.is_unitary():
        raise ValueError("conditioning operator is not unitary")
    combined = _combined_space(a_op.space, u_b.space)
    jump = tensor(a_op, u_b, out_space=combined)
    return Lindbladian(combined, None, ((float(gamma), jump),))


def cascaded(a_op: Operator, b_op: Operator, rate: float) -> Lindbladian:
    """Unidirectional source-target chain: collective decay through A - iB
    plus the matching exchange Hamiltonian, both scaled by the rate."""
    if rate < 0:
        raise ValueError("rate must be nonnegative")
    if a_op.space.cutoff is not None or b_op.space.cutoff is not None:
        raise ValueError("cascaded builder expects untruncated local spaces")
    combined = CompositeSpace(a_op.space.dims + b_op.space.dims)
    a = tensor(a_op, qcore.identity(b_op.space), out_space=combined)
    b = tensor(qcore.identity(a_op.space), b_op, out_space=combined)
    h = 0.5 * rate * (a.dag() @ b + b.dag() @ a)
    h = Operator(combined, 0.5 * (h.data + h.data.conj().T))
    jump = Operator(combined, a.data - 1j * b.data)
    return Lindbladian(combined, h, ((float(rate), jump),))


def feedforward_kraus(a_op: Operator, u_b: Operator, gamma: float,
                      dt: float) -> tuple[Operator, Operator]:
    """One measure-and-kick step of duration dt.

    The no-count element must carry half the backaction, 1 - (gamma dt/2)
    A^dag A, so the pair resolves the identity to O(dt^2) and the step
    reproduces the one-way generator to the same order.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if gamma < 0:
        raise ValueError("rate must be nonnegative")
    if not u_b.is_unitary():
        raise ValueError("conditioning operator is not unitary")
    combined = _combined_space(a_op.space, u_b.space)
    au = tensor(a_op, u_b, out_space=combined)
    m1 = Operator(combined, np.sqrt(gamma * dt) * au.data)
    ada = tensor(a_op.dag() @ a_op, qcore.identity(u_b.space),
                 out_space=combined)
    m2 = Operator(combined, np.eye(combined.dim) - 0.5 * gamma * dt * ada.data)
    return m1, m2


@dataclass(frozen=True)
class GateSpaces:
    """Orthonormal bases (as matrix columns) for the decay-free subspace and
    the states that feed into it after exactly one emission."""

    space: CompositeSpace
    dark: np.ndarray
    ready: np.ndarray


def gate_protocol_spaces(a_op: Operator) -> GateSpaces:
    a = a_op.data
    dark = scipy.linalg.null_space(a)
    if dark.shape[1] == 0:
        raise ValueError("emitter operator has no dark states")
    p_dark = dark @ dark.conj().T
    # ready states map into the dark space under one application of A and
    # carry no dark component themselves
    stacked = np.vstack([(np.eye(len(a)) - p_dark) @ a, dark.conj().T])
    ready = scipy.linalg.null_space(stacked)
    if np.abs(a @ dark).max() > 1e-12:
        raise AssertionError("dark basis fails A |dark> = 0")
    return GateSpaces(a_op.space, dark, ready)


# -- cavity/qubit/reservoir realization -------------------------------------------


@dataclass(frozen=True)
class EffectiveParams:
    """Reservoir-eliminated parameters of the cavity-qubit model."""

    gamma_eff: float
    lambda_eff: float
    theta_eff: float


def effective_params(j: float, kappa_c: float, lambda_c: float) -> EffectiveParams:
    if kappa_c <= 0:
        raise ValueError("reservoir decay must be positive")
    denom = kappa_c**2 + lambda_c**2
    return EffectiveParams(
        gamma_eff=4 * j**2 * kappa_c / denom,
        lambda_eff=-4 * j**2 * lambda_c / denom,
        theta_eff=2 * np.arctan2(lambda_c, kappa_c),
    )


def lambda_c_for_angle(theta_eff: float, kappa_c: float) -> float:
    """Reservoir dispersive shift that realizes a given kick angle."""
    if not -np.pi < theta_eff < np.pi:
        raise ValueError("angle must lie strictly inside (-pi, pi)")
    return kappa_c * np.tan(theta_eff / 2)


def cavity_qubit_reservoir(j: float, kappa_c: float, lambda_c: float,
                           lambda_a: float, n_max_a: int = 2,
                           n_max_c: int = 2) -> Lindbladian:
    """Cavity -> lossy reservoir mode, both dispersively coupled to a qubit.

    Site order: (cavity, qubit, reservoir). Linear exchange J between the
    modes, dispersive shifts lambda_a and lambda_c on the two modes, decay
    kappa_c on the reservoir. Every Hamiltonian term conserves total photon
    number and the jump only lowers it, so per-mode cutoffs at the initial
    excitation count are exact.
    """
    if kappa_c <= 0:
        raise ValueError("reservoir decay must be positive")
    if n_max_a < 1 or n_max_c < 1:
        raise ValueError("mode cutoffs must be at least 1")
    sp = CompositeSpace((n_max_a + 1, 2, n_max_c + 1))
    da, dc = n_max_a + 1, n_max_c + 1
    exchange = place(sp, {0: destroy(da).dag(), 2: destroy(dc)})
    h = j * (exchange + exchange.dag())
    h = h + 0.5 * lambda_c * place(sp, {1: sigma("z"), 2: number(dc)})
    h = h + 0.5 * lambda_a * place(sp, {0: number(da), 1: sigma("z")})
    h = Operator(sp, 0.5 * (h.data + h.data.conj().T))
    jump = place(sp, {2: destroy(dc)})
    return Lindbladian(sp, h, ((float(kappa_c), jump),))


# -- two modes sharing two structured dissipators ------------------------------------


def two_mode_unitary_grid(theta: float, phi: float, gamma1: float,
                          gamma2: float) -> list[list[Operator]]:
    """Qubit-operator coefficient grid u[l][m] coupling dissipator l to
    mode m, with the rate asymmetry folded in as sqrt(rate/mean) factors."""
    if gamma1 < 0 or gamma2 < 0 or gamma1 + gamma2 == 0:
        raise ValueError("rates must be nonnegative and not both zero")
    mean = 0.5 * (gamma1 + gamma2)
    r1, r2 = np.sqrt(gamma1 / mean), np.sqrt(gamma2 / mean)
    sz, sx = sigma("z").data, sigma("x").data
    e_m = qcore.expm(-1j * phi * sz)
    e_p = qcore.expm(1j * phi * sz)
    sp = qcore.single_site(2)
    c, s = np.cos(theta), np.sin(theta)
    return [
        [Operator(sp, r1 * c * e_m), Operator(sp, -1j * r1 * s * e_m @ sx)],
        [Operator(sp, -1j * r2 * s * e_p @ sx), Operator(sp, r2 * c * e_p)],
    ]


def multi_dissipator_two_mode(theta: float, phi: float, gamma1: float,
                              gamma2: float, cutoff: int = 2) -> Lindbladian:
    """Two bosonic modes, two collective dissipators, one shared qubit.

    Each jump operator mixes the mode lowering operators with qubit-valued
    coefficients from :func:`two_mode_unitary_grid`; both dissipators run at
    the mean rate, the asymmetry living inside the grid. The mode pair is
    truncated at a total photon cutoff (the qubit site is not counted).
    """
    grid = two_mode_unitary_grid(theta, phi, gamma1, gamma2)
    mean = 0.5 * (gamma1 + gamma2)
    d = cutoff + 1
    sp = CompositeSpace((d, d, 2), cutoff=cutoff, counted=(0, 1))
    lowering = [
        place(sp, {0: destroy(d), 2: grid[0][0]}).data,
        place(sp, {1: destroy(d), 2: grid[0][1]}).data,
    ]
    z1 = Operator(sp, lowering[0] + lowering[1])
    z2 = Operator(sp, place(sp, {0: destroy(d), 2: grid[1][0]}).data
                  + place(sp, {1: destroy(d), 2: grid[1][1]}).data)
    return Lindbladian(sp, None, ((mean, z1), (mean, z2)))


@dataclass(frozen=True)
class UnitarityReport:
    """Result of the block-orthogonality test on a coefficient grid."""

    passed: bool
    normalization: float
    expected_normalization: float
    violation: np.ndarray


def generalized_unitarity_check(u_ops, atol: float = 1e-9) -> UnitarityReport:
    """Columns of the operator grid must be orthonormal as block vectors:
    sum_l u[l][m]^dag u[l][m'] = delta_mm' 1. That is exactly the condition
    under which the emitting modes decouple from the conditioned side."""
    n = len(u_ops)
    if any(len(row) != n for row in u_ops):
        raise ValueError("coefficient grid must be square")
    d = u_ops[0][0].space.dim
    eye = np.eye(d)
    viol = np.zeros((n, n))
    norm = 0.0
    for m in range(n):
        for mp in range(n):
            acc = np.zeros((d, d), dtype=complex)
            for row in u_ops:
                acc += row[m].data.conj().T @ row[mp].data
            target = eye if m == mp else 0.0
            viol[m, mp] = np.abs(acc - target).max()
    for row in u_ops:
        for op in row:
            norm += float(np.real(np.trace(op.data.conj().T @ op.data)))
    expected = float(n * d)
    passed = bool(viol.max() < atol and abs(norm - expected) < atol * expected)
    return UnitarityReport(passed, norm, expected, viol)


def generalized_unitary_from_generator(h_grid) -> list[list[Operator]]:
    """Exponentiate a hermitian block grid h[j][k] (with h[k][j] = h[j][k]^dag)
    into a coefficient grid that satisfies the block orthogonality exactly."""
    n = len(h_grid)
    if any(len(row) != n for row in h_grid):
        raise ValueError("generator grid must be square")
    sp = h_grid[0][0].space
    d = sp.dim
    big = np.zeros((n * d, n * d), dtype=complex)
    for jj in range(n):
        for kk in range(n):
            big[jj * d:(jj + 1) * d, kk * d:(kk + 1) * d] = h_grid[jj][kk].data
    if np.abs(big - big.conj().T).max() > 1e-12:
        raise ValueError("block generator is not hermitian")
    u = qcore.expm(-1j * big)
    return [
        [Operator(sp, u[jj * d:(jj + 1) * d, kk * d:(kk + 1) * d])
         for kk in range(n)]
        for jj in range(n)
    ]


def steady_state_map(u_ops, mode_index: int, ell: int) -> Channel:
    """Conditioned-side channel once mode ``mode_index`` has fully decayed
    from the Fock state with ell quanta: the single-emission Kraus map of
    that grid column, applied ell times."""
    n = len(u_ops)
    if not 0 <= mode_index < n:
        raise ValueError(f"mode index {mode_index} out of range")
    if ell < 0:
        raise ValueError("ell must be nonnegative")
    sp = u_ops[0][0].space
    d = sp.dim
    s = np.zeros((d * d, d * d), dtype=complex)
    acc = np.zeros((d, d), dtype=complex)
    for row in u_ops:
        k = row[mode_index].data
        s += np.kron(k.conj(), k)
        acc += k.conj().T @ k
    if np.abs(acc - np.eye(d)).max() > 1e-9:
        raise ValueError(
            "grid column is not isometric; the emission map is not trace "
            "preserving and no closed steady-state form applies"
        )
    return channel_from_matrix(np.linalg.matrix_power(s, ell), sp, sp)


# -- slow classical drive on the emission phase ----------------------------------------


@dataclass(frozen=True)
class BRRates:
    """Adiabatic rate estimates; in_window flags |tau * dtheta/dt| <= 0.2."""

    sigma: float
    gamma: float
    in_window: bool


def bloch_redfield_rates(g_eff: float, tau_e: float, theta, t: float,
                         h: float | None = None) -> BRRates:
    """Lamb-type shift and decay rate for an exponentially correlated
    environment whose coupling phase theta(t) drifts slowly. First order in
    the phase velocity (times tau_e) and its acceleration."""
    if tau_e <= 0:
        raise ValueError("correlation time must be positive")
    if h is None:
        h = tau_e / 50.0
    td = (theta(t + h) - theta(t - h)) / (2 * h)
    tdd = (theta(t + h) - 2 * theta(t) + theta(t - h)) / h**2
    x = tau_e * td
    sigma = -g_eff**2 * tau_e**2 * (td - tau_e * tdd)
    gamma = 2 * g_eff**2 * tau_e * (1 - x * x)
    return BRRates(float(sigma), float(gamma), bool(abs(x) <= 0.2))


def bloch_redfield_rates_exact(g_eff: float, tau_e: float, theta,
                               t: float) -> tuple[float, float]:
    """Same rates from direct quadrature of the dressed correlation
    function over the elapsed window [0, t]."""
    if tau_e <= 0:
        raise ValueError("correlation time must be positive")
    th_t = theta(t)

    def integrand(t1):
        return np.exp(-(t - t1) / tau_e) * np.exp(1j * (theta(t1) - th_t))

    re, _ = scipy.integrate.quad(lambda s: integrand(s).real, 0.0, t, limit=400)
    im, _ = scipy.integrate.quad(lambda s: integrand(s).imag, 0.0, t, limit=400)
    e_val = g_eff**2 * (re + 1j * im)
    return float(e_val.imag), float(2 * e_val.real)


# -- chirally coupled cascade through a lossy relay --------------------------------------


def chiral_cascade(gamma_a: float, gamma_c: float, lam: float, m_b: Operator,
                   n_max_a: int = 2, n_max_c: int = 2) -> Lindbladian:
    """Emitter mode -> relay mode cascade where the relay frequency is pulled
    by a conditioning operator M_B. Site order: (emitter, conditioner, relay).
    """
    if gamma_a <= 0 or gamma_c <= 0:
        raise ValueError("decay rates must be positive")
    if not m_b.is_hermitian():
        raise ValueError("conditioning operator must be hermitian")
    da, dc = n_max_a + 1, n_max_c + 1
    sp = CompositeSpace((da,) + m_b.space.dims + (dc,))
    relay_site = sp.n_sites - 1
    exchange = place(sp, {0: destroy(da).dag(), relay_site: destroy(dc)})
    h = 0.5 * np.sqrt(gamma_a * gamma_c) * (exchange + exchange.dag())
    if m_b.space.n_sites != 1:
        raise ValueError("conditioning operator must live on a single site")
    h = h + 0.5 * lam * place(sp, {1: m_b, relay_site: number(dc)})
    h = Operator(sp, 0.5 * (h.data + h.data.conj().T))
    jump = Operator(
        sp,
        np.sqrt(gamma_a) * place(sp, {0: destroy(da)}).data
        - 1j * np.sqrt(gamma_c) * place(sp, {relay_site: destroy(dc)}).data,
    )
    return Lindbladian(sp, h, ((1.0, jump),))


def cascade_effective_unitary(gamma_c: float, lam: float,
                              m_b: Operator) -> Operator:
    """Conditioning unitary left on the slow side after eliminating the
    relay: a Cayley-type transform of the pulling operator."""
    if gamma_c <= 0:
        raise ValueError("relay decay must be positive")
    if not m_b.is_hermitian():
        raise ValueError("conditioning operator must be hermitian")
    mu, v = np.linalg.eigh(m_b.data)
    phase = (gamma_c - 1j * lam * mu) / (gamma_c + 1j * lam * mu)
    return Operator(m_b.space, (v * phase[None, :]) @ v.conj().T)


def coupling_for_target_unitary(e_b: Operator, lam: float,
                                gamma_c: float) -> Operator:
    """Invert the relay elimination: find M_B whose Cayley transform equals
    exp(-i E_B). Eigenvalues of E_B must stay strictly inside (-pi, pi),
    where the tangent is finite."""
    if lam == 0:
        raise ValueError("dispersive strength must be nonzero")
    if gamma_c <= 0:
        raise ValueError("relay decay must be positive")
    if not e_b.is_hermitian():
        raise ValueError("target phase generator must be hermitian")
    e, v = np.linalg.eigh(e_b.data)
    if np.any(np.abs(e) >= np.pi - 1e-9):
        raise ValueError("target eigenphases must lie strictly inside (-pi, pi)")
    m = (gamma_c / lam) * (v * np.tan(0.5 * e)[None, :]) @ v.conj().T
    m = 0.5 * (m + m.conj().T)
    return Operator(e_b.space, m)
