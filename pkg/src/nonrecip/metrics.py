"""Distinguishability metrics and directionality diagnostics.

The central quantity is the diamond-norm distance between two channels,
evaluated by two independent routes: a seesaw ascent over entangled probe
states (fast, used inside optimizers) and a semidefinite program (used to
certify). Isolation of a subsystem is one minus half the largest diamond
distance between its reduced dynamics conditioned on two initial states of
the other subsystem.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.optimize

from . import qcore
from . import tolerances as tol
from .channels import Channel, conditional_reduced_channel
from .liouville import Lindbladian, liouvillian
from .qcore import CompositeSpace, Ket, Operator


class EvaluatorDisagreement(ArithmeticError):
    """The two diamond-norm evaluators returned incompatible values."""


# -- diamond norm: seesaw ascent ------------------------------------------------


def _superop4(s: np.ndarray, din: int, dout: int):
    s4 = s.reshape(dout, dout, din, din)
    s_adj4 = s.conj().T.reshape(din, din, dout, dout)
    return s4, s_adj4


def _ascent_run(s4, s_adj4, din, dout, psi, max_iter=4000, ftol=None):
    """Alternate between the optimal discriminating observable and the
    optimal probe state; the objective ||(Delta x id)(psi psi*)||_1 is
    nondecreasing along the iteration. Convergence is linear and can be
    slow near degenerate optima, so accurate evaluations need a generous
    iteration budget; guidance evaluations inside optimizers get by with
    far less (and a looser ftol, or they burn the whole budget)."""
    if ftol is None:
        ftol = tol.DIAMOND_ASCENT_FTOL
    da = din
    f = 0.0
    for _ in range(max_iter):
        x4 = np.outer(psi, psi.conj()).reshape(din, da, din, da)
        y = np.einsum("nmji,iajb->manb", s4, x4).reshape(dout * da, dout * da)
        y = 0.5 * (y + y.conj().T)
        w, v = np.linalg.eigh(y)
        f_new = float(np.abs(w).sum())
        converged = f_new - f < ftol * max(1.0, f_new)
        f = max(f, f_new)
        if converged:
            break
        wit = (v * np.sign(w)[None, :]) @ v.conj().T
        k = np.einsum(
            "jinm,manb->iajb", s_adj4, wit.reshape(dout, da, dout, da)
        ).reshape(din * da, din * da)
        k = 0.5 * (k + k.conj().T)
        kw, kv = np.linalg.eigh(k)
        psi = kv[:, -1]
    return f, psi


def _ascent_starts(din, n_random, rng, warm=None):
    da = din
    starts = []
    if warm is not None:
        starts.append(warm)
    omega = np.eye(din).ravel() / np.sqrt(din)  # maximally entangled probe
    starts.append(omega)
    for _ in range(n_random):
        v = rng.standard_normal(din * da) + 1j * rng.standard_normal(din * da)
        starts.append(v / np.linalg.norm(v))
    return starts


def _diamond_ascent(delta_s, din, dout, restarts=16, seed=0, warm=None,
                    max_iter=4000, ftol=None):
    s4, s_adj4 = _superop4(delta_s, din, dout)
    rng = np.random.default_rng(seed)
    n_random = max(0, restarts - 1 - (warm is not None))
    best_f, best_psi = -np.inf, None
    for psi in _ascent_starts(din, n_random, rng, warm):
        f, psi_out = _ascent_run(s4, s_adj4, din, dout, psi,
                                 max_iter=max_iter, ftol=ftol)
        if f > best_f:
            best_f, best_psi = f, psi_out
    return max(0.0, best_f), best_psi


# -- diamond norm: semidefinite program ------------------------------------------


def _diamond_sdp(choi_delta, din, dout):
    """Hypothesis-testing SDP for the diamond norm of a hermiticity-
    preserving map: maximize <J, W> over 0 <= W <= rho (x) 1."""
    import cvxpy as cp

    j = np.asarray(choi_delta)
    if np.abs(j - j.conj().T).max() > 1e-10:
        raise ValueError("SDP route needs a hermiticity-preserving difference")
    j = 0.5 * (j + j.conj().T)
    w = cp.Variable((din * dout, din * dout), hermitian=True)
    rho = cp.Variable((din, din), hermitian=True)
    constraints = [
        w >> 0,
        rho >> 0,
        cp.trace(rho) == 1,
        cp.kron(rho, np.eye(dout)) - w >> 0,
    ]
    problem = cp.Problem(cp.Maximize(cp.real(cp.trace(j @ w))), constraints)
    try:
        problem.solve(solver=cp.CVXOPT)
    except cp.error.SolverError:
        problem.solve(solver=cp.SCS, eps=1e-9, max_iters=50000)
    if problem.status not in ("optimal", "optimal_inaccurate"):
        raise ArithmeticError(f"diamond SDP ended with status {problem.status}")
    return float(2.0 * problem.value)


def diamond_distance(e1: Channel, e2: Channel, method: str = "ascent",
                     restarts: int = 16, seed: int = 0) -> float:
    """Diamond-norm distance between two channels on matching spaces.

    method 'ascent' runs the multistart seesaw, 'sdp' solves the
    semidefinite program, 'both' runs the two and raises
    :class:`EvaluatorDisagreement` if they differ beyond tolerance.
    """
    if e1.in_space.dim != e2.in_space.dim or e1.out_space.dim != e2.out_space.dim:
        raise ValueError("channels live on different spaces")
    din, dout = e1.in_space.dim, e1.out_space.dim
    if method == "ascent":
        val, _ = _diamond_ascent(
            e1.superop_matrix() - e2.superop_matrix(), din, dout,
            restarts=restarts, seed=seed,
        )
        return min(2.0, val)
    if method == "sdp":
        return min(2.0, max(0.0, _diamond_sdp(e1.choi - e2.choi, din, dout)))
    if method == "both":
        a = diamond_distance(e1, e2, "ascent", restarts=restarts, seed=seed)
        s = diamond_distance(e1, e2, "sdp")
        if abs(a - s) > tol.DIAMOND_AGREEMENT_ATOL:
            raise EvaluatorDisagreement(
                f"ascent {a:.9f} vs sdp {s:.9f} differ by {abs(a - s):.2e}"
            )
        return max(a, s)
    raise ValueError(f"unknown method {method!r}")


def distinguish_probability(e1: Channel, e2: Channel, **kwargs) -> float:
    """Optimal single-shot success probability for telling two channels apart."""
    return 0.5 + 0.25 * diamond_distance(e1, e2, **kwargs)


# -- isolation -------------------------------------------------------------------


@dataclass(frozen=True)
class IsolationReport:
    """Isolation value with the conditioning pair that realized it."""

    value: float
    distance: float
    pair: tuple[np.ndarray, np.ndarray]
    mode: str
    optimizer: dict | None = None


def _as_state_vector(state, dim):
    if isinstance(state, Ket):
        v = state.amplitudes
    else:
        v = np.asarray(state, dtype=complex).ravel()
    if v.shape != (dim,):
        raise ValueError(f"state length {v.shape}, expected {dim}")
    return v / np.linalg.norm(v)


def isolation(l: Lindbladian, probed, other: int, t: float,
              mode: str = "optimized", pair=None, fixed_rest: dict | None = None,
              restarts: int = 24, seed: int = 0,
              diamond_restarts: int = 6) -> IsolationReport:
    """How independent the probed sites' reduced dynamics is of the initial
    state of site ``other``, at time t: 1 minus half the worst-case diamond
    distance over pairs of initial pure states of ``other``.

    mode 'conditional' scores one given ``pair`` of states; 'optimized'
    searches over pairs with a multistart simplex search (a worst case, so
    any reported value is an upper bound on the true isolation). Remaining
    sites, if any, are pinned with ``fixed_rest``.
    """
    if isinstance(probed, (int, np.integer)):
        probed = (int(probed),)
    probed = tuple(sorted(probed))
    other = int(other)
    fixed_rest = dict(fixed_rest or {})
    sites = set(range(l.space.n_sites))
    if set(probed) | {other} | set(fixed_rest) != sites or other in probed:
        raise ValueError("probed, other and fixed_rest must partition the sites")
    d_o = l.space.dims[other]
    prop = qcore.expm(t * liouvillian(l).matrix)

    def build(phi):
        return conditional_reduced_channel(
            l, {other: phi, **fixed_rest}, probed, t, propagator=prop
        )

    red_dim = l.space.reduced(probed).dim
    warm = {"psi": None}

    def dist(phi1, phi2, n_starts, seed_, max_iter=4000, ftol=None):
        c1, c2 = build(phi1), build(phi2)
        val, psi = _diamond_ascent(
            c1.superop_matrix() - c2.superop_matrix(), red_dim, red_dim,
            restarts=n_starts, seed=seed_, warm=warm["psi"],
            max_iter=max_iter, ftol=ftol,
        )
        warm["psi"] = psi
        return val

    if mode == "conditional":
        if pair is None:
            raise ValueError("conditional mode needs an explicit pair")
        v1 = _as_state_vector(pair[0], d_o)
        v2 = _as_state_vector(pair[1], d_o)
        d = dist(v1, v2, diamond_restarts, seed)
        return IsolationReport(
            value=float(np.clip(1.0 - 0.5 * d, 0.0, 1.0)),
            distance=d, pair=(v1, v2), mode=mode,
        )
    if mode != "optimized":
        raise ValueError(f"unknown mode {mode!r}")

    rng = np.random.default_rng(seed)
    evals = {"n": 0}

    def unpack(x):
        v1 = x[:d_o] + 1j * x[d_o:2 * d_o]
        v2 = x[2 * d_o:3 * d_o] + 1j * x[3 * d_o:]
        n1, n2 = np.linalg.norm(v1), np.linalg.norm(v2)
        if n1 < 1e-8 or n2 < 1e-8:
            return None
        return v1 / n1, v2 / n2

    def objective(x):
        evals["n"] += 1
        upk = unpack(x)
        if upk is None:
            return 0.0
        return -dist(upk[0], upk[1], 2, seed, max_iter=300, ftol=1e-10)

    def pack(v1, v2):
        return np.concatenate([v1.real, v1.imag, v2.real, v2.imag])

    starts = []
    for i in range(d_o):          # orthogonal basis pairs seed the search
        for j in range(i + 1, d_o):
            e_i = np.zeros(d_o, dtype=complex)
            e_j = np.zeros(d_o, dtype=complex)
            e_i[i], e_j[j] = 1.0, 1.0
            starts.append(pack(e_i, e_j))
    if d_o == 2:
        plus = np.array([1, 1], dtype=complex) / np.sqrt(2)
        minus = np.array([1, -1], dtype=complex) / np.sqrt(2)
        starts.append(pack(plus, minus))
        plus_i = np.array([1, 1j], dtype=complex) / np.sqrt(2)
        minus_i = np.array([1, -1j], dtype=complex) / np.sqrt(2)
        starts.append(pack(plus_i, minus_i))
    while len(starts) < restarts:
        # worst-case pairs tend to be orthogonal, so seed with random
        # orthonormal pairs rather than unstructured vectors
        u = qcore.random_sample(
            "haar_unitary", d_o, int(rng.integers(1 << 31))).data
        starts.append(pack(u[:, 0], u[:, 1]))

    results = []
    for x0 in starts[:restarts]:
        res = scipy.optimize.minimize(
            objective, x0, method="Nelder-Mead",
            options={"maxfev": 400 * d_o, "fatol": 1e-8, "xatol": 1e-6},
        )
        results.append(res)
    results.sort(key=lambda r: r.fun)
    polished = []
    for res in results[:3]:       # refine the best basins
        fine = scipy.optimize.minimize(
            objective, res.x, method="Nelder-Mead",
            options={"maxfev": 800 * d_o, "fatol": 1e-11, "xatol": 1e-8},
        )
        polished.append(fine)
    best = min(polished + results[:3], key=lambda r: r.fun)
    v1, v2 = unpack(best.x)
    d = dist(v1, v2, diamond_restarts, seed + 1)
    return IsolationReport(
        value=float(np.clip(1.0 - 0.5 * d, 0.0, 1.0)),
        distance=d, pair=(v1, v2), mode=mode,
        optimizer={
            "restarts": restarts,
            "objective_evaluations": evals["n"],
            "best_objective": -best.fun,
        },
    )


# -- spectral bound on attainable isolation ---------------------------------------


@dataclass(frozen=True)
class BoundReport:
    """Upper bounds on the conditioned side's isolation.

    ``value`` comes from the distance between the origin and the convex
    hull of the conditioning unitary's spectrum (authoritative);
    ``pairwise`` keeps only eigenvalue pairs and can overestimate once the
    spectrum spans more than a half circle.
    """

    value: float
    pairwise: float


def _origin_to_segment(p1: complex, p2: complex) -> float:
    d = p2 - p1
    dd = abs(d) ** 2
    if dd < 1e-30:
        return abs(p1)
    t = np.clip(-np.real(np.conj(d) * p1) / dd, 0.0, 1.0)
    return abs(p1 + t * d)


def _origin_to_hull(points: np.ndarray) -> float:
    if len(points) == 1:
        return float(abs(points[0]))
    angles = np.sort(np.angle(points))
    gaps = np.diff(np.concatenate([angles, [angles[0] + 2 * np.pi]]))
    if gaps.max() < np.pi - 1e-12:
        return 0.0  # origin inside the hull
    best = float(np.abs(points).min())
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            best = min(best, _origin_to_segment(points[i], points[j]))
    return best


def target_isolation_bound(u: Operator, ell: int) -> BoundReport:
    """Isolation ceiling for the side conjugated by u once the other side
    has emitted ell quanta."""
    if not u.is_unitary():
        raise ValueError("conditioning operator is not unitary")
    if ell < 0:
        raise ValueError("ell must be nonnegative")
    lam = np.linalg.eigvals(u.data)
    pts = lam ** ell
    dist = _origin_to_hull(pts)
    value = 1.0 - np.sqrt(max(0.0, 1.0 - dist * dist))
    betas = np.angle(lam)
    sines = [
        abs(np.sin(0.5 * ell * (bm - bn)))
        for k, bm in enumerate(betas) for bn in betas[k + 1:]
    ]
    pairwise = 1.0 - (max(sines) if sines else 0.0)
    return BoundReport(value=float(value), pairwise=float(pairwise))


# -- classification ----------------------------------------------------------------


def classify(iso_a, iso_b, eps_eq: float = 1e-6, eps_lt: float = 1e-3) -> str:
    """Label a pair of isolation traces sampled on a common time grid.

    Equality of the traces everywhere means the dynamics is reciprocal.
    One side pinned at 1 while the other drops marks a one-way influence;
    the other side reaching 0 makes it maximal.
    """
    a = np.asarray(iso_a, dtype=float)
    b = np.asarray(iso_b, dtype=float)
    if a.shape != b.shape or a.ndim != 1 or a.size == 0:
        raise ValueError("isolation traces must be equal-length 1d arrays")
    a_pinned = np.all(a >= 1.0 - eps_eq)
    b_pinned = np.all(b >= 1.0 - eps_eq)
    if a_pinned and np.any(b < 1.0 - eps_lt):
        if np.min(b) <= eps_lt:
            return "maximally_unidirectional_a_to_b"
        return "unidirectional_a_to_b"
    if b_pinned and np.any(a < 1.0 - eps_lt):
        if np.min(a) <= eps_lt:
            return "maximally_unidirectional_b_to_a"
        return "unidirectional_b_to_a"
    if np.max(np.abs(a - b)) <= eps_eq:
        return "reciprocal"
    return "nonreciprocal"


# -- closed forms -------------------------------------------------------------------


def dephasing_isolation_closed_form(h_a: Operator, xi_a: Operator,
                                    t: float) -> float:
    """Both-sided isolation of a system dephasing-coupled to a qubit.

    With total Hamiltonian H (x) 1 + Xi (x) sigma_z the two conditioned
    branch propagators differ by the interference unitary
    exp(+i(H - Xi)t) exp(-i(H + Xi)t); its eigenphase spread sets a common
    isolation for both sides.
    """
    if h_a.space != xi_a.space:
        raise ValueError("operators live on different spaces")
    if not (h_a.is_hermitian() and xi_a.is_hermitian()):
        raise ValueError("inputs must be hermitian")
    up = qcore.expm(-1j * t * (h_a.data + xi_a.data))
    down = qcore.expm(-1j * t * (h_a.data - xi_a.data))
    lam = np.linalg.eigvals(down.conj().T @ up)
    # down^dag up is the branch mismatch: eigenvalues on the unit circle
    phases = np.angle(lam)
    worst = 0.0
    for k, pm in enumerate(phases):
        for pn in phases[k + 1:]:
            worst = max(worst, abs(np.sin(0.5 * (pm - pn))))
    return 1.0 - worst


# -- entanglement -------------------------------------------------------------------


def log_negativity(rho: Operator, transposed_sites) -> float:
    """Logarithmic negativity across the bipartition defined by the
    partially transposed sites. Truncated states are padded back into the
    full product space first."""
    if isinstance(transposed_sites, (int, np.integer)):
        transposed_sites = (int(transposed_sites),)
    sites = tuple(sorted(set(int(s) for s in transposed_sites)))
    full = qcore.embed_full(rho)
    dims = full.space.dims
    n = len(dims)
    if any(s < 0 or s >= n for s in sites):
        raise ValueError(f"invalid sites {sites}")
    arr = full.data.reshape(dims + dims)
    for s in sites:
        arr = np.swapaxes(arr, s, s + n)
    d = full.space.dim
    pt = arr.reshape(d, d)
    return max(0.0, float(np.log2(qcore.trace_norm(pt))))
