"""Markovian generators in Lindblad form and their vectorized dynamics.

Vectorization is column-stacking: ``vec(M)[c*d + r] = M[r, c]``, so a
sandwich ``A rho B`` becomes ``(B^T kron A) vec(rho)``. Everything downstream
(propagators, Choi matrices, conditional channels) sticks to this convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.integrate
import scipy.linalg

from . import qcore
from . import tolerances as tol
from .qcore import CompositeSpace, Operator


@dataclass(frozen=True)
class Lindbladian:
    """Generator data: optional Hamiltonian plus (rate, jump operator) pairs."""

    space: CompositeSpace
    hamiltonian: Operator | None = None
    jumps: tuple[tuple[float, Operator], ...] = ()

    def __post_init__(self):
        jumps = tuple((float(r), op) for r, op in self.jumps)
        object.__setattr__(self, "jumps", jumps)
        h = self.hamiltonian
        if h is not None:
            if h.space != self.space:
                raise ValueError("hamiltonian lives on a different space")
            if not h.is_hermitian():
                raise ValueError("hamiltonian is not hermitian")
        for r, op in jumps:
            if r < 0:
                raise ValueError(f"negative jump rate {r}")
            if op.space != self.space:
                raise ValueError("jump operator lives on a different space")


@dataclass(frozen=True)
class Superoperator:
    """Dense matrix acting on column-stacked operators of a space."""

    space: CompositeSpace
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        d2 = self.space.dim ** 2
        if m.shape != (d2, d2):
            raise ValueError(
                f"superoperator shape {m.shape} does not match dim^2 {d2}"
            )
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __matmul__(self, other: "Superoperator") -> "Superoperator":
        if other.space != self.space:
            raise ValueError("superoperators live on different spaces")
        return Superoperator(self.space, self.matrix @ other.matrix)

    def apply(self, rho: Operator) -> Operator:
        if rho.space != self.space:
            raise ValueError("state lives on a different space")
        d = self.space.dim
        return Operator(self.space, unvec(self.matrix @ vec(rho.data), d))


def vec(m: np.ndarray) -> np.ndarray:
    """Column-stack a matrix into a vector."""
    return np.asarray(m, dtype=complex).T.reshape(-1)


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    """Inverse of :func:`vec` for a d x d matrix."""
    return np.asarray(v, dtype=complex).reshape(d, d).T


def apply_generator(l: Lindbladian, rho: Operator) -> Operator:
    """Right-hand side of the master equation, evaluated directly."""
    if rho.space != l.space:
        raise ValueError("state lives on a different space")
    r = rho.data
    out = np.zeros_like(r)
    if l.hamiltonian is not None:
        h = l.hamiltonian.data
        out += -1j * (h @ r - r @ h)
    for rate, op in l.jumps:
        m = op.data
        md = m.conj().T
        mdm = md @ m
        out += rate * (m @ r @ md - 0.5 * (mdm @ r + r @ mdm))
    return Operator(l.space, out)


def liouvillian(l: Lindbladian) -> Superoperator:
    """Vectorized generator matrix."""
    d = l.space.dim
    eye = np.eye(d)
    mat = np.zeros((d * d, d * d), dtype=complex)
    if l.hamiltonian is not None:
        h = l.hamiltonian.data
        mat += -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for rate, op in l.jumps:
        m = op.data
        mdm = m.conj().T @ m
        mat += rate * (
            np.kron(m.conj(), m)
            - 0.5 * np.kron(eye, mdm)
            - 0.5 * np.kron(mdm.T, eye)
        )
    return Superoperator(l.space, mat)


def _check_trajectory_state(r: np.ndarray, t: float) -> np.ndarray:
    drift = abs(np.trace(r) - 1.0)
    if drift > tol.PROPAGATION_TRACE_ATOL:
        raise ArithmeticError(f"trace drifted by {drift:.2e} at t={t}")
    herm = np.abs(r - r.conj().T).max()
    if herm > tol.PROPAGATION_HERM_ATOL:
        r = 0.5 * (r + r.conj().T)
    return r


def propagate(l: Lindbladian, rho0: Operator, times,
              method: str = "expm") -> list[Operator]:
    """Evolve a density matrix along a nondecreasing time grid.

    method 'expm' steps with cached matrix exponentials of the generator;
    'rk' integrates the vectorized ODE with a high-order adaptive scheme.
    The two agree to ~1e-8 on well-conditioned problems and the test suite
    holds them to that.
    """
    if rho0.space != l.space:
        raise ValueError("initial state lives on a different space")
    if not rho0.is_density():
        raise ValueError("initial state is not a density matrix")
    times = np.asarray(list(times), dtype=float)
    if times.size == 0:
        return []
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise ValueError("times must be nonnegative and nondecreasing")
    d = l.space.dim
    lv = liouvillian(l).matrix
    states = []
    if method == "expm":
        steps: dict[float, np.ndarray] = {}
        v = vec(rho0.data)
        prev = 0.0
        for t in times:
            dt = t - prev
            if dt > 0:
                if dt not in steps:
                    steps[dt] = qcore.expm(lv * dt)
                v = steps[dt] @ v
                prev = t
            r = _check_trajectory_state(unvec(v, d), t)
            v = vec(r)
            states.append(Operator(l.space, r))
        return states
    if method == "rk":
        t_end = float(times[-1])
        if t_end == 0.0:
            return [rho0 for _ in times]
        sol = scipy.integrate.solve_ivp(
            lambda _t, y: lv @ y,
            (0.0, t_end),
            vec(rho0.data),
            t_eval=times,
            method="DOP853",
            rtol=1e-10,
            atol=1e-12,
        )
        if not sol.success:
            raise ArithmeticError(f"integration failed: {sol.message}")
        for k, t in enumerate(times):
            r = _check_trajectory_state(unvec(sol.y[:, k], d), t)
            states.append(Operator(l.space, r))
        return states
    raise ValueError(f"unknown method {method!r}")


def asymptotic_channel(l: Lindbladian):
    """Infinite-time propagator as a channel: the spectral projector onto
    the generator's kernel along its decaying eigenspaces.

    Raises if the generator has growing modes or a rotating steady manifold
    (kernel-circle eigenvalues with persistent imaginary parts), since no
    time-independent limit exists there.
    """
    from . import channels

    lv = liouvillian(l).matrix
    w, vl, vr = scipy.linalg.eig(lv, left=True, right=True)
    if np.any(w.real > tol.KERNEL_REAL_ATOL):
        raise ArithmeticError(
            f"generator has growing modes, max Re = {w.real.max():.2e}"
        )
    on_axis = np.abs(w.real) < tol.KERNEL_REAL_ATOL
    rotating = on_axis & (np.abs(w.imag) > tol.KERNEL_IMAG_ATOL)
    if np.any(rotating):
        freqs = np.sort(w.imag[rotating])
        raise ArithmeticError(
            f"rotating steady manifold, persistent frequencies {freqs}"
        )
    kernel = on_axis & ~rotating
    if not np.any(kernel):
        raise ArithmeticError("no steady manifold found")
    vrk = vr[:, kernel]
    vlk = vl[:, kernel]
    overlap = vlk.conj().T @ vrk
    if np.linalg.cond(overlap) > 1e10:
        raise ArithmeticError("kernel eigenbasis is numerically defective")
    proj = vrk @ np.linalg.solve(overlap, vlk.conj().T)
    scale = max(1.0, float(np.abs(lv).max()))
    if (np.abs(proj @ proj - proj).max() > 1e-8
            or np.abs(proj @ lv).max() > 1e-7 * scale):
        raise ArithmeticError("spectral projector failed consistency checks")
    return channels.channel_from_superop(Superoperator(l.space, proj))
