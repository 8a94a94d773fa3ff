"""Completely positive maps as Choi matrices, plus channel constructors.

Choi convention: input factor first and trace normalized to the input
dimension, ``J = sum_ij |i><j| (x) Phi(|i><j|)``. With column-stacked
superoperators ``S`` this is the index reshuffle
``J[i, m, j, n] = S[n, m, j, i]``, i.e. a (3, 1, 2, 0) axis transpose,
which is its own inverse.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from . import qcore
from . import tolerances as tol
from .liouville import Lindbladian, Superoperator, liouvillian
from .qcore import CompositeSpace, Ket, Operator, _occupations


@dataclass(frozen=True)
class Channel:
    """Linear map between operator spaces, stored as its Choi matrix."""

    in_space: CompositeSpace
    out_space: CompositeSpace
    choi: np.ndarray = field(repr=False)

    def __post_init__(self):
        j = np.array(self.choi, dtype=complex)
        d = self.in_space.dim * self.out_space.dim
        if j.shape != (d, d):
            raise ValueError(f"choi shape {j.shape}, expected {(d, d)}")
        j.setflags(write=False)
        object.__setattr__(self, "choi", j)

    def _choi4(self) -> np.ndarray:
        di, do = self.in_space.dim, self.out_space.dim
        return self.choi.reshape(di, do, di, do)

    def apply(self, rho: Operator) -> Operator:
        if rho.space != self.in_space:
            raise ValueError("state lives on a different space")
        out = np.einsum("ij,imjn->mn", rho.data, self._choi4())
        return Operator(self.out_space, out)

    def superop_matrix(self) -> np.ndarray:
        """Column-stacking superoperator matrix, shape (d_out^2, d_in^2)."""
        di, do = self.in_space.dim, self.out_space.dim
        return self._choi4().transpose(3, 1, 2, 0).reshape(do * do, di * di)

    def tp_violation(self) -> float:
        """Max deviation of the output-trace of the Choi from identity."""
        di = self.in_space.dim
        red = np.einsum("imjm->ij", self._choi4())
        return float(np.abs(red - np.eye(di)).max())

    def cp_violation(self) -> float:
        """Magnitude of the most negative Choi eigenvalue (0 if none)."""
        herm = np.abs(self.choi - self.choi.conj().T).max()
        if herm > 1e-9:
            return float(herm)
        evals = np.linalg.eigvalsh(0.5 * (self.choi + self.choi.conj().T))
        return float(max(0.0, -evals.min()))

    def is_cptp(self) -> bool:
        return (self.tp_violation() < tol.CPTP_TRACE_ATOL
                and self.cp_violation() < -tol.CPTP_EIG_FLOOR)


def channel_from_matrix(matrix: np.ndarray, in_space: CompositeSpace,
                        out_space: CompositeSpace,
                        check_tp: bool = True) -> Channel:
    """Wrap a column-stacking superoperator matrix into a Channel."""
    di, do = in_space.dim, out_space.dim
    m = np.asarray(matrix, dtype=complex)
    if m.shape != (do * do, di * di):
        raise ValueError(f"superop shape {m.shape}, expected {(do*do, di*di)}")
    choi = m.reshape(do, do, di, di).transpose(3, 1, 2, 0).reshape(di * do, di * do)
    ch = Channel(in_space, out_space, choi)
    if check_tp:
        v = ch.tp_violation()
        if v > tol.CPTP_TRACE_ATOL:
            raise ValueError(f"map is not trace preserving, violation {v:.2e}")
    return ch


def channel_from_superop(s: Superoperator, check_tp: bool = True) -> Channel:
    return channel_from_matrix(s.matrix, s.space, s.space, check_tp=check_tp)


def kraus_channel(ops, space: CompositeSpace,
                  check_tp: bool = True) -> Channel:
    """Channel sum_k K rho K^dag from square Kraus operators on one space."""
    d = space.dim
    s = np.zeros((d * d, d * d), dtype=complex)
    for k in ops:
        m = k.data if isinstance(k, Operator) else np.asarray(k, dtype=complex)
        s += np.kron(m.conj(), m)
    return channel_from_matrix(s, space, space, check_tp=check_tp)


def identity_channel(space: CompositeSpace) -> Channel:
    d = space.dim
    return channel_from_matrix(np.eye(d * d), space, space)


def unitary_channel(u: Operator) -> Channel:
    if not u.is_unitary():
        raise ValueError("operator is not unitary")
    return kraus_channel([u], u.space)


def compose(e2: Channel, e1: Channel) -> Channel:
    """The map e2 after e1."""
    if e1.out_space != e2.in_space:
        raise ValueError("channel spaces do not chain")
    return channel_from_matrix(
        e2.superop_matrix() @ e1.superop_matrix(), e1.in_space, e2.out_space,
        check_tp=False,
    )


def trace_out_channel(space: CompositeSpace, keep) -> Channel:
    """Partial trace over the complement of ``keep`` as a channel."""
    keep = _normalize_keep(space, keep)
    red = space.reduced(keep)
    return channel_from_matrix(_trace_out_matrix(space, keep), space, red)


def _normalize_keep(space: CompositeSpace, keep) -> tuple[int, ...]:
    if isinstance(keep, (int, np.integer)):
        keep = (int(keep),)
    keep = tuple(sorted(set(int(s) for s in keep)))
    if not keep or any(s < 0 or s >= space.n_sites for s in keep):
        raise ValueError(f"invalid kept sites {keep}")
    return keep


@functools.lru_cache(maxsize=None)
def _trace_out_matrix(space: CompositeSpace, keep: tuple[int, ...]) -> np.ndarray:
    occ = _occupations(space)
    d = space.dim
    red = space.reduced(keep)
    dk = red.dim
    disc = [s for s in range(space.n_sites) if s not in keep]
    kept_pos = np.array(
        [red.index(tuple(row)) for row in occ[:, list(keep)]], dtype=np.intp
    )
    # integer key for the discarded-site occupations of each basis state
    enc = np.zeros(d, dtype=np.int64)
    for s in disc:
        enc = enc * space.dims[s] + occ[:, s]
    big_i, big_j = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    big_i, big_j = big_i.ravel(), big_j.ravel()
    mask = enc[big_i] == enc[big_j]
    t = np.zeros((dk * dk, d * d), dtype=complex)
    rows = kept_pos[big_j[mask]] * dk + kept_pos[big_i[mask]]
    cols = big_j[mask] * d + big_i[mask]
    t[rows, cols] = 1.0
    return t


def _state_matrix(state, dim: int) -> np.ndarray:
    if isinstance(state, Ket):
        m = state.density().data
    elif isinstance(state, Operator):
        m = state.data
    else:
        m = np.asarray(state, dtype=complex)
        if m.ndim == 1:
            m = np.outer(m, m.conj())
    if m.shape != (dim, dim):
        raise ValueError(f"fixed state shape {m.shape}, site dim {dim}")
    if abs(np.trace(m) - 1.0) > 1e-9:
        raise ValueError("fixed state does not have unit trace")
    return m


def _insertion_matrix(space: CompositeSpace, fixed: dict, keep: tuple[int, ...]
                      ) -> np.ndarray:
    occ = _occupations(space)
    d = space.dim
    red = space.reduced(keep)
    dk = red.dim
    complement = set(range(space.n_sites)) - set(keep)
    if set(fixed) != complement:
        raise ValueError(
            f"fixed sites {sorted(fixed)} must be exactly the complement "
            f"{sorted(complement)} of the kept sites"
        )
    w = np.ones((d, d), dtype=complex)
    for s, state in fixed.items():
        m = _state_matrix(state, space.dims[s])
        w *= m[np.ix_(occ[:, s], occ[:, s])]
    kept_pos = np.array(
        [red.index(tuple(row)) for row in occ[:, list(keep)]], dtype=np.intp
    )
    # the cutoff must not clip any weight of the inserted product state
    diag = np.zeros(dk)
    np.add.at(diag, kept_pos, w.diagonal().real)
    if np.abs(diag - 1.0).max() > 1e-9:
        raise ValueError(
            "fixed states put weight outside the truncated basis"
        )
    big_i, big_j = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    big_i, big_j = big_i.ravel(), big_j.ravel()
    ins = np.zeros((d * d, dk * dk), dtype=complex)
    rows = big_j * d + big_i
    cols = kept_pos[big_j] * dk + kept_pos[big_i]
    ins[rows, cols] = w.ravel()
    return ins


def conditional_reduced_channel(l: Lindbladian, fixed: dict, keep, t: float,
                                propagator: np.ndarray | None = None) -> Channel:
    """Reduced dynamics of the kept sites with the others held in fixed
    initial states: insert, propagate for time t, trace out.

    ``fixed`` maps every non-kept site index to its initial state (Ket,
    density Operator, or raw vector/matrix). ``propagator`` optionally
    reuses a precomputed expm(t * L) matrix.
    """
    keep = _normalize_keep(l.space, keep)
    if propagator is None:
        propagator = qcore.expm(t * liouvillian(l).matrix)
    ins = _insertion_matrix(l.space, fixed, keep)
    tr = _trace_out_matrix(l.space, keep)
    red = l.space.reduced(keep)
    return channel_from_matrix(tr @ propagator @ ins, red, red)


def average_gate_fidelity(e: Channel, u: Operator) -> float:
    """Average fidelity of a channel to a target unitary on the same space."""
    if e.in_space.dim != e.out_space.dim or e.in_space.dim != u.space.dim:
        raise ValueError("channel and target dimensions differ")
    if not u.is_unitary():
        raise ValueError("target is not unitary")
    d = u.space.dim
    omega = u.data.T.ravel()
    f_pro = float(np.real(omega.conj() @ e.choi @ omega)) / d**2
    return (d * f_pro + 1.0) / (d + 1.0)
