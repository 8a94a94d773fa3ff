"""Dense linear algebra over composite, optionally truncated Hilbert spaces.

A :class:`CompositeSpace` is an ordered list of local site dimensions plus an
optional total-excitation cutoff over a chosen subset of sites. Operators and
kets are immutable wrappers that remember their space, so tensor products,
embeddings and partial traces can validate shapes and keep basis ordering
consistent (row-major, leftmost site slowest).

All arrays are dense complex ndarrays; nothing here is sparse or symbolic.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import tolerances as tol


@dataclass(frozen=True)
class CompositeSpace:
    """Ordered product of finite-dimensional sites with an optional cutoff.

    Parameters
    ----------
    dims:
        Local dimension of each site, left to right.
    cutoff:
        If given, keep only product basis states whose total occupation
        over ``counted`` sites is <= cutoff.
    counted:
        Sites participating in the cutoff sum. Defaults to all sites.
    """

    dims: tuple[int, ...]
    cutoff: int | None = None
    counted: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if any(d < 1 for d in self.dims):
            raise ValueError(f"site dimensions must be >= 1, got {self.dims}")
        if self.cutoff is not None:
            if self.cutoff < 0:
                raise ValueError("cutoff must be nonnegative")
            counted = self.counted
            if counted is None:
                counted = tuple(range(len(self.dims)))
            counted = tuple(sorted(int(s) for s in counted))
            if any(s < 0 or s >= len(self.dims) for s in counted):
                raise ValueError(f"counted sites {counted} out of range")
            object.__setattr__(self, "counted", counted)
        elif self.counted is not None:
            raise ValueError("counted requires a cutoff")

    @property
    def n_sites(self) -> int:
        return len(self.dims)

    @property
    def basis(self) -> tuple[tuple[int, ...], ...]:
        """Occupation tuples in row-major order (leftmost site slowest)."""
        return _basis(self)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def index(self, occupation) -> int:
        """Position of an occupation tuple in the basis."""
        try:
            return _index_map(self)[tuple(occupation)]
        except KeyError:
            raise ValueError(
                f"occupation {tuple(occupation)} not in space {self}"
            ) from None

    def full_index(self, occupation) -> int:
        """Position the tuple would have in the untruncated product basis."""
        idx = 0
        for n, d in zip(occupation, self.dims):
            idx = idx * d + n
        return idx

    def reduced(self, keep: tuple[int, ...]) -> "CompositeSpace":
        """Space of a subset of sites, inheriting the cutoff restriction.

        The kept space's basis is exactly the set of projections of this
        space's basis onto the kept sites (discarded sites can always sit
        at occupation zero, so the cutoff carries over unchanged).
        """
        keep = tuple(sorted(keep))
        if not keep or any(s < 0 or s >= self.n_sites for s in keep):
            raise ValueError(f"invalid kept sites {keep} for {self.n_sites} sites")
        dims = tuple(self.dims[s] for s in keep)
        if self.cutoff is None:
            return CompositeSpace(dims)
        counted = tuple(keep.index(s) for s in self.counted if s in keep)
        if not counted:
            return CompositeSpace(dims)
        return CompositeSpace(dims, cutoff=self.cutoff, counted=counted)


@functools.lru_cache(maxsize=None)
def _basis(space: CompositeSpace) -> tuple[tuple[int, ...], ...]:
    states = itertools.product(*(range(d) for d in space.dims))
    if space.cutoff is None:
        return tuple(states)
    return tuple(
        s for s in states if sum(s[k] for k in space.counted) <= space.cutoff
    )


@functools.lru_cache(maxsize=None)
def _index_map(space: CompositeSpace) -> dict[tuple[int, ...], int]:
    return {occ: i for i, occ in enumerate(space.basis)}


def _occupations(space: CompositeSpace) -> np.ndarray:
    """Basis occupations as a (dim, n_sites) integer array."""
    return np.asarray(space.basis, dtype=np.intp).reshape(space.dim, space.n_sites)


@dataclass(frozen=True)
class Operator:
    """Immutable dense operator tagged with its space."""

    space: CompositeSpace
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.data, dtype=complex)
        if m.shape != (self.space.dim, self.space.dim):
            raise ValueError(
                f"operator shape {m.shape} does not match space dim {self.space.dim}"
            )
        if not np.all(np.isfinite(m)):
            raise ValueError("operator contains non-finite entries")
        m.setflags(write=False)
        object.__setattr__(self, "data", m)

    def dag(self) -> "Operator":
        return Operator(self.space, self.data.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def __add__(self, other: "Operator") -> "Operator":
        self._check_same_space(other)
        return Operator(self.space, self.data + other.data)

    def __sub__(self, other: "Operator") -> "Operator":
        self._check_same_space(other)
        return Operator(self.space, self.data - other.data)

    def __mul__(self, scalar) -> "Operator":
        return Operator(self.space, self.data * complex(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "Operator":
        return Operator(self.space, -self.data)

    def __matmul__(self, other: "Operator") -> "Operator":
        self._check_same_space(other)
        return Operator(self.space, self.data @ other.data)

    def _check_same_space(self, other):
        if not isinstance(other, Operator):
            raise TypeError(f"expected Operator, got {type(other).__name__}")
        if other.space != self.space:
            raise ValueError("operators live on different spaces")

    def is_hermitian(self, atol: float = tol.HERMITIAN_ATOL) -> bool:
        return bool(np.max(np.abs(self.data - self.data.conj().T)) < atol)

    def is_unitary(self, atol: float = tol.UNITARY_ATOL) -> bool:
        d = self.space.dim
        g = self.data.conj().T @ self.data
        return bool(np.max(np.abs(g - np.eye(d))) < atol)

    def is_density(self) -> bool:
        if not self.is_hermitian():
            return False
        if abs(self.trace() - 1.0) > tol.DENSITY_TRACE_ATOL:
            return False
        evals = np.linalg.eigvalsh(self.data)
        return bool(evals.min() > tol.POSITIVITY_FLOOR)


@dataclass(frozen=True)
class Ket:
    """Immutable normalized state vector tagged with its space."""

    space: CompositeSpace
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.amplitudes, dtype=complex).ravel()
        if v.shape != (self.space.dim,):
            raise ValueError(
                f"ket length {v.shape[0]} does not match space dim {self.space.dim}"
            )
        nrm = np.linalg.norm(v)
        if abs(nrm - 1.0) > 1e-9:
            raise ValueError(f"ket norm {nrm} is not 1")
        if abs(nrm - 1.0) > tol.KET_NORM_ATOL:
            v = v / nrm
        v.setflags(write=False)
        object.__setattr__(self, "amplitudes", v)

    def density(self) -> Operator:
        return Operator(self.space, np.outer(self.amplitudes, self.amplitudes.conj()))

    def overlap(self, other: "Ket") -> complex:
        if other.space != self.space:
            raise ValueError("kets live on different spaces")
        return complex(self.amplitudes.conj() @ other.amplitudes)


# -- constructors ---------------------------------------------------------

def single_site(dim: int) -> CompositeSpace:
    return CompositeSpace((int(dim),))


def identity(space: CompositeSpace) -> Operator:
    return Operator(space, np.eye(space.dim))


def destroy(dim: int) -> Operator:
    """Bosonic lowering operator on a dim-level site."""
    m = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1)
    return Operator(single_site(dim), m)


def number(dim: int) -> Operator:
    return Operator(single_site(dim), np.diag(np.arange(dim, dtype=float)))


def sigma(axis: str) -> Operator:
    """Qubit Pauli operator; axis in {'x', 'y', 'z', '+', '-'}."""
    mats = {
        "x": np.array([[0, 1], [1, 0]], dtype=complex),
        "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
        "z": np.array([[1, 0], [0, -1]], dtype=complex),
        "+": np.array([[0, 1], [0, 0]], dtype=complex),
        "-": np.array([[0, 0], [1, 0]], dtype=complex),
    }
    if axis not in mats:
        raise ValueError(f"unknown Pauli axis {axis!r}")
    return Operator(single_site(2), mats[axis])


def basis_ket(dim: int, n: int) -> Ket:
    v = np.zeros(dim, dtype=complex)
    v[n] = 1.0
    return Ket(single_site(dim), v)


def product_ket(space: CompositeSpace, occupation) -> Ket:
    """Basis ket of a composite space from per-site occupations."""
    v = np.zeros(space.dim, dtype=complex)
    v[space.index(occupation)] = 1.0
    return Ket(space, v)


# -- products and embeddings ----------------------------------------------

def _as_matrix(op) -> np.ndarray:
    if isinstance(op, Operator):
        return op.data
    if isinstance(op, Ket):
        return op.density().data
    return np.asarray(op, dtype=complex)


def place(space: CompositeSpace, factors: dict[int, Operator]) -> Operator:
    """Product of per-site operators, identity on every unlisted site.

    Works uniformly on truncated spaces: the (i, j) matrix element is the
    product over sites of the local factor's element between the sites'
    occupations, with identity contributing a Kronecker delta.
    """
    occ = _occupations(space)
    d = space.dim
    out = np.ones((d, d), dtype=complex)
    mats = {}
    for s, f in factors.items():
        m = _as_matrix(f)
        if m.shape != (space.dims[s], space.dims[s]):
            raise ValueError(
                f"factor at site {s} has shape {m.shape}, site dim {space.dims[s]}"
            )
        mats[s] = m
    for s in range(space.n_sites):
        if s in mats:
            out *= mats[s][np.ix_(occ[:, s], occ[:, s])]
        else:
            out *= occ[:, s, None] == occ[None, :, s]
    return Operator(space, out)


def embed(local: Operator, space: CompositeSpace, site: int) -> Operator:
    """Lift a single-site operator to the composite space."""
    return place(space, {site: local})


def tensor(a, b, out_space: CompositeSpace | None = None):
    """Tensor product of two operators or two kets.

    Site order of the result is a's sites followed by b's. If either input
    space is truncated, or the result should itself be truncated, pass
    ``out_space``: the product is formed on the concatenated basis and then
    restricted to out_space's basis.
    """
    if isinstance(a, Ket) and isinstance(b, Ket):
        dims = a.space.dims + b.space.dims
        v = np.kron(a.amplitudes, b.amplitudes)
        if out_space is None:
            if a.space.cutoff is not None or b.space.cutoff is not None:
                raise ValueError("truncated inputs need an explicit out_space")
            return Ket(CompositeSpace(dims), v)
        sel = _product_selection(a.space, b.space, out_space)
        kept = v[sel]
        nrm = np.linalg.norm(kept)
        if abs(nrm - 1.0) > 1e-9:
            raise ValueError(
                "tensor product has weight outside out_space; norm "
                f"{nrm} after restriction"
            )
        return Ket(out_space, kept)
    if isinstance(a, Operator) and isinstance(b, Operator):
        dims = a.space.dims + b.space.dims
        m = np.kron(a.data, b.data)
        if out_space is None:
            if a.space.cutoff is not None or b.space.cutoff is not None:
                raise ValueError("truncated inputs need an explicit out_space")
            return Operator(CompositeSpace(dims), m)
        sel = _product_selection(a.space, b.space, out_space)
        return Operator(out_space, m[np.ix_(sel, sel)])
    raise TypeError("tensor expects two Operators or two Kets")


def _product_selection(sa: CompositeSpace, sb: CompositeSpace,
                       out_space: CompositeSpace) -> np.ndarray:
    if out_space.dims != sa.dims + sb.dims:
        raise ValueError(
            f"out_space dims {out_space.dims} != concatenated {sa.dims + sb.dims}"
        )
    na = sa.n_sites
    db = sb.dim
    sel = np.empty(out_space.dim, dtype=np.intp)
    for i, occ in enumerate(out_space.basis):
        sel[i] = sa.index(occ[:na]) * db + sb.index(occ[na:])
    return sel


def partial_trace(op: Operator, keep) -> Operator:
    """Trace out all sites except ``keep`` (an int or tuple of site indices).

    The result lives on ``op.space.reduced(keep)``; a total-excitation
    cutoff survives restricted to the kept sites.
    """
    if isinstance(keep, (int, np.integer)):
        keep = (int(keep),)
    keep = tuple(sorted(set(int(s) for s in keep)))
    space = op.space
    if not keep or len(keep) >= space.n_sites:
        if keep == tuple(range(space.n_sites)):
            return op
        raise ValueError(f"keep={keep} must be a nonempty proper subset of sites")
    red = space.reduced(keep)
    occ = _occupations(space)
    disc = [s for s in range(space.n_sites) if s not in keep]
    kept_pos = np.array(
        [red.index(tuple(row)) for row in occ[:, keep]], dtype=np.intp
    )
    out = np.zeros((red.dim, red.dim), dtype=complex)
    groups: dict[tuple[int, ...], list[int]] = {}
    for i in range(space.dim):
        groups.setdefault(tuple(occ[i, disc]), []).append(i)
    for idx in groups.values():
        ii = np.asarray(idx, dtype=np.intp)
        out[np.ix_(kept_pos[ii], kept_pos[ii])] += op.data[np.ix_(ii, ii)]
    return Operator(red, out)


def embed_full(op: Operator) -> Operator:
    """Pad a truncated-space operator with zeros into the full product space."""
    space = op.space
    if space.cutoff is None:
        return op
    full = CompositeSpace(space.dims)
    idx = np.array([space.full_index(occ) for occ in space.basis], dtype=np.intp)
    out = np.zeros((full.dim, full.dim), dtype=complex)
    out[np.ix_(idx, idx)] = op.data
    return Operator(full, out)


# -- numerical kernels -----------------------------------------------------

def expm(m: np.ndarray) -> np.ndarray:
    """Matrix exponential with input/output sanity checks."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expm needs a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("expm input has non-finite entries")
    out = scipy.linalg.expm(m)
    if not np.all(np.isfinite(out)):
        raise ArithmeticError("expm overflowed to non-finite values")
    return out


def trace_norm(op) -> float:
    """Sum of singular values."""
    m = op.data if isinstance(op, Operator) else np.asarray(op, dtype=complex)
    return float(np.linalg.svd(m, compute_uv=False).sum())


def random_sample(kind: str, dim: int, seed):
    """Seeded random objects: 'haar_unitary', 'pure_state', or 'density'.

    The Haar unitary uses the QR decomposition of a complex Ginibre matrix
    with the phase-of-R-diagonal correction; densities are normalized
    Wishart matrices G G^dag / tr.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if kind == "haar_unitary":
        z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        q, r = np.linalg.qr(z / np.sqrt(2.0))
        ph = np.diag(r).copy()
        ph /= np.abs(ph)
        return Operator(single_site(dim), q * ph[None, :])
    if kind == "pure_state":
        v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        return Ket(single_site(dim), v / np.linalg.norm(v))
    if kind == "density":
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        w = g @ g.conj().T
        return Operator(single_site(dim), w / np.trace(w))
    raise ValueError(f"unknown sample kind {kind!r}")
