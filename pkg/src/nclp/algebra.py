"""Finite von Neumann algebras as direct sums of weighted matrix blocks.

An algebra ``M = M_{n_1} + ... + M_{n_K}`` carries the faithful trace
``tau(x) = sum_k weight_k * Tr(x_k)``.  Elements of ``M`` and of ``L_p(M)``
coincide at finite dimension and are both represented by :class:`AlgElement`.

Vectorization convention (used by every linear map in the package): blocks
are concatenated in order, each block flattened row-major.  The basis vector
with index ``offset(k) + i * n_k + j`` is the matrix unit ``e_ij`` of block k.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, StructureError

RANK_TOL = 1e-10


@dataclass(frozen=True)
class Block:
    dim: int
    weight: float = 1.0


@dataclass(frozen=True)
class FiniteVNA:
    blocks: tuple[Block, ...]

    def __post_init__(self):
        if len(self.blocks) == 0:
            raise StructureError("algebra needs at least one block")
        for b in self.blocks:
            if int(b.dim) != b.dim or b.dim < 1:
                raise StructureError(f"block dimension must be a positive integer, got {b.dim}")
            if not np.isfinite(b.weight) or b.weight <= 0:
                raise StructureError(f"block weight must be positive and finite, got {b.weight}")

    @classmethod
    def from_dims(cls, dims: Sequence[int], weights: Sequence[float] | None = None) -> "FiniteVNA":
        if weights is None:
            weights = [1.0] * len(dims)
        if len(weights) != len(dims):
            raise StructureError("dims and weights differ in length")
        return cls(tuple(Block(int(d), float(w)) for d, w in zip(dims, weights)))

    @classmethod
    def matrix(cls, n: int, weight: float = 1.0) -> "FiniteVNA":
        return cls((Block(int(n), float(weight)),))

    @classmethod
    def diagonal(cls, n: int, weights: Sequence[float] | None = None) -> "FiniteVNA":
        """The commutative algebra l_infinity^n (so L_p(M) = l_p^n)."""
        return cls.from_dims([1] * n, weights)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(b.dim for b in self.blocks)

    @property
    def weights(self) -> np.ndarray:
        return np.array([b.weight for b in self.blocks], dtype=float)

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        out, acc = [], 0
        for d in self.dims:
            out.append(acc)
            acc += d * d
        return tuple(out)

    @property
    def vec_dim(self) -> int:
        """D = sum_k n_k^2, the dimension of the algebra as a vector space."""
        return sum(d * d for d in self.dims)

    @property
    def ambient_dim(self) -> int:
        """N = sum_k n_k, the size of the full matrix algebra containing M."""
        return sum(self.dims)

    @property
    def total_trace(self) -> float:
        return float(sum(b.weight * b.dim for b in self.blocks))

    @property
    def is_abelian(self) -> bool:
        return all(d == 1 for d in self.dims)

    @cached_property
    def basis_index(self) -> tuple[tuple[int, int, int], ...]:
        """(block, row, col) for every vectorized coordinate."""
        return tuple((k, i, j) for k, n in enumerate(self.dims) for i in range(n) for j in range(n))

    @cached_property
    def weight_vector(self) -> np.ndarray:
        """Block weight attached to every vectorized coordinate."""
        return np.concatenate([np.full(d * d, b.weight) for d, b in zip(self.dims, self.blocks)])

    @cached_property
    def swap_permutation(self) -> np.ndarray:
        """Index permutation sending the coordinate of e_ij to that of e_ji (per block)."""
        perm = np.empty(self.vec_dim, dtype=int)
        for k, n in enumerate(self.dims):
            off = self.offsets[k]
            idx = np.arange(n * n).reshape(n, n)
            perm[off:off + n * n] = off + idx.T.reshape(-1)
        return perm

    # -- element constructors ----------------------------------------------

    def element(self, blocks: Sequence) -> "AlgElement":
        return AlgElement(self, tuple(np.asarray(b, dtype=complex) for b in blocks))

    def zero(self) -> "AlgElement":
        return self.element([np.zeros((n, n)) for n in self.dims])

    def identity(self) -> "AlgElement":
        return self.element([np.eye(n) for n in self.dims])

    def scalar(self, c: complex) -> "AlgElement":
        return self.identity() * c

    def unit(self, k: int, i: int, j: int) -> "AlgElement":
        """Matrix unit e_ij of block k."""
        data = [np.zeros((n, n)) for n in self.dims]
        data[k][i, j] = 1.0
        return self.element(data)

    def central(self, values: Sequence[complex]) -> "AlgElement":
        """The central element sum_k values[k] * z_k."""
        if len(values) != self.n_blocks:
            raise StructureError("one value per block expected")
        return self.element([v * np.eye(n) for v, n in zip(values, self.dims)])

    def basis(self) -> list["AlgElement"]:
        return [self.unit(k, i, j) for (k, i, j) in self.basis_index]

    def from_vec(self, v: np.ndarray) -> "AlgElement":
        v = np.asarray(v, dtype=complex)
        if v.shape != (self.vec_dim,):
            raise StructureError(f"expected vector of length {self.vec_dim}, got {v.shape}")
        return AlgElement(self, tuple(
            v[off:off + n * n].reshape(n, n).copy() for off, n in zip(self.offsets, self.dims)))

    # -- random sampling ---------------------------------------------------

    def random_element(self, rng: np.random.Generator) -> "AlgElement":
        return self.element([rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
                             for n in self.dims])

    def random_hermitian(self, rng: np.random.Generator) -> "AlgElement":
        x = self.random_element(rng)
        return (x + x.adj()) * 0.5

    def random_psd(self, rng: np.random.Generator, rank: int | None = None) -> "AlgElement":
        """Wishart-style sample g* g per block (rank-limited when ``rank`` is given)."""
        out = []
        for n in self.dims:
            r = n if rank is None else min(rank, n)
            g = rng.standard_normal((r, n)) + 1j * rng.standard_normal((r, n))
            out.append(g.conj().T @ g)
        return self.element(out)

    def random_unitary(self, rng: np.random.Generator) -> "AlgElement":
        return self.element([haar_unitary(n, rng) for n in self.dims])


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


@dataclass(frozen=True, eq=False)
class AlgElement:
    parent: FiniteVNA
    blocks: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.blocks) != self.parent.n_blocks:
            raise StructureError("number of blocks does not match the algebra")
        for b, n in zip(self.blocks, self.parent.dims):
            if b.shape != (n, n):
                raise StructureError(f"block of shape {b.shape} in a slot of dimension {n}")

    # -- arithmetic --------------------------------------------------------

    def _check(self, other: "AlgElement"):
        if not isinstance(other, AlgElement):
            raise StructureError("operand is not an algebra element")
        if other.parent != self.parent:
            raise StructureError("elements belong to different algebras")

    def __add__(self, other):
        self._check(other)
        return AlgElement(self.parent, tuple(a + b for a, b in zip(self.blocks, other.blocks)))

    def __sub__(self, other):
        self._check(other)
        return AlgElement(self.parent, tuple(a - b for a, b in zip(self.blocks, other.blocks)))

    def __neg__(self):
        return AlgElement(self.parent, tuple(-a for a in self.blocks))

    def __mul__(self, c):
        if isinstance(c, AlgElement):
            raise TypeError("use @ for the algebra product")
        return AlgElement(self.parent, tuple(a * c for a in self.blocks))

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1.0 / c)

    def __matmul__(self, other):
        self._check(other)
        return AlgElement(self.parent, tuple(a @ b for a, b in zip(self.blocks, other.blocks)))

    def adj(self) -> "AlgElement":
        return AlgElement(self.parent, tuple(a.conj().T for a in self.blocks))

    def transpose(self) -> "AlgElement":
        return AlgElement(self.parent, tuple(a.T.copy() for a in self.blocks))

    def vec(self) -> np.ndarray:
        return np.concatenate([b.reshape(-1) for b in self.blocks])

    def ambient(self) -> np.ndarray:
        """The element as a block-diagonal N x N matrix."""
        N = self.parent.ambient_dim
        out = np.zeros((N, N), dtype=complex)
        s = 0
        for b in self.blocks:
            n = b.shape[0]
            out[s:s + n, s:s + n] = b
            s += n
        return out

    def norm_inf(self) -> float:
        return max(float(np.linalg.norm(b, 2)) if b.size else 0.0 for b in self.blocks)

    def max_abs(self) -> float:
        return max(float(np.abs(b).max()) for b in self.blocks)

    def allclose(self, other: "AlgElement", atol: float = 1e-10) -> bool:
        self._check(other)
        return (self - other).max_abs() <= atol

    # -- predicates --------------------------------------------------------

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        return (self - self.adj()).max_abs() <= tol * max(1.0, self.max_abs())

    def min_eig(self) -> float:
        """Smallest eigenvalue of the Hermitian part."""
        return min(float(np.linalg.eigvalsh((b + b.conj().T) / 2)[0]) for b in self.blocks)

    def is_psd(self, tol: float = 1e-10) -> bool:
        return self.is_hermitian(tol) and self.min_eig() >= -tol * max(1.0, self.norm_inf())

    def is_projection(self, tol: float = 1e-10) -> bool:
        return self.is_hermitian(tol) and (self @ self - self).max_abs() <= tol

    def is_partial_isometry(self, tol: float = 1e-10) -> bool:
        return (self.adj() @ self).is_projection(tol)

    def is_central(self, tol: float = 1e-10) -> bool:
        for b in self.blocks:
            n = b.shape[0]
            if np.abs(b - np.trace(b) / n * np.eye(n)).max() > tol:
                return False
        return True

    def central_values(self) -> np.ndarray:
        """Scalar value per block of a central element."""
        return np.array([np.trace(b) / b.shape[0] for b in self.blocks])


# -- operations ------------------------------------------------------------

def _check_parent(M: FiniteVNA, x: AlgElement):
    if x.parent != M:
        raise StructureError("element does not belong to this algebra")


def trace(M: FiniteVNA, x: AlgElement) -> complex:
    _check_parent(M, x)
    return complex(sum(b.weight * np.trace(xb) for b, xb in zip(M.blocks, x.blocks)))


def singular_values(x: AlgElement) -> list[np.ndarray]:
    return [np.linalg.svd(b, compute_uv=False) for b in x.blocks]


def lp_norm(M: FiniteVNA, x: AlgElement, p: float) -> float:
    """tau(|x|^p)^(1/p), or the largest singular value for p = inf."""
    _check_parent(M, x)
    if p == np.inf:
        return x.norm_inf()
    if not p >= 1:
        raise DomainError(f"L_p norm needs p >= 1, got {p}")
    total = sum(w * float(np.sum(s ** p)) for w, s in zip(M.weights, singular_values(x)))
    return total ** (1.0 / p)


def lp_norm_p(M: FiniteVNA, x: AlgElement, p: float) -> float:
    """tau(|x|^p), the p-th power of the norm (no root taken)."""
    _check_parent(M, x)
    return float(sum(w * np.sum(s ** p) for w, s in zip(M.weights, singular_values(x))))


def funcalc(M: FiniteVNA, x: AlgElement, f: Callable[[np.ndarray], np.ndarray],
            tol: float = 1e-10) -> AlgElement:
    """Apply a real function to a Hermitian element through its spectral decomposition."""
    _check_parent(M, x)
    if not x.is_hermitian(tol):
        raise DomainError("functional calculus needs a Hermitian element")
    out = []
    for b in x.blocks:
        lam, U = np.linalg.eigh((b + b.conj().T) / 2)
        out.append((U * np.asarray(f(lam), dtype=complex)) @ U.conj().T)
    return AlgElement(M, tuple(out))


def _cutoff(scale: float, rel_tol: float) -> float:
    return rel_tol * max(scale, 1e-300)


def support(M: FiniteVNA, x: AlgElement, rel_tol: float = RANK_TOL) -> AlgElement:
    """Range projection of a PSD element.

    Eigenvalues below ``rel_tol`` times the largest eigenvalue (over all blocks)
    are treated as zero.
    """
    _check_parent(M, x)
    if not x.is_hermitian(1e-8):
        raise DomainError("support needs a PSD element")
    lams = [np.linalg.eigvalsh((b + b.conj().T) / 2) for b in x.blocks]
    top = max(float(np.max(np.abs(l))) for l in lams)
    cut = _cutoff(top, rel_tol)
    low = min(float(l[0]) for l in lams)
    if low < -max(1e-8 * max(top, 1.0), cut):
        raise DomainError(f"support needs a PSD element (min eigenvalue {low:.3e})")
    return funcalc(M, x, lambda t: (t > cut).astype(float), tol=1e-8)


def pinv(M: FiniteVNA, x: AlgElement, rel_tol: float = RANK_TOL) -> AlgElement:
    """Pseudo-inverse of a Hermitian element: t -> 1/t on the support, 0 elsewhere."""
    lams = [np.linalg.eigvalsh((b + b.conj().T) / 2) for b in x.blocks]
    top = max(float(np.max(np.abs(l))) for l in lams)
    cut = _cutoff(top, rel_tol)

    def inv(t):
        out = np.zeros_like(t)
        mask = np.abs(t) > cut
        out[mask] = 1.0 / t[mask]
        return out
    return funcalc(M, x, inv, tol=1e-8)


def psd_power(M: FiniteVNA, x: AlgElement, s: float, rel_tol: float = RANK_TOL) -> AlgElement:
    """x^s for PSD x; negative exponents act on the support only."""
    lams = [np.linalg.eigvalsh((b + b.conj().T) / 2) for b in x.blocks]
    top = max(float(np.max(np.abs(l))) for l in lams)
    cut = _cutoff(top, rel_tol)

    def pw(t):
        out = np.zeros_like(t)
        mask = t > cut
        out[mask] = t[mask] ** s
        return out
    return funcalc(M, x, pw, tol=1e-8)


def modulus(M: FiniteVNA, x: AlgElement) -> AlgElement:
    """|x| = (x* x)^(1/2), computed from the SVD."""
    _check_parent(M, x)
    out = []
    for b in x.blocks:
        _, s, Vh = np.linalg.svd(b)
        out.append((Vh.conj().T * s) @ Vh)
    return AlgElement(M, tuple(out))


def polar(M: FiniteVNA, x: AlgElement, rel_tol: float = RANK_TOL) -> tuple[AlgElement, AlgElement]:
    """Polar decomposition x = w b with b = |x| and w* w = s(b)."""
    _check_parent(M, x)
    top = max((float(s.max()) if s.size else 0.0) for s in singular_values(x))
    cut = rel_tol * top
    ws, bs = [], []
    for blk in x.blocks:
        U, s, Vh = np.linalg.svd(blk)
        keep = s > cut if top > 0 else np.zeros_like(s, dtype=bool)
        V = Vh.conj().T
        bs.append((V * s) @ Vh)
        ws.append(U[:, keep] @ Vh[keep, :])
    return AlgElement(M, tuple(ws)), AlgElement(M, tuple(bs))


def center_basis(M: FiniteVNA) -> list[AlgElement]:
    """Minimal central projections z_k (the identity of block k)."""
    out = []
    for k in range(M.n_blocks):
        vals = [0.0] * M.n_blocks
        vals[k] = 1.0
        out.append(M.central(vals))
    return out


def commutator_norm(x: AlgElement, y: AlgElement) -> float:
    return (x @ y - y @ x).norm_inf()
