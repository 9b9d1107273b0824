"""Linear maps on L_p(M) as dense matrices over the vectorized algebra.

Every :class:`LpOperator` carries its D x D matrix in the vectorization of
:mod:`nclp.algebra` and, optionally, the structured description it was built
from.  Structured forms survive only the operations that preserve them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .algebra import AlgElement, FiniteVNA, lp_norm
from .errors import DomainError, StructureError


# -- structured forms --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Kraus:
    """x -> sum_i a_i^* x b_i."""
    a: tuple[AlgElement, ...]
    b: tuple[AlgElement, ...]


@dataclass(frozen=True, eq=False)
class Conjugation:
    """x -> r x r^*."""
    r: AlgElement


@dataclass(frozen=True, eq=False)
class Schur:
    """Entrywise multiplication x -> m o x within every block."""
    m: AlgElement


@dataclass(frozen=True, eq=False)
class WbJTriple:
    """x -> w b J(x)."""
    w: AlgElement
    b: AlgElement
    J: "JordanMap"


def _check_same(M: FiniteVNA, x: AlgElement):
    if x.parent != M:
        raise StructureError("element does not belong to the operator's algebra")


def matrix_of(M: FiniteVNA, f: Callable[[AlgElement], AlgElement]) -> np.ndarray:
    """Dense matrix of a linear map given by its action on elements."""
    D = M.vec_dim
    out = np.empty((D, D), dtype=complex)
    for a, e in enumerate(M.basis()):
        out[:, a] = f(e).vec()
    return out


@dataclass(frozen=True, eq=False)
class LpOperator:
    parent: FiniteVNA
    matrix: np.ndarray
    form: object = None

    def __post_init__(self):
        D = self.parent.vec_dim
        if self.matrix.shape != (D, D):
            raise StructureError(f"operator matrix must be {D}x{D}, got {self.matrix.shape}")

    def __call__(self, x: AlgElement) -> AlgElement:
        return apply(self, x)

    @property
    def kind(self) -> str:
        return {Kraus: "kraus", Conjugation: "conjugation", Schur: "schur",
                WbJTriple: "wbj"}.get(type(self.form), "dense")

    def structured_apply(self, x: AlgElement) -> AlgElement:
        """Evaluate the structured form directly (no dense matrix)."""
        f = self.form
        if isinstance(f, Conjugation):
            return f.r @ x @ f.r.adj()
        if isinstance(f, Kraus):
            out = self.parent.zero()
            for a, b in zip(f.a, f.b):
                out = out + a.adj() @ x @ b
            return out
        if isinstance(f, Schur):
            return AlgElement(self.parent, tuple(m * xb for m, xb in zip(f.m.blocks, x.blocks)))
        if isinstance(f, WbJTriple):
            return f.w @ f.b @ f.J(x)
        return apply(self, x)


def apply(T: LpOperator, x: AlgElement) -> AlgElement:
    _check_same(T.parent, x)
    return T.parent.from_vec(T.matrix @ x.vec())


def from_function(M: FiniteVNA, f: Callable[[AlgElement], AlgElement]) -> LpOperator:
    return LpOperator(M, matrix_of(M, f))


def from_matrix(M: FiniteVNA, matrix) -> LpOperator:
    return LpOperator(M, np.asarray(matrix, dtype=complex))


def identity_op(M: FiniteVNA) -> LpOperator:
    return LpOperator(M, np.eye(M.vec_dim, dtype=complex))


def zero_op(M: FiniteVNA) -> LpOperator:
    return LpOperator(M, np.zeros((M.vec_dim, M.vec_dim), dtype=complex))


def conjugation(r: AlgElement) -> LpOperator:
    M = r.parent
    return LpOperator(M, matrix_of(M, lambda x: r @ x @ r.adj()), Conjugation(r))


def kraus(a: Sequence[AlgElement], b: Sequence[AlgElement]) -> LpOperator:
    if len(a) != len(b) or not a:
        raise StructureError("Kraus form needs two nonempty lists of equal length")
    M = a[0].parent
    form = Kraus(tuple(a), tuple(b))

    def act(x):
        out = M.zero()
        for ai, bi in zip(a, b):
            out = out + ai.adj() @ x @ bi
        return out
    return LpOperator(M, matrix_of(M, act), form)


def schur(m: AlgElement) -> LpOperator:
    M = m.parent
    diag = m.vec()
    return LpOperator(M, np.diag(diag), Schur(m))


def transpose_op(M: FiniteVNA) -> LpOperator:
    """x -> x^T blockwise; positive but not completely positive on M_n, n >= 2."""
    D = M.vec_dim
    P = np.zeros((D, D), dtype=complex)
    P[M.swap_permutation, np.arange(D)] = 1.0
    return LpOperator(M, P)


def from_wbj(w: AlgElement, b: AlgElement, J: "JordanMap") -> LpOperator:
    M = w.parent
    wb = w @ b
    return LpOperator(M, matrix_of(M, lambda x: wb @ J(x)), WbJTriple(w, b, J))


# -- calculus ----------------------------------------------------------------

def _pairing_matrix(M: FiniteVNA) -> np.ndarray:
    """G with tau(x y) = vec(x)^T G vec(y)."""
    D = M.vec_dim
    G = np.zeros((D, D))
    G[np.arange(D), M.swap_permutation] = M.weight_vector
    return G


def adjoint(T: LpOperator) -> LpOperator:
    """Trace-duality adjoint: tau(T(x) y) = tau(x T*(y)) (bilinear pairing)."""
    M = T.parent
    G = _pairing_matrix(M)
    Ginv = G / M.weight_vector[:, np.newaxis] ** 2
    mat = Ginv @ T.matrix.T @ G
    form = None
    f = T.form
    if isinstance(f, Conjugation):
        form = Conjugation(f.r.adj())
    elif isinstance(f, Kraus):
        form = Kraus(tuple(b.adj() for b in f.b), tuple(a.adj() for a in f.a))
    elif isinstance(f, Schur):
        form = Schur(f.m.transpose())
    return LpOperator(M, mat, form)


def compose(S: LpOperator, T: LpOperator) -> LpOperator:
    """S o T."""
    if S.parent != T.parent:
        raise StructureError("operators act on different algebras")
    form = None
    if isinstance(S.form, Conjugation) and isinstance(T.form, Conjugation):
        form = Conjugation(S.form.r @ T.form.r)
    return LpOperator(S.parent, S.matrix @ T.matrix, form)


def scale(alpha: complex, T: LpOperator) -> LpOperator:
    return LpOperator(T.parent, alpha * T.matrix)


def power(T: LpOperator, n: int) -> LpOperator:
    if n < 0:
        raise DomainError("negative powers need an explicit inverse")
    form = None
    if isinstance(T.form, Conjugation):
        r = T.form.r
        rn = T.parent.identity()
        for _ in range(n):
            rn = rn @ r
        form = Conjugation(rn)
    return LpOperator(T.parent, np.linalg.matrix_power(T.matrix, n), form)


def convex_combine(weights: Sequence[float], ops: Sequence[LpOperator], tol: float = 1e-12) -> LpOperator:
    lam = np.asarray(weights, dtype=float)
    if len(lam) != len(ops) or len(ops) == 0:
        raise DomainError("one weight per operator required")
    if np.any(lam < -tol) or abs(lam.sum() - 1.0) > 1e-9:
        raise DomainError("convex weights must be nonnegative and sum to 1")
    M = ops[0].parent
    if any(T.parent != M for T in ops):
        raise StructureError("operators act on different algebras")
    mat = sum(l * T.matrix for l, T in zip(lam, ops))
    return LpOperator(M, mat)


def operator_distance(S: LpOperator, T: LpOperator) -> float:
    """Largest entrywise deviation of the two dense matrices."""
    return float(np.abs(S.matrix - T.matrix).max())


# -- positivity ----------------------------------------------------------------

@dataclass(frozen=True)
class CPCheck:
    is_cp: bool
    min_eig: float


def choi_matrix(T: LpOperator) -> np.ndarray:
    """Choi matrix sum_ij E_ij (x) T(E(E_ij)) of T o E on the ambient M_N.

    E is the block-diagonal compression M_N -> M.
    """
    M = T.parent
    N = M.ambient_dim
    starts = np.cumsum((0,) + M.dims[:-1])
    C = np.zeros((N * N, N * N), dtype=complex)
    for (k, i, j), col in zip(M.basis_index, T.matrix.T):
        I, J = starts[k] + i, starts[k] + j
        img = M.from_vec(col).ambient()
        C[I * N:(I + 1) * N, J * N:(J + 1) * N] = img
    return C


def choi_cp_check(T: LpOperator, tol: float = 1e-10) -> CPCheck:
    C = choi_matrix(T)
    C = (C + C.conj().T) / 2
    lam = float(np.linalg.eigvalsh(C)[0])
    scale_ = max(1.0, float(np.abs(C).max()))
    return CPCheck(lam >= -tol * scale_, lam)


def falsify_positivity(T: LpOperator, trials: int = 200, seed: int = 0,
                       tol: float = 1e-10) -> AlgElement | None:
    """Search random PSD inputs for one mapped outside the PSD cone."""
    if trials < 1:
        raise DomainError("trials must be >= 1")
    M = T.parent
    rng = np.random.default_rng(seed)
    for t in range(trials):
        rank = None if t % 2 == 0 else 1
        x = M.random_psd(rng, rank=rank)
        y = apply(T, x)
        h = (y + y.adj()) * 0.5
        scale_ = max(1.0, y.norm_inf())
        if (y - y.adj()).max_abs() > tol * scale_ or h.min_eig() < -tol * scale_:
            return x
    return None


# -- norm estimation -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class NormEstimate:
    value: float
    witness: AlgElement | None


def _pnorm_and_grad(M: FiniteVNA, v: np.ndarray, p: float):
    """tau(|y|^p) and its gradient (w.r.t. Re<G, dy>) for y = from_vec(v)."""
    total = 0.0
    grads = []
    for k, (off, n) in enumerate(zip(M.offsets, M.dims)):
        blk = v[off:off + n * n].reshape(n, n)
        U, s, Vh = np.linalg.svd(blk)
        w = M.blocks[k].weight
        total += w * float(np.sum(s ** p))
        grads.append((p * w * (U * s ** (p - 1)) @ Vh).reshape(-1))
    return total, np.concatenate(grads)


def ratio(T: LpOperator, x: AlgElement, p: float) -> float:
    nx = lp_norm(T.parent, x, p)
    if nx == 0:
        return 0.0
    return lp_norm(T.parent, apply(T, x), p) / nx


def opnorm_lower(T: LpOperator, p: float, iterations: int = 200, seed: int = 0,
                 restarts: int = 8) -> NormEstimate:
    """Certified lower bound on ||T||_{L_p -> L_p}.

    Local ascent of log ||Tx||_p - log ||x||_p from matrix units, central
    projections and random starts.  The returned value is recomputed from the
    witness, so it never exceeds the true norm beyond rounding.
    """
    if not 1 < p < np.inf:
        raise DomainError("opnorm_lower needs 1 < p < inf")
    M = T.parent
    D = M.vec_dim
    A = T.matrix
    if not np.any(A):
        return NormEstimate(0.0, M.identity())
    rng = np.random.default_rng(seed)
    starts = [e.vec() for e in M.basis()]
    starts += [z.vec() for z in _central_projections(M)]
    starts.append(M.identity().vec())
    starts += [M.random_element(rng).vec() for _ in range(restarts)]
    starts += [M.random_psd(rng, rank=1).vec() for _ in range(restarts)]

    def objective(z):
        v = z[:D] + 1j * z[D:]
        fy, gy = _pnorm_and_grad(M, A @ v, p)
        fx, gx = _pnorm_and_grad(M, v, p)
        if fy <= 1e-300 or fx <= 1e-300:
            return 0.0, np.zeros_like(z)
        g = (A.conj().T @ gy) / fy - gx / fx
        return -(np.log(fy) - np.log(fx)) / p, -np.concatenate([g.real, g.imag]) / p

    best_val, best_x = -1.0, None
    scored = sorted(starts, key=lambda v: -_ratio_vec(M, A, v, p))
    for v0 in scored[: max(4, restarts)]:
        cand = [v0]
        if iterations > 0:
            res = minimize(objective, np.concatenate([v0.real, v0.imag]), jac=True,
                           method="L-BFGS-B", options={"maxiter": iterations})
            cand.append(res.x[:D] + 1j * res.x[D:])
        for v in cand:
            r = _ratio_vec(M, A, v, p)
            if r > best_val:
                best_val, best_x = r, v
    return NormEstimate(best_val, M.from_vec(best_x))


def _ratio_vec(M: FiniteVNA, A: np.ndarray, v: np.ndarray, p: float) -> float:
    x = M.from_vec(v)
    nx = lp_norm(M, x, p)
    if nx == 0 or not np.isfinite(nx):
        return 0.0
    return lp_norm(M, M.from_vec(A @ v), p) / nx


def _central_projections(M: FiniteVNA) -> list[AlgElement]:
    from .algebra import center_basis
    return center_basis(M)


# -- Jordan maps -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class JordanMap:
    """A linear map M -> M stored densely, with its Jordan-structure residuals."""
    parent: FiniteVNA
    matrix: np.ndarray
    residuals: dict = field(default_factory=dict)

    def __call__(self, x: AlgElement) -> AlgElement:
        _check_same(self.parent, x)
        return self.parent.from_vec(self.matrix @ x.vec())

    @classmethod
    def from_function(cls, M: FiniteVNA, f: Callable[[AlgElement], AlgElement]) -> "JordanMap":
        return cls.analyzed(M, matrix_of(M, f))

    @classmethod
    def analyzed(cls, M: FiniteVNA, matrix: np.ndarray) -> "JordanMap":
        tab = ProductTable.of(M)
        res = tab.residuals(matrix)
        return cls(M, matrix, res)

    def flags(self, tol: float) -> dict:
        r = self.residuals
        jordan = r["jordan"] <= tol and r["star"] <= tol
        return {"is_jordan": jordan,
                "is_hom": jordan and r["hom"] <= tol,
                "is_antihom": jordan and r["antihom"] <= tol}

    def power(self, n: int) -> "JordanMap":
        return JordanMap.analyzed(self.parent, np.linalg.matrix_power(self.matrix, n))


@dataclass(frozen=True, eq=False)
class ProductTable:
    """Multiplication table of the matrix-unit basis of M."""
    parent: FiniteVNA
    # prod[a, b] = index c with e_a e_b = e_c, or -1 when the product vanishes
    prod: np.ndarray

    _cache = {}

    @classmethod
    def of(cls, M: FiniteVNA) -> "ProductTable":
        if M in cls._cache:
            return cls._cache[M]
        D = M.vec_dim
        idx = {t: n for n, t in enumerate(M.basis_index)}
        prod = -np.ones((D, D), dtype=int)
        for a, (k, i, j) in enumerate(M.basis_index):
            n = M.dims[k]
            for m in range(n):
                b = idx[(k, j, m)]
                prod[a, b] = idx[(k, i, m)]
        tab = cls(M, prod)
        cls._cache[M] = tab
        return tab

    def residuals(self, matrix: np.ndarray) -> dict:
        """Max over basis pairs of the Jordan, hom, antihom and *-defects (spectral norms)."""
        M = self.parent
        D = M.vec_dim
        ext = np.concatenate([matrix, np.zeros((D, 1), dtype=complex)], axis=1)
        img_prod = ext[:, self.prod]  # J(e_a e_b), shape (D, D, D) indexed [:, a, b]
        jordan = hom = anti = 0.0
        for k, (off, n) in enumerate(zip(M.offsets, M.dims)):
            imgs = matrix[off:off + n * n, :].T.reshape(D, n, n)  # block k of J(e_a)
            ab = np.einsum("aij,bjl->abil", imgs, imgs)
            ba = ab.transpose(1, 0, 2, 3)
            jp = img_prod[off:off + n * n].transpose(1, 2, 0).reshape(D, D, n, n)
            jsym = jp + jp.transpose(1, 0, 2, 3)
            jordan = max(jordan, _max_spec(jsym - ab - ba))
            hom = max(hom, _max_spec(jp - ab))
            anti = max(anti, _max_spec(jp - ba))
        perm = M.swap_permutation
        # J(e_ij^*) = J(e_ji) must equal J(e_ij)^*
        star = 0.0
        for a in range(D):
            lhs = M.from_vec(matrix[:, perm[a]])
            rhs = M.from_vec(matrix[:, a]).adj()
            star = max(star, (lhs - rhs).norm_inf())
        return {"jordan": jordan, "hom": hom, "antihom": anti, "star": star}


def _max_spec(arr: np.ndarray) -> float:
    if arr.size == 0:
        return 0.0
    n = arr.shape[-1]
    if n == 1:
        return float(np.abs(arr).max())
    flat = arr.reshape(-1, n, n)
    return float(np.linalg.norm(flat, ord=2, axis=(1, 2)).max())
