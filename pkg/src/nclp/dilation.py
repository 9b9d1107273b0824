"""Isometric dilations of Lamperti contractions.

Shift dilation: for a Lamperti contraction T with density rho, the map
U(x0, x1, ...) = (T x0, (1 - rho)^(1/p) x0, x1, ...) is an isometry on the
l_p-sum of copies of L_p(M), and T^n = j U^n i.  Sequences are kept with
finite support so nothing is truncated.

Tensor (N-)dilation of a convex combination sum_i lam_i T_i: vectors live on
an index set I = {0..n-1}^N times N cycle positions times S shift slots, and
(sum lam_i T_i)^m = Q U^m J for m <= N.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .algebra import AlgElement, FiniteVNA, lp_norm, lp_norm_p, modulus, psd_power, trace
from .errors import DomainError, HypothesisViolation, ResourceError
from .lamperti import LampertiDecomposition, decompose, rho_of
from .operators import LpOperator, apply, convex_combine, matrix_of, power

DEFAULT_BUDGET = 10 ** 6
DENSE_LIMIT = 20000


@dataclass(frozen=True, eq=False)
class SeqElement:
    parent: FiniteVNA
    slots: tuple

    @classmethod
    def of(cls, M: FiniteVNA, slots) -> "SeqElement":
        slots = tuple(slots) or (M.zero(),)
        return cls(M, slots)

    def norm_p(self, p: float) -> float:
        """||(x_n)||_p^p = sum_n ||x_n||_p^p."""
        return sum(lp_norm_p(self.parent, x, p) for x in self.slots)

    def norm(self, p: float) -> float:
        return self.norm_p(p) ** (1.0 / p)

    def __len__(self):
        return len(self.slots)


@dataclass(frozen=True, eq=False)
class ShiftLeg:
    T: LpOperator
    rho: AlgElement
    sigma: AlgElement  # central, (1 - rho)^(1/p)

    def apply(self, v: SeqElement) -> SeqElement:
        x0 = v.slots[0]
        return SeqElement(v.parent, (apply(self.T, x0), self.sigma @ x0) + v.slots[1:])


@dataclass(eq=False)
class DilationSystem:
    kind: str  # "shift" | "tensor"
    parent: FiniteVNA
    p: float
    ops: list
    legs: list = field(default_factory=list)  # shift kind
    # tensor kind
    weights: np.ndarray | None = None
    N: int = 0
    index: np.ndarray | None = None  # (#I, N) operator index per cycle position
    slots: int = 1
    lifted: bool = False
    slot_mats: list = field(default_factory=list)  # per op: (T matrix, sigma matrix or None)
    report: dict = field(default_factory=dict)

    @property
    def shape(self) -> tuple:
        return (len(self.index), self.N, self.slots, self.parent.vec_dim)

    @property
    def dimension(self) -> int:
        return int(np.prod(self.shape))

    # -- shift kind -----------------------------------------------------------

    def embed(self, x: AlgElement):
        if self.kind == "shift":
            return SeqElement.of(self.parent, [x])
        c = (self._product_weights() / self.N) ** (1.0 / self.p)
        v = np.zeros(self.shape, dtype=complex)
        v[:, :, 0, :] = c[:, None, None] * x.vec()[None, None, :]
        return v

    def compress(self, v) -> AlgElement:
        if self.kind == "shift":
            return v.slots[0]
        q = self.p / (self.p - 1.0)
        c = (self._product_weights() / self.N) ** (1.0 / q)
        return self.parent.from_vec(np.einsum("i,ikd->d", c, v[:, :, 0, :]))

    def U(self, v, i: int = 0):
        """Apply the dilating isometry (leg ``i`` for the shift kind)."""
        if self.kind == "shift":
            return self.legs[i].apply(v)
        return _tensor_step(self, v)

    def _product_weights(self) -> np.ndarray:
        return np.prod(self.weights[self.index], axis=1)

    def norm(self, v) -> float:
        if self.kind == "shift":
            return v.norm(self.p)
        return _tensor_norm_p(self.parent, v, self.p) ** (1.0 / self.p)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "p": self.p, "n_ops": len(self.ops)}
        if self.kind == "tensor":
            out.update({"N": self.N, "index_set_size": len(self.index), "slots": self.slots,
                        "lifted": self.lifted, "dimension": self.dimension,
                        "weights": [float(w) for w in self.weights]})
        out.update(self.report)
        return out


def _sigma(M: FiniteVNA, rho: AlgElement, p: float) -> AlgElement:
    vals = np.clip(1.0 - rho.central_values().real, 0.0, None)
    return M.central(vals ** (1.0 / p))


def _lamperti_contraction(T: LpOperator, p: float, tol: float) -> tuple[AlgElement, LampertiDecomposition]:
    d = decompose(T, p, tol)
    if not isinstance(d, LampertiDecomposition):
        raise HypothesisViolation("dilation needs a Lamperti operator", witness=d)
    rho = rho_of(T, p, tol, d=d)
    top = float(rho.central_values().real.max())
    if top > 1.0 + tol:
        raise HypothesisViolation(f"operator is not a contraction on L_p (max rho = {top:.6g})",
                                  witness=rho)
    return rho, d


def shift_dilation(T, p: float, tol: float = 1e-8) -> DilationSystem:
    """Shift dilation of one Lamperti contraction or of a list (simultaneous dilation)."""
    if not 1 <= p < np.inf:
        raise DomainError("shift dilation needs 1 <= p < inf")
    ops = list(T) if isinstance(T, (list, tuple)) else [T]
    if not ops:
        raise DomainError("need at least one operator")
    M = ops[0].parent
    legs = []
    for op in ops:
        if op.parent != M:
            raise DomainError("operators act on different algebras")
        rho, _ = _lamperti_contraction(op, p, tol)
        legs.append(ShiftLeg(op, rho, _sigma(M, rho, p)))
    return DilationSystem("shift", M, p, ops, legs=legs)


def balance_residual(system: DilationSystem, x: AlgElement, i: int = 0) -> float:
    """| ||Tx||_p^p + ||S_T x||_p^p - ||x||_p^p | for leg ``i``."""
    M, p, leg = system.parent, system.p, system.legs[i]
    lhs = lp_norm_p(M, apply(leg.T, x), p) + lp_norm_p(M, leg.sigma @ x, p)
    return abs(lhs - lp_norm_p(M, x, p))


def simultaneous_apply(system: DilationSystem, word, x: AlgElement) -> tuple[AlgElement, float]:
    """j U_{w1} ... U_{wm} i (x) and its distance to T_{w1} ... T_{wm} x.

    Word entries are 0-based operator indices; the rightmost letter acts first.
    """
    if system.kind != "shift":
        raise DomainError("simultaneous_apply needs a shift system")
    word = list(word)
    for w in word:
        if not 0 <= w < len(system.legs):
            raise DomainError(f"word entry {w} out of range")
    v = system.embed(x)
    direct = x
    for w in reversed(word):
        v = system.U(v, w)
        direct = apply(system.legs[w].T, direct)
    out = system.compress(v)
    return out, (out - direct).norm_inf()


# -- tensor construction -----------------------------------------------------------

def convex_n_dilation(weights, ops, N: int, p: float, tol: float = 1e-8, lift: bool = True,
                      budget: int = DEFAULT_BUDGET) -> DilationSystem:
    """N-dilation of sum_i weights[i] ops[i].

    With ``lift`` (the default) every non-isometric op is replaced by its shift
    isometry, restricted to N + 1 slots; starting from J x the support never
    outgrows that in N steps, so the identity holds exactly for m <= N.
    ``lift=False`` uses the ops as given (a diagnostic: U is then not isometric).
    """
    if not 1 < p < np.inf:
        raise DomainError("the tensor dilation is built for 1 < p < inf only")
    if N < 1:
        raise DomainError("N must be >= 1")
    w = np.asarray(weights, dtype=float)
    ops = list(ops)
    if len(w) != len(ops) or not ops:
        raise DomainError("need one weight per operator")
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
        raise DomainError("weights must be non-negative and sum to 1")
    M = ops[0].parent
    D = M.vec_dim

    rhos = []
    for op in ops:
        if op.parent != M:
            raise DomainError("operators act on different algebras")
        rhos.append(_lamperti_contraction(op, p, tol)[0])
    isometric = [np.abs(r.central_values().real - 1.0).max() <= tol for r in rhos]
    lifted = lift and not all(isometric)
    S = N + 1 if lifted else 1

    n = len(ops)
    size = n ** N * N * S * D
    if size > budget:
        raise ResourceError(f"tensor dilation needs {size} dimensions (budget {budget})",
                            required=size)
    index = np.array(list(itertools.product(range(n), repeat=N)), dtype=int).reshape(-1, N)
    mats = []
    for op, rho in zip(ops, rhos):
        sig = _sigma(M, rho, p)
        sig_mat = matrix_of(M, lambda x, s=sig: s @ x) if lifted else None
        mats.append((op.matrix, sig_mat))
    system = DilationSystem("tensor", M, p, ops, weights=w, N=N, index=index, slots=S,
                            lifted=lifted, slot_mats=mats)
    system.report = verify_powers(system)
    return system


def _tensor_step(system: DilationSystem, v: np.ndarray) -> np.ndarray:
    N, S = system.N, system.slots
    # U((x_k)) = (U_{i_k} x_{k+1}) with the cycle k -> k+1 mod N
    shifted = v[:, (np.arange(N) + 1) % N]
    out = np.zeros_like(v)
    for t, (A, sig) in enumerate(system.slot_mats):
        mask = system.index == t
        if not mask.any():
            continue
        src = shifted[mask]  # (m, S, D)
        res = np.zeros_like(src)
        res[:, 0] = src[:, 0] @ A.T
        if S > 1:
            res[:, 1] = src[:, 0] @ sig.T
            res[:, 2:] = src[:, 1:S - 1]
        out[mask] = res
    return out


def _tensor_norm_p(M: FiniteVNA, v: np.ndarray, p: float) -> float:
    flat = v.reshape(-1, M.vec_dim)
    total = 0.0
    for off, n, wt in zip(M.offsets, M.dims, M.weights):
        blk = flat[:, off:off + n * n].reshape(-1, n, n)
        s = np.linalg.svd(blk, compute_uv=False)
        total += wt * float(np.sum(s ** p))
    return total


def verify_powers(system: DilationSystem) -> dict:
    """Residuals ||(sum lam_i T_i)^m - Q U^m J|| (max entry) for m = 0..N, and ||QJ - 1||."""
    M = system.parent
    D = M.vec_dim
    T = convex_combine(system.weights, system.ops)
    basis = np.eye(D, dtype=complex)
    vs = [system.embed(M.from_vec(e)) for e in basis]
    res = []
    for m in range(system.N + 1):
        if m > 0:
            vs = [system.U(v) for v in vs]
        QUJ = np.stack([system.compress(v).vec() for v in vs], axis=1)
        res.append(float(np.abs(power(T, m).matrix - QUJ).max()))
    return {"residuals": res, "qj_residual": res[0], "dimensions": system.dimension
            if system.kind == "tensor" else None}


def dense_maps(system: DilationSystem, limit: int = DENSE_LIMIT) -> dict:
    """Explicit matrices of U (Y -> Y), J (L_p -> Y) and Q (Y -> L_p)."""
    if system.kind != "tensor":
        raise DomainError("dense maps are built for tensor systems")
    Y = system.dimension
    if Y > limit:
        raise ResourceError(f"dense U would be {Y} x {Y}", required=Y * Y)
    M = system.parent
    D = M.vec_dim
    shape = system.shape
    U = np.zeros((Y, Y), dtype=complex)
    Q = np.zeros((D, Y), dtype=complex)
    for c in range(Y):
        e = np.zeros(Y, dtype=complex)
        e[c] = 1.0
        v = e.reshape(shape)
        U[:, c] = system.U(v).reshape(-1)
        Q[:, c] = system.compress(v).vec()
    J = np.stack([system.embed(M.from_vec(e)).reshape(-1) for e in np.eye(D, dtype=complex)],
                 axis=1)
    return {"U": U, "J": J, "Q": Q}


def random_sequence(M: FiniteVNA, rng: np.random.Generator, max_len: int = 4) -> SeqElement:
    return SeqElement.of(M, [M.random_element(rng) for _ in range(int(rng.integers(1, max_len + 1)))])


def random_tensor_vector(system: DilationSystem, rng: np.random.Generator) -> np.ndarray:
    """Random vector of Y with empty last slot (U is exactly isometric there)."""
    shape = system.shape
    v = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    if system.slots > 1:
        v[:, :, -1, :] = 0.0
    return v


def verify_isometry(system: DilationSystem, samples: int = 20, seed: int = 0,
                    p: float | None = None) -> float:
    """max |‖U v‖_p - ‖v‖_p| over random samples (all legs for a shift system)."""
    rng = np.random.default_rng(seed)
    if p is not None and p != system.p:
        raise DomainError("a dilation is only isometric at the exponent it was built for")
    worst = 0.0
    for _ in range(samples):
        if system.kind == "shift":
            v = random_sequence(system.parent, rng)
            for i in range(len(system.legs)):
                worst = max(worst, abs(system.U(v, i).norm(system.p) - v.norm(system.p)))
        else:
            v = random_tensor_vector(system, rng)
            worst = max(worst, abs(system.norm(system.U(v)) - system.norm(v)))
    return worst


def trace_identity_residual(system: DilationSystem, x: AlgElement, i: int = 0) -> float:
    """| ||Tx||_p^p - ||x||_p^p - tau((rho - 1)|x|^p) |."""
    M, p, leg = system.parent, system.p, system.legs[i]
    lhs = lp_norm_p(M, apply(leg.T, x), p) - lp_norm_p(M, x, p)
    rhs = trace(M, (leg.rho - M.identity()) @ psd_power(M, modulus(M, x), p)).real
    return abs(lhs - rhs)


def dilation_report(system: DilationSystem, samples: int = 20, seed: int = 0) -> dict:
    out = system.to_dict()
    out["isometry_deviation"] = verify_isometry(system, samples, seed)
    if system.kind == "tensor":
        rng = np.random.default_rng(seed + 1)
        worst = 0.0
        for _ in range(samples):
            x = system.parent.random_element(rng)
            worst = max(worst, abs(system.norm(system.embed(x)) - lp_norm(system.parent, x, system.p)))
        out["embedding_deviation"] = worst
    return out
