"""Constructive analysis of Lamperti (support-separating) operators.

A Lamperti operator factors as ``T(x) = w b J(x)`` with ``w`` a partial
isometry, ``b >= 0`` commuting with the range of a Jordan *-homomorphism
``J`` and ``w* w = J(1) = s(b)``.  Because ``T(1) = w b``, the polar
decomposition of ``T(1)`` pins down ``w`` and ``b``, and ``J`` is then read
off as ``pinv(b) w* T(.)``.  All structural identities are bilinear, so
checking them on matrix-unit pairs is exhaustive.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import (AlgElement, FiniteVNA, center_basis, funcalc, lp_norm, lp_norm_p,
                      modulus, pinv, polar, psd_power, support, trace)
from .errors import HypothesisViolation, InconsistencyError
from .operators import (JordanMap, LpOperator, adjoint, apply, compose, from_wbj,
                        matrix_of, opnorm_lower, power)

DEFAULT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class LampertiDecomposition:
    w: AlgElement
    b: AlgElement
    J: JordanMap
    residuals: dict
    classification: str  # "hom" | "antihom" | "mixed-jordan"
    # max_k tau(b^p J(z_k)) / tau(z_k): the constant of the trace bound
    trace_bound: float = float("nan")
    # J(M) = J(1) M J(1), recorded rather than assumed
    range_is_corner: bool = False

    status = "lamperti"

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())


@dataclass(frozen=True, eq=False)
class LampertiWitness:
    e: AlgElement
    f: AlgElement
    violation: float
    residuals: dict = field(default_factory=dict)

    status = "not_lamperti"


@dataclass(frozen=True, eq=False)
class Indeterminate:
    """Residuals failed but no separating witness was found."""
    partial: LampertiDecomposition | None
    best_violation: float
    reason: str

    status = "indeterminate"


def _op_scale(T: LpOperator) -> float:
    return max(1.0, float(np.linalg.norm(T.matrix, 2)))


def _recover(T: LpOperator) -> tuple[AlgElement, AlgElement, JordanMap] | None:
    M = T.parent
    t1 = apply(T, M.identity())
    if t1.max_abs() <= 1e-14 * _op_scale(T):
        return None
    w, b = polar(M, t1)
    left = pinv(M, b) @ w.adj()
    Jmat = matrix_of(M, lambda x: left @ apply(T, x))
    return w, b, JordanMap.analyzed(M, Jmat)


def _residuals(T: LpOperator, w: AlgElement, b: AlgElement, J: JordanMap) -> dict:
    M = T.parent
    one = M.identity()
    J1 = J(one)
    sb = support(M, b)
    support_identity = max((w.adj() @ w - J1).norm_inf(), (J1 - sb).norm_inf())
    commutation = recon = 0.0
    wb = w @ b
    for col, e in zip(T.matrix.T, M.basis()):
        Je = J(e)
        commutation = max(commutation, (b @ Je - Je @ b).norm_inf())
        recon = max(recon, (M.from_vec(col) - wb @ Je).norm_inf())
    r = J.residuals
    return {"reconstruction": recon, "commutation": commutation,
            "jordan": max(r["jordan"], r["star"]), "support_identity": support_identity}


def _classify(J: JordanMap, tol: float) -> str:
    if J.residuals["hom"] <= tol:
        return "hom"
    if J.residuals["antihom"] <= tol:
        return "antihom"
    return "mixed-jordan"


def trace_bound(M: FiniteVNA, b: AlgElement, J: JordanMap, p: float) -> np.ndarray:
    """tau(b^p J(z_k)) / tau(z_k) for every minimal central projection z_k."""
    bp = psd_power(M, b, p)
    out = []
    for z in center_basis(M):
        out.append(trace(M, bp @ J(z)).real / trace(M, z).real)
    return np.array(out)


def _range_is_corner(M: FiniteVNA, J: JordanMap, tol: float) -> bool:
    J1 = J(M.identity())
    corner_dim = sum(int(round(np.trace(blk).real)) ** 2 for blk in J1.blocks)
    rank = np.linalg.matrix_rank(J.matrix, tol=tol * max(1.0, np.abs(J.matrix).max()))
    return rank == corner_dim


def violation(T: LpOperator, e: AlgElement, f: AlgElement) -> float:
    """max(||(Te)* Tf||, ||Te (Tf)*||) for a pair of orthogonal projections."""
    te, tf = apply(T, e), apply(T, f)
    return max((te.adj() @ tf).norm_inf(), (te @ tf.adj()).norm_inf())


def find_witness(T: LpOperator, tol: float = DEFAULT_TOL, seed: int = 0,
                 trials: int = 200) -> LampertiWitness | None:
    """Orthogonal projections e, f with (Te)*Tf or Te(Tf)* nonzero.

    Diagonal matrix-unit pairs are tried first, then pairs of spectral
    projections of random Hermitian elements.
    """
    M = T.parent
    thr = tol * _op_scale(T)
    diag = [M.unit(k, i, i) for k, n in enumerate(M.dims) for i in range(n)]
    for a in range(len(diag)):
        for c in range(a + 1, len(diag)):
            v = violation(T, diag[a], diag[c])
            if v > thr:
                return LampertiWitness(diag[a], diag[c], v)
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        h = M.random_hermitian(rng)
        projs = []
        for k, blk in enumerate(h.blocks):
            lam, U = np.linalg.eigh(blk)
            for i in range(len(lam)):
                data = [np.zeros_like(bb) for bb in h.blocks]
                data[k] = np.outer(U[:, i], U[:, i].conj())
                projs.append(M.element(data))
        # random splits of the spectral projections into two orthogonal groups
        for _ in range(4):
            mask = rng.random(len(projs)) < 0.5
            if mask.all() or not mask.any():
                continue
            e = sum((q for q, m in zip(projs, mask) if m), M.zero())
            f = sum((q for q, m in zip(projs, mask) if not m), M.zero())
            v = violation(T, e, f)
            if v > thr:
                return LampertiWitness(e, f, v)
        for a in range(len(projs)):
            for c in range(a + 1, len(projs)):
                v = violation(T, projs[a], projs[c])
                if v > thr:
                    return LampertiWitness(projs[a], projs[c], v)
    return None


def decompose(T: LpOperator, p: float = 2.0, tol: float = DEFAULT_TOL, seed: int = 0):
    """Certify T = w b J(x) or refute the Lamperti property with a witness pair."""
    M = T.parent
    thr = tol * _op_scale(T)
    if not np.any(T.matrix):
        J = JordanMap.analyzed(M, np.zeros_like(T.matrix))
        res = {"reconstruction": 0.0, "commutation": 0.0, "jordan": 0.0, "support_identity": 0.0}
        return LampertiDecomposition(M.zero(), M.zero(), J, res, "hom",
                                     trace_bound=0.0, range_is_corner=True)
    rec = _recover(T)
    partial = None
    if rec is not None:
        w, b, J = rec
        res = _residuals(T, w, b, J)
        cls = _classify(J, thr)
        partial = LampertiDecomposition(
            w, b, J, res, cls,
            trace_bound=float(trace_bound(M, b, J, p).max()),
            range_is_corner=_range_is_corner(M, J, 1e-9))
        if max(res.values()) <= thr:
            return partial
    wit = find_witness(T, tol, seed)
    if wit is not None:
        res = partial.residuals if partial is not None else {}
        return LampertiWitness(wit.e, wit.f, wit.violation, res)
    reason = ("T(1) = 0 for a nonzero operator; the canonical polar recovery does not apply"
              if rec is None else "residuals exceed tolerance but no separating pair was found")
    return Indeterminate(partial, 0.0, reason)


def is_completely_lamperti(d: LampertiDecomposition, tol: float = DEFAULT_TOL) -> bool:
    """True iff the Jordan part is multiplicative on every basis pair."""
    return d.J.residuals["hom"] <= tol


def is_positive_decomposition(d: LampertiDecomposition, tol: float = DEFAULT_TOL) -> bool:
    """For positive T the partial isometry collapses to w = J(1) = s(b)."""
    M = d.w.parent
    return (d.w - d.J(M.identity())).norm_inf() <= tol


def _require_lamperti(T: LpOperator, p: float, tol: float) -> LampertiDecomposition:
    d = decompose(T, p, tol)
    if not isinstance(d, LampertiDecomposition):
        raise HypothesisViolation("operator is not Lamperti", witness=d)
    return d


def rho_of(T: LpOperator, p: float, tol: float = DEFAULT_TOL, samples: int = 20,
           seed: int = 0, d: LampertiDecomposition | None = None) -> AlgElement:
    """Central density rho with ||T x||_p^p = tau(rho |x|^p)."""
    M = T.parent
    if d is None:
        d = _require_lamperti(T, p, tol)
    rho = M.central(trace_bound(M, d.b, d.J, p))
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        x = M.random_element(rng)
        lhs = lp_norm_p(M, apply(T, x), p)
        rhs = trace(M, rho @ psd_power(M, modulus(M, x), p)).real
        if abs(lhs - rhs) > 1e-7 * max(1.0, abs(lhs), abs(rhs)):
            raise InconsistencyError(
                f"density identity fails: ||Tx||^p = {lhs:.6g} but tau(rho|x|^p) = {rhs:.6g}")
    return rho


@dataclass(frozen=True, eq=False)
class KernelProjections:
    p0: AlgElement
    p1: AlgElement
    p0_tilde: AlgElement
    # sampled checks: T vanishes on p0 M p0, isometric on p0~ M p0~
    vanishing_residual: float
    isometry_residual: float


def kernel_projections(T: LpOperator, p: float, tol: float = DEFAULT_TOL, samples: int = 10,
                       seed: int = 0, rho: AlgElement | None = None) -> KernelProjections:
    M = T.parent
    if rho is None:
        rho = rho_of(T, p, tol)
    vals = rho.central_values().real
    p0 = M.central((np.abs(vals) <= tol).astype(float))
    p1 = M.identity() - p0
    p0t = M.central((np.abs(1.0 - vals) <= tol).astype(float))
    rng = np.random.default_rng(seed)
    van = iso = 0.0
    for _ in range(samples):
        x = M.random_element(rng)
        van = max(van, apply(T, p0 @ x @ p0).norm_inf())
        y = p0t @ x @ p0t
        iso = max(iso, abs(lp_norm(M, apply(T, y), p) - lp_norm(M, y, p)))
    return KernelProjections(p0, p1, p0t, van, iso)


@dataclass(frozen=True, eq=False)
class DoublyLampertiFactorization:
    theta: AlgElement
    S: LpOperator
    p0: AlgElement
    p1: AlgElement
    rho: AlgElement
    thetas: list  # theta_1 .. theta_N
    power_residuals: list  # ||T^n - theta_n S^n|| for n = 1..N
    commutation_residuals: list
    S_vanishing: float
    S_isometry: float
    theta_norms: list
    opnorm_lower: list


def _theta_power_op(theta_n: AlgElement, Sn: LpOperator) -> np.ndarray:
    M = theta_n.parent
    return matrix_of(M, lambda x: theta_n @ apply(Sn, x))


def doubly_lamperti_factor(T: LpOperator, p: float, N_check: int = 4, tol: float = DEFAULT_TOL,
                           check_norms: bool = True, seed: int = 0) -> DoublyLampertiFactorization:
    """T^n = theta_n S^n with S a positive Lamperti contraction.

    theta = J(rho)^(1/p), theta_n = theta J(theta) ... J^(n-1)(theta) and
    S = b J((p1 rho p1)^(-1/p)) J(.) on the support of rho.
    """
    M = T.parent
    d = _require_lamperti(T, p, tol)
    if not is_positive_decomposition(d, tol * _op_scale(T)):
        raise HypothesisViolation("operator is Lamperti but not positive (w != J(1))", witness=d)
    q = p / (p - 1.0)
    dual = decompose(adjoint(T), q, tol)
    if not isinstance(dual, LampertiDecomposition):
        raise HypothesisViolation("adjoint is not Lamperti", witness=dual)
    J = d.J
    rho = rho_of(T, p, tol, d=d)
    kp = kernel_projections(T, p, tol, rho=rho)
    rho_inv_root = psd_power(M, kp.p1 @ rho @ kp.p1, -1.0 / p)
    b_tilde = d.b @ J(rho_inv_root)
    S = from_wbj(J(M.identity()), b_tilde, J)
    theta = psd_power(M, J(rho), 1.0 / p)

    thetas, power_res, comm_res = [], [], []
    theta_n = theta
    Jk_theta = theta
    rng = np.random.default_rng(seed)
    probes = M.basis() + [M.random_element(rng) for _ in range(3)]
    for n in range(1, N_check + 1):
        if n > 1:
            Jk_theta = J(Jk_theta)
            theta_n = theta_n @ Jk_theta
        thetas.append(theta_n)
        Sn = power(S, n)
        Tn = power(T, n)
        power_res.append(float(np.abs(Tn.matrix - _theta_power_op(theta_n, Sn)).max()))
        c = 0.0
        for x in probes:
            y = apply(Sn, x)
            c = max(c, (theta_n @ y - y @ theta_n).norm_inf())
        comm_res.append(c)

    van = iso = 0.0
    for _ in range(10):
        x = M.random_element(rng)
        van = max(van, apply(S, kp.p0 @ x @ kp.p0).norm_inf())
        y = kp.p1 @ x @ kp.p1
        iso = max(iso, abs(lp_norm(M, apply(S, y), p) - lp_norm(M, y, p)))

    theta_norms = [t.norm_inf() for t in thetas]
    lowers = []
    if check_norms:
        lowers = [opnorm_lower(power(T, n), p, seed=seed).value for n in range(1, N_check + 1)]
    return DoublyLampertiFactorization(theta, S, kp.p0, kp.p1, rho, thetas, power_res, comm_res,
                                       van, iso, theta_norms, lowers)


def lamperti_product_check(T1: LpOperator, T2: LpOperator, p: float = 2.0,
                           tol: float = DEFAULT_TOL) -> str:
    """Decompose T1 T2 and return its classification.

    Each factor must be Lamperti and either completely Lamperti or positive;
    both classes are closed under products, general Lamperti maps are not.
    """
    for T in (T1, T2):
        d = _require_lamperti(T, p, tol)
        t = tol * _op_scale(T)
        if not (is_completely_lamperti(d, t) or is_positive_decomposition(d, t)):
            raise HypothesisViolation("factor is neither completely Lamperti nor positive", witness=d)
    d = decompose(compose(T1, T2), p, tol)
    if not isinstance(d, LampertiDecomposition):
        raise InconsistencyError("product of Lamperti factors failed to decompose")
    return d.classification


def modulus_defect(T: LpOperator, x: AlgElement) -> float:
    """|| |T(x)| - T(|x|) ||_inf for Hermitian x."""
    M = T.parent
    return (modulus(M, apply(T, x)) - apply(T, modulus(M, x))).norm_inf()
