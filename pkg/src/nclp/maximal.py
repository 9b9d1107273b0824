"""Maximal norms of positive sequences and ergodic averages.

For PSD x_1..x_m the maximal norm is inf{ ||a||_p : a >= x_n for all n }.
The problem separates over the blocks of the algebra; on each block it is
solved on the support of sum_n x_n (where the optimal a is invertible), and
every answer comes as a bracket [lower, upper]:

* upper is ||a||_p for an explicitly feasible a;
* lower is sum_n tau(x_n y_n) / ||sum_n y_n||_q for some PSD y_n, which by
  Hoelder is below ||a||_p for every feasible a.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .algebra import AlgElement, FiniteVNA, lp_norm
from .errors import ConditioningError, DomainError, InconsistencyError, SpectralAmbiguityError
from .operators import LpOperator, apply, from_matrix


@dataclass
class SolverOptions:
    method: str = "barrier"  # "barrier" | "pgd"
    max_iter: int = 10_000
    gap_tol: float = 1e-9  # relative gap target on tau(a^p) per block
    feasibility_tol: float = 1e-10
    rank_tol: float = 1e-12
    dual_polish: bool = False
    dykstra_iter: int = 500
    seed: int = 0


@dataclass(eq=False)
class MaximalNormResult:
    upper: float
    lower: float
    a_star: AlgElement
    feasibility_slack: float
    iterations: int
    converged: bool
    duals: list = field(default_factory=list, repr=False)

    @property
    def gap(self) -> float:
        return self.upper - self.lower

    @property
    def value(self) -> float:
        return 0.5 * (self.upper + self.lower)

    def to_dict(self) -> dict:
        return {"upper": self.upper, "lower": self.lower, "gap": self.gap,
                "feasibility_slack": self.feasibility_slack, "iterations": self.iterations,
                "converged": self.converged,
                "a_star": [b.tolist() for b in self.a_star.blocks]}


# -- small matrix helpers ------------------------------------------------------------

def _herm(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().swapaxes(-1, -2))


def _herm_basis(r: int) -> np.ndarray:
    """Frobenius-orthonormal real basis of r x r Hermitian matrices."""
    out = []
    for i in range(r):
        e = np.zeros((r, r), dtype=complex)
        e[i, i] = 1
        out.append(e)
    s = 1 / np.sqrt(2)
    for i, j in itertools.combinations(range(r), 2):
        e = np.zeros((r, r), dtype=complex)
        e[i, j] = e[j, i] = s
        out.append(e)
        e = np.zeros((r, r), dtype=complex)
        e[i, j], e[j, i] = 1j * s, -1j * s
        out.append(e)
    return np.array(out)


def _pow_psd(a: np.ndarray, s: float) -> np.ndarray:
    lam, V = np.linalg.eigh(_herm(a))
    lam = np.clip(lam, 0.0, None)
    with np.errstate(divide="ignore"):
        f = np.where(lam > 0, lam ** s, 0.0)
    return (V * f) @ V.conj().T


def _schatten_p(a: np.ndarray, p: float) -> float:
    """Tr |a|^p for Hermitian a."""
    return float(np.sum(np.abs(np.linalg.eigvalsh(_herm(a))) ** p))


def _min_eig(a: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(_herm(a))[0])


def _is_pd(mats: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(mats)
        return True
    except np.linalg.LinAlgError:
        return False


def holder_lower(X: np.ndarray, Y: np.ndarray, p: float) -> float:
    """sum_n Tr(X_n Y_n) / ||sum_n Y_n||_q, a lower bound for the block value."""
    q = p / (p - 1.0)
    Z = _herm(Y.sum(axis=0))
    nz = _schatten_p(Z, q) ** (1.0 / q)
    if nz <= 0:
        return 0.0
    num = float(np.einsum("nij,nji->", X, Y).real)
    return max(num, 0.0) / nz


# -- per-block solvers -----------------------------------------------------------------

@dataclass
class _BlockResult:
    a: np.ndarray  # full block (n x n)
    upper: float  # ||a||_p (Schatten, unweighted)
    lower: float
    duals: np.ndarray  # (m, n, n)
    iterations: int


def _compress(xs: np.ndarray, rank_tol: float):
    """Isometry P onto the support of sum xs and the compressed xs."""
    s = _herm(xs.sum(axis=0))
    lam, V = np.linalg.eigh(s)
    top = max(float(lam[-1]), 0.0)
    keep = lam > rank_tol * top if top > 0 else np.zeros_like(lam, dtype=bool)
    P = V[:, keep]
    X = np.einsum("ji,njk,kl->nil", P.conj(), xs, P)
    return P, _herm(X), top


def _dominating(X: np.ndarray, tol: float) -> int | None:
    for j in range(len(X)):
        if all(_min_eig(X[j] - X[n]) >= -tol for n in range(len(X)) if n != j):
            return j
    return None


def _solve_block(xs: np.ndarray, p: float, opts: SolverOptions) -> _BlockResult:
    n = xs.shape[1]
    m = len(xs)
    P, X, scale = _compress(xs, opts.rank_tol)
    r = P.shape[1]
    if r == 0:
        return _BlockResult(np.zeros((n, n), dtype=complex), 0.0, 0.0,
                            np.zeros_like(xs), 0)
    X = X / scale
    j = _dominating(X, 1e-14)
    if j is not None:
        # a dominating element is optimal; Y = a^(p-1) certifies it exactly
        a = X[j].copy()
        slack = min((_min_eig(a - X[k]) for k in range(m) if k != j), default=0.0)
        if slack < 0:
            a = a - slack * np.eye(r)
        Y = np.zeros_like(X)
        Y[j] = _pow_psd(a, p - 1)
        its = 0
    elif opts.method == "barrier":
        a, Y, its = _barrier(X, p, opts)
    elif opts.method == "pgd":
        a, its = _pgd(X, p, opts)
        Y = dual_ascent(X, p, start=None, max_iter=opts.max_iter, seed=opts.seed)
    else:
        raise DomainError(f"unknown method {opts.method!r}")
    if opts.dual_polish and j is None:
        Y2 = dual_ascent(X, p, start=Y, max_iter=500, seed=opts.seed)
        if holder_lower(X, Y2, p) > holder_lower(X, Y, p):
            Y = Y2
    a = _make_feasible(a, X)
    upper = _schatten_p(a, p) ** (1.0 / p) * scale
    lower = min(holder_lower(X, Y, p) * scale, upper)
    a_full = P @ a @ P.conj().T * scale
    Y_full = np.einsum("ij,njk,lk->nil", P, Y, P.conj())
    return _BlockResult(a_full, upper, lower, Y_full, its)


def _make_feasible(a: np.ndarray, X: np.ndarray) -> np.ndarray:
    a = _herm(a)
    slack = min(_min_eig(a - x) for x in X)
    if slack < 0:
        a = a - slack * (1 + 1e-12) * np.eye(len(a))
    return a


def _barrier(X: np.ndarray, p: float, opts: SolverOptions):
    """Path-following Newton method for min Tr(a^p) - mu sum_n log det(a - X_n)."""
    m, r, _ = X.shape
    E = _herm_basis(r)
    dim = len(E)
    I = np.eye(r)
    a = X.sum(axis=0) + 0.5 * I
    mu = 1.0
    its = 0

    def F(a, mu):
        lam = np.linalg.eigvalsh(a)
        if lam[0] <= 0:
            return np.inf
        try:
            L = np.linalg.cholesky(a[None] - X)
        except np.linalg.LinAlgError:
            return np.inf
        logdet = 2 * np.sum(np.log(np.abs(np.diagonal(L, axis1=1, axis2=2).real)))
        return float(np.sum(lam ** p)) - mu * logdet

    while its < opts.max_iter:
        # centering
        for _ in range(100):
            its += 1
            lam, V = np.linalg.eigh(a)
            B = a[None] - X
            Binv = np.linalg.inv(B)
            G = p * (V * lam ** (p - 1)) @ V.conj().T - mu * Binv.sum(axis=0)
            g = (E.reshape(dim, -1) @ G.T.reshape(-1)).real
            # Daleckii-Krein Hessian of Tr(a^p)
            f1 = lam ** (p - 1)
            dl = lam[:, None] - lam[None, :]
            close = np.abs(dl) <= 1e-10 * lam[-1]
            with np.errstate(divide="ignore", invalid="ignore"):
                gam = np.where(close, (p - 1) * (0.5 * (lam[:, None] + lam[None, :])) ** (p - 2),
                               (f1[:, None] - f1[None, :]) / np.where(close, 1.0, dl))
            Et = (V.conj().T @ E @ V).reshape(dim, -1)
            H = p * ((Et * gam.reshape(-1)) @ Et.conj().T).real
            # barrier Hessian Tr(B^-1 E_a B^-1 E_b)
            lb, Vb = np.linalg.eigh(B)
            C = (Vb * (1 / np.sqrt(lb))[:, None, :]) @ Vb.conj().swapaxes(1, 2)
            Eh = (C[:, None] @ E[None] @ C[:, None]).reshape(m * dim, -1)
            Eh = Eh.reshape(m, dim, -1).transpose(1, 0, 2).reshape(dim, -1)
            H += mu * (Eh @ Eh.conj().T).real
            try:
                d = -np.linalg.solve(H, g)
            except np.linalg.LinAlgError:
                d = -np.linalg.lstsq(H, g, rcond=None)[0]
            dec = float(-g @ d)
            if dec <= 1e-13:
                break
            D = np.einsum("a,aij->ij", d, E)
            f0 = F(a, mu)
            t = 1.0
            while t > 1e-14:
                an = a + t * D
                fn = F(an, mu)
                if fn <= f0 - 1e-4 * t * dec:
                    break
                t *= 0.5
            else:
                break
            a = _herm(an)
        f = float(np.sum(np.linalg.eigvalsh(a) ** p))
        if mu * m * r <= opts.gap_tol * f:
            break
        mu /= 10.0
    B = a[None] - X
    Y = mu * np.linalg.inv(B)
    return a, _herm(Y), its


def _project_dykstra(a: np.ndarray, X: np.ndarray, iters: int, tol: float) -> np.ndarray:
    """Frobenius projection onto the intersection of {b >= X_n} (Dykstra)."""
    m = len(X)
    inc = np.zeros((m,) + a.shape, dtype=complex)
    y = a.copy()
    for _ in range(iters):
        prev, prev_inc = y, inc.copy()
        for n in range(m):
            z = y + inc[n]
            lam, V = np.linalg.eigh(_herm(z - X[n]))
            y_new = X[n] + (V * np.clip(lam, 0, None)) @ V.conj().T
            inc[n] = z - y_new
            y = y_new
        # y alone can stall for a sweep while the increments still move
        if max(np.abs(y - prev).max(), np.abs(inc - prev_inc).max()) <= tol:
            break
    return y


def _pgd(X: np.ndarray, p: float, opts: SolverOptions):
    """Projected gradient with Armijo backtracking and Dykstra projections."""
    r = X.shape[1]
    a = X.sum(axis=0) + 1e-10 * np.eye(r)
    f = _schatten_p(a, p)
    t = 1.0
    its = 0
    for its in range(1, opts.max_iter + 1):
        grad = p * _pow_psd(a, p - 1)
        while True:
            an = _project_dykstra(a - t * grad, X, opts.dykstra_iter, 1e-13)
            fn = _schatten_p(an, p)
            step = an - a
            if fn <= f + 1e-4 * float(np.vdot(grad, step).real) or t < 1e-12:
                break
            t *= 0.5
        if np.abs(step).max() <= 1e-12:
            a, f = an, fn
            break
        a, f = an, fn
        t = min(t * 2.0, 1e3)
    return a, its


def dual_ascent(X: np.ndarray, p: float, start: np.ndarray | None = None, max_iter: int = 500,
                seed: int = 0) -> np.ndarray:
    """Maximise sum Tr(X_n Y_n) / ||sum Y_n||_q over Y_n = C_n C_n^*.

    Starts from Y_n proportional to X_n (or from ``start``); returns PSD Y_n.
    """
    q = p / (p - 1.0)
    m, r, _ = X.shape
    if start is None:
        start = X.copy()
    lam, V = np.linalg.eigh(_herm(start))
    C0 = V * np.sqrt(np.clip(lam, 0, None))[:, None, :]
    rng = np.random.default_rng(seed)
    C0 = C0 + 1e-6 * np.abs(C0).max() * (rng.standard_normal(C0.shape) + 1j * rng.standard_normal(C0.shape))

    def unpack(z):
        return (z[:m * r * r] + 1j * z[m * r * r:]).reshape(m, r, r)

    def obj(z):
        C = unpack(z)
        Y = C @ C.conj().swapaxes(1, 2)
        Z = _herm(Y.sum(axis=0))
        lz, Vz = np.linalg.eigh(Z)
        lz = np.clip(lz, 0, None)
        nq = float(np.sum(lz ** q)) ** (1 / q)
        if nq <= 0:
            return 0.0, np.zeros_like(z)
        A = float(np.einsum("nij,nji->", X, Y).real)
        R = A / nq
        Zq = (Vz * lz ** (q - 1)) @ Vz.conj().T / nq ** (q - 1)
        Gy = X / nq - (A / nq ** 2) * Zq[None]
        Gc = 2 * Gy @ C
        return -R, -np.concatenate([Gc.real.ravel(), Gc.imag.ravel()])

    z0 = np.concatenate([C0.real.ravel(), C0.imag.ravel()])
    res = minimize(obj, z0, jac=True, method="L-BFGS-B", options={"maxiter": max_iter})
    best = res.x if -res.fun >= -obj(z0)[0] else z0
    C = unpack(best)
    return _herm(C @ C.conj().swapaxes(1, 2))


# -- public API ------------------------------------------------------------------

def _check_inputs(M: FiniteVNA, xs, p: float, tol: float = 1e-9):
    if not xs:
        raise DomainError("need a nonempty list of elements")
    if not 1 < p < np.inf:
        raise DomainError("maximal norms are computed for 1 < p < inf")
    for x in xs:
        if x.parent != M:
            raise DomainError("element from a different algebra")
        scale = max(1.0, x.norm_inf())
        if not x.is_hermitian(tol * scale) or x.min_eig() < -tol * scale:
            raise DomainError("maximal_norm_pos needs positive elements")


def maximal_norm_pos(M: FiniteVNA, xs, p: float, opts: SolverOptions | None = None) -> MaximalNormResult:
    """||sup+ x_n||_p for PSD x_n, bracketed by a feasible a and a dual certificate."""
    opts = opts or SolverOptions()
    xs = list(xs)
    _check_inputs(M, xs, p)
    a_blocks, duals = [], []
    up = lo = 0.0
    its = 0
    for k, (n, w) in enumerate(zip(M.dims, M.weights)):
        arr = _herm(np.array([x.blocks[k] for x in xs]))
        # clip rounding-level negative eigenvalues
        lam, V = np.linalg.eigh(arr)
        arr = (V * np.clip(lam, 0, None)[:, None, :]) @ V.conj().swapaxes(1, 2)
        br = _solve_block(arr, p, opts)
        a_blocks.append(br.a)
        duals.append(br.duals)
        up += w * br.upper ** p
        lo += w * br.lower ** p
        its += br.iterations
    a_star = M.element(a_blocks)
    slack = min(float((a_star - x).min_eig()) for x in xs)
    upper, lower = up ** (1 / p), lo ** (1 / p)
    converged = upper - lower <= max(1e-6, 1e-6 * upper)
    return MaximalNormResult(upper, lower, a_star, slack, its, converged, duals)


def oracle_commuting(M: FiniteVNA, xs, p: float, tol: float = 1e-9, seed: int = 0) -> float:
    """Exact value for commuting PSD x_n: p-norm of the entrywise max of joint eigenvalues."""
    xs = list(xs)
    if not xs:
        raise DomainError("need a nonempty list of elements")
    rng = np.random.default_rng(seed)
    total = 0.0
    for k, w in enumerate(M.weights):
        arr = _herm(np.array([x.blocks[k] for x in xs]))
        scale = max(1.0, float(np.abs(arr).max()))
        for i, j in itertools.combinations(range(len(arr)), 2):
            if np.abs(arr[i] @ arr[j] - arr[j] @ arr[i]).max() > tol * scale ** 2:
                raise DomainError("oracle_commuting needs commuting elements")
        c = np.einsum("n,nij->ij", rng.uniform(0.5, 1.5, len(arr)), arr)
        _, V = np.linalg.eigh(c)
        D = np.einsum("ji,njk,kl->nil", V.conj(), arr, V)
        off = D - np.einsum("nii->ni", D)[:, :, None] * np.eye(D.shape[1])
        if np.abs(off).max() > 1e3 * tol * scale:
            raise DomainError("elements could not be diagonalised simultaneously")
        top = np.einsum("nii->ni", D).real.max(axis=0)
        total += w * float(np.sum(np.clip(top, 0, None) ** p))
    return total ** (1 / p)


@dataclass
class GridOracleResult:
    value: float
    accuracy: float
    a: np.ndarray


def oracle_grid_2x2(xs, p: float, resolution: int = 21, refinements: int = 80,
                    shrink: float = 0.5, seed: int = 0) -> GridOracleResult:
    """Brute-force min ||a||_p over 2 x 2 Hermitian a = [[s+t, u+iv], [u-iv, s-t]] with a >= x_n.

    For fixed (t, u, v) the smallest feasible s has a closed form, so the
    search runs over a (t, u, v) grid on which every point is feasible; the
    objective is convex there, and the grid is zoomed around the best point.
    ``accuracy`` is the largest value change across one cell of the final grid.
    """
    xs = [np.asarray(x.blocks[0] if isinstance(x, AlgElement) else x, dtype=complex) for x in xs]
    if any(x.shape != (2, 2) for x in xs):
        raise DomainError("oracle_grid_2x2 works on 2 x 2 matrices")
    R = _schatten_p(sum(xs), p) ** (1 / p)  # the optimum has ||a||_inf <= ||x1 + x2||_p

    def evaluate(t, u, v):
        s = np.full(t.shape, -np.inf)
        for x in xs:
            al, be = x[0, 0].real - t, x[1, 1].real + t
            w2 = (u - x[0, 1].real) ** 2 + (v - x[0, 1].imag) ** 2
            s = np.maximum(s, 0.5 * (al + be) + np.sqrt(0.25 * (al - be) ** 2 + w2))
        rad = np.sqrt(t ** 2 + u ** 2 + v ** 2)
        return np.abs(s + rad) ** p + np.abs(s - rad) ** p, s

    # the objective has kinks where both constraints are active; a grid whose
    # axes are re-drawn at random on every zoom cannot stall along such a kink
    rng = np.random.default_rng(seed)
    centre = np.zeros(3)
    half = R / 2
    Q = np.eye(3)
    offs = np.linspace(-1.0, 1.0, resolution)
    cube = np.stack(np.meshgrid(offs, offs, offs, indexing="ij")).reshape(3, -1)
    best, best_pt, acc = np.inf, centre, np.inf
    for it in range(refinements + 1):
        pts = centre[:, None] + half * (Q @ cube)
        vals, _ = evaluate(*pts)
        k = int(np.argmin(vals))
        if vals[k] <= best:
            best, best_pt = float(vals[k]), pts[:, k]
            nb = np.linalg.norm(pts - best_pt[:, None], axis=0) <= 1.8 * half * 2 / (resolution - 1)
            cell = vals[nb] ** (1 / p)
            acc = float(cell.max() - cell.min())
        on_edge = np.any(np.abs(cube[:, k]) == 1.0)
        centre = best_pt
        half = half * (1.0 if on_edge else shrink)
        Q = np.linalg.qr(rng.standard_normal((3, 3)))[0]
    t, u, v = best_pt
    _, s = evaluate(np.array(t), np.array(u), np.array(v))
    s = float(s)
    a = np.array([[s + t, u + 1j * v], [u - 1j * v, s - t]])
    return GridOracleResult(best ** (1 / p), acc, a)


# -- ergodic averages ---------------------------------------------------------------

def ergodic_averages(T: LpOperator, x: AlgElement, N: int) -> list[AlgElement]:
    """A_n x = (1/(n+1)) sum_{k<=n} T^k x for n = 0..N."""
    if N < 0:
        raise DomainError("N must be >= 0")
    out = []
    y = x
    acc = x
    out.append(acc)
    for n in range(1, N + 1):
        y = apply(T, y)
        acc = acc + y
        out.append(acc / (n + 1))
    return out


def _inverse(T: LpOperator, max_cond: float) -> LpOperator:
    c = np.linalg.cond(T.matrix)
    if not np.isfinite(c) or c > max_cond:
        raise ConditioningError(f"operator is too badly conditioned to invert (cond = {c:.3g})")
    return from_matrix(T.parent, np.linalg.inv(T.matrix))


def two_sided_averages(T: LpOperator, x: AlgElement, N: int, max_cond: float = 1e12) -> list[AlgElement]:
    """(1/(2n+1)) sum_{|k|<=n} T^k x for n = 0..N."""
    if N < 0:
        raise DomainError("N must be >= 0")
    Tinv = _inverse(T, max_cond)
    out = [x]
    fwd = bwd = x
    acc = x
    for n in range(1, N + 1):
        fwd = apply(T, fwd)
        bwd = apply(Tinv, bwd)
        acc = acc + fwd + bwd
        out.append(acc / (2 * n + 1))
    return out


def mean_ergodic_projection(T: LpOperator, tol: float = 1e-9, cluster: float = 1e-6) -> LpOperator:
    """Projection onto ker(I - T) along the closure of ran(I - T)."""
    A = T.matrix
    D = A.shape[0]
    ev = np.linalg.eigvals(A)
    dist = np.abs(ev - 1.0)
    if np.any((dist > tol) & (dist < cluster)):
        raise SpectralAmbiguityError(
            f"eigenvalue at distance {dist[(dist > tol) & (dist < cluster)].min():.3g} from 1")
    K = np.eye(D) - A
    scale = max(1.0, np.abs(A).max())

    def null(B):
        _, s, Vh = np.linalg.svd(B)
        return Vh[s <= tol * scale * D].conj().T if len(s) else np.zeros((D, 0))

    R = null(K)
    L = null(K.conj().T)
    if R.shape[1] == 0:
        return from_matrix(T.parent, np.zeros((D, D)))
    G = L.conj().T @ R
    if R.shape[1] != L.shape[1] or np.linalg.cond(G) > 1e10:
        raise SpectralAmbiguityError("eigenvalue 1 is not semisimple")
    P = R @ np.linalg.solve(G, L.conj().T)
    err = max(np.abs(P @ P - P).max(), np.abs(P @ A - P).max(), np.abs(A @ P - P).max())
    if err > 1e-8 * scale:
        raise InconsistencyError(f"ergodic projection fails its identities ({err:.3g})")
    return from_matrix(T.parent, P)


@dataclass(eq=False)
class ErgodicReport:
    averages: list
    maximal_value: MaximalNormResult
    ratio: float
    projection_distance: float
    two_sided: bool
    x_norm: float
    profile_N: list = field(default_factory=list)
    profile: list = field(default_factory=list)  # (lower, upper) ratio brackets
    distance_profile: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"ratio": self.ratio, "projection_distance": self.projection_distance,
                "two_sided": self.two_sided, "x_norm": self.x_norm,
                "maximal_value": self.maximal_value.to_dict(),
                "profile_N": list(self.profile_N),
                "profile": [list(b) for b in self.profile],
                "distance_profile": list(self.distance_profile)}


def _psd_part(x: AlgElement, tol: float) -> AlgElement:
    M = x.parent
    out = []
    for b in x.blocks:
        lam, V = np.linalg.eigh(_herm(b))
        if lam[0] < -tol * max(1.0, abs(lam).max()):
            raise DomainError("average is not positive; is T positive?")
        out.append((V * np.clip(lam, 0, None)) @ V.conj().T)
    return M.element(out)


def maximal_ergodic_report(T: LpOperator, x: AlgElement, N: int, p: float,
                           two_sided: bool = False, opts: SolverOptions | None = None,
                           profile_N=None, tol: float = 1e-9) -> ErgodicReport:
    """Maximal norm of the averages A_0 x..A_N x, relative to ||x||_p.

    ``profile_N`` lists the truncation points n at which the ratio is also
    recorded (default: every n); each entry is a (lower, upper) bracket.
    """
    M = T.parent
    if not x.is_psd(tol * max(1.0, x.norm_inf())):
        raise DomainError("x must be positive")
    avgs = two_sided_averages(T, x, N) if two_sided else ergodic_averages(T, x, N)
    pos = [_psd_part(a, tol) for a in avgs]
    nx = lp_norm(M, x, p)
    if profile_N is None:
        profile_N = list(range(N + 1))
    profile_N = sorted(set(int(n) for n in profile_N if 0 <= n <= N) | {N})
    brackets, last = [], None
    for n in profile_N:
        res = maximal_norm_pos(M, pos[:n + 1], p, opts)
        brackets.append((res.lower / nx, res.upper / nx))
        last = res
    P = mean_ergodic_projection(T)
    Px = apply(P, x)
    dist = [lp_norm(M, avgs[n] - Px, p) for n in profile_N]
    return ErgodicReport(avgs, last, last.upper / nx, dist[-1], two_sided, nx,
                         profile_N, brackets, dist)


@dataclass
class LinfCheck:
    passed: bool
    source: MaximalNormResult
    image: MaximalNormResult
    margin: float  # positive = slack in the asserted inequality

    def __bool__(self):
        return self.passed


def linf_contraction_check(T: LpOperator, xs, p: float, opts: SolverOptions | None = None,
                           isometry: bool = False, tol: float = 1e-9) -> LinfCheck:
    """Does T contract (or preserve, with ``isometry``) the maximal norm of PSD xs?

    Contraction: image.upper <= source.lower + both gaps + tol, so solver bias
    cannot produce a false failure.  Isometry additionally needs
    image.lower >= source.upper - both gaps - tol.
    """
    M = T.parent
    xs = list(xs)
    src = maximal_norm_pos(M, xs, p, opts)
    img = maximal_norm_pos(M, [_psd_part(apply(T, x), tol) for x in xs], p, opts)
    slack = src.gap + img.gap + tol * max(1.0, src.upper)
    margin = src.lower + slack - img.upper
    if isometry:
        margin = min(margin, img.lower - (src.upper - slack))
    return LinfCheck(bool(margin >= 0), src, img, float(margin))
