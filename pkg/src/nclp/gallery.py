"""Built-in operator constructions and their expected checks.

A :class:`GalleryCase` is plain data: an algebra, an operator, parameters and
a list of named checks.  Checks are executed by :func:`run_case`, which looks
every name up in ``CHECKS``; the CLI and the test-suite share that registry.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .algebra import AlgElement, FiniteVNA, haar_unitary, lp_norm
from .errors import DomainError, StructureError
from .lamperti import (LampertiDecomposition, LampertiWitness, decompose,
                       is_completely_lamperti, rho_of)
from .operators import (JordanMap, LpOperator, apply, choi_cp_check, compose, conjugation,
                        falsify_positivity, from_wbj, identity_op, kraus, opnorm_lower, schur)


@dataclass
class GalleryCase:
    name: str
    algebra: FiniteVNA
    operator: LpOperator
    expected: list[dict] = field(default_factory=list)
    parameters: dict = field(default_factory=dict)


MAX_JLM_K = 8


# -- constructions -----------------------------------------------------------------

def involution_example(p: float = 2.0) -> GalleryCase:
    """Conjugation by r = [[1, 1], [0, -1]] on M_2: invertible, positive, r^2 = 1, not Lamperti."""
    M = FiniteVNA.matrix(2)
    r = M.element([[[1, 1], [0, -1]]])
    T = conjugation(r)
    expected = [
        {"name": "not_lamperti", "target": {"e": [0, 0, 0], "f": [0, 1, 1], "violation": np.sqrt(2)},
         "basis": "known-value"},
        {"name": "square_is_identity", "target": 0.0, "basis": "known-value"},
        {"name": "completely_positive", "target": True, "basis": "by-construction"},
        {"name": "inverse_positive", "target": True, "basis": "by-construction"},
        {"name": "norm_of_image", "target": {"unit": [0, 1, 1], "value": 2.0}, "basis": "known-value"},
    ]
    return GalleryCase("involution_example", M, T, expected, {"p": p, "r": [[1, 1], [0, -1]]})


def jlm_operator(k: int, p: float = 2.0) -> GalleryCase:
    """T = (T1 + T2 + T3 + T4) / 4 with a_i = e_ii and b_i = k^(-1/(2p)) e_1i."""
    if k < 2:
        raise DomainError("the construction needs k >= 2")
    if k > MAX_JLM_K:
        raise DomainError(f"k is capped at {MAX_JLM_K} (the Choi matrix is k^4 dimensional)")
    M = FiniteVNA.matrix(k)
    c = k ** (-1.0 / (2 * p))
    a = [M.unit(0, i, i) for i in range(k)]
    b = [M.unit(0, 0, i) * c for i in range(k)]
    # T1: a*, b   T2: b*, a   T3: a*, a   T4: b*, b
    A = a + b + a + b
    B = b + a + a + b
    T = kraus([x * 0.5 for x in A], [x * 0.5 for x in B])
    expected = [
        {"name": "completely_positive", "target": True, "basis": "known-value"},
        {"name": "diagonal_range", "target": 1e-12, "basis": "known-value"},
        {"name": "contraction_evidence", "target": 1 + 1e-6, "basis": "known-value"},
        {"name": "ergodic_stabilization", "target": {"N": 32, "increment": 1e-3}, "basis": "oracle"},
    ]
    return GalleryCase(f"jlm_k{k}", M, T, expected, {"k": k, "p": p})


def schur_mixed_unitary(z, p: float = 2.0) -> GalleryCase:
    """Schur multiplier with m_ij = z_i conj(z_j); equals conjugation by diag(z)."""
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(np.abs(z) - 1.0) > 1e-12):
        raise DomainError("Schur symbol needs unimodular entries")
    M = FiniteVNA.matrix(len(z))
    T = schur(M.element([np.outer(z, z.conj())]))
    expected = [
        {"name": "classification", "target": "hom", "basis": "oracle"},
        {"name": "b_is_identity", "target": 1e-10, "basis": "oracle"},
        {"name": "isometric", "target": [1.5, 2.0, 3.0], "basis": "by-construction"},
    ]
    return GalleryCase("schur_mixed_unitary", M, T, expected, {"z": z.tolist(), "p": p})


@dataclass(frozen=True)
class Leg:
    """Target block ``target`` receives source block ``source`` (None: zero leg)."""
    target: int
    source: int | None
    transposed: bool
    scale: float


def effective_classification(M: FiniteVNA, legs: list[Leg]) -> str:
    """hom / antihom / mixed-jordan as seen by multiplicativity tests.

    Transposition on 1 x 1 blocks is invisible, so such legs count for neither side.
    """
    live = [l for l in legs if l.source is not None and M.dims[l.target] >= 2]
    flipped = [l for l in live if l.transposed]
    straight = [l for l in live if not l.transposed]
    if not flipped:
        return "hom"
    if not straight:
        return "antihom"
    return "mixed-jordan"


def _jordan_from_legs(M: FiniteVNA, legs: list[Leg], units: list[np.ndarray]) -> JordanMap:
    def J(x: AlgElement) -> AlgElement:
        out = []
        for leg, u in zip(legs, units):
            n = M.dims[leg.target]
            if leg.source is None:
                out.append(np.zeros((n, n), dtype=complex))
                continue
            src = x.blocks[leg.source]
            src = src.T if leg.transposed else src
            out.append(u @ src @ u.conj().T)
        return M.element(out)
    return JordanMap.from_function(M, J)


def random_lamperti(M: FiniteVNA, seed: int = 0, classification: str = "hom",
                    contractive: bool = True, p: float = 2.0, positive: bool = True,
                    isometric: bool = False, doubly: bool = False) -> GalleryCase:
    """Random Lamperti operator T = w b J built from a block map.

    J sends target block k' to ``u x_s u*`` or ``u x_s^T u*`` for a source block
    s of the same size (or to 0); b is a positive scalar on every live leg, so it
    commutes with J(M).  ``doubly`` keeps the block map injective (so the
    trace-dual adjoint is Lamperti too); ``isometric`` forces a block
    permutation with density rho = 1.
    """
    if classification == "mixed":
        classification = "mixed-jordan"
    if classification not in ("hom", "antihom", "mixed-jordan"):
        raise DomainError(f"unknown classification {classification!r}")
    rng = np.random.default_rng(seed)
    dims = M.dims
    K = M.n_blocks
    big = [k for k in range(K) if dims[k] >= 2]
    if classification == "antihom" and not big:
        raise StructureError("antihom needs a block of size >= 2 (transpose is trivial on 1x1 blocks)")
    if classification == "mixed-jordan" and len(big) < 2:
        raise StructureError("a mixed Jordan map needs two blocks of size >= 2")

    for _attempt in range(200):
        if isometric:
            perm = _random_dim_permutation(dims, rng)
            sources = list(perm)
        else:
            sources = []
            used = set()
            for k in range(K):
                options = [s for s in range(K) if dims[s] == dims[k]]
                if doubly:
                    options = [s for s in options if s not in used]
                choice = None
                if options and rng.random() < 0.85:
                    choice = int(rng.choice(options))
                    used.add(choice)
                sources.append(choice)
        live_big = [k for k in big if sources[k] is not None]
        if not any(s is not None for s in sources):
            continue
        if classification == "antihom" and not live_big:
            continue
        if classification == "mixed-jordan" and len(live_big) < 2:
            continue
        break
    else:
        raise StructureError("could not realise the requested structure on this algebra")

    flips = [bool(rng.random() < 0.5) for _ in range(K)]
    if classification == "hom":
        flips = [False if k in big else f for k, f in enumerate(flips)]
    elif classification == "antihom":
        flips = [True if k in big else f for k, f in enumerate(flips)]
    else:
        order = list(rng.permutation(live_big))
        flips[order[0]] = True
        flips[order[1]] = False
    scales = rng.uniform(0.3, 1.6, size=K)
    legs = [Leg(k, sources[k], flips[k], float(scales[k])) for k in range(K)]

    w = M.weights
    rho = np.zeros(K)
    for leg in legs:
        if leg.source is not None:
            rho[leg.source] += w[leg.target] * leg.scale ** p / w[leg.source]
    if isometric:
        target = np.ones(K)
    elif contractive:
        target = np.where(rng.random(K) < 0.2, 1.0, rng.uniform(0.15, 1.0, size=K))
    else:
        target = rho
    factors = np.where(rho > 0, (target / np.where(rho > 0, rho, 1.0)) ** (1.0 / p), 1.0)
    legs = [Leg(l.target, l.source, l.transposed,
                l.scale * (factors[l.source] if l.source is not None else 1.0)) for l in legs]

    units = [haar_unitary(dims[k], rng) for k in range(K)]
    J = _jordan_from_legs(M, legs, units)
    J1 = J(M.identity())
    b = M.central([l.scale if l.source is not None else 0.0 for l in legs])
    if positive:
        wpart = J1
    else:
        wpart = M.element([haar_unitary(n, rng) for n in dims]) @ J1
    T = from_wbj(wpart, b, J)
    cls = effective_classification(M, legs)
    expected = [
        {"name": "roundtrip", "target": 1e-8, "basis": "oracle"},
        {"name": "classification", "target": cls, "basis": "oracle"},
    ]
    if contractive or isometric:
        expected.append({"name": "rho_bounded", "target": 1 + 1e-10, "basis": "oracle"})
    params = {"seed": seed, "classification": classification, "contractive": contractive,
              "p": p, "positive": positive, "isometric": isometric, "doubly": doubly,
              "legs": [leg.__dict__ for leg in legs]}
    return GalleryCase(f"random_lamperti_{classification}_{seed}", M, T, expected, params)


def _random_dim_permutation(dims, rng) -> list[int]:
    out = [None] * len(dims)
    for d in set(dims):
        idx = [k for k in range(len(dims)) if dims[k] == d]
        for k, s in zip(idx, rng.permutation(idx)):
            out[k] = int(s)
    return out


def positive_isometry_conjugation(n: int, seed: int = 0, phases=(0.0, 0.5, 1.0)) -> GalleryCase:
    """x -> u x u* on M_n with u = v diag(exp(i pi phases)) v*, v Haar random."""
    rng = np.random.default_rng(seed)
    M = FiniteVNA.matrix(n)
    ph = np.resize(np.asarray(phases, dtype=float), n)
    v = haar_unitary(n, rng)
    u = v @ np.diag(np.exp(1j * np.pi * ph)) @ v.conj().T
    T = conjugation(M.element([u]))
    expected = [{"name": "classification", "target": "hom", "basis": "by-construction"},
                {"name": "isometric", "target": [1.5, 2.0, 3.0], "basis": "by-construction"}]
    return GalleryCase(f"isometry_M{n}_{seed}", M, T, expected, {"seed": seed, "phases": list(ph)})


# -- checks ------------------------------------------------------------------------

def _check_not_lamperti(case, target, tol, seed):
    d = decompose(case.operator, case.parameters.get("p", 2.0), tol, seed)
    if not isinstance(d, LampertiWitness):
        return False, f"expected a witness, got status {d.status}"
    e_ok = d.e.allclose(case.algebra.unit(*target["e"]))
    f_ok = d.f.allclose(case.algebra.unit(*target["f"]))
    ok = e_ok and f_ok and abs(d.violation - target["violation"]) <= 1e-10
    return ok, f"violation={d.violation:.12g}"


def _check_square(case, target, tol, seed):
    T = case.operator
    err = float(np.abs(T.matrix @ T.matrix - np.eye(T.matrix.shape[0])).max())
    return err <= 1e-12, f"||T^2 - I||={err:.3e}"


def _check_cp(case, target, tol, seed):
    c = choi_cp_check(case.operator)
    return c.is_cp == target, f"min_eig={c.min_eig:.3e}"


def _check_inverse_positive(case, target, tol, seed):
    T = case.operator
    inv = LpOperator(T.parent, np.linalg.inv(T.matrix))
    wit = falsify_positivity(inv, trials=100, seed=seed)
    return (wit is None) == target, "no negative image found" if wit is None else "witness found"


def _check_norm_of_image(case, target, tol, seed):
    M = case.algebra
    x = M.unit(*target["unit"])
    vals = [lp_norm(M, apply(case.operator, x), p) for p in (1.5, 2.0, 3.0)]
    ok = all(abs(v - target["value"]) <= 1e-10 for v in vals)
    return ok, "norms=" + ", ".join(f"{v:.12g}" for v in vals)


def _check_diagonal_range(case, target, tol, seed):
    M = case.algebra
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(50):
        y = apply(case.operator, M.random_psd(rng)).blocks[0]
        worst = max(worst, float(np.abs(y - np.diag(np.diag(y))).max()))
    return worst <= target, f"max off-diagonal={worst:.3e}"


def _check_contraction(case, target, tol, seed):
    est = opnorm_lower(case.operator, case.parameters.get("p", 2.0), seed=seed)
    return est.value <= target, f"opnorm_lower={est.value:.9f}"


def _check_roundtrip(case, target, tol, seed):
    d = decompose(case.operator, case.parameters.get("p", 2.0), tol, seed)
    if not isinstance(d, LampertiDecomposition):
        return False, f"status {d.status}"
    return d.max_residual <= target, f"max residual={d.max_residual:.3e}"


def _check_classification(case, target, tol, seed):
    d = decompose(case.operator, case.parameters.get("p", 2.0), tol, seed)
    if not isinstance(d, LampertiDecomposition):
        return False, f"status {d.status}"
    cl = is_completely_lamperti(d, tol)
    ok = d.classification == target and cl == (target == "hom")
    return ok, f"classification={d.classification}, completely_lamperti={cl}"


def _check_b_identity(case, target, tol, seed):
    d = decompose(case.operator, case.parameters.get("p", 2.0), tol, seed)
    if not isinstance(d, LampertiDecomposition):
        return False, f"status {d.status}"
    err = (d.b - case.algebra.identity()).norm_inf()
    return err <= target and d.max_residual <= target, f"||b - 1||={err:.3e}"


def _check_isometric(case, target, tol, seed):
    M = case.algebra
    rng = np.random.default_rng(seed)
    worst = 0.0
    for p in target:
        for _ in range(20):
            x = M.random_element(rng)
            worst = max(worst, abs(lp_norm(M, apply(case.operator, x), p) - lp_norm(M, x, p)))
    return worst <= 1e-10, f"max deviation={worst:.3e}"


def _check_rho(case, target, tol, seed):
    rho = rho_of(case.operator, case.parameters.get("p", 2.0), tol)
    top = float(rho.central_values().real.max())
    return top <= target, f"max rho={top:.12g}"


def _check_ergodic(case, target, tol, seed):
    from .maximal import maximal_ergodic_report
    x = case.algebra.random_psd(np.random.default_rng(seed))
    N = target["N"]
    rep = maximal_ergodic_report(case.operator, x, N, case.parameters.get("p", 2.0),
                                 profile_N=[N - 1, N])
    (lo_prev, up_prev), (lo, up) = rep.profile
    inc = up - lo_prev
    ok = up >= lo_prev - 1e-9 and inc <= target["increment"]
    return ok, f"ratio({N})={up:.9f}, increment={inc:.3e}"


CHECKS: dict[str, Callable] = {
    "not_lamperti": _check_not_lamperti,
    "square_is_identity": _check_square,
    "completely_positive": _check_cp,
    "inverse_positive": _check_inverse_positive,
    "norm_of_image": _check_norm_of_image,
    "diagonal_range": _check_diagonal_range,
    "contraction_evidence": _check_contraction,
    "roundtrip": _check_roundtrip,
    "classification": _check_classification,
    "b_is_identity": _check_b_identity,
    "isometric": _check_isometric,
    "rho_bounded": _check_rho,
    "ergodic_stabilization": _check_ergodic,
}


def run_case(case: GalleryCase, tol: float = 1e-8, seed: int = 0) -> dict:
    results = []
    for chk in case.expected:
        ok, detail = CHECKS[chk["name"]](case, chk["target"], tol, seed)
        results.append({"name": chk["name"], "passed": bool(ok), "detail": detail,
                        "basis": chk.get("basis")})
    return {"case": case.name, "passed": all(r["passed"] for r in results), "checks": results}


def builtin_cases() -> dict[str, Callable[[], GalleryCase]]:
    """Named zero-argument constructors exposed by ``gallery list``."""
    cases = {
        "involution_example": involution_example,
        "schur_z_1_-1": lambda: schur_mixed_unitary([1, -1]),
        "schur_z_1_i": lambda: schur_mixed_unitary([1, 1j]),
        "isometry_M3": lambda: positive_isometry_conjugation(3),
    }
    for k in (2, 3, 4):
        cases[f"jlm_k{k}"] = (lambda k=k: jlm_operator(k))
    cases["random_hom_M2"] = lambda: random_lamperti(FiniteVNA.matrix(2), 0, "hom")
    cases["random_antihom_M3"] = lambda: random_lamperti(FiniteVNA.matrix(3), 1, "antihom")
    cases["random_mixed_M2+M2"] = lambda: random_lamperti(FiniteVNA.from_dims([2, 2]), 2, "mixed")
    cases["random_hom_l4"] = lambda: random_lamperti(FiniteVNA.diagonal(4), 3, "hom")
    return {key: (lambda key=key, make=make: replace(make(), name=key)) for key, make in cases.items()}
