"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""

import time

import numpy as np
import pytest

from nclp.algebra import FiniteVNA, haar_unitary, lp_norm
from nclp.dilation import (balance_residual, convex_n_dilation, shift_dilation,
                           simultaneous_apply, verify_isometry)
from nclp.errors import StructureError
from nclp.gallery import (involution_example, jlm_operator, positive_isometry_conjugation,
                          random_lamperti)
from nclp.lamperti import (LampertiDecomposition, LampertiWitness, decompose,
                           doubly_lamperti_factor, is_completely_lamperti)
from nclp.maximal import (linf_contraction_check, maximal_ergodic_report, maximal_norm_pos,
                          oracle_commuting, oracle_grid_2x2)
from nclp.operators import apply, choi_cp_check, power


@pytest.fixture
def verdict(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        assert ok, detail
    return emit


def test_criterion_1_involution_example(verdict):
    t0 = time.perf_counter()
    case = involution_example()
    M, T = case.algebra, case.operator
    d = decompose(T)
    e11, e22 = M.unit(0, 0, 0), M.unit(0, 1, 1)
    witness_ok = (isinstance(d, LampertiWitness) and d.e.allclose(e11) and d.f.allclose(e22)
                  and abs(d.violation - np.sqrt(2)) <= 1e-10)
    direct = (apply(T, e11) @ apply(T, e22)).norm_inf()
    norms = [lp_norm(M, apply(T, e22), p) for p in (1.5, 2.0, 3.0)]
    norm_err = max(abs(v - 2.0) for v in norms)
    sq_err = float(np.abs(power(T, 2).matrix - np.eye(4)).max())
    elapsed = time.perf_counter() - t0
    ok = (witness_ok and abs(direct - np.sqrt(2)) <= 1e-10 and norm_err <= 1e-10
          and sq_err <= 1e-12 and elapsed < 1.0)
    verdict(1, ok, f"witness={witness_ok}, |T(e)T(f)|={direct:.12f}, norm err={norm_err:.1e}, "
                   f"|T^2-I|={sq_err:.1e}, {elapsed:.2f}s")


ROUNDTRIP_CELLS = {
    "M_2": ([2], ["hom", "antihom"]),
    "M_3": ([3], ["hom", "antihom"]),
    "M_2+M_2": ([2, 2], ["hom", "antihom", "mixed"]),
    "l_4": ([1, 1, 1, 1], ["hom"]),
}
INFEASIBLE_CELLS = [([2], "mixed"), ([3], "mixed"), ([1, 1, 1, 1], "antihom"),
                    ([1, 1, 1, 1], "mixed")]


def test_criterion_2_lamperti_roundtrip(verdict):
    t0 = time.perf_counter()
    cells = [(dims, cls) for dims, classes in ROUNDTRIP_CELLS.values() for cls in classes]
    worst, failures, count = 0.0, [], 0
    for n in range(200):
        dims, cls = cells[n % len(cells)]
        M = FiniteVNA.from_dims(dims, list(np.random.default_rng(n).uniform(0.5, 2.0, len(dims))))
        case = random_lamperti(M, seed=n, classification=cls, positive=bool(n % 2))
        want = next(c["target"] for c in case.expected if c["name"] == "classification")
        d = decompose(case.operator)
        count += 1
        if not isinstance(d, LampertiDecomposition):
            failures.append((n, "no decomposition"))
            continue
        worst = max(worst, d.max_residual)
        gen = {"mixed": "mixed-jordan"}.get(cls, cls)
        if d.classification != want or want != gen:
            failures.append((n, d.classification, want, gen))
        if is_completely_lamperti(d) != (d.classification == "hom"):
            failures.append((n, "complete-Lamperti mismatch"))
    refused = 0
    for dims, cls in INFEASIBLE_CELLS:
        try:
            random_lamperti(FiniteVNA.from_dims(dims), 0, cls)
        except StructureError:
            refused += 1
    elapsed = time.perf_counter() - t0
    ok = (not failures and worst <= 1e-8 and refused == len(INFEASIBLE_CELLS) and elapsed < 30)
    verdict(2, ok, f"{count} cases over {len(cells)} feasible cells, max residual={worst:.1e}, "
                   f"mismatches={failures[:3]}, infeasible cells refused {refused}/"
                   f"{len(INFEASIBLE_CELLS)}, {elapsed:.1f}s")


def test_criterion_3_convex_dilation(verdict):
    t0 = time.perf_counter()
    M = FiniteVNA.matrix(2)
    res = iso = qj = 0.0
    runs = 0
    for p in (1.5, 2.0, 4.0):
        for n in range(20):
            ops = [random_lamperti(M, seed=1000 * n + 2 * j + int(10 * p),
                                   classification=("hom", "antihom")[(n + j) % 2],
                                   p=p, contractive=True).operator for j in range(2)]
            sys_ = convex_n_dilation([0.5, 0.5], ops, 3, p)
            res = max(res, max(sys_.report["residuals"]))
            qj = max(qj, sys_.report["qj_residual"])
            iso = max(iso, verify_isometry(sys_, samples=10, seed=n))
            runs += 1
    elapsed = time.perf_counter() - t0
    ok = res <= 1e-8 and iso <= 1e-8 and qj <= 1e-10 and elapsed < 60
    verdict(3, ok, f"{runs} systems, max power residual={res:.1e}, isometry deviation={iso:.1e}, "
                   f"|QJ-I|={qj:.1e}, {elapsed:.1f}s")


def test_criterion_4_shift_dilation(verdict):
    rng = np.random.default_rng(4)
    algebras = [FiniteVNA.matrix(2), FiniteVNA.from_dims([2, 2], [1.0, 2.0]),
                FiniteVNA.diagonal(4), FiniteVNA.matrix(3), FiniteVNA.from_dims([2, 1])]
    classes = ["hom", "mixed", "hom", "antihom", "antihom"]
    bal = 0.0
    for i in range(10):
        M, cls = algebras[i % 5], classes[i % 5]
        p = (1.5, 2.0, 3.0)[i % 3]
        T = random_lamperti(M, seed=40 + i, classification=cls, p=p, contractive=True).operator
        sys_ = shift_dilation(T, p)
        for _ in range(10):
            bal = max(bal, balance_residual(sys_, M.random_psd(rng)))
    word_res, words = 0.0, 0
    for i, M in enumerate(algebras[:3]):
        p = (1.5, 2.0, 3.0)[i]
        family = [random_lamperti(M, seed=70 + 3 * i + j, classification=classes[i], p=p).operator
                  for j in range(3)]
        sys_ = shift_dilation(family, p)
        for length in range(6):
            for _ in range(5):
                word = list(rng.integers(0, len(family), size=length))
                _, r = simultaneous_apply(sys_, word, M.random_element(rng))
                word_res = max(word_res, r)
                words += 1
    ok = bal <= 1e-9 and word_res <= 1e-9
    verdict(4, ok, f"balance residual={bal:.1e} over 100 PSD samples, word residual={word_res:.1e} "
                   f"over {words} words of length <= 5")


def _commuting(M, rng, m):
    U = [haar_unitary(n, rng) for n in M.dims]
    return [M.element([u @ np.diag(rng.uniform(0, 2, n)) @ u.conj().T for u, n in zip(U, M.dims)])
            for _ in range(m)]


def test_criterion_5_maximal_solver(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    gap = comm_err = grid_err = mono = homog = 0.0
    instances = []
    shapes = [FiniteVNA.matrix(2), FiniteVNA.matrix(3), FiniteVNA.from_dims([2, 1], [1.0, 0.5])]
    for i in range(15):
        M = shapes[i % 3]
        p = (1.5, 2.0, 3.0, 4.0)[i % 4]
        xs = _commuting(M, rng, 3)
        r = maximal_norm_pos(M, xs, p)
        comm_err = max(comm_err, abs(r.upper - oracle_commuting(M, xs, p)))
        instances.append((M, xs, p, r))
    M2 = FiniteVNA.matrix(2)
    for i in range(30):
        p = (1.5, 2.0, 3.0, 4.0)[i % 4]
        xs = [M2.random_psd(rng, rank=int(rng.integers(1, 3))) for _ in range(2)]
        r = maximal_norm_pos(M2, xs, p)
        g = oracle_grid_2x2(xs, p, seed=i)
        grid_err = max(grid_err, abs(r.upper - g.value))
        instances.append((M2, xs, p, r))
    for M, xs, p, r in instances:
        gap = max(gap, r.gap)
        sub = maximal_norm_pos(M, xs[:-1], p)
        mono = max(mono, sub.lower - r.upper)  # positive means a violation
        alpha = 3.7
        ra = maximal_norm_pos(M, [alpha * x for x in xs], p)
        slack = alpha * r.gap + ra.gap
        homog = max(homog, abs(ra.upper - alpha * r.upper) - slack)
    elapsed = time.perf_counter() - t0
    ok = (gap <= 1e-4 and comm_err <= 1e-6 and grid_err <= 1e-3 and mono <= 1e-9
          and homog <= 1e-8 and elapsed < 300)
    verdict(5, ok, f"{len(instances)} instances, max gap={gap:.1e}, commuting err={comm_err:.1e}, "
                   f"grid err={grid_err:.1e}, monotonicity excess={mono:.1e}, "
                   f"homogeneity excess={homog:.1e}, {elapsed:.1f}s")


def test_criterion_6_linf_contraction(verdict):
    rng = np.random.default_rng(6)
    M = FiniteVNA.from_dims([2, 2], [1.0, 1.5])
    bad, margins = [], []
    for i in range(20):
        isometric = i >= 10
        p = 2.0 + 0.5 * (i % 3)
        case = random_lamperti(M, seed=60 + i, classification=("hom", "antihom", "mixed")[i % 3],
                               p=p, contractive=True, isometric=isometric)
        xs = [M.random_psd(rng, rank=int(rng.integers(1, 3))) for _ in range(2)]
        chk = linf_contraction_check(case.operator, xs, p, isometry=isometric)
        margins.append(chk.margin)
        if not chk:
            bad.append(i)
    ok = not bad
    verdict(6, ok, f"10 contractions + 10 isometries, failures={bad}, min margin={min(margins):.1e}")


def test_criterion_7_doubly_factorization(verdict):
    worst_pow, worst_norm, count = 0.0, 0.0, 0
    for i in range(20):
        M = FiniteVNA.diagonal(4) if i < 10 else FiniteVNA.from_dims([2, 2], [1.0, 2.0])
        cls = "hom" if i < 10 else ("hom", "antihom", "mixed")[i % 3]
        p = (1.5, 2.0, 3.0)[i % 3]
        case = random_lamperti(M, seed=700 + i, classification=cls, p=p, contractive=False,
                               doubly=True)
        f = doubly_lamperti_factor(case.operator, p, N_check=4, seed=i)
        worst_pow = max(worst_pow, max(f.power_residuals))
        worst_norm = max(worst_norm, max(lo - th for th, lo in zip(f.theta_norms, f.opnorm_lower)))
        count += 1
    ok = worst_pow <= 1e-8 and worst_norm <= 1e-6
    verdict(7, ok, f"{count} operators, max |T^n - theta_n S^n|={worst_pow:.1e}, "
                   f"max (opnorm_lower - |theta_n|)={worst_norm:.1e}")


DYADIC = [2, 4, 8, 16, 32]


def test_criterion_8_ergodic_stabilization(verdict):
    rng = np.random.default_rng(8)
    ops = [("isometry", positive_isometry_conjugation(3, seed=8).operator)]
    ops += [(f"jlm k={k}", jlm_operator(k).operator) for k in (2, 3, 4)]
    problems, max_inc = [], 0.0
    for label, T in ops:
        M = T.parent
        for j in range(20):
            x = M.random_psd(rng, rank=int(rng.integers(1, M.dims[0] + 1)))
            rep = maximal_ergodic_report(T, x, 32, 2.0)
            prof = dict(zip(rep.profile_N, rep.profile))
            for n in range(1, 33):
                if prof[n][1] < prof[n - 1][0] - 1e-9:
                    problems.append((label, j, "decrease", n))
            inc = prof[32][1] - prof[31][0]
            max_inc = max(max_inc, inc)
            if inc > 1e-3:
                problems.append((label, j, "increment", inc))
            dist = dict(zip(rep.profile_N, rep.distance_profile))
            d = [dist[n] for n in DYADIC]
            if any(b > a + 1e-12 for a, b in zip(d, d[1:])):
                problems.append((label, j, "distance", d))
    ok = not problems
    verdict(8, ok, f"{len(ops)} operators x 20 inputs, max increment at N=32={max_inc:.1e}, "
                   f"problems={problems[:3]}")


def test_criterion_9_jlm_diagonality(verdict):
    rng = np.random.default_rng(9)
    off, min_eig = 0.0, np.inf
    for k in (2, 3, 4):
        case = jlm_operator(k)
        for _ in range(50):
            t = apply(case.operator, case.algebra.random_psd(rng)).blocks[0]
            off = max(off, float(np.abs(t - np.diag(np.diag(t))).max()))
        min_eig = min(min_eig, choi_cp_check(case.operator).min_eig)
    ok = off <= 1e-12 and min_eig >= -1e-10
    verdict(9, ok, f"max off-diagonal={off:.1e}, Choi min eigenvalue={min_eig:.1e}")
