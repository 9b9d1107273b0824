import numpy as np
import pytest
from hypothesis import given

from conftest import algebras, exponents, rng_of, seeds
from nclp.algebra import FiniteVNA, lp_norm, trace
from nclp.errors import DomainError, StructureError
from nclp.operators import (Conjugation, JordanMap, Kraus, adjoint, apply, choi_cp_check, compose,
                            conjugation, convex_combine, falsify_positivity, from_function, from_matrix,
                            identity_op, kraus, matrix_of, opnorm_lower, power, scale, schur,
                            transpose_op, zero_op)

R72 = [[1, 1], [0, -1]]


def test_apply_examples():
    M = FiniteVNA.matrix(2)
    T = conjugation(M.element([R72]))
    assert apply(T, M.unit(0, 0, 0)).allclose(M.unit(0, 0, 0))
    assert apply(T, M.unit(0, 1, 1)).allclose(M.element([[[1, -1], [-1, 1]]]))
    x = M.random_element(rng_of(0))
    assert apply(identity_op(M), x).allclose(x)
    with pytest.raises(StructureError):
        apply(T, FiniteVNA.matrix(3).identity())


def test_adjoint_examples():
    M = FiniteVNA.matrix(2)
    I = identity_op(M)
    np.testing.assert_allclose(adjoint(I).matrix, I.matrix)
    r = M.element([[[1, 2j], [0.5, -1]]])
    T = conjugation(r)
    Ts = adjoint(T)
    assert isinstance(Ts.form, Conjugation)
    np.testing.assert_allclose(Ts.matrix, conjugation(r.adj()).matrix, atol=1e-12)
    L = FiniteVNA.diagonal(2)
    shift = from_function(L, lambda x: L.central([x.blocks[1][0, 0], 0]))
    back = from_function(L, lambda y: L.central([0, y.blocks[0][0, 0]]))
    np.testing.assert_allclose(adjoint(shift).matrix, back.matrix, atol=1e-12)


def test_compose_and_combine_examples():
    M = FiniteVNA.matrix(2)
    T = conjugation(M.element([R72]))
    np.testing.assert_allclose(compose(T, identity_op(M)).matrix, T.matrix)
    np.testing.assert_allclose(convex_combine([1.0], [T]).matrix, T.matrix)
    np.testing.assert_allclose(convex_combine([0.5, 0.5], [T, T]).matrix, T.matrix)
    with pytest.raises(DomainError):
        convex_combine([0.7, 0.7], [T, T])
    with pytest.raises(DomainError):
        convex_combine([1.5, -0.5], [T, T])
    # conjugations compose structurally
    C = compose(T, T)
    assert isinstance(C.form, Conjugation)
    np.testing.assert_allclose(C.matrix, np.eye(4), atol=1e-12)


def test_choi_examples():
    M = FiniteVNA.matrix(2)
    assert choi_cp_check(conjugation(M.element([R72]))).is_cp
    c = choi_cp_check(transpose_op(M))
    assert not c.is_cp
    assert c.min_eig == pytest.approx(-1.0)


def test_falsify_positivity_examples():
    M = FiniteVNA.matrix(2)
    assert falsify_positivity(transpose_op(M), trials=100) is None
    assert falsify_positivity(conjugation(M.element([R72])), trials=100) is None
    w = falsify_positivity(scale(-1.0, identity_op(M)), trials=5)
    assert w is not None and w.is_psd()


def test_opnorm_lower_examples():
    M = FiniteVNA.matrix(2)
    assert opnorm_lower(identity_op(M), 2.0).value >= 1 - 1e-9
    assert opnorm_lower(zero_op(M), 3.0).value == 0.0
    T = conjugation(M.element([R72]))
    for p in (1.5, 2.0, 3.0):
        est = opnorm_lower(T, p)
        assert est.value >= 2 - 1e-6
    # the involution example has norm (3 + sqrt 5)/2 on S_2 (the largest singular value of r squared)
    assert opnorm_lower(T, 2.0).value == pytest.approx((3 + np.sqrt(5)) / 2, rel=1e-8)


def test_opnorm_lower_needs_interior_p():
    M = FiniteVNA.matrix(2)
    with pytest.raises(DomainError):
        opnorm_lower(identity_op(M), 1.0)


def test_kraus_and_schur_forms():
    M = FiniteVNA.matrix(3)
    rng = rng_of(5)
    a = [M.random_element(rng) for _ in range(2)]
    b = [M.random_element(rng) for _ in range(2)]
    T = kraus(a, b)
    assert isinstance(T.form, Kraus)
    for e in M.basis():
        assert apply(T, e).allclose(T.structured_apply(e), atol=1e-12)
    z = np.exp(1j * rng.uniform(0, 2 * np.pi, 3))
    S = schur(M.element([np.outer(z, z.conj())]))
    u = M.element([np.diag(z)])
    np.testing.assert_allclose(S.matrix, conjugation(u).matrix, atol=1e-12)


def test_transpose_jordan_residuals():
    M = FiniteVNA.matrix(2)
    J = JordanMap.analyzed(M, transpose_op(M).matrix)
    assert J.residuals["jordan"] <= 1e-14 and J.residuals["antihom"] <= 1e-14
    assert J.residuals["hom"] == pytest.approx(1.0)
    f = J.flags(1e-10)
    assert f["is_jordan"] and f["is_antihom"] and not f["is_hom"]


@given(algebras(), seeds)
def test_adjoint_involution_and_duality(M, seed):
    rng = rng_of(seed)
    D = M.vec_dim
    T = from_matrix(M, rng.standard_normal((D, D)) + 1j * rng.standard_normal((D, D)))
    Ts = adjoint(T)
    np.testing.assert_allclose(adjoint(Ts).matrix, T.matrix, atol=1e-12 * np.abs(T.matrix).max())
    for _ in range(10):
        x, y = M.random_element(rng), M.random_element(rng)
        lhs = trace(M, apply(T, x) @ y)
        rhs = trace(M, x @ apply(Ts, y))
        assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(lhs))


@given(algebras(), seeds)
def test_conjugations_are_cp(M, seed):
    r = M.random_element(rng_of(seed))
    assert choi_cp_check(conjugation(r)).is_cp


@given(algebras(), seeds)
def test_compose_consistency(M, seed):
    rng = rng_of(seed)
    S = conjugation(M.random_element(rng))
    T = kraus([M.random_element(rng)], [M.random_element(rng)])
    C = compose(S, T)
    direct = matrix_of(M, lambda x: apply(S, apply(T, x)))
    np.testing.assert_allclose(C.matrix, direct, atol=1e-10 * max(1, np.abs(direct).max()))


@given(algebras(), seeds)
def test_convex_combination_stays_cp(M, seed):
    rng = rng_of(seed)
    ops = [conjugation(M.random_element(rng)) for _ in range(3)]
    lam = rng.dirichlet(np.ones(3))
    assert choi_cp_check(convex_combine(lam, ops)).is_cp


@given(algebras(), seeds)
def test_apply_is_linear(M, seed):
    rng = rng_of(seed)
    T = kraus([M.random_element(rng)], [M.random_element(rng)])
    x, y = M.random_element(rng), M.random_element(rng)
    alpha = complex(*rng.standard_normal(2))
    lhs = apply(T, x * alpha + y)
    rhs = apply(T, x) * alpha + apply(T, y)
    assert lhs.allclose(rhs, atol=1e-10 * max(1, lhs.norm_inf()))


@given(algebras(max_dim=2), seeds, exponents)
def test_opnorm_lower_is_attained_by_witness(M, seed, p):
    rng = rng_of(seed)
    T = conjugation(M.random_element(rng))
    est = opnorm_lower(T, p, restarts=2)
    x = est.witness
    assert est.value == pytest.approx(lp_norm(M, apply(T, x), p) / lp_norm(M, x, p), rel=1e-12)


def test_power():
    M = FiniteVNA.matrix(2)
    T = conjugation(M.element([R72]))
    np.testing.assert_allclose(power(T, 2).matrix, np.eye(4), atol=1e-12)
    np.testing.assert_allclose(power(T, 0).matrix, np.eye(4))
