import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from conftest import algebras, exponents, rng_of, seeds
from nclp.algebra import FiniteVNA, haar_unitary, lp_norm, lp_norm_p
from nclp.dilation import (SeqElement, balance_residual, convex_n_dilation, dense_maps,
                           random_tensor_vector, shift_dilation, simultaneous_apply,
                           trace_identity_residual, verify_isometry, verify_powers)
from nclp.errors import DomainError, HypothesisViolation, ResourceError, StructureError
from nclp.gallery import involution_example, random_lamperti
from nclp.operators import (apply, compose, conjugation, from_function, scale, schur,
                            transpose_op, zero_op)


def _unitary_conj(M, seed):
    return conjugation(M.element([haar_unitary(n, rng_of(seed)) for n in M.dims]))


def _contraction(M, seed, p=2.0):
    try:
        return random_lamperti(M, seed, "hom", p=p, contractive=True).operator
    except StructureError:
        assume(False)


@pytest.mark.parametrize("p", [1.0, 1.5, 3.0])
def test_shift_dilation_isometry_collapses(p):
    M = FiniteVNA.from_dims([2, 1])
    T = _unitary_conj(M, 0)
    sys_ = shift_dilation(T, p)
    leg = sys_.legs[0]
    assert leg.rho.allclose(M.identity(), atol=1e-10)
    assert leg.sigma.allclose(M.zero(), atol=1e-5)
    x = M.random_element(rng_of(1))
    v = sys_.embed(x)
    y = x
    for _ in range(4):
        v = sys_.U(v)
        y = apply(T, y)
        assert sys_.compress(v).allclose(y, atol=1e-12)
    assert verify_isometry(sys_) <= 1e-10


def test_shift_dilation_of_zero():
    M = FiniteVNA.matrix(2)
    sys_ = shift_dilation(zero_op(M), 2.0)
    x = M.random_element(rng_of(0))
    v = sys_.U(sys_.embed(x))
    assert v.slots[0].allclose(M.zero())
    assert v.slots[1].allclose(x)
    assert v.norm(2.0) == pytest.approx(lp_norm(M, x, 2.0))


@pytest.mark.parametrize("p", [1.5, 2.0, 4.0])
def test_shift_dilation_of_l2_shift(p):
    L = FiniteVNA.diagonal(2)
    T = from_function(L, lambda x: L.central([x.blocks[1][0, 0], 0]))
    sys_ = shift_dilation(T, p)
    np.testing.assert_allclose(sys_.legs[0].rho.central_values().real, [0, 1], atol=1e-12)
    rng = rng_of(3)
    for _ in range(20):
        x = L.random_element(rng)
        assert sys_.norm(sys_.U(sys_.embed(x))) == pytest.approx(lp_norm(L, x, p), abs=1e-12)


def test_shift_dilation_refuses_bad_input():
    M = FiniteVNA.matrix(2)
    with pytest.raises(HypothesisViolation):
        shift_dilation(involution_example().operator, 2.0)
    with pytest.raises(HypothesisViolation):
        shift_dilation(scale(2.0, _unitary_conj(M, 0)), 2.0)


def test_seq_norm():
    M = FiniteVNA.diagonal(2)
    v = SeqElement.of(M, [M.central([3, 0]), M.central([0, 4])])
    assert v.norm(2.0) == pytest.approx(5.0)
    assert len(v) == 2


def test_simultaneous_apply_examples():
    M = FiniteVNA.matrix(2)
    T1, T2 = _unitary_conj(M, 0), _unitary_conj(M, 1)
    sys_ = shift_dilation([T1, T2], 2.0)
    x = M.random_element(rng_of(2))
    out, res = simultaneous_apply(sys_, [], x)
    assert out.allclose(x) and res == 0.0
    out, res = simultaneous_apply(sys_, [0, 1], x)
    assert out.allclose(apply(compose(T1, T2), x), atol=1e-12)
    with pytest.raises(DomainError):
        simultaneous_apply(sys_, [2], x)


def test_simultaneous_words_of_length_five():
    M = FiniteVNA.from_dims([2, 2])
    ops = [random_lamperti(M, s, c).operator for s, c in [(0, "hom"), (1, "mixed"), (2, "antihom")]]
    sys_ = shift_dilation(ops, 3.0)
    rng = rng_of(4)
    for _ in range(10):
        word = list(rng.integers(0, 3, size=5))
        _, res = simultaneous_apply(sys_, word, M.random_element(rng))
        assert res <= 1e-9


@pytest.mark.parametrize("p", [1.5, 2.0])
def test_convex_single_isometry(p):
    M = FiniteVNA.matrix(2)
    sys_ = convex_n_dilation([1.0], [_unitary_conj(M, 5)], 3, p)
    assert max(sys_.report["residuals"]) <= 1e-12
    assert verify_isometry(sys_) <= 1e-9


def test_convex_identical_unitaries():
    M = FiniteVNA.matrix(2)
    U0 = _unitary_conj(M, 6)
    sys_ = convex_n_dilation([0.5, 0.5], [U0, U0], 3, 2.0)
    assert max(sys_.report["residuals"]) <= 1e-12


def test_convex_sign_and_transpose():
    M = FiniteVNA.matrix(2)
    ops = [conjugation(M.element([np.diag([1.0, -1.0])])), transpose_op(M)]
    sys_ = convex_n_dilation([0.5, 0.5], ops, 3, 4.0)
    rep = verify_powers(sys_)
    assert len(rep["residuals"]) == 4
    assert max(rep["residuals"]) <= 1e-9
    assert rep["qj_residual"] <= 1e-10
    assert verify_isometry(sys_, p=4.0) <= 1e-9
    with pytest.raises(DomainError):
        verify_isometry(sys_, p=2.0)


def test_unlifted_contraction_is_not_isometric():
    M = FiniteVNA.matrix(2)
    half = schur(M.element([np.full((2, 2), 0.5)]))
    sys_ = convex_n_dilation([0.5, 0.5], [half, _unitary_conj(M, 0)], 2, 2.0, lift=False)
    assert verify_isometry(sys_) > 1e-3
    lifted = convex_n_dilation([0.5, 0.5], [half, _unitary_conj(M, 0)], 2, 2.0)
    assert verify_isometry(lifted) <= 1e-9
    assert max(lifted.report["residuals"]) <= 1e-9


def test_convex_errors():
    M = FiniteVNA.matrix(2)
    U0 = _unitary_conj(M, 0)
    with pytest.raises(DomainError):
        convex_n_dilation([1.0], [U0], 2, 1.0)
    with pytest.raises(DomainError):
        convex_n_dilation([0.7, 0.7], [U0, U0], 2, 2.0)
    with pytest.raises(DomainError):
        convex_n_dilation([1.5, -0.5], [U0, U0], 2, 2.0)
    with pytest.raises(ResourceError) as info:
        convex_n_dilation([0.25] * 4, [U0] * 4, 8, 2.0)
    assert info.value.required > 10 ** 6


def test_dense_maps_match_matrix_free():
    M = FiniteVNA.diagonal(2)
    ops = [from_function(M, lambda x: M.central([x.blocks[1][0, 0], x.blocks[0][0, 0]])),
           _unitary_conj(M, 0)]
    sys_ = convex_n_dilation([0.3, 0.7], ops, 2, 2.0)
    d = dense_maps(sys_)
    Tbar = 0.3 * ops[0].matrix + 0.7 * ops[1].matrix
    np.testing.assert_allclose(d["Q"] @ d["J"], np.eye(2), atol=1e-12)
    np.testing.assert_allclose(d["Q"] @ d["U"] @ d["U"] @ d["J"], Tbar @ Tbar, atol=1e-12)


# -- properties ------------------------------------------------------------------------

@given(algebras(max_blocks=2), seeds, exponents)
def test_trace_identity_and_balance(M, seed, p):
    T = _contraction(M, seed, p)
    sys_ = shift_dilation(T, p)
    rng = rng_of(seed)
    for _ in range(3):
        x = M.random_element(rng)
        s = max(1.0, lp_norm_p(M, x, p))
        assert trace_identity_residual(sys_, x) <= 1e-9 * s
        assert balance_residual(sys_, x) <= 1e-9 * s


@given(seeds, st.sampled_from([1.5, 2.0, 4.0]), st.integers(1, 3))
def test_tensor_embed_compress_certificates(seed, p, N):
    M = FiniteVNA.matrix(2)
    ops = [_contraction(M, seed, p), _contraction(M, seed + 1, p)]
    lam = rng_of(seed).dirichlet([1.0, 1.0])
    sys_ = convex_n_dilation(lam, ops, N, p)
    rng = rng_of(seed)
    x = M.random_element(rng)
    assert sys_.norm(sys_.embed(x)) == pytest.approx(lp_norm(M, x, p), rel=1e-10)
    v = random_tensor_vector(sys_, rng)
    assert lp_norm(M, sys_.compress(v), p) <= sys_.norm(v) * (1 + 1e-10)
    assert max(sys_.report["residuals"]) <= 1e-8


def _slots_psd(M, v, tol=1e-10):
    flat = v.reshape(-1, M.vec_dim)
    return all(M.from_vec(row).min_eig() >= -tol for row in flat)


@given(seeds)
def test_positivity_preservation(seed):
    M = FiniteVNA.from_dims([2, 1])
    ops = [_contraction(M, seed), _contraction(M, seed + 7)]
    sys_ = convex_n_dilation([0.5, 0.5], ops, 2, 2.0)
    rng = rng_of(seed)
    x = M.random_psd(rng)
    v = sys_.embed(x)
    assert _slots_psd(M, v)
    for _ in range(3):
        v = sys_.U(v)
        assert _slots_psd(M, v)
    assert sys_.compress(v).is_psd(1e-10)
    seq = shift_dilation(ops, 2.0)
    w = seq.U(seq.U(seq.embed(x), 0), 1)
    assert all(s.is_psd(1e-10) for s in w.slots)
