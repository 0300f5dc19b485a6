"""Jets vs central finite differences.

Every derivative the engine produces is checked here against a finite
difference oracle on random points, so the rest of the test suite can trust
jet gradients and Hessians blindly.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pnhier.errors import DimensionError, SingularTensorError
from pnhier.jets import (Jet2, jeye, jinv, jlogabsdet, jmatmul, jmatpow,
                         jmatvec, jstack, jtrace, jtranspose)

rng = np.random.default_rng(20260816)


def central_grad(f, x, h=1e-5):
    """d f / dx^a by central differences; f maps (B,m) -> (B, *S)."""
    B, m = x.shape
    cols = []
    for a in range(m):
        dx = np.zeros_like(x)
        dx[:, a] = h
        cols.append((f(x + dx) - f(x - dx)) / (2 * h))
    return np.stack(cols, axis=-1)


def central_hess(f, x, h=1e-4):
    """d^2 f / dx^a dx^b by nested central differences."""
    return central_grad(lambda y: central_grad(f, y, h), x, h)


def scalar_expr(jets):
    x0, x1, x2 = jets
    return x0 * x0 * x1 + x0 * x2.exp() - x1.log() / x2 + x1.sqrt() + 2.0 / x0


def scalar_expr_np(x):
    x0, x1, x2 = x[:, 0], x[:, 1], x[:, 2]
    return x0 ** 2 * x1 + x0 * np.exp(x2) - np.log(x1) / x2 + np.sqrt(x1) + 2.0 / x0


def sample_points(B=7, m=3):
    return rng.uniform(0.5, 1.5, size=(B, m))


def test_coordinate_jets_seed():
    x = sample_points()
    jets = Jet2.coords(x)
    for i, j in enumerate(jets):
        assert np.array_equal(j.val, x[:, i])
        assert np.array_equal(j.grad, np.tile(np.eye(3)[i], (x.shape[0], 1)))
        assert not j.hess.any()


def test_scalar_expression_against_fd():
    x = sample_points()
    j = scalar_expr(Jet2.coords(x))
    assert np.allclose(j.val, scalar_expr_np(x), atol=1e-14)
    assert np.allclose(j.grad, central_grad(scalar_expr_np, x), atol=1e-8)
    assert np.allclose(j.hess, central_hess(scalar_expr_np, x), atol=1e-5)


def test_power_and_reciprocal_against_fd():
    x = sample_points()

    def f_np(x):
        return x[:, 0] ** 3 / x[:, 1] ** 2 + x[:, 2] ** -1.5

    x0, x1, x2 = Jet2.coords(x)
    j = x0 ** 3 / x1 ** 2 + x2 ** -1.5
    assert np.allclose(j.val, f_np(x), atol=1e-14)
    assert np.allclose(j.grad, central_grad(f_np, x), atol=1e-7)
    assert np.allclose(j.hess, central_hess(f_np, x), atol=1e-4)


def test_constant_lifting():
    x = sample_points()
    x0 = Jet2.coords(x)[0]
    j = 3.0 * x0 - 1.0 + (2.0 - x0) / 2.0
    assert np.allclose(j.val, 3.0 * x[:, 0] - 1.0 + (2.0 - x[:, 0]) / 2.0)
    assert np.allclose(j.grad[:, 0], 2.5)
    assert not j.hess.any()


def matrix_field(x):
    """A well-conditioned 3x3 matrix field on points (B,3)."""
    x0, x1, x2 = x[:, 0], x[:, 1], x[:, 2]
    B = x.shape[0]
    M = np.zeros((B, 3, 3))
    M[:, 0, 0] = 4.0 + x0 * x1
    M[:, 0, 1] = np.exp(x2) * 0.3
    M[:, 0, 2] = x1 ** 2
    M[:, 1, 0] = x2
    M[:, 1, 1] = 4.0 + np.log(x0)
    M[:, 1, 2] = x0 * x2
    M[:, 2, 0] = 0.5 * x1
    M[:, 2, 1] = x0 + x2
    M[:, 2, 2] = 5.0 + x1 * x2
    return M


def matrix_field_jet(x):
    x0, x1, x2 = Jet2.coords(x)
    return jstack([[4.0 + x0 * x1, x2.exp() * 0.3, x1 * x1],
                   [x2, 4.0 + x0.log(), x0 * x2],
                   [0.5 * x1, x0 + x2, 5.0 + x1 * x2]])


def test_jstack_matches_direct_field():
    x = sample_points()
    A = matrix_field_jet(x)
    assert A.val.shape == (x.shape[0], 3, 3)
    assert np.allclose(A.val, matrix_field(x), atol=1e-14)
    assert np.allclose(A.grad, central_grad(matrix_field, x), atol=1e-7)
    assert np.allclose(A.hess, central_hess(matrix_field, x), atol=1e-4)


def test_jmatmul_against_fd():
    x = sample_points()
    A = matrix_field_jet(x)
    P = jmatmul(A, jtranspose(A))

    def f_np(x):
        M = matrix_field(x)
        return M @ M.swapaxes(-1, -2)

    assert np.allclose(P.val, f_np(x), atol=1e-12)
    assert np.allclose(P.grad, central_grad(f_np, x), atol=1e-6)
    assert np.allclose(P.hess, central_hess(f_np, x), atol=1e-3)


def test_jmatvec_and_jtrace_against_fd():
    x = sample_points()
    A = matrix_field_jet(x)
    x0, x1, x2 = Jet2.coords(x)
    v = jstack([x0 * x1, x2.exp(), 1.0 + x0])
    w = jmatvec(A, v)

    def f_np(x):
        vv = np.stack([x[:, 0] * x[:, 1], np.exp(x[:, 2]), 1.0 + x[:, 0]], axis=-1)
        return np.einsum('bik,bk->bi', matrix_field(x), vv)

    assert np.allclose(w.val, f_np(x), atol=1e-13)
    assert np.allclose(w.grad, central_grad(f_np, x), atol=1e-7)
    assert np.allclose(w.hess, central_hess(f_np, x), atol=1e-3)

    tr = jtrace(A)
    tr_np = lambda x: np.einsum('bii->b', matrix_field(x))
    assert np.allclose(tr.val, tr_np(x), atol=1e-13)
    assert np.allclose(tr.grad, central_grad(tr_np, x), atol=1e-8)
    assert np.allclose(tr.hess, central_hess(tr_np, x), atol=1e-4)


def test_jinv_against_fd():
    x = sample_points()
    A = matrix_field_jet(x)
    W = jinv(A)
    inv_np = lambda x: np.linalg.inv(matrix_field(x))
    assert np.allclose(W.val, inv_np(x), atol=1e-12)
    assert np.allclose(np.einsum('bik,bkj->bij', W.val, A.val),
                       np.eye(3), atol=1e-12)
    assert np.allclose(W.grad, central_grad(inv_np, x), atol=1e-6)
    assert np.allclose(W.hess, central_hess(inv_np, x), atol=1e-3)


def test_jlogabsdet_against_fd():
    x = sample_points()
    A = matrix_field_jet(x)
    L = jlogabsdet(A)
    f_np = lambda x: np.linalg.slogdet(matrix_field(x))[1]
    assert np.allclose(L.val, f_np(x), atol=1e-12)
    assert np.allclose(L.grad, central_grad(f_np, x), atol=1e-7)
    assert np.allclose(L.hess, central_hess(f_np, x), atol=1e-4)


def test_jmatpow_positive_and_negative():
    x = sample_points()
    A = matrix_field_jet(x)
    A3 = jmatpow(A, 3)
    assert np.allclose(A3.val, A.val @ A.val @ A.val, atol=1e-10)
    Am2 = jmatpow(A, -2)
    W = np.linalg.inv(A.val)
    assert np.allclose(Am2.val, W @ W, atol=1e-12)
    grad_direct = jmatmul(jinv(A), jinv(A)).grad
    assert np.allclose(Am2.grad, grad_direct, atol=1e-10)
    I = jmatpow(A, 0)
    assert np.allclose(I.val, np.eye(3))
    assert not I.grad.any()


def test_order_drops_through_missing_derivatives():
    x = sample_points()
    j2 = Jet2.coords(x)[0]
    j1 = Jet2(j2.val, j2.grad, None)
    j0 = Jet2(j2.val, None, None, m=3)
    assert (j2 * j1).order == 1
    assert (j1 + j0).order == 0
    assert (j1.exp()).order == 1


def test_shape_and_dimension_errors():
    with pytest.raises(DimensionError):
        Jet2(np.zeros(3), np.zeros((3, 2, 2)))
    with pytest.raises(DimensionError):
        Jet2.coords(np.zeros((2, 2, 2)))
    x = sample_points()
    a = Jet2.coords(x)[0]
    b = Jet2.coords(x[:, :2])[0]
    with pytest.raises(DimensionError):
        a + b


def test_singular_matrix_raises():
    B = 4
    val = np.tile(np.eye(3), (B, 1, 1))
    val[2, 0, 0] = 0.0
    val[2, 0, 1] = 0.0
    val[2, 0, 2] = 0.0
    A = Jet2(val, np.zeros((B, 3, 3, 3)), np.zeros((B, 3, 3, 3, 3)))
    with pytest.raises(SingularTensorError):
        jinv(A)
    with pytest.raises(SingularTensorError):
        jlogabsdet(A)


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=0.05, max_value=50.0))
def test_exp_log_roundtrip(v):
    x = np.full((1, 2), v)
    j = Jet2.coords(x)[0]
    r = j.log().exp()
    assert np.allclose(r.val, j.val, rtol=1e-12)
    assert np.allclose(r.grad, j.grad, atol=1e-12, rtol=1e-10)
    assert np.allclose(r.hess, j.hess, atol=1e-12, rtol=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=-3.0, max_value=3.0),
       st.integers(min_value=1, max_value=5))
def test_integer_power_is_repeated_product(v, p):
    x = np.array([[v, 1.0]])
    j = Jet2.coords(x)[0]
    direct = j ** p
    repeated = j
    for _ in range(p - 1):
        repeated = repeated * j
    assert np.allclose(direct.val, repeated.val, atol=1e-12)
    assert np.allclose(direct.grad, repeated.grad, atol=1e-10)
    assert np.allclose(direct.hess, repeated.hess, atol=1e-9)
