"""Multivector calculus on jet-evaluated tensor fields.

Fields are batched jets (see jets.py): a function has val shape (B,), a
vector field (B, m), a bivector (B, m, m) stored as the full antisymmetric
matrix P with P[i][j] = {x^i, x^j}, a (1,1) tensor (B, m, m) with N[i][j] =
N^i_j, and a trivector (B, m, m, m), fully antisymmetric.

Every operation that consumes a derivative (brackets, Lie derivatives,
divergence, torsion) returns a jet of one order less than its inputs; purely
algebraic operations (sharp, wedge, n_act) preserve the order.  Identities are
therefore checked by evaluating both sides on order-2 coordinate jets and
comparing values, with one level of bracket nesting still differentiable.

Sign conventions (fixed here once, tested in test_fields.py):

  [X, Y]           Lie bracket of vector fields
  [X, f]  = X(f),                  [f, X] = -X(f)
  [P, f]^i = sum_j P^{ij} d_j f,   [f, P] = [P, f]
  [X, P]  = L_X P,                 [P, X] = -[X, P]
  [P, Q]  bivector-bivector bracket, symmetric, overall sign SCHOUTEN_BB_SIGN
  [X, T]  = L_X T (trivector),     [T, f]^{ij} = SCHOUTEN_TF_SIGN sum_l T^{ijl} d_l f

The two literal signs are pinned by the graded Leibniz rule
[P, X^Y] = [P,X]^Y - X^[P,Y] and by the graded Jacobi identity on (P, Q, f);
the tests verify both on random polynomial fields.

The hamiltonian field of h is X_h = P# dh with (P# a)^i = sum_j P[j][i] a_j,
i.e. X_h = {h, .}; canonical coordinates carry {q, p} = -1 in the matrix
convention above, so that X_h(q) = +dh/dp.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError
from .jets import Jet2

SCHOUTEN_BB_SIGN = -1.0
SCHOUTEN_TF_SIGN = +1.0


def _rank(A):
    return A.val.ndim - 1


def _need(k, *jets):
    for j in jets:
        if j.order < k:
            raise DimensionError(f"operation needs jets of order >= {k}, got {j.order}")
    return min(j.order for j in jets)


# ---- algebraic (order-preserving) operations --------------------------------

def differential(f):
    """The covector field df of a scalar jet (drops one order)."""
    _need(1, f)
    return Jet2(f.grad, f.hess, None, m=f.m)


def sharp(P, alpha):
    """(P# alpha)^i = sum_j P[j][i] alpha_j -- the anchor map of a bivector."""
    order = min(P.order, alpha.order)
    val = np.einsum('...ji,...j->...i', P.val, alpha.val)
    grad = hess = None
    if order >= 1:
        grad = (np.einsum('...jia,...j->...ia', P.grad, alpha.val)
                + np.einsum('...ji,...ja->...ia', P.val, alpha.grad))
        if order >= 2:
            cross = np.einsum('...jia,...jb->...iab', P.grad, alpha.grad)
            hess = (np.einsum('...jiab,...j->...iab', P.hess, alpha.val)
                    + np.einsum('...ji,...jab->...iab', P.val, alpha.hess)
                    + cross + cross.swapaxes(-1, -2))
    return Jet2(val, grad, hess, m=P.m)


def cotangent_apply(N, alpha):
    """(N* alpha)_i = sum_j alpha_j N^j_i -- N acting on covectors."""
    order = min(N.order, alpha.order)
    val = np.einsum('...j,...ji->...i', alpha.val, N.val)
    grad = hess = None
    if order >= 1:
        grad = (np.einsum('...ja,...ji->...ia', alpha.grad, N.val)
                + np.einsum('...j,...jia->...ia', alpha.val, N.grad))
        if order >= 2:
            cross = np.einsum('...ja,...jib->...iab', alpha.grad, N.grad)
            hess = (np.einsum('...jab,...ji->...iab', alpha.hess, N.val)
                    + np.einsum('...j,...jiab->...iab', alpha.val, N.hess)
                    + cross + cross.swapaxes(-1, -2))
    return Jet2(val, grad, hess, m=N.m)


def wedge_vv(X, Y):
    """(X ^ Y)^{ij} = X^i Y^j - X^j Y^i."""
    order = min(X.order, Y.order)
    val = np.einsum('...i,...j->...ij', X.val, Y.val)
    val = val - val.swapaxes(-1, -2)
    grad = hess = None
    if order >= 1:
        g = (np.einsum('...ia,...j->...ija', X.grad, Y.val)
             + np.einsum('...i,...ja->...ija', X.val, Y.grad))
        grad = g - g.swapaxes(-3, -2)
        if order >= 2:
            cross = np.einsum('...ia,...jb->...ijab', X.grad, Y.grad)
            h = (np.einsum('...iab,...j->...ijab', X.hess, Y.val)
                 + np.einsum('...i,...jab->...ijab', X.val, Y.hess)
                 + cross + cross.swapaxes(-1, -2))
            hess = h - h.swapaxes(-4, -3)
    return Jet2(val, grad, hess, m=X.m)


def wedge_vb(Z, P):
    """(Z ^ P)^{ijk} = Z^i P^{jk} + Z^j P^{ki} + Z^k P^{ij}."""
    order = min(Z.order, P.order)
    val = (np.einsum('...i,...jk->...ijk', Z.val, P.val)
           + np.einsum('...j,...ki->...ijk', Z.val, P.val)
           + np.einsum('...k,...ij->...ijk', Z.val, P.val))
    grad = None
    if order >= 1:
        grad = (np.einsum('...ia,...jk->...ijka', Z.grad, P.val)
                + np.einsum('...i,...jka->...ijka', Z.val, P.grad)
                + np.einsum('...ja,...ki->...ijka', Z.grad, P.val)
                + np.einsum('...j,...kia->...ijka', Z.val, P.grad)
                + np.einsum('...ka,...ij->...ijka', Z.grad, P.val)
                + np.einsum('...k,...ija->...ijka', Z.val, P.grad))
    return Jet2(val, grad, None, m=Z.m)


def scalar_mul(f, A):
    """f * A for a scalar field f and a tensor field A of any rank."""
    r = _rank(A)
    order = min(f.order, A.order)
    ex = (None,) * r
    fv = f.val[(...,) + ex]
    val = fv * A.val
    grad = hess = None
    if order >= 1:
        fg = f.grad[(...,) + ex + (slice(None),)]
        grad = fv[..., None] * A.grad + fg * A.val[..., None]
        if order >= 2:
            fh = f.hess[(...,) + ex + (slice(None), slice(None))]
            cross = fg[..., :, None] * A.grad[..., None, :]
            hess = (fv[..., None, None] * A.hess + fh * A.val[..., None, None]
                    + cross + cross.swapaxes(-1, -2))
    return Jet2(val, grad, hess, m=A.m)


# ---- derivative-consuming operations ----------------------------------------

def evaluate(X, f):
    """X(f) for a vector field and a function."""
    order = _need(1, X, f)
    val = np.einsum('...i,...i->...', X.val, f.grad)
    grad = None
    if order >= 2:
        grad = (np.einsum('...ia,...i->...a', X.grad, f.grad)
                + np.einsum('...i,...ia->...a', X.val, f.hess))
    return Jet2(val, grad, None, m=X.m)


def divergence(X):
    """sum_i d_i X^i."""
    order = _need(1, X)
    val = np.einsum('...ii->...', X.grad)
    grad = None if order < 2 else np.einsum('...iia->...a', X.hess)
    return Jet2(val, grad, None, m=X.m)


def hamiltonian_vf(P, h):
    """X_h = P# dh = {h, .}."""
    return sharp(P, differential(h))


def poisson_bracket(P, f, g):
    """{f, g} = sum_{ij} P^{ij} d_i f d_j g."""
    order = _need(1, P, f, g)
    val = np.einsum('...ij,...i,...j->...', P.val, f.grad, g.grad)
    grad = None
    if order >= 2:
        grad = (np.einsum('...ija,...i,...j->...a', P.grad, f.grad, g.grad)
                + np.einsum('...ij,...ia,...j->...a', P.val, f.hess, g.grad)
                + np.einsum('...ij,...i,...ja->...a', P.val, f.grad, g.hess))
    return Jet2(val, grad, None, m=P.m)


def lie_bracket(X, Y):
    """[X, Y]^i = X^l d_l Y^i - Y^l d_l X^i."""
    order = _need(1, X, Y)
    val = (np.einsum('...l,...il->...i', X.val, Y.grad)
           - np.einsum('...l,...il->...i', Y.val, X.grad))
    grad = None
    if order >= 2:
        grad = (np.einsum('...la,...il->...ia', X.grad, Y.grad)
                + np.einsum('...l,...ila->...ia', X.val, Y.hess)
                - np.einsum('...la,...il->...ia', Y.grad, X.grad)
                - np.einsum('...l,...ila->...ia', Y.val, X.hess))
    return Jet2(val, grad, None, m=X.m)


def lie_der_bivector(X, P):
    """(L_X P)^{ij} = X^l d_l P^{ij} - P^{lj} d_l X^i - P^{il} d_l X^j."""
    order = _need(1, X, P)
    val = (np.einsum('...l,...ijl->...ij', X.val, P.grad)
           - np.einsum('...lj,...il->...ij', P.val, X.grad)
           - np.einsum('...il,...jl->...ij', P.val, X.grad))
    grad = None
    if order >= 2:
        grad = (np.einsum('...la,...ijl->...ija', X.grad, P.grad)
                + np.einsum('...l,...ijla->...ija', X.val, P.hess)
                - np.einsum('...lja,...il->...ija', P.grad, X.grad)
                - np.einsum('...lj,...ila->...ija', P.val, X.hess)
                - np.einsum('...ila,...jl->...ija', P.grad, X.grad)
                - np.einsum('...il,...jla->...ija', P.val, X.hess))
    return Jet2(val, grad, None, m=X.m)


def lie_der_trivector(X, T):
    """(L_X T)^{ijk} = X^l d_l T^{ijk} - T^{ljk} d_l X^i - T^{ilk} d_l X^j - T^{ijl} d_l X^k."""
    _need(1, X, T)
    val = (np.einsum('...l,...ijkl->...ijk', X.val, T.grad)
           - np.einsum('...ljk,...il->...ijk', T.val, X.grad)
           - np.einsum('...ilk,...jl->...ijk', T.val, X.grad)
           - np.einsum('...ijl,...kl->...ijk', T.val, X.grad))
    return Jet2(val, None, None, m=X.m)


def schouten_bf(P, f):
    """[P, f]^i = sum_j P^{ij} d_j f (the hamiltonian field is X_f = -[P, f])."""
    order = _need(1, P, f)
    val = np.einsum('...ij,...j->...i', P.val, f.grad)
    grad = None
    if order >= 2:
        grad = (np.einsum('...ija,...j->...ia', P.grad, f.grad)
                + np.einsum('...ij,...ja->...ia', P.val, f.hess))
    return Jet2(val, grad, None, m=P.m)


def schouten_bb(P, Q):
    """Bivector-bivector Schouten bracket (a trivector); symmetric in P, Q."""
    order = _need(1, P, Q)
    s = SCHOUTEN_BB_SIGN

    def half(A, Bv):
        return (np.einsum('...lk,...ijl->...ijk', A.val, Bv.grad)
                + np.einsum('...li,...jkl->...ijk', A.val, Bv.grad)
                + np.einsum('...lj,...kil->...ijk', A.val, Bv.grad))

    val = s * (half(P, Q) + half(Q, P))
    grad = None
    if order >= 2:
        def half_grad(A, Bv):
            return (np.einsum('...lka,...ijl->...ijka', A.grad, Bv.grad)
                    + np.einsum('...lk,...ijla->...ijka', A.val, Bv.hess)
                    + np.einsum('...lia,...jkl->...ijka', A.grad, Bv.grad)
                    + np.einsum('...li,...jkla->...ijka', A.val, Bv.hess)
                    + np.einsum('...lja,...kil->...ijka', A.grad, Bv.grad)
                    + np.einsum('...lj,...kila->...ijka', A.val, Bv.hess))
        grad = s * (half_grad(P, Q) + half_grad(Q, P))
    return Jet2(val, grad, None, m=P.m)


def schouten_tf(T, f):
    """[T, f]^{ij} = sign * sum_l T^{ijl} d_l f."""
    _need(1, T, f)
    val = SCHOUTEN_TF_SIGN * np.einsum('...ijl,...l->...ij', T.val, f.grad)
    return Jet2(val, None, None, m=T.m)


def schouten(A, B):
    """Schouten bracket dispatched on ranks (function 0, vector 1, ...)."""
    ra, rb = _rank(A), _rank(B)
    if (ra, rb) == (1, 1):
        return lie_bracket(A, B)
    if (ra, rb) == (1, 0):
        return evaluate(A, B)
    if (ra, rb) == (0, 1):
        return -evaluate(B, A)
    if (ra, rb) == (2, 0):
        return schouten_bf(A, B)
    if (ra, rb) == (0, 2):
        return schouten_bf(B, A)
    if (ra, rb) == (1, 2):
        return lie_der_bivector(A, B)
    if (ra, rb) == (2, 1):
        return -lie_der_bivector(B, A)
    if (ra, rb) == (2, 2):
        return schouten_bb(A, B)
    if (ra, rb) == (1, 3):
        return lie_der_trivector(A, B)
    if (ra, rb) == (3, 1):
        return -lie_der_trivector(B, A)
    if (ra, rb) == (3, 0):
        return schouten_tf(A, B)
    if (ra, rb) == (0, 3):
        return -schouten_tf(B, A)
    raise DimensionError(f"no Schouten overload for ranks ({ra}, {rb})")


# ---- structure defects -------------------------------------------------------
#
# Every *_defect function returns a per-sample array of shape (B,): the max
# abs defect at each sample point.  Callers reduce with np.max / np.mean.

def per_sample(arr):
    """Max abs over all non-batch axes: defect tensor (B, ...) -> (B,)."""
    arr = np.abs(np.asarray(arr))
    return np.max(arr, axis=tuple(range(1, arr.ndim))) if arr.ndim > 1 else arr


def jacobi_trivector(P):
    """J^{abe} = sum_c (P^{ce} d_c P^{ab} + P^{ca} d_c P^{be} + P^{cb} d_c P^{ea}).

    Vanishes iff P satisfies the Jacobi identity; independent of the overall
    Schouten sign convention.
    """
    _need(1, P)
    val = (np.einsum('...ce,...abc->...abe', P.val, P.grad)
           + np.einsum('...ca,...bec->...abe', P.val, P.grad)
           + np.einsum('...cb,...eac->...abe', P.val, P.grad))
    return Jet2(val, None, None, m=P.m)


def jacobi_defect(P):
    """Per-sample max |J|: 0 for a Poisson bivector."""
    return per_sample(jacobi_trivector(P).val)


def nijenhuis_torsion(N):
    """T^i_{jk} = N^l_j d_l N^i_k - N^l_k d_l N^i_j - N^i_l (d_j N^l_k - d_k N^l_j)."""
    _need(1, N)
    val = (np.einsum('...lj,...ikl->...ijk', N.val, N.grad)
           - np.einsum('...lk,...ijl->...ijk', N.val, N.grad)
           - np.einsum('...il,...lkj->...ijk', N.val, N.grad)
           + np.einsum('...il,...ljk->...ijk', N.val, N.grad))
    return Jet2(val, None, None, m=N.m)


def torsion_defect(N):
    """Per-sample max |T_N|: 0 for a Nijenhuis tensor."""
    return per_sample(nijenhuis_torsion(N).val)


def pn_compat_defect(P0, N):
    """Compatibility defect of a bivector-recursion pair, per sample.

    Combines the algebraic defect max |N P0 - P0 N^T| with the coordinate
    (first-derivative) defect

      C^{ij}_k = sum_l [ P0^{lj} d_l N^i_k + P0^{il} d_l N^j_k
                         - P0^{lj} d_k N^i_l - N^l_k d_l P0^{ij}
                         + N^j_l d_k P0^{il} ]

    and returns the pointwise max of the two.  Both vanish exactly when
    (P0, N) is a compatible pair.
    """
    _need(1, P0)
    _need(1, N)
    alg = N.val @ P0.val - P0.val @ N.val.swapaxes(-1, -2)
    coord = (np.einsum('...lj,...ikl->...ijk', P0.val, N.grad)
             + np.einsum('...il,...jkl->...ijk', P0.val, N.grad)
             - np.einsum('...lj,...ilk->...ijk', P0.val, N.grad)
             - np.einsum('...lk,...ijl->...ijk', N.val, P0.grad)
             + np.einsum('...jl,...ilk->...ijk', N.val, P0.grad))
    return np.maximum(per_sample(alg), per_sample(coord))


def antisymmetry_defect(P):
    """Per-sample max |P + P^T|: a stored bivector must be antisymmetric."""
    return per_sample(P.val + P.val.swapaxes(-1, -2))
