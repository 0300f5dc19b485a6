"""Second-order forward-mode jets over numpy arrays.

A Jet2 bundles the value of a quantity together with its gradient and Hessian
with respect to the chart coordinates, evaluated on a whole batch of points at
once.  Every tensor field in this package (functions, vector fields, bivector
matrices, recursion operators) is evaluated as a Jet2, so first and second
derivatives are exact to machine precision -- no finite differencing anywhere
in the engine itself.

Shape conventions, with B the batch size and m the chart dimension:

    val   (B, *S)            the quantity itself (S = () for a scalar,
                             (m,) for a vector field, (m, m) for a matrix...)
    grad  (B, *S, m)         d(val)/dx^a in the trailing axis
    hess  (B, *S, m, m)      d^2(val)/dx^a dx^b in the two trailing axes

grad and hess may be None: an operation that consumes a derivative (a bracket,
a divergence) returns a jet of one order less, which is exactly what identity
checks need -- the deepest expressions are evaluated pointwise.  Arithmetic
keeps the smallest order of its operands.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, SingularTensorError


class Jet2:
    """Value + gradient + Hessian of a batched quantity.

    Build coordinate jets with :meth:`coords`, constants with :meth:`const`,
    then combine with ordinary arithmetic (+, -, *, /, **) and the matrix
    helpers in this module.
    """

    __slots__ = ("val", "grad", "hess", "m")

    def __init__(self, val, grad=None, hess=None, m=None):
        self.val = np.asarray(val, dtype=float)
        self.grad = None if grad is None else np.asarray(grad, dtype=float)
        self.hess = None if hess is None else np.asarray(hess, dtype=float)
        if m is None:
            if self.grad is not None:
                m = self.grad.shape[-1]
            elif self.hess is not None:
                m = self.hess.shape[-1]
            else:
                raise DimensionError("jet needs an explicit chart dimension m "
                                     "when it carries no derivatives")
        self.m = int(m)
        if self.grad is not None and self.grad.shape != self.val.shape + (self.m,):
            raise DimensionError(f"grad shape {self.grad.shape} does not extend "
                                 f"val shape {self.val.shape} by (m={self.m},)")
        if self.hess is not None and self.hess.shape != self.val.shape + (self.m, self.m):
            raise DimensionError(f"hess shape {self.hess.shape} does not extend "
                                 f"val shape {self.val.shape} by (m, m)")

    # ---- constructors -----------------------------------------------------

    @classmethod
    def coords(cls, x, order=2):
        """Coordinate jets for a batch of points x with shape (B, m).

        Returns a list of m scalar jets [x^1, ..., x^m].  Lower orders save a
        lot of memory on long batches (a trajectory only needs values).
        """
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[None, :]
        if x.ndim != 2:
            raise DimensionError(f"points must have shape (B, m), got {x.shape}")
        B, m = x.shape
        eye = np.eye(m)
        return [cls(x[:, i],
                    np.tile(eye[i], (B, 1)) if order >= 1 else None,
                    np.zeros((B, m, m)) if order >= 2 else None, m=m)
                for i in range(m)]

    @classmethod
    def const(cls, value, m, batch=None, order=2):
        """A constant jet (zero gradient / Hessian) of chart dimension m."""
        val = np.asarray(value, dtype=float)
        if batch is not None:
            val = np.broadcast_to(val, (batch,) + val.shape).copy()
        grad = np.zeros(val.shape + (m,)) if order >= 1 else None
        hess = np.zeros(val.shape + (m, m)) if order >= 2 else None
        return cls(val, grad, hess, m=m)

    # ---- bookkeeping ------------------------------------------------------

    @property
    def order(self):
        if self.hess is not None:
            return 2
        if self.grad is not None:
            return 1
        return 0

    def __repr__(self):
        return f"Jet2(shape={self.val.shape}, m={self.m}, order={self.order})"

    def _coerce(self, other):
        if isinstance(other, Jet2):
            if other.m != self.m:
                raise DimensionError(f"mixed chart dimensions {self.m} and {other.m}")
            return other
        return Jet2.const(other, self.m, order=self.order)

    # ---- arithmetic -------------------------------------------------------

    def __add__(self, other):
        o = self._coerce(other)
        val = self.val + o.val
        grad = hess = None
        if self.grad is not None and o.grad is not None:
            grad = self.grad + o.grad
        if self.hess is not None and o.hess is not None:
            hess = self.hess + o.hess
        return Jet2(val, grad, hess, m=self.m)

    __radd__ = __add__

    def __neg__(self):
        return Jet2(-self.val,
                    None if self.grad is None else -self.grad,
                    None if self.hess is None else -self.hess, m=self.m)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        val = self.val * o.val
        grad = hess = None
        if self.grad is not None and o.grad is not None:
            grad = self.grad * o.val[..., None] + self.val[..., None] * o.grad
            if self.hess is not None and o.hess is not None:
                hess = (self.hess * o.val[..., None, None]
                        + self.val[..., None, None] * o.hess
                        + self.grad[..., :, None] * o.grad[..., None, :]
                        + self.grad[..., None, :] * o.grad[..., :, None])
        return Jet2(val, grad, hess, m=self.m)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * self._coerce(other).reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if not np.isscalar(p):
            raise DimensionError("only scalar exponents are supported")
        v = self.val
        if float(p).is_integer():
            # drop terms with zero coefficient so x**1, x**2 work at x = 0
            p = int(p)
            df = p * v ** (p - 1) if p != 0 else np.zeros_like(v)
            d2f = p * (p - 1) * v ** (p - 2) if p not in (0, 1) else np.zeros_like(v)
            return self._chain(v ** p, df, d2f)
        return self._chain(v ** p, p * v ** (p - 1), p * (p - 1) * v ** (p - 2))

    # ---- elementary functions ---------------------------------------------

    def _chain(self, f, df, d2f):
        """Jet of f(self) given f, f', f'' evaluated at self.val."""
        grad = hess = None
        if self.grad is not None:
            grad = df[..., None] * self.grad
            if self.hess is not None:
                hess = (df[..., None, None] * self.hess
                        + d2f[..., None, None]
                        * self.grad[..., :, None] * self.grad[..., None, :])
        return Jet2(f, grad, hess, m=self.m)

    def reciprocal(self):
        v = self.val
        return self._chain(1.0 / v, -1.0 / v ** 2, 2.0 / v ** 3)

    def exp(self):
        e = np.exp(self.val)
        return self._chain(e, e, e)

    def log(self):
        v = self.val
        return self._chain(np.log(v), 1.0 / v, -1.0 / v ** 2)

    def sqrt(self):
        r = np.sqrt(self.val)
        return self._chain(r, 0.5 / r, -0.25 / r ** 3)


# ---- assembling tensors out of scalar jets ---------------------------------

def jstack(entries, m=None):
    """Stack a (possibly nested) list of scalar jets/constants into one jet.

    ``jstack([j1, j2])`` gives a vector jet of shape (B, 2);
    ``jstack([[a, b], [c, d]])`` a matrix jet of shape (B, 2, 2).
    Plain numbers are lifted to constants.
    """
    ref = _find_jet(entries)
    if ref is None:
        raise DimensionError("jstack needs at least one Jet2 entry")
    if m is None:
        m = ref.m

    def lift(e):
        if isinstance(e, Jet2):
            return e
        return Jet2.const(np.broadcast_to(np.asarray(e, float), ref.val.shape),
                          m, order=ref.order)

    def collect(node):
        if isinstance(node, (list, tuple)):
            parts = [collect(c) for c in node]
            val = np.stack([p[0] for p in parts], axis=1)
            grad = None if parts[0][1] is None else np.stack([p[1] for p in parts], axis=1)
            hess = None if parts[0][2] is None else np.stack([p[2] for p in parts], axis=1)
            return val, grad, hess
        j = lift(node)
        return j.val, j.grad, j.hess

    val, grad, hess = collect(entries)
    # axis=1 stacking above builds shapes (B, n1, n2, ..., [m[, m]]) directly
    return Jet2(val, grad, hess, m=m)


def _find_jet(node):
    if isinstance(node, Jet2):
        return node
    if isinstance(node, (list, tuple)):
        for c in node:
            found = _find_jet(c)
            if found is not None:
                return found
    return None


def jeye(n, m, batch, order=2):
    """Constant identity-matrix jet of shape (batch, n, n)."""
    return Jet2.const(np.eye(n), m, batch=batch, order=order)


# ---- matrix calculus on jets ------------------------------------------------

def _min_order(*jets):
    return min(j.order for j in jets)


def jmatmul(A, B):
    """Matrix product of two matrix jets (batched)."""
    order = _min_order(A, B)
    val = np.einsum('...ik,...kj->...ij', A.val, B.val)
    grad = hess = None
    if order >= 1:
        grad = (np.einsum('...ika,...kj->...ija', A.grad, B.val)
                + np.einsum('...ik,...kja->...ija', A.val, B.grad))
        if order >= 2:
            cross = np.einsum('...ika,...kjb->...ijab', A.grad, B.grad)
            hess = (np.einsum('...ikab,...kj->...ijab', A.hess, B.val)
                    + np.einsum('...ik,...kjab->...ijab', A.val, B.hess)
                    + cross + cross.swapaxes(-1, -2))
    return Jet2(val, grad, hess, m=A.m)


def jmatvec(A, X):
    """Matrix jet applied to a vector jet: (A X)^i = A^i_k X^k."""
    order = _min_order(A, X)
    val = np.einsum('...ik,...k->...i', A.val, X.val)
    grad = hess = None
    if order >= 1:
        grad = (np.einsum('...ika,...k->...ia', A.grad, X.val)
                + np.einsum('...ik,...ka->...ia', A.val, X.grad))
        if order >= 2:
            cross = np.einsum('...ika,...kb->...iab', A.grad, X.grad)
            hess = (np.einsum('...ikab,...k->...iab', A.hess, X.val)
                    + np.einsum('...ik,...kab->...iab', A.val, X.hess)
                    + cross + cross.swapaxes(-1, -2))
    return Jet2(val, grad, hess, m=A.m)


def jtrace(A):
    """Trace of a matrix jet."""
    val = np.einsum('...ii->...', A.val)
    grad = None if A.grad is None else np.einsum('...iia->...a', A.grad)
    hess = None if A.hess is None else np.einsum('...iiab->...ab', A.hess)
    return Jet2(val, grad, hess, m=A.m)


def jtranspose(A):
    """Transpose of a matrix jet."""
    return Jet2(A.val.swapaxes(-1, -2),
                None if A.grad is None else A.grad.swapaxes(-3, -2),
                None if A.hess is None else A.hess.swapaxes(-4, -3), m=A.m)


def check_invertible(val, what="tensor"):
    """Raise SingularTensorError if any batched matrix is numerically singular.

    The threshold is relative: |det| < 1e-12 * (max|entry|)^n counts as
    singular (and so does a non-finite determinant).
    """
    det = np.linalg.det(val)
    n = val.shape[-1]
    scale = np.max(np.abs(val), axis=(-1, -2)) ** n
    bad = ~np.isfinite(det) | (np.abs(det) < 1e-12 * np.maximum(scale, 1e-300))
    if np.any(bad):
        raise SingularTensorError(
            f"{what} is numerically singular at {int(np.sum(bad))} of "
            f"{det.size} sample points (|det| < 1e-12 relative to scale)")


def jinv(A, what="matrix"):
    """Inverse of a matrix jet, with an explicit singularity guard."""
    check_invertible(A.val, what)
    V = np.linalg.inv(A.val)
    grad = hess = None
    if A.grad is not None:
        VA = np.einsum('...ik,...kla->...ila', V, A.grad)      # V dA_a
        grad = -np.einsum('...ika,...kj->...ija', VA, V)
        if A.hess is not None:
            # d2(A^-1) = V dA_a V dA_b V + V dA_b V dA_a V - V d2A_ab V
            t = np.einsum('...ika,...klb,...lj->...ijab', VA, VA, V)
            hess = (t + t.swapaxes(-1, -2)
                    - np.einsum('...ik,...klab,...lj->...ijab', V, A.hess, V))
    return Jet2(V, grad, hess, m=A.m)


def jlogabsdet(A, what="matrix"):
    """log|det| of a matrix jet, with an explicit singularity guard."""
    check_invertible(A.val, what)
    sign, logabs = np.linalg.slogdet(A.val)
    V = np.linalg.inv(A.val)
    grad = hess = None
    if A.grad is not None:
        grad = np.einsum('...ij,...jia->...a', V, A.grad)
        if A.hess is not None:
            hess = (np.einsum('...ij,...jiab->...ab', V, A.hess)
                    - np.einsum('...ij,...jka,...kl,...lib->...ab',
                                V, A.grad, V, A.grad))
    return Jet2(logabs, grad, hess, m=A.m)


def jmatpow(A, k):
    """Integer power of a matrix jet (k may be negative)."""
    k = int(k)
    n = A.val.shape[-1]
    B = A.val.shape[0]
    if k == 0:
        return jeye(n, A.m, B, order=A.order)
    base = A if k > 0 else jinv(A)
    out = base
    for _ in range(abs(k) - 1):
        out = jmatmul(out, base)
    return out
