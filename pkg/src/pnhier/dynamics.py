"""Flow integration with conservation monitoring and an in-repo eigensolver.

Hierarchy flows are ordinary ODEs in the chart; this module integrates them
with fixed-step RK4 or adaptive RKF45, guards the chart domain along the way,
and evaluates the quantities the flows are supposed to conserve (ladder
hamiltonians, det N, Lax spectra).  The symmetric eigensolver is written out
in full -- Householder tridiagonalization followed by QL with implicit
shifts -- so spectral drift checks do not depend on LAPACK's eigensolver.
"""

from __future__ import annotations

import numpy as np

from .errors import (ConvergenceError, DimensionError, DomainError,
                     ExclusionBreach, RangeError, StepUnderflow)
from .fields import hamiltonian_vf
from .hierarchy import hamiltonian_ladder, hierarchy_hamiltonian, recursion_operator
from .jets import Jet2

DT_MIN = 1e-12

# Fehlberg 4(5) pair: six stages, 4th-order propagation, embedded 5th-order
# solution for the local error estimate.
RKF45 = {
    "c": (0.0, 1 / 4, 3 / 8, 12 / 13, 1.0, 1 / 2),
    "a": {
        1: (1 / 4,),
        2: (3 / 32, 9 / 32),
        3: (1932 / 2197, -7200 / 2197, 7296 / 2197),
        4: (439 / 216, -8.0, 3680 / 513, -845 / 4104),
        5: (-8 / 27, 2.0, -3544 / 2565, 1859 / 4104, -11 / 40),
    },
    "b4": (25 / 216, 0.0, 1408 / 2565, 2197 / 4104, -1 / 5, 0.0),
    "b5": (16 / 135, 0.0, 6656 / 12825, 28561 / 56430, -9 / 50, 2 / 55),
}


class Trajectory:
    """Recorded flow: times, states, named monitor channels, truncation flag.

    ``truncated`` is None for a complete run, otherwise a short reason string
    (the run stopped at the last recorded time).
    """

    def __init__(self, times, states, monitors=None, truncated=None):
        self.times = np.asarray(times, dtype=float)
        self.states = np.asarray(states, dtype=float)
        self.monitors = dict(monitors or {})
        self.truncated = truncated

    def __len__(self):
        return self.times.size

    def __repr__(self):
        flag = "" if self.truncated is None else f", truncated: {self.truncated}"
        return (f"Trajectory({len(self)} records, t in "
                f"[{self.times[0]:g}, {self.times[-1]:g}]{flag})")


def _start_state(rhs, x0, t_end, guard):
    x0 = np.asarray(x0, dtype=float).ravel()
    if t_end <= 0.0:
        raise RangeError(f"t_end must be > 0, got {t_end}")
    if guard is not None and not np.all(guard(x0[None, :])):
        raise ExclusionBreach("initial point is outside the chart domain")
    return x0


def rk4(rhs, x0, t_end, dt, record_every=1, guard=None):
    """Classical fixed-step RK4 from t=0 to t_end.

    Records every ``record_every``-th step (plus the final one).  If the
    trajectory leaves the guarded domain it is truncated at the last good
    step and flagged, not errored.
    """
    x = _start_state(rhs, x0, t_end, guard)
    if dt <= 0.0:
        raise RangeError(f"dt must be > 0, got {dt}")
    record_every = max(1, int(record_every))
    steps = int(np.ceil(t_end / dt - 1e-9))
    times, states = [0.0], [x]
    truncated = None
    t = 0.0
    for k in range(steps):
        h = min(dt, t_end - t)
        k1 = rhs(t, x)
        k2 = rhs(t + 0.5 * h, x + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, x + 0.5 * h * k2)
        k4 = rhs(t + h, x + h * k3)
        x_new = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if guard is not None and not np.all(guard(x_new[None, :])):
            truncated = f"left the chart domain at t = {t + h:.6g}"
            break
        t, x = t + h, x_new
        if (k + 1) % record_every == 0 or k == steps - 1:
            times.append(t)
            states.append(x)
    return Trajectory(times, states, truncated=truncated)


def rkf45(rhs, x0, t_end, atol=1e-10, rtol=1e-10, dt_init=None,
          record_every=1, guard=None):
    """Adaptive Fehlberg 4(5) from t=0 to t_end.

    Propagates the 4th-order solution; the embedded 5th-order solution gives
    the local error, compared against atol + rtol*|x| per component.  Raises
    StepUnderflow when step control pushes dt below 1e-12.
    """
    x = _start_state(rhs, x0, t_end, guard)
    for name, tol in (("atol", atol), ("rtol", rtol)):
        if not 0.0 < tol <= 1e-2:
            raise RangeError(f"{name} must lie in (0, 1e-2], got {tol}")
    record_every = max(1, int(record_every))
    c, a, b4, b5 = RKF45["c"], RKF45["a"], RKF45["b4"], RKF45["b5"]
    dt = min(t_end, 1e-2) if dt_init is None else float(dt_init)
    if dt <= 0.0:
        raise RangeError(f"dt_init must be > 0, got {dt_init}")
    times, states = [0.0], [x]
    truncated = None
    t = 0.0
    accepted = 0
    while t < t_end * (1.0 - 1e-14):
        h = min(dt, t_end - t)
        ks = [rhs(t, x)]
        for s in range(1, 6):
            xs = x + h * sum(aa * kk for aa, kk in zip(a[s], ks))
            ks.append(rhs(t + c[s] * h, xs))
        x4 = x + h * sum(bb * kk for bb, kk in zip(b4, ks))
        x5 = x + h * sum(bb * kk for bb, kk in zip(b5, ks))
        scale = atol + rtol * np.maximum(np.abs(x), np.abs(x4))
        err = float(np.max(np.abs(x5 - x4) / scale))
        if not np.isfinite(err):
            err = np.inf  # reject and shrink until StepUnderflow
        if err <= 1.0:
            if guard is not None and not np.all(guard(x4[None, :])):
                truncated = f"left the chart domain at t = {t + h:.6g}"
                break
            t, x = t + h, x4
            accepted += 1
            if accepted % record_every == 0 or t >= t_end * (1.0 - 1e-14):
                times.append(t)
                states.append(x)
        factor = 0.9 * (1.0 / max(err, 1e-16)) ** 0.2
        dt = h * float(np.clip(factor, 0.2, 5.0))
        if dt < DT_MIN:
            raise StepUnderflow(f"adaptive step fell below {DT_MIN:g} "
                                f"at t = {t:.6g}")
    if times[-1] != t:
        times.append(t)
        states.append(x)
    return Trajectory(times, states, truncated=truncated)


def integrate(rhs, x0, t_end, method="rk4", dt=1e-3, atol=1e-10, rtol=1e-10,
              record_every=1, guard=None):
    """Dispatch to rk4 (fixed dt) or rkf45 (adaptive, atol/rtol)."""
    if method == "rk4":
        return rk4(rhs, x0, t_end, dt, record_every=record_every, guard=guard)
    if method == "rkf45":
        return rkf45(rhs, x0, t_end, atol=atol, rtol=rtol,
                     record_every=record_every, guard=guard)
    raise RangeError(f"unknown method '{method}' (rk4 or rkf45)")


# ---- right-hand sides --------------------------------------------------------

def _stage_jets(system, x, order):
    """Coordinate jets for one stage point, shape-checked but not domain-
    checked: RK stages may probe slightly outside the open region, and the
    integrators' guard is what enforces the domain along the flow."""
    x = np.asarray(x, dtype=float).ravel()
    if x.size != system.m:
        raise DimensionError(f"{system.key}(n={system.n}) expects {system.m} "
                             f"coordinates, got {x.size}")
    return Jet2.coords(x[None, :], order=order)


def hamiltonian_flow_rhs(system, index=None, h=None, bivector="pi0"):
    """rhs(t, x) for the hamiltonian flow of a ladder invariant.

    Exactly one of ``index`` (ladder index, h_i built from the recursion
    operator on the fly) and ``h`` (a closed-form callable jets -> Jet2) must
    be given; ``bivector`` picks which leg of the pair drives the flow.
    """
    if (index is None) == (h is None):
        raise RangeError("pass exactly one of index=, h=")
    if bivector not in ("pi0", "pi1"):
        raise RangeError(f"bivector must be pi0 or pi1, got '{bivector}'")

    def rhs(t, x):
        jets = _stage_jets(system, x, order=1)
        P = system.pi0(jets) if bivector == "pi0" else system.pi1(jets)
        if h is not None:
            ham = h(jets)
        else:
            N = recursion_operator(system.pi0(jets), system.pi1(jets))
            ham = hierarchy_hamiltonian(N, index)
        return hamiltonian_vf(P, ham).val[0]

    return rhs


def field_rhs(system, field_fn):
    """rhs(t, x) for a closed-form vector field callable jets -> Jet2."""

    def rhs(t, x):
        return field_fn(_stage_jets(system, x, order=1)).val[0]

    return rhs


# ---- conservation monitoring ---------------------------------------------------

def hierarchy_monitors(system, states, depth):
    """h_0..h_depth and det N evaluated along recorded states.

    Uses order-0 jets: one batched evaluation over the whole trajectory.
    """
    jets = system.jets(states, order=0)
    N = recursion_operator(system.pi0(jets), system.pi1(jets))
    ladder = hamiltonian_ladder(N, depth)
    out = {f"h_{i}": ladder[i].val.copy() for i in range(0, depth + 1)}
    sign, logabs = np.linalg.slogdet(N.val)
    out["det_N"] = sign * np.exp(logabs)
    return out


def lax_monitors(system, states):
    """Sorted Lax eigenvalues along states ({} when no Lax map exists)."""
    lax_fn = system.extras.get("lax_np")
    if lax_fn is None:
        return {}
    ev = lax_eigenvalues(lax_fn(states), tag=f"{system.key} Lax")
    return {f"lambda_{j + 1}": ev[:, j] for j in range(ev.shape[1])}


def conservation_report(traj, quantities):
    """max_t |Q(x(t)) - Q(x(0))| for each named quantity.

    ``quantities`` maps a name either to a callable states -> array or to a
    precomputed array whose leading axis runs over the records.
    """
    out = {}
    for name, q in quantities.items():
        vals = np.asarray(q(traj.states) if callable(q) else q, dtype=float)
        out[name] = float(np.max(np.abs(vals - vals[0])))
    return out


# ---- symmetric eigensolver -----------------------------------------------------

def _tridiagonalize(A):
    """Householder reduction of a symmetric matrix to (diagonal, off-diagonal)."""
    T = np.array(A, dtype=float, copy=True)
    k = T.shape[0]
    for i in range(k - 2):
        x = T[i + 1:, i]
        norm = float(np.sqrt(np.sum(x * x)))
        if norm == 0.0:
            continue
        alpha = -norm if x[0] >= 0.0 else norm
        v = x.copy()
        v[0] -= alpha
        vn = float(np.sqrt(np.sum(v * v)))
        if vn == 0.0:
            continue
        v /= vn
        # two-sided reflection H T H with H = I - 2 v v^T on the trailing block
        T[i + 1:, i:] -= 2.0 * np.outer(v, v @ T[i + 1:, i:])
        T[:, i + 1:] -= 2.0 * np.outer(T[:, i + 1:] @ v, v)
    return np.diag(T).copy(), np.diag(T, 1).copy()


def _ql_implicit(d, e, budget, tag):
    """Eigenvalues of a symmetric tridiagonal matrix by QL with implicit shifts."""
    n = d.size
    d = d.copy()
    ee = np.zeros(n)
    ee[:n - 1] = e
    eps = np.finfo(float).eps
    used = 0
    for l in range(n):
        while True:
            for m_ in range(l, n - 1):
                dd = abs(d[m_]) + abs(d[m_ + 1])
                if abs(ee[m_]) <= eps * dd:
                    break
            else:
                m_ = n - 1
            if m_ == l:
                break
            used += 1
            if used > budget:
                raise ConvergenceError(
                    f"{tag}: QL did not converge within {budget} iterations")
            g = (d[l + 1] - d[l]) / (2.0 * ee[l])
            r = float(np.hypot(g, 1.0))
            g = d[m_] - d[l] + ee[l] / (g + (r if g >= 0.0 else -r))
            s = c = 1.0
            p = 0.0
            underflow = False
            for i in range(m_ - 1, l - 1, -1):
                f = s * ee[i]
                b = c * ee[i]
                r = float(np.hypot(f, g))
                ee[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    ee[m_] = 0.0
                    underflow = True
                    break
                s, c = f / r, g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
            if underflow:
                continue
            d[l] -= p
            ee[l] = g
            ee[m_] = 0.0
    return np.sort(d)


def lax_eigenvalues(L, tag="lax"):
    """Sorted eigenvalues of a real symmetric matrix (or a batch of them).

    Householder tridiagonalization followed by implicit-shift QL, budgeted at
    30*k iterations (ConvergenceError beyond).  Input must be square
    (DimensionError) and symmetric to roundoff (DomainError).
    """
    L = np.asarray(L, dtype=float)
    if L.ndim == 3:
        return np.stack([lax_eigenvalues(Li, tag=tag) for Li in L])
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise DimensionError(f"{tag}: expected a square matrix, got {L.shape}")
    k = L.shape[0]
    scale = max(float(np.max(np.abs(L))), 1.0)
    if float(np.max(np.abs(L - L.T))) > 1e-10 * scale:
        raise DomainError(f"{tag}: matrix is not symmetric")
    if k == 1:
        return L[0, :1].astype(float)
    d, e = _tridiagonalize(L)
    return _ql_implicit(d, e, budget=30 * k, tag=tag)
