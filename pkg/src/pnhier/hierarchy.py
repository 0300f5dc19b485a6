"""Recursion operator, bivector ladder, and hierarchy hamiltonians.

Given a compatible pair (pi0, pi1) the recursion operator is the matrix
N = Pi1 Pi0^{-1} (so that pi1# = N o pi0#), the bivector ladder is
Pi_i = N^i Pi0 for integer i, and the canonical hamiltonians are

    h_i = tr(N^i) / (2 i)        (i != 0)
    h_0 = log|det N| / 2.

These satisfy the cotangent ladder N^* dh_k = dh_{k+1}, the Lenard relations
pi_i# dh_j = pi_{i+1}# dh_{j-1}, involution in every bracket of the ladder,
and commuting flows; the functions here compute the objects and the defects
of each identity, leaving pass/fail policy to the caller.
"""

from __future__ import annotations

import numpy as np

from .errors import RangeError
from .fields import (cotangent_apply, differential, hamiltonian_vf,
                     lie_bracket, per_sample, poisson_bracket, sharp)
from .jets import (Jet2, jinv, jlogabsdet, jmatmul, jmatpow, jtrace,
                   jtranspose)


def recursion_operator(P0, P1):
    """N = Pi1 Pi0^{-1}; raises SingularTensorError where pi0 degenerates."""
    return jmatmul(P1, jinv(P0, "pi0"))


def n_act(N, P):
    """Two-factor action N P N^T of a (1,1) tensor on a bivector."""
    return jmatmul(jmatmul(N, P), jtranspose(N))


def hierarchy_bivector(P0, N, i):
    """Pi_i = N^i Pi0 (one factor of N per ladder step; i may be negative)."""
    return jmatmul(jmatpow(N, i), P0)


def hierarchy_hamiltonian(N, i):
    """h_i = tr(N^i)/(2i) for i != 0, h_0 = log|det N|/2."""
    i = int(i)
    if i == 0:
        return jlogabsdet(N, "recursion operator") * 0.5
    return jtrace(jmatpow(N, i)) * (1.0 / (2 * i))


def hamiltonian_ladder(N, depth, neg_depth=0):
    """dict {i: h_i} for i = -neg_depth..depth (0 included).

    Depth is capped at 12 in each direction: beyond m independent invariants
    the traces are functionally dependent anyway (see spectral_pairing), so
    deeper ladders only amplify roundoff.
    """
    depth, neg_depth = int(depth), int(neg_depth)
    if not 1 <= depth <= 12:
        raise RangeError(f"depth must be in 1..12, got {depth}")
    if not 0 <= neg_depth <= 12:
        raise RangeError(f"neg_depth must be in 0..12, got {neg_depth}")
    return {i: hierarchy_hamiltonian(N, i)
            for i in range(-neg_depth, depth + 1)}


def cotangent_ladder_defect(N, ladder):
    """Per-sample max |N^* dh_i - dh_{i+1}| over consecutive ladder indices."""
    worst = 0.0
    for i in sorted(ladder):
        if i + 1 not in ladder:
            continue
        lhs = cotangent_apply(N, differential(ladder[i]))
        rhs = differential(ladder[i + 1])
        worst = np.maximum(worst, per_sample(lhs.val - rhs.val))
    return worst


def lenard_defect(P0, N, ladder):
    """Per-sample max |pi_i# dh_j - pi_{i+1}# dh_{j-1}| over ladder pairs.

    Exercises the bivector ladder directly (matrix powers of N on pi0),
    which makes it independent of the cotangent-ladder route.
    """
    idx = sorted(ladder)
    worst = 0.0
    for j in idx:
        if j - 1 not in ladder:
            continue
        for i in (0, 1):
            lhs = sharp(hierarchy_bivector(P0, N, i), differential(ladder[j]))
            rhs = sharp(hierarchy_bivector(P0, N, i + 1),
                        differential(ladder[j - 1]))
            worst = np.maximum(worst, per_sample(lhs.val - rhs.val))
    return worst


def involution_defect(P0, P1, ladder):
    """Per-sample max |{h_i, h_j}| over both brackets and all ladder pairs."""
    idx = sorted(ladder)
    worst = 0.0
    for ai, i in enumerate(idx):
        for j in idx[ai + 1:]:
            for P in (P0, P1):
                worst = np.maximum(worst, per_sample(
                    poisson_bracket(P, ladder[i], ladder[j]).val))
    return worst


def commuting_flows_defect(P0, ladder):
    """Per-sample max |[X_i, X_j]| for the pi0-hamiltonian ladder fields."""
    idx = sorted(ladder)
    fields = {i: hamiltonian_vf(P0, ladder[i]) for i in idx}
    worst = 0.0
    for ai, i in enumerate(idx):
        for j in idx[ai + 1:]:
            worst = np.maximum(worst,
                               per_sample(lie_bracket(fields[i], fields[j]).val))
    return worst


def spectrum(N):
    """Eigenvalues of the recursion operator, sorted by real part per point."""
    ev = np.linalg.eigvals(N.val)
    order = np.argsort(ev.real, axis=-1)
    return np.take_along_axis(ev, order, axis=-1)


def spectral_pairing(N, n=None, tol=1e-8):
    """Sorted eigenvalues of N plus a pairing and multiplicity report.

    Recursion operators built from a bivector pair carry a doubled spectrum;
    per point this reports the sorted real eigenvalues, whether they pair up,
    how many distinct values they collapse to, and whether at least n are
    distinct (the sufficient condition for n independent ladder invariants).
    Degeneracy is reported, never raised.
    """
    ev = spectrum(N)
    lam = ev.real
    m = lam.shape[-1]
    if n is None:
        n = m // 2
    scale = np.maximum(1.0, np.abs(lam))
    new = np.ones(lam.shape, dtype=bool)
    new[..., 1:] = np.diff(lam, axis=-1) > tol * scale[..., 1:]
    distinct = new.sum(axis=-1)
    if m % 2 == 0:
        paired = np.all(np.abs(lam[..., 0::2] - lam[..., 1::2])
                        <= tol * scale[..., 0::2], axis=-1)
    else:
        paired = np.zeros(lam.shape[:-1], dtype=bool)
    return {
        "eigenvalues": lam,
        "max_imag": float(np.max(np.abs(ev.imag))),
        "paired": paired,
        "distinct": distinct,
        "independent": distinct >= int(n),
    }
