"""Master symmetries and the graded relation families they generate.

A conformal vector field Z0 rescales the bivector pair (L_Z0 pi0 = lam*pi0,
L_Z0 pi1 = mu*pi1) and one ladder hamiltonian (Z0(h_A) = nu*h_A).  Pushing Z0
through powers of the recursion operator produces the family Z_i = N^i Z0,
and the whole hierarchy closes on three coefficient laws plus a pair of
relations tying the Z_i to the modular fields of the hierarchy bivectors.

Every defect function returns per-sample arrays of shape (B,); callers
reduce with np.max / np.mean and decide what "small" means.
"""

import numpy as np

from .fields import (evaluate, hamiltonian_vf, lie_bracket,
                     lie_der_bivector, per_sample)
from .hierarchy import hierarchy_bivector
from .jets import jmatpow, jmatvec
from .modular import div_mu, modular_vf


def master_field(N, Z0, i):
    """Z_i = N^i Z0 (negative i through the inverse recursion operator)."""
    if i == 0:
        return Z0
    return jmatvec(jmatpow(N, i), Z0)


def coeff_h(lam, mu, nu, anchor, i, j):
    """Coefficient in Z_i(h_j) = coeff * h_{i+j} (undefined at i+j = 0)."""
    return nu + (j - anchor + i) * (mu - lam)


def coeff_pi(lam, mu, i, j):
    """Coefficient in L_{Z_i} pi_j = coeff * pi_{i+j}."""
    return mu + (j - i - 1) * (mu - lam)


def coeff_z(lam, mu, i, j):
    """Coefficient in [Z_i, Z_j] = coeff * Z_{i+j}."""
    return (mu - lam) * (j - i)


def conformal_defects(P0, P1, Z0, lam, mu, nu, h_anchor):
    """Per-sample defects of the three conformal conditions on Z0.

    Returns {"pi0", "pi1", "h"} per-sample arrays: how far L_Z0 pi0, L_Z0 pi1
    and Z0(h_anchor) are from lam*pi0, mu*pi1 and nu*h_anchor.
    """
    d0 = lie_der_bivector(Z0, P0).val - lam * P0.val
    d1 = lie_der_bivector(Z0, P1).val - mu * P1.val
    dh = evaluate(Z0, h_anchor).val - nu * h_anchor.val
    return {"pi0": per_sample(d0), "pi1": per_sample(d1), "h": per_sample(dh)}


def hamiltonian_family_defect(N, Z0, ladder, lam, mu, nu, anchor, i_range, j_range):
    """Per-sample max defect of Z_i(h_j) = coeff_h(i,j) * h_{i+j} over the index box.

    Pairs with i + j = 0 are excluded: there the right-hand side degenerates
    (h_0 is logarithmic) and Z_i(h_{-i}) is a constant instead; see
    anomaly_defect.  The ladder must cover every i + j that occurs.
    """
    worst = 0.0
    for i in i_range:
        Zi = master_field(N, Z0, i)
        for j in j_range:
            if i + j == 0:
                continue
            lhs = evaluate(Zi, ladder[j]).val
            rhs = coeff_h(lam, mu, nu, anchor, i, j) * ladder[i + j].val
            worst = np.maximum(worst, per_sample(lhs - rhs))
    return worst


def anomaly_defect(N, Z0, ladder, lam, mu, anomaly, i_range):
    """Per-sample max defect of Z_i(h_{-i}) = anomaly, a constant, over i in i_range.

    For the open lattice systems the constant is n*(mu - lam) with n the
    number of degrees of freedom; it is independent of i.
    """
    worst = 0.0
    for i in i_range:
        Zi = master_field(N, Z0, i)
        lhs = evaluate(Zi, ladder[-i]).val
        worst = np.maximum(worst, per_sample(lhs - anomaly))
    return worst


def bivector_family_defect(P0, N, Z0, lam, mu, i_range, j_range):
    """Per-sample max defect of L_{Z_i} pi_j = coeff_pi(i,j) * pi_{i+j} over the box."""
    worst = 0.0
    for i in i_range:
        Zi = master_field(N, Z0, i)
        for j in j_range:
            Pj = hierarchy_bivector(P0, N, j)
            lhs = lie_der_bivector(Zi, Pj).val
            rhs = coeff_pi(lam, mu, i, j) * hierarchy_bivector(P0, N, i + j).val
            worst = np.maximum(worst, per_sample(lhs - rhs))
    return worst


def commutator_family_defect(N, Z0, lam, mu, i_range, j_range):
    """Per-sample max defect of [Z_i, Z_j] = coeff_z(i,j) * Z_{i+j} over the box."""
    worst = 0.0
    fields = {}
    for i in set(i_range) | set(j_range):
        fields[i] = master_field(N, Z0, i)
    for i in i_range:
        for j in j_range:
            lhs = lie_bracket(fields[i], fields[j]).val
            rhs = coeff_z(lam, mu, i, j) * master_field(N, Z0, i + j).val
            worst = np.maximum(worst, per_sample(lhs - rhs))
    return worst


def modular_family_defect(P0, N, Z0, lam, mu, i_range, j_range, logg=None):
    """Per-sample defects of the two relations mixing Z_i with the modular fields.

    With X^j the modular field of pi_j and f_i = div(Z_i):

        [X^j, Z_i] + coeff_pi(i,j) * X^{i+j} - X^j_{f_i} = 0
        L_{X^i} pi_j + L_{X^j} pi_i = 0

    Returns {"bracket": ..., "exchange": ...} with the max defect of each.
    """
    xmu = {}

    def modular(k):
        if k not in xmu:
            xmu[k] = modular_vf(hierarchy_bivector(P0, N, k), logg)
        return xmu[k]

    worst_bracket = 0.0
    for i in i_range:
        Zi = master_field(N, Z0, i)
        fi = div_mu(Zi, logg)
        for j in j_range:
            modular(i + j)
            modular(j)
            Pj = hierarchy_bivector(P0, N, j)
            lhs = lie_bracket(xmu[j], Zi).val
            rhs = (
                -coeff_pi(lam, mu, i, j) * xmu[i + j].val
                + hamiltonian_vf(Pj, fi).val
            )
            worst_bracket = np.maximum(worst_bracket, per_sample(lhs - rhs))
    worst_exchange = 0.0
    for i in i_range:
        for j in j_range:
            Pi_ = hierarchy_bivector(P0, N, i)
            Pj = hierarchy_bivector(P0, N, j)
            lhs = lie_der_bivector(modular(i), Pj).val
            rhs = -lie_der_bivector(modular(j), Pi_).val
            worst_exchange = np.maximum(worst_exchange, per_sample(lhs - rhs))
    return {"bracket": worst_bracket, "exchange": worst_exchange}


def deformation_defect(P0, P1, Z, logg=None):
    """Per-sample defect of X^1 = [Z, X^0] + X^0_{div Z} for a Z with L_Z pi0 = pi1.

    X^0, X^1 are the modular fields of pi0, pi1 and X^0_f the pi0-hamiltonian
    field of f = div(Z), all taken in the same volume.
    """
    x0 = modular_vf(P0, logg)
    x1 = modular_vf(P1, logg)
    f = div_mu(Z, logg)
    rhs = lie_bracket(Z, x0).val + hamiltonian_vf(P0, f).val
    return per_sample(x1.val - rhs)
