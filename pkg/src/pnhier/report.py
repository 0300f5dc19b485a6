"""Seeded identity-verification reports and deterministic emitters.

The verify suite evaluates the structural identities of a catalog system on
a seeded sample cloud.  Every check reduces a per-sample defect array to
max/mean statistics; a row passes iff max_abs_defect < tol.  Checks that need
catalog data a system does not carry (a conformal master symmetry, a
deformation generator) appear with status "not-applicable" and a reason
instead of being dropped.

Two control rows rerun the torsion and compatibility checks against a
deliberately broken recursion operator (entry (1,1) += 1e-3 * x^1).  They
pass only when the measured defect EXCEEDS a floor, proving the suite can
see a violation; their rows carry a "floor" key instead of "tol" and invert
the pass rule.

Reports are plain dicts with fixed key order and native scalar types, so the
rendered JSON is byte-identical for identical inputs: no timestamps, no
environment-dependent iteration order.
"""

from __future__ import annotations

import json

import numpy as np

from . import __version__
from .errors import RangeError
from .fields import (
    antisymmetry_defect,
    cotangent_apply,
    differential,
    hamiltonian_vf,
    jacobi_defect,
    lie_bracket,
    lie_der_bivector,
    per_sample,
    pn_compat_defect,
    poisson_bracket,
    scalar_mul,
    schouten_bb,
    sharp,
    torsion_defect,
    wedge_vb,
    wedge_vv,
)
from .hierarchy import (
    cotangent_ladder_defect,
    commuting_flows_defect,
    hamiltonian_ladder,
    hierarchy_bivector,
    hierarchy_hamiltonian,
    involution_defect,
    lenard_defect,
    n_act,
    recursion_operator,
    spectral_pairing,
)
from .jets import Jet2
from .master import (
    anomaly_defect,
    bivector_family_defect,
    commutator_family_defect,
    conformal_defects,
    deformation_defect,
    hamiltonian_family_defect,
    master_field,
    modular_family_defect,
)
from .modular import (
    div_mu,
    koszul_d,
    modular_pair_defect_field,
    modular_vf,
    pn_modular_field,
)
from .systems import SYSTEMS, make_system

CONTROL_FLOOR = 1e-5

# Commuting flows compare second derivatives of ladder hamiltonians through
# repeated N-powers and carry an extra conditioning factor; the acceptance
# bounds keep the same 10x ratio relative to the first-order identities.
TOL_SCALE = {"commuting-flows": 10.0}


# ---- shared per-report state -------------------------------------------------

class _Workspace:
    """Sampled jets and derived tensors, built once per report."""

    def __init__(self, system, samples, seed, depth):
        if samples < 1:
            raise RangeError("samples must be >= 1")
        self.system = system
        self.samples = int(samples)
        self.seed = int(seed)
        self.depth = int(depth)
        self.x = system.sample(samples, seed)
        self.jets = system.jets(self.x)
        self.P0 = system.pi0(self.jets)
        self.P1 = system.pi1(self.jets)
        self.N = recursion_operator(self.P0, self.P1)
        self.neg_depth = int(system.extras.get("neg_depth", 0))
        self._ladders = {}
        # two smooth log-densities besides Lebesgue; any polynomials work
        self.lg_b = self.jets[0]
        self.lg_c = self.jets[0] * self.jets[-1] * 0.5 + self.jets[1] * 0.25

    def ladder(self, depth=None, neg_depth=None):
        key = (self.depth if depth is None else depth,
               self.neg_depth if neg_depth is None else neg_depth)
        if key not in self._ladders:
            self._ladders[key] = hamiltonian_ladder(self.N, key[0], neg_depth=key[1])
        return self._ladders[key]


# ---- check runners -----------------------------------------------------------

def _r_antisymmetry(ws):
    return np.maximum(antisymmetry_defect(ws.P0), antisymmetry_defect(ws.P1))


def _r_jacobi_pi0(ws):
    return jacobi_defect(ws.P0)


def _r_jacobi_pi1(ws):
    return jacobi_defect(ws.P1)


def _r_mixed(ws):
    return per_sample(schouten_bb(ws.P0, ws.P1).val)


def _r_torsion(ws):
    return torsion_defect(ws.N)


def _r_compat(ws):
    return pn_compat_defect(ws.P0, ws.N)


def _r_nact(ws):
    two = n_act(ws.N, ws.P0)
    one = hierarchy_bivector(ws.P0, ws.N, 2)
    return per_sample(two.val - one.val)


def _r_modular_routes(ws):
    direct = pn_modular_field(ws.P0, ws.N)
    pair = modular_pair_defect_field(ws.P0, ws.P1, ws.N)
    ham0 = hamiltonian_vf(ws.P0, hierarchy_hamiltonian(ws.N, 1) * (-1.0))
    ham1 = hamiltonian_vf(ws.P1, hierarchy_hamiltonian(ws.N, 0) * (-1.0))
    d = per_sample(pair.val - direct.val)
    d = np.maximum(d, per_sample(ham0.val - direct.val))
    return np.maximum(d, per_sample(ham1.val - direct.val))


def _r_mu_independence(ws):
    routes = [modular_pair_defect_field(ws.P0, ws.P1, ws.N, lg).val
              for lg in (None, ws.lg_b, ws.lg_c)]
    d = per_sample(routes[0] - routes[1])
    d = np.maximum(d, per_sample(routes[0] - routes[2]))
    return np.maximum(d, per_sample(routes[1] - routes[2]))


def _r_density_change(ws):
    d = None
    for P in (ws.P0, ws.P1):
        base = modular_vf(P)
        for lg in (ws.lg_b, ws.lg_c):
            diff = modular_vf(P, lg).val - base.val + hamiltonian_vf(P, lg).val
            d = per_sample(diff) if d is None else np.maximum(d, per_sample(diff))
    return d


def _r_koszul_d2(ws):
    weighted = koszul_d(koszul_d(ws.P1, ws.lg_b), ws.lg_b)
    flat = koszul_d(koszul_d(ws.P0))
    return np.maximum(per_sample(weighted.val), per_sample(flat.val))


def _r_koszul_generator(ws):
    lg = ws.lg_b
    lad = ws.ladder()
    X = hamiltonian_vf(ws.P0, lad[1])
    Y = hamiltonian_vf(ws.P1, lad[0])
    # vector-bivector: L_X P = D(X^P) - (DX) P - X ^ (DP)
    lhs = lie_der_bivector(X, ws.P1).val
    rhs = (koszul_d(wedge_vb(X, ws.P1), lg).val
           - scalar_mul(div_mu(X, lg), ws.P1).val
           - wedge_vv(X, koszul_d(ws.P1, lg)).val)
    d = per_sample(lhs - rhs)
    # vector-vector: [X, Y] = -D(X^Y) - (DX) Y + (DY) X
    lhs = lie_bracket(X, Y).val
    rhs = (-koszul_d(wedge_vv(X, Y), lg).val
           - scalar_mul(div_mu(X, lg), Y).val
           + scalar_mul(div_mu(Y, lg), X).val)
    return np.maximum(d, per_sample(lhs - rhs))


def _r_cotangent(ws):
    return cotangent_ladder_defect(ws.N, ws.ladder())


def _r_lenard(ws):
    return lenard_defect(ws.P0, ws.N, ws.ladder())


def _r_involution(ws):
    return involution_defect(ws.P0, ws.P1, ws.ladder())


def _r_commuting(ws):
    return commuting_flows_defect(ws.P0, ws.ladder())


def _need_oevel(ws):
    if "oevel" not in ws.system.extras:
        return "catalog entry carries no conformal master symmetry (extras['oevel'])"
    return None


def _oevel_data(ws):
    ov = ws.system.extras["oevel"]
    Z0 = ov["z0"](ws.jets)
    return Z0, ov["lam"], ov["mu"], ov["nu"], ov["anchor"]


def _r_oevel_conformal(ws):
    Z0, lam, mu, nu, anchor = _oevel_data(ws)
    lad = ws.ladder()
    d = conformal_defects(ws.P0, ws.P1, Z0, lam, mu, nu, lad[anchor])
    return np.maximum(np.maximum(d["pi0"], d["pi1"]), d["h"])


def _r_oevel_h_family(ws):
    Z0, lam, mu, nu, anchor = _oevel_data(ws)
    lad = ws.ladder(6, 6)
    rng = range(-3, 4)
    return hamiltonian_family_defect(ws.N, Z0, lad, lam, mu, nu, anchor, rng, rng)


def _r_oevel_anomaly(ws):
    Z0, lam, mu, nu, anchor = _oevel_data(ws)
    lad = ws.ladder(6, 6)
    anomaly = ws.system.n * (mu - lam)
    return anomaly_defect(ws.N, Z0, lad, lam, mu, anomaly, range(-2, 3))


def _r_oevel_pi_family(ws):
    Z0, lam, mu, nu, anchor = _oevel_data(ws)
    rng = range(-3, 4)
    return bivector_family_defect(ws.P0, ws.N, Z0, lam, mu, rng, rng)


def _r_oevel_z_family(ws):
    Z0, lam, mu, nu, anchor = _oevel_data(ws)
    rng = range(-3, 4)
    return commutator_family_defect(ws.N, Z0, lam, mu, rng, rng)


def _r_oevel_modular(ws):
    Z0, lam, mu, nu, anchor = _oevel_data(ws)
    rng = range(-2, 3)
    d = modular_family_defect(ws.P0, ws.N, Z0, lam, mu, rng, rng)
    return np.maximum(d["bracket"], d["exchange"])


def _need_deformation(ws):
    if "deformation_z" not in ws.system.extras:
        return "catalog entry carries no deformation generator (extras['deformation_z'])"
    return None


def _r_deformation(ws):
    Z = ws.system.extras["deformation_z"](ws.jets)
    d = deformation_defect(ws.P0, ws.P1, Z)
    return np.maximum(d, deformation_defect(ws.P0, ws.P1, Z, logg=ws.lg_b))


def _r_closed_forms(ws):
    """Every closed-form table the catalog entry carries, against the engine."""
    sysm = ws.system
    extras = sysm.extras
    jets = ws.jets
    lad = ws.ladder()
    d = np.zeros(ws.x.shape[0])

    def acc(diff):
        nonlocal d
        d = np.maximum(d, per_sample(np.asarray(diff)))

    for k, fn in extras.get("h_closed", {}).items():
        if k in lad:
            acc(fn(jets).val - lad[k].val)
    if "deformation_z" in extras:
        Z = extras["deformation_z"](jets)
        acc(lie_der_bivector(Z, ws.P0).val - ws.P1.val)
        if "deformation_div_closed" in extras:
            acc(div_mu(Z).val - extras["deformation_div_closed"](jets).val)
    if "xn_closed" in extras:
        acc(extras["xn_closed"](jets).val - pn_modular_field(ws.P0, ws.N).val)
    if "x1_closed" in extras:
        x1 = extras["x1_closed"](jets)
        acc(hamiltonian_vf(ws.P0, lad[2]).val - x1.val)
        acc(hamiltonian_vf(ws.P1, lad[1]).val - x1.val)
    if "x0_mu" in extras:
        acc(modular_vf(ws.P0).val - extras["x0_mu"](jets).val)
    if "x1_mu" in extras:
        acc(modular_vf(ws.P1).val - extras["x1_mu"](jets).val)
    if "xm1_mu" in extras:
        Pm1 = hierarchy_bivector(ws.P0, ws.N, -1)
        acc(modular_vf(Pm1).val - extras["xm1_mu"](jets).val)
    if "z_closed" in extras:
        ov = extras.get("oevel")
        if ov is not None:
            Z0 = ov["z0"](jets)
            for i in (-1, 1, 2):
                acc(master_field(ws.N, Z0, i).val - extras["z_closed"](i)(jets).val)
    if "h2_closed" in extras:
        h2 = extras["h2_closed"](jets)
        acc(h2.val - hierarchy_hamiltonian(ws.N, 1).val)
        L = extras["lax_np"](ws.x)
        acc(np.einsum('bii->b', ws.N.val) - np.einsum('bij,bji->b', L, L))
        acc(lad[0].val - np.log(np.abs(np.linalg.det(L))))
        if "printed_flow" in extras:
            flow = hamiltonian_vf(ws.P0, h2)
            printed = extras["printed_flow"](jets)
            acc(flow.val - extras["flow_scale"] * printed.val)
        acc(sharp(ws.P1, differential(lad[0])).val - sharp(ws.P0, differential(h2)).val)
    if "pushed_flow_np" in extras:
        n = sysm.n
        h2 = extras["h_closed"][2](jets)
        X = hamiltonian_vf(ws.P0, h2).val
        a, b = extras["flaschka_np"](ws.x)
        adot = a * (X[:, :n - 1] - X[:, 1:n]) * 0.5
        bdot = -0.5 * X[:, n:]
        adot_ref, bdot_ref = extras["pushed_flow_np"](ws.x)
        acc(adot - adot_ref)
        acc(bdot - bdot_ref)
    return d


def _perturbed_n(ws):
    """N with entry (1,1) shifted by 1e-3 * x^1: must break the suite."""
    N = ws.N
    val = N.val.copy()
    val[:, 0, 0] += 1e-3 * ws.x[:, 0]
    grad = N.grad.copy()
    grad[:, 0, 0, 0] += 1e-3
    hess = None if N.hess is None else N.hess
    return Jet2(val, grad, hess, m=N.m)


def _r_control_torsion(ws):
    return torsion_defect(_perturbed_n(ws))


def _r_control_compat(ws):
    return pn_compat_defect(ws.P0, _perturbed_n(ws))


REGISTRY = (
    ("antisymmetry", "pi^T = -pi for both stored bivectors", None, _r_antisymmetry),
    ("jacobi-pi0", "[pi0, pi0] = 0", None, _r_jacobi_pi0),
    ("jacobi-pi1", "[pi1, pi1] = 0", None, _r_jacobi_pi1),
    ("schouten-mixed", "[pi0, pi1] = 0", None, _r_mixed),
    ("torsion", "T_N = 0 for N = pi1# o (pi0#)^{-1}", None, _r_torsion),
    ("pn-compatibility", "N pi0 = pi0 N^T and the coupling tensor vanishes",
     None, _r_compat),
    ("nact-consistency", "N pi0 N^T = N^2 pi0", None, _r_nact),
    ("modular-routes",
     "X^1 - N X^0 = pi0# d(-tr N / 2) = pi1# d(-log|det N| / 2) = X_N",
     None, _r_modular_routes),
    ("mu-independence", "X^1_mu - N X^0_mu does not depend on the density mu",
     None, _r_mu_independence),
    ("density-change", "X_{g mu} = X_mu - X_{ln g} for both bivectors",
     None, _r_density_change),
    ("koszul-d2", "D_mu o D_mu = 0 on both bivectors", None, _r_koszul_d2),
    ("koszul-generator",
     "D_mu generates the bracket: L_X P = D(X^P) - (DX)P - X^(DP)",
     None, _r_koszul_generator),
    ("cotangent-ladder", "N^* dh_k = dh_{k+1}", None, _r_cotangent),
    ("lenard-ladder", "pi_{i+1}# dh_k = pi_i# dh_{k+1}", None, _r_lenard),
    ("involution", "{h_i, h_j} = 0 in both brackets", None, _r_involution),
    ("commuting-flows", "[X_{h_i}, X_{h_j}] = 0 for the pi0 flows",
     None, _r_commuting),
    ("oevel-conformal",
     "L_{Z0} pi0 = lam pi0, L_{Z0} pi1 = mu pi1, Z0(h_A) = nu h_A",
     _need_oevel, _r_oevel_conformal),
    ("oevel-h-family",
     "Z_i(h_j) = (nu + (j - A + i)(mu - lam)) h_{i+j} off the anomaly",
     _need_oevel, _r_oevel_h_family),
    ("oevel-anomaly", "Z_i(h_{-i}) = n (mu - lam)", _need_oevel, _r_oevel_anomaly),
    ("oevel-pi-family",
     "L_{Z_i} pi_j = (mu + (j - i - 1)(mu - lam)) pi_{i+j}",
     _need_oevel, _r_oevel_pi_family),
    ("oevel-z-family", "[Z_i, Z_j] = (mu - lam)(j - i) Z_{i+j}",
     _need_oevel, _r_oevel_z_family),
    ("oevel-modular-relations",
     "[X^j, Z_i] = -c_ij X^{i+j} + X^j_{div Z_i}; L_{X^i} pi_j = -L_{X^j} pi_i",
     _need_oevel, _r_oevel_modular),
    ("oevel-deformation", "L_Z pi0 = pi1 implies X^1 = [Z, X^0] + X^0_{div Z}",
     _need_deformation, _r_deformation),
    ("closed-forms", "engine objects match the catalog's closed-form tables",
     None, _r_closed_forms),
)

CONTROLS = (
    ("control-torsion",
     "perturbed N (entry (1,1) += 1e-3 x^1) must fail the torsion check",
     _r_control_torsion),
    ("control-compatibility",
     "perturbed N must fail the compatibility check",
     _r_control_compat),
)

CHECK_NAMES = tuple(name for name, _, _, _ in REGISTRY) + tuple(
    name for name, _, _ in CONTROLS)


def _tokens(checks):
    if checks is None:
        return None
    if isinstance(checks, str):
        parts = [t.strip() for t in checks.split(",")]
    else:
        parts = [str(t).strip() for t in checks]
    return [t for t in parts if t]


def _selected(name, tokens):
    if tokens is None:
        return True
    words = name.split("-")
    return any(t == name or t in words or name.startswith(t + "-") for t in tokens)


# ---- verify ------------------------------------------------------------------

def verify_report(system, samples=100, seed=42, tol=1e-8, depth=4, checks=None,
                  threads=None):
    """Run the identity suite on seeded samples and assemble the report dict."""
    if tol <= 0:
        raise RangeError("tol must be positive")
    if depth < 1:
        raise RangeError("depth must be >= 1")
    tokens = _tokens(checks)
    if tokens is not None:
        unknown = [t for t in tokens
                   if not any(_selected(name, [t]) for name in CHECK_NAMES)]
        if unknown:
            raise RangeError(f"unknown check selector(s): {', '.join(unknown)}")
    ws = _Workspace(system, samples, seed, depth)

    rows = []
    for name, identity, need, run in REGISTRY:
        if not _selected(name, tokens):
            continue
        reason = need(ws) if need is not None else None
        if reason is not None:
            rows.append({"name": name, "identity": identity,
                         "status": "not-applicable", "reason": reason})
            continue
        d = np.asarray(run(ws), dtype=float).ravel()
        mx = float(np.max(d))
        row_tol = float(tol) * TOL_SCALE.get(name, 1.0)
        rows.append({"name": name, "identity": identity, "samples": ws.samples,
                     "max_abs_defect": mx,
                     "mean_abs_defect": float(np.mean(d)),
                     "tol": row_tol, "pass": bool(mx < row_tol)})
    for name, identity, run in CONTROLS:
        if not _selected(name, tokens):
            continue
        d = np.asarray(run(ws), dtype=float).ravel()
        mx = float(np.max(d))
        rows.append({"name": name, "identity": identity, "samples": ws.samples,
                     "max_abs_defect": mx,
                     "mean_abs_defect": float(np.mean(d)),
                     "floor": CONTROL_FLOOR, "pass": bool(mx > CONTROL_FLOOR)})

    pairing = spectral_pairing(ws.N, n=system.n)
    spectrum = {
        "max_imag": float(pairing["max_imag"]),
        "paired_all": bool(np.all(pairing["paired"])),
        "distinct_min": int(np.min(pairing["distinct"])),
        "independent_all": bool(np.all(pairing["independent"])),
    }
    judged = [r for r in rows if "pass" in r]
    report = {
        "meta": _meta("verify", system, version_extras={
            "samples": ws.samples, "seed": ws.seed, "tol": float(tol),
            "depth": ws.depth, "checks": tokens, "threads": threads}),
        "spectrum": spectrum,
        "checks": rows,
        "failed": [r["name"] for r in judged if not r["pass"]],
        "all_pass": bool(all(r["pass"] for r in judged)),
    }
    return report


def _meta(command, system, version_extras=None):
    meta = {
        "command": command,
        "system": system.key.replace("_", "-"),
        "title": system.title,
        "n": int(system.n),
        "m": int(system.m),
        "box": {"lo": [float(v) for v in system.lo],
                "hi": [float(v) for v in system.hi]},
    }
    meta.update(version_extras or {})
    meta["version"] = __version__
    return meta


def summary_lines(report):
    """Human-readable one-line-per-check digest of a verify report."""
    lines = []
    for row in report["checks"]:
        if row.get("status") == "not-applicable":
            lines.append(f"SKIP {row['name']}: {row['reason']}")
            continue
        word = "PASS" if row["pass"] else "FAIL"
        bound = ("floor", row["floor"]) if "floor" in row else ("tol", row["tol"])
        lines.append(f"{word} {row['name']}  max {row['max_abs_defect']:.3e}"
                     f"  mean {row['mean_abs_defect']:.3e}  ({bound[0]} {bound[1]:g})")
    judged = [r for r in report["checks"] if "pass" in r]
    passed = sum(1 for r in judged if r["pass"])
    lines.append(f"{passed}/{len(judged)} checks passed")
    return lines


# ---- hierarchy ---------------------------------------------------------------

def probe_point(system):
    """The deterministic probe (1..n, 1..n) used by hierarchy and integrate."""
    base = np.arange(1.0, system.n + 1.0)
    return np.concatenate([base, base])


def hierarchy_report(system, depth=4):
    """Ladder table and pairwise defect matrices at the probe point."""
    if depth < 1:
        raise RangeError("depth must be >= 1")
    x = probe_point(system)[None, :]
    jets = system.jets(x)
    P0 = system.pi0(jets)
    P1 = system.pi1(jets)
    N = recursion_operator(P0, P1)
    neg_depth = int(system.extras.get("neg_depth", 0))
    ladder = hamiltonian_ladder(N, depth, neg_depth=neg_depth)
    indices = sorted(ladder)

    table = [{"index": k, "value": float(ladder[k].val[0])} for k in indices]
    cotangent = []
    for k in indices:
        if k + 1 not in ladder:
            continue
        lhs = cotangent_apply(N, differential(ladder[k]))
        rhs = differential(ladder[k + 1])
        cotangent.append({"index": k,
                          "defect": float(np.max(np.abs(lhs.val - rhs.val)))})
    matrix = []
    for i in indices:
        row = []
        for j in indices:
            b0 = float(np.max(np.abs(poisson_bracket(P0, ladder[i], ladder[j]).val)))
            b1 = float(np.max(np.abs(poisson_bracket(P1, ladder[i], ladder[j]).val)))
            row.append(max(b0, b1))
        matrix.append(row)

    pairing = spectral_pairing(N, n=system.n)
    return {
        "meta": _meta("hierarchy", system, version_extras={"depth": int(depth)}),
        "probe": [float(v) for v in x[0]],
        "indices": indices,
        "table": table,
        "cotangent_defects": cotangent,
        "involution_matrix": matrix,
        "spectrum": {
            "eigenvalues": [float(v) for v in pairing["eigenvalues"][0]],
            "max_imag": float(pairing["max_imag"]),
            "paired": bool(np.all(pairing["paired"])),
            "distinct": int(pairing["distinct"][0]),
        },
    }


# ---- catalog -----------------------------------------------------------------

def catalog_report(n=2):
    """All catalog entries instantiated at a representative size."""
    entries = []
    for key in SYSTEMS:
        s = make_system(key, n)
        entries.append({
            "system": key.replace("_", "-"),
            "title": s.title,
            "n": int(s.n),
            "m": int(s.m),
            "labels": list(s.labels),
            "box": {"lo": [float(v) for v in s.lo],
                    "hi": [float(v) for v in s.hi]},
            "pair": list(s.pair_names),
            "description": s.description,
            "closed_forms": sorted(s.extras),
        })
    return {"meta": {"command": "catalog", "n": int(n), "version": __version__},
            "systems": entries}


# ---- emitters ------------------------------------------------------------------

def render_report(report):
    """Stable JSON text: fixed key order, native types, trailing newline."""
    return json.dumps(report, indent=2) + "\n"


def trajectory_csv(traj, labels, monitors=None):
    """CSV text: t, chart coordinates, then monitor columns in given order."""
    monitors = monitors or {}
    names = list(monitors)
    cols = ["t"] + list(labels) + names
    arrays = [np.asarray(monitors[k], dtype=float) for k in names]
    lines = [",".join(cols)]
    for r in range(len(traj)):
        vals = [traj.times[r]]
        vals.extend(traj.states[r])
        vals.extend(a[r] for a in arrays)
        lines.append(",".join(repr(float(v)) for v in vals))
    return "\n".join(lines) + "\n"
