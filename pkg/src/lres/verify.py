"""Seeded identity-verification suite.

Every check draws its sample points from one ``numpy`` generator seeded by
the caller, so a fixed seed gives identical records.  Each record carries the
identity checked, the worst residual over the samples, the tolerance and the
verdict.  Quadrature-based checks use ``|Im lam| <= 1.2`` so that the
exponential growth of ``U`` does not swamp the node count.
"""

import time
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from . import boundary_triple as bt
from . import canonical_system as cs
from . import matrix_core as mc
from . import nevanlinna as nv
from . import resolvent_matrix as rmx
from .errors import LresError

ALGEBRAIC_TOL = 1e-8
QUADRATURE_TOL = 1e-6
BOUNDARY_TOL = 1e-7


@dataclass
class CheckRecord:
    name: str
    identity: str
    residual: float
    tolerance: float
    passed: bool
    detail: dict = field(default_factory=dict)

    def as_dict(self):
        return asdict(self)


@dataclass
class SuiteReport:
    spec_key: str
    seed: int
    records: list
    warnings: list
    elapsed: float

    @property
    def passed(self):
        return all(r.passed for r in self.records)

    def as_dict(self):
        return {
            "spec_key": self.spec_key,
            "seed": self.seed,
            "passed": self.passed,
            "records": [r.as_dict() for r in self.records],
            "warnings": list(self.warnings),
        }


def _upper(rng, n, im=(0.2, 1.2), re=(-2.0, 2.0)):
    return [complex(rng.uniform(*re), rng.uniform(*im)) for _ in range(n)]


def _off_axis(rng, n, im=(0.2, 1.2), re=(-2.0, 2.0)):
    """Points in both half-planes."""
    return [z if rng.random() < 0.5 else np.conj(z) for z in _upper(rng, n, im, re)]


def _cvec(rng, p):
    return rng.standard_normal(p) + 1j * rng.standard_normal(p)


def _record(name, identity, residuals, tol, **detail):
    res = float(max(residuals)) if len(residuals) else 0.0
    return CheckRecord(name, identity, res, tol, bool(res <= tol), detail)


# ---------------------------------------------------------------------------
# individual checks; each takes (spec, rng, ctx) and returns a CheckRecord


def check_symplectic(spec, rng, ctx):
    J = spec.J
    rule = ctx["rule"]
    res = []
    for lam in _off_axis(rng, 5, im=(0.1, 2.0), re=(-3, 3)):
        U = cs.evaluate_U(spec, lam, rule.nodes)
        Us = cs.evaluate_U_sharp(spec, lam, rule.nodes)
        res.append(mc.max_abs(Us @ J @ U - J) / max(1.0, mc.max_abs(U) ** 2))
    return _record("symplectic", "U(t, conj lam)^* J U(t, lam) = J at every node", res, 1e-9)


def check_green(spec, rng, ctx):
    rule = ctx["rule"]
    res = []
    for _ in range(5):
        els = []
        for _ in range(2):
            h = bt.random_grid_function(rng, spec.p, spec.length)
            lam = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
            els.append(bt.solve_inhomogeneous(spec, lam, h, _cvec(rng, spec.p), ctx["nodes"]))
        a, b = els
        lhs = bt.inner(spec, a.g, b.f, rule) - bt.inner(spec, a.f, b.g, rule)
        a0, a1 = bt.boundary_maps(a)
        b0, b1 = bt.boundary_maps(b)
        rhs = np.vdot(b0, a1) - np.vdot(b1, a0)
        res.append(abs(lhs - rhs) / max(1.0, abs(rhs)))
    return _record("green", "<g, f~> - <f, g~> = (Gamma1, Gamma0~) - (Gamma0, Gamma1~)", res, QUADRATURE_TOL)


def check_weyl_symmetry(spec, rng, ctx):
    res = []
    for lam in _off_axis(rng, 10, im=(0.1, 2.0), re=(-3, 3)):
        M = bt.weyl_function(spec, lam)
        res.append(mc.max_abs(mc.sharp(lambda z: bt.weyl_function(spec, z), lam) - M) / max(1.0, mc.max_abs(M)))
    return _record("weyl_symmetry", "M(conj lam)^* = M(lam)", res, ALGEBRAIC_TOL)


def check_weyl_kernel(spec, rng, ctx):
    rule = ctx["rule"]
    res = []
    for _ in range(10):
        lam, om = _off_axis(rng, 2)
        if abs(lam - np.conj(om)) < 1e-3:
            continue
        N = (bt.weyl_function(spec, lam) - mc.adj(bt.weyl_function(spec, om))) / (lam - np.conj(om))
        gl = bt.weyl(spec, lam).gamma_rep(rule.nodes)
        go = bt.weyl(spec, om).gamma_rep(rule.nodes)
        G = np.einsum("n,nji,njk,nkl->il", rule.weights, go.conj(), rule.H, gl)
        res.append(mc.max_abs(N - G) / max(1.0, mc.max_abs(N)))
    return _record("weyl_kernel", "(M(lam) - M(om)^*)/(lam - conj om) = gamma(om)^* gamma(lam)", res, QUADRATURE_TOL)


def check_gamma_adjoint(spec, rng, ctx):
    rule = ctx["rule"]
    res = []
    for lam in _off_axis(rng, 5):
        f = bt.random_grid_function(rng, spec.p, spec.length)
        got = bt.gamma_adjoint_apply(spec, lam, f, rule)
        wd = bt.weyl(spec, np.conj(lam))
        ref = np.array([bt.inner(spec, f, wd.gamma(e), rule) for e in np.eye(spec.p)])
        res.append(mc.max_abs(got - ref) / max(1.0, mc.max_abs(ref)))
    return _record("gamma_adjoint", "closed form of gamma(conj lam)^* f = H-inner products", res, QUADRATURE_TOL)


def check_canonical_resolvent(spec, rng, ctx):
    rule = ctx["rule"]
    ode, bc = [], []
    for lam in _off_axis(rng, 3):
        h = bt.random_grid_function(rng, spec.p, spec.length)
        el = bt.canonical_resolvent_apply(spec, lam, h, ctx["nodes"])
        ode.append(el.residual(rule))
        g0, _ = bt.boundary_maps(el)
        bc.append(mc.max_abs(g0) / max(1.0, mc.max_abs(el.f(rule.nodes))))
    rec = _record(
        "canonical_resolvent",
        "R0 h solves J f' + F f = lam H f + H h with Gamma0 f = 0",
        ode,
        QUADRATURE_TOL,
        boundary_residual=max(bc),
        boundary_tolerance=BOUNDARY_TOL,
    )
    rec.passed = rec.passed and max(bc) <= BOUNDARY_TOL
    return rec


def check_jp_identity(spec, rng, ctx):
    res = [rmx.jp_identity_residual(spec, lam) for lam in _off_axis(rng, 10, im=(0.1, 2.0), re=(-3, 3))]
    return _record("jp_identity", "W(lam) J_p W(conj lam)^* = J_p", res, ALGEBRAIC_TOL)


def check_block_identities(spec, rng, ctx):
    res = []
    for lam in _off_axis(rng, 10, im=(0.1, 2.0), re=(-3, 3)):
        res.extend(rmx.block_identity_residuals(spec, lam))
    return _record("block_identities", "w-block relations for W and W# (row and column forms)", res, ALGEBRAIC_TOL)


def check_matrix_routes(spec, rng, ctx):
    res = []
    for lam in _off_axis(rng, 10):
        Wr = rmx.right_resolvent_matrix(spec, lam).full()
        Wp = rmx.right_resolvent_matrix(spec, lam, route="preresolvent").full()
        Wl = rmx.left_resolvent_matrix(spec, lam).full()
        Wlp = rmx.left_resolvent_matrix_from_preresolvent(spec, lam).full()
        scale = max(1.0, mc.max_abs(Wr), mc.max_abs(Wl))
        res.append(max(mc.max_abs(Wr - Wp), mc.max_abs(Wl - Wlp)) / scale)
    return _record("matrix_routes", "W from monodromy = W assembled from preresolvent blocks", res, ALGEBRAIC_TOL)


def check_kernel_factorization(spec, rng, ctx):
    res = []
    for _ in range(6):
        lam, om = _off_axis(rng, 2)
        if abs(lam - np.conj(om)) < 1e-3:
            continue
        res.append(rmx.kernel_factorization_check(spec, lam, om, ctx["rule"]))
    return _record("kernel_factorization", "K_om(lam) = int Phi(s, lam)^* H Phi(s, om) ds", res, QUADRATURE_TOL)


def check_preresolvent_kernel(spec, rng, ctx):
    gram, cong = [], []
    for _ in range(6):
        lam, om = _off_axis(rng, 2)
        if abs(lam - np.conj(om)) < 1e-3:
            continue
        c = rmx.preresolvent_kernel_check(spec, lam, om, ctx["rule"])
        gram.append(c.gram_residual)
        cong.append(c.congruence_residual)
    return _record(
        "preresolvent_kernel",
        "N^A_om(lam) = T(om)^* T(lam) and K = X^{-1} N^A X^{-*}",
        [max(gram), max(cong)],
        QUADRATURE_TOL,
        gram_residual=max(gram),
        congruence_residual=max(cong),
    )


def check_kernel_inertia(spec, rng, ctx):
    pts = _upper(rng, 5, im=(0.3, 2.0)) + [np.conj(z) for z in _upper(rng, 5, im=(0.3, 2.0))]
    tol = ctx["tol"]
    out = {}
    for name, kernel in (
        ("weyl", nv.weyl_kernel(spec)),
        ("resolvent", nv.resolvent_matrix_kernel(spec)),
        ("preresolvent", nv.preresolvent_matrix_kernel(spec)),
    ):
        out[name] = nv.negative_squares(kernel, pts, tol=tol).n_neg
    return _record("kernel_inertia", "sampled kernels of M, W and A have no negative squares", list(out.values()), 0, **out)


def check_a22_routes(spec, rng, ctx):
    t0 = np.array([0.0])
    reg = bt.regularizer_on_gauge_matrix(spec)(t0)[0]
    res = []
    K_gauge = -2.0 * reg - spec.J
    res.append(mc.max_abs(K_gauge - bt.K_matrix(spec)) / max(1.0, mc.max_abs(K_gauge)))
    for lam in _off_axis(rng, 10):
        a22 = rmx.preresolvent(spec, lam).a22
        gauge = 2.0 * (bt.resolvent_on_gauge_matrix(spec, lam)(t0)[0] - reg)
        res.append(mc.max_abs(a22 - gauge) / max(1.0, mc.max_abs(a22)))
    return _record("a22_routes", "a22 = -JMJ + K = 2 [(R0_lam - regularizer)(delta (x) .)](0)", res, ALGEBRAIC_TOL)


def check_lres_routes(spec, rng, ctx):
    res = []
    min_im, sym, nneg = np.inf, 0.0, 0
    for _ in range(ctx["n_pairs"]):
        pair = nv.random_selfadjoint_pair(rng, spec.p)
        for lam in _upper(rng, ctx["n_lambda"], im=(0.1, 2.0), re=(-3, 3)):
            try:
                vals = [fn(spec, lam, pair) for fn in nv.ROUTES.values()]
            except LresError:
                continue
            scale = max(1.0, mc.max_abs(vals[0]))
            res.append(max(mc.max_abs(v - vals[0]) for v in vals[1:]) / scale)
        rep = nv.check_nevanlinna(nv.l_resolvent_function(spec, pair), _upper(rng, 5, im=(0.3, 2.0)), ctx["tol"])
        min_im = min(min_im, rep.min_imag_eig)
        sym = max(sym, rep.symmetry_residual)
        nneg = max(nneg, rep.n_neg)
    rec = _record(
        "lres_routes",
        "left = direct = (A, B) = gauge L-resolvent for selfadjoint pairs",
        res,
        ALGEBRAIC_TOL,
        min_imag_eig=min_im,
        symmetry_residual=sym,
        n_neg=nneg,
    )
    rec.passed = rec.passed and min_im >= -ALGEBRAIC_TOL and sym <= ALGEBRAIC_TOL and nneg == 0
    return rec


def check_generalized_resolvent(spec, rng, ctx):
    rule = ctx["rule"]
    ode, bc = [], []
    for _ in range(3):
        pair = nv.random_selfadjoint_pair(rng, spec.p)
        lam = _off_axis(rng, 1)[0]
        h = bt.random_grid_function(rng, spec.p, spec.length)
        el = bt.generalized_resolvent_apply(spec, lam, pair, h, ctx["nodes"])
        ode.append(el.residual(rule))
        g0, g1 = bt.boundary_maps(el)
        C, D = pair.at(lam)
        scale = max(1.0, mc.max_abs(C), mc.max_abs(D)) * max(1.0, mc.max_abs(g0), mc.max_abs(g1))
        bc.append(mc.max_abs(C @ g0 + D @ g1) / scale)
    rec = _record(
        "generalized_resolvent",
        "R h solves the inhomogeneous system with C Gamma0 + D Gamma1 = 0",
        ode,
        QUADRATURE_TOL,
        boundary_residual=max(bc),
        boundary_tolerance=BOUNDARY_TOL,
    )
    rec.passed = rec.passed and max(bc) <= BOUNDARY_TOL
    return rec


def check_gauge_duality(spec, rng, ctx):
    rule = ctx["rule"]
    res = []
    for _ in range(3):
        pair = nv.random_selfadjoint_pair(rng, spec.p)
        lam = _off_axis(rng, 1)[0]
        h = bt.random_grid_function(rng, spec.p, spec.length)
        u = _cvec(rng, spec.p)
        lhs = bt.inner(spec, bt.generalized_resolvent_on_gauge(spec, lam, pair, u), h, rule)
        f = bt.generalized_resolvent_apply(spec, np.conj(lam), pair, h, ctx["nodes"]).f
        rhs = np.vdot(f(np.array([0.0]))[0], u)
        res.append(abs(lhs - rhs) / max(1.0, abs(rhs)))
    return _record("gauge_duality", "<R_lam (delta (x) u), h> = u . (R_{conj lam} h)(0)", res, QUADRATURE_TOL)


CHECKS = (
    check_symplectic,
    check_green,
    check_weyl_symmetry,
    check_weyl_kernel,
    check_gamma_adjoint,
    check_canonical_resolvent,
    check_jp_identity,
    check_block_identities,
    check_matrix_routes,
    check_kernel_factorization,
    check_preresolvent_kernel,
    check_kernel_inertia,
    check_a22_routes,
    check_lres_routes,
    check_generalized_resolvent,
    check_gauge_duality,
)


def run_suite(spec, seed=42, nodes=cs.DEFAULT_NODES, tol=mc.DEFAULT_INERTIA_TOL, n_pairs=5, n_lambda=4):
    """Run every check on ``spec``; one child generator per check keeps them independent."""
    start = time.perf_counter()
    warn_records = []
    report = cs.check_definiteness(spec)
    if report.ratio < cs.MARGINAL_DEFINITENESS:
        warn_records.append({"warning": "DefinitenessWarning", "message": report.describe()})
    ctx = {
        "rule": cs.quadrature_rule(spec, nodes),
        "nodes": nodes,
        "tol": tol,
        "n_pairs": n_pairs,
        "n_lambda": n_lambda,
    }
    children = np.random.SeedSequence(seed).spawn(len(CHECKS))
    records = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        for check, ss in zip(CHECKS, children):
            name = check.__name__.removeprefix("check_")
            try:
                records.append(check(spec, np.random.default_rng(ss), ctx))
            except LresError as exc:
                records.append(CheckRecord(name, "raised", float("inf"), 0.0, False, exc.record()))
    for w in caught:
        warn_records.append({"warning": type(w.message).__name__, "message": str(w.message)})
    return SuiteReport(spec.key, seed, records, warn_records, time.perf_counter() - start)
