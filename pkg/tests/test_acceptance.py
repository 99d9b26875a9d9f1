"""Acceptance criteria 1-12, one printed PASS/FAIL line per criterion.

Run ``pytest tests/test_acceptance.py -v`` (lines appear in the terminal
summary) or ``python tests/test_acceptance.py``.

FS is the free system (p = 2, F = 0, H = I, l = pi); RS is ``random_system(7)``.
"""

import sys
import time

import numpy as np
import pytest
import scipy.linalg

from lres import boundary_triple as bt
from lres import canonical_system as cs
from lres import matrix_core as mc
from lres import nevanlinna as nv
from lres import resolvent_matrix as rmx
from lres import verify
from lres.errors import SpectrumOfA0

FS = cs.free_system()
RS = cs.random_system(7)
SYSTEMS = {"FS": FS, "RS": RS}
RESULTS = {}


def report(n, title, ok, detail, elapsed, limit=5.0):
    ok = bool(ok) and elapsed <= limit
    line = f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail} [{elapsed:.2f}s]"
    RESULTS[n] = line
    print(line)
    return ok


def _rng(n):
    return np.random.default_rng(1000 + n)


def _upper(rng, k, im=(0.1, 1.2), re=(-2.0, 2.0)):
    return [complex(rng.uniform(*re), rng.uniform(*im)) for _ in range(k)]


def _both(rng, k, **kw):
    return [z if rng.random() < 0.5 else z.conjugate() for z in _upper(rng, k, **kw)]


def _pairs_of_points(rng, k):
    out = []
    while len(out) < k:
        lam, om = _both(rng, 2)
        if abs(lam - np.conj(om)) > 1e-2:
            out.append((lam, om))
    return out


# ---------------------------------------------------------------- criteria


def criterion_1():
    t0 = time.perf_counter()
    rng = _rng(1)
    J = FS.J
    worst = 0.0
    for _ in range(50):
        r, a = 3 * np.sqrt(rng.uniform()), rng.uniform(0, 2 * np.pi)
        lam = r * np.exp(1j * a)
        c, s = np.cos(lam * np.pi), np.sin(lam * np.pi)
        closed = np.array([[c, s], [-s, c]])
        generator = scipy.linalg.expm(-lam * np.pi * J)
        U = cs.monodromy(FS, lam)
        worst = max(worst, mc.max_abs(U - closed), mc.max_abs(U - generator))
    ok = worst <= 1e-10
    return report(1, "monodromy closed form (FS, 50 points |lam| <= 3)", ok, f"max error {worst:.2e} <= 1e-10", time.perf_counter() - t0)


def criterion_2():
    t0 = time.perf_counter()
    rng = _rng(2)
    worst = 0.0
    for _ in range(20):
        lam = complex(rng.uniform(-3, 3), rng.uniform(-1.5, 1.5))
        if abs(lam.imag) < 1e-3 and abs((lam.real - 1) / 2 - round((lam.real - 1) / 2)) < 1e-3:
            continue
        M = bt.weyl_function(FS, lam)
        worst = max(worst, mc.max_abs(M - np.tan(lam * np.pi / 2) * np.eye(2)))
    grid = np.arange(-5.0, 5.01, 0.25)
    raised = []
    for x in grid:
        try:
            bt.weyl_function(FS, x)
        except SpectrumOfA0:
            raised.append(float(x))
    expected = [x for x in grid if abs(x) % 2 == 1]
    ok = worst <= 1e-9 and raised == expected
    detail = f"max error {worst:.2e} <= 1e-9; SpectrumOfA0 at {raised} (expected odd integers)"
    return report(2, "Weyl closed form tan(lam pi / 2)", ok, detail, time.perf_counter() - t0)


def criterion_3():
    t0 = time.perf_counter()
    rng = _rng(3)
    worst = 0.0
    for spec in SYSTEMS.values():
        nodes = cs.quadrature_rule(spec).nodes
        t = np.concatenate([nodes, spec.breakpoints])
        J = spec.J
        for lam in _both(rng, 10, im=(0.0, 2.0), re=(-3, 3)):
            U = cs.evaluate_U(spec, lam, t)
            Us = cs.evaluate_U_sharp(spec, lam, t)
            worst = max(worst, mc.max_abs(Us @ J @ U - J))
    ok = worst <= 1e-9
    return report(3, "symplectic identity at all grid nodes (FS, RS)", ok, f"max residual {worst:.2e} <= 1e-9", time.perf_counter() - t0)


def criterion_4():
    t0 = time.perf_counter()
    rng = _rng(4)
    worst = 0.0
    for spec in SYSTEMS.values():
        rule = cs.quadrature_rule(spec, 16)
        for lam, om in _pairs_of_points(rng, 20):
            N = (bt.weyl_function(spec, lam) - mc.adj(bt.weyl_function(spec, om))) / (lam - np.conj(om))
            gl = bt.weyl(spec, lam).gamma_rep(rule.nodes)
            go = bt.weyl(spec, om).gamma_rep(rule.nodes)
            G = np.einsum("n,nji,njk,nkl->il", rule.weights, go.conj(), rule.H, gl)
            worst = max(worst, mc.max_abs(N - G) / max(1.0, mc.max_abs(N)))
    ok = worst <= 1e-6
    return report(4, "Weyl-kernel factorization by quadrature (FS, RS)", ok, f"max residual {worst:.2e} <= 1e-6", time.perf_counter() - t0)


def criterion_5():
    t0 = time.perf_counter()
    rng = _rng(5)
    jp = blocks = 0.0
    for spec in SYSTEMS.values():
        for lam in _both(rng, 20, im=(0.05, 2.0), re=(-3, 3)):
            jp = max(jp, rmx.jp_identity_residual(spec, lam))
            blocks = max(blocks, *rmx.block_identity_residuals(spec, lam))
    ok = jp <= 1e-8 and blocks <= 1e-8
    detail = f"J_p residual {jp:.2e}, block identities {blocks:.2e} <= 1e-8"
    return report(5, "J_p identity and block identities (FS, RS)", ok, detail, time.perf_counter() - t0)


def criterion_6():
    t0 = time.perf_counter()
    rng = _rng(6)
    worst = 0.0
    for spec in SYSTEMS.values():
        for lam, om in _pairs_of_points(rng, 10):
            worst = max(worst, rmx.kernel_factorization_check(spec, lam, om))
    ok = worst <= 1e-6
    return report(6, "resolvent-matrix kernel factorization, full 4x4 (FS, RS)", ok, f"max residual {worst:.2e} <= 1e-6", time.perf_counter() - t0)


def criterion_7():
    t0 = time.perf_counter()
    rng = _rng(7)
    worst = 0.0
    nneg = {}
    for name, spec in SYSTEMS.items():
        for lam, om in _pairs_of_points(rng, 10):
            worst = max(worst, rmx.preresolvent_kernel_check(spec, lam, om).residual)
        pts = _upper(rng, 8, im=(0.3, 2.0))
        nneg[name] = nv.negative_squares(nv.preresolvent_matrix_kernel(spec), pts).n_neg
    ok = worst <= 1e-6 and all(v == 0 for v in nneg.values())
    detail = f"N^A vs T^* T residual {worst:.2e} <= 1e-6; sampled n_neg {nneg}"
    return report(7, "preresolvent kernel and its inertia", ok, detail, time.perf_counter() - t0)


def criterion_8():
    t0 = time.perf_counter()
    rng = _rng(8)
    worst = 0.0
    bad = 0
    evaluated = 0
    for spec in SYSTEMS.values():
        for _ in range(20):
            pair = nv.random_selfadjoint_pair(rng, 2)
            for lam in _upper(rng, 10, im=(0.1, 2.0), re=(-3, 3)):
                vals = [nv.l_resolvent_left(spec, lam, pair), nv.l_resolvent_direct(spec, lam, pair), nv.l_resolvent_pair_AB(spec, lam, pair)]
                scale = max(1.0, mc.max_abs(vals[0]))
                worst = max(worst, *(mc.max_abs(a - b) / scale for a in vals for b in vals))
                evaluated += 1
            rep = nv.check_nevanlinna(nv.l_resolvent_function(spec, pair), _upper(rng, 5, im=(0.3, 2.0)))
            bad += not rep.passes()
    ok = worst <= 1e-8 and bad == 0
    detail = f"{evaluated} evaluations, pairwise route difference {worst:.2e} <= 1e-8; {bad} of 40 r fail check_nevanlinna"
    return report(8, "three-route L-resolvent agreement", ok, detail, time.perf_counter() - t0)


def _criterion_9_data():
    rng = _rng(9)
    ode = minus = plus = 0.0
    for _ in range(10):
        pair = nv.random_selfadjoint_pair(rng, 2)
        lam = _both(rng, 1)[0]
        h = bt.random_grid_function(rng, 2, RS.length)
        el = bt.generalized_resolvent_apply(RS, lam, pair, h)
        g0, g1 = bt.boundary_maps(el)
        scale = max(1.0, mc.max_abs(g0), mc.max_abs(g1))
        ode = max(ode, el.residual())
        minus = max(minus, mc.max_abs(pair.C @ g0 - pair.D @ g1) / scale)
        plus = max(plus, mc.max_abs(pair.C @ g0 + pair.D @ g1) / scale)
    return ode, minus, plus


_C9 = {}


def criterion_9():
    t0 = time.perf_counter()
    ode, minus, plus = _criterion_9_data()
    _C9.update(ode=ode, minus=minus, plus=plus)
    ok = ode <= 1e-6 and minus <= 1e-7
    detail = (
        f"ODE residual {ode:.2e} <= 1e-6; C G0 - D G1 = {minus:.2e} (> 1e-7, sign defect, see ledger); "
        f"C G0 + D G1 = {plus:.2e}"
    )
    return report(9, "boundary-value characterization (RS, 10 pairs)", ok, detail, time.perf_counter() - t0, limit=20.0)


def criterion_10():
    t0 = time.perf_counter()
    rng = _rng(10)
    worst = 0.0
    t = np.array([0.0])
    for spec in SYSTEMS.values():
        reg = bt.regularizer_on_gauge_matrix(spec)(t)[0]
        for lam in _both(rng, 20, im=(0.05, 2.0), re=(-3, 3)):
            a22 = rmx.preresolvent(spec, lam).a22
            gauge = 2.0 * (bt.resolvent_on_gauge_matrix(spec, lam)(t)[0] - reg)
            worst = max(worst, mc.max_abs(a22 - gauge) / max(1.0, mc.max_abs(a22)))
    ok = worst <= 1e-8
    return report(10, "a22 closed form vs gauge evaluation (FS, RS)", ok, f"max residual {worst:.2e} <= 1e-8", time.perf_counter() - t0)


def criterion_11():
    t0 = time.perf_counter()
    rng = _rng(11)
    sq = nv.negative_squares(nv.nevanlinna_kernel(lambda z: np.array([[z**2]])), [1j, 2j, 1 + 1j]).n_neg
    pts = _upper(rng, 5, im=(0.3, 2.0)) + [np.conj(z) for z in _upper(rng, 5, im=(0.3, 2.0))]
    fs_counts = {
        "weyl": nv.negative_squares(nv.weyl_kernel(FS), pts).n_neg,
        "resolvent": nv.negative_squares(nv.resolvent_matrix_kernel(FS), pts).n_neg,
        "preresolvent": nv.negative_squares(nv.preresolvent_matrix_kernel(FS), pts).n_neg,
        "l_resolvent": nv.negative_squares(
            nv.nevanlinna_kernel(nv.l_resolvent_function(FS, nv.random_selfadjoint_pair(rng, 2))), pts
        ).n_neg,
    }
    ok = sq == 1 and all(v == 0 for v in fs_counts.values())
    detail = f"lam^2 kernel n_neg = {sq} (expected 1); FS kernels on 10 points n_neg = {fs_counts}"
    return report(11, "negative-squares oracle", ok, detail, time.perf_counter() - t0)


def criterion_12():
    t0 = time.perf_counter()
    runs = []
    for spec in SYSTEMS.values():
        a = verify.run_suite(spec, seed=42)
        b = verify.run_suite(spec, seed=42)
        same = [(r.name, r.residual, r.passed) for r in a.records] == [(r.name, r.residual, r.passed) for r in b.records]
        runs.append((a.passed and b.passed, same))
    elapsed = time.perf_counter() - t0
    ok = all(p and s for p, s in runs)
    detail = f"suites pass {[p for p, _ in runs]}, repeat runs identical {[s for _, s in runs]} (4 runs)"
    return report(12, "verify suite deterministic under fixed seed", ok, detail, elapsed, limit=60.0)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11, criterion_12]


# ---------------------------------------------------------------- pytest entry points


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6, 7, 8, 10, 11, 12])
def test_criterion(n):
    assert CRITERIA[n - 1]()


@pytest.mark.xfail(strict=True, reason="the stated condition C G0 - D G1 = 0 contradicts the Krein formula; see ledger")
def test_criterion_9_as_stated():
    assert criterion_9()


def test_criterion_9_consistent_boundary_condition():
    if not _C9:
        _C9.update(zip(("ode", "minus", "plus"), _criterion_9_data()))
    assert _C9["ode"] <= 1e-6
    assert _C9["plus"] <= 1e-7


def test_criterion_9_reference_pairs_satisfy_both_signs():
    # (I, 0) and (0, I) cannot tell the two sign conventions apart
    rng = _rng(99)
    h = bt.random_grid_function(rng, 2, RS.length)
    for C, D in ((np.eye(2), np.zeros((2, 2))), (np.zeros((2, 2)), np.eye(2))):
        g0, g1 = bt.boundary_maps(bt.generalized_resolvent_apply(RS, 0.5j, (C, D), h))
        assert mc.max_abs(C @ g0 - D @ g1) < 1e-7
        assert mc.max_abs(C @ g0 + D @ g1) < 1e-7


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    sys.exit(0 if all(results) else 1)
