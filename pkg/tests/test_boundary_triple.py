import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lres import boundary_triple as bt
from lres import canonical_system as cs
from lres import matrix_core as mc
from lres import nevanlinna as nv
from lres.errors import SingularDenominator, SpectrumOfA0

TANH = np.tanh(np.pi / 2)
E1 = np.array([1.0, 0.0])


def _lam(rng, im=(0.2, 1.2)):
    z = complex(rng.uniform(-2, 2), rng.uniform(*im))
    return z if rng.random() < 0.5 else z.conjugate()


def _cvec(rng, p=2):
    return rng.standard_normal(p) + 1j * rng.standard_normal(p)


def _values_close(f, g, spec, tol):
    t = np.linspace(0, spec.length, 41)
    a, b = f(t), g(t)
    return mc.max_abs(a - b) <= tol * max(1.0, mc.max_abs(b))


# ---------------------------------------------------------------- boundary maps


def test_boundary_maps_free_eigenfunction(fs):
    lam = 0.5
    f = bt.GridFunction(lambda t: np.stack([np.cos(lam * t), -np.sin(lam * t)], axis=1), 2)
    elem = bt.AmaxElement(fs, f, lam * f)
    g0, g1 = bt.boundary_maps(elem)
    assert np.allclose(g0, np.array([1, -1]) / np.sqrt(2))
    assert np.allclose(g1, np.array([1, -1]) / np.sqrt(2))
    assert elem.residual() < 1e-7


def test_boundary_maps_vanish_on_minimal_elements(fs):
    f = bt.GridFunction(lambda t: np.stack([np.sin(t) ** 2, np.sin(2 * t)], axis=1), 2)
    g0, g1 = bt.boundary_maps(bt.AmaxElement(fs, f, f))
    assert mc.max_abs(g0) < 1e-15 and mc.max_abs(g1) < 1e-15


def test_boundary_maps_linear(rs, rng):
    a = bt.solve_inhomogeneous(rs, 0.3j, bt.random_grid_function(rng, 2, rs.length), _cvec(rng))
    b = bt.solve_inhomogeneous(rs, -0.4, bt.random_grid_function(rng, 2, rs.length), _cvec(rng))
    s, t = 2 - 1j, 0.5j
    lhs = bt.boundary_maps(s * a + t * b)
    ba, bb = bt.boundary_maps(a), bt.boundary_maps(b)
    for k in range(2):
        assert np.allclose(lhs[k], s * ba[k] + t * bb[k])


def test_green_identity(system, rng):
    rule = cs.quadrature_rule(system)
    for _ in range(4):
        a, b = (
            bt.solve_inhomogeneous(system, _lam(rng), bt.random_grid_function(rng, 2, system.length), _cvec(rng))
            for _ in range(2)
        )
        lhs = bt.inner(system, a.g, b.f, rule) - bt.inner(system, a.f, b.g, rule)
        a0, a1 = bt.boundary_maps(a)
        b0, b1 = bt.boundary_maps(b)
        rhs = np.vdot(b0, a1) - np.vdot(b1, a0)
        assert abs(lhs - rhs) <= 1e-6 * max(1.0, abs(rhs))


def test_solve_inhomogeneous_residual(rs, rng):
    el = bt.solve_inhomogeneous(rs, 0.8 - 0.5j, bt.random_grid_function(rng, 2, rs.length), _cvec(rng))
    assert el.residual() < 1e-7


# ---------------------------------------------------------------- Weyl function


def test_weyl_free_examples(fs):
    assert np.allclose(bt.weyl_function(fs, 0.5), np.eye(2), atol=1e-14)
    assert np.allclose(bt.weyl_function(fs, 1j), 1j * TANH * np.eye(2), atol=1e-12)
    with pytest.raises(SpectrumOfA0):
        bt.weyl_function(fs, 1.0)


def test_spectrum_error_is_structured(fs):
    with pytest.raises(SpectrumOfA0) as info:
        bt.weyl(fs, 3.0)
    rec = info.value.record()
    assert rec["error"] == "SpectrumOfA0"


@settings(max_examples=25, deadline=None)
@given(st.floats(-3, 3), st.floats(0.05, 2.0))
def test_weyl_symmetric_and_herglotz(x, y):
    spec = cs.random_system(7)
    lam = complex(x, y)
    M = bt.weyl_function(spec, lam)
    assert mc.max_abs(mc.adj(bt.weyl_function(spec, np.conj(lam))) - M) <= 1e-9 * max(1, mc.max_abs(M))
    assert np.linalg.eigvalsh((M - mc.adj(M)) / 2j)[0] >= -1e-9


def test_K_hermitian_and_zero_for_free(fs, rs):
    assert mc.max_abs(bt.K_matrix(fs)) < 1e-12
    K = bt.K_matrix(rs)
    assert np.allclose(K, mc.adj(K))


def test_weyl_kernel_is_gamma_gram(system, rng):
    rule = cs.quadrature_rule(system)
    for _ in range(8):
        lam, om = _lam(rng), _lam(rng)
        N = (bt.weyl_function(system, lam) - mc.adj(bt.weyl_function(system, om))) / (lam - np.conj(om))
        gl = bt.weyl(system, lam).gamma_rep(rule.nodes)
        go = bt.weyl(system, om).gamma_rep(rule.nodes)
        G = np.einsum("n,nji,njk,nkl->il", rule.weights, go.conj(), rule.H, gl)
        assert mc.max_abs(N - G) <= 1e-6 * max(1, mc.max_abs(N))


def test_gamma_values_are_defect_elements(rs, rng):
    wd = bt.weyl(rs, 0.4 + 0.6j)
    u = _cvec(rng)
    f = wd.gamma(u)
    elem = bt.AmaxElement(rs, f, wd.lam * f)
    g0, g1 = bt.boundary_maps(elem)
    assert elem.residual() < 1e-7
    assert np.allclose(g0, u)
    assert np.allclose(g1, wd.M @ u)


def test_gamma_continuation(rs, rng):
    z, zeta = 0.3 + 0.5j, -0.6 + 0.9j
    u = _cvec(rng)
    lhs = bt.weyl(rs, z).gamma(u)
    g = bt.weyl(rs, zeta).gamma(u)
    rhs = g + (z - zeta) * bt.canonical_resolvent_apply(rs, z, g).f
    assert _values_close(rhs, lhs, rs, 1e-6)


# ---------------------------------------------------------------- gamma adjoint


def test_gamma_adjoint_free_closed_form(fs):
    f = bt.weyl(fs, 1j).gamma(E1)
    got = bt.gamma_adjoint_apply(fs, -1j, f)
    assert np.allclose(got, TANH * E1, atol=1e-10)


def test_gamma_adjoint_zero(fs):
    assert np.allclose(bt.gamma_adjoint_apply(fs, 1j, bt.GridFunction.zero(2)), 0)


def test_gamma_adjoint_duality(system, rng):
    rule = cs.quadrature_rule(system)
    for _ in range(10):
        lam = _lam(rng)
        f = bt.random_grid_function(rng, 2, system.length)
        u = _cvec(rng)
        lhs = np.vdot(u, bt.gamma_adjoint_apply(system, lam, f, rule))
        rhs = bt.inner(system, f, bt.weyl(system, np.conj(lam)).gamma(u), rule)
        assert abs(lhs - rhs) <= 1e-6 * max(1, abs(rhs))


# ---------------------------------------------------------------- resolvents


def test_canonical_resolvent_defining_property(system, rng):
    lam = _lam(rng)
    el = bt.canonical_resolvent_apply(system, lam, bt.random_grid_function(rng, 2, system.length))
    assert el.residual() < 1e-6
    g0, _ = bt.boundary_maps(el)
    assert mc.max_abs(g0) < 1e-7


def test_canonical_resolvent_of_zero(fs):
    el = bt.canonical_resolvent_apply(fs, 1j, bt.GridFunction.zero(2))
    assert mc.max_abs(el.f(np.linspace(0, np.pi, 7))) == 0


def test_resolvent_identity(rs, rng):
    lam, mu = 0.4 + 0.7j, -0.8 + 0.3j
    h = bt.random_grid_function(rng, 2, rs.length)
    a = bt.canonical_resolvent_apply(rs, lam, h).f
    b = bt.canonical_resolvent_apply(rs, mu, h).f
    c = bt.canonical_resolvent_apply(rs, lam, b).f
    assert _values_close(a - b, (lam - mu) * c, rs, 1e-6)


def test_resolvent_on_gauge_free_values(fs):
    J = fs.J
    v = bt.resolvent_on_gauge(fs, 1j, E1)(np.array([0.0]))[0]
    assert np.allclose(v, 0.5 * (-J + 1j * TANH * np.eye(2)) @ E1)
    r = bt.regularizer_on_gauge(fs, E1)(np.array([0.0]))[0]
    assert np.allclose(r, -0.5 * J @ E1)
    assert np.allclose(bt.regularizer_on_gauge(fs, np.zeros(2))(np.array([0.3])), 0)


def test_resolvent_on_gauge_is_homogeneous_solution(rs):
    lam = 0.5 + 0.5j
    f = bt.resolvent_on_gauge(rs, lam, np.array([1.0, 2j]))
    assert bt.AmaxElement(rs, f, lam * f).residual() < 1e-8


def test_a22_through_gauge(system, rng):
    from lres import resolvent_matrix as rmx

    t0 = np.array([0.0])
    reg = bt.regularizer_on_gauge_matrix(system)(t0)[0]
    assert np.allclose(-2 * reg - system.J, bt.K_matrix(system), atol=1e-10)
    for _ in range(10):
        lam = _lam(rng)
        gauge = 2 * (bt.resolvent_on_gauge_matrix(system, lam)(t0)[0] - reg)
        a22 = rmx.preresolvent(system, lam).a22
        assert mc.max_abs(gauge - a22) <= 1e-8 * max(1, mc.max_abs(a22))


def test_generalized_resolvent_dirichlet_pair_is_R0(rs, rng):
    h = bt.random_grid_function(rng, 2, rs.length)
    lam = 0.2 + 0.9j
    a = bt.generalized_resolvent_apply(rs, lam, (np.eye(2), np.zeros((2, 2))), h).f
    b = bt.canonical_resolvent_apply(rs, lam, h).f
    assert _values_close(a, b, rs, 1e-14)


def test_generalized_resolvent_gamma1_pair(rs, rng):
    el = bt.generalized_resolvent_apply(rs, 0.6j, (np.zeros((2, 2)), np.eye(2)), bt.random_grid_function(rng, 2, rs.length))
    _, g1 = bt.boundary_maps(el)
    assert mc.max_abs(g1) < 1e-7
    assert el.residual() < 1e-6


def test_generalized_resolvent_random_pairs(rs, rng):
    for _ in range(5):
        pair = nv.random_selfadjoint_pair(rng, 2)
        lam = _lam(rng)
        el = bt.generalized_resolvent_apply(rs, lam, pair, bt.random_grid_function(rng, 2, rs.length))
        g0, g1 = bt.boundary_maps(el)
        assert el.residual() < 1e-6
        assert mc.max_abs(pair.C @ g0 + pair.D @ g1) < 1e-7 * max(1, mc.max_abs(g0), mc.max_abs(g1))


def test_generalized_resolvent_is_selfadjoint_in_lambda(rs, rng):
    # <R_lam h, k> = <h, R_{conj lam} k> for a selfadjoint boundary condition
    pair = nv.random_selfadjoint_pair(rng, 2)
    lam = 0.3 + 0.4j
    h, k = (bt.random_grid_function(rng, 2, rs.length) for _ in range(2))
    lhs = bt.inner(rs, bt.generalized_resolvent_apply(rs, lam, pair, h).f, k)
    rhs = bt.inner(rs, h, bt.generalized_resolvent_apply(rs, np.conj(lam), pair, k).f)
    assert abs(lhs - rhs) <= 1e-8 * max(1, abs(rhs))


def test_generalized_resolvent_singular_denominator(fs):
    # (C, D) = (0, I) hits cot(lam pi / 2) poles: lam = 2 makes M(2) = 0
    with pytest.raises(SingularDenominator):
        bt.krein_coefficient(fs, 2.0, (np.zeros((2, 2)), np.eye(2)))
