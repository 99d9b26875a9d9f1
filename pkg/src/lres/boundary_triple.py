"""Boundary triple of the maximal relation of a canonical system.

Boundary maps ``Gamma_0 = (f(0) + f(l)) / sqrt2``, ``Gamma_1 = -J (f(0) - f(l)) / sqrt2``,
the Weyl function ``M = -J (I - U)(I + U)^{-1}``, the gamma-field, the resolvent of
``A_0 = ker Gamma_0``, and Krein-type generalized resolvents.

Functions on ``[0, l]`` are :class:`GridFunction` objects: vectorized callables
``t -> (len(t), p)`` arrays.  They are evaluated wherever a quadrature needs
them, so partial integrals ``int_0^t`` stay spectrally accurate.

Elements ``delta (x) u`` of the gauge (point evaluation at ``t = 0``) are never
built; every operator applied to them is used through its closed form.
"""

import threading
from dataclasses import dataclass

import numpy as np

from . import canonical_system as cs
from . import matrix_core as mc
from .errors import SingularDenominator, SpectrumOfA0

SQRT2 = np.sqrt(2.0)
SINGULAR_RTOL = 1e-12
FD_STEP = 1e-3


class GridFunction:
    """A ``C^p``-valued function on ``[0, l]`` given by a vectorized callable."""

    def __init__(self, fn, p):
        self.fn = fn
        self.p = p

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        vals = np.asarray(self.fn(t.ravel()), dtype=complex)
        return vals.reshape(t.shape + (self.p,))

    def __add__(self, other):
        return GridFunction(lambda t: self(t) + other(t), self.p)

    def __sub__(self, other):
        return GridFunction(lambda t: self(t) - other(t), self.p)

    def __mul__(self, c):
        return GridFunction(lambda t: c * self(t), self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    @classmethod
    def zero(cls, p):
        return cls(lambda t: np.zeros((len(t), p), dtype=complex), p)

    @classmethod
    def from_matrix_function(cls, Fn, u):
        """``t -> Fn(t) @ u`` for a matrix-valued ``Fn`` of shape ``(N, p, p)``."""
        u = np.asarray(u, dtype=complex)
        return cls(lambda t: Fn(t) @ u, len(u))


def random_grid_function(rng, p, length, terms=3):
    """Smooth random test function: complex trigonometric polynomial."""
    coef = rng.standard_normal((terms, p)) + 1j * rng.standard_normal((terms, p))
    freq = np.arange(terms) * np.pi / length
    phase = rng.uniform(0, 2 * np.pi, (terms, p))

    def fn(t):
        return np.einsum("kp,nkp->np", coef, np.cos(freq[None, :, None] * t[:, None, None] + phase[None]))

    return GridFunction(fn, p)


@dataclass(frozen=True)
class AmaxElement:
    """A pair ``(f, g)`` with ``J f' + F f = H g``."""

    spec: object
    f: GridFunction
    g: GridFunction

    def __add__(self, other):
        return AmaxElement(self.spec, self.f + other.f, self.g + other.g)

    def __mul__(self, c):
        return AmaxElement(self.spec, self.f * c, self.g * c)

    __rmul__ = __mul__

    def residual(self, rule=None):
        return ode_residual(self.spec, self, rule)


def inner(spec, f, g, rule=None):
    """``<f, g>_H = int_0^l g(s)^* H(s) f(s) ds``."""
    rule = rule or cs.quadrature_rule(spec)
    return np.einsum("n,ni,nij,nj->", rule.weights, g(rule.nodes).conj(), rule.H, f(rule.nodes))


def boundary_maps(elem):
    """``(Gamma_0, Gamma_1)`` of an element of the maximal relation."""
    spec = elem.spec
    ends = elem.f(np.array([0.0, spec.length]))
    f0, fl = ends[0], ends[1]
    return (f0 + fl) / SQRT2, -spec.J @ (f0 - fl) / SQRT2


def ode_residual(spec, elem, rule=None):
    """``max |J f' + F f - H g|`` at the quadrature nodes, relative to ``max(1, |f|, |g|)``.

    ``f'`` comes from a fourth-order central difference kept inside the
    segment of each node; it does not reuse how ``f`` was built.
    """
    rule = rule or cs.quadrature_rule(spec)
    t = rule.nodes
    bps = spec.breakpoints
    seg = rule.segment
    room = np.minimum(t - bps[seg], bps[seg + 1] - t)
    h = np.minimum(FD_STEP, 0.45 * room)
    stencil = np.stack([t - 2 * h, t - h, t + h, t + 2 * h])
    vals = elem.f(stencil)
    df = (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * h[:, None])
    fv = elem.f(t)
    gv = elem.g(t)
    res = np.einsum("ij,nj->ni", spec.J, df) + np.einsum("nij,nj->ni", spec.F_at(t), fv)
    res -= np.einsum("nij,nj->ni", rule.H, gv)
    scale = max(1.0, mc.max_abs(fv), mc.max_abs(gv))
    return mc.max_abs(res) / scale


def _cumulative(spec, lam, h, t, n=cs.DEFAULT_NODES):
    """``int_0^t U#(s, lam) H(s) h(s) ds`` for every ``t``; shape ``(len(t), p)``."""
    nodes, weights = cs.partial_nodes(spec, t, n)
    Us = cs.evaluate_U_sharp(spec, lam, nodes)
    Hs = spec.H_at(nodes)
    hv = h(nodes)
    return np.einsum("km,kmij,kmjl,kml->ki", weights, Us, Hs, hv)


def solve_inhomogeneous(spec, lam, h, f0, n=cs.DEFAULT_NODES):
    """The element ``(f, h + lam f)`` where ``J f' + F f = lam H f + H h`` and ``f(0) = f0``.

    Variation of constants: ``f(t) = U(t, lam) [f0 - J int_0^t U#(s, lam) H h ds]``.
    """
    f0 = np.asarray(f0, dtype=complex)
    J = spec.J

    def fn(t):
        U = cs.evaluate_U(spec, lam, t)
        c = f0[None, :] - _cumulative(spec, lam, h, t, n) @ J.T
        return np.einsum("nij,nj->ni", U, c)

    f = GridFunction(fn, spec.p)
    return AmaxElement(spec, f, h + lam * f)


# ---------------------------------------------------------------------------
# Weyl function and gamma-field


def _inv_I_plus_U(spec, lam, U=None):
    U = cs.monodromy(spec, lam) if U is None else U
    I = np.eye(spec.p)
    scale = max(1.0, float(np.linalg.norm(U, 2)))
    measure = mc.relative_smin(I + U, scale)
    if measure < SINGULAR_RTOL:
        raise SpectrumOfA0(complex(lam), measure)
    return mc.inv(I + U)


def weyl_function(spec, lam):
    """``M(lam) = -J (I - U(lam)) (I + U(lam))^{-1}``."""
    U = cs.monodromy(spec, lam)
    I = np.eye(spec.p)
    return -spec.J @ (I - U) @ _inv_I_plus_U(spec, lam, U)


_K_cache = {}
_K_lock = threading.Lock()


def K_matrix(spec):
    """``K = J Re M(i) J`` with ``Re X = (X + X^*) / 2``; cached per spec."""
    K = _K_cache.get(spec.key)
    if K is None:
        Mi = weyl_function(spec, 1j)
        K = spec.J @ (0.5 * (Mi + mc.adj(Mi))) @ spec.J
        K.setflags(write=False)
        with _K_lock:
            _K_cache[spec.key] = K
    return K


@dataclass(frozen=True)
class WeylData:
    spec: object
    lam: complex
    M: np.ndarray
    U: np.ndarray
    inv_I_plus_U: np.ndarray
    K: np.ndarray

    def gamma_rep(self, t):
        """``gamma(lam)(t) = sqrt2 U(t, lam) (I + U(lam))^{-1}``, shape ``(N, p, p)``."""
        return SQRT2 * cs.evaluate_U(self.spec, self.lam, t) @ self.inv_I_plus_U

    def gamma(self, u):
        """The defect function ``gamma(lam) u``."""
        return GridFunction.from_matrix_function(self.gamma_rep, u)


def weyl(spec, lam):
    lam = complex(lam)
    U = cs.monodromy(spec, lam)
    inv = _inv_I_plus_U(spec, lam, U)
    M = -spec.J @ (np.eye(spec.p) - U) @ inv
    return WeylData(spec, lam, M, U, inv, K_matrix(spec))


def gamma_adjoint_apply(spec, lam, f, rule=None):
    """``gamma(conj(lam))^* f = sqrt2 (I + U#(lam))^{-1} int_0^l U#(s, lam) H(s) f(s) ds``."""
    rule = rule or cs.quadrature_rule(spec)
    Us = cs.evaluate_U_sharp(spec, lam, rule.nodes)
    integral = np.einsum("n,nij,njk,nk->i", rule.weights, Us, rule.H, f(rule.nodes))
    inv_sharp = mc.adj(_inv_I_plus_U(spec, np.conj(lam)))
    return SQRT2 * inv_sharp @ integral


# ---------------------------------------------------------------------------
# resolvents


def canonical_resolvent_apply(spec, lam, h, n=cs.DEFAULT_NODES):
    """``R0_lam h`` for ``A_0 = ker Gamma_0``, packaged as ``(f, h + lam f)``.

    ``f(t) = 1/2 U(t, lam) int_0^l {sgn(s - t) J - J M J} U#(s, lam) H(s) h(s) ds``,
    with the ``sgn`` split done as the two partial integrals over ``[0, t]`` and ``[t, l]``.
    """
    lam = complex(lam)
    J = spec.J
    M = weyl_function(spec, lam)
    JMJ = J @ M @ J
    total = _cumulative(spec, lam, h, np.array([spec.length]), n)[0]

    def fn(t):
        U = cs.evaluate_U(spec, lam, t)
        left = _cumulative(spec, lam, h, t, n)
        right = total[None, :] - left
        c = (right - left) @ J.T - (JMJ @ total)[None, :]
        return 0.5 * np.einsum("nij,nj->ni", U, c)

    f = GridFunction(fn, spec.p)
    return AmaxElement(spec, f, h + lam * f)


def resolvent_on_gauge_matrix(spec, lam):
    """Matrix function ``t -> 1/2 U(t, lam) (-J - J M(lam) J)``."""
    J = spec.J
    coeff = 0.5 * (-J - J @ weyl_function(spec, lam) @ J)
    return lambda t: cs.evaluate_U(spec, lam, t) @ coeff


def resolvent_on_gauge(spec, lam, u):
    """The extended resolvent of ``A_0`` applied to ``delta (x) u``."""
    return GridFunction.from_matrix_function(resolvent_on_gauge_matrix(spec, lam), u)


def regularizer_on_gauge_matrix(spec):
    plus = resolvent_on_gauge_matrix(spec, 1j)
    minus = resolvent_on_gauge_matrix(spec, -1j)
    return lambda t: 0.5 * (plus(t) + minus(t))


def regularizer_on_gauge(spec, u):
    """``1/2 (R0_i + R0_{-i})`` applied to ``delta (x) u``."""
    return GridFunction.from_matrix_function(regularizer_on_gauge_matrix(spec), u)


def _pair_at(pair, lam):
    if hasattr(pair, "at"):
        return pair.at(lam)
    C, D = pair
    return mc.cmat(C), mc.cmat(D)


def krein_coefficient(spec, lam, pair, M=None):
    """``(C + D M)^{-1} D`` at ``lam``; raises :class:`SingularDenominator`."""
    C, D = _pair_at(pair, lam)
    M = weyl_function(spec, lam) if M is None else M
    den = C + D @ M
    scale = max(1.0, float(np.linalg.norm(np.hstack([C, D]), 2)) * max(1.0, float(np.linalg.norm(M, 2))))
    measure = mc.relative_smin(den, scale)
    if measure < SINGULAR_RTOL:
        raise SingularDenominator(complex(lam), measure, "C + D M")
    return mc.solve(den, D)


def generalized_resolvent_apply(spec, lam, pair, h, n=cs.DEFAULT_NODES):
    """``R_lam h = R0_lam h - gamma(lam) (C + D M)^{-1} D gamma(conj(lam))^* h``.

    The solution satisfies ``J f' + F f = lam H f + H h`` together with the
    boundary condition ``C Gamma_0 + D Gamma_1 = 0``.
    """
    lam = complex(lam)
    wd = weyl(spec, lam)
    coef = krein_coefficient(spec, lam, pair, wd.M)
    rule = cs.quadrature_rule(spec, n)
    v = coef @ gamma_adjoint_apply(spec, lam, h, rule)
    f = canonical_resolvent_apply(spec, lam, h, n).f - wd.gamma(v)
    return AmaxElement(spec, f, h + lam * f)


def generalized_resolvent_on_gauge(spec, lam, pair, u):
    """Extended generalized resolvent applied to ``delta (x) u``.

    Uses ``gamma(conj(lam))^<*> (delta (x) u) = sqrt2 (I + U#(lam))^{-1} u``.
    """
    lam = complex(lam)
    wd = weyl(spec, lam)
    coef = krein_coefficient(spec, lam, pair, wd.M)
    inv_sharp = mc.adj(_inv_I_plus_U(spec, np.conj(lam)))
    v = coef @ (SQRT2 * inv_sharp @ np.asarray(u, dtype=complex))
    return resolvent_on_gauge(spec, lam, u) - wd.gamma(v)
