"""Parameter pairs and families, negative squares, and L-resolvent routes.

An L-resolvent is parametrized by a pair ``(C, D)`` (boundary condition
``C Gamma_0 + D Gamma_1 = 0``; equivalently the family ``tau = ker [C, -D]``).
Four routes compute the same value ``r(lam)``:

* :func:`l_resolvent_left` -- linear-fractional action of the left matrix,
* :func:`l_resolvent_direct` -- preresolvent blocks, ``a22 - a21 (C + D a11)^{-1} D a12``,
* :func:`l_resolvent_from_AB` -- monodromy form with ``A = C + D J``, ``B = C - D J``,
* :func:`l_resolvent_gauge` -- compression of the generalized resolvent to the gauge.
"""

from dataclasses import dataclass

import numpy as np

from . import boundary_triple as bt
from . import matrix_core as mc
from . import resolvent_matrix as rmx
from .canonical_system import parse_matrix
from .errors import (
    ConditionViolated,
    ConfluentPoint,
    InvariantViolation,
    RankDeficient,
    SchemaError,
    SingularDenominator,
)

PAIR_TOL = 1e-10
SINGULAR_RTOL = 1e-12
CONDITION_A_TOL = 1e-9


def _as_callable(X):
    if callable(X):
        return lambda lam: mc.cmat(X(lam))
    M = mc.cmat(X)
    return lambda lam: M


class ParameterPair:
    """A pair ``(C, D)`` of ``p x p`` matrices or matrix functions of ``lam``."""

    def __init__(self, C, D, name=None):
        self.kind = "callable" if (callable(C) or callable(D)) else "constant"
        self._C = _as_callable(C)
        self._D = _as_callable(D)
        self.name = name
        if self.kind == "constant":
            self.C = self._C(0)
            self.D = self._D(0)
            if self.C.shape != self.D.shape or self.C.shape[0] != self.C.shape[1]:
                raise ValueError("C and D must be square and of equal size")

    def at(self, lam):
        return self._C(lam), self._D(lam)

    def AB(self, lam, J):
        """``(A, B) = (C + D J, C - D J)``."""
        C, D = self.at(lam)
        return C + D @ J, C - D @ J

    def symmetry_residual(self, lam=0.0):
        """``max|C D# - D C#|``; for constants this is ``max|C D^* - D C^*|``."""
        C, D = self.at(lam)
        Cs, Ds = mc.sharp(self._C, lam), mc.sharp(self._D, lam)
        return mc.max_abs(C @ Ds - D @ Cs)

    def validate(self, samples=(1j, -1j, 1 + 1j), tol=PAIR_TOL):
        """Raise :class:`InvariantViolation` unless the pair is symmetric with full row rank."""
        pts = [0.0] if self.kind == "constant" else list(samples)
        for lam in pts:
            C, D = self.at(lam)
            scale = max(1.0, mc.max_abs(C), mc.max_abs(D)) ** 2
            res = self.symmetry_residual(lam)
            if res > tol * scale:
                raise InvariantViolation("pair", f"C D# != D C# at lambda={lam} (residual {res:.3e})")
            if mc.numerical_rank(np.hstack([C, D]), tol) < C.shape[0]:
                raise InvariantViolation("pair", f"rank [C D] < p at lambda={lam}")
        return self

    def __repr__(self):
        return f"ParameterPair(kind={self.kind!r}, name={self.name!r})"


def random_selfadjoint_pair(rng, p):
    """Random constant pair ``C = X Q cos(T) Q^*``, ``D = X Q sin(T) Q^*``.

    Covers singular ``C`` or ``D``; ``C D^*`` is Hermitian and ``[C D]`` has rank ``p``
    whenever ``X`` is invertible.
    """
    X = rng.standard_normal((p, p)) + 1j * rng.standard_normal((p, p))
    Z = rng.standard_normal((p, p)) + 1j * rng.standard_normal((p, p))
    Q, _ = np.linalg.qr(Z)
    th = rng.uniform(0, np.pi, p)
    C = X @ Q @ np.diag(np.cos(th)) @ mc.adj(Q)
    D = X @ Q @ np.diag(np.sin(th)) @ mc.adj(Q)
    return ParameterPair(C, D)


def lambda_sq_pair(p):
    """``C(lam) = lam^2 I``, ``D = I``: the family ``psi = lam^2 I``, ``phi = I`` (one negative square)."""
    I = np.eye(p)
    return ParameterPair(lambda lam: lam**2 * I, I, name="lambda_sq")


def load_pair(document, p):
    """Pair file: ``{"kind": "constant", "C": ..., "D": ...}`` or
    ``{"kind": "builtin", "name": "lambda_sq" | "const_hermitian", "args": ...}``."""
    if not isinstance(document, dict) or "kind" not in document:
        raise SchemaError("pair document must be an object with a 'kind' key")
    kind = document["kind"]
    if kind == "constant":
        for key in ("C", "D"):
            if key not in document:
                raise SchemaError(f"pair: missing key {key!r}")
        pair = ParameterPair(parse_matrix(document["C"], p, p, "C"), parse_matrix(document["D"], p, p, "D"))
    elif kind == "builtin":
        name = document.get("name")
        if name == "lambda_sq":
            pair = lambda_sq_pair(p)
        elif name == "const_hermitian":
            args = document.get("args")
            if not isinstance(args, dict) or "M" not in args:
                raise SchemaError("const_hermitian needs args {'M': matrix}")
            M0 = parse_matrix(args["M"], p, p, "args.M")
            pair = ParameterPair(M0, np.eye(p), name="const_hermitian")
        else:
            raise SchemaError(f"unknown builtin pair {name!r}")
    else:
        raise SchemaError(f"unknown pair kind {kind!r}")
    return pair.validate()


# ---------------------------------------------------------------------------
# families


class FamilyRep:
    """Family ``tau(lam) = ran [phi(lam); psi(lam)]``."""

    def __init__(self, phi, psi):
        self._phi = _as_callable(phi)
        self._psi = _as_callable(psi)

    def at(self, lam):
        return self._phi(lam), self._psi(lam)

    def basis(self, lam):
        phi, psi = self.at(lam)
        return np.vstack([phi, psi])

    def matrix(self, lam):
        """``psi phi^{-1}`` where ``phi`` is invertible."""
        phi, psi = self.at(lam)
        return psi @ mc.inv(phi)

    def check(self, samples):
        for lam in samples:
            phi, psi = self.at(lam)
            if mc.numerical_rank(np.vstack([phi, psi]), PAIR_TOL) < phi.shape[1]:
                raise RankDeficient(f"ker phi and ker psi intersect at lambda={lam}")
        return self


def pair_from_family(rep, samples=(1j, -1j, 1 + 1j)):
    """``C = psi#``, ``D = phi#``."""
    rep.check(samples)
    C = lambda lam: mc.sharp(lambda z: rep.at(z)[1], lam)
    D = lambda lam: mc.sharp(lambda z: rep.at(z)[0], lam)
    pair = ParameterPair(C, D)
    for lam in samples:
        Cl, Dl = pair.at(lam)
        if mc.numerical_rank(np.hstack([Cl, Dl]), PAIR_TOL) < Cl.shape[0]:
            raise RankDeficient(f"rank [C D] < p at lambda={lam}")
    return pair


def family_from_pair(pair):
    """``phi = D#``, ``psi = C#``; spans ``ker [C, -D]`` when ``C D# = D C#``."""
    return FamilyRep(lambda lam: mc.sharp(pair._D, lam), lambda lam: mc.sharp(pair._C, lam))


def same_graph(X, Y, tol=1e-9):
    """True when the column spans of ``X`` and ``Y`` coincide."""
    r = mc.numerical_rank(X, tol)
    return r == mc.numerical_rank(Y, tol) == mc.numerical_rank(np.hstack([X, Y]), tol)


@dataclass(frozen=True)
class TransformedGraph:
    phi: np.ndarray
    psi: np.ndarray
    singular: bool

    def basis(self):
        return np.vstack([self.phi, self.psi])

    def matrix(self):
        if self.singular:
            raise SingularDenominator(None, 0.0, "w21 psi + w22 phi")
        return self.psi @ mc.inv(self.phi)


def _W_full(W):
    return W.full() if hasattr(W, "full") else np.asarray(W, dtype=complex)


def transform_graph(W, rep, lam):
    """Apply ``T_W`` to ``tau(lam)``: ``phi~ = w22 phi + w21 psi``, ``psi~ = w12 phi + w11 psi``.

    Equivalently ``[psi~; phi~] = W [psi; phi]``, so ``T_{W1} T_{W2} = T_{W1 W2}``.
    """
    X = _W_full(W)
    p = X.shape[0] // 2
    w11, w12, w21, w22 = X[:p, :p], X[:p, p:], X[p:, :p], X[p:, p:]
    phi, psi = rep.at(lam)
    new_phi = w22 @ phi + w21 @ psi
    new_psi = w12 @ phi + w11 @ psi
    scale = max(1.0, float(np.linalg.norm(np.vstack([new_phi, new_psi]), 2)))
    singular = mc.relative_smin(new_phi, scale) < SINGULAR_RTOL
    return TransformedGraph(new_phi, new_psi, singular)


def transformed_family(W_of_lam, rep):
    """The family ``lam -> T_{W(lam)}[tau(lam)]`` as a :class:`FamilyRep`."""

    def phi(lam):
        return transform_graph(W_of_lam(lam), rep, lam).phi

    def psi(lam):
        return transform_graph(W_of_lam(lam), rep, lam).psi

    return FamilyRep(phi, psi)


# ---------------------------------------------------------------------------
# kernels and negative squares


@dataclass(frozen=True)
class KernelSample:
    points: tuple
    gram: np.ndarray
    inertia: mc.Inertia

    @property
    def n_neg(self):
        return self.inertia.n_neg


def kernel_gram(kernel, points, vectors=None):
    """Block Gram ``G[k, j] = K_{w_j}(w_k)`` (or ``u_k^* K_{w_j}(w_k) u_j`` with vectors)."""
    pts = [complex(z) for z in points]
    for a in pts:
        for b in pts:
            if abs(a - np.conj(b)) < rmx.CONFLUENT_TOL:
                raise ConfluentPoint(f"points {a} and {b} are conjugate-coincident")
    blocks = [[mc.cmat(kernel(lk, wj)) for wj in pts] for lk in pts]
    if vectors is None:
        return np.block(blocks)
    u = [np.asarray(v, dtype=complex) for v in vectors]
    n = len(pts)
    G = np.empty((n, n), dtype=complex)
    for k in range(n):
        for j in range(n):
            G[k, j] = np.conj(u[k]) @ blocks[k][j] @ u[j]
    return G


def negative_squares(kernel, points, vectors=None, tol=mc.DEFAULT_INERTIA_TOL):
    """Sample a Hermitian kernel ``(lam, omega) -> K_omega(lam)`` and count negative squares.

    ``n_neg`` is a lower bound for the number of negative squares of the kernel.
    """
    G = kernel_gram(kernel, points, vectors)
    return KernelSample(tuple(complex(z) for z in points), G, mc.hermitian_inertia(G, tol))


def nevanlinna_kernel(r):
    """``N^r_omega(lam) = (r(lam) - r(omega)^*) / (lam - conj(omega))``."""

    def kernel(lam, omega):
        return (mc.cmat(r(lam)) - mc.adj(mc.cmat(r(omega)))) / (lam - np.conj(omega))

    return kernel


def family_kernel(rep):
    """``(phi(omega)^* psi(lam) - psi(omega)^* phi(lam)) / (lam - conj(omega))``."""

    def kernel(lam, omega):
        pl, sl = rep.at(lam)
        po, so = rep.at(omega)
        return (mc.adj(po) @ sl - mc.adj(so) @ pl) / (lam - np.conj(omega))

    return kernel


def weyl_kernel(spec):
    return nevanlinna_kernel(lambda z: bt.weyl_function(spec, z))


def resolvent_matrix_kernel(spec):
    return lambda lam, omega: rmx.resolvent_kernel(spec, lam, omega)


def preresolvent_matrix_kernel(spec):
    return lambda lam, omega: rmx.preresolvent_kernel(spec, lam, omega)


@dataclass(frozen=True)
class NevanlinnaReport:
    min_imag_eig: float
    symmetry_residual: float
    inertia: mc.Inertia

    @property
    def n_neg(self):
        return self.inertia.n_neg

    def passes(self, tol=1e-8):
        return self.min_imag_eig >= -tol and self.symmetry_residual <= tol and self.n_neg == 0


def check_nevanlinna(r, samples, tol=mc.DEFAULT_INERTIA_TOL):
    """Herglotz diagnostics of ``r`` on points of the upper half-plane."""
    samples = [complex(z) for z in samples]
    if any(z.imag <= 0 for z in samples):
        raise ValueError("samples must lie in the open upper half-plane")
    min_eig = np.inf
    sym = 0.0
    for z in samples:
        rz = mc.cmat(r(z))
        im = (rz - mc.adj(rz)) / 2j
        min_eig = min(min_eig, float(np.linalg.eigvalsh(im)[0]))
        sym = max(sym, mc.max_abs(mc.sharp(r, z) - rz))
    sample = negative_squares(nevanlinna_kernel(r), samples, tol=tol)
    return NevanlinnaReport(min_eig, sym, sample.inertia)


# ---------------------------------------------------------------------------
# L-resolvent routes


def _checked_solve(den, num, lam, what, scale):
    measure = mc.relative_smin(den, scale)
    if measure < SINGULAR_RTOL:
        raise SingularDenominator(complex(lam), measure, what)
    return mc.solve(den, num)


def l_resolvent_left(spec, lam, pair):
    """``(C w12 + D w22)^{-1} (C w11 + D w21)`` with the left L-resolvent matrix."""
    W = rmx.left_resolvent_matrix(spec, lam)
    C, D = bt._pair_at(pair, lam)
    den = C @ W.w12 + D @ W.w22
    num = C @ W.w11 + D @ W.w21
    scale = float(np.linalg.norm(np.hstack([C, D]), 2)) * float(np.linalg.norm(W.full(), 2))
    return _checked_solve(den, num, lam, "C w12 + D w22", scale)


def l_resolvent_direct(spec, lam, pair):
    """``a22 - a21 (C + D a11)^{-1} D a12``."""
    A = rmx.preresolvent(spec, lam)
    coef = bt.krein_coefficient(spec, lam, pair, A.a11)
    return A.a22 - A.a21 @ coef @ A.a12


def check_AB_conditions(A, B, J, A_sharp=None, B_sharp=None, tol=CONDITION_A_TOL):
    """Raise :class:`ConditionViolated` if (a), (b) or (c) fail at one point.

    (a) ``-i (A J A^* - B J B^*) >= 0``; (b) ``A J A# - B J B# = 0``;
    (c) ``rank [A B] = p``.  For constant pairs ``A# = A^*``.
    """
    A_sharp = mc.adj(A) if A_sharp is None else A_sharp
    B_sharp = mc.adj(B) if B_sharp is None else B_sharp
    scale = max(1.0, mc.max_abs(A), mc.max_abs(B)) ** 2
    P = -1j * (A @ J @ mc.adj(A) - B @ J @ mc.adj(B))
    ev = np.linalg.eigvalsh(0.5 * (P + mc.adj(P)))
    if ev[0] < -tol * scale:
        raise ConditionViolated("a", f"-i(AJA* - BJB*) has eigenvalue {ev[0]:.3e}")
    res = mc.max_abs(A @ J @ A_sharp - B @ J @ B_sharp)
    if res > PAIR_TOL * scale:
        raise ConditionViolated("b", f"A J A# - B J B# residual {res:.3e}")
    if mc.numerical_rank(np.hstack([A, B]), PAIR_TOL) < A.shape[0]:
        raise ConditionViolated("c", "rank [A B] < p")


def l_resolvent_from_AB(spec, lam, A, B, A_sharp=None, B_sharp=None):
    """``(A U + B)^{-1} (A U - B) J + K`` after checking the admissibility conditions.

    Condition (a) is a statement about the upper half-plane; it is checked
    at ``lam`` when ``Im lam > 0`` and at ``conj(lam)`` otherwise (through
    the sharp values when given).
    """
    from .canonical_system import monodromy

    A, B = mc.cmat(A), mc.cmat(B)
    J = spec.J
    if complex(lam).imag >= 0 or A_sharp is None:
        check_AB_conditions(A, B, J, A_sharp, B_sharp)
    else:
        check_AB_conditions(mc.adj(A_sharp), mc.adj(B_sharp), J, mc.adj(A), mc.adj(B))
    U = monodromy(spec, lam)
    den = A @ U + B
    num = (A @ U - B) @ J
    scale = float(np.linalg.norm(np.hstack([A, B]), 2)) * max(1.0, float(np.linalg.norm(U, 2)))
    return _checked_solve(den, num, lam, "A U + B", scale) + bt.K_matrix(spec)


def l_resolvent_pair_AB(spec, lam, pair):
    """:func:`l_resolvent_from_AB` under ``A = C + D J``, ``B = C - D J``."""
    A, B = pair.AB(lam, spec.J)
    As, Bs = (mc.adj(X) for X in pair.AB(np.conj(lam), spec.J))
    return l_resolvent_from_AB(spec, lam, A, B, As, Bs)


def l_resolvent_gauge(spec, lam, pair):
    """``L^<*> (R~_lam - regularizer) L`` evaluated through the gauge closed forms.

    With ``L u = sqrt2 delta (x) u`` and ``L^<*> f = sqrt2 f(0)`` the value is
    ``2 [(R~_lam - R)(delta (x) e_j)](0)`` column by column.
    """
    p = spec.p
    t0 = np.array([0.0])
    reg = bt.regularizer_on_gauge_matrix(spec)(t0)[0]
    cols = [bt.generalized_resolvent_on_gauge(spec, lam, pair, e)(t0)[0] for e in np.eye(p)]
    return 2.0 * (np.stack(cols, axis=1) - reg)


ROUTES = {
    "left": l_resolvent_left,
    "direct": l_resolvent_direct,
    "AB": l_resolvent_pair_AB,
    "gauge": l_resolvent_gauge,
}


def l_resolvent_function(spec, pair, route="left"):
    fn = ROUTES[route]
    return lambda lam: fn(spec, lam, pair)
