"""Preresolvent matrix, left/right L-resolvent matrices and their kernels.

The gauge is ``L u = sqrt2 delta (x) u`` (point evaluation at ``t = 0``).
Block formulas (``U = U(l, lam)``, ``K = J Re M(i) J``)::

    a11 = M,  a12 = 2 (I + U#)^{-1},  a21 = 2 (I + U)^{-1},  a22 = -J M J + K

    W_left = 1/2 [[(U - I) J + (U + I) K,      U + I    ],
                  [J (U + I) J + J (U - I) K,  J (U - I)]]

and the right matrix is ``W(lam) = W_left(conj(lam))^*``.  The left matrix
needs no inversion, so it is defined for every ``lam``.
"""

from dataclasses import dataclass

import numpy as np

from . import boundary_triple as bt
from . import canonical_system as cs
from . import matrix_core as mc
from .errors import ConfluentPoint

SQRT2 = bt.SQRT2
CONFLUENT_TOL = 1e-10


def K_matrix(spec):
    """``K = J Re M(i) J`` (cached per spec)."""
    return bt.K_matrix(spec).copy()


def _blocks(X, p):
    return X[:p, :p], X[:p, p:], X[p:, :p], X[p:, p:]


@dataclass(frozen=True)
class PreresolventMatrix:
    lam: complex
    a11: np.ndarray
    a12: np.ndarray
    a21: np.ndarray
    a22: np.ndarray

    def full(self):
        return np.block([[self.a11, self.a12], [self.a21, self.a22]])


@dataclass(frozen=True)
class ResolventMatrixW:
    lam: complex
    side: str
    w11: np.ndarray
    w12: np.ndarray
    w21: np.ndarray
    w22: np.ndarray

    @property
    def p(self):
        return self.w11.shape[0]

    def full(self):
        return np.block([[self.w11, self.w12], [self.w21, self.w22]])

    @classmethod
    def from_full(cls, lam, side, X):
        p = X.shape[0] // 2
        return cls(complex(lam), side, *(b.copy() for b in _blocks(X, p)))

    @property
    def J_p(self):
        return mc.J_p(self.p)


def preresolvent(spec, lam):
    lam = complex(lam)
    J = spec.J
    wd = bt.weyl(spec, lam)
    a21 = 2.0 * wd.inv_I_plus_U
    a12 = 2.0 * mc.adj(bt._inv_I_plus_U(spec, np.conj(lam)))
    a22 = -J @ wd.M @ J + wd.K
    return PreresolventMatrix(lam, wd.M, a12, a21, a22)


def left_resolvent_matrix(spec, lam):
    lam = complex(lam)
    J = spec.J
    U = cs.monodromy(spec, lam)
    I = np.eye(spec.p)
    K = bt.K_matrix(spec)
    w11 = 0.5 * ((U - I) @ J + (U + I) @ K)
    w12 = 0.5 * (U + I)
    w21 = 0.5 * (J @ (U + I) @ J + J @ (U - I) @ K)
    w22 = 0.5 * J @ (U - I)
    return ResolventMatrixW(lam, "left", w11, w12, w21, w22)


def left_resolvent_matrix_from_preresolvent(spec, lam):
    """Left matrix assembled from the preresolvent blocks (cross-check route)."""
    A = preresolvent(spec, lam)
    inv21 = mc.inv(A.a21)
    w11 = inv21 @ A.a22
    w12 = inv21
    w21 = A.a11 @ inv21 @ A.a22 - A.a12
    w22 = A.a11 @ inv21
    return ResolventMatrixW(complex(lam), "left", w11, w12, w21, w22)


def right_resolvent_matrix(spec, lam, route="sharp"):
    """Right L-resolvent matrix.

    ``route="sharp"`` (default) takes ``W_left(conj(lam))^*``;
    ``route="preresolvent"`` assembles it from the ``a_ij`` blocks and raises
    :class:`~lres.errors.SpectrumOfA0` on the spectrum of ``A_0``.
    """
    lam = complex(lam)
    if route == "sharp":
        Wl = left_resolvent_matrix(spec, np.conj(lam))
        return ResolventMatrixW.from_full(lam, "right", mc.adj(Wl.full()))
    if route != "preresolvent":
        raise ValueError(f"unknown route {route!r}")
    A = preresolvent(spec, lam)
    inv12 = mc.inv(A.a12)
    w11 = A.a22 @ inv12
    w12 = A.a22 @ inv12 @ A.a11 - A.a21
    w21 = inv12
    w22 = inv12 @ A.a11
    return ResolventMatrixW(lam, "right", w11, w12, w21, w22)


def resolvent_matrix(spec, lam, side="right"):
    if side == "left":
        return left_resolvent_matrix(spec, lam)
    if side == "right":
        return right_resolvent_matrix(spec, lam)
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def jp_identity_residual(spec, lam):
    """``max |W(lam) J_p W(conj(lam))^* - J_p|`` relative to ``max(1, |W|^2)``."""
    W = right_resolvent_matrix(spec, lam).full()
    Wc = right_resolvent_matrix(spec, np.conj(lam)).full()
    Jp = mc.J_p(spec.p)
    return mc.max_abs(W @ Jp @ mc.adj(Wc) - Jp) / max(1.0, mc.max_abs(W) ** 2)


def block_identity_residuals(spec, lam):
    """Residuals of the two families of block identities for ``W`` and ``W#``.

    Returns ``(row_form, column_form)`` where ``row_form`` collects
    ``w21 w22# = w22 w21#``, ``w11 w12# = w12 w11#``, ``w11 w22# - w12 w21# = I``
    and ``column_form`` collects ``w12# w22 = w22# w12``, ``w11# w21 = w21# w11``,
    ``w11# w22 - w21# w12 = I``.
    """
    W = right_resolvent_matrix(spec, lam)
    Ws = right_resolvent_matrix(spec, np.conj(lam))
    s11, s12, s21, s22 = (mc.adj(b) for b in (Ws.w11, Ws.w12, Ws.w21, Ws.w22))
    I = np.eye(spec.p)
    scale = max(1.0, mc.max_abs(W.full()) ** 2)
    rows = max(
        mc.max_abs(W.w21 @ s22 - W.w22 @ s21),
        mc.max_abs(W.w11 @ s12 - W.w12 @ s11),
        mc.max_abs(W.w11 @ s22 - W.w12 @ s21 - I),
    )
    cols = max(
        mc.max_abs(s12 @ W.w22 - s22 @ W.w12),
        mc.max_abs(s11 @ W.w21 - s21 @ W.w11),
        mc.max_abs(s11 @ W.w22 - s21 @ W.w12 - I),
    )
    return rows / scale, cols / scale


def _check_confluent(lam, omega):
    if abs(complex(lam) - np.conj(omega)) < CONFLUENT_TOL:
        raise ConfluentPoint(f"lambda={lam} equals conj(omega); confluent kernel not implemented")


def resolvent_kernel(spec, lam, omega):
    """``K_omega(lam) = (J_p - W(lam) J_p W(omega)^*) / (-i (lam - conj(omega)))``."""
    _check_confluent(lam, omega)
    W = right_resolvent_matrix(spec, lam).full()
    Wo = right_resolvent_matrix(spec, omega).full()
    Jp = mc.J_p(spec.p)
    return (Jp - W @ Jp @ mc.adj(Wo)) / (-1j * (complex(lam) - np.conj(omega)))


def kernel_representative(spec, lam):
    """``s -> Phi(s, lam) = [U(s, conj lam)(J + K), U(s, conj lam)] / sqrt2``.

    The second block represents ``P(lam)^*``, the first ``-Q(lam)^*``.
    """
    lam = complex(lam)
    JK = spec.J + bt.K_matrix(spec)

    def Phi(t):
        U = cs.evaluate_U(spec, np.conj(lam), t) / SQRT2
        return np.concatenate([U @ JK, U], axis=-1)

    return Phi


def kernel_factorization_integral(spec, lam, omega, rule=None):
    """``int_0^l Phi(s, lam)^* H(s) Phi(s, omega) ds`` (a ``2p x 2p`` matrix)."""
    rule = rule or cs.quadrature_rule(spec)
    Pl = kernel_representative(spec, lam)(rule.nodes)
    Po = kernel_representative(spec, omega)(rule.nodes)
    return np.einsum("n,nji,njk,nkl->il", rule.weights, Pl.conj(), rule.H, Po)


def kernel_factorization_check(spec, lam, omega, rule=None):
    """Residual of ``K_omega(lam) = G(lam) G(omega)^<*>`` (quadrature side).

    Residual is ``max|diff| / max(1, max|K|)``.
    """
    K = resolvent_kernel(spec, lam, omega)
    G = kernel_factorization_integral(spec, lam, omega, rule)
    return mc.max_abs(K - G) / max(1.0, mc.max_abs(K))


def preresolvent_kernel(spec, lam, omega):
    """``(A(lam) - A(omega)^*) / (lam - conj(omega))``."""
    _check_confluent(lam, omega)
    Al = preresolvent(spec, lam).full()
    Ao = preresolvent(spec, omega).full()
    return (Al - mc.adj(Ao)) / (complex(lam) - np.conj(omega))


def T_columns(spec, lam):
    """``t -> [gamma(lam)(t), sqrt2 * R0_lam(delta (x) .)(t)]``, shape ``(N, p, 2p)``."""
    wd = bt.weyl(spec, lam)
    gauge = bt.resolvent_on_gauge_matrix(spec, lam)
    return lambda t: np.concatenate([wd.gamma_rep(t), SQRT2 * gauge(t)], axis=-1)


def preresolvent_gram(spec, lam, omega, rule=None):
    """``T(omega)^* T(lam)`` by quadrature."""
    rule = rule or cs.quadrature_rule(spec)
    Tl = T_columns(spec, lam)(rule.nodes)
    To = T_columns(spec, omega)(rule.nodes)
    return np.einsum("n,nji,njk,nkl->il", rule.weights, To.conj(), rule.H, Tl)


def _congruence_factor(A):
    p = A.a11.shape[0]
    return np.block([[np.zeros((p, p)), A.a12], [-np.eye(p), A.a22]])


def kernel_from_preresolvent_kernel(spec, lam, omega):
    """``X(lam)^{-1} N^A_omega(lam) X(omega)^{-*}`` with ``X = [[0, a12], [-I, a22]]``."""
    N = preresolvent_kernel(spec, lam, omega)
    Xl = _congruence_factor(preresolvent(spec, lam))
    Xo = _congruence_factor(preresolvent(spec, omega))
    return mc.solve(Xl, N) @ mc.adj(mc.inv(Xo))


@dataclass(frozen=True)
class PreresolventKernelCheck:
    gram_residual: float
    congruence_residual: float

    @property
    def residual(self):
        return max(self.gram_residual, self.congruence_residual)


def preresolvent_kernel_check(spec, lam, omega, rule=None):
    """Compare ``N^A`` against the quadrature Gram of ``T`` and ``K_omega`` against
    the congruence transform of ``N^A``."""
    N = preresolvent_kernel(spec, lam, omega)
    G = preresolvent_gram(spec, lam, omega, rule)
    gram_res = mc.max_abs(N - G) / max(1.0, mc.max_abs(N))
    K = resolvent_kernel(spec, lam, omega)
    Kc = kernel_from_preresolvent_kernel(spec, lam, omega)
    cong_res = mc.max_abs(K - Kc) / max(1.0, mc.max_abs(K))
    return PreresolventKernelCheck(gram_res, cong_res)
