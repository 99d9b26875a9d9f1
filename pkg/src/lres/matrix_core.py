"""Small dense complex matrix utilities.

Everything here works on ``numpy`` arrays of dtype ``complex128``; matrices
are tiny (a few dozen rows at most), so robustness wins over speed.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NonFinite, NonHermitian

DEFAULT_INERTIA_TOL = 1e-8


def cmat(a):
    """Return ``a`` as a 2-d complex128 array (scalars become 1x1)."""
    m = np.asarray(a, dtype=complex)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {m.shape}")
    return m


def adj(a):
    """Conjugate transpose over the last two axes."""
    return np.conj(np.swapaxes(a, -1, -2))


def ensure_finite(a, what="result"):
    if not np.all(np.isfinite(a)):
        raise NonFinite(f"{what} contains NaN or Inf")
    return a


def max_abs(a):
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def canonical_J(p):
    """The standard skew signature matrix ``[[0, -I], [I, 0]]`` of even size ``p``."""
    if p % 2:
        raise ValueError("p must be even")
    h = p // 2
    J = np.zeros((p, p), dtype=complex)
    J[:h, h:] = -np.eye(h)
    J[h:, :h] = np.eye(h)
    return J


def J_p(p):
    """The ``2p x 2p`` signature ``[[0, -iI], [iI, 0]]``."""
    I = np.eye(p)
    Z = np.zeros((p, p))
    return np.block([[Z, -1j * I], [1j * I, Z]])


@dataclass(frozen=True)
class Inertia:
    n_neg: int
    n_zero: int
    n_pos: int
    tol: float

    @property
    def dim(self):
        return self.n_neg + self.n_zero + self.n_pos

    def as_tuple(self):
        return (self.n_neg, self.n_zero, self.n_pos)


def hermitian_inertia(G, tol=DEFAULT_INERTIA_TOL):
    """Count negative, zero and positive eigenvalues of a Hermitian matrix.

    Eigenvalues within ``tol * ||G||_2`` of zero are classified as zero.

    Raises
    ------
    NonHermitian
        If ``max|G - G^*| > tol * max(1, max|G|)``.
    """
    G = cmat(G)
    if G.shape[0] != G.shape[1]:
        raise ValueError("inertia needs a square matrix")
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    ensure_finite(G, "Gram matrix")
    resid = max_abs(G - adj(G))
    if resid > tol * max(1.0, max_abs(G)):
        raise NonHermitian(resid)
    ev = np.linalg.eigvalsh(0.5 * (G + adj(G)))
    cut = tol * (float(np.max(np.abs(ev))) if ev.size else 0.0)
    n_neg = int(np.sum(ev < -cut))
    n_pos = int(np.sum(ev > cut))
    return Inertia(n_neg, G.shape[0] - n_neg - n_pos, n_pos, tol)


def expm(M):
    """Matrix exponential (batched over leading axes).

    Backed by :func:`scipy.linalg.expm` (Pade scaling and squaring).
    """
    M = np.asarray(M, dtype=complex)
    return ensure_finite(scipy.linalg.expm(M), "matrix exponential")


def solve(A, B):
    return ensure_finite(np.linalg.solve(A, B), "linear solve")


def inv(A):
    return ensure_finite(np.linalg.inv(A), "matrix inverse")


def relative_smin(A, scale=None):
    """Smallest singular value of ``A`` divided by ``max(1, scale)``.

    ``scale`` defaults to the spectral norm of ``A``.
    """
    s = np.linalg.svd(A, compute_uv=False)
    if scale is None:
        scale = s[0] if s.size else 0.0
    return float(s[-1] / max(1.0, scale))


def numerical_rank(A, rtol=1e-10):
    s = np.linalg.svd(np.atleast_2d(A), compute_uv=False)
    if not s.size or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def sharp(f, lam):
    """``f#(lam) = f(conj(lam))^*`` for a matrix-valued callable ``f``."""
    return adj(cmat(f(np.conj(lam))))
