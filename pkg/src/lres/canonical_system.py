"""Canonical systems ``J f' + F(t) f = lam H(t) f`` with piecewise-constant coefficients.

On every segment the coefficients are constant, so the fundamental solution
is propagated exactly by matrix exponentials of the segment generator
``-J (lam H_k - F_k)``.  All ``int_0^l ... H(s) ... ds`` integrals go through a
composite Gauss-Legendre rule whose panels are the coefficient segments.
"""

import hashlib
import json
import threading
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import matrix_core as mc
from .errors import InvariantViolation, SchemaError

STRUCT_TOL = 1e-12
DEFAULT_NODES = 16
DEFAULT_DEFINITENESS_SAMPLES = 8
DEFINITENESS_RTOL = 1e-8
# ratio of singular values below which a passing definiteness check is flagged
MARGINAL_DEFINITENESS = 1e-4


class DefinitenessWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Segment:
    t_end: float
    F: np.ndarray
    H: np.ndarray


@dataclass(frozen=True, eq=False)
class CanonicalSystemSpec:
    """Validated canonical system on ``[0, length]``; immutable after load."""

    p: int
    length: float
    J: np.ndarray
    segments: tuple

    def __post_init__(self):
        for a in (self.J, *(s.F for s in self.segments), *(s.H for s in self.segments)):
            a.setflags(write=False)
        h = hashlib.sha256()
        h.update(np.array([self.p, self.length]).tobytes())
        h.update(self.J.tobytes())
        for s in self.segments:
            h.update(np.float64(s.t_end).tobytes())
            h.update(s.F.tobytes())
            h.update(s.H.tobytes())
        object.__setattr__(self, "key", h.hexdigest())

    @property
    def breakpoints(self):
        """``[0, t_end(1), ..., t_end(m)]``."""
        return np.concatenate([[0.0], [s.t_end for s in self.segments]])

    @property
    def n_segments(self):
        return len(self.segments)

    def segment_index(self, t):
        ends = np.array([s.t_end for s in self.segments])
        idx = np.searchsorted(ends, np.asarray(t, dtype=float), side="left")
        return np.clip(idx, 0, len(self.segments) - 1)

    def H_at(self, t):
        Hs = np.stack([s.H for s in self.segments])
        return Hs[self.segment_index(t)]

    def F_at(self, t):
        Fs = np.stack([s.F for s in self.segments])
        return Fs[self.segment_index(t)]

    def generators(self, lam):
        """Stack of segment generators ``-J (lam H_k - F_k)``."""
        return np.stack([-self.J @ (lam * s.H - s.F) for s in self.segments])


# ---------------------------------------------------------------------------
# loading


def _parse_entry(x, where):
    if isinstance(x, bool):
        raise SchemaError(f"{where}: boolean is not a number")
    if isinstance(x, (int, float)):
        return complex(float(x), 0.0)
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in x
    ):
        return complex(float(x[0]), float(x[1]))
    raise SchemaError(f"{where}: entry must be a number or a [re, im] pair, got {x!r}")


def parse_matrix(obj, rows, cols, where):
    """Parse a JSON matrix (list of rows; entries ``x`` or ``[re, im]``)."""
    if not isinstance(obj, list) or len(obj) != rows:
        raise SchemaError(f"{where}: expected {rows} rows")
    out = np.empty((rows, cols), dtype=complex)
    for i, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != cols:
            raise SchemaError(f"{where}: row {i} must have {cols} entries")
        for j, x in enumerate(row):
            out[i, j] = _parse_entry(x, f"{where}[{i}][{j}]")
    if not np.all(np.isfinite(out)):
        raise SchemaError(f"{where}: non-finite entry")
    return out


def encode_matrix(a):
    """Inverse of :func:`parse_matrix`; entries become ``[re, im]`` pairs."""
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(a, dtype=complex)]


def _require(doc, key, types, where="spec"):
    if key not in doc:
        raise SchemaError(f"{where}: missing key {key!r}")
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, types):
        raise SchemaError(f"{where}: {key!r} has wrong type {type(v).__name__}")
    return v


def load_spec(document, check_definiteness_=True):
    """Validate a spec document (dict, JSON string, or path) into a spec.

    Raises :class:`SchemaError` for malformed documents and
    :class:`InvariantViolation` when J, F, H or definiteness fail.  A
    definiteness check that passes only marginally emits a
    :class:`DefinitenessWarning`.
    """
    if isinstance(document, (str, bytes)) and not str(document).lstrip().startswith("{"):
        try:
            with open(document) as fh:
                document = json.load(fh)
        except OSError as exc:
            raise SchemaError(f"cannot read spec file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise SchemaError(f"spec file is not valid JSON: {exc}") from exc
    elif isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"spec is not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise SchemaError("spec document must be a JSON object")

    p = _require(document, "p", int)
    if p <= 0 or p % 2:
        raise SchemaError("p must be an even positive integer")
    length = float(_require(document, "length", (int, float)))
    if not np.isfinite(length) or length <= 0:
        raise SchemaError("length must be positive and finite")
    J = parse_matrix(_require(document, "J", list), p, p, "J")
    segs_doc = _require(document, "segments", list)
    if not segs_doc:
        raise SchemaError("segments must be a nonempty list")

    segments = []
    prev = 0.0
    for k, sd in enumerate(segs_doc):
        where = f"segments[{k}]"
        if not isinstance(sd, dict):
            raise SchemaError(f"{where} must be an object")
        t_end = float(_require(sd, "t_end", (int, float), where))
        if not t_end > prev:
            raise SchemaError(f"{where}: t_end values must be strictly increasing and positive")
        F = parse_matrix(_require(sd, "F", list), p, p, f"{where}.F")
        H = parse_matrix(_require(sd, "H", list), p, p, f"{where}.H")
        segments.append(Segment(t_end, F, H))
        prev = t_end
    if abs(prev - length) > STRUCT_TOL * max(1.0, length):
        raise SchemaError(f"last t_end ({prev}) must equal length ({length})")
    segments[-1] = Segment(length, segments[-1].F, segments[-1].H)

    spec = CanonicalSystemSpec(p, length, J, tuple(segments))
    validate(spec, check_definiteness_)
    return spec


def validate(spec, check_definiteness_=True):
    """Check the structural invariants of ``spec``; raise on the first failure."""
    J, p = spec.J, spec.p
    I = np.eye(p)
    if mc.max_abs(mc.adj(J) + J) > STRUCT_TOL or mc.max_abs(J @ J + I) > STRUCT_TOL:
        raise InvariantViolation("J-structure", "need J^* = -J and J^2 = -I")
    for k, s in enumerate(spec.segments):
        for name, a in (("F", s.F), ("H", s.H)):
            scale = max(1.0, mc.max_abs(a))
            if mc.max_abs(a - mc.adj(a)) > STRUCT_TOL * scale:
                raise InvariantViolation("Hermiticity", f"{name} is not Hermitian", k)
        ev = np.linalg.eigvalsh(s.H)
        if ev[0] < -STRUCT_TOL * max(1.0, mc.max_abs(s.H)):
            raise InvariantViolation("H-negativity", f"H has eigenvalue {ev[0]:.3e}", k)
    if check_definiteness_:
        rep = check_definiteness(spec)
        if not rep.ok:
            raise InvariantViolation("definiteness", rep.describe())
        if rep.ratio < MARGINAL_DEFINITENESS:
            warnings.warn(f"definiteness is marginal: {rep.describe()}", DefinitenessWarning, stacklevel=3)
    return spec


def dump_spec(spec):
    return {
        "p": spec.p,
        "length": spec.length,
        "J": encode_matrix(spec.J),
        "segments": [
            {"t_end": s.t_end, "F": encode_matrix(s.F), "H": encode_matrix(s.H)} for s in spec.segments
        ],
    }


def free_system(length=np.pi):
    """``p = 2``, canonical ``J``, ``F = 0``, ``H = I`` on ``[0, length]``."""
    return load_spec(
        {
            "p": 2,
            "length": length,
            "J": encode_matrix(mc.canonical_J(2)),
            "segments": [{"t_end": length, "F": [[0, 0], [0, 0]], "H": [[1, 0], [0, 1]]}],
        }
    )


def random_system(seed, n_segments=2, p=2, length=1.5):
    """Seeded random system with real symmetric ``F`` and positive definite ``H``.

    ``H_k`` has spectrum in ``[0.5, 1.5]`` and ``F_k`` entries are O(0.5), so
    monodromy growth stays moderate for ``|Im lam| <= 2``.
    """
    rng = np.random.default_rng(seed)
    cuts = np.sort(rng.uniform(0.25, 0.75, n_segments - 1)) * length
    ends = list(cuts) + [length]
    segs = []
    for t_end in ends:
        Q, _ = np.linalg.qr(rng.standard_normal((p, p)))
        H = Q @ np.diag(rng.uniform(0.5, 1.5, p)) @ Q.T
        X = 0.5 * rng.standard_normal((p, p))
        F = 0.5 * (X + X.T)
        segs.append({"t_end": float(t_end), "F": F.tolist(), "H": (0.5 * (H + H.T)).tolist()})
    return load_spec({"p": p, "length": length, "J": encode_matrix(mc.canonical_J(p)), "segments": segs})


# ---------------------------------------------------------------------------
# fundamental solution

_CACHE_LIMIT = 4096
_breakpoint_cache = {}
_cache_lock = threading.Lock()


def _cache_key(spec, lam):
    lam = complex(lam)
    return (spec.key, lam.real.hex(), lam.imag.hex())


def breakpoint_values(spec, lam):
    """``U(t_k, lam)`` at all breakpoints ``t_0 = 0, ..., t_m = l`` (memoized)."""
    key = _cache_key(spec, lam)
    hit = _breakpoint_cache.get(key)
    if hit is not None:
        return hit
    gens = spec.generators(complex(lam))
    bps = spec.breakpoints
    out = np.empty((len(bps), spec.p, spec.p), dtype=complex)
    out[0] = np.eye(spec.p)
    for k in range(spec.n_segments):
        out[k + 1] = mc.expm((bps[k + 1] - bps[k]) * gens[k]) @ out[k]
    mc.ensure_finite(out, f"fundamental solution at lambda={lam}")
    out.setflags(write=False)
    with _cache_lock:
        if len(_breakpoint_cache) >= _CACHE_LIMIT:
            _breakpoint_cache.clear()
        _breakpoint_cache[key] = out
    return out


def evaluate_U(spec, lam, t):
    """``U(t, lam)`` for an array of times; result has shape ``t.shape + (p, p)``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < -STRUCT_TOL) or np.any(t > spec.length * (1 + STRUCT_TOL)):
        raise ValueError("times must lie in [0, length]")
    lam = complex(lam)
    Ub = breakpoint_values(spec, lam)
    gens = spec.generators(lam)
    idx = spec.segment_index(t)
    dt = t - spec.breakpoints[idx]
    E = mc.expm(dt[..., None, None] * gens[idx])
    return mc.ensure_finite(E @ Ub[idx], f"U(t, {lam})")


def evaluate_U_sharp(spec, lam, t):
    """``U#(t, lam) = U(t, conj(lam))^*``."""
    return mc.adj(evaluate_U(spec, np.conj(lam), t))


@dataclass(frozen=True)
class FundamentalSolution:
    lam: complex
    t_grid: np.ndarray
    U_values: np.ndarray
    monodromy: np.ndarray


def fundamental_solution(spec, lam, t_grid):
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or np.any(np.diff(t_grid) < 0):
        raise ValueError("t_grid must be a sorted 1-d array")
    if t_grid[0] != 0.0 or abs(t_grid[-1] - spec.length) > STRUCT_TOL * spec.length:
        raise ValueError("t_grid must contain 0 and l")
    U = evaluate_U(spec, lam, t_grid)
    U[0] = np.eye(spec.p)
    return FundamentalSolution(complex(lam), t_grid, U, monodromy(spec, lam))


def monodromy(spec, lam):
    """``U(l, lam)``."""
    return breakpoint_values(spec, lam)[-1].copy()


# ---------------------------------------------------------------------------
# quadrature


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    segment: np.ndarray
    nodes_per_segment: int = DEFAULT_NODES
    H: np.ndarray = field(repr=False, default=None)


def quadrature_rule(spec, nodes_per_segment=DEFAULT_NODES):
    """Composite Gauss-Legendre rule with one panel per coefficient segment."""
    x, w = np.polynomial.legendre.leggauss(nodes_per_segment)
    bps = spec.breakpoints
    nodes, weights, seg = [], [], []
    for k in range(spec.n_segments):
        a, b = bps[k], bps[k + 1]
        nodes.append(0.5 * (b - a) * x + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * w)
        seg.append(np.full(nodes_per_segment, k))
    nodes = np.concatenate(nodes)
    return QuadratureRule(
        nodes, np.concatenate(weights), np.concatenate(seg), nodes_per_segment, spec.H_at(nodes)
    )


def partial_nodes(spec, upper, n=DEFAULT_NODES):
    """Gauss-Legendre nodes/weights for ``int_0^t`` for every ``t`` in ``upper``.

    Returns arrays of shape ``(len(upper), m * n)``; panels past ``t`` get zero
    weight, and the panel containing ``t`` is truncated at ``t``.
    """
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    x, w = np.polynomial.legendre.leggauss(n)
    bps = spec.breakpoints
    a = bps[:-1][None, :]
    b = np.minimum(bps[1:][None, :], upper[:, None])
    b = np.maximum(a, b)
    half = 0.5 * (b - a)
    nodes = half[..., None] * x + (0.5 * (a + b))[..., None]
    weights = half[..., None] * w
    k = len(upper)
    return nodes.reshape(k, -1), weights.reshape(k, -1)


def gram(spec, alpha, beta, rule=None):
    """``int_0^l U(s, alpha)^* H(s) U(s, beta) ds``."""
    rule = rule or quadrature_rule(spec)
    Ua = evaluate_U(spec, alpha, rule.nodes)
    Ub = evaluate_U(spec, beta, rule.nodes)
    return np.einsum("n,nji,njk,nkl->il", rule.weights, Ua.conj(), rule.H, Ub)


# ---------------------------------------------------------------------------
# definiteness


@dataclass(frozen=True)
class DefinitenessReport:
    ok: bool
    sigma_min: float
    sigma_max: float
    samples: int

    @property
    def ratio(self):
        return self.sigma_min / self.sigma_max if self.sigma_max > 0 else 0.0

    def __bool__(self):
        return self.ok

    def describe(self):
        return (
            f"stacked H V has sigma_min/sigma_max = {self.ratio:.3e} "
            f"over {self.samples} samples (threshold {DEFINITENESS_RTOL:g})"
        )


def check_definiteness(spec, samples_per_segment=DEFAULT_DEFINITENESS_SAMPLES):
    """Numerical-rank heuristic for the definiteness condition.

    ``V(t) = U(t, 0)`` solves ``J V' + F V = 0``; the stacked matrix of
    ``H(t_i) V(t_i)`` over interior samples must have rank ``p``.
    """
    bps = spec.breakpoints
    ts = []
    for k in range(spec.n_segments):
        a, b = bps[k], bps[k + 1]
        ts.append(a + (b - a) * (np.arange(samples_per_segment) + 0.5) / samples_per_segment)
    ts = np.concatenate(ts)
    V = evaluate_U(spec, 0.0, ts)
    stacked = (spec.H_at(ts) @ V).reshape(-1, spec.p)
    s = np.linalg.svd(stacked, compute_uv=False)
    smax, smin = float(s[0]), float(s[-1])
    ok = smax > 0 and smin > DEFINITENESS_RTOL * smax
    return DefinitenessReport(ok, smin, smax, len(ts))
