"""Command-line interface: ``lres <command> --spec PATH [options]``.

Exit codes: 0 success, 1 usage or schema error, 2 invariant violation (or a
failed identity in ``verify``).  Spectral hits (``lam`` in the spectrum of
``A_0`` or of the chosen extension) are reported as data rows.
"""

import argparse
import csv
import io
import json
import sys
import warnings
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import boundary_triple as bt
from . import canonical_system as cs
from . import matrix_core as mc
from . import nevanlinna as nv
from . import resolvent_matrix as rmx
from . import verify
from .errors import (
    ConfluentPoint,
    LresError,
    SchemaError,
    SingularDenominator,
    SpectrumOfA0,
)

EXIT_OK, EXIT_USAGE, EXIT_INVARIANT = 0, 1, 2
USAGE_ERRORS = (SchemaError, ConfluentPoint)
SPECTRAL_HITS = (SpectrumOfA0, SingularDenominator)
KERNELS = ("weyl", "resolvent", "preresolvent", "lres")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    spec_path: str
    lambdas: list = field(default_factory=list)
    pair_path: str = None
    side: str = "right"
    kernel: str = "weyl"
    nodes: int = cs.DEFAULT_NODES
    tol: float = mc.DEFAULT_INERTIA_TOL
    seed: int = 42
    fmt: str = "json"
    check: bool = False

    def __post_init__(self):
        if not self.tol > 0:
            raise UsageError("--tol must be positive")
        if self.nodes < 1:
            raise UsageError("--nodes must be at least 1")
        if self.command != "verify" and not self.lambdas:
            raise UsageError("give --lambda or --grid")


def parse_lambda(text):
    """Parse ``RE+IMi`` (also ``2i``, ``-i``, ``0.5``) into a complex number."""
    s = text.strip().replace(" ", "").replace("I", "i").replace("j", "i")
    if s.endswith("i"):
        head = s[:-1]
        if head == "" or head[-1] in "+-":
            s = head + "1i"
    try:
        return complex(s.replace("i", "j"))
    except ValueError as exc:
        raise UsageError(f"cannot parse lambda {text!r}; expected RE+IMi") from exc


def parse_grid(text):
    """``re0:re1:n,im0:im1:m`` -> list of ``n*m`` points, real part varying slowest."""
    try:
        re_part, im_part = text.split(",")
        axes = []
        for part in (re_part, im_part):
            a, b, n = part.split(":")
            n = int(n)
            if n < 1:
                raise ValueError
            axes.append(np.linspace(float(a), float(b), n))
    except ValueError as exc:
        raise UsageError(f"bad --grid {text!r}; expected re0:re1:n,im0:im1:m") from exc
    return [complex(x, y) for x in axes[0] for y in axes[1]]


def load_spec_arg(text):
    """A spec path, or ``builtin:free`` / ``builtin:random:SEED``."""
    if text.startswith("builtin:"):
        parts = text.split(":")
        if parts[1] == "free" and len(parts) == 2:
            return cs.free_system()
        if parts[1] == "random" and len(parts) == 3:
            try:
                return cs.random_system(int(parts[2]))
            except ValueError as exc:
                raise UsageError(f"bad builtin seed in {text!r}") from exc
        raise UsageError(f"unknown builtin spec {text!r}")
    return cs.load_spec(text)


def load_pair_arg(path, p):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read pair file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"pair file is not valid JSON: {exc}") from exc
    return nv.load_pair(doc, p)


# ---------------------------------------------------------------------------
# commands; each returns a list of row dicts


def _spectral_row(lam, exc):
    row = {"lambda": lam, "status": exc.code}
    row.update({k: v for k, v in exc.record().items() if k != "error"})
    return row


def _rows(cfg, fn):
    out = []
    for lam in cfg.lambdas:
        try:
            row = {"lambda": lam, "status": "ok"}
            row.update(fn(lam))
        except SPECTRAL_HITS as exc:
            row = _spectral_row(lam, exc)
        out.append(row)
    return out


def cmd_monodromy(cfg, spec):
    return _rows(cfg, lambda lam: {"U": cs.monodromy(spec, lam)})


def cmd_weyl(cfg, spec):
    return _rows(cfg, lambda lam: {"M": bt.weyl_function(spec, lam)})


def cmd_resmatrix(cfg, spec):
    def one(lam):
        W = rmx.resolvent_matrix(spec, lam, cfg.side)
        row = {"side": cfg.side, "W": W.full()}
        if cfg.check:
            row["jp_residual"] = rmx.jp_identity_residual(spec, lam)
            if cfg.side == "right":
                sharp = mc.adj(rmx.left_resolvent_matrix(spec, np.conj(lam)).full())
                row["sharp_residual"] = mc.max_abs(W.full() - sharp)
        return row

    return _rows(cfg, one)


def _lres_row(spec, lam, pair):
    r = nv.l_resolvent_left(spec, lam, pair)
    values = {"left": r}
    for name, fn in nv.ROUTES.items():
        if name == "left":
            continue
        try:
            values[name] = fn(spec, lam, pair)
        except SPECTRAL_HITS:
            continue
    scale = max(1.0, mc.max_abs(r))
    resid = max((mc.max_abs(v - r) for v in values.values()), default=0.0) / scale
    return {"r": r, "route_residual": resid, "routes": sorted(values)}


def _require_pair(cfg, spec):
    if cfg.pair_path is None:
        raise UsageError(f"{cfg.command} needs --pair")
    return load_pair_arg(cfg.pair_path, spec.p)


def cmd_lres(cfg, spec):
    pair = _require_pair(cfg, spec)
    return _rows(cfg, lambda lam: _lres_row(spec, lam, pair))


def cmd_kernel_inertia(cfg, spec):
    if len(cfg.lambdas) < 2:
        raise UsageError("kernel-inertia needs at least two points")
    if cfg.kernel == "weyl":
        kernel = nv.weyl_kernel(spec)
    elif cfg.kernel == "resolvent":
        kernel = nv.resolvent_matrix_kernel(spec)
    elif cfg.kernel == "preresolvent":
        kernel = nv.preresolvent_matrix_kernel(spec)
    else:
        kernel = nv.nevanlinna_kernel(nv.l_resolvent_function(spec, _require_pair(cfg, spec)))
    try:
        sample = nv.negative_squares(kernel, cfg.lambdas, tol=cfg.tol)
    except SPECTRAL_HITS as exc:
        return [{"kernel": cfg.kernel, "status": exc.code, "message": str(exc)}]
    n_neg, n_zero, n_pos = sample.inertia.as_tuple()
    return [
        {
            "kernel": cfg.kernel,
            "status": "ok",
            "points": list(sample.points),
            "n_neg": n_neg,
            "n_zero": n_zero,
            "n_pos": n_pos,
            "tol": cfg.tol,
        }
    ]


COMMANDS = {
    "monodromy": cmd_monodromy,
    "weyl": cmd_weyl,
    "resmatrix": cmd_resmatrix,
    "lres": cmd_lres,
    "kernel-inertia": cmd_kernel_inertia,
}


# ---------------------------------------------------------------------------
# emitters


def _json_value(v):
    if isinstance(v, np.ndarray):
        return [[_json_value(x) for x in row] for row in v] if v.ndim == 2 else [_json_value(x) for x in v]
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    return v


def _csv_cell(v):
    if isinstance(v, (complex, np.complexfloating)):
        return f"{float(v.real)!r};{float(v.imag)!r}"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (list, tuple)):
        return " ".join(_csv_cell(x) for x in v)
    if isinstance(v, dict):
        return json.dumps(_json_value(v), sort_keys=True)
    return str(v)


def _flatten(row):
    flat = {}
    for k, v in row.items():
        if isinstance(v, np.ndarray) and v.ndim == 2:
            for i in range(v.shape[0]):
                for j in range(v.shape[1]):
                    flat[f"{k}[{i},{j}]"] = v[i, j]
        else:
            flat[k] = v
    return flat


def emit(doc, fmt, stream):
    """Write ``doc`` (header fields plus ``rows``) as JSON or CSV."""
    if fmt == "json":
        json.dump(_json_value(doc), stream)
        stream.write("\n")
        return
    flat = [_flatten(r) for r in doc["rows"]]
    columns = []
    for r in flat:
        columns.extend(k for k in r if k not in columns)
    for key in ("generated_at", "command", "spec_key"):
        if key in doc:
            stream.write(f"# {key}={doc[key]}\n")
    for w in doc.get("warnings", []):
        stream.write(f"# warning={w['warning']}: {w['message']}\n")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in flat:
        writer.writerow([_csv_cell(r[c]) if c in r else "" for c in columns])
    stream.write(buf.getvalue())


# ---------------------------------------------------------------------------
# entry point


def build_parser():
    ap = argparse.ArgumentParser(prog="lres", description="Spectral data and L-resolvents of canonical systems.")
    ap.add_argument("command", choices=sorted(list(COMMANDS) + ["verify"]))
    ap.add_argument("--spec", required=True, help="spec JSON path, or builtin:free / builtin:random:SEED")
    ap.add_argument("--pair", dest="pair_path", help="parameter-pair JSON path")
    ap.add_argument("--lambda", dest="lambdas", action="append", default=[], metavar="RE+IMi")
    ap.add_argument("--grid", help="re0:re1:n,im0:im1:m")
    ap.add_argument("--side", choices=("left", "right"), default="right")
    ap.add_argument("--kernel", choices=KERNELS, default="weyl", help="kernel for kernel-inertia")
    ap.add_argument("--nodes", type=int, default=cs.DEFAULT_NODES, help="quadrature nodes per segment")
    ap.add_argument("--tol", type=float, default=mc.DEFAULT_INERTIA_TOL, help="inertia tolerance")
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
    ap.add_argument("--check", action="store_true", help="append identity residuals")
    return ap


def _config(ns):
    lambdas = [parse_lambda(s) for s in ns.lambdas]
    if ns.grid:
        lambdas += parse_grid(ns.grid)
    return RunConfig(
        command=ns.command,
        spec_path=ns.spec,
        lambdas=lambdas,
        pair_path=ns.pair_path,
        side=ns.side,
        kernel=ns.kernel,
        nodes=ns.nodes,
        tol=ns.tol,
        seed=ns.seed,
        fmt=ns.fmt,
        check=ns.check,
    )


def run(argv, stdout=None, stderr=None, timestamp=None):
    """Execute one CLI invocation and return the exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    stamp = timestamp or datetime.now(timezone.utc).isoformat(timespec="seconds")
    fmt = ns.fmt
    header = {"generated_at": stamp, "command": ns.command}
    try:
        cfg = _config(ns)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", cs.DefinitenessWarning)
            spec = load_spec_arg(cfg.spec_path)
        header["spec_key"] = spec.key
        header["warnings"] = [{"warning": type(w.message).__name__, "message": str(w.message)} for w in caught]
        if cfg.command == "verify":
            report = verify.run_suite(spec, seed=cfg.seed, nodes=cfg.nodes, tol=cfg.tol)
            body = report.as_dict()
            doc = dict(header, seed=cfg.seed, passed=body["passed"], rows=body["records"])
            doc["warnings"] = header["warnings"] + body["warnings"]
            emit(doc, fmt, stdout)
            return EXIT_OK if report.passed else EXIT_INVARIANT
        rows = COMMANDS[cfg.command](cfg, spec)
        emit(dict(header, rows=rows), fmt, stdout)
        return EXIT_OK
    except UsageError as exc:
        code, record = EXIT_USAGE, {"error": "UsageError", "message": str(exc)}
    except USAGE_ERRORS as exc:
        code, record = EXIT_USAGE, exc.record()
    except LresError as exc:
        code, record = EXIT_INVARIANT, exc.record()
    emit(dict(header, rows=[record]), fmt, stdout)
    stderr.write(f"lres: {record['error']}: {record['message']}\n")
    return code


def main(argv=None):
    sys.exit(run(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
