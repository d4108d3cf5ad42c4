"""Command-line interface.

Every subcommand prints a JSON report on stdout (sorted keys, floats with
17 significant digits) and diagnostics on stderr.

Exit codes: 0 success or certificate passed, 1 certificate failed,
2 unreadable input, 3 domain error, 4 numerical failure.
"""

import argparse
import hashlib
import json
import math
import os
import sys
import time
from importlib import metadata

import numpy as np
import yaml

from . import certify as cert
from ._validation import DomainError, check_invertible
from .compounds import additive_compound, multiplicative_compound
from .duality import (
    additive_duality_residual,
    exp_compound_via_duality,
    mu_duality_equality,
    multiplicative_duality_residual,
)
from .dynamics import (
    EquilibriumNotFound,
    HopfieldModel,
    convergence_experiment,
    find_equilibrium,
    ltv_rotation_example,
)
from .lognorms import mu, mu_compound_direct, normalize_p, tau

OUTPUT_DIR_ENV = "KCOMPOUND_OUTPUT_DIR"

# tolerances reported by duality-check
DUALITY_TOL = {"mult": 1e-8, "add": 1e-10, "exp": 1e-7, "mu": 1e-9}


class ParseError(ValueError):
    """An input file could not be read or interpreted."""


# ---------------------------------------------------------------- serialisation

def _fmt_float(x):
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def dumps(obj):
    """Deterministic JSON: sorted keys, 17 significant digits for floats."""
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ", ".join(json.dumps(k) + ": " + dumps(v) for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


# ---------------------------------------------------------------- input files

def parse_matrix_text(text, source="<input>"):
    """Parse a matrix from ``"n m"`` + rows text, or a JSON/YAML ``rows/cols/data`` mapping."""
    stripped = text.strip()
    if not stripped:
        raise ParseError(f"{source}: empty matrix file")
    if stripped[0] in "{[" or stripped.split(None, 1)[0].rstrip(":") in ("rows", "cols", "data"):
        try:
            doc = yaml.safe_load(stripped)
        except yaml.YAMLError as exc:
            raise ParseError(f"{source}: {exc}") from None
        if not isinstance(doc, dict) or not {"rows", "cols", "data"} <= doc.keys():
            raise ParseError(f"{source}: structured matrix needs keys rows, cols, data")
        rows, cols, data = doc["rows"], doc["cols"], doc["data"]
        try:
            arr = np.array(data, dtype=float)
        except (TypeError, ValueError):
            raise ParseError(f"{source}: data is not a numeric array") from None
    else:
        lines = [ln for ln in stripped.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        try:
            rows, cols = (int(v) for v in lines[0].split())
            body = [[float(v) for v in ln.split()] for ln in lines[1:]]
        except ValueError:
            raise ParseError(f"{source}: expected 'n m' header followed by n rows of m numbers") from None
        if len(body) != rows or any(len(r) != cols for r in body):
            raise ParseError(f"{source}: declared dims {rows}x{cols} do not match the data")
        arr = np.array(body, dtype=float)
    try:
        arr = arr.reshape(int(rows), int(cols))
    except (TypeError, ValueError):
        raise ParseError(f"{source}: declared dims {rows}x{cols} do not match the data") from None
    if not np.all(np.isfinite(arr)):
        raise ParseError(f"{source}: non-finite entries")
    return arr


def _read(path):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    return raw


def read_matrix(path, digests):
    raw = _read(path)
    digests[path] = hashlib.sha256(raw).hexdigest()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise ParseError(f"{path}: not UTF-8 text") from None
    return parse_matrix_text(text, path)


def read_vector(path, digests):
    raw = _read(path)
    digests[path] = hashlib.sha256(raw).hexdigest()
    try:
        doc = yaml.safe_load(raw.decode("utf-8"))
        if isinstance(doc, str):
            doc = doc.split()
        vec = np.array(doc if isinstance(doc, list) else [doc], dtype=float).ravel()
    except (yaml.YAMLError, UnicodeDecodeError, TypeError, ValueError):
        raise ParseError(f"{path}: expected a list of numbers") from None
    return vec


def read_config(path, digests):
    raw = _read(path)
    digests[path] = hashlib.sha256(raw).hexdigest()
    try:
        doc = yaml.safe_load(raw.decode("utf-8")) or {}
    except (yaml.YAMLError, UnicodeDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: config must be a key-value mapping")
    return doc


def hopfield_from_config(doc):
    """Build a :class:`HopfieldModel` from a config mapping."""
    try:
        W = np.array(doc["W"], dtype=float)
        n = int(doc.get("n", W.shape[0]))
        if W.shape != (n, n):
            raise ParseError(f"W has shape {W.shape}, expected ({n}, {n})")
        model = HopfieldModel(
            r=doc.get("r", 1.0), W=W, u=doc.get("u", 0.0), a=doc.get("a", 1.0),
            b=doc.get("b", 1.0), m=doc.get("m"), M=doc.get("M"),
        )
    except KeyError as exc:
        raise ParseError(f"config is missing key {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise ParseError(f"bad config value: {exc}") from None
    return model


# ---------------------------------------------------------------- commands

def _p_label(p):
    return "inf" if p == math.inf else p


def cmd_compound(args, digests):
    A = read_matrix(args.input, digests)
    if args.kind == "mult":
        C = multiplicative_compound(A, args.k)
    else:
        C = additive_compound(A, args.k)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(f"{C.shape[0]} {C.shape[1]}\n")
            for row in C:
                fh.write(" ".join(_fmt_float(float(v)) for v in row) + "\n")
    return {"kind": args.kind, "k": args.k, "shape": list(C.shape), "matrix": C}, 0


def cmd_lognorm(args, digests):
    A = read_matrix(args.input, digests)
    p = normalize_p(args.p)
    H = read_matrix(args.scaling, digests) if args.scaling else None
    out = {"p": _p_label(p)}
    if args.k is None:
        out["mu"] = mu(A, p, scaling=H)
    else:
        B = A if H is None else H @ A @ np.linalg.inv(check_invertible(H, "scaling"))
        out.update(k=args.k, mu_compound=mu_compound_direct(B, args.k, p))
        if H is not None:
            out["scaling_applied_as"] = "H^(k)"
    return out, 0


def cmd_tau(args, digests):
    A = read_matrix(args.input, digests)
    p = normalize_p(args.p)
    T = read_matrix(args.scaling, digests) if args.scaling else None
    return {"p": _p_label(p), "k": args.k, "tau": tau(A, args.k, p, T)}, 0


def _hopfield_equilibria(model, doc):
    guesses = doc.get("equilibrium_guesses")
    if guesses is None:
        n = model.n
        guesses = [np.zeros(n), np.ones(n), -np.ones(n)]
    found = []
    for g in guesses:
        try:
            e = find_equilibrium(model.field, model.jacobian, np.asarray(g, dtype=float))
        except EquilibriumNotFound as exc:
            print(f"warning: {exc}", file=sys.stderr)
            continue
        if not any(np.max(np.abs(e - f)) < 1e-6 for f in found):
            found.append(e)
    if not found:
        raise EquilibriumNotFound("no equilibrium found from the configured guesses")
    return found


def _box_sampler(evaluator, n, doc):
    low, high = doc.get("box", [-5.0, 5.0])
    return cert.JacobianSampler.box(evaluator, n, low, high,
                                    per_axis=int(doc.get("per_axis", 7)),
                                    n_random=int(doc.get("n_random", 200)),
                                    seed=int(doc.get("sample_seed", 0)))


def _ltv_grid(doc):
    t0, t1, count = doc.get("t_grid", [0.0, 2 * math.pi, 629])
    return np.linspace(float(t0), float(t1), int(count))


def cmd_certify(args, digests):
    method = args.method
    p = normalize_p(args.p)
    eta = args.eta
    doc = read_config(args.config, digests) if args.config else {}
    T = read_matrix(args.scaling, digests) if args.scaling else None
    d = read_vector(args.weights, digests) if args.weights else None

    if args.model == "matrix":
        if not args.input:
            raise ParseError("--model matrix needs --input")
        A = read_matrix(args.input, digests)
        n = A.shape[0]
        if method == "direct":
            c = cert.certify_direct(cert.JacobianSampler.constant(A), args.k, p, T, eta)
        elif method == "tau":
            c = cert.certify_tau(cert.JacobianSampler.constant(A), args.k, p, T, eta)
        elif method == "trace-dominance":
            if d is None:
                d = cert.search_diagonal_weights(A, args.k)
            c = cert.trace_dominance(A, args.k, d, eta)
        elif method == "smith":
            Q = np.array(doc.get("Q", np.eye(n)), dtype=float)
            theta = doc.get("theta")
            if theta is None:
                P = cert._sqrtm_spd(Q)
                theta = mu(-A, 2, scaling=P)
            c = cert.ltv_smith_certify([(0.0, A)], Q, theta, args.k, eta)
            c.mode = "exact"
        elif method == "local-stability":
            c = cert.local_stability_certificate(A, p, T)
        elif method == "li-wang":
            c = cert.li_wang_certificate(A)
        else:
            raise DomainError(f"method {method} does not apply to --model matrix")
        return {"model": "matrix", "certificate": c.to_dict()}, 0 if c.passed else 1

    if args.model == "hopfield":
        if not args.config:
            raise ParseError("--model hopfield needs --config")
        model = hopfield_from_config(doc)
        out = {"model": "hopfield", "hopfield": model.to_dict()}
        if method == "hopfield":
            c = cert.hopfield_certify(model, args.k, d, eta)
        elif method in ("direct", "tau"):
            sampler = _box_sampler(lambda t, x: model.jacobian(x), model.n, doc)
            fn = cert.certify_direct if method == "direct" else cert.certify_tau
            c = fn(sampler, args.k, p, T, eta)
        elif method in ("local-stability", "li-wang"):
            results = []
            for e in _hopfield_equilibria(model, doc):
                J = model.jacobian(e)
                ce = (cert.local_stability_certificate(J, p, T) if method == "local-stability"
                      else cert.li_wang_certificate(J))
                results.append({"equilibrium": e.tolist(), "certificate": ce.to_dict()})
            out["equilibria"] = results
            ok = all(r["certificate"]["passed"] for r in results)
            return out, 0 if ok else 1
        else:
            raise DomainError(f"method {method} does not apply to --model hopfield")
        out["certificate"] = c.to_dict()
        return out, 0 if c.passed else 1

    # ltv rotation example
    ex = ltv_rotation_example()
    times = _ltv_grid(doc)
    out = {"model": "ltv", "t_grid": [float(times[0]), float(times[-1]), len(times)]}
    if method == "smith":
        Q = np.array(doc.get("Q", np.eye(2)), dtype=float)
        theta = doc.get("theta")
        if theta is None:
            P = cert._sqrtm_spd(Q)
            theta = [mu(-ex.A(t), 2, scaling=P) for t in times]
        c = cert.ltv_smith_certify([(t, ex.A(t)) for t in times], Q, theta, args.k, eta)
    elif method in ("direct", "tau"):
        sampler = cert.JacobianSampler.from_time_function(ex.A, 2, times)
        fn = cert.certify_direct if method == "direct" else cert.certify_tau
        c = fn(sampler, args.k, p, T, eta)
    else:
        raise DomainError(f"method {method} does not apply to --model ltv")
    out["certificate"] = c.to_dict()
    return out, 0 if c.passed else 1


def cmd_duality_check(args, digests):
    A = read_matrix(args.input, digests)
    k = args.k
    which = args.which
    scale = max(1.0, float(np.linalg.norm(A, np.inf)))
    if which == "mult":
        res = multiplicative_duality_residual(A, k)
        tol = DUALITY_TOL["mult"] * max(1.0, abs(float(np.linalg.det(A))))
        out = {"residual": res}
    elif which == "add":
        res = additive_duality_residual(A, k)
        tol = DUALITY_TOL["add"] * scale
        out = {"residual": res}
    elif which == "exp":
        from scipy.linalg import expm

        ref = multiplicative_compound(expm(A), k).T
        res = float(np.max(np.abs(exp_compound_via_duality(A, k) - ref)) / max(1e-300, np.max(np.abs(ref))))
        tol = DUALITY_TOL["exp"]
        out = {"relative_residual": res}
    else:
        ps = [normalize_p(args.p)] if args.p else [1, 2, math.inf]
        pairs = {str(_p_label(p)): mu_duality_equality(A, k, p) for p in ps}
        res = max(abs(lhs - rhs) for lhs, rhs in pairs.values())
        tol = DUALITY_TOL["mu"] * scale
        out = {"residual": res, "sides": {p: {"lhs": l, "rhs": r} for p, (l, r) in pairs.items()}}
    out.update(which=which, k=k, tolerance=tol, passed=bool(res <= tol))
    return out, 0 if out["passed"] else 1


def cmd_simulate(args, digests):
    doc = read_config(args.config, digests)
    model = hopfield_from_config(doc)
    ic_box = doc.get("ic_box", [-3.0, 3.0])
    extra = doc.get("extra_ics", []) if args.trials > 0 else []
    summary = convergence_experiment(model, args.trials, tuple(ic_box), args.T, args.step,
                                     args.seed, extra_ics=extra)
    csv_dir = args.csv or os.environ.get(OUTPUT_DIR_ENV)
    if csv_dir and summary.trajectories:
        os.makedirs(csv_dir, exist_ok=True)
        for i, traj in enumerate(summary.trajectories):
            traj.to_csv(os.path.join(csv_dir, f"trajectory_{i:04d}.csv"))
    out = {"trials": args.trials, "seed": args.seed, "T": args.T, "step": args.step,
           "ic_box": list(ic_box), "summary": summary.to_dict()}
    return out, 0


COMMANDS = {
    "compound": cmd_compound,
    "lognorm": cmd_lognorm,
    "tau": cmd_tau,
    "certify": cmd_certify,
    "duality-check": cmd_duality_check,
    "simulate": cmd_simulate,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="kcompound", description=__doc__.splitlines()[0])
    parser.add_argument("--timing", action="store_true", help="include wall-clock timing in the report")
    sub = parser.add_subparsers(dest="command", required=True)
    P_CHOICES = ["1", "2", "inf"]

    s = sub.add_parser("compound", help="multiplicative or additive k-compound")
    s.add_argument("--input", required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--kind", choices=["mult", "add"], required=True)
    s.add_argument("--out")

    s = sub.add_parser("lognorm", help="log norm of a matrix or of its additive compound")
    s.add_argument("--input", required=True)
    s.add_argument("--p", choices=P_CHOICES, required=True)
    s.add_argument("--k", type=int)
    s.add_argument("--scaling")

    s = sub.add_parser("tau", help="k-shifted log norm")
    s.add_argument("--input", required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--p", choices=P_CHOICES, required=True)
    s.add_argument("--scaling")

    s = sub.add_parser("certify", help="run a k-contraction or stability certificate")
    s.add_argument("--model", choices=["matrix", "hopfield", "ltv"], required=True)
    s.add_argument("--method", required=True,
                   choices=["direct", "tau", "trace-dominance", "smith", "hopfield",
                            "local-stability", "li-wang"])
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--p", choices=P_CHOICES, default="inf")
    s.add_argument("--eta", type=float, default=0.0)
    s.add_argument("--weights")
    s.add_argument("--config")
    s.add_argument("--input")
    s.add_argument("--scaling")

    s = sub.add_parser("duality-check", help="evaluate a compound duality identity")
    s.add_argument("--input", required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--which", choices=["mult", "add", "exp", "mu"], required=True)
    s.add_argument("--p", choices=P_CHOICES)

    s = sub.add_parser("simulate", help="Hopfield convergence experiment")
    s.add_argument("--config", required=True)
    s.add_argument("--trials", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--T", type=float, default=35.0)
    s.add_argument("--step", type=float, default=1e-3)
    s.add_argument("--csv")
    return parser


def _versions():
    try:
        pkg = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        pkg = "unknown"
    return {"kcompound": pkg, "numpy": np.__version__}


def run(argv=None, stdout=None, stderr=None):
    """Entry point returning the exit code; used by :func:`main` and tests."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    args = parser.parse_args(argv)
    digests = {}
    started = time.perf_counter()
    try:
        results, code = COMMANDS[args.command](args, digests)
    except ParseError as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    except DomainError as exc:
        print(f"error: {exc}", file=stderr)
        return 3
    except (EquilibriumNotFound, cert.SampleEvaluationError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=stderr)
        return 4
    echo = {k: v for k, v in vars(args).items() if k not in ("timing",)}
    report = {
        "command": echo,
        "inputs_digest": digests,
        "results": results,
        "versions": _versions(),
    }
    if args.timing:
        report["timing"] = {"seconds": time.perf_counter() - started}
    stdout.write(dumps(report) + "\n")
    return code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
