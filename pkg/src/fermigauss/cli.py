"""``fermigauss`` command line.

Every subcommand reads JSON files, calls one library function and prints a
JSON object with a ``schema_version`` field. Exit codes: 0 when the
predicate holds (or the command succeeded), 1 when it fails, 2 on input
errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import channels, glu_standard, gfs_cm, jw_fock, locc_sim, slocc
from .errors import FermiGaussError

SCHEMA_VERSION = 1


class InputError(Exception):
    """Raised for unusable command-line input."""


# ------------------------------------------------------------------- output

def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    return obj


def _emit(obj) -> str:
    if isinstance(obj, dict):
        items = sorted(obj.items())
        return "{" + ", ".join(f"{json.dumps(k)}: {_emit(v)}" for k, v in items) + "}"
    if isinstance(obj, list):
        return "[" + ", ".join(_emit(v) for v in obj) + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return "null"
        return format(obj, ".17g")
    return json.dumps(obj)


def dumps(obj) -> str:
    """Deterministic JSON: sorted keys, floats with 17 significant digits."""
    return _emit(_plain(obj))


# -------------------------------------------------------------------- input

def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc}") from exc


def _load_cm(path: str) -> gfs_cm.CovarianceMatrix:
    """A file holding either a CM (``gamma``) or a state (``amplitudes``/``density``)."""
    obj = _read_json(path)
    if not isinstance(obj, dict):
        raise InputError(f"{path}: expected a JSON object")
    if "gamma" in obj:
        return gfs_cm.CovarianceMatrix.from_json(obj)
    return jw_fock.cm_from_state(jw_fock.state_from_json(obj))


def _load_state(path: str) -> np.ndarray:
    obj = _read_json(path)
    if not isinstance(obj, dict):
        raise InputError(f"{path}: expected a JSON object")
    return jw_fock.state_from_json(obj)


def _complex(text: str) -> complex:
    try:
        return complex(text.strip().replace("i", "j"))
    except ValueError as exc:
        raise InputError(f"cannot parse {text!r} as a complex number") from exc


def _tol(args, default: float) -> float:
    return default if args.tol is None else args.tol


# ----------------------------------------------------------------- commands

def cmd_validate(args):
    report = gfs_cm.validate_cm(_load_cm(args.input))
    return report.to_json(), report.physical


def cmd_standard_form(args):
    res = glu_standard.standard_form(_load_cm(args.input), allow_z_flips=not args.no_z_flips)
    return res.to_json(), True


def cmd_equivalent(args):
    g1, g2 = _load_cm(args.first), _load_cm(args.second)
    flips = not args.no_z_flips
    if g1.modes != g2.modes:
        return {"equivalent": False, "distance": None}, False
    dist = glu_standard.standard_form_distance(g1, g2, allow_z_flips=flips)
    ok = dist < _tol(args, 1e-7)
    return {"equivalent": ok, "distance": dist}, ok


def cmd_classify(args):
    if args.modes == 3:
        if args.input is None:
            raise InputError("classify --modes 3 needs a state file")
        label = slocc.classify_3mode(_load_state(args.input))
    elif args.modes == 4:
        if args.family is None:
            raise InputError("classify --modes 4 needs --family")
        params = [_complex(p) for p in args.params.split(",")] if args.params else []
        label = slocc.classify_4mode_seed(params, args.family, tol=_tol(args, 1e-9))
    else:
        raise InputError("classify supports --modes 3 or 4")
    return label.to_json(), True


def cmd_gaussianity(args):
    x = _load_state(args.input)
    tol = args.tol
    if x.ndim == 1:
        ok = jw_fock.is_gaussian_pure(x, **({} if tol is None else {"tol": tol}))
        test = "lambda_pure"
    else:
        ok = jw_fock.is_gaussian_operator(x, **({} if tol is None else {"tol": tol}))
        test = "lambda_operator"
    return {"gaussian": ok, "test": test}, ok


def cmd_apply_channel(args):
    ch = channels.GaussianChannel.from_json(_read_json(args.channel))
    out = channels.apply_channel_cm(ch, _load_cm(args.input))
    result = out.to_json()
    if args.probe:
        rng = np.random.default_rng(args.seed)
        result["probe"] = channels.gsep_triviality_probe(ch, args.probe, rng).to_json()
    return result, True


def cmd_simulate_protocol(args):
    psi = _load_state(args.input)
    proto = locc_sim.protocol_from_json(_read_json(args.protocol))
    branches = locc_sim.run_protocol(psi, proto)
    result = {"branches": [{"probability": b.probability, "transcript": list(b.transcript),
                            "state": jw_fock.state_to_json(b.state)} for b in branches],
              "rounds": len(proto.rounds), "protocol_class": "finite-round FLOCC'"}
    if args.target is None:
        return result, True
    ok = locc_sim.verify_deterministic(psi, _load_state(args.target), proto,
                                       tol=_tol(args, 1e-9), mode=args.mode)
    result["deterministic"] = ok
    return result, ok


def cmd_normal_form(args):
    trace = slocc.normal_form_iterate(_load_state(args.input), max_iter=args.max_iter,
                                      tol=_tol(args, 1e-10))
    return trace.to_json(), True


def cmd_separability(args):
    cm = _load_cm(args.input)
    labels = tuple(s.strip() for s in args.partition.split(","))
    part = gfs_cm.Bipartition(labels)
    eps = _tol(args, gfs_cm.EPS_DEG)
    ok = gfs_cm.is_s2pi_separable_cm(cm, part, eps=eps)
    return {"s2pi_separable": ok, "correlation_rank": gfs_cm.correlation_rank(cm, part, eps=eps)}, ok


def _read_manifest(path: str) -> list:
    text = Path(path).read_text() if path != "-" else sys.stdin.read()
    text = text.strip()
    if not text:
        return []
    if text.startswith("["):
        return json.loads(text)
    return [json.loads(line) for line in text.splitlines() if line.strip()]


_BATCH = threading.local()


def _in_batch() -> bool:
    return getattr(_BATCH, "active", False)


def _batch_row(index: int, row) -> dict:
    try:
        if not isinstance(row, dict) or "command" not in row:
            raise InputError("row must be an object with 'command' and 'args'")
        argv = [str(row["command"])] + [str(a) for a in row.get("args", [])]
        _BATCH.active = True
        code, result = execute(argv)
        return {"row": index, "exit_code": code, "result": result}
    except (InputError, FermiGaussError, OSError, KeyError, TypeError, ValueError) as exc:
        return {"row": index, "exit_code": 2, "error": {"type": type(exc).__name__, "message": str(exc)}}


def cmd_batch(args):
    try:
        rows = _read_manifest(args.manifest)
    except OSError as exc:
        raise InputError(f"cannot read manifest: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed manifest: {exc}") from exc
    if not isinstance(rows, list):
        raise InputError("manifest must be a JSON list or JSON lines")
    with ThreadPoolExecutor(max_workers=max(1, args.workers)) as pool:
        report = list(pool.map(_batch_row, range(len(rows)), rows))
    lines = "".join(dumps(r) + "\n" for r in report)
    if args.output:
        Path(args.output).write_text(lines)
    else:
        sys.stdout.write(lines)
    failed = sum(1 for r in report if r["exit_code"] == 2)
    return {"rows": len(report), "errors": failed, "output": args.output}, True


# ------------------------------------------------------------------ parsing

def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    env = os.environ.get("FERMI_GAUSS_TOL")
    default = argparse.SUPPRESS if suppress else (float(env) if env else None)
    parser.add_argument("--tol", type=float, default=default,
                        help="tolerance override (env FERMI_GAUSS_TOL)")
    parser.add_argument("--no-z-flips", action="store_true",
                        default=argparse.SUPPRESS if suppress else False,
                        help="canonicalize with rotations only")
    parser.add_argument("--seed", type=int, default=argparse.SUPPRESS if suppress else None,
                        help="RNG seed for sampling commands")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fermigauss", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
        return p

    add("validate", cmd_validate, "antisymmetry, physicality, purity").add_argument("input")
    add("standard-form", cmd_standard_form, "canonical GLU representative").add_argument("input")
    p = add("equivalent", cmd_equivalent, "GLU equivalence of two CMs or states")
    p.add_argument("first")
    p.add_argument("second")
    p = add("classify", cmd_classify, "GSLOCC class label")
    p.add_argument("input", nargs="?")
    p.add_argument("--modes", type=int, required=True)
    p.add_argument("--family", choices=slocc.FAMILIES)
    p.add_argument("--params", help="comma separated, e.g. 1,2,1j")
    add("gaussianity", cmd_gaussianity, "Gaussianity of a state").add_argument("input")
    p = add("apply-channel", cmd_apply_channel, "apply a Gaussian channel to a CM")
    p.add_argument("channel")
    p.add_argument("input")
    p.add_argument("--probe", type=int, default=0, metavar="N",
                   help="also run the separable-channel probe with N samples")
    p = add("simulate-protocol", cmd_simulate_protocol, "expand a local measurement protocol")
    p.add_argument("input")
    p.add_argument("protocol")
    p.add_argument("--target")
    p.add_argument("--mode", choices=("exact", "glu", "both"), default="both")
    p = add("normal-form", cmd_normal_form, "iterate towards a critical state")
    p.add_argument("input")
    p.add_argument("--max-iter", type=int, default=1000)
    p = add("separability", cmd_separability, "direct-sum separability across parties")
    p.add_argument("input")
    p.add_argument("--partition", required=True, help="party label per mode, e.g. A,A,B")
    p = add("batch", cmd_batch, "run a manifest of commands, one JSON line per row")
    p.add_argument("manifest")
    p.add_argument("--output")
    p.add_argument("--workers", type=int, default=1)
    return parser


def _parse(argv) -> argparse.Namespace:
    parser = build_parser()

    def fail(message):
        raise InputError(message)

    parser.error = fail
    for action in parser._subparsers._group_actions:
        for p in action.choices.values():
            p.error = fail
    return parser.parse_args(argv)


def execute(argv) -> tuple[int, dict]:
    """Parse and run one command; returns ``(exit_code, result)`` without printing."""
    args = _parse(argv)
    if args.command == "batch" and _in_batch():
        raise InputError("nested batch is not allowed")
    result, ok = args.func(args)
    result = dict(result)
    result["schema_version"] = SCHEMA_VERSION
    result["command"] = args.command
    return (0 if ok else 1), result


def run(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        code, result = execute(argv)
    except SystemExit as exc:          # --help
        return int(exc.code or 0)
    except (InputError, FermiGaussError, KeyError, TypeError, ValueError, OSError) as exc:
        msg = f"{type(exc).__name__}: {exc}"
        print(f"fermigauss: error: {msg}", file=sys.stderr)
        print(dumps({"error": {"type": type(exc).__name__, "message": str(exc)},
                     "schema_version": SCHEMA_VERSION}))
        return 2
    # batch writes its own JSON lines to stdout unless --output is given
    if result["command"] != "batch" or result.get("output"):
        print(dumps(result))
    return code


def main() -> None:
    sys.exit(run())
