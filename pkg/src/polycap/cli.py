"""Command-line interface.

Exit codes: 0 success, 2 invalid input, 3 budget refusal, 1 numerical or
internal failure.  Reports are JSON (default) or a flat text view, and
always echo the run configuration.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .bounds import coefficient_bounds, permanent_lower_bound
from .capacity import approximate_coefficient, capacity, improved_approximate, sinkhorn_scale
from .errors import BudgetError, PolycapError, ValidationError
from .exact import mixed_discriminant_exact, permanent_exact
from .hyperbolicity import (
    af_inequality_check,
    check_pos_hyperbolic,
    newton_inequalities,
    restriction_roots,
)
from .io import jsonable, load_input, to_oracle
from .polynomials import HermitianTuple, NonnegativeMatrix
from .structure import (
    SupportFunction,
    detect_decomposition,
    in_newton_polytope,
    in_support,
    is_indecomposable,
)

EXIT_OK, EXIT_INTERNAL, EXIT_INVALID, EXIT_BUDGET = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _positive_int(text):
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return v


def _vector(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="polycap", description="Capacity of polynomials and permanent bounds.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--seed", type=int, default=42)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    def add(name, help_text, needs_input=True):
        sp = sub.add_parser(name, help=help_text, parents=[common])
        if needs_input:
            sp.add_argument("--input", required=True, help="JSON matrix, tuple or sparse file")
        return sp

    sp = add("capacity", "capacity of the input polynomial")
    sp.add_argument("--tol", type=_positive_float, default=1e-6)
    add("scale", "Sinkhorn scaling of a matrix").add_argument("--tol", type=_positive_float, default=1e-10)
    sp = add("approx-coef", "approximate the mixed coefficient")
    sp.add_argument("--improve", type=int, default=None, metavar="M")
    sp = add("perm-bounds", "certified bracket for the permanent / mixed coefficient")
    sp.add_argument("--ordering", choices=("identity", "best"), default="best")
    sp.add_argument("--tol", type=_positive_float, default=1e-8)
    add("exact", "exact permanent or mixed discriminant").add_argument(
        "--what", choices=("permanent", "mixed-disc"), default=None)
    add("support", "support degrees and support membership").add_argument(
        "--r", type=_vector, default=None, help="exponent vector, e.g. 1,1,2,0")
    add("newton", "Newton polytope membership").add_argument("--point", type=_vector, required=True)
    add("indecomposable", "indecomposability and block decomposition")
    sp = add("check", "sampled hyperbolicity, Alexandrov-Fenchel or Newton checks")
    sp.add_argument("--kind", choices=("pos-hyperbolic", "af", "newton"), default="pos-hyperbolic")
    sp.add_argument("--trials", type=_positive_int, default=200)
    sp = add("verify", "run the acceptance suite", needs_input=False)
    sp.add_argument("--level", choices=("quick", "full"), default="quick")
    return parser


def _config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k != "format"}
    return dict(sorted(cfg.items()))


def _cmd_capacity(args, obj):
    return capacity(to_oracle(obj), args.tol).to_dict()


def _cmd_scale(args, obj):
    if not isinstance(obj, NonnegativeMatrix):
        raise ValidationError("scale needs a matrix input")
    return sinkhorn_scale(obj, args.tol).to_dict()


def _cmd_approx(args, obj):
    p = to_oracle(obj)
    res = approximate_coefficient(p) if args.improve is None else improved_approximate(p, args.improve)
    return res.to_dict()


def _cmd_bounds(args, obj):
    if isinstance(obj, NonnegativeMatrix):
        return permanent_lower_bound(obj, args.ordering, tol=args.tol).to_dict()
    return coefficient_bounds(to_oracle(obj), args.ordering, tol=args.tol).to_dict()


def _cmd_exact(args, obj):
    what = args.what or ("permanent" if isinstance(obj, NonnegativeMatrix) else "mixed-disc")
    if what == "permanent":
        if not isinstance(obj, NonnegativeMatrix):
            raise ValidationError("permanent needs a matrix input")
        res = permanent_exact(obj)
    else:
        if not isinstance(obj, HermitianTuple):
            raise ValidationError("mixed-disc needs a tuple input")
        res = mixed_discriminant_exact(obj)
    return {"value": str(res.value), "float": float(res.value), "method": res.method, "what": what}


def _cmd_support(args, obj):
    p = to_oracle(obj)
    S = SupportFunction.from_oracle(p)
    out = {"singletons": [S.value([i]) for i in range(p.num_vars)]}
    if args.r is not None:
        if any(v != int(v) for v in args.r):
            raise ValidationError("--r must contain integers")
        out["in_support"] = in_support(p, [int(v) for v in args.r], S=S).to_dict()
    return out


def _cmd_newton(args, obj):
    return in_newton_polytope(to_oracle(obj), args.point).to_dict()


def _cmd_indecomposable(args, obj):
    p = to_oracle(obj)
    verdict = is_indecomposable(p)
    dec = None if verdict.holds else detect_decomposition(p, seed=args.seed)
    return {"indecomposable": verdict.to_dict(), "decomposition": dec.to_dict() if dec else None}


def _cmd_check(args, obj):
    p = to_oracle(obj)
    if args.kind == "pos-hyperbolic":
        return check_pos_hyperbolic(p, args.trials, args.seed).to_dict()
    if args.kind == "af":
        return af_inequality_check(p, args.trials, args.seed).to_dict()
    seen = bad = 0
    first = None
    for i in range(args.trials):
        rng = np.random.default_rng(args.seed ^ i)
        X = rng.normal(size=p.num_vars)
        rep = restriction_roots(p, X)
        if rep.all_real:
            seen += 1
            if not newton_inequalities(rep.coefficients).nis_hold:
                bad += 1
                first = first or X.tolist()
    return {"passed": bad == 0, "real_rooted_restrictions": seen, "violations": bad, "counterexample": first,
            "trials": args.trials, "seed": args.seed}


def _cmd_verify(args):
    from .verify import run_all

    results = run_all(args.level)
    return {"level": args.level, "passed": all(r.passed for r in results),
            "criteria": [r.to_dict() for r in results]}


COMMANDS = {
    "capacity": _cmd_capacity,
    "scale": _cmd_scale,
    "approx-coef": _cmd_approx,
    "perm-bounds": _cmd_bounds,
    "exact": _cmd_exact,
    "support": _cmd_support,
    "newton": _cmd_newton,
    "indecomposable": _cmd_indecomposable,
    "check": _cmd_check,
}


def _text(value, prefix=""):
    lines = []
    if isinstance(value, dict):
        for k, v in value.items():
            lines.extend(_text(v, f"{prefix}{k}." if isinstance(v, (dict,)) else f"{prefix}{k}"))
    elif isinstance(value, list) and value and isinstance(value[0], dict):
        for i, v in enumerate(value):
            lines.extend(_text(v, f"{prefix}[{i}]."))
    else:
        lines.append(f"{prefix.rstrip('.')}: {value}")
    return lines


def _emit(report, fmt, stream):
    report = jsonable(report)
    if fmt == "json":
        stream.write(json.dumps(report, sort_keys=True, indent=2) + "\n")
    else:
        stream.write("\n".join(_text(report)) + "\n")


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(stderr)
        return EXIT_INVALID
    try:
        if args.command == "verify":
            result = _cmd_verify(args)
            code = EXIT_OK if result["passed"] else EXIT_INTERNAL
            if args.format == "text":
                from .verify import CriterionResult

                for c in result["criteria"]:
                    stdout.write(CriterionResult(**c).line() + "\n")
                return code
        else:
            obj = load_input(args.input)
            result = COMMANDS[args.command](args, obj)
            code = EXIT_OK
    except ValidationError as exc:
        stderr.write(f"invalid input: {exc}\n")
        return EXIT_INVALID
    except BudgetError as exc:
        stderr.write(f"budget exceeded: {exc}\n")
        return EXIT_BUDGET
    except (PolycapError, ArithmeticError, np.linalg.LinAlgError) as exc:
        stderr.write(f"numerical failure: {exc}\n")
        return EXIT_INTERNAL
    _emit({"config": _config(args), "result": result}, args.format, stdout)
    return code


def main(argv=None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
