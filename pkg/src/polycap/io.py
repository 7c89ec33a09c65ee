"""JSON input files.

matrix: {"kind": "matrix", "n": N, "entries": [[...], ...]}
tuple:  {"kind": "tuple", "n": N, "matrices": [{"re": [[...]], "im": [[...]]}, ...]}
sparse: {"kind": "sparse", "n": degree, "m": num_vars, "terms": [{"exp": [...], "coef": c}, ...]}

Numbers may be JSON numbers or strings such as "1/3"; integer and string
entries keep exact arithmetic available.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .polynomials import (
    HermitianTuple,
    NonnegativeMatrix,
    PolynomialOracle,
    SparsePolynomial,
    build_determinantal,
    build_multilinear,
)


def parse_document(doc) -> object:
    """NonnegativeMatrix, HermitianTuple or SparsePolynomial from a decoded document."""
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ValidationError("input must be a JSON object with a 'kind' field")
    kind = doc["kind"]
    try:
        if kind == "matrix":
            obj = NonnegativeMatrix(doc["entries"])
            _check_n(doc, obj.n)
            return obj
        if kind == "tuple":
            obj = HermitianTuple.from_parts(doc["matrices"])
            _check_n(doc, obj.n)
            return obj
        if kind == "sparse":
            m, n = int(doc["m"]), int(doc["n"])
            terms = {}
            for t in doc["terms"]:
                exp = tuple(int(e) for e in t["exp"])
                if exp in terms:
                    raise ValidationError(f"duplicate exponent {list(exp)}")
                terms[exp] = t["coef"]
            return SparsePolynomial(m, n, terms)
    except KeyError as exc:
        raise ValidationError(f"{kind} input is missing field {exc}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"malformed {kind} input: {exc}") from exc
    raise ValidationError(f"unknown kind {kind!r} (expected matrix, tuple or sparse)")


def _check_n(doc, n):
    if "n" in doc and int(doc["n"]) != n:
        raise ValidationError(f"declared n = {doc['n']} but data has size {n}")


def load_input(path) -> object:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from exc
    return parse_document(doc)


def to_oracle(obj) -> PolynomialOracle:
    if isinstance(obj, NonnegativeMatrix):
        return build_multilinear(obj)
    if isinstance(obj, HermitianTuple):
        return build_determinantal(obj)
    if isinstance(obj, PolynomialOracle):
        return obj
    raise ValidationError(f"cannot build a polynomial from {type(obj).__name__}")


def jsonable(value):
    """Recursively convert numpy and Fraction values for json.dumps."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        value = float(value)
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def matrix_document(entries) -> dict:
    def cell(v):
        if isinstance(v, Fraction):
            return str(v) if v.denominator != 1 else int(v)
        return v if isinstance(v, (int, str)) else float(v)

    entries = [[cell(v) for v in row] for row in entries]
    return {"kind": "matrix", "n": len(entries), "entries": entries}
