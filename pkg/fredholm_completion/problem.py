"""
Problem files and output formatting.

A problem file (JSON or YAML) names the diagonal operators D_1..D_n either as
model-operator descriptors or as raw FredholmData triples, plus optional
defaults for lambda, target, corollary and grid:

    {"n": 2,
     "diagonals": [{"kind": "fwd_shift", "mult": "inf"},
                   {"kind": "bwd_shift", "mult": "inf"}],
     "lambda": [0, 0],
     "target": "fredholm"}

Decimal numbers are read as exact rationals: "0.05" means 1/20.
"""

import json
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import yaml

from .construct import CompletionCertificate, certificate_from_json
from .errors import ArityMismatch, FredholmError, ParseError
from .extmath import ComplexRational, fraction_to_json, parse_complex
from .fredholm import FredholmData
from .header import logger
from .models import ModelOp, model_to_json, parse_model, point_data

YAML_SUFFIXES = (".yaml", ".yml")


class _ExactLoader(yaml.SafeLoader):
    """SafeLoader that keeps floats as their decimal text."""


_ExactLoader.add_constructor(
    "tag:yaml.org,2002:float", lambda loader, node: loader.construct_scalar(node)
)


def load_data(path) -> Any:
    """Read a JSON or YAML document, chosen by file extension."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc}", source=path) from exc
    try:
        if path.suffix.lower() in YAML_SUFFIXES:
            return yaml.load(text, Loader=_ExactLoader)
        return json.loads(text, parse_float=str)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ParseError(f"malformed document: {exc}", source=path) from exc


@dataclass
class ProblemFile:
    n: int
    models: Optional[List[ModelOp]] = None
    triples: Optional[List[FredholmData]] = None
    lam: Optional[ComplexRational] = None
    target: Optional[str] = None
    corollary: Optional[str] = None
    grid: Optional[str] = None
    source: Optional[str] = None

    @property
    def has_models(self) -> bool:
        return self.models is not None

    def require_models(self, command: str) -> List[ModelOp]:
        if self.models is None:
            raise ParseError(f"'{command}' needs model-operator diagonals; raw triples permit decide only",
                             source=self.source)
        return self.models

    def point_data(self, lam=None) -> List[FredholmData]:
        if self.triples is not None:
            return list(self.triples)
        lam = self.lam if lam is None else parse_complex(lam)
        if lam is None:
            raise ParseError("no lambda given on the command line or in the problem file", source=self.source)
        return [point_data(op, lam) for op in self.models]

    def to_json(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"n": self.n}
        if self.models is not None:
            out["diagonals"] = [model_to_json(op) for op in self.models]
        else:
            out["diagonals"] = [fd.to_json() for fd in self.triples]
        if self.lam is not None:
            out["lambda"] = self.lam.to_json()
        for key in ("target", "corollary", "grid"):
            if getattr(self, key) is not None:
                out[key] = getattr(self, key)
        return out


def _is_triple(item) -> bool:
    if isinstance(item, (list, tuple)):
        return len(item) == 3
    return isinstance(item, dict) and "alpha" in item and "kind" not in item


def parse_problem(data: Any, source=None) -> ProblemFile:
    if not isinstance(data, dict):
        raise ParseError("problem must be an object", source=source)
    items = data.get("diagonals")
    if not isinstance(items, list) or not items:
        raise ParseError("'diagonals' must be a non-empty list", source=source)
    n = data.get("n", len(items))
    if not isinstance(n, int) or isinstance(n, bool):
        raise ParseError(f"'n' must be an integer, got {n!r}", source=source)
    if n != len(items):
        raise ArityMismatch(f"{source or 'problem'}: n={n} but {len(items)} diagonals given")
    if n < 2:
        raise ArityMismatch(f"{source or 'problem'}: need at least two diagonals")

    kinds = {_is_triple(item) for item in items}
    if len(kinds) != 1:
        raise ParseError("diagonals mix model descriptors and raw triples", source=source)
    try:
        if kinds == {True}:
            problem = ProblemFile(n, triples=[FredholmData.from_json(item) for item in items])
        else:
            problem = ProblemFile(n, models=[parse_model(item) for item in items])
        if data.get("lambda") is not None:
            problem.lam = parse_complex(data["lambda"])
    except ParseError as exc:
        raise ParseError(str(exc), source=source) from exc
    problem.target = data.get("target")
    problem.corollary = data.get("corollary")
    problem.grid = data.get("grid")
    problem.source = None if source is None else str(source)
    logger.debug("loaded problem with %d %s", n, "models" if problem.has_models else "triples")
    return problem


def load_problem(path) -> ProblemFile:
    return parse_problem(load_data(path), source=path)


def load_certificate(path) -> CompletionCertificate:
    data = load_data(path)
    if not isinstance(data, dict):
        raise ParseError("certificate must be an object", source=path)
    try:
        return certificate_from_json(data)
    except (FredholmError, ValueError) as exc:
        raise ParseError(str(exc), source=path) from exc


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


class _FredholmEncoder(json.JSONEncoder):
    """JSON encoder for exact scalars, extended naturals and report objects."""

    def default(self, obj):
        if hasattr(obj, "to_json"):
            return obj.to_json()
        if isinstance(obj, Fraction):
            return fraction_to_json(obj)
        if isinstance(obj, Enum):
            return obj.value
        if isinstance(obj, np.generic):
            return obj.item()
        return super().default(obj)


def format_json(data) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False, cls=_FredholmEncoder)


def format_yaml(data) -> str:
    plain = json.loads(format_json(data))
    return yaml.dump(plain, default_flow_style=False, sort_keys=False, allow_unicode=True, width=120)


def format_output(data, fmt: str = "json") -> str:
    if fmt == "yaml":
        return format_yaml(data)
    return format_json(data) + "\n"


__all__ = [
    "ProblemFile",
    "load_data",
    "load_problem",
    "parse_problem",
    "load_certificate",
    "format_json",
    "format_yaml",
    "format_output",
]
