"""
JSON input documents.

{
  "algebra": [3, 2],
  "element": [[[[re, im], ...], ...], ...],
  "k0_class": "(1,0)",
  "target_function": {"domain": "dyadic", "breakpoints": ["0/2^0", "1/2^1"], "values": [1.0, 0.5]},
  "seed": 0,
  "trials": 100
}

Every key is optional. Exact numbers are strings ("m/2^e" or "p/q") so dyadic
and rational points are never rounded through floats.
"""

import json
import logging
import os
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import numpy as np

from .algebra import AlgebraElement, MultiMatrixAlgebra
from .errors import DocumentError, SVFError
from .k0_order import K0Class, Variant, format_class, infer_variant, parse_class, parse_fraction
from .stepfn import (
    DYADICS,
    RATIONALS,
    DomainKind,
    ScalarDomain,
    TargetFunction,
    constant_target,
    finite_grid,
    indicator_target,
    linear_target,
    reciprocal_target,
    step_target,
)

logger = logging.getLogger(__name__)

NAMED_TARGETS = ("constant", "one_minus_t", "reciprocal", "indicator")


@dataclass(frozen=True, eq=False)
class Document:
    algebra: Optional[MultiMatrixAlgebra] = None
    element: Optional[AlgebraElement] = None
    k0_class: Optional[K0Class] = None
    target: Optional[TargetFunction] = None
    seed: Optional[int] = None
    trials: Optional[int] = None


def _parse_algebra(raw: Any) -> MultiMatrixAlgebra:
    if not isinstance(raw, list) or not all(isinstance(n, int) and not isinstance(n, bool) for n in raw):
        raise DocumentError(f"'algebra' must be a list of block sizes, got {raw!r}")
    return MultiMatrixAlgebra(tuple(raw))


def _parse_entry(raw: Any) -> complex:
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        return complex(raw)
    if isinstance(raw, list) and len(raw) == 2 and all(isinstance(x, (int, float)) for x in raw):
        return complex(raw[0], raw[1])
    raise DocumentError(f"matrix entries must be [re, im] pairs, got {raw!r}")


def _parse_element(algebra: MultiMatrixAlgebra, raw: Any) -> AlgebraElement:
    if not isinstance(raw, list):
        raise DocumentError("'element' must be a list of blocks")
    blocks = []
    for block in raw:
        if not isinstance(block, list) or not all(isinstance(row, list) for row in block):
            raise DocumentError("each block must be a list of rows")
        blocks.append(np.array([[_parse_entry(x) for x in row] for row in block], dtype=np.complex128))
    return algebra.element(blocks)


def _parse_class(raw: Any, variant: Optional[str]) -> K0Class:
    if not isinstance(raw, str):
        raise DocumentError(f"'k0_class' must be a string, got {raw!r}")
    # "m/2^e" reads as dyadic, a bare "p/q" as rational unless k0_variant says otherwise
    return parse_class(raw, variant or infer_variant(raw) or Variant.RATIONAL)


def _parse_domain(raw: Any) -> ScalarDomain:
    if raw is None or raw == "dyadic":
        return DYADICS
    if raw == "rational":
        return RATIONALS
    if isinstance(raw, dict) and isinstance(raw.get("grid"), list):
        return finite_grid([parse_fraction(x) for x in raw["grid"]])
    raise DocumentError(f"unknown target domain {raw!r}")


def _parse_target(raw: Any) -> TargetFunction:
    if not isinstance(raw, dict):
        raise DocumentError("'target_function' must be an object")
    domain = _parse_domain(raw.get("domain"))
    name = raw.get("name")
    if name is None:
        breakpoints = raw.get("breakpoints")
        values = raw.get("values")
        if not isinstance(breakpoints, list) or not isinstance(values, list):
            raise DocumentError("a step target needs 'breakpoints' and 'values' lists")
        return step_target([parse_fraction(x) for x in breakpoints], [float(v) for v in values], domain)
    if name == "constant":
        return constant_target(float(raw.get("value", 1.0)), domain)
    if name == "one_minus_t":
        return linear_target(domain)
    if name == "reciprocal":
        return reciprocal_target(domain)
    if name == "indicator":
        return indicator_target(parse_fraction(raw.get("cut", "1")), float(raw.get("height", 1.0)), domain)
    raise DocumentError(f"unknown target function {name!r}; expected one of {', '.join(NAMED_TARGETS)}")


def _optional_int(data: Dict[str, Any], key: str) -> Optional[int]:
    value = data.get(key)
    if value is not None and (not isinstance(value, int) or isinstance(value, bool)):
        raise DocumentError(f"'{key}' must be an integer, got {value!r}")
    return value


def parse_document(data: Any) -> Document:
    """Build a Document from decoded JSON; any malformed part raises DocumentError."""
    if not isinstance(data, dict):
        raise DocumentError("a document is a JSON object")
    try:
        algebra = _parse_algebra(data["algebra"]) if "algebra" in data else None
        element = None
        if "element" in data:
            if algebra is None:
                raise DocumentError("'element' needs 'algebra'")
            element = _parse_element(algebra, data["element"])
        k0_class = None
        if "k0_class" in data:
            k0_class = _parse_class(data["k0_class"], data.get("k0_variant"))
        target = _parse_target(data["target_function"]) if "target_function" in data else None
    except DocumentError:
        raise
    except (SVFError, ValueError, TypeError) as e:
        raise DocumentError(f"malformed document: {e}")
    return Document(algebra, element, k0_class, target, _optional_int(data, "seed"), _optional_int(data, "trials"))


def _dump_entry(z: complex) -> List[float]:
    return [float(z.real), float(z.imag)]


def _dump_domain(domain: ScalarDomain) -> Any:
    if domain.kind is DomainKind.FINITE_GRID:
        return {"grid": [domain.format(x) for x in domain.grid]}
    return domain.kind.value


def dump_document(doc: Document) -> Dict[str, Any]:
    data: Dict[str, Any] = {}
    if doc.algebra is not None:
        data["algebra"] = list(doc.algebra.block_sizes)
    if doc.element is not None:
        data["element"] = [[[_dump_entry(z) for z in row] for row in block] for block in doc.element.blocks]
    if doc.k0_class is not None:
        data["k0_class"] = format_class(doc.k0_class)
        data["k0_variant"] = doc.k0_class.variant.value
    if doc.target is not None:
        data["target_function"] = {"domain": _dump_domain(doc.target.domain), **doc.target.source}
    if doc.seed is not None:
        data["seed"] = doc.seed
    if doc.trials is not None:
        data["trials"] = doc.trials
    return data


def load_document(file_path: str) -> Document:
    """Load and parse a JSON document."""
    if not os.path.exists(file_path):
        raise DocumentError(f"no such document: {file_path}")
    try:
        with open(file_path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise DocumentError(f"{file_path} is not valid JSON: {e}")
    except (OSError, UnicodeDecodeError) as e:
        raise DocumentError(f"cannot read {file_path}: {e}")
    logger.debug("Loaded document %s with keys %s", file_path, sorted(data) if isinstance(data, dict) else None)
    return parse_document(data)


def save_document(doc: Document, file_path: str) -> None:
    """Save a document as JSON."""
    with open(file_path, "w", encoding="utf-8") as f:
        json.dump(dump_document(doc), f, indent=2)
