"""
Ordered K0-group models with exact arithmetic.

Four variants are supported:

- simplicial Z^k (multi-matrix algebras), ordered componentwise
- dyadic rationals Z[1/2] (the 2^infinity UHF tower), totally ordered
- rationals Q, totally ordered
- the lexicographic pair Q (+) Z with positive cone {u > 0} u {(0, 0)}

Dyadic, rational and lex values are stored as fractions.Fraction so nothing
is ever rounded. Q^k and Q^k (+) Z are not separate variants; the lex pair is
the only one needed for the non-semicontinuity example.
"""

import logging
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Tuple, Union

from .errors import DocumentError, NotInDomainError, VariantMismatchError

logger = logging.getLogger(__name__)

Number = Union[int, Fraction, str]


class Variant(str, Enum):
    SIMPLICIAL = "simplicial"
    DYADIC = "dyadic"
    RATIONAL = "rational"
    LEX_PAIR = "lex_pair"


def is_dyadic(x: Fraction) -> bool:
    d = x.denominator
    return d & (d - 1) == 0


class K0Class:
    """Base class for an element of one of the ordered group models."""

    variant: Variant

    def __add__(self, other: "K0Class") -> "K0Class":
        return add(self, other)

    def __sub__(self, other: "K0Class") -> "K0Class":
        return sub(self, other)

    def __neg__(self) -> "K0Class":
        return scale(self, -1)

    def __le__(self, other: "K0Class") -> bool:
        return leq(self, other)

    def __ge__(self, other: "K0Class") -> bool:
        return leq(other, self)

    def __lt__(self, other: "K0Class") -> bool:
        return leq(self, other) and self != other

    def __gt__(self, other: "K0Class") -> bool:
        return leq(other, self) and self != other

    def __str__(self) -> str:
        return format_class(self)


@dataclass(frozen=True, eq=True)
class SimplicialClass(K0Class):
    coords: Tuple[int, ...]

    variant = Variant.SIMPLICIAL

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))

    @property
    def rank(self) -> int:
        return len(self.coords)


@dataclass(frozen=True, eq=True)
class DyadicClass(K0Class):
    value: Fraction

    variant = Variant.DYADIC

    def __post_init__(self):
        value = Fraction(self.value)
        if not is_dyadic(value):
            raise NotInDomainError(f"{value} is not a dyadic rational")
        object.__setattr__(self, "value", value)

    @property
    def exponent(self) -> int:
        """e in m/2^e with m odd (0 for integers)."""
        return self.value.denominator.bit_length() - 1


@dataclass(frozen=True, eq=True)
class RationalClass(K0Class):
    value: Fraction

    variant = Variant.RATIONAL

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))


@dataclass(frozen=True, eq=True)
class LexClass(K0Class):
    u: Fraction
    v: int

    variant = Variant.LEX_PAIR

    def __post_init__(self):
        object.__setattr__(self, "u", Fraction(self.u))
        if isinstance(self.v, Fraction) and self.v.denominator != 1:
            raise NotInDomainError(f"lex pair second coordinate must be an integer, got {self.v}")
        object.__setattr__(self, "v", int(self.v))


def _check_same(g: K0Class, h: K0Class) -> None:
    if type(g) is not type(h):
        raise VariantMismatchError(f"cannot combine {g.variant.value} with {h.variant.value}")
    if isinstance(g, SimplicialClass) and g.rank != h.rank:
        raise VariantMismatchError(f"simplicial ranks differ: {g.rank} vs {h.rank}")


def add(g: K0Class, h: K0Class) -> K0Class:
    _check_same(g, h)
    if isinstance(g, SimplicialClass):
        return SimplicialClass(tuple(x + y for x, y in zip(g.coords, h.coords)))
    if isinstance(g, LexClass):
        return LexClass(g.u + h.u, g.v + h.v)
    return type(g)(g.value + h.value)


def sub(g: K0Class, h: K0Class) -> K0Class:
    return add(g, scale(h, -1))


def scale(g: K0Class, n: int) -> K0Class:
    """Integer multiple n*g."""
    if isinstance(g, SimplicialClass):
        return SimplicialClass(tuple(n * x for x in g.coords))
    if isinstance(g, LexClass):
        return LexClass(n * g.u, n * g.v)
    return type(g)(n * g.value)


def zero_like(g: K0Class) -> K0Class:
    return scale(g, 0)


def is_positive(g: K0Class) -> bool:
    """Membership in the positive cone."""
    if isinstance(g, SimplicialClass):
        return all(x >= 0 for x in g.coords)
    if isinstance(g, LexClass):
        return g.u > 0 or (g.u == 0 and g.v == 0)
    return g.value >= 0


def leq(g: K0Class, h: K0Class) -> bool:
    """g <= h iff h - g lies in the positive cone."""
    _check_same(g, h)
    return is_positive(sub(h, g))


@dataclass(frozen=True)
class OrderedGroupSpec:
    """An ordered group (G, G+, u) with a fixed order unit."""

    variant: Variant
    order_unit: K0Class

    def __post_init__(self):
        if self.order_unit.variant != self.variant:
            raise VariantMismatchError("order unit belongs to another variant")
        if not is_positive(self.order_unit) or self.order_unit == zero_like(self.order_unit):
            raise NotInDomainError("order unit must be positive and nonzero")

    def accepts(self, g: K0Class) -> bool:
        if g.variant != self.variant:
            return False
        if isinstance(g, SimplicialClass):
            return g.rank == self.order_unit.rank
        return True


def simplicial_spec(block_sizes: Sequence[int]) -> OrderedGroupSpec:
    return OrderedGroupSpec(Variant.SIMPLICIAL, SimplicialClass(tuple(block_sizes)))


DYADIC_SPEC = OrderedGroupSpec(Variant.DYADIC, DyadicClass(Fraction(1)))
RATIONAL_SPEC = OrderedGroupSpec(Variant.RATIONAL, RationalClass(Fraction(1)))
LEX_PAIR_SPEC = OrderedGroupSpec(Variant.LEX_PAIR, LexClass(Fraction(1), 0))


def in_dimension_range(algebra, g: K0Class) -> bool:
    """True iff g is the class of a projection of the algebra itself: 0 <= g_i <= n_i."""
    sizes = tuple(algebra.block_sizes)
    if not isinstance(g, SimplicialClass) or g.rank != len(sizes):
        raise VariantMismatchError(f"expected a simplicial class of rank {len(sizes)}")
    return all(0 <= x <= n for x, n in zip(g.coords, sizes))


def is_infinitesimal(spec: OrderedGroupSpec, g: K0Class) -> bool:
    """Closed form of -mu <= ng <= mu for all m, n > 0."""
    if not spec.accepts(g):
        raise VariantMismatchError(f"{g} is not an element of the {spec.variant.value} group")
    if isinstance(g, LexClass):
        # Inf = 0 (+) Z
        return g.u == 0
    return g == zero_like(g)


def is_infinitesimal_bounded(spec: OrderedGroupSpec, g: K0Class, bound: int = 50) -> bool:
    """Check -mu <= ng <= mu literally for all 1 <= m, n <= bound."""
    if not spec.accepts(g):
        raise VariantMismatchError(f"{g} is not an element of the {spec.variant.value} group")
    u = spec.order_unit
    for n in range(1, bound + 1):
        ng = scale(g, n)
        for m in range(1, bound + 1):
            if not (leq(scale(u, -m), ng) and leq(ng, scale(u, m))):
                return False
    return True


def lex_state(g: LexClass) -> Fraction:
    """The unique state of the lex group normalized at (1, 0): (u, v) -> u."""
    if not isinstance(g, LexClass):
        raise VariantMismatchError("lex_state is defined on lex pairs only")
    return g.u


def format_fraction(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def format_dyadic(x: Fraction) -> str:
    e = x.denominator.bit_length() - 1
    return f"{x.numerator}/2^{e}"


def format_class(g: K0Class) -> str:
    if isinstance(g, SimplicialClass):
        return "(" + ",".join(str(x) for x in g.coords) + ")"
    if isinstance(g, DyadicClass):
        return format_dyadic(g.value)
    if isinstance(g, RationalClass):
        return format_fraction(g.value)
    return f"({format_fraction(g.u)}; {g.v})"


_DYADIC_RE = re.compile(r"^\s*([+-]?\d+)\s*/\s*2\s*\^\s*(\d+)\s*$")


def parse_fraction(text: Number) -> Fraction:
    """Parse "p/q", "m/2^e" or an integer into an exact Fraction."""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if not isinstance(text, str):
        raise DocumentError(f"exact numbers must be strings, got {text!r}")
    match = _DYADIC_RE.match(text)
    if match:
        return Fraction(int(match.group(1)), 2 ** int(match.group(2)))
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise DocumentError(f"not an exact number: {text!r}")


def _parse_coords(text: str) -> Iterable[str]:
    body = text.strip()
    if not (body.startswith("(") and body.endswith(")")):
        raise DocumentError(f"expected a parenthesized class, got {text!r}")
    return [part.strip() for part in body[1:-1].split(",") if part.strip()]


def parse_class(text: str, variant: Union[Variant, str]) -> K0Class:
    """Inverse of format_class."""
    variant = Variant(variant)
    try:
        if variant is Variant.SIMPLICIAL:
            return SimplicialClass(tuple(int(x) for x in _parse_coords(text)))
        if variant is Variant.DYADIC:
            return DyadicClass(parse_fraction(text))
        if variant is Variant.RATIONAL:
            return RationalClass(parse_fraction(text))
        body = text.strip()
        if not (body.startswith("(") and body.endswith(")")) or ";" not in body:
            raise DocumentError(f"expected '(p/q; v)', got {text!r}")
        u_text, v_text = body[1:-1].split(";", 1)
        return LexClass(parse_fraction(u_text), int(v_text.strip()))
    except (ValueError, NotInDomainError) as e:
        raise DocumentError(f"cannot parse {text!r} as a {variant.value} class: {e}")


def infer_variant(text: str) -> Optional[Variant]:
    """Best guess of the variant a rendered class belongs to."""
    body = text.strip()
    if body.startswith("("):
        return Variant.LEX_PAIR if ";" in body else Variant.SIMPLICIAL
    if "^" in body:
        return Variant.DYADIC
    return None
