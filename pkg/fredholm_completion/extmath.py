"""
Exact arithmetic used by every nullity, deficiency and index computation.

ExtNat is N with a single absorbing INF, ExtInt is Z with +INF and -INF.
ComplexRational is the exact scalar type of the symbolic layer: spectral
points, diagonal entries, shift factors and grid coordinates are all exact.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Optional

from .errors import BothInfinite, ParseError

INF_TOKEN = "inf"


@dataclass(frozen=True)
class ExtNat:
    """A value of N u {INF}. ``value`` is None for INF."""

    value: Optional[int]

    def __post_init__(self):
        if self.value is None:
            return
        if isinstance(self.value, bool) or not isinstance(self.value, int):
            raise ValueError(f"ExtNat needs an int or None, got {self.value!r}")
        if self.value < 0:
            raise ValueError(f"ExtNat cannot be negative: {self.value}")

    @property
    def is_inf(self):
        return self.value is None

    @property
    def is_finite(self):
        return self.value is not None

    def _key(self):
        return (1, 0) if self.value is None else (0, self.value)

    def __add__(self, other):
        return ext_add(self, nat(other))

    __radd__ = __add__

    def __sub__(self, other):
        return ext_sub(self, nat(other))

    def __le__(self, other):
        return ext_leq(self, nat(other))

    def __lt__(self, other):
        return self._key() < nat(other)._key()

    def __ge__(self, other):
        return ext_leq(nat(other), self)

    def __gt__(self, other):
        return nat(other)._key() < self._key()

    def __str__(self):
        return INF_TOKEN if self.value is None else str(self.value)

    def __repr__(self):
        return f"ExtNat({self})"

    def to_json(self):
        return INF_TOKEN if self.value is None else self.value


INF = ExtNat(None)
ZERO = ExtNat(0)


@dataclass(frozen=True)
class ExtInt:
    """A value of Z u {+INF, -INF}.

    ``inf_sign`` is +1 / -1 for the infinities and 0 for a finite ``value``.
    """

    value: int = 0
    inf_sign: int = 0

    def __post_init__(self):
        if self.inf_sign not in (-1, 0, 1):
            raise ValueError(f"inf_sign must be -1, 0 or 1, got {self.inf_sign}")
        if self.inf_sign != 0 and self.value != 0:
            raise ValueError("infinite ExtInt must carry value 0")

    @classmethod
    def pos_inf(cls):
        return cls(0, 1)

    @classmethod
    def neg_inf(cls):
        return cls(0, -1)

    @property
    def is_finite(self):
        return self.inf_sign == 0

    def _key(self):
        if self.inf_sign == 0:
            return (0, self.value)
        return (self.inf_sign, 0)

    def __neg__(self):
        return ExtInt(-self.value, -self.inf_sign)

    def __lt__(self, other):
        return self._key() < _as_extint(other)._key()

    def __le__(self, other):
        return self._key() <= _as_extint(other)._key()

    def __gt__(self, other):
        return self._key() > _as_extint(other)._key()

    def __ge__(self, other):
        return self._key() >= _as_extint(other)._key()

    def __str__(self):
        if self.inf_sign > 0:
            return INF_TOKEN
        if self.inf_sign < 0:
            return "-" + INF_TOKEN
        return str(self.value)

    def __repr__(self):
        return f"ExtInt({self})"

    def to_json(self):
        return self.value if self.inf_sign == 0 else str(self)


def _as_extint(x):
    if isinstance(x, ExtInt):
        return x
    if isinstance(x, int) and not isinstance(x, bool):
        return ExtInt(x)
    raise TypeError(f"cannot compare ExtInt with {type(x).__name__}")


def nat(x: Any) -> ExtNat:
    """Coerce an int, ``"inf"`` or ExtNat to ExtNat."""
    if isinstance(x, ExtNat):
        return x
    if isinstance(x, str):
        if x.strip().lower() in (INF_TOKEN, "infinity", "∞"):
            return INF
        try:
            return ExtNat(int(x))
        except ValueError as exc:
            raise ParseError(f"not an extended natural number: {x!r}") from exc
    if isinstance(x, int) and not isinstance(x, bool):
        return ExtNat(x)
    raise ParseError(f"not an extended natural number: {x!r}")


def ext_add(a: ExtNat, b: ExtNat) -> ExtNat:
    """Saturating addition: INF absorbs everything."""
    if a.is_inf or b.is_inf:
        return INF
    return ExtNat(a.value + b.value)


def ext_sum(values: Iterable[ExtNat]) -> ExtNat:
    total = ZERO
    for v in values:
        total = ext_add(total, v)
        if total.is_inf:
            return INF
    return total


def ext_leq(a: ExtNat, b: ExtNat) -> bool:
    """Total order with x <= INF for every x, INF <= INF included."""
    if b.is_inf:
        return True
    if a.is_inf:
        return False
    return a.value <= b.value


def ext_sub(a: ExtNat, b: ExtNat) -> ExtInt:
    if a.is_inf and b.is_inf:
        raise BothInfinite("INF - INF is undefined")
    if a.is_inf:
        return ExtInt.pos_inf()
    if b.is_inf:
        return ExtInt.neg_inf()
    return ExtInt(a.value - b.value)


# ---------------------------------------------------------------------------
# Exact complex rationals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ComplexRational:
    re: Fraction
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", parse_rational(self.re))
        object.__setattr__(self, "im", parse_rational(self.im))

    def __add__(self, other):
        other = parse_complex(other)
        return ComplexRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = parse_complex(other)
        return ComplexRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return parse_complex(other) - self

    def __neg__(self):
        return ComplexRational(-self.re, -self.im)

    def __mul__(self, other):
        other = parse_complex(other)
        return ComplexRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = parse_complex(other)
        denom = other.abs2()
        if denom == 0:
            raise ZeroDivisionError("division by exact zero")
        num = self * other.conjugate()
        return ComplexRational(num.re / denom, num.im / denom)

    def __rtruediv__(self, other):
        return parse_complex(other) / self

    def __eq__(self, other):
        if isinstance(other, ComplexRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.im == 0 and self.re == other
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def conjugate(self):
        return ComplexRational(self.re, -self.im)

    def abs2(self) -> Fraction:
        """Squared modulus, exact."""
        return self.re * self.re + self.im * self.im

    def l1(self) -> Fraction:
        """|re| + |im|, an exact upper bound on the modulus."""
        return abs(self.re) + abs(self.im)

    @property
    def is_zero(self):
        return self.re == 0 and self.im == 0

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        sign = "+" if self.im >= 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"

    def __repr__(self):
        return f"ComplexRational({self})"

    def to_json(self):
        return [fraction_to_json(self.re), fraction_to_json(self.im)]


def fraction_to_json(q: Fraction):
    if q.denominator == 1:
        return int(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def parse_rational(value: Any) -> Fraction:
    """Parse an exact rational from int, Fraction, "p/q", a decimal string or {"num","den"}.

    Floats are rejected: binary floats are not the decimals users write.
    """
    if isinstance(value, bool):
        raise ParseError("bool is not a numeric scalar")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"not an exact rational: {value!r}") from exc
    if isinstance(value, dict) and set(value) == {"num", "den"}:
        try:
            return Fraction(int(value["num"]), int(value["den"]))
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"not an exact rational: {value!r}") from exc
    raise ParseError(f"unsupported scalar type: {type(value).__name__} ({value!r})")


def parse_complex(value: Any) -> ComplexRational:
    """Parse ``[re, im]``, a single real scalar, or pass a ComplexRational through."""
    if isinstance(value, ComplexRational):
        return value
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ParseError(f"complex value needs [re, im], got {value!r}")
        return ComplexRational(parse_rational(value[0]), parse_rational(value[1]))
    return ComplexRational(parse_rational(value), Fraction(0))


CZERO = ComplexRational(0, 0)
