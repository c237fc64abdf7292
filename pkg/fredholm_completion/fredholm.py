"""
Fredholm data of a single operator and the classes derived from it.

A FredholmData triple (alpha, beta_star, range_closed) describes T at one
point: alpha = dim N(T), beta_star = dim N(T*), and whether R(T) is closed.
The deficiency used throughout is the codimension of R(T): beta_star when the
range is closed, INF otherwise. With that reading Kato's lemma holds
literally: finite deficiency forces a closed range.
"""

from dataclasses import dataclass
from typing import Any, Dict, Optional

from .errors import BothInfinite, ParseError
from .extmath import INF, ExtInt, ExtNat, ext_leq, ext_sub, nat


@dataclass(frozen=True)
class FredholmData:
    alpha: ExtNat
    beta_star: ExtNat
    range_closed: bool = True

    def __post_init__(self):
        object.__setattr__(self, "alpha", nat(self.alpha))
        object.__setattr__(self, "beta_star", nat(self.beta_star))
        if not isinstance(self.range_closed, bool):
            raise ValueError(f"range_closed must be a bool, got {self.range_closed!r}")

    def __str__(self):
        closed = "closed" if self.range_closed else "not closed"
        return f"(alpha={self.alpha}, beta*={self.beta_star}, {closed})"

    def to_json(self) -> Dict[str, Any]:
        return {
            "alpha": self.alpha.to_json(),
            "beta_star": self.beta_star.to_json(),
            "range_closed": self.range_closed,
        }

    @classmethod
    def from_json(cls, data: Any) -> "FredholmData":
        if isinstance(data, (list, tuple)) and len(data) == 3:
            alpha, beta_star, closed = data
        elif isinstance(data, dict):
            missing = {"alpha", "beta_star", "range_closed"} - set(data)
            if missing:
                raise ParseError(f"FredholmData is missing {sorted(missing)}")
            alpha, beta_star, closed = data["alpha"], data["beta_star"], data["range_closed"]
        else:
            raise ParseError(f"FredholmData must be an object or a triple, got {data!r}")
        if not isinstance(closed, bool):
            raise ParseError(f"range_closed must be true/false, got {closed!r}")
        return cls(nat(alpha), nat(beta_star), closed)


@dataclass(frozen=True)
class ClassSet:
    in_phi_plus: bool
    in_phi_minus: bool
    in_phi: bool
    in_upper_weyl: bool
    in_lower_weyl: bool

    def to_json(self):
        return {
            "phi_plus": self.in_phi_plus,
            "phi_minus": self.in_phi_minus,
            "phi": self.in_phi,
            "upper_weyl": self.in_upper_weyl,
            "lower_weyl": self.in_lower_weyl,
        }


@dataclass(frozen=True)
class SpectrumFlags:
    """Membership of a point in the five spectra, read off the data of D - lambda."""

    sf_plus: bool
    sf_minus: bool
    essential: bool
    upper_weyl: bool
    lower_weyl: bool

    def to_json(self):
        return {
            "sf_plus": self.sf_plus,
            "sf_minus": self.sf_minus,
            "essential": self.essential,
            "aw": self.upper_weyl,
            "sw": self.lower_weyl,
        }


def deficiency(fd: FredholmData) -> ExtNat:
    """Codimension of the range: beta_star on closed ranges, INF otherwise."""
    if fd.range_closed:
        return fd.beta_star
    return INF


def index(fd: FredholmData) -> Optional[ExtInt]:
    """alpha - deficiency, or None when both are infinite."""
    try:
        return ext_sub(fd.alpha, deficiency(fd))
    except BothInfinite:
        return None


def in_phi_plus(fd: FredholmData) -> bool:
    return fd.alpha.is_finite and fd.range_closed


def in_phi_minus(fd: FredholmData) -> bool:
    return deficiency(fd).is_finite


def in_phi(fd: FredholmData) -> bool:
    return in_phi_plus(fd) and in_phi_minus(fd)


def classify(fd: FredholmData) -> ClassSet:
    plus = in_phi_plus(fd)
    minus = in_phi_minus(fd)
    # Semi-Fredholm data always has a defined index.
    upper_weyl = plus and ext_leq(fd.alpha, deficiency(fd))
    lower_weyl = minus and ext_leq(deficiency(fd), fd.alpha)
    return ClassSet(
        in_phi_plus=plus,
        in_phi_minus=minus,
        in_phi=plus and minus,
        in_upper_weyl=upper_weyl,
        in_lower_weyl=lower_weyl,
    )


def adjoint_data(fd: FredholmData) -> FredholmData:
    return FredholmData(fd.beta_star, fd.alpha, fd.range_closed)


def spectra_flags(fd: FredholmData) -> SpectrumFlags:
    cs = classify(fd)
    return SpectrumFlags(
        sf_plus=not cs.in_phi_plus,
        sf_minus=not cs.in_phi_minus,
        essential=not cs.in_phi,
        upper_weyl=not cs.in_upper_weyl,
        lower_weyl=not cs.in_lower_weyl,
    )
