"""
Existence of completions T_n^d(A) in the five target classes.

For every target two boolean conditions on the diagonal data are evaluated:
a sufficient one (condition_i) and a necessary one (condition_iii). Their
conjunction pattern gives a three-way verdict:

    condition_i true                      -> Exists(strategy)
    condition_iii false                   -> NotExists
    condition_iii true, condition_i false -> Indeterminate

Indices in this module are 1-based to match the usual D_1, ..., D_n layout.
Lower targets are decided through the adjoint: the adjoint of an upper
triangular T_n^d(A), written in reversed order, is again upper triangular
with diagonals D_n*, ..., D_1*. ``lower_conditions_direct`` evaluates the
lower statements without going through the adjoint and is kept as an
independent cross-check.
"""

from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

from .errors import BadArity
from .extmath import ext_leq, ext_sum
from .fredholm import (
    FredholmData,
    adjoint_data,
    deficiency,
    in_phi,
    in_phi_minus,
    in_phi_plus,
)
from .header import logger


class Target(Enum):
    UPPER_WEYL = "upper-weyl"
    LOWER_WEYL = "lower-weyl"
    UPPER_FREDHOLM = "upper-fredholm"
    LOWER_FREDHOLM = "lower-fredholm"
    FREDHOLM = "fredholm"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        for member in cls:
            if member.value == key:
                return member
        raise ValueError(f"unknown target {value!r}; expected one of {[m.value for m in cls]}")

    @property
    def is_lower(self):
        return self in (Target.LOWER_WEYL, Target.LOWER_FREDHOLM)

    @property
    def upper_counterpart(self):
        return {
            Target.LOWER_WEYL: Target.UPPER_WEYL,
            Target.LOWER_FREDHOLM: Target.UPPER_FREDHOLM,
        }.get(self, self)


class Verdict(Enum):
    EXISTS = "exists"
    NOT_EXISTS = "not-exists"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class ZeroCompletion:
    def to_json(self):
        return {"kind": "zero"}


@dataclass(frozen=True)
class RowConstruction:
    """All nonzero entries in row ``row``; the row diagonal has infinite deficiency."""

    row: int

    def to_json(self):
        return {"kind": "row", "row": self.row}


@dataclass(frozen=True)
class ColumnConstruction:
    """All nonzero entries in column ``column``; the column diagonal has infinite nullity."""

    column: int

    def to_json(self):
        return {"kind": "column", "column": self.column}


@dataclass(frozen=True)
class FredholmPair:
    j: int
    k: int

    def to_json(self):
        return {"kind": "pair", "j": self.j, "k": self.k}


@dataclass(frozen=True)
class DecisionOutcome:
    verdict: Verdict
    strategy: Optional[object]
    condition_i: bool
    condition_iii: bool

    def to_json(self):
        return {
            "verdict": self.verdict.value,
            "strategy": self.strategy.to_json() if self.strategy is not None else None,
            "condition_i": self.condition_i,
            "condition_iii": self.condition_iii,
        }


# ---------------------------------------------------------------------------
# Small predicates
# ---------------------------------------------------------------------------


def _check(diagonals: Sequence[FredholmData]) -> List[FredholmData]:
    ds = list(diagonals)
    if len(ds) < 2:
        raise BadArity(f"need at least two diagonal operators, got {len(ds)}")
    return ds


def _alpha_fin(fd):
    return fd.alpha.is_finite


def _beta_inf(fd):
    return deficiency(fd).is_inf


def _beta_fin(fd):
    return deficiency(fd).is_finite


def _sum_alpha(ds):
    return ext_sum(d.alpha for d in ds)


def _sum_beta(ds):
    return ext_sum(deficiency(d) for d in ds)


# ---------------------------------------------------------------------------
# Upper targets
# ---------------------------------------------------------------------------


def _upper_rows(ds, require_closed) -> List[int]:
    """Rows j in 1..n-1 with beta(D_j)=INF and alpha(D_s)<INF for 2<=s<=j."""
    n = len(ds)
    if require_closed and not all(ds[s - 1].range_closed for s in range(2, n + 1)):
        return []
    rows = []
    for j in range(1, n):
        if _beta_inf(ds[j - 1]) and all(_alpha_fin(ds[s - 1]) for s in range(2, j + 1)):
            rows.append(j)
    return rows


def _upper_zero_branch(ds, weyl) -> bool:
    if not all(in_phi_plus(d) for d in ds[1:]):
        return False
    if weyl:
        return ext_leq(_sum_alpha(ds), _sum_beta(ds))
    return True


def _upper(ds, weyl, require_closed):
    """Returns (holds, strategy)."""
    if not in_phi_plus(ds[0]):
        return False, None
    if _upper_zero_branch(ds, weyl):
        return True, ZeroCompletion()
    rows = _upper_rows(ds, require_closed)
    if rows:
        return True, RowConstruction(rows[0])
    return False, None


# ---------------------------------------------------------------------------
# Fredholm target
# ---------------------------------------------------------------------------


def _fredholm_pairs(ds) -> List[Tuple[int, int]]:
    """Qualifying (j, k) of the sufficient condition, lexicographic order."""
    n = len(ds)
    if not all(ds[s - 1].range_closed for s in range(2, n)):
        return []
    pairs = []
    for j in range(1, n):
        dj = ds[j - 1]
        if not (_beta_inf(dj) and _alpha_fin(dj)):
            continue
        if not all(_alpha_fin(ds[s - 1]) and _beta_fin(ds[s - 1]) for s in range(1, j)):
            continue
        for k in range(j + 1, n + 1):
            dk = ds[k - 1]
            if not (dk.alpha.is_inf and _beta_fin(dk)):
                continue
            if all(_alpha_fin(ds[s - 1]) and _beta_fin(ds[s - 1]) for s in range(k + 1, n + 1)):
                pairs.append((j, k))
    return pairs


def _fredholm_necessary_pair(ds) -> Optional[Tuple[int, int]]:
    n = len(ds)
    js = [
        j for j in range(1, n)
        if _beta_inf(ds[j - 1]) and all(_alpha_fin(ds[s - 1]) for s in range(2, j + 1))
    ]
    ks = [
        k for k in range(2, n + 1)
        if ds[k - 1].alpha.is_inf and all(_beta_fin(ds[s - 1]) for s in range(k, n))
    ]
    for j in js:
        for k in ks:
            if k > j:
                return j, k
    return None


def _fredholm_two(ds):
    """The exact two-diagonal criterion; it is both sufficient and necessary."""
    d1, d2 = ds
    if not (in_phi_plus(d1) and in_phi_minus(d2)):
        return False, None
    if in_phi_plus(d2) and in_phi_minus(d1):
        return True, ZeroCompletion()
    if _beta_inf(d1) and d2.alpha.is_inf:
        return True, FredholmPair(1, 2)
    return False, None


def _fredholm(ds, sufficient):
    if len(ds) == 2:
        return _fredholm_two(ds)
    if not (in_phi_plus(ds[0]) and in_phi_minus(ds[-1])):
        return False, None
    if all(in_phi(d) for d in ds):
        return True, ZeroCompletion()
    if sufficient:
        pairs = _fredholm_pairs(ds)
        if pairs:
            return True, FredholmPair(*pairs[0])
        return False, None
    pair = _fredholm_necessary_pair(ds)
    return (pair is not None), (FredholmPair(*pair) if pair else None)


# ---------------------------------------------------------------------------
# Lower targets
# ---------------------------------------------------------------------------


def reversed_adjoints(diagonals: Sequence[FredholmData]) -> List[FredholmData]:
    """Diagonal data of the adjoint matrix written in reversed order."""
    return [adjoint_data(d) for d in reversed(list(diagonals))]


def _mirror(strategy, n):
    if isinstance(strategy, RowConstruction):
        return ColumnConstruction(n + 1 - strategy.row)
    if isinstance(strategy, ColumnConstruction):
        return RowConstruction(n + 1 - strategy.column)
    if isinstance(strategy, FredholmPair):
        return FredholmPair(n + 1 - strategy.k, n + 1 - strategy.j)
    return strategy


def _evaluate(target: Target, ds, sufficient):
    if target.is_lower:
        holds, strategy = _evaluate(target.upper_counterpart, reversed_adjoints(ds), sufficient)
        return holds, _mirror(strategy, len(ds))
    if target is Target.FREDHOLM:
        return _fredholm(ds, sufficient)
    weyl = target is Target.UPPER_WEYL
    return _upper(ds, weyl, require_closed=sufficient)


def _conullity_inf(fd):
    """Codimension of R(D*) is infinite: infinite nullity or a non-closed range."""
    return fd.alpha.is_inf or not fd.range_closed


def lower_conditions_direct(target, diagonals) -> Tuple[bool, bool]:
    """Lower semi-Weyl / semi-Fredholm conditions evaluated on D_1..D_n directly.

    Roles are mirrored from the upper statements: D_n must be lower
    semi-Fredholm, and the escape branch needs a column j in 2..n whose
    adjoint range has infinite codimension, with dim N(D_s*) finite for
    j <= s <= n-1. The sufficient condition also needs R(D_s) closed for
    1 <= s <= n-1, which makes these readings agree with plain nullity and
    deficiency.
    """
    target = Target.parse(target)
    if not target.is_lower:
        raise ValueError(f"{target.value} is not a lower target")
    ds = _check(diagonals)
    n = len(ds)
    weyl = target is Target.LOWER_WEYL

    if not in_phi_minus(ds[-1]):
        return False, False

    zero = all(in_phi_minus(d) for d in ds[:-1])
    if zero and weyl:
        zero = ext_leq(_sum_beta(ds), _sum_alpha(ds))

    columns = [
        j for j in range(2, n + 1)
        if _conullity_inf(ds[j - 1]) and all(ds[s - 1].beta_star.is_finite for s in range(j, n))
    ]
    closed = all(ds[s - 1].range_closed for s in range(1, n))
    cond_i = zero or (bool(columns) and closed)
    cond_iii = zero or bool(columns)
    return cond_i, cond_iii


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def condition_i(target, diagonals: Sequence[FredholmData]) -> bool:
    """Sufficient condition for a completion in the target class."""
    return _evaluate(Target.parse(target), _check(diagonals), sufficient=True)[0]


def condition_iii(target, diagonals: Sequence[FredholmData]) -> bool:
    """Necessary condition for a completion in the target class."""
    return _evaluate(Target.parse(target), _check(diagonals), sufficient=False)[0]


def decide(target, diagonals: Sequence[FredholmData]) -> DecisionOutcome:
    target = Target.parse(target)
    ds = _check(diagonals)
    cond_i, strategy = _evaluate(target, ds, sufficient=True)
    cond_iii, _ = _evaluate(target, ds, sufficient=False)
    if cond_i and not cond_iii:
        # Would mean a transcription error; the sufficient condition implies the necessary one.
        logger.warning("condition (i) holds but (iii) fails for %s on %s",
                       target.value, [str(d) for d in ds])
    if cond_i:
        verdict = Verdict.EXISTS
    elif not cond_iii:
        verdict = Verdict.NOT_EXISTS
        strategy = None
    else:
        verdict = Verdict.INDETERMINATE
        strategy = None
    logger.debug("decide %s n=%d -> %s", target.value, len(ds), verdict.value)
    return DecisionOutcome(verdict, strategy if cond_i else None, cond_i, cond_iii)


def decision_to_json(outcome: DecisionOutcome, target, diagonals: Sequence[FredholmData]):
    return {
        "target": Target.parse(target).value,
        "n": len(diagonals),
        "diagonals": [d.to_json() for d in diagonals],
        **outcome.to_json(),
    }
