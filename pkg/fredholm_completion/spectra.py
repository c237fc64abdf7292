"""
Spectral sandwich sets of T_n^d(A) over grids of exact spectral points.

For each corollary the engine evaluates a lower set (points lying in the
spectrum of every completion) and an upper set (points possibly in it), and
cross-checks both against the completion conditions:

    in_lhs      => condition (iii) fails   (no completion avoids the point)
    not in_rhs  => condition (i) holds     (some completion avoids it)

The points in rhs but not in lhs form the indeterminate band.

Corollary ids and the target they are paired with:

    aw  upper-weyl        sf+  upper-fredholm     e   fredholm
    sw  lower-weyl        sf-  lower-fredholm     e2  fredholm (n = 2, exact)

Lower-side sets are the upper-side sets of the reversed adjoint problem, so
"beta(D_k) = INF" there means dim N(D_k*) = INF and a nullity sum counts a
non-closed D_s as infinite. Both readings agree wherever all ranges are
closed, which is everywhere outside the upper set's closed-range terms.
"""

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from .construct import CompletionCertificate
from .decision import Target, Verdict, condition_i, condition_iii, reversed_adjoints
from .errors import ArityMismatch, ConsistencyViolation, ParseError
from .extmath import ComplexRational, ext_sum, fraction_to_json, parse_complex, parse_rational
from .fredholm import FredholmData, deficiency, in_phi_minus, in_phi_plus
from .header import logger
from .models import ModelOp, point_data
from .pool import ordered_map
from .verify import DEFAULT_TOL, check_sizes, holds_floor, numerical_kernel_dim, system_section

COROLLARIES = ("aw", "sw", "sf+", "sf-", "e", "e2")

PAIRED_TARGET = {
    "aw": Target.UPPER_WEYL,
    "sw": Target.LOWER_WEYL,
    "sf+": Target.UPPER_FREDHOLM,
    "sf-": Target.LOWER_FREDHOLM,
    "e": Target.FREDHOLM,
    "e2": Target.FREDHOLM,
}

# Two-operator names of the n = 2 corollaries, as (name, general label).
_TWO_NAMES = {
    "aw": (("delta", "delta_2"), ("delta'", "delta_3"), ("delta''", "delta'_2")),
    "sw": (("delta", "delta_1"), ("delta'", "delta_3"), ("delta''", "delta'_1")),
    "sf+": (("delta", "delta_2"), ("delta'", "delta'_2")),
    "sf-": (("delta", "delta_1"), ("delta'", "delta'_1")),
    "e": (("delta", "delta_2"),),
}


def parse_corollary(value: str) -> str:
    key = str(value).strip().lower().replace("−", "-")
    if key not in COROLLARIES:
        raise ValueError(f"unknown corollary {value!r}; expected one of {COROLLARIES}")
    return key


# ---------------------------------------------------------------------------
# Grids
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Grid:
    re_min: Fraction
    re_max: Fraction
    im_min: Fraction
    im_max: Fraction
    step: Fraction

    def __post_init__(self):
        for name in ("re_min", "re_max", "im_min", "im_max", "step"):
            object.__setattr__(self, name, parse_rational(getattr(self, name)))
        if self.step <= 0:
            raise ParseError(f"grid step must be positive, got {self.step}")
        if self.re_min > self.re_max or self.im_min > self.im_max:
            raise ParseError("grid bounds are reversed")

    def _axis(self, lo, hi):
        count = int((hi - lo) // self.step) + 1
        return [lo + q * self.step for q in range(count)]

    def points(self) -> List[ComplexRational]:
        """Row-major: imaginary part outer, real part inner, both ascending."""
        return [ComplexRational(re, im)
                for im in self._axis(self.im_min, self.im_max)
                for re in self._axis(self.re_min, self.re_max)]

    def __len__(self):
        return len(self._axis(self.re_min, self.re_max)) * len(self._axis(self.im_min, self.im_max))

    def to_json(self):
        return ":".join(str(q) for q in (self.re_min, self.re_max, self.im_min, self.im_max, self.step))


def parse_grid(text: str) -> Grid:
    """Parse ``re0:re1:im0:im1:step``; every field is an exact rational."""
    parts = str(text).split(":")
    if len(parts) != 5:
        raise ParseError(f"grid must be re0:re1:im0:im1:step, got {text!r}")
    return Grid(*(parse_rational(p) for p in parts))


# ---------------------------------------------------------------------------
# Delta sets
# ---------------------------------------------------------------------------


def _upper_family(ds: List[FredholmData], with_index: bool):
    n = len(ds)
    deltas = {}
    for k in range(2, n + 1):
        deltas[k] = ds[k - 1].alpha.is_inf and ext_sum(deficiency(d) for d in ds[:k - 1]).is_finite
    if with_index:
        deltas[n + 1] = ext_sum(deficiency(d) for d in ds) < ext_sum(d.alpha for d in ds)
    primes = {k: not ds[k - 1].range_closed for k in range(2, n + 1)}
    return deltas, primes


def _lower_family(ds: List[FredholmData], with_index: bool):
    n = len(ds)
    deltas, primes = _upper_family(reversed_adjoints(ds), with_index)
    mirrored = {(n + 1 - k if k <= n else k): v for k, v in deltas.items()}
    return mirrored, {n + 1 - k: v for k, v in primes.items()}


def _labelled(deltas, primes):
    out = {f"delta_{k}": v for k, v in sorted(deltas.items())}
    out.update({f"delta'_{k}": v for k, v in sorted(primes.items())})
    return out


def _sets(corollary: str, ds: List[FredholmData]) -> Tuple[bool, Dict[str, bool], Dict[str, bool]]:
    """(base lhs membership, lower-bound flags, upper-bound-only flags)."""
    n = len(ds)
    if corollary == "e2":
        if n != 2:
            raise ArityMismatch(f"corollary e2 needs exactly two diagonals, got {n}")
        base = not in_phi_plus(ds[0]) or not in_phi_minus(ds[1])
        one_infinite = ds[1].alpha.is_inf != deficiency(ds[0]).is_inf
        return base, {"delta": one_infinite}, {}
    if corollary in ("aw", "sf+"):
        deltas, primes = _upper_family(ds, corollary == "aw")
        base = not in_phi_plus(ds[0])
    elif corollary in ("sw", "sf-"):
        deltas, primes = _lower_family(ds, corollary == "sw")
        base = not in_phi_minus(ds[-1])
    else:
        up, _ = _upper_family(ds, False)
        low, _ = _lower_family(ds, False)
        deltas = {k: up[k] or low[k] for k in range(2, n)}
        deltas[n] = up[n] or low[1]
        primes = {k: not ds[k - 1].range_closed for k in range(2, n)}
        base = not in_phi_plus(ds[0]) or not in_phi_minus(ds[-1])
    flags = _labelled(deltas, primes)
    lower = {k: v for k, v in flags.items() if k.startswith("delta_")}
    upper = {k: v for k, v in flags.items() if k.startswith("delta'_")}
    if n == 2:
        named = {name: flags[label] for name, label in _TWO_NAMES[corollary]}
        lower = {name: v for name, v in named.items() if _TWO_NAMES_KIND[(corollary, name)] == "lower"}
        upper = {name: v for name, v in named.items() if _TWO_NAMES_KIND[(corollary, name)] == "upper"}
    return base, lower, upper


_TWO_NAMES_KIND = {
    (cor, name): ("upper" if label.startswith("delta'_") else "lower")
    for cor, names in _TWO_NAMES.items()
    for name, label in names
}


def delta_sets(corollary: str, diagonals: Sequence[ModelOp], lam) -> Dict[str, bool]:
    """Every Delta set named by the corollary, evaluated at lam."""
    corollary = parse_corollary(corollary)
    lam = parse_complex(lam)
    ds = [point_data(op, lam) for op in diagonals]
    if len(ds) < 2:
        raise ArityMismatch(f"need at least two diagonals, got {len(ds)}")
    _, lower, upper = _sets(corollary, ds)
    return {**lower, **upper}


# ---------------------------------------------------------------------------
# Sandwich reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PointReport:
    lam: ComplexRational
    data: Tuple[FredholmData, ...]
    corollary: str
    target: Target
    in_lhs: bool
    in_rhs: bool
    cond_i: bool
    cond_iii: bool
    deltas: Dict[str, bool] = field(default_factory=dict)

    @property
    def verdict(self) -> Verdict:
        if self.cond_i:
            return Verdict.EXISTS
        if not self.cond_iii:
            return Verdict.NOT_EXISTS
        return Verdict.INDETERMINATE

    @property
    def band(self) -> str:
        if self.in_lhs:
            return "lhs"
        if self.in_rhs:
            return "indeterminate"
        return "outside"

    @property
    def divergent(self) -> bool:
        """The lower formula and the failure set of condition (iii) disagree here."""
        return self.in_lhs == self.cond_iii

    def to_json(self):
        return {
            "lambda": self.lam.to_json(),
            "diagonals": [d.to_json() for d in self.data],
            "corollary": self.corollary,
            "target": self.target.value,
            "in_lhs": self.in_lhs,
            "in_rhs": self.in_rhs,
            "cond_i": self.cond_i,
            "cond_iii": self.cond_iii,
            "verdict": self.verdict.value,
            "deltas": dict(self.deltas),
        }


def _check_report(report: PointReport):
    where = f"{report.corollary} at {report.lam}"
    if report.in_lhs and not report.in_rhs:
        raise ConsistencyViolation(f"{where}: lower set is not contained in upper set", report)
    if report.in_lhs and report.cond_iii:
        raise ConsistencyViolation(f"{where}: point in lower set but condition (iii) holds", report)
    if not report.in_rhs and not report.cond_i:
        raise ConsistencyViolation(f"{where}: point outside upper set but condition (i) fails", report)
    if report.corollary == "e2" and report.in_lhs == report.cond_i:
        raise ConsistencyViolation(f"{where}: two-diagonal essential spectrum is not exact", report)


def point_report(corollary: str, diagonals: Sequence[ModelOp], lam, target=None) -> PointReport:
    corollary = parse_corollary(corollary)
    paired = PAIRED_TARGET[corollary]
    target = paired if target is None else Target.parse(target)
    if target is not paired:
        raise ArityMismatch(f"corollary {corollary} belongs to {paired.value}, not {target.value}")
    lam = parse_complex(lam)
    ds = [point_data(op, lam) for op in diagonals]
    if len(ds) < 2:
        raise ArityMismatch(f"need at least two diagonals, got {len(ds)}")
    base, lower, upper = _sets(corollary, ds)
    in_lhs = base or any(lower.values())
    in_rhs = in_lhs or any(upper.values())
    return PointReport(
        lam=lam,
        data=tuple(ds),
        corollary=corollary,
        target=target,
        in_lhs=in_lhs,
        in_rhs=in_rhs,
        cond_i=condition_i(target, ds),
        cond_iii=condition_iii(target, ds),
        deltas={**lower, **upper},
    )


def sandwich_report(corollary: str, diagonals: Sequence[ModelOp], grid, target=None,
                    workers=None, strict: bool = True) -> List[PointReport]:
    """PointReports over the grid in row-major order; ``strict`` raises on the first violation."""
    grid = parse_grid(grid) if isinstance(grid, str) else grid
    points = grid.points() if isinstance(grid, Grid) else [parse_complex(p) for p in grid]
    ops = list(diagonals)
    reports = ordered_map(lambda lam: point_report(corollary, ops, lam, target), points, workers)
    for report in reports:
        try:
            _check_report(report)
        except ConsistencyViolation:
            if strict:
                raise
            logger.warning("consistency violation at %s for %s", report.lam, report.corollary)
    logger.info("scanned %d points for corollary %s", len(reports), corollary)
    return reports


def sandwich_summary(reports: Iterable[PointReport]) -> Dict[str, int]:
    reports = list(reports)
    return {
        "points": len(reports),
        "lhs": sum(r.in_lhs for r in reports),
        "rhs": sum(r.in_rhs for r in reports),
        "indeterminate": sum(r.in_rhs and not r.in_lhs for r in reports),
        "exists": sum(r.cond_i for r in reports),
        "not_exists": sum(not r.cond_iii for r in reports),
        "divergent": sum(r.divergent for r in reports),
    }


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, Fraction):
        return str(fraction_to_json(value))
    return str(value)


def write_csv(reports: Sequence[PointReport], out, version: str = "") -> None:
    """One row per point: re, im, per-diagonal data, then the named flags."""
    if isinstance(out, (str, bytes)) or hasattr(out, "__fspath__"):
        with open(out, "w", newline="", encoding="utf-8") as fh:
            write_csv(reports, fh, version)
        return
    out.write(f"# fredholm-completion {version}\n".rstrip() + "\n")
    writer = csv.writer(out, lineterminator="\n")
    if not reports:
        writer.writerow(["re", "im"])
        return
    n = len(reports[0].data)
    flag_names = list(reports[0].deltas)
    header = ["re", "im"]
    for s in range(1, n + 1):
        header += [f"d{s}_alpha", f"d{s}_beta", f"d{s}_closed"]
    header += flag_names + ["in_lhs", "in_rhs", "cond_i", "cond_iii", "verdict"]
    writer.writerow(header)
    for r in reports:
        row = [_cell(r.lam.re), _cell(r.lam.im)]
        for d in r.data:
            row += [str(d.alpha), str(deficiency(d)), _cell(d.range_closed)]
        row += [_cell(r.deltas[name]) for name in flag_names]
        row += [_cell(r.in_lhs), _cell(r.in_rhs), _cell(r.cond_i), _cell(r.cond_iii), r.verdict.value]
        writer.writerow(row)


def csv_text(reports: Sequence[PointReport], version: str = "") -> str:
    buf = io.StringIO()
    write_csv(reports, buf, version)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Diagonal corners
# ---------------------------------------------------------------------------


@dataclass
class CornerReport:
    passed: bool
    falsifying: List[ComplexRational] = field(default_factory=list)
    checks: List[Dict[str, Any]] = field(default_factory=list)

    def __bool__(self):
        return self.passed

    def to_json(self):
        return {
            "pass": self.passed,
            "falsifying": [lam.to_json() for lam in self.falsifying],
            "checks": self.checks,
        }


def _stable(dims, sigmas, sizes):
    return dims[-1] == dims[-2] and holds_floor(sigmas, sizes)


def diagonal_corner_check(diagonals: Sequence[ModelOp], cert: CompletionCertificate, points,
                          sizes=(100, 200, 400), tol: float = DEFAULT_TOL) -> CornerReport:
    """Points of sigma_SF+(D_1) (resp. sigma_SF-(D_n)) must not look upper (lower) semi-Fredholm.

    A section sequence "looks" semi-Fredholm when its kernel (cokernel)
    dimension settles over the two largest sizes while the smallest singular
    value off that kernel does not decay.
    """
    sizes = check_sizes(sizes)
    ops = list(diagonals)
    points = points.points() if isinstance(points, Grid) else [parse_complex(p) for p in points]
    report = CornerReport(passed=True)
    for lam in points:
        first, last = point_data(ops[0], lam), point_data(ops[-1], lam)
        if not in_phi_plus(first):
            dims, sigmas = [], []
            for size in sizes:
                mat, _ = system_section(ops, cert, size, lam)
                dim, s = numerical_kernel_dim(mat, tol)
                dims.append(dim)
                idx = mat.shape[1] - dim - 1
                sigmas.append(float(s[idx]) if idx >= 0 else 0.0)
            certified = _stable(dims, sigmas, sizes)
            report.checks.append({"lambda": lam.to_json(), "side": "upper",
                                  "kernel_dims": dims, "sigma_min": sigmas, "certified": certified})
            if certified:
                report.falsifying.append(lam)
        if not in_phi_minus(last):
            dims, sigmas = [], []
            for size in sizes:
                mat, rows = system_section(ops, cert, 2 * size, lam, rows_per_space=size)
                dim, s = numerical_kernel_dim(mat.conj().T, tol)
                dims.append(dim)
                idx = len(rows) - dim - 1
                sigmas.append(float(s[idx]) if 0 <= idx < s.size else 0.0)
            certified = _stable(dims, sigmas, sizes)
            report.checks.append({"lambda": lam.to_json(), "side": "lower",
                                  "cokernel_dims": dims, "sigma_min": sigmas, "certified": certified})
            if certified:
                report.falsifying.append(lam)
    report.passed = not report.falsifying
    if report.falsifying:
        logger.warning("diagonal corner check failed at %s", [str(lam) for lam in report.falsifying])
    return report
