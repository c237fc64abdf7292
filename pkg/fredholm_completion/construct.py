"""
Explicit completions A = (A_ij) realizing the sufficient condition.

Certificates store index arithmetic, never matrices. Each nonzero entry is a
BasisMap: for s = 1, 2, ... (up to ``count`` when finite) it sends source
vector number src_stride*s + src_offset to target vector number
stride*s + offset, and is zero on the orthogonal complement of its sources.

Sources are either the canonical basis of H_col ("canonical") or the kernel
basis of D_col - lambda ("kernel"); targets are either the cokernel basis of
D_row - lambda ("cokernel") or the canonical basis of H_row ("canonical").
Vector numbers are 1-based.

Row device (upper targets): A_{k,k+m} e_s = f_{n*s + m - 1}, m = 1..n-k.
Column device (lower targets): the adjoint of the row device on the reversed
adjoint problem, A_{c-m,c} g_{n*s + m - 1} = e_s.
Pair device (Fredholm): row j absorbs the kernels of the middle diagonals,
column k fills their cokernels, and A_{jk} matches what remains of N(D_k)
with what remains of R(D_j)^perp.
"""

import math
from dataclasses import dataclass, replace
from itertools import islice
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .decision import (
    ColumnConstruction,
    FredholmPair,
    RowConstruction,
    Target,
    Verdict,
    ZeroCompletion,
    decide,
)
from .errors import MissingCokernel, NotConstructible, ParseError
from .extmath import INF, ZERO, ComplexRational, ExtNat, ext_sum, nat, parse_complex
from .fredholm import FredholmData, deficiency
from .header import logger
from .models import ModelOp, embed, iter_cokernel, iter_kernel, point_data
from .models import column as op_column

SOURCES = ("canonical", "kernel")
TARGETS = ("cokernel", "canonical")


@dataclass(frozen=True)
class BasisMap:
    row: int
    col: int
    stride: int
    offset: int
    source: str = "canonical"
    src_stride: int = 1
    src_offset: int = 0
    target: str = "cokernel"
    count: Optional[int] = None

    def __post_init__(self):
        if self.row >= self.col:
            raise ValueError(f"entry ({self.row},{self.col}) is not strictly upper triangular")
        if self.source not in SOURCES or self.target not in TARGETS:
            raise ValueError(f"unknown source/target {self.source}/{self.target}")
        if self.stride < 1 or self.src_stride < 1:
            raise ValueError("strides must be >= 1")
        if self.stride + self.offset < 1 or self.src_stride + self.src_offset < 1:
            raise ValueError("first source and target numbers must be >= 1")
        if self.count is not None and self.count < 0:
            raise ValueError("count must be nonnegative")

    def source_number(self, s: int) -> int:
        return self.src_stride * s + self.src_offset

    def target_number(self, s: int) -> int:
        return self.stride * s + self.offset

    def step_of_source(self, number: int) -> Optional[int]:
        """The s with source_number(s) == number, or None."""
        q, r = divmod(number - self.src_offset, self.src_stride)
        if r or q < 1 or (self.count is not None and q > self.count):
            return None
        return q

    def to_json(self):
        rule = {"stride": self.stride, "offset": self.offset}
        if self.source != "canonical" or self.src_stride != 1 or self.src_offset != 0:
            rule.update(source=self.source, src_stride=self.src_stride, src_offset=self.src_offset)
        if self.target != "cokernel":
            rule["target"] = self.target
        if self.count is not None:
            rule["count"] = self.count
        return {"i": self.row, "j": self.col, "map": rule}

    @classmethod
    def from_json(cls, data):
        try:
            rule = data["map"]
            return cls(
                row=int(data["i"]),
                col=int(data["j"]),
                stride=int(rule["stride"]),
                offset=int(rule["offset"]),
                source=rule.get("source", "canonical"),
                src_stride=int(rule.get("src_stride", 1)),
                src_offset=int(rule.get("src_offset", 0)),
                target=rule.get("target", "cokernel"),
                count=rule.get("count"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad certificate entry {data!r}: {exc}") from exc


@dataclass(frozen=True)
class Predicted:
    alpha_T: ExtNat
    beta_T: ExtNat
    range_closed_T: bool
    kernel_shape: Optional[Tuple[ExtNat, ...]] = None
    cokernel_shape: Optional[Tuple[ExtNat, ...]] = None

    def to_json(self):
        return {
            "alpha_T": self.alpha_T.to_json(),
            "beta_T": self.beta_T.to_json(),
            "range_closed_T": self.range_closed_T,
            "kernel_shape": None if self.kernel_shape is None
            else [a.to_json() for a in self.kernel_shape],
            "cokernel_shape": None if self.cokernel_shape is None
            else [b.to_json() for b in self.cokernel_shape],
        }


@dataclass(frozen=True)
class CompletionCertificate:
    n: int
    lam: ComplexRational
    target: Target
    strategy: Any
    entries: Tuple[BasisMap, ...]
    predicted: Predicted

    def entry(self, i: int, j: int) -> Optional[BasisMap]:
        for bm in self.entries:
            if bm.row == i and bm.col == j:
                return bm
        return None

    def rows(self) -> List[int]:
        return sorted({bm.row for bm in self.entries})

    def to_json(self):
        return {
            "n": self.n,
            "lambda": self.lam.to_json(),
            "target": self.target.value,
            "strategy": self.strategy.to_json(),
            "entries": [bm.to_json() for bm in self.entries],
            "predicted": self.predicted.to_json(),
        }


def certificate_from_json(data: Dict[str, Any]) -> CompletionCertificate:
    try:
        strat = data["strategy"]
        kind = strat["kind"]
        if kind == "zero":
            strategy = ZeroCompletion()
        elif kind == "row":
            strategy = RowConstruction(int(strat["row"]))
        elif kind == "column":
            strategy = ColumnConstruction(int(strat["column"]))
        elif kind == "pair":
            strategy = FredholmPair(int(strat["j"]), int(strat["k"]))
        else:
            raise ParseError(f"unknown strategy kind {kind!r}")
        pred = data["predicted"]
        shape = pred.get("kernel_shape")
        coshape = pred.get("cokernel_shape")
        predicted = Predicted(
            nat(pred["alpha_T"]),
            nat(pred["beta_T"]),
            bool(pred["range_closed_T"]),
            None if shape is None else tuple(nat(a) for a in shape),
            None if coshape is None else tuple(nat(b) for b in coshape),
        )
        return CompletionCertificate(
            n=int(data["n"]),
            lam=parse_complex(data.get("lambda", 0)),
            target=Target.parse(data["target"]),
            strategy=strategy,
            entries=tuple(BasisMap.from_json(e) for e in data["entries"]),
            predicted=predicted,
        )
    except KeyError as exc:
        raise ParseError(f"certificate is missing field {exc}") from exc


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


def _row_maps(n: int, k: int) -> List[BasisMap]:
    return [BasisMap(row=k, col=k + m, stride=n, offset=m - 1) for m in range(1, n - k + 1)]


def _column_maps(n: int, c: int) -> List[BasisMap]:
    return [
        BasisMap(row=c - m, col=c, stride=1, offset=0, source="kernel",
                 src_stride=n, src_offset=m - 1, target="canonical")
        for m in range(1, c)
    ]


def _pair_maps(data: List[FredholmData], j: int, k: int) -> List[BasisMap]:
    middle = range(j + 1, k)
    maps = []

    # Row j: middle kernels into R(D_j)^perp.
    finite_ker = [(t, data[t - 1].alpha.value) for t in middle
                  if data[t - 1].alpha.is_finite and data[t - 1].alpha.value > 0]
    infinite_ker = [t for t in middle if data[t - 1].alpha.is_inf]
    used = 0
    for t, a in finite_ker:
        maps.append(BasisMap(row=j, col=t, stride=1, offset=used, source="kernel", count=a))
        used += a
    classes = len(infinite_ker) + 1
    for r, t in enumerate(infinite_ker):
        maps.append(BasisMap(row=j, col=t, stride=classes, offset=used + r + 1 - classes,
                             source="kernel"))
    bridge_offset, bridge_stride = used, classes

    # Column k: part of N(D_k) onto the middle cokernels.
    finite_cok = [(s, deficiency(data[s - 1]).value) for s in middle
                  if deficiency(data[s - 1]).is_finite and deficiency(data[s - 1]).value > 0]
    infinite_cok = [s for s in middle if deficiency(data[s - 1]).is_inf]
    used = 0
    for s, b in finite_cok:
        maps.append(BasisMap(row=s, col=k, stride=1, offset=0, source="kernel",
                             src_stride=1, src_offset=used, count=b))
        used += b
    classes = len(infinite_cok) + 1
    for r, s in enumerate(infinite_cok):
        maps.append(BasisMap(row=s, col=k, stride=1, offset=0, source="kernel",
                             src_stride=classes, src_offset=used + r + 1 - classes))

    # Bridge: the last residue class on both sides.
    maps.append(BasisMap(row=j, col=k, stride=bridge_stride, offset=bridge_offset,
                         source="kernel", src_stride=classes, src_offset=used))
    return sorted(maps, key=lambda bm: (bm.row, bm.col))


def construct(target, diagonals: Sequence[ModelOp], lam) -> CompletionCertificate:
    """Build a completion certificate at ``lam`` for the target class."""
    target = Target.parse(target)
    lam = parse_complex(lam)
    ops = list(diagonals)
    n = len(ops)
    data = [point_data(op, lam) for op in ops]
    outcome = decide(target, data)
    if outcome.verdict is not Verdict.EXISTS:
        raise NotConstructible(
            f"no completion is guaranteed for {target.value} at {lam}: {outcome.verdict.value}",
            outcome,
        )
    strategy = outcome.strategy
    alphas = [d.alpha for d in data]
    betas = [deficiency(d) for d in data]

    if isinstance(strategy, ZeroCompletion):
        entries = []
        predicted = Predicted(ext_sum(alphas), ext_sum(betas),
                              all(d.range_closed for d in data), tuple(alphas))
    elif isinstance(strategy, RowConstruction):
        k = strategy.row
        if betas[k - 1].is_finite:
            raise MissingCokernel(f"D_{k} - {lam} has finite deficiency {betas[k - 1]}")
        entries = _row_maps(n, k)
        shape = tuple(alphas[:k]) + (ZERO,) * (n - k)
        predicted = Predicted(ext_sum(alphas[:k]), INF, True, shape)
    elif isinstance(strategy, ColumnConstruction):
        c = strategy.column
        if alphas[c - 1].is_finite:
            raise MissingCokernel(f"D_{c}* - {lam.conjugate()} has finite deficiency")
        entries = _column_maps(n, c)
        predicted = Predicted(INF, ext_sum(betas[c - 1:]), True, None)
    elif isinstance(strategy, FredholmPair):
        j, k = strategy.j, strategy.k
        if betas[j - 1].is_finite:
            raise MissingCokernel(f"D_{j} - {lam} has finite deficiency {betas[j - 1]}")
        if alphas[k - 1].is_finite:
            raise MissingCokernel(f"D_{k} - {lam} has finite nullity; nothing to bridge")
        entries = _pair_maps(data, j, k)
        outer = [s for s in range(1, n + 1) if s < j or s > k]
        shape = tuple(alphas[s - 1] if (s <= j or s > k) else ZERO for s in range(1, n + 1))
        predicted = Predicted(
            ext_sum(alphas[s - 1] for s in range(1, n + 1) if s <= j or s > k),
            ext_sum([betas[k - 1]] + [betas[s - 1] for s in outer]),
            True,
            shape,
        )
    else:
        raise NotConstructible(f"unsupported strategy {strategy!r}", outcome)
    predicted = replace(predicted, cokernel_shape=tuple(betas))

    logger.info("constructed %s completion at %s with %d nonzero entries (%s)",
                target.value, lam, len(entries), strategy.to_json()["kind"])
    return CompletionCertificate(n, lam, target, strategy, tuple(entries), predicted)


# ---------------------------------------------------------------------------
# Covered cokernel indices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoverDescription:
    """Cokernel-basis numbers of one row hit by the row's maps.

    ``progressions`` holds (stride, first, count) triples: the numbers
    first, first + stride, ... (count of them, or forever when None).
    For an infinite (or unknown) cokernel, residues are taken modulo
    ``modulus`` from ``start`` on. A finite cokernel is listed number by
    number in ``uncovered_finite`` instead.
    """

    row: int
    modulus: int
    start: int
    progressions: Tuple[Tuple[int, int, Optional[int]], ...]
    covered_residues: Tuple[int, ...]
    uncovered_residues: Tuple[int, ...]
    cokernel_dim: Optional[ExtNat] = None
    uncovered_finite: Tuple[int, ...] = ()

    @property
    def complement_infinite(self) -> bool:
        return bool(self.uncovered_residues)

    def _exists(self, number: int) -> bool:
        dim = self.cokernel_dim
        return number >= 1 and (dim is None or dim.is_inf or number <= dim.value)

    def is_covered(self, number: int) -> bool:
        if not self._exists(number):
            return False
        for stride, first, cnt in self.progressions:
            q, r = divmod(number - first, stride)
            if r == 0 and q >= 0 and (cnt is None or q < cnt):
                return True
        return False

    def covered_upto(self, limit: int) -> List[int]:
        return [t for t in range(1, limit + 1) if self.is_covered(t)]

    def uncovered_upto(self, limit: int) -> List[int]:
        return [t for t in range(1, limit + 1) if self._exists(t) and not self.is_covered(t)]

    def to_json(self):
        return {
            "row": self.row,
            "modulus": self.modulus,
            "start": self.start,
            "progressions": [list(p) for p in self.progressions],
            "covered_residues": list(self.covered_residues),
            "uncovered_residues": list(self.uncovered_residues),
            "cokernel_dim": None if self.cokernel_dim is None else self.cokernel_dim.to_json(),
            "uncovered_finite": list(self.uncovered_finite),
            "complement_infinite": self.complement_infinite,
        }


def covered_indices(cert: CompletionCertificate, row: int,
                    cokernel_dim: Optional[ExtNat] = None) -> CoverDescription:
    """Which cokernel-basis numbers of ``row`` the certificate's maps reach.

    ``cokernel_dim`` is the deficiency of D_row at the certificate's point;
    it defaults to the one recorded in the certificate, and is treated as
    infinite when neither is known.
    """
    maps = [bm for bm in cert.entries if bm.row == row and bm.target == "cokernel"]
    progressions = tuple(
        (bm.stride, bm.target_number(1), bm.count) for bm in maps
    )
    shape = cert.predicted.cokernel_shape
    if cokernel_dim is None and shape is not None:
        cokernel_dim = shape[row - 1]

    if cokernel_dim is not None and cokernel_dim.is_finite:
        cover = CoverDescription(row, 1, 1, progressions, (), (), cokernel_dim)
        missing = tuple(cover.uncovered_upto(cokernel_dim.value))
        return replace(cover, uncovered_finite=missing)

    infinite = [p for p in progressions if p[2] is None]
    modulus = 1
    for stride, _, _ in infinite:
        modulus = modulus * stride // math.gcd(modulus, stride)
    start = max([first for _, first, _ in progressions] + [1])
    # Finite progressions end somewhere; residues only count past their last element.
    for stride, first, cnt in progressions:
        if cnt is not None:
            start = max(start, first + stride * cnt)
    covered = sorted({
        (first + stride * q) % modulus
        for stride, first, _ in infinite
        for q in range(modulus // stride)
    })
    uncovered = tuple(r for r in range(modulus) if r not in covered) if infinite else (0,)
    return CoverDescription(row, modulus, start, progressions, tuple(covered), uncovered, cokernel_dim)


# ---------------------------------------------------------------------------
# Applying a certificate
# ---------------------------------------------------------------------------


class CertificateOperator:
    """Evaluates T_n^d(A) - lambda column by column on canonical basis vectors.

    Kernel and cokernel bases are taken at the certificate's own point; the
    diagonal shift uses the evaluation point. Source-kernel maps only see the
    first ``kernel_limit`` kernel vectors of their column diagonal.
    """

    def __init__(self, cert: CompletionCertificate, diagonals: Sequence[ModelOp],
                 kernel_limit: int = 4096):
        if len(diagonals) != cert.n:
            raise ValueError(f"certificate is for n={cert.n}, got {len(diagonals)} diagonals")
        self.cert = cert
        self.ops = list(diagonals)
        self.kernel_limit = kernel_limit
        self._cokernels: Dict[int, Tuple[Any, List[Any]]] = {}
        self._kernel_index: Dict[int, Dict[int, List[Tuple[int, complex]]]] = {}
        self._by_col: Dict[int, List[BasisMap]] = {}
        for bm in cert.entries:
            self._by_col.setdefault(bm.col, []).append(bm)

    def _cokernel_vector(self, space: int, number: int):
        stream, cache = self._cokernels.setdefault(
            space, (iter_cokernel(self.ops[space - 1], self.cert.lam), [])
        )
        while len(cache) < number:
            nxt = next(stream, None)
            if nxt is None:
                raise MissingCokernel(f"cokernel of D_{space} has fewer than {number} vectors")
            cache.append(nxt)
        return cache[number - 1]

    def _kernel_lookup(self, space: int):
        if space not in self._kernel_index:
            op = self.ops[space - 1]
            index: Dict[int, List[Tuple[int, complex]]] = {}
            vectors = islice(iter_kernel(op, self.cert.lam), self.kernel_limit)
            for number, vec in enumerate(vectors, start=1):
                for t, coef in embed(op, vec).items():
                    index.setdefault(t, []).append((number, coef))
            self._kernel_index[space] = index
        return self._kernel_index[space]

    def target_vector(self, bm: BasisMap, s: int) -> Dict[int, complex]:
        number = bm.target_number(s)
        if bm.target == "canonical":
            return {number - 1: 1.0}
        return embed(self.ops[bm.row - 1], self._cokernel_vector(bm.row, number))

    def map_column(self, bm: BasisMap, t: int) -> Dict[int, complex]:
        """A_ij applied to canonical vector t (0-based) of H_j."""
        out: Dict[int, complex] = {}
        if bm.source == "canonical":
            s = bm.step_of_source(t + 1)
            if s is not None:
                out.update(self.target_vector(bm, s))
            return out
        for number, coef in self._kernel_lookup(bm.col).get(t, []):
            s = bm.step_of_source(number)
            if s is None:
                continue
            weight = coef.conjugate()
            for r, v in self.target_vector(bm, s).items():
                out[r] = out.get(r, 0.0) + weight * v
        return out

    def column(self, space: int, t: int, lam) -> Dict[Tuple[int, int], complex]:
        """(T_n^d(A) - lam) e_t for e_t in H_space; keys are (space, global index)."""
        out = {(space, r): v for r, v in op_column(self.ops[space - 1], t, lam).items()}
        for bm in self._by_col.get(space, []):
            for r, v in self.map_column(bm, t).items():
                key = (bm.row, r)
                out[key] = out.get(key, 0.0) + v
        return out


def apply_certificate(cert: CompletionCertificate, diagonals: Sequence[ModelOp], lam,
                      vector: Sequence[Dict[int, complex]]) -> List[Dict[int, complex]]:
    """Image of a finitely supported vector (one dict per space) under T_n^d(A) - lam."""
    if len(vector) != cert.n:
        raise ValueError(f"vector has {len(vector)} components, expected {cert.n}")
    lam = parse_complex(lam)
    evaluator = CertificateOperator(cert, diagonals)
    out: List[Dict[int, complex]] = [dict() for _ in range(cert.n)]
    for space, comp in enumerate(vector, start=1):
        for t, x in comp.items():
            if x == 0:
                continue
            for (row_space, r), v in evaluator.column(space, t, lam).items():
                out[row_space - 1][r] = out[row_space - 1].get(r, 0.0) + v * x
    return [{r: v for r, v in comp.items() if v != 0} for comp in out]


def certificate_to_json(cert: CompletionCertificate) -> Dict[str, Any]:
    return cert.to_json()


def zero_certificate(diagonals: Sequence[ModelOp], lam, target=Target.FREDHOLM) -> CompletionCertificate:
    """The all-zero completion, whatever the decision says; used for diagonal-only checks."""
    lam = parse_complex(lam)
    data = [point_data(op, lam) for op in diagonals]
    alphas = [d.alpha for d in data]
    betas = [deficiency(d) for d in data]
    predicted = Predicted(
        ext_sum(alphas),
        ext_sum(betas),
        all(d.range_closed for d in data),
        tuple(alphas),
        tuple(betas),
    )
    return CompletionCertificate(len(data), lam, Target.parse(target), ZeroCompletion(), (), predicted)
