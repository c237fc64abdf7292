"""
Model operators on l^2 with exactly computable pointwise data.

Every ModelOp acts on a separable l^2 space with a fixed canonical basis
(0-based global index t). Composite operators fix an enumeration of their
basis:

- a shift of multiplicity m acts on l^2 (x) C^m; summand i, coordinate c is
  global index (c-1)*m + (i-1) for finite m and the Cantor index
  d*(d+1)/2 + (i-1), d = (i-1) + (c-1), for m = INF;
- a direct sum of P parts is enumerated round-robin: global g is local g // P
  of part g % P.

Kernel and cokernel vectors are returned as BasisVector descriptors. A
descriptor with an empty path is the canonical vector e_coord of the
operator's own space; otherwise the path walks down through direct-sum parts
(1-based) and ends with the summand of a shift.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import count as _count
from itertools import cycle, islice
from typing import Any, Dict, Iterator, List, Optional, Tuple

import numpy as np

from .errors import NotAvailable, ParseError, UnsupportedPoint
from .extmath import (
    CZERO,
    INF,
    ZERO,
    ComplexRational,
    ExtNat,
    ext_sum,
    nat,
    parse_complex,
)
from .fredholm import FredholmData, adjoint_data
from .header import logger

# Geometric kernel vectors are cut off once a coefficient drops below this.
GEOMETRIC_CUTOFF = 1e-18
MAX_GEOMETRIC_TERMS = 20000

ONE = ComplexRational(1, 0)


@dataclass(frozen=True)
class BasisVector:
    """One orthonormal kernel / cokernel vector.

    ``ratio`` None means the canonical vector at ``coord``; otherwise the
    normalized geometric vector sqrt(1-|r|^2) * sum_c r^c e_(coord + c) on the
    summand named by ``path``.
    """

    path: Tuple[int, ...]
    coord: int
    ratio: Optional[ComplexRational] = None

    def to_json(self):
        out = {"path": list(self.path), "coord": self.coord}
        if self.ratio is not None:
            out["ratio"] = self.ratio.to_json()
        return out


def _round_robin(iterators):
    """Interleave possibly infinite iterators, dropping exhausted ones (itertools recipe)."""
    active = len(iterators)
    nexts = cycle(iter(it).__next__ for it in iterators)
    while active:
        try:
            for nxt in nexts:
                yield nxt()
        except StopIteration:
            active -= 1
            nexts = cycle(islice(nexts, active))


def _prefixed(p: int, source):
    """Basis vectors of summand p, re-rooted at the enclosing DirectSum."""
    for v in source:
        yield BasisVector((p,) + v.path, v.coord, v.ratio)


def _cantor(i0: int, c0: int) -> int:
    d = i0 + c0
    return d * (d + 1) // 2 + i0


def _uncantor(t: int) -> Tuple[int, int]:
    d = (math.isqrt(8 * t + 1) - 1) // 2
    i0 = t - d * (d + 1) // 2
    return i0, d - i0


# ---------------------------------------------------------------------------
# Diagonal sequences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FiniteThenConstant:
    prefix: Tuple[ComplexRational, ...]
    tail: ComplexRational

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(parse_complex(v) for v in self.prefix))
        object.__setattr__(self, "tail", parse_complex(self.tail))

    def entry(self, k: int) -> ComplexRational:
        if k <= len(self.prefix):
            return self.prefix[k - 1]
        return self.tail

    def positions_equal(self, lam) -> Iterator[int]:
        for k, v in enumerate(self.prefix, start=1):
            if v == lam:
                yield k
        if self.tail == lam:
            yield from _count(len(self.prefix) + 1)

    def count_equal(self, lam) -> ExtNat:
        if self.tail == lam:
            return INF
        return ExtNat(sum(1 for v in self.prefix if v == lam))

    def closed_at(self, lam) -> bool:
        # Finitely many values: nonzero entries of d - lam stay bounded away from 0.
        return True

    def norm_bound(self) -> Fraction:
        return max([v.l1() for v in self.prefix] + [self.tail.l1()])

    def conjugate(self):
        return FiniteThenConstant(tuple(v.conjugate() for v in self.prefix), self.tail.conjugate())

    def to_json(self):
        return {
            "kind": "finite_then_constant",
            "prefix": [v.to_json() for v in self.prefix],
            "tail": self.tail.to_json(),
        }


@dataclass(frozen=True)
class Harmonic:
    """d_k = center + 1/k for k >= 1."""

    center: ComplexRational

    def __post_init__(self):
        object.__setattr__(self, "center", parse_complex(self.center))

    def entry(self, k: int) -> ComplexRational:
        return self.center + ComplexRational(Fraction(1, k))

    def _hit(self, lam) -> Optional[int]:
        diff = lam - self.center
        if diff.im != 0 or diff.re <= 0:
            return None
        inv = 1 / diff.re
        if inv.denominator != 1:
            return None
        return int(inv)

    def positions_equal(self, lam) -> Iterator[int]:
        k = self._hit(lam)
        if k is not None:
            yield k

    def count_equal(self, lam) -> ExtNat:
        return ExtNat(0 if self._hit(lam) is None else 1)

    def closed_at(self, lam) -> bool:
        return lam != self.center

    def norm_bound(self) -> Fraction:
        return self.center.l1() + 1

    def conjugate(self):
        return Harmonic(self.center.conjugate())

    def to_json(self):
        return {"kind": "harmonic", "center": self.center.to_json()}


@dataclass(frozen=True)
class Periodic:
    block: Tuple[ComplexRational, ...]

    def __post_init__(self):
        block = tuple(parse_complex(v) for v in self.block)
        if not block:
            raise ValueError("Periodic block must be nonempty")
        object.__setattr__(self, "block", block)

    def entry(self, k: int) -> ComplexRational:
        return self.block[(k - 1) % len(self.block)]

    def positions_equal(self, lam) -> Iterator[int]:
        hits = [p for p, v in enumerate(self.block, start=1) if v == lam]
        if not hits:
            return
        for rep in _count():
            for p in hits:
                yield rep * len(self.block) + p

    def count_equal(self, lam) -> ExtNat:
        return INF if any(v == lam for v in self.block) else ZERO

    def closed_at(self, lam) -> bool:
        return True

    def norm_bound(self) -> Fraction:
        return max(v.l1() for v in self.block)

    def conjugate(self):
        return Periodic(tuple(v.conjugate() for v in self.block))

    def to_json(self):
        return {"kind": "periodic", "block": [v.to_json() for v in self.block]}


# ---------------------------------------------------------------------------
# Operators
# ---------------------------------------------------------------------------


class ModelOp:
    """Base class; subclasses are frozen dataclasses."""

    def _point_data(self, lam: ComplexRational) -> FredholmData:
        raise UnsupportedPoint(f"no pointwise rule for {type(self).__name__}")

    def _kernel(self, lam) -> Iterator[BasisVector]:
        raise UnsupportedPoint(f"no kernel rule for {type(self).__name__}")

    def _cokernel(self, lam) -> Iterator[BasisVector]:
        raise UnsupportedPoint(f"no cokernel rule for {type(self).__name__}")

    def _column(self, t: int) -> Dict[int, complex]:
        raise NotImplementedError

    def _embed(self, path, coord, ratio) -> Dict[int, complex]:
        if path:
            raise ValueError(f"{type(self).__name__} has no summand path {path}")
        return {coord - 1: 1.0}


@dataclass(frozen=True)
class Diagonal(ModelOp):
    seq: Any

    def _point_data(self, lam):
        alpha = self.seq.count_equal(lam)
        return FredholmData(alpha, alpha, self.seq.closed_at(lam))

    def _kernel(self, lam):
        for k in self.seq.positions_equal(lam):
            yield BasisVector((), k)

    _cokernel = _kernel

    def _column(self, t):
        return {t: complex(self.seq.entry(t + 1))}


class _Shift(ModelOp):
    multiplicity: ExtNat

    def __post_init__(self):
        m = nat(self.multiplicity)
        if m.is_finite and m.value < 1:
            raise ValueError("shift multiplicity must be >= 1")
        object.__setattr__(self, "multiplicity", m)

    def _index(self, i: int, c: int) -> int:
        """Global index of summand i, coordinate c (both 1-based)."""
        if self.multiplicity.is_inf:
            return _cantor(i - 1, c - 1)
        return (c - 1) * self.multiplicity.value + (i - 1)

    def _locate(self, t: int) -> Tuple[int, int]:
        if self.multiplicity.is_inf:
            i0, c0 = _uncantor(t)
            return i0 + 1, c0 + 1
        m = self.multiplicity.value
        return t % m + 1, t // m + 1

    def _summands(self) -> Iterator[int]:
        if self.multiplicity.is_inf:
            return _count(1)
        return iter(range(1, self.multiplicity.value + 1))

    def _geometric(self, lam) -> Iterator[BasisVector]:
        ratio = None if lam.is_zero else lam
        for i in self._summands():
            yield BasisVector((i,), 1, ratio)

    def _embed(self, path, coord, ratio):
        if not path:
            return super()._embed(path, coord, ratio)
        if len(path) != 1:
            raise ValueError(f"shift summand path must have length 1, got {path}")
        i = path[0]
        if ratio is None:
            return {self._index(i, coord): 1.0}
        r = complex(ratio)
        scale = math.sqrt(1.0 - abs(r) ** 2)
        out = {}
        coef = complex(scale)
        for c in range(MAX_GEOMETRIC_TERMS):
            if abs(coef) < GEOMETRIC_CUTOFF:
                break
            out[self._index(i, coord + c)] = coef
            coef *= r
        return out


@dataclass(frozen=True)
class ForwardShift(_Shift):
    multiplicity: ExtNat = ExtNat(1)

    def _point_data(self, lam):
        r2 = lam.abs2()
        if r2 < 1:
            return FredholmData(ZERO, self.multiplicity, True)
        if r2 == 1:
            return FredholmData(ZERO, ZERO, False)
        return FredholmData(ZERO, ZERO, True)

    def _kernel(self, lam):
        return iter(())

    def _cokernel(self, lam):
        # R(S - lam)^perp = N(S* - conj(lam)).
        if lam.abs2() >= 1:
            return iter(())
        return self._geometric(lam.conjugate())

    def _column(self, t):
        i, c = self._locate(t)
        return {self._index(i, c + 1): 1.0}


@dataclass(frozen=True)
class BackwardShift(_Shift):
    multiplicity: ExtNat = ExtNat(1)

    def _point_data(self, lam):
        return adjoint_data(ForwardShift(self.multiplicity)._point_data(lam.conjugate()))

    def _kernel(self, lam):
        if lam.abs2() >= 1:
            return iter(())
        return self._geometric(lam)

    def _cokernel(self, lam):
        return iter(())

    def _column(self, t):
        i, c = self._locate(t)
        if c == 1:
            return {}
        return {self._index(i, c - 1): 1.0}


@dataclass(frozen=True)
class DirectSum(ModelOp):
    parts: Tuple[ModelOp, ...]

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise ValueError("DirectSum needs at least one part")
        object.__setattr__(self, "parts", parts)

    def _point_data(self, lam):
        data = [p._point_data(lam) for p in self.parts]
        return FredholmData(
            ext_sum(d.alpha for d in data),
            ext_sum(d.beta_star for d in data),
            all(d.range_closed for d in data),
        )

    def _tagged(self, which, lam):
        streams = []
        for p, part in enumerate(self.parts, start=1):
            source = part._kernel(lam) if which == "kernel" else part._cokernel(lam)
            streams.append(_prefixed(p, source))
        return _round_robin(streams)

    def _kernel(self, lam):
        return self._tagged("kernel", lam)

    def _cokernel(self, lam):
        return self._tagged("cokernel", lam)

    def _global(self, p0: int, local: int) -> int:
        return local * len(self.parts) + p0

    def _column(self, t):
        size = len(self.parts)
        p0, local = t % size, t // size
        return {self._global(p0, r): v for r, v in self.parts[p0]._column(local).items()}

    def _embed(self, path, coord, ratio):
        if not path:
            return super()._embed(path, coord, ratio)
        p0 = path[0] - 1
        inner = self.parts[p0]._embed(path[1:], coord, ratio)
        return {self._global(p0, r): v for r, v in inner.items()}


@dataclass(frozen=True)
class Scaled(ModelOp):
    op: ModelOp
    factor: ComplexRational

    def __post_init__(self):
        object.__setattr__(self, "factor", parse_complex(self.factor))

    def _all_coordinates(self):
        for k in _count(1):
            yield BasisVector((), k)

    def _point_data(self, lam):
        if self.factor.is_zero:
            if lam.is_zero:
                return FredholmData(INF, INF, True)
            return FredholmData(ZERO, ZERO, True)
        return self.op._point_data(lam / self.factor)

    def _kernel(self, lam):
        if self.factor.is_zero:
            return self._all_coordinates() if lam.is_zero else iter(())
        return self.op._kernel(lam / self.factor)

    def _cokernel(self, lam):
        if self.factor.is_zero:
            return self._all_coordinates() if lam.is_zero else iter(())
        return self.op._cokernel(lam / self.factor)

    def _column(self, t):
        f = complex(self.factor)
        return {r: f * v for r, v in self.op._column(t).items()}

    def _embed(self, path, coord, ratio):
        return self.op._embed(path, coord, ratio)


@dataclass(frozen=True)
class Shifted(ModelOp):
    op: ModelOp
    offset: ComplexRational

    def __post_init__(self):
        object.__setattr__(self, "offset", parse_complex(self.offset))

    def _point_data(self, lam):
        return self.op._point_data(lam - self.offset)

    def _kernel(self, lam):
        return self.op._kernel(lam - self.offset)

    def _cokernel(self, lam):
        return self.op._cokernel(lam - self.offset)

    def _column(self, t):
        col = dict(self.op._column(t))
        col[t] = col.get(t, 0.0) + complex(self.offset)
        return col

    def _embed(self, path, coord, ratio):
        return self.op._embed(path, coord, ratio)


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def _check_op(op):
    if not isinstance(op, ModelOp):
        raise UnsupportedPoint(f"not a model operator: {op!r}")


def point_data(op: ModelOp, lam) -> FredholmData:
    """Exact FredholmData of op - lam*I."""
    _check_op(op)
    return op._point_data(parse_complex(lam))


def _basis(op, lam, count, which):
    _check_op(op)
    lam = parse_complex(lam)
    fd = op._point_data(lam)
    if which == "cokernel":
        if not fd.range_closed:
            raise NotAvailable(f"range of op - {lam} is not closed; no cokernel basis")
        available = fd.beta_star
        source = op._cokernel(lam)
    else:
        available = fd.alpha
        source = op._kernel(lam)
    if count < 0:
        raise ValueError("count must be nonnegative")
    if available.is_finite and count > available.value:
        raise NotAvailable(f"asked for {count} {which} vectors, only {available} exist")
    return list(islice(source, count))


def cokernel_basis(op: ModelOp, lam, count: int) -> List[BasisVector]:
    """First ``count`` orthonormal vectors spanning R(op - lam)^perp, canonical order."""
    return _basis(op, lam, count, "cokernel")


def kernel_basis(op: ModelOp, lam, count: int) -> List[BasisVector]:
    """First ``count`` orthonormal vectors spanning N(op - lam), canonical order."""
    return _basis(op, lam, count, "kernel")


def iter_cokernel(op: ModelOp, lam) -> Iterator[BasisVector]:
    _check_op(op)
    return op._cokernel(parse_complex(lam))


def iter_kernel(op: ModelOp, lam) -> Iterator[BasisVector]:
    _check_op(op)
    return op._kernel(parse_complex(lam))


def embed(op: ModelOp, vec: BasisVector) -> Dict[int, complex]:
    """Sparse coordinates (global index -> value) of a basis descriptor."""
    return op._embed(tuple(vec.path), vec.coord, vec.ratio)


def column(op: ModelOp, t: int, lam=None) -> Dict[int, complex]:
    """Image of the canonical vector t under op - lam, sparse."""
    col = dict(op._column(t))
    if lam is not None:
        col[t] = col.get(t, 0.0) - complex(parse_complex(lam))
    return col


def truncate(op: ModelOp, n: int, lam=None) -> np.ndarray:
    """Square compression of op (or op - lam) to the first n canonical basis vectors."""
    if n < 1:
        raise ValueError("truncation size must be >= 1")
    mat = np.zeros((n, n), dtype=complex)
    for t in range(n):
        for r, v in column(op, t, lam).items():
            if r < n:
                mat[r, t] += v
    return mat


def section(op: ModelOp, n: int, lam=None) -> Tuple[np.ndarray, List[int]]:
    """Rectangular compression: the first n columns and every row they reach.

    Returns the matrix and the global row indices of its rows. Rows outside
    the image are zero and do not change singular values.
    """
    if n < 1:
        raise ValueError("truncation size must be >= 1")
    cols = [column(op, t, lam) for t in range(n)]
    rows = sorted(set(range(n)).union(*[c.keys() for c in cols]))
    where = {r: i for i, r in enumerate(rows)}
    mat = np.zeros((len(rows), n), dtype=complex)
    for t, col in enumerate(cols):
        for r, v in col.items():
            mat[where[r], t] += v
    return mat, rows


def adjoint_model(op: ModelOp) -> ModelOp:
    if isinstance(op, Diagonal):
        return Diagonal(op.seq.conjugate())
    if isinstance(op, ForwardShift):
        return BackwardShift(op.multiplicity)
    if isinstance(op, BackwardShift):
        return ForwardShift(op.multiplicity)
    if isinstance(op, DirectSum):
        return DirectSum(tuple(adjoint_model(p) for p in op.parts))
    if isinstance(op, Scaled):
        return Scaled(adjoint_model(op.op), op.factor.conjugate())
    if isinstance(op, Shifted):
        return Shifted(adjoint_model(op.op), op.offset.conjugate())
    raise UnsupportedPoint(f"no adjoint rule for {type(op).__name__}")


def norm_bound(op: ModelOp) -> Fraction:
    """Exact rational upper bound on the operator norm."""
    if isinstance(op, Diagonal):
        return op.seq.norm_bound()
    if isinstance(op, (ForwardShift, BackwardShift)):
        return Fraction(1)
    if isinstance(op, DirectSum):
        return max(norm_bound(p) for p in op.parts)
    if isinstance(op, Scaled):
        return op.factor.l1() * norm_bound(op.op)
    if isinstance(op, Shifted):
        return norm_bound(op.op) + op.offset.l1()
    raise UnsupportedPoint(f"no norm rule for {type(op).__name__}")


# ---------------------------------------------------------------------------
# JSON descriptors
# ---------------------------------------------------------------------------

SEQ_KINDS = ("finite_then_constant", "harmonic", "periodic")
OP_KINDS = ("diag", "fwd_shift", "bwd_shift", "direct_sum", "scaled", "shifted", "identity", "zero")


def parse_seq(data: Any) -> Any:
    if not isinstance(data, dict) or "kind" not in data:
        raise ParseError(f"sequence descriptor needs a 'kind': {data!r}")
    kind = data["kind"]
    try:
        if kind == "finite_then_constant":
            return FiniteThenConstant(tuple(data.get("prefix", [])), data["tail"])
        if kind == "harmonic":
            return Harmonic(data.get("center", 0))
        if kind == "periodic":
            return Periodic(tuple(data["block"]))
    except KeyError as exc:
        raise ParseError(f"sequence '{kind}' is missing field {exc}") from exc
    except ValueError as exc:
        raise ParseError(f"bad sequence '{kind}': {exc}") from exc
    raise ParseError(f"unknown sequence kind {kind!r}; expected one of {SEQ_KINDS}")


def parse_model(data: Any) -> ModelOp:
    """Build a ModelOp from its JSON descriptor."""
    if not isinstance(data, dict) or "kind" not in data:
        raise ParseError(f"operator descriptor needs a 'kind': {data!r}")
    kind = data["kind"]
    try:
        if kind == "diag":
            return Diagonal(parse_seq(data["seq"]))
        if kind == "identity":
            return Diagonal(FiniteThenConstant((), ONE))
        if kind == "zero":
            return Diagonal(FiniteThenConstant((), CZERO))
        if kind == "fwd_shift":
            return ForwardShift(nat(data.get("mult", 1)))
        if kind == "bwd_shift":
            return BackwardShift(nat(data.get("mult", 1)))
        if kind == "direct_sum":
            return DirectSum(tuple(parse_model(p) for p in data["parts"]))
        if kind == "scaled":
            return Scaled(parse_model(data["op"]), parse_complex(data["factor"]))
        if kind == "shifted":
            return Shifted(parse_model(data["op"]), parse_complex(data["offset"]))
    except KeyError as exc:
        raise ParseError(f"operator '{kind}' is missing field {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"bad operator '{kind}': {exc}") from exc
    raise ParseError(f"unknown operator kind {kind!r}; expected one of {OP_KINDS}")


def model_to_json(op: ModelOp) -> Dict[str, Any]:
    if isinstance(op, Diagonal):
        return {"kind": "diag", "seq": op.seq.to_json()}
    if isinstance(op, ForwardShift):
        return {"kind": "fwd_shift", "mult": op.multiplicity.to_json()}
    if isinstance(op, BackwardShift):
        return {"kind": "bwd_shift", "mult": op.multiplicity.to_json()}
    if isinstance(op, DirectSum):
        return {"kind": "direct_sum", "parts": [model_to_json(p) for p in op.parts]}
    if isinstance(op, Scaled):
        return {"kind": "scaled", "op": model_to_json(op.op), "factor": op.factor.to_json()}
    if isinstance(op, Shifted):
        return {"kind": "shifted", "op": model_to_json(op.op), "offset": op.offset.to_json()}
    raise UnsupportedPoint(f"cannot serialize {type(op).__name__}")


def describe_model(op: ModelOp) -> str:
    """Short human-readable name used in log lines."""
    if isinstance(op, Diagonal):
        return f"diag({op.seq.to_json()['kind']})"
    if isinstance(op, ForwardShift):
        return f"S^({op.multiplicity})"
    if isinstance(op, BackwardShift):
        return f"S*^({op.multiplicity})"
    if isinstance(op, DirectSum):
        return " (+) ".join(describe_model(p) for p in op.parts)
    if isinstance(op, Scaled):
        return f"{op.factor}*{describe_model(op.op)}"
    if isinstance(op, Shifted):
        return f"{describe_model(op.op)}+{op.offset}"
    logger.debug("no short name for %s", type(op).__name__)
    return type(op).__name__
