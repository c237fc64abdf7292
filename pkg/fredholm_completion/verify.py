"""
Finite-section checks of constructed completions and pointwise data.

Truncations are column sections: the first N canonical basis vectors of each
space and every row those columns reach. Column sections of an injective
operator stay injective, so kernel dimensions are read off directly; the
closed-range question is approached through the smallest singular value on
the complement of the predicted kernel. All verdicts are advisory: they hold
at the tested sizes.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .construct import CertificateOperator, CompletionCertificate, RowConstruction, covered_indices
from .errors import NumericalIllConditioned
from .extmath import ExtNat, parse_complex
from .fredholm import FredholmData, deficiency
from .header import logger
from .models import ModelOp, describe_model, point_data, section
from .pool import ordered_map

DEFAULT_TOL = 1e-10
DEFAULT_SIZES = (64, 128, 256)
ISOMETRY_TOL = 1e-12
# A closed range keeps sigma_min bounded; allow at most (N1/N2)**0.5 shrinkage between sizes.
CLOSED_RANGE_EXPONENT = 0.5


@dataclass
class TruncationReport:
    sizes: List[int]
    kernel_dims: List[int]
    sigma_max: List[float]
    sigma_min: List[float]
    sigma_min_complement: List[float]
    tol: float
    predicted_alpha: ExtNat
    predicted_closed: bool
    passed: bool = False
    isometry_residual: Optional[float] = None
    cokernel_infinite: Optional[bool] = None
    notes: List[str] = field(default_factory=list)

    def __bool__(self):
        return self.passed

    def to_json(self) -> Dict[str, Any]:
        return {
            "sizes": list(self.sizes),
            "kernel_dims": list(self.kernel_dims),
            "sigma_max": [float(x) for x in self.sigma_max],
            "sigma_min": [float(x) for x in self.sigma_min],
            "sigma_min_complement": [float(x) for x in self.sigma_min_complement],
            "tol": self.tol,
            "predicted_alpha": self.predicted_alpha.to_json(),
            "predicted_closed": self.predicted_closed,
            "isometry_residual": self.isometry_residual,
            "cokernel_infinite": self.cokernel_infinite,
            "pass": self.passed,
            "notes": list(self.notes),
        }


def check_sizes(sizes) -> List[int]:
    sizes = [int(n) for n in sizes]
    if len(sizes) < 2:
        raise ValueError("need at least two truncation sizes")
    if any(n < 1 for n in sizes) or sorted(set(sizes)) != sizes:
        raise ValueError(f"sizes must be positive and strictly ascending, got {sizes}")
    return sizes


def singular_values(mat: np.ndarray) -> np.ndarray:
    try:
        s = np.linalg.svd(mat, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalIllConditioned(f"SVD failed: {exc}") from exc
    if s.size == 0 or s[0] == 0:
        raise NumericalIllConditioned("truncation is identically zero")
    return s


def numerical_kernel_dim(mat: np.ndarray, tol: float = DEFAULT_TOL) -> Tuple[int, np.ndarray]:
    """Column-space kernel dimension: columns minus singular values above tol * sigma_max."""
    s = singular_values(mat)
    rank = int(np.sum(s > tol * s[0]))
    return mat.shape[1] - rank, s


def holds_floor(sigmas: Sequence[float], sizes: Sequence[int]) -> bool:
    """Closed-range proxy over the two largest sizes; a 1/N decay fails it."""
    allowed = (sizes[-2] / sizes[-1]) ** CLOSED_RANGE_EXPONENT
    return sigmas[-1] >= sigmas[-2] * allowed


def _complement_sigma(s: np.ndarray, ncols: int, alpha: ExtNat, kernel_dim: int) -> float:
    """Smallest singular value once the predicted kernel is deflated."""
    if alpha.is_finite:
        idx = ncols - alpha.value - 1
    else:
        idx = ncols - kernel_dim - 1
    if 0 <= idx < s.size:
        return float(s[idx])
    return 0.0


# ---------------------------------------------------------------------------
# Sections of the full system
# ---------------------------------------------------------------------------


def system_section(diagonals: Sequence[ModelOp], cert: CompletionCertificate, size: int,
                   lam=None, rows_per_space: Optional[int] = None):
    """Section of T_n^d(A) - lam on the first ``size`` basis vectors of every space.

    Columns follow the canonical interleaving (t * n + space - 1). With
    ``rows_per_space`` the rows are cut to the first that many of each space
    instead (a compression), which is what cokernel dimensions are read from.
    Returns (matrix, row keys) where a row key is (space, global index).
    """
    lam = cert.lam if lam is None else parse_complex(lam)
    n = cert.n
    evaluator = CertificateOperator(cert, diagonals, kernel_limit=4 * size + 16)
    cols = [evaluator.column(space, t, lam) for t in range(size) for space in range(1, n + 1)]
    if rows_per_space is None:
        keys = {(space, r) for space in range(1, n + 1) for r in range(size)}
        for col in cols:
            keys.update(col)
    else:
        keys = {(space, r) for space in range(1, n + 1) for r in range(rows_per_space)}
    row_keys = sorted(keys, key=lambda k: (k[1], k[0]))
    where = {k: i for i, k in enumerate(row_keys)}
    mat = np.zeros((len(row_keys), len(cols)), dtype=complex)
    for c, col in enumerate(cols):
        for key, v in col.items():
            i = where.get(key)
            if i is not None:
                mat[i, c] += v
    return mat, row_keys


def partial_isometry_residual(cert: CompletionCertificate, diagonals: Sequence[ModelOp],
                              size: int) -> float:
    """max |G - I| over the Gram matrix of every row's first ``size`` target vectors per map.

    Sources of one map are orthonormal and sources of different maps live in
    different spaces, so the row acts as a partial isometry exactly when its
    targets are orthonormal; shared targets show up as off-diagonal ones.
    """
    evaluator = CertificateOperator(cert, diagonals, kernel_limit=4 * size + 16)
    worst = 0.0
    for row in cert.rows():
        vectors = []
        for bm in cert.entries:
            if bm.row != row:
                continue
            steps = size if bm.count is None else min(bm.count, size)
            vectors.extend(evaluator.target_vector(bm, s) for s in range(1, steps + 1))
        if not vectors:
            continue
        support = sorted(set().union(*vectors))
        where = {r: i for i, r in enumerate(support)}
        mat = np.zeros((len(support), len(vectors)), dtype=complex)
        for c, vec in enumerate(vectors):
            for r, v in vec.items():
                mat[where[r], c] = v
        gram = mat.conj().T @ mat
        residual = float(np.max(np.abs(gram - np.eye(len(vectors)))))
        logger.debug("row %d: %d target vectors, isometry residual %.3e", row, len(vectors), residual)
        worst = max(worst, residual)
    return worst


def _cokernel_infinite(cert: CompletionCertificate, diagonals: Sequence[ModelOp]) -> Optional[bool]:
    rows = sorted({bm.row for bm in cert.entries if bm.target == "cokernel"})
    if not rows:
        return None
    dims = {row: deficiency(point_data(diagonals[row - 1], cert.lam)) for row in rows}
    return any(covered_indices(cert, row, dims[row]).complement_infinite for row in rows)


# ---------------------------------------------------------------------------
# Verifiers
# ---------------------------------------------------------------------------


def _kernel_and_closed(report: TruncationReport, tol: float) -> bool:
    kd = report.kernel_dims
    alpha = report.predicted_alpha
    if alpha.is_finite:
        ok = kd[-1] == alpha.value and kd[-2] == alpha.value
        if not ok:
            report.notes.append(f"kernel dims {kd[-2:]} do not settle at {alpha}")
    else:
        ok = kd[-1] > kd[-2]
        if not ok:
            report.notes.append(f"kernel dims {kd[-2:]} do not grow for infinite nullity")
    sc = report.sigma_min_complement
    if report.predicted_closed:
        floor_ok = holds_floor(sc, report.sizes) and sc[-1] > tol * report.sigma_max[-1]
        if not floor_ok:
            report.notes.append(f"sigma_min on the complement decays: {sc[-2]:.3e} -> {sc[-1]:.3e}")
        ok = ok and floor_ok
    return ok


def verify_completion(diagonals: Sequence[ModelOp], cert: CompletionCertificate, lam=None,
                      sizes=DEFAULT_SIZES, tol: float = DEFAULT_TOL, workers=None) -> TruncationReport:
    """Check a certificate's predicted nullity, closedness and cokernel on finite sections."""
    sizes = check_sizes(sizes)
    lam = cert.lam if lam is None else parse_complex(lam)
    alpha = cert.predicted.alpha_T

    def run(size):
        mat, _ = system_section(diagonals, cert, size, lam)
        dim, s = numerical_kernel_dim(mat, tol)
        return dim, s, mat.shape[1]

    results = ordered_map(run, sizes, workers)
    report = TruncationReport(
        sizes=sizes,
        kernel_dims=[dim for dim, _, _ in results],
        sigma_max=[float(s[0]) for _, s, _ in results],
        sigma_min=[float(s[-1]) for _, s, _ in results],
        sigma_min_complement=[_complement_sigma(s, cols, alpha, dim) for dim, s, cols in results],
        tol=tol,
        predicted_alpha=alpha,
        predicted_closed=cert.predicted.range_closed_T,
    )
    ok = _kernel_and_closed(report, tol)

    report.cokernel_infinite = _cokernel_infinite(cert, diagonals)
    if report.cokernel_infinite is not None and report.cokernel_infinite != cert.predicted.beta_T.is_inf:
        report.notes.append(f"covered cokernel indices disagree with beta_T={cert.predicted.beta_T}")
        ok = False
    if isinstance(cert.strategy, RowConstruction) and not report.cokernel_infinite:
        ok = False

    if cert.entries:
        report.isometry_residual = partial_isometry_residual(cert, diagonals, sizes[-1])
        if report.isometry_residual >= ISOMETRY_TOL:
            report.notes.append(f"entries are not partial isometries (residual {report.isometry_residual:.3e})")
            ok = False

    report.passed = ok
    logger.info("verified %s certificate at %s: kernel dims %s -> %s",
                cert.target.value, lam, report.kernel_dims, "pass" if ok else "fail")
    return report


def verify_point_data(op: ModelOp, lam, sizes=DEFAULT_SIZES, tol: float = DEFAULT_TOL,
                      workers=None) -> TruncationReport:
    """Compare the symbolic FredholmData of op - lam with its column sections."""
    sizes = check_sizes(sizes)
    lam = parse_complex(lam)
    fd: FredholmData = point_data(op, lam)

    def run(size):
        mat, _ = section(op, size, lam)
        dim, s = numerical_kernel_dim(mat, tol)
        return dim, s, mat.shape[1]

    results = ordered_map(run, sizes, workers)
    report = TruncationReport(
        sizes=sizes,
        kernel_dims=[dim for dim, _, _ in results],
        sigma_max=[float(s[0]) for _, s, _ in results],
        sigma_min=[float(s[-1]) for _, s, _ in results],
        sigma_min_complement=[_complement_sigma(s, cols, fd.alpha, dim) for dim, s, cols in results],
        tol=tol,
        predicted_alpha=fd.alpha,
        predicted_closed=fd.range_closed,
    )
    ok = _kernel_and_closed(report, tol)
    if not fd.range_closed:
        sc = report.sigma_min_complement
        decaying = all(b < a for a, b in zip(sc, sc[1:]))
        if not decaying:
            report.notes.append("range is not closed but sigma_min does not decay")
            if len(sizes) >= 3:
                ok = False
    report.passed = ok
    logger.info("point data of %s at %s: symbolic %s, kernel dims %s",
                describe_model(op), lam, fd, report.kernel_dims)
    return report
