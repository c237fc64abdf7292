"""Tests for model operators: pointwise data, bases and truncations."""

import itertools
import random
from fractions import Fraction

import numpy as np
import pytest

from fredholm_completion.errors import NotAvailable, ParseError, UnsupportedPoint
from fredholm_completion.extmath import INF, ComplexRational, ExtNat
from fredholm_completion.fredholm import FredholmData, adjoint_data
from fredholm_completion.models import (
    BackwardShift,
    BasisVector,
    Diagonal,
    DirectSum,
    FiniteThenConstant,
    ForwardShift,
    Harmonic,
    Periodic,
    Scaled,
    Shifted,
    adjoint_model,
    cokernel_basis,
    column,
    embed,
    kernel_basis,
    model_to_json,
    norm_bound,
    parse_model,
    point_data,
    section,
    truncate,
)
from fredholm_completion.verify import numerical_kernel_dim

HALF = ComplexRational(Fraction(1, 2))


def identity():
    return Diagonal(FiniteThenConstant((), 1))


def dense(vec_dict, size):
    out = np.zeros(size, dtype=complex)
    for r, v in vec_dict.items():
        if r < size:
            out[r] = v
    return out


ZOO = [
    identity(),
    Diagonal(FiniteThenConstant((0, 2), 1)),
    Diagonal(Harmonic(0)),
    Diagonal(Periodic((0, 1))),
    ForwardShift(1),
    ForwardShift(2),
    ForwardShift(INF),
    BackwardShift(1),
    BackwardShift(INF),
    DirectSum((ForwardShift(1), Diagonal(Harmonic(1)))),
    Scaled(ForwardShift(1), 2),
    Shifted(BackwardShift(1), ComplexRational(0, 1)),
]

EIGHT = DirectSum((
    ForwardShift(1),
    BackwardShift(1),
    Diagonal(Harmonic(0)),
    Diagonal(FiniteThenConstant((0, 2), 1)),
    ForwardShift(INF),
    identity(),
    Scaled(ForwardShift(1), 2),
    Shifted(BackwardShift(1), ComplexRational(0, 1)),
))


def rational_grid(step, bound=2):
    """Points re + i*im with re, im in [-bound, bound] spaced by step."""
    count = int(2 * bound / step)
    ticks = [Fraction(-bound) + k * Fraction(step) for k in range(count + 1)]
    return [ComplexRational(re, im) for re, im in itertools.product(ticks, ticks)]


def off_the_circles(lam):
    # Geometric kernel vectors decay like |mu|^N; keep |mu| away from 1 so a
    # finite section either holds them to machine precision or has none.
    x, y = float(lam.re), float(lam.im)
    for radius_sq in (x * x + y * y, x * x + (y - 1) ** 2):
        if 0.64 < radius_sq < 1.5625:
            return False
    return True


def sampled_points(seed=1729, count=50):
    grid = [lam for lam in rational_grid(Fraction(1, 10)) if off_the_circles(lam)]
    return random.Random(seed).sample(grid, count)


# ---------------------------------------------------------------------------
# Pointwise data
# ---------------------------------------------------------------------------


class TestPointData:
    def test_identity(self):
        assert point_data(identity(), 0) == FredholmData(0, 0, True)
        assert point_data(identity(), 1) == FredholmData(INF, INF, True)

    def test_finite_then_constant(self):
        op = Diagonal(FiniteThenConstant((0, 0, 2), 1))
        assert point_data(op, 0) == FredholmData(2, 2, True)
        assert point_data(op, 2) == FredholmData(1, 1, True)

    def test_harmonic(self):
        op = Diagonal(Harmonic(0))
        assert point_data(op, 0) == FredholmData(0, 0, False)
        assert point_data(op, Fraction(1, 3)) == FredholmData(1, 1, True)
        assert point_data(op, Fraction(2, 5)) == FredholmData(0, 0, True)

    def test_periodic(self):
        op = Diagonal(Periodic((0, 1)))
        assert point_data(op, 0) == FredholmData(INF, INF, True)
        assert point_data(op, 5) == FredholmData(0, 0, True)

    def test_forward_shift_inside_disc(self):
        assert point_data(ForwardShift(1), 0) == FredholmData(0, 1, True)
        assert point_data(ForwardShift(INF), ComplexRational(Fraction(1, 2), Fraction(1, 2))) == FredholmData(0, INF, True)

    def test_forward_shift_on_circle(self):
        assert point_data(ForwardShift(1), 1) == FredholmData(0, 0, False)
        assert point_data(ForwardShift(3), ComplexRational(0, -1)) == FredholmData(0, 0, False)

    def test_forward_shift_outside(self):
        assert point_data(ForwardShift(1), 2) == FredholmData(0, 0, True)

    def test_backward_shift_is_adjoint(self):
        assert point_data(BackwardShift(2), HALF) == FredholmData(2, 0, True)
        assert point_data(BackwardShift(1), 1) == FredholmData(0, 0, False)

    def test_direct_sum_adds(self):
        op = DirectSum((ForwardShift(1), BackwardShift(1), Diagonal(Harmonic(0))))
        assert point_data(op, 0) == FredholmData(1, 1, False)

    def test_scaled(self):
        assert point_data(Scaled(ForwardShift(1), 2), Fraction(3, 2)) == FredholmData(0, 1, True)
        assert point_data(Scaled(identity(), 0), 0) == FredholmData(INF, INF, True)
        assert point_data(Scaled(identity(), 0), 1) == FredholmData(0, 0, True)

    def test_shifted(self):
        assert point_data(Shifted(ForwardShift(1), 3), 3) == FredholmData(0, 1, True)

    def test_unknown_operator(self):
        with pytest.raises(UnsupportedPoint):
            point_data("shift", 0)

    @pytest.mark.parametrize("op", ZOO + [EIGHT], ids=repr)
    def test_adjoint_model_swaps_kernel_and_cokernel(self, op):
        for lam in rational_grid(Fraction(1, 2)):
            left = point_data(adjoint_model(op), lam.conjugate())
            assert left == adjoint_data(point_data(op, lam)), lam


# ---------------------------------------------------------------------------
# Kernel and cokernel bases
# ---------------------------------------------------------------------------


class TestBases:
    def test_diagonal_kernel_is_canonical(self):
        op = Diagonal(FiniteThenConstant((0, 2, 0), 1))
        assert kernel_basis(op, 0, 2) == [BasisVector((), 1), BasisVector((), 3)]

    def test_asking_for_too_many(self):
        op = Diagonal(FiniteThenConstant((0, 2, 0), 1))
        with pytest.raises(NotAvailable):
            kernel_basis(op, 0, 3)

    def test_cokernel_of_non_closed_range(self):
        with pytest.raises(NotAvailable):
            cokernel_basis(ForwardShift(1), 1, 1)

    def test_infinite_kernel_streams(self):
        vecs = kernel_basis(Diagonal(Periodic((0, 1))), 0, 4)
        assert [v.coord for v in vecs] == [1, 3, 5, 7]

    def test_shift_cokernel_at_zero(self):
        vecs = cokernel_basis(ForwardShift(3), 0, 3)
        assert vecs == [BasisVector((1,), 1), BasisVector((2,), 1), BasisVector((3,), 1)]
        assert [embed(ForwardShift(3), v) for v in vecs] == [{0: 1.0}, {1: 1.0}, {2: 1.0}]

    def test_direct_sum_round_robin(self):
        op = DirectSum((ForwardShift(1), ForwardShift(1)))
        vecs = cokernel_basis(op, 0, 2)
        assert vecs == [BasisVector((1, 1), 1), BasisVector((2, 1), 1)]
        assert embed(op, vecs[0]) == {0: 1.0}
        assert embed(op, vecs[1]) == {1: 1.0}

    def test_direct_sum_tags_every_summand(self):
        op = DirectSum((ForwardShift(1),) * 3)
        vecs = cokernel_basis(op, 0, 3)
        assert [v.path for v in vecs] == [(1, 1), (2, 1), (3, 1)]
        assert [embed(op, v) for v in vecs] == [{0: 1.0}, {1: 1.0}, {2: 1.0}]

    def test_direct_sum_kernels_stay_in_their_summand(self):
        op = DirectSum((BackwardShift(1), identity(), BackwardShift(2)))
        vecs = kernel_basis(op, 0, 3)
        assert [v.path for v in vecs] == [(1, 1), (3, 1), (3, 2)]
        supports = [set(embed(op, v)) for v in vecs]
        assert supports[0] == {0}
        assert all(r % 3 == 2 for s in supports[1:] for r in s)

    def test_geometric_kernel_vector(self):
        op = BackwardShift(1)
        (vec,) = kernel_basis(op, HALF, 1)
        assert vec.ratio == HALF
        x = dense(embed(op, vec), 120)
        assert np.linalg.norm(x) == pytest.approx(1.0, abs=1e-12)
        residual = truncate(op, 120, HALF) @ x
        assert np.linalg.norm(residual) < 1e-12

    def test_geometric_cokernel_vector(self):
        op = ForwardShift(1)
        lam = ComplexRational(Fraction(1, 2), Fraction(1, 4))
        (vec,) = cokernel_basis(op, lam, 1)
        y = dense(embed(op, vec), 120)
        # Orthogonal to every column of S - lam that fits inside the cut.
        gram = truncate(op, 120, lam)[:, :100].conj().T @ y
        assert np.max(np.abs(gram)) < 1e-12

    def test_infinite_multiplicity_cokernel(self):
        op = ForwardShift(INF)
        vecs = cokernel_basis(op, 0, 5)
        supports = [set(embed(op, v)) for v in vecs]
        assert all(len(s) == 1 for s in supports)
        assert len(set().union(*supports)) == 5


# ---------------------------------------------------------------------------
# Truncations
# ---------------------------------------------------------------------------


class TestTruncation:
    def test_identity_rank(self):
        assert np.linalg.matrix_rank(truncate(identity(), 200)) == 200

    def test_forward_shift_square_loses_one(self):
        assert np.linalg.matrix_rank(truncate(ForwardShift(1), 200)) == 199

    def test_forward_shift_section_is_injective(self):
        mat, rows = section(ForwardShift(1), 200)
        assert mat.shape == (201, 200)
        assert rows[-1] == 200
        s = np.linalg.svd(mat, compute_uv=False)
        assert s[-1] == pytest.approx(1.0)

    def test_harmonic_smallest_singular_value(self):
        s = np.linalg.svd(truncate(Diagonal(Harmonic(0)), 200), compute_uv=False)
        assert s[-1] == pytest.approx(1 / 200)

    def test_lambda_shift(self):
        mat = truncate(identity(), 5, 1)
        assert np.allclose(mat, 0)

    def test_column_of_shifted(self):
        assert column(Shifted(ForwardShift(1), 2), 0) == {1: 1.0, 0: complex(2)}

    def test_bad_size(self):
        with pytest.raises(ValueError):
            truncate(identity(), 0)

    @pytest.mark.parametrize("op", ZOO, ids=repr)
    def test_adjoint_is_conjugate_transpose(self, op):
        left = truncate(adjoint_model(op), 60)
        right = truncate(op, 60).conj().T
        assert np.allclose(left, right)

    @pytest.mark.parametrize("op", ZOO, ids=repr)
    def test_norm_bound(self, op):
        norm = np.linalg.norm(truncate(op, 60), 2)
        assert norm <= float(norm_bound(op)) + 1e-9

    def test_direct_sum_of_eight_is_a_block_permutation(self):
        m, size = 10, len(EIGHT.parts)
        mat = truncate(EIGHT, size * m)
        blocks = [[local * size + p for local in range(m)] for p in range(size)]
        for p, part in enumerate(EIGHT.parts):
            for q, other in enumerate(blocks):
                block = mat[np.ix_(blocks[p], other)]
                if p == q:
                    assert np.allclose(block, truncate(part, m)), part
                else:
                    assert not block.any(), (p, q)


# ---------------------------------------------------------------------------
# Agreement with finite sections
# ---------------------------------------------------------------------------


class TestSectionOracle:
    SIZE = 128

    @pytest.mark.parametrize("op", ZOO, ids=repr)
    def test_finite_alpha_matches_section_kernel(self, op):
        checked = 0
        for lam in sampled_points():
            alpha = point_data(op, lam).alpha
            if alpha.is_inf:
                continue
            dim, _ = numerical_kernel_dim(section(op, self.SIZE, lam)[0], 1e-10)
            assert dim == alpha.value, lam
            checked += 1
        assert checked > 0

    def test_points_are_reproducible(self):
        assert sampled_points() == sampled_points()
        assert len(set(sampled_points())) == 50

    def test_harmonic_sigma_min_is_inverse_size(self):
        for n in (50, 100, 200):
            s = np.linalg.svd(section(Diagonal(Harmonic(0)), n)[0], compute_uv=False)
            assert abs(s[-1] - 1 / n) < 1e-13


# ---------------------------------------------------------------------------
# Descriptors
# ---------------------------------------------------------------------------


class TestDescriptors:
    @pytest.mark.parametrize("descriptor", [
        {"kind": "fwd_shift", "mult": "inf"},
        {"kind": "bwd_shift", "mult": 2},
        {"kind": "diag", "seq": {"kind": "harmonic", "center": [0, 0]}},
        {"kind": "diag", "seq": {"kind": "periodic", "block": [[0, 0], [1, 0]]}},
        {"kind": "direct_sum", "parts": [{"kind": "fwd_shift", "mult": 1}, {"kind": "bwd_shift", "mult": 1}]},
        {"kind": "scaled", "op": {"kind": "fwd_shift", "mult": 1}, "factor": ["1/2", 0]},
    ])
    def test_canonical_descriptors_survive(self, descriptor):
        assert model_to_json(parse_model(descriptor)) == descriptor

    def test_identity_shorthand(self):
        assert point_data(parse_model({"kind": "identity"}), 1) == FredholmData(INF, INF, True)

    def test_zero_multiplicity_rejected(self):
        with pytest.raises(ParseError):
            parse_model({"kind": "fwd_shift", "mult": 0})

    def test_unknown_kind(self):
        with pytest.raises(ParseError, match="unknown operator kind"):
            parse_model({"kind": "volterra"})

    def test_missing_field(self):
        with pytest.raises(ParseError, match="missing field"):
            parse_model({"kind": "scaled", "op": {"kind": "identity"}})

    def test_float_entries_rejected(self):
        with pytest.raises(ParseError):
            parse_model({"kind": "diag", "seq": {"kind": "finite_then_constant", "prefix": [], "tail": 0.5}})

    def test_multiplicity_is_extnat(self):
        assert parse_model({"kind": "fwd_shift"}).multiplicity == ExtNat(1)
