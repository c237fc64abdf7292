"""Tests for completion certificates."""

import json

import pytest

from fredholm_completion.construct import (
    BasisMap,
    CertificateOperator,
    apply_certificate,
    certificate_from_json,
    construct,
    covered_indices,
    zero_certificate,
)
from fredholm_completion.decision import (
    ColumnConstruction,
    FredholmPair,
    RowConstruction,
    Target,
    Verdict,
    ZeroCompletion,
)
from fredholm_completion.errors import NotConstructible, ParseError
from fredholm_completion.extmath import INF, ZERO, ExtNat
from fredholm_completion.models import (
    BackwardShift,
    Diagonal,
    DirectSum,
    FiniteThenConstant,
    ForwardShift,
)


def identity():
    return Diagonal(FiniteThenConstant((), 1))


@pytest.fixture
def shift_pair():
    return [ForwardShift(INF), BackwardShift(INF)]


@pytest.fixture
def case_two():
    """Row construction that starts at the second diagonal."""
    return [identity(), ForwardShift(INF), BackwardShift(INF)]


@pytest.fixture
def shift_identity_shift():
    return [ForwardShift(INF), identity(), BackwardShift(INF)]


# ---------------------------------------------------------------------------
# Row device
# ---------------------------------------------------------------------------


class TestRowConstruction:
    def test_two_diagonals(self, shift_pair):
        cert = construct(Target.UPPER_WEYL, shift_pair, 0)
        assert cert.strategy == RowConstruction(1)
        assert cert.entries == (BasisMap(row=1, col=2, stride=2, offset=0),)
        assert cert.predicted.alpha_T == ZERO
        assert cert.predicted.beta_T == INF
        assert cert.predicted.range_closed_T

    def test_maps_even_cokernel_vectors(self, shift_pair):
        bm = construct(Target.UPPER_WEYL, shift_pair, 0).entry(1, 2)
        assert [bm.target_number(s) for s in (1, 2, 3)] == [2, 4, 6]

    def test_starting_at_second_row(self, case_two):
        cert = construct(Target.UPPER_WEYL, case_two, 0)
        assert cert.strategy == RowConstruction(2)
        assert cert.entries == (BasisMap(row=2, col=3, stride=3, offset=0),)
        assert cert.entry(1, 2) is None
        assert cert.predicted.kernel_shape == (ZERO, ZERO, ZERO)

    def test_first_row_of_three(self, shift_identity_shift):
        cert = construct(Target.UPPER_WEYL, shift_identity_shift, 0)
        assert [(bm.row, bm.col, bm.stride, bm.offset) for bm in cert.entries] == [(1, 2, 3, 0), (1, 3, 3, 1)]

    def test_kernel_is_first_diagonal_kernels(self):
        d1 = DirectSum((ForwardShift(INF), Diagonal(FiniteThenConstant((0,), 1))))
        cert = construct(Target.UPPER_FREDHOLM, [d1, BackwardShift(INF)], 0)
        assert cert.strategy == RowConstruction(1)
        assert cert.predicted.alpha_T == ExtNat(1)

    def test_not_constructible(self):
        with pytest.raises(NotConstructible) as excinfo:
            construct(Target.UPPER_WEYL, [identity(), BackwardShift(INF)], 0)
        assert excinfo.value.outcome.verdict is Verdict.NOT_EXISTS

    def test_deterministic(self, shift_identity_shift):
        first = construct(Target.UPPER_WEYL, shift_identity_shift, 0)
        second = construct(Target.UPPER_WEYL, shift_identity_shift, 0)
        assert json.dumps(first.to_json()) == json.dumps(second.to_json())


class TestOtherDevices:
    def test_zero_completion(self):
        cert = construct(Target.FREDHOLM, [identity(), identity()], 0)
        assert cert.strategy == ZeroCompletion()
        assert cert.entries == ()
        assert cert.predicted.alpha_T == ZERO
        assert cert.predicted.beta_T == ZERO

    def test_column_device(self, shift_pair):
        cert = construct(Target.LOWER_WEYL, shift_pair, 0)
        assert cert.strategy == ColumnConstruction(2)
        (bm,) = cert.entries
        assert (bm.row, bm.col, bm.source, bm.target) == (1, 2, "kernel", "canonical")
        assert [bm.source_number(s) for s in (1, 2, 3)] == [2, 4, 6]
        assert cert.predicted.alpha_T == INF

    def test_fredholm_bridge(self, shift_pair):
        cert = construct(Target.FREDHOLM, shift_pair, 0)
        assert cert.strategy == FredholmPair(1, 2)
        (bm,) = cert.entries
        assert (bm.stride, bm.offset, bm.src_stride, bm.src_offset) == (1, 0, 1, 0)
        assert cert.predicted.alpha_T == ZERO
        assert cert.predicted.beta_T == ZERO

    def test_fredholm_pair_with_infinite_middle(self):
        ds = [ForwardShift(INF), DirectSum((ForwardShift(INF), BackwardShift(INF))), BackwardShift(INF)]
        cert = construct(Target.FREDHOLM, ds, 0)
        assert cert.strategy == FredholmPair(1, 3)
        row_side, bridge, col_side = cert.entry(1, 2), cert.entry(1, 3), cert.entry(2, 3)
        steps = range(1, 50)
        # The middle kernel and the bridge split R(D_1)^perp into odd and even numbers.
        assert [row_side.target_number(s) for s in (1, 2, 3)] == [1, 3, 5]
        assert [bridge.target_number(s) for s in (1, 2, 3)] == [2, 4, 6]
        # Same split of N(D_3) between the middle cokernel and the bridge.
        assert {col_side.source_number(s) for s in steps}.isdisjoint({bridge.source_number(s) for s in steps})

    def test_zero_certificate_ignores_decision(self):
        cert = zero_certificate([BackwardShift(1), ForwardShift(1)], 0)
        assert cert.entries == ()
        assert cert.predicted.alpha_T == ExtNat(1)
        assert cert.predicted.beta_T == ExtNat(1)


# ---------------------------------------------------------------------------
# Covered cokernel indices
# ---------------------------------------------------------------------------


class TestCoveredIndices:
    def test_two_first_row(self, shift_pair):
        cover = covered_indices(construct(Target.UPPER_WEYL, shift_pair, 0), 1)
        assert cover.covered_upto(1000) == list(range(2, 1001, 2))
        assert cover.uncovered_upto(9) == [1, 3, 5, 7, 9]
        assert cover.complement_infinite

    def test_three_first_row(self, shift_identity_shift):
        cover = covered_indices(construct(Target.UPPER_WEYL, shift_identity_shift, 0), 1)
        assert cover.modulus == 3
        assert cover.covered_residues == (0, 1)
        assert cover.uncovered_residues == (2,)
        assert cover.covered_upto(12) == [3, 4, 6, 7, 9, 10, 12]

    def test_three_second_row(self, case_two):
        cover = covered_indices(construct(Target.UPPER_WEYL, case_two, 0), 2)
        assert cover.covered_upto(12) == [3, 6, 9, 12]
        assert cover.uncovered_residues == (1, 2)

    def test_bridge_covers_everything(self, shift_pair):
        cover = covered_indices(construct(Target.FREDHOLM, shift_pair, 0), 1)
        assert not cover.complement_infinite
        assert cover.uncovered_upto(100) == []

    def test_finite_cokernel_exhausted_by_finite_map(self):
        ops = [ForwardShift(INF), ForwardShift(1), BackwardShift(1), BackwardShift(INF)]
        cert = construct(Target.FREDHOLM, ops, 0)
        assert cert.strategy == FredholmPair(1, 4)
        assert cert.predicted.cokernel_shape == (INF, ExtNat(1), ZERO, ZERO)
        cover = covered_indices(cert, 2)
        assert cover.progressions == ((1, 1, 1),)
        assert cover.cokernel_dim == ExtNat(1)
        assert cover.uncovered_finite == ()
        assert not cover.complement_infinite
        assert not covered_indices(cert, 1).complement_infinite

    def test_finite_cokernel_partly_covered(self):
        ops = [ForwardShift(INF), ForwardShift(1), BackwardShift(1), BackwardShift(INF)]
        cert = construct(Target.FREDHOLM, ops, 0)
        cover = covered_indices(cert, 2, ExtNat(3))
        assert cover.uncovered_finite == (2, 3)
        assert cover.uncovered_upto(10) == [2, 3]
        assert not cover.complement_infinite

    def test_unknown_cokernel_with_finite_maps_is_open(self):
        ops = [ForwardShift(INF), ForwardShift(1), BackwardShift(1), BackwardShift(INF)]
        cert = construct(Target.FREDHOLM, ops, 0)
        cover = covered_indices(cert, 2, INF)
        assert cover.uncovered_residues == (0,)
        assert cover.complement_infinite


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


class TestApplyCertificate:
    def test_zero_vector(self, shift_pair):
        cert = construct(Target.UPPER_WEYL, shift_pair, 0)
        assert apply_certificate(cert, shift_pair, 0, [{}, {}]) == [{}, {}]

    def test_first_vector_of_second_space(self, shift_pair):
        cert = construct(Target.UPPER_WEYL, shift_pair, 0)
        out = apply_certificate(cert, shift_pair, 0, [{}, {0: 1.0}])
        # f_2 is the first coordinate of the second summand; D_2 kills e_1.
        assert out == [{2: 1.0}, {}]

    def test_kernel_of_first_diagonal_is_kept(self):
        d1 = DirectSum((ForwardShift(INF), Diagonal(FiniteThenConstant((0,), 1))))
        ops = [d1, BackwardShift(INF)]
        cert = construct(Target.UPPER_WEYL, ops, 0)
        assert apply_certificate(cert, ops, 0, [{1: 1.0}, {}]) == [{}, {}]

    def test_wrong_component_count(self, shift_pair):
        cert = construct(Target.UPPER_WEYL, shift_pair, 0)
        with pytest.raises(ValueError):
            apply_certificate(cert, shift_pair, 0, [{}])

    def test_evaluator_needs_matching_arity(self, shift_pair):
        cert = construct(Target.UPPER_WEYL, shift_pair, 0)
        with pytest.raises(ValueError):
            CertificateOperator(cert, shift_pair + [identity()])


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


class TestCertificateJson:
    @pytest.mark.parametrize("target", [Target.UPPER_WEYL, Target.LOWER_WEYL, Target.FREDHOLM],
                             ids=lambda t: t.value)
    def test_json_reparses(self, shift_pair, target):
        cert = construct(target, shift_pair, 0)
        assert certificate_from_json(json.loads(json.dumps(cert.to_json()))) == cert

    def test_entry_layout(self, shift_pair):
        data = construct(Target.UPPER_WEYL, shift_pair, 0).to_json()
        assert data["entries"] == [{"i": 1, "j": 2, "map": {"stride": 2, "offset": 0}}]
        assert data["predicted"]["beta_T"] == "inf"

    def test_missing_field(self):
        with pytest.raises(ParseError):
            certificate_from_json({"n": 2, "target": "fredholm"})

    def test_lower_triangular_entry_rejected(self):
        with pytest.raises(ValueError):
            BasisMap(row=2, col=1, stride=1, offset=0)
