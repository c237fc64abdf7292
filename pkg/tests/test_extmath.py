"""Tests for extmath module."""

from fractions import Fraction

import pytest

from fredholm_completion.errors import BothInfinite, FredholmError, ParseError
from fredholm_completion.extmath import (
    INF,
    ZERO,
    ComplexRational,
    ExtInt,
    ExtNat,
    ext_add,
    ext_leq,
    ext_sub,
    ext_sum,
    nat,
    parse_complex,
    parse_rational,
)

ALPHABET = [ExtNat(0), ExtNat(1), ExtNat(2), ExtNat(7), INF]


# ---------------------------------------------------------------------------
# Extended naturals
# ---------------------------------------------------------------------------


class TestExtNat:
    def test_add_finite(self):
        assert ext_add(ExtNat(3), ExtNat(4)) == ExtNat(7)

    def test_add_saturates(self):
        assert ext_add(ExtNat(5), INF) == INF
        assert ext_add(INF, INF) == INF
        assert ExtNat(2) + 3 == ExtNat(5)

    def test_sum_of_nothing_is_zero(self):
        assert ext_sum([]) == ZERO
        assert ext_sum([ExtNat(1), INF, ExtNat(2)]) == INF

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            ExtNat(-1)

    def test_bool_rejected(self):
        with pytest.raises(ValueError):
            ExtNat(True)

    @pytest.mark.parametrize("a", ALPHABET)
    @pytest.mark.parametrize("b", ALPHABET)
    def test_add_commutes(self, a, b):
        assert ext_add(a, b) == ext_add(b, a)

    @pytest.mark.parametrize("a", ALPHABET)
    @pytest.mark.parametrize("b", ALPHABET)
    @pytest.mark.parametrize("c", ALPHABET)
    def test_add_associates(self, a, b, c):
        assert ext_add(ext_add(a, b), c) == ext_add(a, ext_add(b, c))

    @pytest.mark.parametrize("a", ALPHABET)
    def test_inf_is_top(self, a):
        assert ext_leq(a, INF)
        assert ext_leq(ZERO, a)

    def test_inf_leq_inf(self):
        assert ext_leq(INF, INF)
        assert not ext_leq(INF, ExtNat(10 ** 9))

    @pytest.mark.parametrize("a", ALPHABET)
    @pytest.mark.parametrize("b", ALPHABET)
    def test_order_is_total(self, a, b):
        assert ext_leq(a, b) or ext_leq(b, a)

    def test_strict_order(self):
        assert ExtNat(1) < ExtNat(2) < INF
        assert not INF < INF

    def test_nat_coercion(self):
        assert nat("inf") == INF
        assert nat("INF") == INF
        assert nat(4) == ExtNat(4)
        assert nat("12") == ExtNat(12)
        with pytest.raises(ParseError):
            nat("lots")
        with pytest.raises(ParseError):
            nat(1.5)

    def test_json(self):
        assert INF.to_json() == "inf"
        assert ExtNat(3).to_json() == 3


class TestExtSub:
    def test_finite(self):
        assert ext_sub(ExtNat(5), ExtNat(2)) == ExtInt(3)
        assert ext_sub(ExtNat(2), ExtNat(5)) == ExtInt(-3)

    def test_infinite_sides(self):
        assert ext_sub(INF, ExtNat(5)) == ExtInt.pos_inf()
        assert ext_sub(ExtNat(5), INF) == ExtInt.neg_inf()

    def test_both_infinite_raises(self):
        with pytest.raises(BothInfinite):
            ext_sub(INF, INF)

    def test_both_infinite_is_library_and_arithmetic_error(self):
        assert issubclass(BothInfinite, FredholmError)
        assert issubclass(BothInfinite, ArithmeticError)

    def test_negation(self):
        assert -ExtInt.pos_inf() == ExtInt.neg_inf()
        assert -ExtInt(4) == ExtInt(-4)

    def test_extint_order(self):
        assert ExtInt.neg_inf() < ExtInt(-10 ** 6) < ExtInt(0) < ExtInt.pos_inf()
        assert ExtInt(0) <= 0
        assert ExtInt.pos_inf() > 10 ** 12


# ---------------------------------------------------------------------------
# Exact scalars
# ---------------------------------------------------------------------------


class TestRational:
    @pytest.mark.parametrize("text,expected", [
        ("0.05", Fraction(1, 20)),
        ("-1.25", Fraction(-5, 4)),
        ("1/3", Fraction(1, 3)),
        ("2", Fraction(2)),
    ])
    def test_parse_strings(self, text, expected):
        assert parse_rational(text) == expected

    def test_parse_num_den(self):
        assert parse_rational({"num": 3, "den": 6}) == Fraction(1, 2)

    def test_floats_rejected(self):
        with pytest.raises(ParseError):
            parse_rational(0.05)

    def test_bool_rejected(self):
        with pytest.raises(ParseError):
            parse_rational(True)

    def test_garbage_rejected(self):
        with pytest.raises(ParseError):
            parse_rational("one half")


class TestComplexRational:
    def test_arithmetic_is_exact(self):
        a = ComplexRational(Fraction(1, 3), 1)
        b = ComplexRational(Fraction(2, 3), -1)
        assert a + b == ComplexRational(1, 0)
        assert (a * b) == ComplexRational(Fraction(2, 9) + 1, Fraction(-1, 3) + Fraction(2, 3))

    def test_division_roundtrip(self):
        a = ComplexRational(3, 4)
        b = ComplexRational(1, -2)
        assert (a / b) * b == a

    def test_divide_by_zero(self):
        with pytest.raises(ZeroDivisionError):
            ComplexRational(1) / 0

    def test_conjugate_and_modulus(self):
        z = ComplexRational(3, 4)
        assert z.conjugate() == ComplexRational(3, -4)
        assert z.abs2() == 25
        assert z.l1() == 7

    def test_equality_with_int(self):
        assert ComplexRational(2, 0) == 2
        assert ComplexRational(2, 1) != 2

    def test_parse_complex_forms(self):
        assert parse_complex(["1/2", "-0.5"]) == ComplexRational(Fraction(1, 2), Fraction(-1, 2))
        assert parse_complex(3) == ComplexRational(3, 0)
        with pytest.raises(ParseError):
            parse_complex([1, 2, 3])

    def test_json(self):
        assert ComplexRational(Fraction(1, 2), 3).to_json() == ["1/2", 3]

    def test_complex_conversion(self):
        assert complex(ComplexRational(Fraction(1, 4), -2)) == complex(0.25, -2)
