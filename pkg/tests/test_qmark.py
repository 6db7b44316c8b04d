import inspect
import random
from fractions import Fraction

import numpy as np
import pytest
from mpmath import mp, mpf

from src.numerics.precision import working_precision
from src.qmark.continued_fraction import ContinuedFraction, cf_of_rational, cf_to_rational, cf_of_real
from src.qmark.minkowski import (
    F_eval, F_exact, qmark_eval, qmark_exact, qmark_inverse, fixed_points, check_distribution_eq, check_halving,
    dyadic_midpoint_quadrature, salem_exponent,
)
from src.qmark.models import DyadicValue, LazyReal, parse_real
from src.tree.distribution import quadrature_dF
from src.utils.exceptions import DomainError, PrecisionLossError, ValidationError


def test_cf_of_rational_examples() -> None:
    assert cf_of_rational(Fraction(3, 2)).quotients == (1, 2)
    assert cf_of_rational(Fraction(2, 5)).quotients == (0, 2, 2)
    assert cf_of_rational(1).quotients == (1,)
    assert str(cf_of_rational(Fraction(2, 5))) == "[0;2,2]"


def test_cf_canonical_form_and_round_trip() -> None:
    assert ContinuedFraction((0, 2, 1, 1)).canonical() == ContinuedFraction((0, 2, 2))
    for x in (Fraction(355, 113), Fraction(7, 3), Fraction(0), Fraction(1, 9)):
        assert cf_to_rational(cf_of_rational(x)) == x
    with pytest.raises(ValidationError):
        ContinuedFraction((1, 0))


def test_F_examples() -> None:
    assert F_eval(1, 64) == mpf("0.5")
    assert F_exact(Fraction(1, 2)).to_fraction() == Fraction(1, 4)
    assert F_exact(2).to_fraction() == Fraction(3, 4)
    with working_precision(160):
        assert abs(F_eval(parse_real("golden"), 150) - mpf(2) / 3) < mpf(2) ** -148
        assert abs(F_eval(Fraction(3, 7), 128) + F_eval(Fraction(7, 3), 128) - 1) < mpf(2) ** -124


def test_equivalent_expansions_give_same_value() -> None:
    short = ContinuedFraction((0, 2, 2)).to_rational()
    long = ContinuedFraction((0, 2, 1, 1)).to_rational()
    assert F_exact(short) == F_exact(long)


def test_qmark_examples() -> None:
    assert qmark_eval(0, 64) == 0
    assert qmark_eval(Fraction(1, 2), 64) == mpf("0.5")
    with working_precision(128):
        assert abs(qmark_eval(parse_real("golden_conjugate"), 120) - mpf(2) / 3) < mpf(2) ** -118
    with pytest.raises(DomainError):
        qmark_eval(Fraction(3, 2), 64)


def test_exact_and_real_paths_agree() -> None:
    for x in (Fraction(3, 11), Fraction(5, 8), Fraction(13, 21), Fraction(1, 7)):
        exact = qmark_exact(x)
        with working_precision(128):
            assert abs(exact.to_mpf(128) - qmark_eval(x, 120)) < mpf(2) ** -116


def test_known_bits_guard() -> None:
    with working_precision(80):
        approximate_golden = +mp.phi
    with pytest.raises(PrecisionLossError):
        cf_of_real(approximate_golden, 128, known_bits=80)
    digits, _ = cf_of_real(approximate_golden, 128)
    assert digits[:40] == [1] * 40


def test_inverse_examples() -> None:
    assert qmark_inverse(Fraction(1, 2), 64) == Fraction(1, 2)
    assert qmark_inverse(Fraction(5, 32), 64) == Fraction(3, 11)
    assert qmark_inverse(0, 64) == 0
    assert qmark_inverse(1, 64) == 1
    with working_precision(128):
        value = qmark_inverse(Fraction(2, 3), 128)
        assert abs(value - (mp.sqrt(5) - 1) / 2) < mpf(10) ** -20


def test_inverse_round_trip_on_random_dyadics() -> None:
    rng = random.Random(7)
    for _ in range(1000):
        y = Fraction(rng.randrange(1, 2 ** 20), 2 ** 20)
        assert qmark_exact(qmark_inverse(y, 64)).to_fraction() == y


def test_inverse_round_trip_on_non_dyadic() -> None:
    with working_precision(128):
        for y in (Fraction(1, 3), Fraction(5, 7), Fraction(99, 100)):
            x = qmark_inverse(y, 96)
            assert abs(qmark_eval(x, 96) - mpf(y.numerator) / y.denominator) < mpf(2) ** -60


def test_fixed_points() -> None:
    first, second = fixed_points(64)
    assert float(first) == pytest.approx(0.42037233, abs=1e-8)
    assert float(second) == pytest.approx(1 - 0.42037233, abs=1e-8)
    with working_precision(96):
        assert abs(first + second - 1) < mpf(2) ** -60
        assert abs(qmark_eval(first, 64) - first) < mpf(2) ** -32


def test_distribution_equation_residuals() -> None:
    prec = 128
    bound = mpf(2) ** (-prec + 4)
    for x, shift in ((Fraction(3, 2), 3), (Fraction(1, 3), 3), (Fraction(2, 5), 3)):
        residuals = check_distribution_eq(x, prec, shift)
        assert residuals["functional"] < bound
        assert residuals["shift"] < bound
    assert check_halving(Fraction(2, 5), prec) < bound


def test_qmark_is_monotone_and_symmetric() -> None:
    rng = random.Random(3)
    for _ in range(300):
        a, b = sorted(Fraction(rng.randrange(1, 10 ** 4), 10 ** 4) for _ in range(2))
        if a != b:
            assert qmark_exact(a).to_fraction() < qmark_exact(b).to_fraction()
    for k in range(98):
        x = Fraction(k, 97)
        assert qmark_exact(x).to_fraction() + qmark_exact(1 - x).to_fraction() == 1


def test_dyadic_midpoint_quadrature() -> None:
    assert float(dyadic_midpoint_quadrature(lambda x: np.ones_like(x), 10).value) == pytest.approx(1.0)
    first = dyadic_midpoint_quadrature(lambda x: x, 20)
    assert float(first.value) == pytest.approx(0.5, abs=1e-5)
    second = dyadic_midpoint_quadrature(lambda x: x * x, 18)
    assert float(second.value) == pytest.approx(0.290926, abs=1e-4)


def test_midpoint_quadrature_is_double_precision() -> None:
    assert "prec" not in inspect.signature(dyadic_midpoint_quadrature).parameters
    assert "prec" not in inspect.signature(quadrature_dF).parameters
    with mp.workprec(256):
        fine = dyadic_midpoint_quadrature(lambda x: x * x, 18)
        coarse = dyadic_midpoint_quadrature(lambda x: x * x, 17)
        assert fine.value == mpf(float(fine.value))
        assert fine.error >= 2 * abs(fine.value - coarse.value)


def test_midpoint_and_generation_rules_agree() -> None:
    # generation n+2 below 1 is the Stern-Brocot level n+1
    midpoint = dyadic_midpoint_quadrature(lambda x: x ** 3, 12)
    generation = quadrature_dF(lambda x: x ** 3, 14, domain="unit")
    assert abs(float(midpoint.value) - float(generation.value)) <= max(float(midpoint.error), float(generation.error))


def test_salem_exponent() -> None:
    with working_precision(96):
        value = salem_exponent(96)
        assert float(value) == pytest.approx(0.7202, abs=1e-4)
        assert abs(value * 2 * mp.log((1 + mp.sqrt(5)) / 2) - mp.log(2)) < mpf(2) ** -90


def test_parse_real() -> None:
    assert parse_real("3/7") == Fraction(3, 7)
    assert parse_real("0.25") == Fraction(1, 4)
    assert isinstance(parse_real("golden"), LazyReal)
    with pytest.raises(ValidationError):
        parse_real("abc")


def test_dyadic_value_invariants() -> None:
    assert DyadicValue.from_parts(12, 5) == DyadicValue(3, 3)
    assert DyadicValue.from_fraction(Fraction(1, 2)).doubled() == DyadicValue(1, 0)
    with pytest.raises(ValidationError):
        DyadicValue(5, 2)
    with pytest.raises(ValidationError):
        DyadicValue.from_fraction(Fraction(1, 3))
