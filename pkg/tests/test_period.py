import numpy as np
import pytest
from mpmath import mp, mpc, mpf

from src.numerics.precision import working_precision
from src.period.dyadic import (
    G_eval, G_power_series, G_quadrature, G_rational_series, check_three_term, contraction_bound, default_grid,
    homogeneous_sup, moment_transform, residual_grid,
)
from src.period.eisenstein import check_eisenstein, divisor_sums, eisenstein_G1, eisenstein_mellin, terms_needed
from src.utils.constants import CONTRACTION_BOUND
from src.utils.exceptions import BranchCutError, ConvergenceError, DomainError, ValidationError


def test_G_at_special_points(mobius_table) -> None:
    assert float(G_eval(0, mobius_table).value.real) == pytest.approx(0.5, abs=1e-30)
    assert G_eval(1, mobius_table).value == mpc(mpf(3) / 2)
    with pytest.raises(DomainError):
        G_power_series(1.5, mobius_table)
    with pytest.raises(DomainError):
        G_rational_series(0.25, mobius_table)


def test_routes_agree_where_both_apply(mobius_table) -> None:
    for z in (-0.4, complex(-0.2, 0.3), complex(-0.5, -0.5)):
        series = G_power_series(z, mobius_table)
        rational = G_rational_series(z, mobius_table)
        assert series.agrees_with(rational, slack=mpf(10) ** -30)


def test_three_routes_agree_on_the_left_half_plane(mobius_table) -> None:
    rng = np.random.default_rng(2718)
    points = [complex(-a, b) for a, b in zip(rng.uniform(0, 3, 50), rng.uniform(-2, 2, 50))]
    for z in points:
        routes = [G_rational_series(z, mobius_table), G_quadrature(z)]
        if abs(z) <= 1:
            routes.append(G_power_series(z, mobius_table))
        for i, first in enumerate(routes):
            for second in routes[i + 1:]:
                assert first.agrees_with(second), (z, first.method, second.method)


def test_left_derivative_at_one_stabilizes(wide_table) -> None:
    with working_precision(wide_table.work_prec):
        at_one = G_power_series(1, wide_table).value.real
        quotients = []
        for k in range(3, 11):
            h = mp.ldexp(mpf(1), -k)
            quotients.append((at_one - G_power_series(1 - h, wide_table).value.real) / h)
        derivative = mp.fsum((L - 1) * wide_table.m[L] for L in range(2, wide_table.order + 1))
        gaps = [abs(b - a) for a, b in zip(quotients, quotients[1:])]
    assert all(later < earlier for earlier, later in zip(gaps, gaps[1:]))
    assert all(q < derivative for q in quotients)
    assert abs(quotients[-1] - derivative) < 0.1
    # one Richardson step removes the O(h) bias of the backward quotient
    assert abs(2 * quotients[-1] - quotients[-2] - derivative) < 1e-2


def test_G_vanishes_far_to_the_left(mobius_table) -> None:
    far = G_eval(-10 ** 6, mobius_table)
    assert far.method == "rational-series"
    assert abs(far.value) < 1e-3
    assert abs(far.value) > 0


def test_auto_route_against_quadrature(mobius_table) -> None:
    for z in (complex(-3, 1), -2.5, complex(0.7, 0.9)):
        auto = G_eval(z, mobius_table)
        quadrature = G_quadrature(z)
        assert abs(complex(auto.value) - complex(quadrature.value)) < 1e-4


def test_three_term_recursion_route(mobius_table) -> None:
    result = G_eval(complex(1.5, 0.5), mobius_table)
    assert result.method == "three-term"
    residuals = check_three_term(complex(1.5, 0.5), mobius_table)
    assert residuals["merged"] < 1e-15
    assert residuals["symmetry"] < 1e-15


def test_cut_and_bad_method(mobius_table) -> None:
    with pytest.raises(BranchCutError):
        G_eval(2.5, mobius_table)
    with pytest.raises(BranchCutError):
        G_quadrature(3)
    with pytest.raises(ValidationError):
        G_eval(0.1, mobius_table, method="pade")


def test_residual_grid(mobius_table) -> None:
    frame = residual_grid(mobius_table)
    assert len(frame) == len(default_grid()) == 20
    assert list(frame.columns) == ["z", "merged", "second", "symmetry", "bound"]
    assert frame[["merged", "second", "symmetry"]].to_numpy().max() < 1e-20


def test_moment_transform(mobius_table) -> None:
    result = moment_transform(-0.5, mobius_table, generation=16)
    assert result["symmetry"] < 1e-25
    assert float(result["M0"].real) == pytest.approx(float(result["M0_quadrature"].value), abs=1e-3)


def test_contraction_constants() -> None:
    bound = contraction_bound(64)
    with working_precision(64):
        assert abs(bound - mp.polylog(2, mpf(1) / 2)) < mpf(10) ** -15
    assert float(bound) == pytest.approx(0.5822405265, abs=1e-9)
    assert float(homogeneous_sup(11)) == pytest.approx(float(bound), abs=1e-12)
    assert CONTRACTION_BOUND < float(bound)


def test_divisor_sums() -> None:
    assert list(divisor_sums(8)) == [0, 1, 3, 4, 7, 6, 12, 8, 15]
    assert terms_needed(1.0, 53) < terms_needed(0.1, 53)


def test_eisenstein_values() -> None:
    assert float(eisenstein_G1(1j).real) == pytest.approx(float(mp.pi), abs=1e-12)
    with pytest.raises(DomainError):
        eisenstein_G1(0.5)
    with pytest.raises(ConvergenceError):
        eisenstein_G1(complex(0.3, 0.01))


def test_eisenstein_solves_three_term_equation() -> None:
    for z in (complex(0.1, 1), complex(-0.3, 1.2), complex(0.5, 1.5), complex(0, 2), complex(-0.45, 1)):
        residuals = check_eisenstein(z)
        assert residuals["three_term"] < 1e-10
        assert residuals["periodic"] < 1e-10
    assert check_eisenstein(1j)["quasi_modular"] < 1e-10


def test_eisenstein_mellin() -> None:
    numeric, closed = eisenstein_mellin(3)
    assert float(numeric) == pytest.approx(float(closed), rel=1e-8)
    with pytest.raises(DomainError):
        eisenstein_mellin(2)
