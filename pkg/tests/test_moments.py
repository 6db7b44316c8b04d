import json
from math import comb

import pytest
from mpmath import mp, mpf

from src.moments.generating import (
    Mgf, asymptotic_constant, kinney_constant, mgf_envelope, mgf, mgf_derivative, mgf_quadrature,
)
from src.moments.kernels import mobius_size, mobius_to_taylor, taylor_operator
from src.moments.models import MomentTable
from src.moments.solver import (
    MomentSolver, M_from_m, M_via_rys, export_table, hankel_determinant, m_from_M, reflection_bound,
    solve_moments, symmetry_residuals,
)
from src.numerics.precision import working_precision
from src.numerics.special import polylog_half_table
from src.utils.exceptions import DomainError, PoleError, TailBoundError, ValidationError


def test_first_moments(mobius_table) -> None:
    with working_precision(mobius_table.work_prec):
        assert abs(mobius_table.m[1] - mpf(1) / 2) < mpf(10) ** -30
        assert abs(mobius_table.M[1] - mpf(3) / 2) < mpf(10) ** -30
    assert float(mobius_table.m[2]) == pytest.approx(0.290926, abs=1e-6)
    assert float(mobius_table.m[3]) == pytest.approx(0.186389, abs=1e-6)
    assert float(mobius_table.m[4]) == pytest.approx(0.126992, abs=1e-6)
    assert float(mobius_table.M[2]) == pytest.approx(4.290926, abs=1e-6)


def test_M_follows_from_m_and_fubini_numbers(mobius_table) -> None:
    m = mobius_table.m
    with working_precision(mobius_table.work_prec):
        assert abs(mobius_table.M[3] - (13 + 9 * m[1] + 3 * m[2] + m[3])) < mpf(10) ** -40
        assert abs(mobius_table.M[4] - (75 + 52 * m[1] + 18 * m[2] + 4 * m[3] + m[4])) < mpf(10) ** -40
    assert float(mobius_table.M[3]) == pytest.approx(18.559169, abs=1e-5)
    assert mobius_table.B[:5] == [1, 1, 3, 13, 75]


def test_table_shape_and_invariants(mobius_table) -> None:
    assert mobius_table.order == 64
    assert len(mobius_table.m) == len(mobius_table.M) == len(mobius_table.err) == 65
    assert len(mobius_table.c) == 129
    assert len(mobius_table.mobius) == mobius_size(64, 192)
    assert mobius_table.check_invariants() == []
    assert mobius_table.reliable_order() >= 40
    assert all(mobius_table.m[L] > mobius_table.m[L + 1] for L in range(1, 40))


def test_symmetry_residuals(mobius_table) -> None:
    residuals = symmetry_residuals(mobius_table)
    assert residuals["cubic"] < mpf(10) ** -30
    for L in range(1, 30):
        assert residuals["reflection"][L] <= reflection_bound(mobius_table, L)


def test_kernels_agree_on_low_moments(mobius_table, taylor_table) -> None:
    assert taylor_table.kernel == "taylor"
    for L in range(1, 9):
        assert abs(float(mobius_table.m[L] - taylor_table.m[L])) < 1e-4


def test_taylor_operator_sign_pattern() -> None:
    c = polylog_half_table(20, 96)
    E = taylor_operator(10, 96, c)
    with working_precision(96):
        assert E[0, 0] == c[2]
        assert E[1, 0] == 2 * c[3]
        assert E[0, 1] == -c[3]
        assert E[2, 3] == -c[7] * comb(6, 2)


def test_mobius_to_taylor_of_mu() -> None:
    # mu = z / (z - 2) = -z/2 - z^2/4 - ...
    coefficients = mobius_to_taylor([0, 1, 0, 0, 0], 5, 64)
    assert [float(a) for a in coefficients] == [0.0, -0.5, -0.25, -0.125, -0.0625]


def test_M_and_m_conversions(mobius_table) -> None:
    with working_precision(mobius_table.work_prec):
        for L in (2, 5, 9):
            assert abs(M_from_m(mobius_table, L) - mobius_table.M[L]) < mpf(10) ** -40
            assert abs(m_from_M(mobius_table.M, L, 192) - mobius_table.m[L]) < mpf(10) ** -40
    with pytest.raises(DomainError):
        M_from_m(mobius_table, 65)


def test_M_via_tail_summed_moments(mobius_table) -> None:
    estimate = M_via_rys(mobius_table, 2)
    assert float(estimate.value) == pytest.approx(float(mobius_table.M[2]), abs=5e-3)
    assert estimate.tail > 0


def test_hankel_determinant_is_positive(mobius_table) -> None:
    assert hankel_determinant(mobius_table, 5) > 0
    assert hankel_determinant(mobius_table) == hankel_determinant(mobius_table, 5)
    with pytest.raises(DomainError):
        hankel_determinant(mobius_table, 40)


def test_mgf_values(mobius_table) -> None:
    assert mgf(0, mobius_table).value == 1
    assert float(mgf_derivative(0, mobius_table).value) == pytest.approx(0.5, abs=1e-30)



def test_mgf_against_quadrature(mobius_table) -> None:
    series = mgf(-3, mobius_table)
    quadrature = mgf_quadrature(-3.0)
    assert float(series.value) == pytest.approx(float(quadrature.value), abs=1e-5)


def test_Mgf_pole(mobius_table) -> None:
    with working_precision(mobius_table.work_prec):
        with pytest.raises(PoleError):
            Mgf(mp.ln2, mobius_table)
    assert float(Mgf(0, mobius_table).value) == pytest.approx(1.0)


def test_asymptotic_constant(mobius_table) -> None:
    estimate = asymptotic_constant(mobius_table)
    kappa = estimate.kappa.value
    assert abs(float(estimate.ratios[40] / kappa) - 1) < 1e-6
    assert estimate.deviations()[40] < estimate.deviations()[10]


def test_kinney_constant(mobius_table) -> None:
    estimate = kinney_constant(mobius_table)
    assert estimate.agreement < 1e-8
    assert 0.87 < float(estimate.alpha) < 0.88


@pytest.mark.parametrize("t", [1, 5, 10])
def test_mgf_reflection_without_reflecting(wide_table, t) -> None:
    with working_precision(wide_table.work_prec):
        forward = mgf(t, wide_table)
        backward = mgf(-t, wide_table, reflect=False)
        residual = abs(forward.value - mp.exp(t) * backward.value)
        assert residual <= forward.error + mp.exp(t) * backward.error + mpf(10) ** -60
        assert residual < mpf(10) ** -40


@pytest.mark.parametrize("t", [4, 25, 50, 100])
def test_mgf_envelope(wide_table, t) -> None:
    lower, value, upper = mgf_envelope(t, wide_table)
    assert value.error < mpf(10) ** -20
    assert lower < value.value < upper


def test_mgf_envelope_needs_a_long_table(small_table) -> None:
    with pytest.raises(TailBoundError):
        mgf_envelope(100, small_table)


def test_export_round_trip(small_table) -> None:
    data = json.loads(export_table(small_table, "json"))
    assert data["order"] == 32 and data["kernel"] == "mobius"
    restored = MomentTable.from_dict(data)
    assert abs(float(restored.m[2] - small_table.m[2])) < 1e-30
    csv = export_table(small_table, "csv")
    assert csv.splitlines()[0] == "L,m,M,B,err"
    with pytest.raises(ValidationError):
        export_table(small_table, "xml")
    with pytest.raises(ValidationError):
        MomentTable.from_dict({"order": 3})


def test_solver_guards() -> None:
    with pytest.raises(DomainError):
        solve_moments(4, 64)
    with pytest.raises(ValidationError):
        MomentSolver(kernel="laguerre")


def test_checkpoint_cache(tmp_path) -> None:
    solver = MomentSolver(use_cache=True, checkpoint_dir=tmp_path)
    table = solver.solve(16, 64)
    assert (tmp_path / "moments_mobius_16_64.pkl").exists()
    cached = solver.load_checkpoint(16, 64)
    assert cached.m[2] == table.m[2]
    solver.delete_checkpoint(16, 64)
    assert solver.load_checkpoint(16, 64) is None
