import pytest
from mpmath import mp, mpf

from src.moments.generating import mgf
from src.numerics.precision import working_precision
from src.spectral.kernel import (
    MediantSampler, bessel_equation_residual, ell_closed, ell_integral, hankel_identity_residual,
    hilbert_schmidt_norm, kernel_K, psi,
)
from src.spectral.operator import (
    EigenSolver, G_lambda_eval, build_operator, eigen_equation_residual, eigenvalues, moment_vector_consistency,
)
from src.utils.constants import CONTRACTION_BOUND
from src.utils.exceptions import DomainError, ValidationError

PUBLISHED = [0.25553210, -0.08892666, 0.03261586, -0.01217621]


def test_build_operator_guards() -> None:
    with pytest.raises(DomainError):
        build_operator(8, 64)
    with pytest.raises(ValidationError):
        build_operator(16, 64, "chebyshev")
    with pytest.raises(ValidationError):
        EigenSolver("chebyshev")


def test_taylor_operator_entries() -> None:
    E = build_operator(16, 64, "taylor")
    assert E.work_prec == 64 + 32 + 32
    assert E.sign_pattern_holds()
    # e_{2,1} = 2 c_3 exceeds 1
    assert E.entry(2, 1) > 1
    mobius = build_operator(16, 64, "mobius")
    assert mobius.entries.rows == 16


def test_eigenvalues_at_order_64(eigenpairs) -> None:
    assert len(eigenpairs) == 4
    for pair, expected in zip(eigenpairs, PUBLISHED):
        assert float(pair.value) == pytest.approx(expected, abs=1e-7)
        assert abs(pair.value) < CONTRACTION_BOUND
        assert pair.residual < mpf(10) ** -20
        assert pair.digits_stable >= 8
        assert pair.coeffs[0] == 1
        assert pair.mobius[0] == 1
    magnitudes = [abs(pair.value) for pair in eigenpairs]
    assert magnitudes == sorted(magnitudes, reverse=True)


def test_eigenpair_export(eigenpairs) -> None:
    data = eigenpairs[0].to_dict(with_coeffs=True)
    assert data["basis"] == "mobius" and data["order"] == 64
    assert len(data["coeffs"]) == 64
    assert "coeffs" not in eigenpairs[0].to_dict()


def test_eigenvalue_count_guard() -> None:
    with pytest.raises(DomainError):
        eigenvalues(64, 128, k=9)


@pytest.mark.slow
def test_published_eigenvalues_at_order_128() -> None:
    pairs = eigenvalues(128, 192, 4)
    for pair, expected in zip(pairs, PUBLISHED):
        assert float(pair.value) == pytest.approx(expected, abs=1e-8)
        assert pair.digits_stable >= 8


def test_eigenfunction_equation(eigenpairs) -> None:
    for pair in eigenpairs:
        for z in (complex(-0.7, 0.3), complex(-0.4, -0.2), -0.6):
            assert eigen_equation_residual(pair, z) < 1e-10


def test_eigenfunction_routes_agree(eigenpairs) -> None:
    pair = eigenpairs[0]
    mobius = G_lambda_eval(pair, 0.3, method="mobius")
    series = G_lambda_eval(pair, 0.3, method="power-series")
    assert abs(complex(mobius.value) - complex(series.value)) < 1e-15
    near = G_lambda_eval(pair, -1.5, method="mobius")
    telescoped = G_lambda_eval(pair, -1.5, method="rational-series")
    assert abs(complex(near.value) - complex(telescoped.value)) < 1e-12
    with pytest.raises(DomainError):
        G_lambda_eval(pair, 3)
    with pytest.raises(DomainError):
        G_lambda_eval(pair, 0.5, method="rational-series")


def test_moment_vector_consistency(taylor_table) -> None:
    E = build_operator(64, 192, "taylor")
    assert moment_vector_consistency(taylor_table, E) < mpf(10) ** -40
    with pytest.raises(ValidationError):
        moment_vector_consistency(taylor_table, build_operator(16, 64, "mobius"))
    with pytest.raises(ValidationError):
        moment_vector_consistency(taylor_table, build_operator(32, 64, "taylor"))


def test_kernel_values() -> None:
    assert psi(0) == 1
    assert kernel_K(0, 3).value == 0
    assert kernel_K(1, 2).value == kernel_K(2, 1).value
    with working_precision(53):
        expected = mp.besselj(1, 2 * mp.sqrt(2)) / (psi(1) * psi(2))
    assert float(kernel_K(1, 2).value) == pytest.approx(float(expected), rel=1e-12)
    with pytest.raises(DomainError):
        kernel_K(-1, 2)


def test_hilbert_schmidt_norm_converges() -> None:
    small, large, larger = hilbert_schmidt_norm(4), hilbert_schmidt_norm(12), hilbert_schmidt_norm(16)
    assert 0 < small < large
    assert larger - large < 1e-3


def test_mediant_sampler(mobius_table) -> None:
    sampler = MediantSampler(16)
    assert sampler.m(0) == pytest.approx(1.0)
    assert sampler.m_prime(0) == pytest.approx(0.5, abs=1e-12)
    assert sampler.m(3) == pytest.approx(float(mgf(-3, mobius_table).value), abs=1e-4)


def test_ell_forms_agree() -> None:
    for s in (1, 4):
        closed = ell_closed(s)
        assert float(ell_integral(s)) == pytest.approx(float(closed), rel=1e-3)
    with pytest.raises(DomainError):
        ell_closed(0)


def test_bessel_identities_at_one(mobius_table) -> None:
    assert bessel_equation_residual(1, mobius_table) < 1e-3
    identity, ell = hankel_identity_residual(1, mobius_table)
    assert identity < 1e-3
    assert ell < 1e-3
    with pytest.raises(DomainError):
        bessel_equation_residual(0, mobius_table)


@pytest.mark.slow
def test_bessel_identities(mobius_table) -> None:
    for s in (0.5, 2):
        assert bessel_equation_residual(s, mobius_table) < 1e-3
    identity, ell = hankel_identity_residual(4, mobius_table)
    assert identity < 1e-3
    assert ell < 1e-3
