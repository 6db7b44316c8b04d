from typing import List

from mpmath import mp, mpc, mpf

from src.moments.kernels import taylor_operator, mobius_operator, mobius_to_taylor
from src.moments.models import MomentTable
from src.numerics.linalg import eigen_refine, eigen_seeds, infinity_norm
from src.numerics.precision import working_precision, to_mpc, decimal_digits_agreeing, series_cutoff
from src.period.models import PeriodEvaluation
from src.spectral.models import EigenPair, OperatorMatrix
from src.utils.constants import CONTRACTION_BOUND, GUARD_BITS, SEED_ORDER, STABILITY_STEP
from src.utils.exceptions import DomainError, ValidationError
from src.utils.logger import get_logger

logger = get_logger("spectral.operator")

BASES = ("taylor", "mobius")
SEED_PREC = 64
MOBIUS_RADIUS = mpf("0.8")


def build_operator(N: int, prec: int, basis: str = "taylor") -> OperatorMatrix:
    if N < 16:
        raise DomainError(f"build_operator needs N >= 16, got {N}")
    if basis == "taylor":
        wp = prec + 2 * N + GUARD_BITS
        entries = taylor_operator(N, wp)
    elif basis == "mobius":
        wp = prec + GUARD_BITS
        H, _ = mobius_operator(N, wp)
        with working_precision(wp):
            entries = mp.matrix(H)
    else:
        raise ValidationError(f"Unknown operator basis '{basis}', expected one of {BASES}")
    logger.debug(f"Operator of order {N} in the {basis} basis at {wp} bits")
    return OperatorMatrix(order=N, prec=prec, work_prec=wp, basis=basis, entries=entries)


class EigenSolver:
    """Largest real eigenvalues of the truncated operator below the contraction bound.

    Seeds come from a dense eigensolve of an order ``SEED_ORDER`` truncation and
    are refined by inverse iteration at the requested order; each value is then
    refined again at order ``N + STABILITY_STEP`` to count the stable digits.
    """

    def __init__(self, basis: str = "mobius"):
        if basis not in BASES:
            raise ValidationError(f"Unknown operator basis '{basis}', expected one of {BASES}")
        self.basis = basis
        self.logger = get_logger("spectral.eigen")

    def seeds(self, k: int) -> List[mpf]:
        small = build_operator(SEED_ORDER, SEED_PREC, self.basis)
        seeds = eigen_seeds(small.entries, small.work_prec, bound=CONTRACTION_BOUND)
        if len(seeds) < k:
            self.logger.warning(f"Only {len(seeds)} eigenvalue seeds below {CONTRACTION_BOUND}, {k} requested")
        return seeds[:k]

    def _pair(self, operator: OperatorMatrix, seed) -> EigenPair:
        wp = operator.work_prec
        value, vector = eigen_refine(operator.entries, seed, wp)
        with working_precision(wp + GUARD_BITS):
            residual = infinity_norm(operator.entries * vector - value * vector) / infinity_norm(vector)
            if self.basis == "mobius":
                g = [vector[k] / vector[0] for k in range(operator.order)]
                coeffs = mobius_to_taylor(g, operator.order, wp)
            else:
                g = []
                coeffs = [vector[k] / vector[0] for k in range(operator.order)]
        return EigenPair(value=value, coeffs=coeffs, residual=residual, order=operator.order,
                         basis=self.basis, mobius=g)

    def solve(self, N: int, prec: int, k: int = 4, check_stability: bool = True) -> List[EigenPair]:
        if k > 8:
            raise DomainError(f"At most 8 eigenvalues are supported, got {k}")
        self.logger.info(f"Eigenvalues: order {N}, {prec} bits, {k} requested, {self.basis} basis")

        # 1. seeds from a small truncation
        seeds = self.seeds(k)

        # 2. inverse iteration at order N
        operator = build_operator(N, prec, self.basis)
        pairs = [self._pair(operator, seed) for seed in seeds]

        # 3. collisions
        with working_precision(operator.work_prec):
            for i in range(len(pairs)):
                for j in range(i + 1, len(pairs)):
                    if abs(pairs[i].value - pairs[j].value) < mp.ldexp(mpf(1), -(prec // 4)):
                        self.logger.warning(f"Seeds {i} and {j} converged to the same eigenvalue "
                                            f"{mp.nstr(pairs[i].value, 12)}; multiplicity is not resolved")

        # 4. stability under N -> N + step
        if check_stability:
            larger = build_operator(N + STABILITY_STEP, prec, self.basis)
            for pair in pairs:
                value, _ = eigen_refine(larger.entries, pair.value, larger.work_prec)
                with working_precision(larger.work_prec):
                    pair.digits_stable = decimal_digits_agreeing(pair.value, value)
                self.logger.info(f"lambda = {mp.nstr(pair.value, 15)}: {pair.digits_stable} digits stable "
                                 f"under order {N + STABILITY_STEP}")
        return pairs


def eigenvalues(N: int, prec: int, k: int = 4, basis: str = "mobius", check_stability: bool = True) -> List[EigenPair]:
    return EigenSolver(basis).solve(N, prec, k, check_stability)


def moment_vector_consistency(table: MomentTable, E: OperatorMatrix) -> mpf:
    """||m + E m - c||_inf over the first N equations."""
    if E.basis != "taylor":
        raise ValidationError("moment_vector_consistency needs the taylor-basis operator")
    if E.order != table.order:
        raise ValidationError(f"Table order {table.order} and operator order {E.order} differ")
    N = table.order
    with working_precision(max(table.work_prec, E.work_prec)):
        worst = mpf(0)
        for s in range(1, N + 1):
            row = table.m[s] - table.c[s] + mp.fsum(E.entry(s, L) * table.m[L] for L in range(1, N + 1))
            worst = max(worst, abs(row))
    return worst


def _coefficient_series(coeffs: List[mpf], x: mpc, radius: mpf) -> PeriodEvaluation:
    value, power = mpc(0), mpc(1)
    for a in coeffs:
        value += a * power
        power *= x
    # geometric model for the dropped terms from the last two coefficients
    last = max(abs(coeffs[-1]), abs(coeffs[-2]))
    tail = last * radius ** len(coeffs) / (1 - radius) if radius < 1 else last * len(coeffs)
    return PeriodEvaluation(z=x, value=value, method="power-series", error=tail)


def _telescoped(pair: EigenPair, z: mpc, prec: int) -> PeriodEvaluation:
    cutoff = series_cutoff(prec)
    value, error = mpc(0), mpf(0)
    weight = mpf(1)
    n = 0
    while True:
        n += 1
        weight /= 2
        u = 1 / (z - n)
        if weight * abs(u) ** 2 * 2 < cutoff:
            break
        inner = _coefficient_series(pair.coeffs, u, abs(u))
        value += weight * u * u * inner.value
        error += weight * abs(u) ** 2 * inner.error
    return PeriodEvaluation(z=z, value=value / pair.value, method="rational-series",
                            error=error / abs(pair.value))


def G_lambda_eval(pair: EigenPair, z, method: str = "auto", prec: int = 128) -> PeriodEvaluation:
    """G_lambda(z) from the Taylor coefficients (|z| <= 1), from the coefficients in
    z/(z-2) (Re z < 1), or from G_lambda = (1/lambda) sum 2^-n (z-n)^-2 G_lambda(1/(z-n)) (Re z <= 0)."""
    with working_precision(prec + GUARD_BITS):
        z = to_mpc(z)
        mu = z / (z - 2)
        if method == "auto":
            if pair.mobius and z.real < 1 and abs(mu) <= MOBIUS_RADIUS:
                method = "mobius"
            elif abs(z) <= mpf(1) / 2:
                method = "power-series"
            elif z.real <= 0:
                method = "rational-series"
            else:
                raise DomainError(f"G_lambda is not evaluable at {mp.nstr(z, 8)}")
        if method == "mobius":
            if not pair.mobius or abs(mu) >= 1:
                raise DomainError(f"No mobius expansion reaches {mp.nstr(z, 8)}")
            result = _coefficient_series(pair.mobius, mu, abs(mu))
            return PeriodEvaluation(z=z, value=result.value, method="mobius", error=result.error)
        if method == "power-series":
            if abs(z) > 1:
                raise DomainError(f"The coefficient series diverges at |z| = {mp.nstr(abs(z), 8)}")
            result = _coefficient_series(pair.coeffs, z, abs(z))
            return PeriodEvaluation(z=z, value=result.value, method="power-series", error=result.error)
        if method == "rational-series":
            if z.real > 0:
                raise DomainError(f"The telescoped series needs Re z <= 0, got {mp.nstr(z, 8)}")
            return _telescoped(pair, z, prec)
    raise ValidationError(f"Unknown evaluation method '{method}'")


def eigen_equation_residual(pair: EigenPair, z, prec: int = 128) -> mpf:
    """|2 G(z+1) - G(z) - G(1/z) / (lambda z^2)| for G = G_lambda."""
    with working_precision(prec + GUARD_BITS):
        z = to_mpc(z)
        shifted = G_lambda_eval(pair, z + 1, prec=prec)
        here = G_lambda_eval(pair, z, prec=prec)
        inverse = G_lambda_eval(pair, 1 / z, prec=prec)
        return abs(2 * shifted.value - here.value - inverse.value / (pair.value * z * z))
