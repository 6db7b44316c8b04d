from typing import List, Tuple

from mpmath import mp, mpf

from src.numerics.precision import working_precision, half_prec_tolerance
from src.utils.constants import GUARD_BITS, MAX_INVERSE_ITERATIONS
from src.utils.exceptions import SingularMatrixError, PrecisionLossError, ConvergenceError, ValidationError
from src.utils.logger import get_logger

logger = get_logger("numerics.linalg")

DenseMatrix = mp.matrix


def dense_matrix(rows: List[list]) -> DenseMatrix:
    width = len(rows[0]) if rows else 0
    if any(len(row) != width for row in rows):
        raise ValidationError("dense_matrix needs rectangular input")
    return mp.matrix(rows)


def identity(n: int) -> DenseMatrix:
    return mp.eye(n)


def infinity_norm(v) -> mpf:
    return mp.norm(v, mp.inf)


def solve_dense(A: DenseMatrix, b, prec: int):
    if A.rows != A.cols:
        raise ValidationError(f"solve_dense needs a square matrix, got {A.rows}x{A.cols}")
    b = b if isinstance(b, mp.matrix) else mp.matrix(b)
    if b.rows != A.rows:
        raise ValidationError(f"right-hand side has {b.rows} rows, matrix has {A.rows}")

    with working_precision(prec + GUARD_BITS):
        try:
            x = mp.lu_solve(A, b)
        except ZeroDivisionError as e:
            raise SingularMatrixError(f"All pivot candidates vanish at {prec} bits: {e}")

        residual = infinity_norm(A * x - b)
        scale = infinity_norm(b)
        if residual > half_prec_tolerance(prec) * max(scale, mpf(1)):
            raise PrecisionLossError(
                f"Residual {mp.nstr(residual, 5)} exceeds 2^-{prec // 2} of |b|; raise precision",
                required_bits=2 * prec,
            )
    logger.debug(f"solve_dense n={A.rows} residual={mp.nstr(residual, 5)}")
    return x


def _factor_shifted(A: DenseMatrix, shift: mpf, prec: int):
    n = A.rows
    nudge = half_prec_tolerance(prec) * (1 + abs(shift))
    for attempt in range(4):
        shifted = A - shift * mp.eye(n)
        try:
            lu, perm = mp.LU_decomp(shifted)
            return shift, lu, perm
        except ZeroDivisionError:
            # shift sits on an eigenvalue to working precision
            shift += nudge
            nudge *= 2
    raise SingularMatrixError(f"Shifted matrix stays singular near {mp.nstr(shift, 12)}")


def _largest_index(w) -> int:
    best, index = mpf(0), 0
    for k in range(w.rows):
        if abs(w[k]) > best:
            best, index = abs(w[k]), k
    return index


def normalize_first(v, prec: int):
    """Scale so the first entry is 1, or the largest entry when the first is negligible."""
    k = _largest_index(v)
    if abs(v[0]) > mp.ldexp(abs(v[k]), -(prec // 4)):
        k = 0
    return v / v[k]


def eigen_refine(A: DenseMatrix, seed, prec: int, max_iterations: int = MAX_INVERSE_ITERATIONS,
                 refactor_every: int = 8) -> Tuple[mpf, DenseMatrix]:
    if A.rows != A.cols:
        raise ValidationError("eigen_refine needs a square matrix")
    n = A.rows

    with working_precision(prec + GUARD_BITS):
        tolerance = half_prec_tolerance(prec)
        shift, lu, perm = _factor_shifted(A, mpf(seed), prec)
        v = mp.matrix([1] * n)
        estimate = shift

        for iteration in range(1, max_iterations + 1):
            w = mp.U_solve(lu, mp.L_solve(lu, v, perm))
            k = _largest_index(w)
            if w[k] == 0:
                raise ConvergenceError("inverse iteration collapsed to zero", iterations=iteration)
            estimate = shift + v[k] / w[k]
            v = w / w[k]

            residual = infinity_norm(A * v - estimate * v)
            if residual <= tolerance * infinity_norm(v):
                logger.debug(f"eigen_refine converged to {mp.nstr(estimate, 15)} after {iteration} iterations")
                return estimate, normalize_first(v, prec)

            if iteration % refactor_every == 0:
                shift, lu, perm = _factor_shifted(A, estimate, prec)

    raise ConvergenceError(
        f"Inverse iteration from seed {mp.nstr(mpf(seed), 10)} did not converge in {max_iterations} steps",
        iterations=max_iterations,
    )


def eigen_seeds(A: DenseMatrix, prec: int, bound=None) -> List[mpf]:
    """Real eigenvalues of a small matrix from a dense Hessenberg/QR solve, largest magnitude first."""
    with working_precision(prec):
        values = mp.eig(A, left=False, right=False)
        threshold = mp.ldexp(mpf(1), -(prec // 4))
        seeds = []
        for value in values:
            value = mp.mpc(value)
            if abs(value.imag) > threshold * (1 + abs(value.real)):
                continue
            if bound is not None and abs(value.real) >= bound:
                continue
            seeds.append(value.real)
    seeds.sort(key=lambda x: -abs(x))
    logger.debug(f"eigen_seeds kept {len(seeds)} of {len(values)} eigenvalues")
    return seeds
