import json
import math
import pickle
from math import comb
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from mpmath import mp, mpf

from src.moments.kernels import (
    KERNELS, taylor_system, mobius_system, mobius_to_taylor, mobius_size, leading_block,
)
from src.moments.models import MomentTable, SeriesEstimate
from src.numerics.linalg import solve_dense
from src.numerics.precision import working_precision, half_prec_tolerance
from src.numerics.special import polylog_half_table, fubini_numbers
from src.utils.constants import (
    CHECKPOINT_PATH, GUARD_BITS, MOMENT_CHECK_STEP, DEFAULT_ORDER, DEFAULT_PREC,
)
from src.utils.exceptions import DomainError, TailBoundError, ValidationError
from src.utils.logger import get_logger

logger = get_logger("moments")

RYS_MAX_TERMS = 10 ** 5


class MomentSolver:
    """Solves a truncation of the moment equations and derives the companion tables.

    ``kernel="mobius"`` (default) solves in the variable z/(z-2) and converts;
    ``kernel="taylor"`` solves the moment system literally. Both re-solve at a
    truncation ``MOMENT_CHECK_STEP`` larger and report twice the difference as
    the per-entry error.
    """

    def __init__(self, kernel: str = "mobius", use_cache: bool = False, checkpoint_dir: Optional[Path] = None):
        if kernel not in KERNELS:
            raise ValidationError(f"Unknown moment kernel '{kernel}', expected one of {KERNELS}")
        self.kernel = kernel
        self.use_cache = use_cache
        self.logger = get_logger("moments.solver")
        self.checkpoint_dir = Path(checkpoint_dir) if checkpoint_dir else CHECKPOINT_PATH
        if use_cache:
            self.checkpoint_dir.mkdir(parents=True, exist_ok=True)

    def _checkpoint_file(self, N: int, prec: int) -> Path:
        return self.checkpoint_dir / f"moments_{self.kernel}_{N}_{prec}.pkl"

    def save_checkpoint(self, table: MomentTable):
        checkpoint_file = self._checkpoint_file(table.order, table.prec)
        with open(checkpoint_file, "wb") as f:
            pickle.dump(table, f)
        self.logger.info(f"Checkpoint saved for order {table.order} at {table.prec} bits")

    def load_checkpoint(self, N: int, prec: int) -> Optional[MomentTable]:
        checkpoint_file = self._checkpoint_file(N, prec)
        if checkpoint_file.exists():
            with open(checkpoint_file, "rb") as f:
                table = pickle.load(f)
                self.logger.info(f"Loaded checkpoint for order {N} at {prec} bits")
                return table
        return None

    def delete_checkpoint(self, N: int, prec: int):
        checkpoint_file = self._checkpoint_file(N, prec)
        if checkpoint_file.exists():
            checkpoint_file.unlink()
            self.logger.info(f"Deleted checkpoint for order {N} at {prec} bits")

    def work_precision(self, N: int, prec: int) -> int:
        if self.kernel == "taylor":
            # binomial factors reach 4^(N + step)
            return prec + 2 * (N + MOMENT_CHECK_STEP) + GUARD_BITS
        return prec + GUARD_BITS

    def _solve_taylor(self, N: int, wp: int, c: List[mpf]) -> Tuple[List[mpf], List[mpf], List[mpf]]:
        A, rhs = taylor_system(N + MOMENT_CHECK_STEP, wp, c)
        coarse = solve_dense(*leading_block(A, rhs, N), wp)
        fine = solve_dense(A, rhs, wp)
        return [coarse[k] for k in range(N)], [fine[k] for k in range(N)], []

    def _solve_mobius(self, N: int, prec: int, wp: int) -> Tuple[List[mpf], List[mpf], List[mpf]]:
        K = mobius_size(N, prec)
        self.logger.debug(f"Mobius basis of size {K} for order {N}")
        A, rhs = mobius_system(K + MOMENT_CHECK_STEP, wp)
        g_coarse = solve_dense(*leading_block(A, rhs, K), wp)
        g_fine = solve_dense(A, rhs, wp)
        coarse = mobius_to_taylor(g_coarse, N, wp)
        fine = mobius_to_taylor(g_fine, N, wp)
        return coarse, fine, [g_coarse[k] for k in range(K)]

    def solve(self, N: int = DEFAULT_ORDER, prec: int = DEFAULT_PREC) -> MomentTable:
        if N < 8:
            raise DomainError(f"solve_moments needs N >= 8, got {N}")
        if self.use_cache:
            cached = self.load_checkpoint(N, prec)
            if cached:
                return cached

        wp = self.work_precision(N, prec)
        self.logger.info(f"Solving moments: order {N}, {prec} bits, kernel {self.kernel}, working at {wp} bits")

        # 1. polylog column c_0..c_2(N + step)
        c = polylog_half_table(2 * (N + MOMENT_CHECK_STEP), wp)

        # 2. truncated systems at N and N + step
        if self.kernel == "taylor":
            coarse, fine, mobius = self._solve_taylor(N, wp, c)
        else:
            coarse, fine, mobius = self._solve_mobius(N, prec, wp)

        # 3. moments, errors and the companion lists
        with working_precision(wp):
            floor = mp.ldexp(mpf(1), -prec)
            m = [mpf(1)] + list(coarse)
            err = [mpf(0)] + [2 * abs(a - b) + floor for a, b in zip(coarse, fine)]
            B = fubini_numbers(N)
            table = MomentTable(order=N, prec=prec, work_prec=wp, kernel=self.kernel, m=m, M=[],
                                c=c[:2 * N + 1], B=B, err=err, mobius=mobius)
            table.M = [M_from_m(table, L) for L in range(N + 1)]

        K = table.reliable_order()
        self.logger.info(f"Order {N}: truncation error {mp.nstr(table.truncation_error, 3)}, "
                         f"error of m_1 {mp.nstr(err[1], 3)}, {K} moments reliable")
        for problem in table.check_invariants():
            self.logger.warning(f"Moment table check: {problem}")

        if self.use_cache:
            self.save_checkpoint(table)
        return table


def solve_moments(N: int = DEFAULT_ORDER, prec: int = DEFAULT_PREC, kernel: str = "mobius",
                  use_cache: bool = False) -> MomentTable:
    return MomentSolver(kernel=kernel, use_cache=use_cache).solve(N, prec)


def M_from_m(table: MomentTable, L: int) -> mpf:
    """M_L = sum_i m_i C(L, i) B_(L-i); every term is positive."""
    if not 0 <= L <= table.order:
        raise DomainError(f"M_from_m needs 0 <= L <= {table.order}, got {L}")
    with working_precision(table.work_prec):
        return mp.fsum(table.m[i] * (comb(L, i) * table.B[L - i]) for i in range(L + 1))


def m_from_M(M: List[mpf], L: int, prec: int = DEFAULT_PREC) -> mpf:
    """m_L = M_L - sum_(s<L) C(L, s) M_s, summed with enough bits for the cancellation."""
    if not 0 <= L < len(M):
        raise DomainError(f"m_from_M needs 0 <= L < {len(M)}, got {L}")
    magnitude = sum(comb(L, s) * abs(float(M[s])) for s in range(L + 1))
    lost = max(0, int(math.log2(magnitude)) + 1) if magnitude > 0 else 0
    with working_precision(prec + GUARD_BITS + lost):
        return M[L] - mp.fsum(comb(L, s) * M[s] for s in range(L))


def M_via_rys(table: MomentTable, L: int) -> SeriesEstimate:
    """M_L = sum_(s >= L) C(s-1, L-1) m_s with a fitted tail.

    The tail past the reliable prefix uses log m_s ~ a + b sqrt(s) fitted over
    its upper half; the model tail enters the error twice.
    """
    if L < 1:
        raise DomainError(f"M_via_rys needs L >= 1, got {L}")
    K = table.reliable_order()
    if K <= L + 4:
        raise TailBoundError(f"Only {K} reliable moments; not enough for M_{L}", iterations=K)

    with working_precision(table.work_prec):
        partial = mp.fsum(comb(s - 1, L - 1) * table.m[s] for s in range(L, K + 1))
        propagated = mp.fsum(comb(s - 1, L - 1) * table.err[s] for s in range(L, K + 1))

    s_fit = np.arange(K // 2, K + 1)
    log_m = np.array([float(mp.log(table.m[s])) for s in s_fit])
    b, a = np.polyfit(np.sqrt(s_fit), log_m, 1)
    if b >= 0:
        raise TailBoundError(f"Fitted moment decay is not decreasing (slope {b:.3g})", iterations=K)

    tail = 0.0
    for s in range(K + 1, K + 1 + RYS_MAX_TERMS):
        term = math.exp(math.lgamma(s) - math.lgamma(L) - math.lgamma(s - L + 1) + a + b * math.sqrt(s))
        tail += term
        if term < 1e-30 * (float(partial) + tail):
            break
    else:
        raise TailBoundError(f"Tail of M_{L} did not settle in {RYS_MAX_TERMS} terms", iterations=RYS_MAX_TERMS)

    if tail > float(partial) / 2:
        raise TailBoundError(f"Tail {tail:.3g} dominates the partial sum {float(partial):.3g} for M_{L}",
                             iterations=K)
    with working_precision(table.work_prec):
        estimate = SeriesEstimate(value=partial + tail, error=propagated + 2 * mpf(tail), tail=mpf(tail), terms=K)
    logger.debug(f"M_{L} via tail-summed moments: {mp.nstr(estimate.value, 12)} +- {mp.nstr(estimate.error, 3)}")
    return estimate


def symmetry_residuals(table: MomentTable) -> Dict:
    """Residuals of m_L = sum_s C(L, s) (-1)^s m_s for each L, and of 2 m_3 = -1/2 + 3 m_2."""
    with working_precision(table.work_prec):
        reflection = []
        for L in range(table.order + 1):
            mirrored = mp.fsum((-1) ** s * comb(L, s) * table.m[s] for s in range(L + 1))
            reflection.append(abs(table.m[L] - mirrored))
        cubic = abs(2 * table.m[3] + mpf(1) / 2 - 3 * table.m[2])
    return {"reflection": reflection, "cubic": cubic}


def reflection_bound(table: MomentTable, L: int) -> mpf:
    """Error allowance for the L-th reflection residual given the per-entry errors."""
    with working_precision(table.work_prec):
        return table.err[L] + mp.fsum(comb(L, s) * table.err[s] for s in range(L + 1)) + half_prec_tolerance(table.prec)


def hankel_determinant(table: MomentTable, size: int = 5) -> mpf:
    if 2 * (size - 1) > table.order:
        raise DomainError(f"Hankel matrix of size {size} needs m up to {2 * (size - 1)}")
    with working_precision(table.work_prec):
        H = mp.matrix(size, size)
        for i in range(size):
            for j in range(size):
                H[i, j] = table.m[i + j]
        return mp.det(H)


def export_table(table: MomentTable, format: str = "json") -> str:
    data = table.to_dict()
    if format == "json":
        return json.dumps(data, indent=2)
    if format == "csv":
        rows = []
        for L in range(table.order + 1):
            rows.append({
                "L": L,
                "m": mp.nstr(table.m[L], int(table.prec * 0.30103)),
                "M": data["M"][L],
                "B": table.B[L],
                "err": mp.nstr(table.err[L], 5),
            })
        return pd.DataFrame(rows).to_csv(index=False)
    raise ValidationError(f"Unknown export format '{format}'")
