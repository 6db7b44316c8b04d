"""Truncations of the functional equation for G(z) = sum m_L z^(L-1).

G satisfies ``G(z) = -sum_n 2^-n [(z-n)^-1 + (z-n)^-2 G(1/(z-n))]``. Two
coordinate choices turn it into a dense linear system:

* taylor: coefficients of z^(s-1), unknowns m_1..m_N. Entries carry binomial
  factors up to 4^N, and the truncation error of every unknown is of the
  size of m_N.
* mobius: coefficients of mu^t with mu = z/(z-2), unknowns g_0..g_(K-1) of
  ``G = sum g_k mu^k``. The maps z -> 1/(z-n) send [-1, 0] into
  0 <= mu <= 1/3, so low coefficients converge geometrically in K.

Both return the homogeneous part with the sign it has in ``G = r - H G``
(``H`` is the map ``G -> sum 2^-n (z-n)^-2 G(1/(z-n))``), which is also the
operator whose eigenvalues the spectral module computes.
"""
from math import comb, log2, ceil
from typing import List, Tuple

from mpmath import mp, mpf

from src.numerics.linalg import DenseMatrix
from src.numerics.precision import working_precision
from src.numerics.special import polylog_half_table
from src.utils.constants import SERIES_CUTOFF_BITS
from src.utils.logger import get_logger

logger = get_logger("moments.kernels")

KERNELS = ("mobius", "taylor")


def taylor_operator(N: int, prec: int, c: List[mpf] = None) -> DenseMatrix:
    """e_{s,L} = (-1)^(L-1) c_{L+s} C(L+s-1, s-1) for 1 <= s, L <= N (0-based storage)."""
    c = c if c is not None else polylog_half_table(2 * N, prec)
    with working_precision(prec):
        E = mp.matrix(N, N)
        for s in range(1, N + 1):
            for L in range(1, N + 1):
                entry = c[L + s] * comb(L + s - 1, s - 1)
                E[s - 1, L - 1] = entry if L % 2 == 1 else -entry
    return E


def taylor_system(N: int, prec: int, c: List[mpf] = None) -> Tuple[DenseMatrix, DenseMatrix]:
    """(I + E, c_1..c_N): the truncated moment equations with m_0 = 1 moved to the right."""
    c = c if c is not None else polylog_half_table(2 * N, prec)
    E = taylor_operator(N, prec, c)
    with working_precision(prec):
        A = mp.eye(N) + E
        rhs = mp.matrix([c[s] for s in range(1, N + 1)])
    return A, rhs


def _column_count(n: int, bits: int, size: int) -> int:
    # on |mu| = 1: |(1-mu)^2 / (n + (2-n) mu)^2| <= (n-1)^-2 and |mu'| <= 1/(2n-1)
    if n == 1:
        return size
    available = bits - n - 2 * log2(n - 1)
    if available <= 0:
        return 0
    return min(size, int(ceil(available / log2(2 * n - 1))))


def mobius_operator(size: int, prec: int) -> Tuple[List[List[mpf]], List[mpf]]:
    """Rows t < size of H and r in the basis mu^k, as nested lists.

    Column k of H is ``sum_n 2^-n (1-mu)^2 (n + (2-n) mu)^-2 mu_n^k`` with
    ``mu_n = (1-mu) / ((2n+1) - (2n-3) mu)`` the image of mu under z -> 1/(z-n).
    """
    bits = prec + SERIES_CUTOFF_BITS
    with working_precision(prec):
        H = [[mpf(0)] * size for _ in range(size)]
        r = [mpf(0)] * size
        weight = mpf(1)
        n = 0
        pairs = 0
        while True:
            n += 1
            weight /= 2
            columns = _column_count(n, bits, size)
            if columns == 0:
                break

            # 1. weight / (n + (2-n) mu) and its square
            ratio = mpf(n - 2) / n
            geometric = [weight / n]
            for t in range(1, size):
                geometric.append(geometric[-1] * ratio)
            r[0] += geometric[0]
            for t in range(1, size):
                r[t] += geometric[t] - geometric[t - 1]
            square = [(t + 1) * geometric[t] / n for t in range(size)]

            # 2. times (1 - mu)^2
            f = [square[0], square[1] - 2 * square[0]] if size > 1 else [square[0]]
            for t in range(2, size):
                f.append(square[t] - 2 * square[t - 1] + square[t - 2])

            # 3. columns k: repeated multiplication by mu_n
            inverse_a = mpf(1) / (2 * n + 1)
            b = mpf(2 * n - 3)
            for k in range(columns):
                for t in range(size):
                    H[t][k] += f[t]
                if k + 1 == columns:
                    break
                previous_f = previous_h = mpf(0)
                for t in range(size):
                    h = (f[t] - previous_f + b * previous_h) * inverse_a
                    previous_f, previous_h = f[t], h
                    f[t] = h
            pairs += columns
    logger.debug(f"Mobius operator of size {size} at {prec} bits: {n - 1} terms, {pairs} columns summed")
    return H, r


def mobius_system(size: int, prec: int) -> Tuple[DenseMatrix, DenseMatrix]:
    """(I + H, r) in the mobius basis."""
    H, r = mobius_operator(size, prec)
    with working_precision(prec):
        A = mp.matrix(size, size)
        for t in range(size):
            row = H[t]
            for k in range(size):
                A[t, k] = row[k]
            A[t, t] += 1
        rhs = mp.matrix(r)
    return A, rhs


def mobius_to_taylor(g, count: int, prec: int) -> List[mpf]:
    """Taylor coefficients a_0..a_(count-1) of sum g_k mu^k, mu = z/(z-2).

    ``[z^j] mu^k = (-1)^k C(j-1, k-1) 2^-j`` for 1 <= k <= j.
    """
    with working_precision(prec):
        coefficients = [mpf(g[0])]
        for j in range(1, count):
            total = mpf(0)
            for k in range(1, j + 1):
                term = comb(j - 1, k - 1) * g[k]
                total += -term if k % 2 else term
            coefficients.append(mp.ldexp(total, -j))
    return coefficients


def mobius_size(order: int, prec: int) -> int:
    return max(order, prec // 2 + 16)


def leading_block(A: DenseMatrix, rhs: DenseMatrix, size: int) -> Tuple[DenseMatrix, DenseMatrix]:
    block = mp.matrix(size, size)
    for i in range(size):
        for j in range(size):
            block[i, j] = A[i, j]
    return block, mp.matrix([rhs[i] for i in range(size)])
