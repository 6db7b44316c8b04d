"""Bessel-kernel identities of the moment generating function.

With ``psi(s) = sqrt(2 e^s - 1)`` the moment generating function satisfies

    m(-s) = psi(s)^2 int_0^inf m'(-t) J_0(2 sqrt(st)) dt
    int_0^inf m(-t) t^-1/2 J_1(2 sqrt(st)) dt = s^-1/2 - m(-s) / (sqrt(s) psi(s)^2)

and the second form leads to the symmetric kernel ``J_1(2 sqrt(st)) / (psi(s) psi(t))``.
Both identities are checked by panel quadrature up to a cut ``T`` plus a bound
for the rest.
"""
from math import ceil
from typing import Callable, Tuple

import numpy as np
from mpmath import mp, mpf

from src.moments.generating import mgf, mgf_derivative
from src.moments.models import MomentTable, SeriesEstimate
from src.numerics.precision import working_precision, to_mpf, series_cutoff
from src.numerics.quadrature import gauss_legendre, integrate_panel
from src.numerics.special import bessel_cancellation_bits, bessel_j
from src.spectral.models import KernelSample
from src.tree.calkin_wilf import stern_brocot_level
from src.utils.constants import DOUBLE_BITS
from src.utils.exceptions import DomainError, TailBoundError
from src.utils.logger import get_logger

logger = get_logger("spectral.kernel")

MEDIANT_DEPTH = 20
SERIES_TRUST = 1e-10
PANEL_TOLERANCE = 1e-8
TAIL_LIMIT = 1e-2
ELL_CUT = 60


def psi(s, prec: int = DOUBLE_BITS) -> mpf:
    with working_precision(prec):
        return mp.sqrt(2 * mp.exp(to_mpf(s)) - 1)


def _bessel(order: int, x: mpf, prec: int) -> mpf:
    # enough bits for the alternating series to keep prec of them
    return bessel_j(order, x, max(prec, 2 * bessel_cancellation_bits(x) + 16))


def kernel_K(s, t, prec: int = DOUBLE_BITS) -> KernelSample:
    s, t = to_mpf(s), to_mpf(t)
    if s < 0 or t < 0:
        raise DomainError(f"kernel_K needs s, t >= 0, got ({mp.nstr(s, 6)}, {mp.nstr(t, 6)})")
    with working_precision(prec):
        psi_s, psi_t = psi(s, prec), psi(t, prec)
        x = 2 * mp.sqrt(s * t)
        value = _bessel(1, x, prec) / (psi_s * psi_t)
    return KernelSample(s=s, t=t, value=value, psi_s=psi_s, psi_t=psi_t)


def hilbert_schmidt_norm(T: float, nodes: int = 8) -> float:
    """int int_[0,T]^2 K(s,t)^2 ds dt by tensor Gauss-Legendre on panels of width 2."""
    panels = max(1, int(ceil(T / 2)))
    xs, ws = gauss_legendre(nodes, DOUBLE_BITS)
    width = T / panels
    points, weights = [], []
    for j in range(panels):
        for x, w in zip(xs, ws):
            points.append(j * width + (float(x) + 1) * width / 2)
            weights.append(float(w) * width / 2)
    points = np.array(points)
    weights = np.array(weights)
    psi_values = np.sqrt(2 * np.exp(points) - 1)

    total = 0.0
    with working_precision(DOUBLE_BITS):
        for i in range(len(points)):
            for j in range(i, len(points)):
                J = float(mp.besselj(1, 2 * mp.sqrt(points[i] * points[j])))
                value = weights[i] * weights[j] * (J / (psi_values[i] * psi_values[j])) ** 2
                # off-diagonal cells count for both (i, j) and (j, i)
                total += value if i == j else 2 * value
    logger.debug(f"Hilbert-Schmidt integral over [0, {T}]^2: {total:.10f}")
    return total


class MediantSampler:
    """Midpoint rule for int_0^1 omega(x) d?(x) on one cached level of Stern-Brocot mediants."""

    def __init__(self, depth: int = MEDIANT_DEPTH):
        p, q = stern_brocot_level(depth + 1)
        self.x = p / q
        self.depth = depth

    def mean(self, omega: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.mean(omega(self.x)))

    def m(self, t: float) -> float:
        """m(-t) = int e^(-xt) d?(x)."""
        return self.mean(lambda x: np.exp(-x * t))

    def m_prime(self, t: float) -> float:
        """m'(-t) = int x e^(-xt) d?(x)."""
        return self.mean(lambda x: x * np.exp(-x * t))

    def m_tail(self, T: float) -> float:
        """int_T^inf m(-t) dt = int e^(-xT) / x d?(x)."""
        return self.mean(lambda x: np.exp(-x * T) / x)


def _series_reach(estimate: Callable[[mpf], SeriesEstimate], T: float) -> int:
    """Largest integer t <= T up to which the reflected moment series is trusted."""
    reach = 0
    for t in range(1, int(T) + 1):
        try:
            value = estimate(-t)
        except TailBoundError:
            break
        if value.error > SERIES_TRUST * abs(value.value):
            break
        reach = t
    return reach


def _integrate(f: Callable[[mpf], mpf], a: float, b: float, width: float, prec: int) -> mpf:
    if b <= a:
        return mpf(0)
    panels = max(1, int(ceil((b - a) / width)))
    return integrate_panel(f, a, b, prec=prec, tol=PANEL_TOLERANCE, panels=panels).value


def _split_integral(series: Callable[[mpf], mpf], fallback: Callable[[float], float],
                    weight: Callable[[mpf], mpf], reach: int, T: float, width: float, prec: int) -> mpf:
    head = _integrate(lambda t: series(t) * weight(t), 0, min(reach, T), width, prec)
    rest = _integrate(lambda t: fallback(float(t)) * weight(t), min(reach, T), T, width, prec)
    return head + rest


def bessel_equation_residual(s, table: MomentTable, T_cut: float = 80, prec: int = DOUBLE_BITS) -> mpf:
    """|m(-s) - psi(s)^2 int_0^inf m'(-t) J_0(2 sqrt(st)) dt| / m(-s)."""
    s = to_mpf(s)
    if s <= 0:
        raise DomainError(f"bessel_equation_residual needs s > 0, got {mp.nstr(s, 6)}")
    sampler = MediantSampler()

    # 1. where the table series is trusted for m'(-t)
    reach = _series_reach(lambda t: mgf_derivative(t, table), T_cut)

    with working_precision(prec + 16):
        scale = psi(s, prec) ** 2
        lhs = mgf(-s, table).value
        width = mp.pi ** 2 / (4 * s)

        # 2. panels up to the cut
        weight = lambda t: _bessel(0, 2 * mp.sqrt(s * t), prec)
        integral = _split_integral(lambda t: mgf_derivative(-t, table).value, sampler.m_prime,
                                   weight, reach, T_cut, width, prec)
        rhs = scale * integral

        # 3. |J_0| <= 1 and int_T^inf m'(-t) dt = m(-T)
        tail = scale * sampler.m(T_cut)
        if tail > TAIL_LIMIT * lhs:
            raise TailBoundError(f"Tail beyond T = {T_cut} is {mp.nstr(tail, 3)}, too large against m(-s)",
                                 iterations=int(T_cut))
        residual = abs(lhs - rhs) / lhs
    logger.info(f"Bessel equation at s={mp.nstr(s, 6)}: relative residual {mp.nstr(residual, 3)}, "
                f"tail bound {mp.nstr(tail / lhs, 3)}, series up to t={reach}")
    return residual


def ell_closed(s, prec: int = DOUBLE_BITS) -> mpf:
    """(sum_n e^(-s/n) 2^-n - 1) / (sqrt(s) psi(s))."""
    s = to_mpf(s)
    if s <= 0:
        raise DomainError(f"ell needs s > 0, got {mp.nstr(s, 6)}")
    with working_precision(prec + 16):
        cutoff = series_cutoff(prec)
        total, weight, n = mpf(0), mpf(1), 0
        while weight >= cutoff:
            n += 1
            weight /= 2
            total += mp.exp(-s / n) * weight
        return (total - 1) / (mp.sqrt(s) * psi(s, prec))


def ell_integral(s, T_cut: float = ELL_CUT, prec: int = DOUBLE_BITS) -> mpf:
    """-(1/psi(s)) int_0^inf J_1(2 sqrt(st)) / (sqrt(t) psi(t)^2) dt."""
    s = to_mpf(s)
    if s <= 0:
        raise DomainError(f"ell needs s > 0, got {mp.nstr(s, 6)}")
    with working_precision(prec + 16):
        width = mp.pi ** 2 / (4 * s)
        f = lambda t: _bessel(1, 2 * mp.sqrt(s * t), prec) / (mp.sqrt(t) * (2 * mp.exp(t) - 1))
        return -_integrate(f, 0, T_cut, width, prec) / psi(s, prec)


def hankel_identity_residual(s, table: MomentTable, T_cut: float = 80,
                             prec: int = DOUBLE_BITS) -> Tuple[mpf, mpf]:
    """Relative residuals of the integrated-by-parts Bessel identity and of the two forms of ell(s)."""
    s = to_mpf(s)
    if s <= 0:
        raise DomainError(f"hankel_identity_residual needs s > 0, got {mp.nstr(s, 6)}")
    sampler = MediantSampler()
    reach = _series_reach(lambda t: mgf(t, table), T_cut)

    with working_precision(prec + 16):
        root = mp.sqrt(s)
        rhs = 1 / root - mgf(-s, table).value / (root * psi(s, prec) ** 2)
        width = mp.pi ** 2 / (4 * s)
        # J_1(2 sqrt(st)) / sqrt(t) is entire in t
        weight = lambda t: _bessel(1, 2 * mp.sqrt(s * t), prec) / mp.sqrt(t) if t > 0 else root
        lhs = _split_integral(lambda t: mgf(-t, table).value, sampler.m, weight, reach, T_cut, width, prec)

        # |J_1| <= 1, t^-1/2 <= T^-1/2
        tail = sampler.m_tail(T_cut) / mp.sqrt(T_cut)
        if tail > TAIL_LIMIT * abs(rhs):
            raise TailBoundError(f"Tail beyond T = {T_cut} is {mp.nstr(tail, 3)}, too large against the identity",
                                 iterations=int(T_cut))
        identity = abs(lhs - rhs) / abs(rhs)

        closed = ell_closed(s, prec)
        ell = abs(ell_integral(s, prec=prec) - closed) / abs(closed)
    logger.info(f"Integrated identity at s={mp.nstr(s, 6)}: residuals {mp.nstr(identity, 3)} and "
                f"{mp.nstr(ell, 3)} for ell")
    return identity, ell

