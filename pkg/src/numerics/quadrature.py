from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, List, Tuple

import numpy as np
from mpmath import mp, mpf

from src.numerics.precision import working_precision
from src.utils.constants import GL_NODES, MAX_PANEL_DOUBLINGS
from src.utils.exceptions import ConvergenceError
from src.utils.logger import get_logger

logger = get_logger("numerics.quadrature")


@dataclass
class QuadratureResult:
    value: object
    error: mpf
    panels: int
    evaluations: int

    def to_dict(self):
        return {
            "value": str(self.value),
            "error": mp.nstr(self.error, 6),
            "panels": self.panels,
            "evaluations": self.evaluations,
        }


def _legendre_pair(n: int, x: mpf) -> Tuple[mpf, mpf]:
    previous, current = mpf(1), x
    for k in range(1, n):
        previous, current = current, ((2 * k + 1) * x * current - k * previous) / (k + 1)
    derivative = n * (x * current - previous) / (x * x - 1)
    return current, derivative


@lru_cache(maxsize=64)
def gauss_legendre(nodes: int, prec: int) -> Tuple[Tuple[mpf, ...], Tuple[mpf, ...]]:
    """Nodes and weights on [-1, 1]: numpy seeds, Newton-refined at ``prec`` bits."""
    seeds, _ = np.polynomial.legendre.leggauss(nodes)
    xs, ws = [], []
    with working_precision(prec + 16):
        eps = mp.ldexp(mpf(1), -prec)
        for seed in seeds:
            x = mpf(float(seed))
            for _ in range(100):
                value, derivative = _legendre_pair(nodes, x)
                step = value / derivative
                x -= step
                if abs(step) < eps:
                    break
            _, derivative = _legendre_pair(nodes, x)
            xs.append(x)
            ws.append(2 / ((1 - x * x) * derivative * derivative))
    return tuple(xs), tuple(ws)


def _panel_points(a: mpf, b: mpf, panels: int, xs, ws) -> Tuple[List[mpf], List[mpf]]:
    width = (b - a) / panels
    points, weights = [], []
    for j in range(panels):
        left = a + j * width
        for x, w in zip(xs, ws):
            points.append(left + (x + 1) * width / 2)
            weights.append(w * width / 2)
    return points, weights


def integrate_panel(f: Callable, a, b, nodes: int = GL_NODES, prec: int = 53, tol=None,
                    panels: int = 1, vectorized: bool = False,
                    max_doublings: int = MAX_PANEL_DOUBLINGS) -> QuadratureResult:
    """Composite Gauss-Legendre on [a, b], doubling panels until two estimates agree within ``tol``.

    With ``vectorized`` the integrand receives the full list of nodes and returns a list of values.
    """
    xs, ws = gauss_legendre(nodes, prec)
    evaluations = 0
    with working_precision(prec + 16):
        a, b = mpf(a), mpf(b)
        tol = mp.ldexp(mpf(1), -(prec // 2)) if tol is None else mpf(tol)
        previous = None
        for doubling in range(max_doublings + 1):
            points, weights = _panel_points(a, b, panels, xs, ws)
            values = f(points) if vectorized else [f(x) for x in points]
            evaluations += len(points)
            estimate = mp.fsum(w * v for w, v in zip(weights, values))
            if previous is not None:
                error = abs(estimate - previous)
                if error < tol:
                    logger.debug(f"integrate_panel [{mp.nstr(a, 5)}, {mp.nstr(b, 5)}] "
                                 f"converged with {panels} panels, error {mp.nstr(error, 3)}")
                    return QuadratureResult(estimate, error, panels, evaluations)
            previous = estimate
            panels *= 2

    raise ConvergenceError(
        f"integrate_panel did not reach tolerance {mp.nstr(tol, 3)} after {max_doublings} doublings",
        iterations=max_doublings,
    )
