from dataclasses import dataclass, field
from typing import Dict, List

from mpmath import mp, mpf

from src.numerics.precision import working_precision
from src.utils.constants import RELIABLE_RELATIVE_ERROR
from src.utils.exceptions import ValidationError


def _digits(prec: int) -> int:
    return int(prec * 0.30103) + 2


@dataclass
class MomentTable:
    """Solved moments of ? on [0, 1] and of F on [0, inf).

    Lists are index-aligned: ``m[L]``, ``M[L]``, ``B[L]``, ``err[L]`` for
    ``0 <= L <= order`` and ``c[L]`` for ``0 <= L <= 2 * order``, with
    ``m[0] = M[0] = c[0] = 1``. ``err[L]`` bounds ``|m[L] - m_L|`` from a
    re-solve at a larger truncation. ``mobius`` holds the coefficients of G
    in the variable ``z / (z - 2)`` when that kernel produced the table.
    """
    order: int
    prec: int
    work_prec: int
    kernel: str
    m: List[mpf]
    M: List[mpf]
    c: List[mpf]
    B: List[int]
    err: List[mpf]
    mobius: List[mpf] = field(default_factory=list)

    @property
    def truncation_error(self) -> mpf:
        return max(self.err)

    def reliable_order(self, relative: float = RELIABLE_RELATIVE_ERROR) -> int:
        """Largest K such that every m_s with s <= K is known to the given relative error."""
        K = 0
        for s in range(1, self.order + 1):
            if self.m[s] <= 0 or self.err[s] > relative * self.m[s]:
                break
            K = s
        return K

    def check_invariants(self) -> List[str]:
        problems = []
        K = self.reliable_order()
        with working_precision(self.work_prec):
            if abs(self.m[1] - mpf(1) / 2) > self.err[1] + mp.ldexp(mpf(1), -(self.prec // 2)):
                problems.append(f"m_1 = {mp.nstr(self.m[1], 20)} differs from 1/2 beyond its error")
            if abs(self.M[1] - mpf(3) / 2) > self.err[1] + mp.ldexp(mpf(1), -(self.prec // 2)):
                problems.append(f"M_1 = {mp.nstr(self.M[1], 20)} differs from 3/2 beyond its error")
            for s in range(1, K):
                if not self.m[s] > self.m[s + 1] > 0:
                    problems.append(f"monotonicity fails at L={s} inside the reliable range {K}")
                    break
        if K < 8:
            problems.append(f"only {K} moments are reliable at order {self.order}")
        return problems

    def to_dict(self) -> Dict:
        digits = _digits(self.prec)

        def text(values):
            return [mp.nstr(v, digits) for v in values]

        return {
            "order": self.order,
            "prec_bits": self.prec,
            "kernel": self.kernel,
            "m": text(self.m[1:]),
            "M": text(self.M),
            "c": text(self.c[1:]),
            "B": list(self.B),
            "err": [mp.nstr(e, 5) for e in self.err[1:]],
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "MomentTable":
        try:
            order, prec = int(data["order"]), int(data["prec_bits"])
            with working_precision(prec + 64):
                m = [mpf(1)] + [mpf(v) for v in data["m"]]
                M = [mpf(v) for v in data["M"]]
                c = [mpf(1)] + [mpf(v) for v in data["c"]]
                err = [mpf(0)] + [mpf(v) for v in data["err"]]
            B = [int(b) for b in data["B"]]
        except (KeyError, TypeError, ValueError) as e:
            raise ValidationError(f"Malformed moment table: {e}")
        if not (len(m) == len(M) == len(B) == len(err) == order + 1 and len(c) == 2 * order + 1):
            raise ValidationError(f"Moment table lists do not match order {order}")
        return cls(order=order, prec=prec, work_prec=prec + 64, kernel=data.get("kernel", "unknown"),
                   m=m, M=M, c=c, B=B, err=err)


@dataclass
class SeriesEstimate:
    """A truncated series value with its bound and the part contributed by the tail model."""
    value: mpf
    error: mpf
    tail: mpf = mpf(0)
    terms: int = 0

    def to_dict(self) -> Dict:
        return {
            "value": mp.nstr(self.value, 30),
            "error": mp.nstr(self.error, 5),
            "tail": mp.nstr(self.tail, 5),
            "terms": self.terms,
        }


@dataclass
class KinneyEstimate:
    alpha: mpf
    integral_series: SeriesEstimate
    integral_quadrature: SeriesEstimate

    @property
    def agreement(self) -> mpf:
        return abs(self.integral_series.value - self.integral_quadrature.value)

    def to_dict(self) -> Dict:
        return {
            "alpha": mp.nstr(self.alpha, 30),
            "series": self.integral_series.to_dict(),
            "quadrature": self.integral_quadrature.to_dict(),
            "agreement": mp.nstr(self.agreement, 5),
        }


@dataclass
class AsymptoticEstimate:
    """kappa = m(log 2) / (2 log 2) and the ratios r_L = M_L log(2)^L / L! that approach it."""
    kappa: SeriesEstimate
    ratios: List[mpf]
    ratio_errors: List[mpf]

    def deviations(self) -> List[mpf]:
        return [abs(r - self.kappa.value) for r in self.ratios]

    def to_dict(self) -> Dict:
        return {
            "kappa": self.kappa.to_dict(),
            "ratios": [mp.nstr(r, 20) for r in self.ratios],
        }
