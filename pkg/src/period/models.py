from dataclasses import dataclass
from typing import Dict

from mpmath import mp, mpc, mpf

EVAL_METHODS = ("auto", "power-series", "rational-series", "quadrature")


@dataclass
class PeriodEvaluation:
    z: mpc
    value: mpc
    method: str
    error: mpf

    def agrees_with(self, other: "PeriodEvaluation", slack: mpf = mpf(0)) -> bool:
        return abs(self.value - other.value) <= self.error + other.error + slack

    def to_dict(self) -> Dict:
        return {
            "z": mp.nstr(self.z, 15),
            "value": mp.nstr(self.value, 30),
            "method": self.method,
            "error": mp.nstr(self.error, 5),
        }
