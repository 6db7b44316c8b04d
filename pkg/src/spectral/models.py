from dataclasses import dataclass, field
from typing import Dict, List, Optional

from mpmath import mp, mpf

from src.numerics.linalg import DenseMatrix


@dataclass
class OperatorMatrix:
    """Truncation of the homogeneous map G -> sum 2^-n (z-n)^-2 G(1/(z-n)).

    In the taylor basis ``entries[s-1, L-1] = e_{s,L} = (-1)^(L-1) c_{L+s} C(L+s-1, s-1)``;
    in the mobius basis the same map acts on the coefficients of G in z/(z-2).
    """
    order: int
    prec: int
    work_prec: int
    basis: str
    entries: DenseMatrix

    def entry(self, s: int, L: int) -> mpf:
        return self.entries[s - 1, L - 1]

    def sign_pattern_holds(self) -> bool:
        if self.basis != "taylor":
            return True
        for L in range(1, self.order + 1):
            expected = 1 if L % 2 == 1 else -1
            for s in range(1, self.order + 1):
                if mp.sign(self.entry(s, L)) != expected:
                    return False
        return True


@dataclass
class EigenPair:
    """Eigenvalue with the Taylor coefficients m^(lambda)_1.. of G_lambda, normalized to m_1 = 1."""
    value: mpf
    coeffs: List[mpf]
    residual: mpf
    order: int
    basis: str
    mobius: List[mpf] = field(default_factory=list)
    digits_stable: Optional[int] = None

    def to_dict(self, with_coeffs: bool = False) -> Dict:
        data = {
            "value": mp.nstr(self.value, 20),
            "residual": mp.nstr(self.residual, 5),
            "digits_stable": self.digits_stable,
            "order": self.order,
            "basis": self.basis,
        }
        if with_coeffs:
            data["coeffs"] = [mp.nstr(c, 20) for c in self.coeffs]
        return data


@dataclass(frozen=True)
class KernelSample:
    s: mpf
    t: mpf
    value: mpf
    psi_s: mpf
    psi_t: mpf
