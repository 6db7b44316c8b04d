from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Tuple

from src.utils.constants import MAX_DENSE_STATES
from src.utils.exceptions import SizeLimitError


@dataclass(frozen=True, order=True)
class AdmissiblePair:
    """A p-adic disc of the projective line.

    ``outside=False``: the ball ``{x : ord_p(x - center) >= kappa}`` with a
    canonical center. ``outside=True``: ``{x : ord_p(x) <= -kappa} U {inf}``.
    """
    p: int
    center: Fraction
    kappa: int
    outside: bool = False

    def __str__(self):
        if self.outside:
            return f"G(0, {-self.kappa})"
        return f"F({self.center}, {self.kappa})"

    def to_dict(self) -> Dict:
        return {"i": str(self.center), "kappa": self.kappa, "is_outside": self.outside}


@dataclass
class MarkovOrbit:
    """States closed under the two transitions, with index maps ``tau[k]`` and ``sigma[k]``.

    Row ``k`` of the transition matrix carries 1/2 at ``tau[k]`` and 1/2 at
    ``sigma[k]`` (one entry 1 when they coincide).
    """
    p: int
    kappa: int
    states: List[AdmissiblePair]
    tau: List[int]
    sigma: List[int]

    def __len__(self):
        return len(self.states)

    def index(self, state: AdmissiblePair) -> int:
        return self.states.index(state)

    def matrix(self) -> List[List[Fraction]]:
        size = len(self.states)
        if size > MAX_DENSE_STATES:
            raise SizeLimitError(f"Dense transition matrix is limited to {MAX_DENSE_STATES} states, orbit has {size}",
                                 limit=MAX_DENSE_STATES)
        half = Fraction(1, 2)
        P = [[Fraction(0)] * size for _ in range(size)]
        for k in range(size):
            P[k][self.tau[k]] += half
            P[k][self.sigma[k]] += half
        return P

    def row_sums(self) -> List[Fraction]:
        return [Fraction(1) for _ in self.states]

    def column_sums(self) -> List[Fraction]:
        sums = [Fraction(0)] * len(self.states)
        for k in range(len(self.states)):
            sums[self.tau[k]] += Fraction(1, 2)
            sums[self.sigma[k]] += Fraction(1, 2)
        return sums

    def is_doubly_stochastic(self) -> bool:
        return all(total == 1 for total in self.column_sums())

    def to_dict(self) -> Dict:
        return {
            "p": self.p,
            "kappa": self.kappa,
            "size": len(self.states),
            "states": [str(state) for state in self.states],
            "transitions": [(str(self.states[t]), str(self.states[s])) for t, s in zip(self.tau, self.sigma)],
        }


@dataclass
class MuComparison:
    p: int
    z: Fraction
    nu: int
    closed: Fraction
    empirical: Dict[int, Fraction]

    def deviations(self) -> List[Tuple[int, float]]:
        return [(n, abs(float(value - self.closed))) for n, value in sorted(self.empirical.items())]

    def is_nonincreasing(self) -> bool:
        errors = [error for _, error in self.deviations()]
        return all(later <= earlier for earlier, later in zip(errors, errors[1:]))

    def to_dict(self) -> Dict:
        return {
            "p": self.p,
            "z": str(self.z),
            "nu": self.nu,
            "closed_form": str(self.closed),
            "empirical": {str(n): str(value) for n, value in sorted(self.empirical.items())},
            "deviations": {str(n): error for n, error in self.deviations()},
        }
