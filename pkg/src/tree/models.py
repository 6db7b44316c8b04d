from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple


@dataclass(frozen=True)
class TreeGeneration:
    n: int
    members: Tuple[Fraction, ...]

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def is_reciprocal_closed(self):
        return set(self.members) == {1 / x for x in self.members}

    def below_one(self):
        return [x for x in self.members if x < 1]

    def to_dict(self):
        return {
            "n": self.n,
            "size": len(self.members),
            "members": [str(x) for x in self.members],
        }


@dataclass(frozen=True)
class Deviation:
    n: int
    x: Fraction
    delta: Fraction

    def within_bound(self):
        return abs(self.delta) <= Fraction(1, 2 ** self.n)

    def to_dict(self):
        return {
            "n": self.n,
            "x": str(self.x),
            "delta": float(self.delta),
        }
