"""Geometry of the unbounded hexagonal (honeycomb) lattice.

The vertex set is bipartite.  A vertex is addressed by a pair of integers
``(j, k)`` together with a class index ``i`` in ``{0, 1}``; its Cartesian
position is

    x = (3/2)*a*j + i*a,        y = (sqrt(3)/2)*a*j + sqrt(3)*a*k,

where ``a`` is the edge length.  Every edge joins vertices of opposite
class, so a walker alternates classes at each step and the class occupied
at time ``n`` is ``parity(n)``.

Steps out of a vertex are labelled by a direction ``r`` in ``{0, 1, 2}``;
the displacement of direction ``r`` from a class-``i`` vertex is

    a * (cos(2*pi*r/3 + i*pi), sin(2*pi*r/3 + i*pi)),

i.e. class-0 vertices step right, up-left or down-left, and class-1
vertices step left, down-right or up-right.  The index shifts these
displacements induce on ``(j, k)`` are frozen in ``INDEX_SHIFTS`` and the
test suite verifies the table against the displacement formula, so the
two descriptions cannot drift apart.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import sqrt
from typing import Union

from .errors import InvalidParameterError

Number = Union[int, float, Fraction]

ROOT3 = sqrt(3.0)

# (dj, dk) for direction r = 0, 1, 2, per vertex class.  The class index
# always flips, so it is not part of the table.
INDEX_SHIFTS = (
    ((0, 0), (-1, 1), (-1, 0)),  # from class 0
    ((0, 0), (1, -1), (1, 0)),  # from class 1
)

# Unit-edge displacement of direction r from a class-0 vertex, in units
# of a.  Class-1 displacements are the exact negatives (rotation by pi).
_UNIT_MOVES = ((1.0, 0.0), (-0.5, ROOT3 / 2.0), (-0.5, -ROOT3 / 2.0))


def parity(n: int) -> int:
    """Vertex class occupied at time ``n``: 0 if ``n`` is even, else 1."""
    if n < 0:
        raise InvalidParameterError(f"time must be nonnegative, got {n}")
    return n & 1


def _is_exact(x: Number) -> bool:
    return isinstance(x, (int, Fraction))


@dataclass(frozen=True)
class StepProbabilities:
    """One-step transition probabilities plus the lattice edge length.

    ``q0`` and ``q1`` hold the direction probabilities out of class-0 and
    class-1 vertices, indexed by direction ``r``.  Entries may be
    ``Fraction`` (enabling exact-rational evolution) or ``float``.  Each
    row must sum to one: exactly for rational rows, within 1e-15 for
    float rows.
    """

    q0: tuple
    q1: tuple
    a: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "q0", tuple(self.q0))
        object.__setattr__(self, "q1", tuple(self.q1))
        for name, row in (("q0", self.q0), ("q1", self.q1)):
            if len(row) != 3:
                raise InvalidParameterError(f"{name} must have 3 entries")
            for p in row:
                if not 0 <= p <= 1:
                    raise InvalidParameterError(
                        f"{name} entries must lie in [0, 1], got {p!r}"
                    )
            total = sum(row)
            if all(_is_exact(p) for p in row):
                if total != 1:
                    raise InvalidParameterError(
                        f"{name} must sum to 1 exactly, got {total!r}"
                    )
            elif abs(total - 1.0) > 1e-15:
                raise InvalidParameterError(
                    f"{name} must sum to 1 within 1e-15, got {total!r}"
                )
        if not self.a > 0:
            raise InvalidParameterError(f"edge length must be positive, got {self.a}")

    @classmethod
    def uniform(cls, a: float = 1.0) -> "StepProbabilities":
        """All six probabilities equal to 1/3, exactly."""
        third = Fraction(1, 3)
        return cls((third, third, third), (third, third, third), a)

    @property
    def exact(self) -> bool:
        """True when every entry is rational, so exact evolution applies."""
        return all(_is_exact(p) for p in self.q0 + self.q1)

    def row(self, i: int) -> tuple:
        if i not in (0, 1):
            raise InvalidParameterError(f"vertex class must be 0 or 1, got {i}")
        return self.q0 if i == 0 else self.q1

    def as_float(self) -> "StepProbabilities":
        return StepProbabilities(
            tuple(float(p) for p in self.q0),
            tuple(float(p) for p in self.q1),
            self.a,
        )


@dataclass(frozen=True)
class CartesianPoint:
    x: float
    y: float


@dataclass(frozen=True)
class LatticeVertex:
    """A lattice node: integer coordinates ``(j, k)`` and class ``i``."""

    j: int
    k: int
    i: int

    def __post_init__(self):
        if self.i not in (0, 1):
            raise InvalidParameterError(f"vertex class must be 0 or 1, got {self.i}")


def to_cartesian(v: LatticeVertex, a: float) -> CartesianPoint:
    """Cartesian position of vertex ``v`` on a lattice with edge length ``a``."""
    if not a > 0:
        raise InvalidParameterError(f"edge length must be positive, got {a}")
    return CartesianPoint(1.5 * a * v.j + v.i * a, (ROOT3 / 2.0) * a * v.j + ROOT3 * a * v.k)


def step_displacement(i: int, r: int, a: float) -> CartesianPoint:
    """Cartesian displacement of a direction-``r`` step from class ``i``."""
    if r not in (0, 1, 2):
        raise InvalidParameterError(f"direction must be 0, 1 or 2, got {r}")
    ux, uy = _UNIT_MOVES[r]
    if i == 1:
        ux, uy = -ux, -uy
    elif i != 0:
        raise InvalidParameterError(f"vertex class must be 0 or 1, got {i}")
    return CartesianPoint(a * ux, a * uy)


def neighbors(v: LatticeVertex) -> list:
    """The three adjacent vertices of ``v`` with their direction labels.

    Returns ``[(w, r)]`` where ``w`` is the vertex reached by a
    direction-``r`` step; every ``w`` has the opposite class of ``v``.
    """
    out = []
    for r, (dj, dk) in enumerate(INDEX_SHIFTS[v.i]):
        out.append((LatticeVertex(v.j + dj, v.k + dk, 1 - v.i), r))
    return out
