"""Exact rational coweights: pairings, Weyl chambers, dominance and orbit averages.

Coordinates are the standard torus coordinates of the classical groups:

* ``A`` (rank r) and ``GL`` use ``GL_{r+1}`` resp. ``GL_r`` coordinates,
* ``B``, ``C``, ``D`` use ``r`` coordinates ``e_1, ..., e_r``,
* ``GSp`` uses ``r`` coordinates plus one similitude coordinate ``c``.  A
  cocharacter ``(a_1, ..., a_r; c)`` acts on ``e_i`` by ``t^{a_i}`` and on the
  dual vector ``f_i`` by ``t^{c - a_i}``, so Weyl sign changes act by
  ``a_i -> c - a_i`` (a sign change of the centred value ``a_i - c/2``).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence, Tuple, Union

FAMILIES = ("A", "B", "C", "D", "GL", "GSp")

Number = Union[int, Fraction]


class DimensionError(ValueError):
    """Shapes of coweights / functionals / contexts do not agree."""


class PreconditionError(ValueError):
    """An operation was called on inputs outside its contract."""


class NonPeriodicError(RuntimeError):
    """An action did not return to its starting point within the order bound."""


def coord_dim(family: str, rank: int) -> int:
    """Number of torus coordinates per factor."""
    return rank + 1 if family == "A" else rank


@dataclass(frozen=True)
class RationalCoweight:
    """A point of ``X_*(T) (x) Q`` spread over ``n`` factors."""

    factors: Tuple[Tuple[Fraction, ...], ...]
    similitude: Optional[Fraction] = None

    def __post_init__(self):
        facs = tuple(tuple(Fraction(x) for x in f) for f in self.factors)
        if not facs:
            raise DimensionError("a coweight needs at least one factor")
        if len({len(f) for f in facs}) != 1:
            raise DimensionError("all factors must have the same length")
        object.__setattr__(self, "factors", facs)
        if self.similitude is not None:
            object.__setattr__(self, "similitude", Fraction(self.similitude))

    @classmethod
    def of(cls, *factors: Sequence[Number], similitude: Optional[Number] = None):
        return cls(tuple(tuple(f) for f in factors), similitude)

    @property
    def n(self) -> int:
        return len(self.factors)

    @property
    def dim(self) -> int:
        return len(self.factors[0])

    def flat(self) -> Tuple[Fraction, ...]:
        return tuple(x for f in self.factors for x in f)

    def __neg__(self) -> "RationalCoweight":
        sim = None if self.similitude is None else -self.similitude
        return RationalCoweight(tuple(tuple(-x for x in f) for f in self.factors), sim)

    def __add__(self, other: "RationalCoweight") -> "RationalCoweight":
        _check_same_shape(self, other)
        sim = None if self.similitude is None else self.similitude + other.similitude
        return RationalCoweight(
            tuple(tuple(a + b for a, b in zip(f, g)) for f, g in zip(self.factors, other.factors)),
            sim,
        )

    def __sub__(self, other: "RationalCoweight") -> "RationalCoweight":
        return self + (-other)

    def scale(self, q: Number) -> "RationalCoweight":
        q = Fraction(q)
        sim = None if self.similitude is None else self.similitude * q
        return RationalCoweight(tuple(tuple(x * q for x in f) for f in self.factors), sim)

    def is_zero(self) -> bool:
        return all(x == 0 for x in self.flat()) and not self.similitude

    def __str__(self) -> str:
        body = ";".join(":".join(str(x) for x in f) for f in self.factors)
        if self.similitude is not None:
            body += f";sim:{self.similitude}"
        return body


def zero_coweight(n: int, dim: int, similitude: bool = False) -> RationalCoweight:
    return RationalCoweight(tuple((Fraction(0),) * dim for _ in range(n)),
                            Fraction(0) if similitude else None)


@dataclass(frozen=True)
class Functional:
    """An integral character of the torus: one weight vector per factor plus a
    similitude weight (only meaningful for ``GSp``)."""

    coords: Tuple[Tuple[int, ...], ...]
    similitude: int = 0

    @classmethod
    def on_factor(cls, n: int, dim: int, factor: int, vec: Sequence[int], similitude: int = 0):
        coords = [(0,) * dim for _ in range(n)]
        coords[factor] = tuple(vec)
        return cls(tuple(coords), similitude)

    def __neg__(self) -> "Functional":
        return Functional(tuple(tuple(-x for x in f) for f in self.coords), -self.similitude)

    def support(self) -> Tuple[int, ...]:
        return tuple(s for s, f in enumerate(self.coords) if any(f))


def _check_same_shape(a: RationalCoweight, b: RationalCoweight) -> None:
    if a.n != b.n or a.dim != b.dim:
        raise DimensionError(f"shape mismatch: {a.n}x{a.dim} vs {b.n}x{b.dim}")
    if (a.similitude is None) != (b.similitude is None):
        raise DimensionError("similitude coordinate present on one side only")


def pair(nu: RationalCoweight, functional: Union[Functional, Sequence]) -> Fraction:
    """Exact pairing ``<nu, functional>``.

    ``functional`` may be a :class:`Functional` or, for one-factor coweights, a
    plain weight vector.
    """
    if not isinstance(functional, Functional):
        seq = list(functional)
        if seq and isinstance(seq[0], (list, tuple)):
            functional = Functional(tuple(tuple(int(x) for x in f) for f in seq))
        else:
            functional = Functional((tuple(int(x) for x in seq),))
    if len(functional.coords) != nu.n or any(len(f) != nu.dim for f in functional.coords):
        raise DimensionError("functional shape does not match coweight")
    total = Fraction(0)
    for f, v in zip(functional.coords, nu.factors):
        total += sum((Fraction(a) * b for a, b in zip(f, v)), Fraction(0))
    if functional.similitude:
        if nu.similitude is None:
            raise DimensionError("similitude weight given but coweight has no similitude")
        total += functional.similitude * nu.similitude
    return total


@dataclass(frozen=True)
class DominanceContext:
    family: str
    rank: int

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.rank < 1:
            raise ValueError("rank must be >= 1")

    @property
    def dim(self) -> int:
        return coord_dim(self.family, self.rank)

    @property
    def has_similitude(self) -> bool:
        return self.family == "GSp"


def _check_ctx(nu: RationalCoweight, ctx: DominanceContext) -> None:
    if nu.dim != ctx.dim:
        raise DimensionError(f"coweight has {nu.dim} coordinates, {ctx.family}{ctx.rank} needs {ctx.dim}")
    if (nu.similitude is not None) != ctx.has_similitude:
        raise DimensionError("similitude coordinate must be present exactly for GSp")


def dominantize_vector(v: Sequence[Fraction], family: str, centre: Fraction = Fraction(0)) -> Tuple[Fraction, ...]:
    """Chamber representative of a single factor's coordinates."""
    if family in ("A", "GL"):
        return tuple(sorted(v, reverse=True))
    if family in ("B", "C", "GSp"):
        return tuple(sorted((centre + abs(x - centre) for x in v), reverse=True))
    # D: signs may only change in pairs
    absv = sorted((abs(x) for x in v), reverse=True)
    negatives = sum(1 for x in v if x < 0)
    if negatives % 2 == 1 and absv[-1] != 0:
        absv[-1] = -absv[-1]
    return tuple(absv)


def dominantize(nu: RationalCoweight, ctx: DominanceContext) -> RationalCoweight:
    _check_ctx(nu, ctx)
    centre = nu.similitude / 2 if ctx.family == "GSp" else Fraction(0)
    return RationalCoweight(tuple(dominantize_vector(f, ctx.family, centre) for f in nu.factors),
                            nu.similitude)


def is_dominant(nu: RationalCoweight, ctx: DominanceContext) -> bool:
    return dominantize(nu, ctx) == nu


def _prefix(v: Sequence[Fraction]):
    acc = Fraction(0)
    out = []
    for x in v:
        acc += x
        out.append(acc)
    return out


def dominance_leq(lam: RationalCoweight, mu: RationalCoweight, ctx: DominanceContext) -> bool:
    """``lam <= mu`` in the dominance order (``mu - lam`` in the rational cone of
    positive coroots), factor by factor."""
    _check_same_shape(lam, mu)
    if not (is_dominant(lam, ctx) and is_dominant(mu, ctx)):
        raise PreconditionError("dominance_leq expects dominant inputs")
    if ctx.has_similitude and lam.similitude != mu.similitude:
        return False
    r = ctx.rank
    for a, b in zip(lam.factors, mu.factors):
        pa, pb = _prefix(a), _prefix(b)
        if ctx.family in ("A", "GL"):
            if pa[-1] != pb[-1] or any(x > y for x, y in zip(pa, pb)):
                return False
        elif ctx.family in ("B", "C", "GSp"):
            if any(x > y for x, y in zip(pa, pb)):
                return False
        else:
            if any(pa[k] > pb[k] for k in range(r - 2)):
                return False
            head_a = pa[r - 2] if r >= 2 else Fraction(0)
            head_b = pb[r - 2] if r >= 2 else Fraction(0)
            if head_a + a[-1] > head_b + b[-1] or head_a - a[-1] > head_b - b[-1]:
                return False
    return True


def orbit_average(mu: RationalCoweight, step: Callable[[RationalCoweight], RationalCoweight],
                  max_order: int = 10_000) -> Tuple[RationalCoweight, int]:
    """Return ``(-(1/d) * sum_{j<d} step^j(mu), d)`` with ``d`` the period of ``mu``.

    The minus sign is the inversion of the product of the orbit's cocharacters.
    """
    total = mu
    current = step(mu)
    d = 1
    while current != mu:
        total = total + current
        current = step(current)
        d += 1
        if d > max_order:
            raise NonPeriodicError(f"no return to the start within {max_order} steps")
    return total.scale(Fraction(-1, d)), d


def dominance_pairs_nonneg(nu: RationalCoweight, roots: Iterable[Functional]) -> bool:
    return all(pair(nu, a) >= 0 for a in roots)
