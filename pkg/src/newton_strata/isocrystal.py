"""Monomial sigma-linear operators and their Newton polygons.

An operator ``phi(e_i) = unit * p^{d(i)} * e_{perm(i)}`` splits into cycles of
``perm``; by Dieudonne-Manin a cycle of length ``L`` with exponent sum ``D`` is
isoclinic of slope ``D / L``.  Everything here is exact.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .coweights import PreconditionError


@dataclass(frozen=True)
class MonomialOperator:
    """``perm`` is 0-based: ``phi(e_i)`` is a multiple of ``e_{perm[i]}``."""

    perm: Tuple[int, ...]
    exponents: Tuple[int, ...]

    def __post_init__(self):
        perm = tuple(int(x) for x in self.perm)
        exps = tuple(int(x) for x in self.exponents)
        if len(perm) != len(exps):
            raise ValueError("permutation and exponent vector differ in length")
        if sorted(perm) != list(range(len(perm))):
            raise ValueError("perm is not a bijection of {0..m-1}")
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "exponents", exps)

    @property
    def size(self) -> int:
        return len(self.perm)

    @classmethod
    def from_one_based(cls, images: Sequence[int], exponents: Sequence[int]) -> "MonomialOperator":
        return cls(tuple(int(x) - 1 for x in images), tuple(exponents))

    def relabel(self, sigma: Sequence[int]) -> "MonomialOperator":
        """Conjugate by the basis relabelling ``i -> sigma[i]``."""
        m = self.size
        perm = [0] * m
        exps = [0] * m
        for i in range(m):
            perm[sigma[i]] = sigma[self.perm[i]]
            exps[sigma[i]] = self.exponents[i]
        return MonomialOperator(tuple(perm), tuple(exps))


@dataclass(frozen=True)
class NewtonPolygon:
    """Slopes strictly increasing, each with a positive multiplicity."""

    slopes: Tuple[Tuple[Fraction, int], ...]

    def __post_init__(self):
        sl = tuple((Fraction(g), int(m)) for g, m in self.slopes)
        if any(m <= 0 for _, m in sl):
            raise ValueError("multiplicities must be positive")
        if any(a[0] >= b[0] for a, b in zip(sl, sl[1:])):
            raise ValueError("slopes must be strictly increasing")
        object.__setattr__(self, "slopes", sl)

    @classmethod
    def from_multiset(cls, values: Iterable) -> "NewtonPolygon":
        c = Counter(Fraction(v) for v in values)
        return cls(tuple(sorted(c.items())))

    @property
    def height(self) -> int:
        return sum(m for _, m in self.slopes)

    @property
    def degree(self) -> Fraction:
        return sum((g * m for g, m in self.slopes), Fraction(0))

    def multiplicity(self, gamma) -> int:
        gamma = Fraction(gamma)
        return next((m for g, m in self.slopes if g == gamma), 0)

    def multiset(self) -> List[Fraction]:
        return [g for g, m in self.slopes for _ in range(m)]

    def vertices(self) -> List[Tuple[int, Fraction]]:
        x, y = 0, Fraction(0)
        out = [(0, Fraction(0))]
        for g, m in self.slopes:
            x += m
            y += g * m
            out.append((x, y))
        return out

    def __str__(self) -> str:
        return ";".join(f"{g}:{m}" for g, m in self.slopes)

    def vertex_string(self) -> str:
        return ";".join(f"{x}:{y}" for x, y in self.vertices())


@dataclass(frozen=True)
class SlopeDecomposition:
    parts: Tuple[Tuple[Fraction, Tuple[int, ...]], ...]

    def part(self, gamma) -> Tuple[int, ...]:
        gamma = Fraction(gamma)
        return next((idx for g, idx in self.parts if g == gamma), ())

    def upper(self, gamma) -> Tuple[int, ...]:
        """Indices of slope >= gamma (descending filtration)."""
        gamma = Fraction(gamma)
        return tuple(sorted(i for g, idx in self.parts if g >= gamma for i in idx))

    def lower(self, gamma) -> Tuple[int, ...]:
        """Indices of slope <= gamma (ascending filtration)."""
        gamma = Fraction(gamma)
        return tuple(sorted(i for g, idx in self.parts if g <= gamma for i in idx))

    @property
    def slopes(self) -> Tuple[Fraction, ...]:
        return tuple(g for g, _ in self.parts)

    def slope_of(self) -> Dict[int, Fraction]:
        return {i: g for g, idx in self.parts for i in idx}


@dataclass(frozen=True)
class PairingSpec:
    partner: Tuple[int, ...]
    similitude_slope: Fraction = Fraction(0)

    def __post_init__(self):
        p = tuple(int(x) for x in self.partner)
        if any(p[p[i]] != i for i in range(len(p))):
            raise ValueError("partner map is not an involution")
        object.__setattr__(self, "partner", p)
        object.__setattr__(self, "similitude_slope", Fraction(self.similitude_slope))


def cycles(op: MonomialOperator) -> List[Tuple[Tuple[int, ...], Fraction]]:
    seen = [False] * op.size
    out = []
    for start in range(op.size):
        if seen[start]:
            continue
        cyc = []
        i = start
        while not seen[i]:
            seen[i] = True
            cyc.append(i)
            i = op.perm[i]
        total = sum(op.exponents[j] for j in cyc)
        out.append((tuple(cyc), Fraction(total, len(cyc))))
    return out


def slope_polygon(op: MonomialOperator) -> NewtonPolygon:
    c = Counter()
    for cyc, g in cycles(op):
        c[g] += len(cyc)
    return NewtonPolygon(tuple(sorted(c.items())))


def slope_decomposition(op: MonomialOperator) -> SlopeDecomposition:
    parts: Dict[Fraction, List[int]] = {}
    for cyc, g in cycles(op):
        parts.setdefault(g, []).extend(cyc)
    return SlopeDecomposition(tuple((g, tuple(sorted(parts[g]))) for g in sorted(parts)))


def sharp_check(polygon: NewtonPolygon, r: int) -> bool:
    """Slopes in [0, 1], height 2r, degree r, and the gamma <-> 1 - gamma symmetry."""
    if polygon.height != 2 * r or polygon.degree != r:
        return False
    if any(g < 0 or g > 1 for g, _ in polygon.slopes):
        return False
    return all(polygon.multiplicity(1 - g) == m for g, m in polygon.slopes)


def integral_breakpoints(polygon: NewtonPolygon) -> bool:
    return all(y.denominator == 1 for _, y in polygon.vertices())


def enumerate_symmetric_polygons(r: int, max_r: int = 8) -> frozenset:
    """All symmetric polygons of height 2r with slopes in [0, 1] and integral
    breakpoints, by recursion over the slopes below 1/2."""
    if r < 1:
        raise ValueError("r must be >= 1")
    if r > max_r:
        raise ValueError(f"r={r} exceeds the enumeration bound {max_r}")
    lows = sorted({Fraction(a, b) for b in range(1, r + 1) for a in range(0, b + 1)
                   if Fraction(a, b) < Fraction(1, 2)})
    found = set()

    def rec(k: int, budget: int, chosen: List[Tuple[Fraction, int]]):
        if k == len(lows):
            slopes = list(chosen) + [(1 - g, m) for g, m in chosen]
            half = 2 * budget
            if half:
                slopes.append((Fraction(1, 2), half))
            found.add(NewtonPolygon(tuple(sorted(slopes))))
            return
        g = lows[k]
        b = g.denominator
        rec(k + 1, budget, chosen)
        mult = b
        while mult <= budget:
            rec(k + 1, budget - mult, chosen + [(g, mult)])
            mult += b

    rec(0, r, [])
    return frozenset(found)


@dataclass(frozen=True)
class ManinReport:
    r: int
    achieved: frozenset
    admissible: frozenset

    @property
    def equal(self) -> bool:
        return self.achieved == self.admissible


def manin_achievability(r: int, max_r: int = 6) -> ManinReport:
    """Compare Weyl-element polygons of Siegel ``GSp_{2r}`` with all admissible
    symmetric polygons."""
    from .rootdata import MinusculeSpec, enumerate_weyl, make_group_datum, weyl_to_monomial

    if r > max_r:
        raise ValueError(f"r={r} exceeds the configured bound {max_r}")
    datum = make_group_datum("GSp", r)
    mu = MinusculeSpec.siegel(datum)
    achieved = frozenset(slope_polygon(weyl_to_monomial(datum, w, mu)) for w in enumerate_weyl(datum))
    return ManinReport(r, achieved, enumerate_symmetric_polygons(r))


def integer_slope_witness(op: MonomialOperator) -> Optional[int]:
    ints = [g for g, _ in slope_polygon(op).slopes if g.denominator == 1]
    return int(ints[0]) if ints else None


def pairing_symmetry_check(op: MonomialOperator, pairing: PairingSpec) -> bool:
    """Multiplicity of gamma equals that of ``c - gamma``, and the involution
    carries the slope-gamma part onto the slope-(c - gamma) part."""
    p = pairing.partner
    if len(p) != op.size:
        raise PreconditionError("pairing size does not match operator")
    if any(op.perm[p[i]] != p[op.perm[i]] for i in range(op.size)):
        raise PreconditionError("operator does not map partner pairs to partner pairs")
    c = pairing.similitude_slope
    poly = slope_polygon(op)
    if any(poly.multiplicity(c - g) != m for g, m in poly.slopes):
        return False
    slope_of = slope_decomposition(op).slope_of()
    return all(slope_of[p[i]] == c - slope_of[i] for i in range(op.size))


def d_orbit_predicate(datum, w) -> bool:
    """Does the Frobenius orbit of ``e_1`` contain ``e_{2r-1}`` but not ``e_{2r}``?"""
    from .coweights import RationalCoweight
    from .rootdata import weyl_to_monomial

    if datum.family != "D":
        raise ValueError("the orbit predicate is defined for type D only")
    if datum.n != 1:
        raise ValueError("the orbit predicate is stated for a single factor")
    zero = RationalCoweight(((0,) * datum.dim,))
    op = weyl_to_monomial(datum, w, zero)
    orbit = {0}
    i = op.perm[0]
    while i != 0:
        orbit.add(i)
        i = op.perm[i]
    r = datum.rank
    return (2 * r - 2) in orbit and (2 * r - 1) not in orbit
