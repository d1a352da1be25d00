"""Classical group data, signed-permutation Weyl groups and monomial operators.

A :class:`GroupDatum` describes ``Res_{W(F_{p^n})/Z_p}`` of a split classical
group (optionally twisted by the diagram automorphism).  Frobenius moves factor
``s`` to factor ``s + 1`` and applies the diagram twist when wrapping from the
last factor back to the first.
"""
from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterator, List, Optional, Sequence, Tuple

from .coweights import (
    FAMILIES,
    DimensionError,
    DominanceContext,
    Functional,
    RationalCoweight,
    coord_dim,
    pair,
)
from .isocrystal import MonomialOperator

SignedPerm = Tuple[Tuple[int, ...], Tuple[int, ...]]


# ----------------------------------------------------------------------------
# group data


@dataclass(frozen=True)
class GroupDatum:
    family: str
    rank: int
    factors: int = 1
    twist: int = 1

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.rank < 1:
            raise ValueError("rank must be >= 1")
        if self.family == "D" and self.rank < 2:
            raise ValueError("type D needs rank >= 2")
        if self.factors < 1:
            raise ValueError("factors must be >= 1")
        if self.twist not in (1, 2):
            raise ValueError("twist must be 1 or 2")
        if self.twist == 2:
            if self.family == "A" and self.rank < 2:
                raise ValueError("A_1 has no non-trivial diagram automorphism")
            if self.family not in ("A", "D"):
                raise ValueError(f"twist 2 is only defined for types A and D, not {self.family}")

    @property
    def n(self) -> int:
        return self.factors

    @property
    def dim(self) -> int:
        """Torus coordinates per factor."""
        return coord_dim(self.family, self.rank)

    @property
    def std_dim(self) -> int:
        return {"A": self.rank + 1, "GL": self.rank, "B": 2 * self.rank + 1}.get(self.family, 2 * self.rank)

    @property
    def basis_size(self) -> int:
        """Per-factor size of the representation carrying the monomial operator.

        Twisted ``A`` uses the standard representation plus its dual so that the
        diagram twist permutes basis vectors.
        """
        if self.family == "A" and self.twist == 2:
            return 2 * self.std_dim
        return self.std_dim

    @property
    def has_similitude(self) -> bool:
        return self.family == "GSp"

    @property
    def ctx(self) -> DominanceContext:
        return DominanceContext(self.family, self.rank)

    @property
    def sign_mode(self) -> int:
        """0: no sign changes, 1: arbitrary sign changes, 2: even number of them."""
        if self.family in ("A", "GL"):
            return 0
        return 2 if self.family == "D" else 1

    @property
    def weyl_factor_order(self) -> int:
        m = self.dim
        return math.factorial(m) * sign_pattern_count(self.sign_mode, m)

    def label(self) -> str:
        tw = "" if self.twist == 1 else "^2"
        return f"{tw}{self.family}{self.rank}x{self.factors}"

    @cached_property
    def twist_perm(self) -> SignedPerm:
        m = self.dim
        if self.twist == 1:
            return identity_perm(m)
        if self.family == "A":
            return tuple(m - 1 - j for j in range(m)), (-1,) * m
        return tuple(range(m)), (1,) * (m - 1) + (-1,)


def make_group_datum(family: str, r: int, n: int = 1, twist: int = 1) -> GroupDatum:
    return GroupDatum(family, int(r), int(n), int(twist))


# ----------------------------------------------------------------------------
# signed permutations


def identity_perm(m: int) -> SignedPerm:
    return tuple(range(m)), (1,) * m


def compose(second: SignedPerm, first: SignedPerm) -> SignedPerm:
    """``second o first`` for the action ``y[perm[i]] = sign[i] * x[i]``."""
    p1, s1 = first
    p2, s2 = second
    return tuple(p2[p1[i]] for i in range(len(p1))), tuple(s1[i] * s2[p1[i]] for i in range(len(p1)))


def inverse(w: SignedPerm) -> SignedPerm:
    perm, signs = w
    inv = [0] * len(perm)
    isg = [1] * len(perm)
    for i, j in enumerate(perm):
        inv[j] = i
        isg[j] = signs[i]
    return tuple(inv), tuple(isg)


def apply_signed(w: SignedPerm, v: Sequence[Fraction], centre: Fraction = Fraction(0)) -> Tuple[Fraction, ...]:
    perm, signs = w
    out = [Fraction(0)] * len(v)
    for i, x in enumerate(v):
        out[perm[i]] = centre + signs[i] * (x - centre)
    return tuple(out)


def sign_pattern_count(mode: int, m: int) -> int:
    return (1, 2 ** m, 2 ** (m - 1))[mode]


def decode_perm(rank_index: int, m: int) -> Tuple[int, ...]:
    """Permutation with lexicographic rank ``rank_index`` (factorial base)."""
    pool = list(range(m))
    out = []
    for k in range(m, 0, -1):
        f = math.factorial(k - 1)
        d, rank_index = divmod(rank_index, f)
        out.append(pool.pop(d))
    return tuple(out)


def decode_signs(sign_index: int, m: int, mode: int) -> Tuple[int, ...]:
    if mode == 0:
        return (1,) * m
    if mode == 1:
        return tuple(-1 if (sign_index >> q) & 1 else 1 for q in range(m))
    head = [-1 if (sign_index >> q) & 1 else 1 for q in range(m - 1)]
    last = -1 if head.count(-1) % 2 else 1
    return tuple(head + [last])


def decode_factor_element(index: int, m: int, mode: int) -> SignedPerm:
    S = sign_pattern_count(mode, m)
    p, s = divmod(index, S)
    return decode_perm(p, m), decode_signs(s, m, mode)


@dataclass(frozen=True)
class WeylElement:
    """One signed permutation per factor (0-based internally)."""

    factors: Tuple[SignedPerm, ...]

    @classmethod
    def identity(cls, datum: GroupDatum) -> "WeylElement":
        return cls((identity_perm(datum.dim),) * datum.n)

    @classmethod
    def from_one_line(cls, *factors: Sequence[int]) -> "WeylElement":
        """Build from 1-based signed one-line notation, e.g. ``[-2, 1]``."""
        out = []
        for f in factors:
            perm = tuple(abs(x) - 1 for x in f)
            signs = tuple(1 if x > 0 else -1 for x in f)
            out.append((perm, signs))
        return cls(tuple(out))

    def one_line(self) -> str:
        return ";".join(":".join(str(s * (p + 1)) for p, s in zip(*f)) for f in self.factors)

    def validate(self, datum: GroupDatum) -> None:
        if len(self.factors) != datum.n:
            raise DimensionError(f"element has {len(self.factors)} factors, datum has {datum.n}")
        for perm, signs in self.factors:
            if len(perm) != datum.dim or sorted(perm) != list(range(datum.dim)):
                raise ValueError(f"not a permutation of {datum.dim} points: {perm}")
            if any(s not in (1, -1) for s in signs) or len(signs) != datum.dim:
                raise ValueError("signs must be +-1")
            if datum.sign_mode == 0 and any(s < 0 for s in signs):
                raise ValueError(f"type {datum.family} Weyl elements carry no sign changes")
            if datum.sign_mode == 2 and signs.count(-1) % 2:
                raise ValueError("type D Weyl elements need an even number of sign changes")


def simple_generators(datum: GroupDatum) -> List[SignedPerm]:
    m = datum.dim
    gens = []
    for i in range(m - 1):
        p = list(range(m))
        p[i], p[i + 1] = p[i + 1], p[i]
        gens.append((tuple(p), (1,) * m))
    if datum.sign_mode == 1:
        gens.append((tuple(range(m)), (1,) * (m - 1) + (-1,)))
    elif datum.sign_mode == 2:
        p = list(range(m))
        p[-2], p[-1] = p[-1], p[-2]
        gens.append((tuple(p), (1,) * (m - 2) + (-1, -1)))
    return gens


def _centre(datum: GroupDatum, nu: RationalCoweight) -> Fraction:
    return nu.similitude / 2 if datum.has_similitude else Fraction(0)


def factor_orbit(datum: GroupDatum, vec: Sequence[Fraction], centre: Fraction = Fraction(0)):
    """Orbit of one factor's coordinates under the one-factor Weyl group.

    Returns ``[(image, w)]`` with ``w . vec == image``, sorted by image
    (descending) for a deterministic order.
    """
    start = tuple(Fraction(x) for x in vec)
    seen = {start: identity_perm(datum.dim)}
    queue = deque([start])
    gens = simple_generators(datum)
    while queue:
        v = queue.popleft()
        for g in gens:
            u = apply_signed(g, v, centre)
            if u not in seen:
                seen[u] = compose(g, seen[v])
                queue.append(u)
    return sorted(seen.items(), key=lambda kv: kv[0], reverse=True)


def enumerate_weyl(datum: GroupDatum, composite: bool = False,
                   mu: Optional["MinusculeSpec"] = None) -> Iterator[WeylElement]:
    """Deterministic stream of Weyl elements.

    ``composite=False`` runs over all ``|W_1|^n`` elements.  ``composite=True``
    keeps a free element on factor 1 and the identity elsewhere; if ``mu`` is
    given, factors ``s >= 2`` on which ``mu`` is not Weyl-invariant instead run
    over representatives of ``W_1 / Stab(mu_s)``.  The reduced family meets
    every Newton point of the full group (gauge transformations by elements of
    ``prod_s Stab(mu_s)`` preserve Newton points).
    """
    choices = factor_choices(datum, composite, mu)
    radices = [c if isinstance(c, int) else len(c) for c in choices]
    total = math.prod(radices)
    for k in range(total):
        yield element_at(datum, choices, k)


def factor_choices(datum: GroupDatum, composite: bool, mu: Optional["MinusculeSpec"] = None):
    """Per factor either the int ``|W_1|`` (free) or an explicit list of signed
    permutations.

    With ``composite`` and ``mu`` the factors after the first run over coset
    representatives of ``W_1 / Stab(mu_s)``; the last one is cut down further
    to double cosets ``Stab(tau^-1 mu_1) \\ W_1 / Stab(mu_n)``, since the
    gauge on factor 1 is absorbed by the free first factor.
    """
    full = datum.weyl_factor_order
    if not composite:
        return [full] * datum.n
    out: list = [full]
    if datum.n == 1:
        return out
    if mu is None:
        return out + [[identity_perm(datum.dim)]] * (datum.n - 1)
    centre = mu.weights.similitude / 2 if datum.has_similitude else Fraction(0)
    for s in range(1, datum.n):
        orb = factor_orbit(datum, mu.weights.factors[s], centre)
        if s == datum.n - 1 and len(orb) > 1:
            head = apply_signed(inverse(datum.twist_perm), mu.weights.factors[0], centre)
            orb = _orbit_representatives(datum, orb, stabilizer_generators(datum, head, centre), centre)
        out.append([w for _, w in orb])
    return out


def stabilizer_generators(datum: GroupDatum, vec: Sequence[Fraction], centre: Fraction = Fraction(0)) -> List[SignedPerm]:
    """Reflections generating the stabilizer of ``vec`` in the one-factor Weyl group."""
    vec = tuple(Fraction(x) for x in vec)
    orb = factor_orbit(datum, vec, centre)
    dom = orb[0][0]
    # orb is rooted at vec; find u with u . dom == vec via the orbit of dom
    u = dict(factor_orbit(datum, dom, centre))[vec]
    u_inv = inverse(u)
    return [compose(u, compose(g, u_inv)) for g in simple_generators(datum)
            if apply_signed(g, dom, centre) == dom]


def _orbit_representatives(datum, orb, gens, centre):
    """One ``(image, w)`` per orbit of the group generated by ``gens`` on the images."""
    index = {img: w for img, w in orb}
    seen = set()
    reps = []
    for img, w in orb:
        if img in seen:
            continue
        reps.append((img, w))
        stack = [img]
        seen.add(img)
        while stack:
            v = stack.pop()
            for g in gens:
                u = apply_signed(g, v, centre)
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
    assert all(img in index for img in seen)
    return reps


def element_at(datum: GroupDatum, choices, k: int) -> WeylElement:
    facs = []
    for c in choices:
        if isinstance(c, int):
            k, d = divmod(k, c)
            facs.append(decode_factor_element(d, datum.dim, datum.sign_mode))
        else:
            k, d = divmod(k, len(c))
            facs.append(c[d])
    return WeylElement(tuple(facs))


def enumeration_size(datum: GroupDatum, composite: bool, mu: Optional["MinusculeSpec"] = None) -> int:
    return math.prod(c if isinstance(c, int) else len(c) for c in factor_choices(datum, composite, mu))


def act_on_coweight(datum: GroupDatum, w: WeylElement, nu: RationalCoweight) -> RationalCoweight:
    """One step of the ``w sigma`` action: signed permutation on each factor,
    shift ``s -> s+1`` and the diagram twist on wrap-around."""
    w.validate(datum)
    if nu.n != datum.n or nu.dim != datum.dim:
        raise DimensionError("coweight shape does not match datum")
    centre = _centre(datum, nu)
    out: List[Tuple[Fraction, ...]] = [()] * datum.n
    for s in range(datum.n):
        y = apply_signed(w.factors[s], nu.factors[s], centre)
        if s == datum.n - 1:
            y = apply_signed(datum.twist_perm, y, centre)
        out[(s + 1) % datum.n] = y
    return RationalCoweight(tuple(out), nu.similitude)


def frobenius_step(datum: GroupDatum, nu: RationalCoweight) -> RationalCoweight:
    """The Galois (shift-and-twist) action alone."""
    return act_on_coweight(datum, WeylElement.identity(datum), nu)


# ----------------------------------------------------------------------------
# Hodge cocharacters


@dataclass(frozen=True)
class MinusculeSpec:
    weights: RationalCoweight
    l: Optional[int] = None
    label: str = "weights"

    @classmethod
    def from_l(cls, datum: GroupDatum, l: int) -> "MinusculeSpec":
        if not 0 <= l <= datum.n:
            raise ValueError(f"l={l} needs 0 <= l <= factors={datum.n}: the cocharacter lives on l distinct factors")
        facs = []
        for s in range(datum.n):
            v = [0] * datum.dim
            if s < l:
                v[0] = 1
            facs.append(tuple(v))
        sim = 0 if datum.has_similitude else None
        return cls(RationalCoweight(tuple(facs), sim), l, f"l={l}")

    @classmethod
    def siegel(cls, datum: GroupDatum) -> "MinusculeSpec":
        if datum.family != "GSp":
            raise ValueError("the Siegel cocharacter is only defined for GSp")
        return cls(RationalCoweight(tuple((0,) * datum.dim for _ in range(datum.n)), -1), None, "siegel")

    @classmethod
    def from_weights(cls, datum: GroupDatum, factors: Sequence[Sequence[int]],
                     similitude: Optional[int] = None) -> "MinusculeSpec":
        spec = cls(RationalCoweight(tuple(tuple(f) for f in factors), similitude), None, "weights")
        spec.validate(datum)
        return spec

    def validate(self, datum: GroupDatum, shimura: bool = False) -> None:
        w = self.weights
        if w.n != datum.n or w.dim != datum.dim:
            raise DimensionError(f"weights have shape {w.n}x{w.dim}, datum needs {datum.n}x{datum.dim}")
        if (w.similitude is not None) != datum.has_similitude:
            raise DimensionError("similitude weight must be given exactly for GSp")
        if any(x.denominator != 1 for x in w.flat()) or (w.similitude is not None and w.similitude.denominator != 1):
            raise ValueError("cocharacter weights must be integers")
        if shimura and adjoint_depth(datum, self) > 1:
            raise ValueError("cocharacter is not minuscule (adjoint depth > 1)")

    def support(self, datum: GroupDatum) -> Tuple[int, ...]:
        """Factors on which the cocharacter is not Weyl-invariant."""
        centre = self.weights.similitude / 2 if datum.has_similitude else Fraction(0)
        if datum.family in ("A", "GL"):
            return tuple(s for s, f in enumerate(self.weights.factors) if len(set(f)) > 1)
        return tuple(s for s, f in enumerate(self.weights.factors) if any(x != centre for x in f))


def _as_coweight(mu) -> RationalCoweight:
    return mu.weights if isinstance(mu, MinusculeSpec) else mu


# ----------------------------------------------------------------------------
# roots and weights


def _factor_positive_roots(datum: GroupDatum) -> List[Tuple[Tuple[int, ...], int]]:
    m, fam = datum.dim, datum.family
    out = []

    def e(*pairs):
        v = [0] * m
        for i, c in pairs:
            v[i] += c
        return tuple(v)

    for i in range(m):
        for j in range(i + 1, m):
            out.append((e((i, 1), (j, -1)), 0))
    if fam in ("B", "C", "D"):
        for i in range(m):
            for j in range(i + 1, m):
                out.append((e((i, 1), (j, 1)), 0))
    if fam == "GSp":
        for i in range(m):
            for j in range(i + 1, m):
                out.append((e((i, 1), (j, 1)), -1))
    if fam == "B":
        out.extend((e((i, 1)), 0) for i in range(m))
    if fam == "C":
        out.extend((e((i, 2)), 0) for i in range(m))
    if fam == "GSp":
        out.extend((e((i, 2)), -1) for i in range(m))
    return out


def _factor_simple_roots(datum: GroupDatum) -> List[Tuple[Tuple[int, ...], int]]:
    m, fam = datum.dim, datum.family
    out = []
    for i in range(m - 1):
        v = [0] * m
        v[i], v[i + 1] = 1, -1
        out.append((tuple(v), 0))
    last = [0] * m
    if fam == "B":
        last[-1] = 1
        out.append((tuple(last), 0))
    elif fam in ("C", "GSp"):
        last[-1] = 2
        out.append((tuple(last), -1 if fam == "GSp" else 0))
    elif fam == "D":
        last[-1] = 1
        last[-2] = 1
        out.append((tuple(last), 0))
    return out


def _spread(datum: GroupDatum, local) -> List[Functional]:
    return [Functional.on_factor(datum.n, datum.dim, s, v, c) for s in range(datum.n) for v, c in local]


def positive_roots(datum: GroupDatum) -> List[Functional]:
    return _spread(datum, _factor_positive_roots(datum))


def simple_roots(datum: GroupDatum) -> List[Functional]:
    return _spread(datum, _factor_simple_roots(datum))


def all_roots(datum: GroupDatum) -> List[Functional]:
    pos = positive_roots(datum)
    return pos + [-a for a in pos]


def positive_coroots(datum: GroupDatum) -> List[Tuple[int, ...]]:
    """Positive coroots of one factor in torus coordinates (similitude part 0)."""
    m, fam = datum.dim, datum.family
    out = []
    for i in range(m):
        for j in range(i + 1, m):
            v = [0] * m
            v[i], v[j] = 1, -1
            out.append(tuple(v))
            if fam in ("B", "C", "D", "GSp"):
                v = [0] * m
                v[i], v[j] = 1, 1
                out.append(tuple(v))
    for i in range(m):
        v = [0] * m
        if fam == "B":
            v[i] = 2
        elif fam in ("C", "GSp"):
            v[i] = 1
        else:
            continue
        out.append(tuple(v))
    return out


def adjoint_depth(datum: GroupDatum, mu) -> int:
    """Largest ``|<mu, alpha>|`` over roots (0 for central ``mu``)."""
    nu = _as_coweight(mu)
    vals = [abs(pair(nu, a)) for a in positive_roots(datum)]
    best = max(vals, default=Fraction(0))
    if best.denominator != 1:
        raise ValueError("adjoint depth of a non-integral coweight")
    return int(best)


@dataclass(frozen=True)
class BasisVector:
    factor: int
    position: int
    weight: Functional
    partner: Optional[int]


def _local_weights(datum: GroupDatum) -> List[Tuple[Tuple[int, ...], int]]:
    m, r, fam = datum.dim, datum.rank, datum.family

    def unit(i, c=1):
        v = [0] * m
        v[i] = c
        return tuple(v)

    if fam in ("A", "GL"):
        out = [(unit(i), 0) for i in range(m)]
        if datum.twist == 2:
            out += [(unit(i, -1), 0) for i in range(m)]
        return out
    if fam in ("B", "D"):
        out = []
        for q in range(r):
            out += [(unit(q), 0), (unit(q, -1), 0)]
        if fam == "B":
            out.append(((0,) * m, 0))
        return out
    sim = 1 if fam == "GSp" else 0
    return [(unit(q), 0) for q in range(r)] + [(unit(q, -1), sim) for q in range(r)]


def _local_partner(datum: GroupDatum) -> List[Optional[int]]:
    m, r, fam = datum.dim, datum.rank, datum.family
    if fam in ("A", "GL"):
        if datum.twist == 2:
            return [i + m for i in range(m)] + list(range(m))
        return [None] * m
    if fam in ("B", "D"):
        out = []
        for q in range(r):
            out += [2 * q + 1, 2 * q]
        if fam == "B":
            out.append(2 * r)
        return out
    return [q + r for q in range(r)] + list(range(r))


def local_basis_image(datum: GroupDatum, w: SignedPerm) -> List[int]:
    """Where a per-factor signed permutation sends each local basis index."""
    perm, signs = w
    m, r, fam = datum.dim, datum.rank, datum.family
    if fam in ("A", "GL"):
        img = list(perm)
        if datum.twist == 2:
            img += [m + perm[i] for i in range(m)]
        return img
    if fam in ("B", "D"):
        img = []
        for q in range(r):
            a, b = 2 * perm[q], 2 * perm[q] + 1
            img += [a, b] if signs[q] > 0 else [b, a]
        if fam == "B":
            img.append(2 * r)
        return img
    img = [perm[q] if signs[q] > 0 else r + perm[q] for q in range(r)]
    img += [r + perm[q] if signs[q] > 0 else perm[q] for q in range(r)]
    return img


def local_twist_image(datum: GroupDatum) -> List[int]:
    size = datum.basis_size
    img = list(range(size))
    if datum.twist == 2:
        if datum.family == "A":
            m = datum.dim
            img = [m + (m - 1 - i) for i in range(m)] + [m - 1 - i for i in range(m)]
        else:
            img[size - 2], img[size - 1] = size - 1, size - 2
    return img


def basis_descriptor(datum: GroupDatum) -> List[BasisVector]:
    lw, lp, B = _local_weights(datum), _local_partner(datum), datum.basis_size
    out = []
    for s in range(datum.n):
        for i, (v, c) in enumerate(lw):
            f = Functional.on_factor(datum.n, datum.dim, s, v, c)
            out.append(BasisVector(s, i, f, None if lp[i] is None else s * B + lp[i]))
    return out


def standard_weights(datum: GroupDatum) -> List[Functional]:
    return [b.weight for b in basis_descriptor(datum)]


def weyl_to_monomial(datum: GroupDatum, w: WeylElement, mu) -> MonomialOperator:
    """Monomial form of ``n_w (1 (x) sigma) mu(1/p)`` on the ``n * basis_size`` basis.

    Exponents are ``d(e) = -<mu, weight(e)>``; signs of matrix entries are
    dropped.
    """
    w.validate(datum)
    nu = _as_coweight(mu)
    if nu.n != datum.n or nu.dim != datum.dim:
        raise DimensionError("cocharacter shape does not match datum")
    B = datum.basis_size
    twist = local_twist_image(datum)
    perm = [0] * (B * datum.n)
    for s in range(datum.n):
        img = local_basis_image(datum, w.factors[s])
        t = (s + 1) % datum.n
        for i in range(B):
            j = img[i]
            if s == datum.n - 1:
                j = twist[j]
            perm[s * B + i] = t * B + j
    exps = []
    for b in basis_descriptor(datum):
        d = -pair(nu, b.weight)
        exps.append(int(d))
    return MonomialOperator(tuple(perm), tuple(exps))


def pairing_involution(datum: GroupDatum) -> Optional[Tuple[int, ...]]:
    desc = basis_descriptor(datum)
    if any(b.partner is None for b in desc):
        return None
    return tuple(b.partner for b in desc)
