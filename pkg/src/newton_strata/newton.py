"""Newton points of Weyl elements, strata, basic elements, Kottwitz classes and
Mazur-type admissibility.

For ``w`` in the Weyl group, ``nu(w)`` is the dominant representative of
``-(1/d) * sum_j (w sigma)^j(mu)``, the averaged inverse of the cocharacters
along the orbit of ``mu``.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import _kernels
from .coweights import (
    RationalCoweight,
    dominance_leq,
    dominantize,
    orbit_average,
    pair,
)
from .isocrystal import NewtonPolygon
from .rootdata import (
    GroupDatum,
    MinusculeSpec,
    WeylElement,
    act_on_coweight,
    all_roots,
    element_at,
    enumerate_weyl,
    factor_choices,
    frobenius_step,
    identity_perm,
    positive_coroots,
    positive_roots,
    simple_roots,
    standard_weights,
)
from .snf import row_times, smith_normal_form

DEFAULT_MAX_ELEMENTS = 500_000_000


class ResourceBoundError(RuntimeError):
    """An enumeration would exceed the configured element budget."""


class InternalConsistencyError(RuntimeError):
    """Two independent computations disagreed."""


def max_elements() -> int:
    raw = os.environ.get("NEWTON_STRATA_MAX_ELEMENTS", "").strip()
    return int(raw) if raw else DEFAULT_MAX_ELEMENTS


MuLike = Union[MinusculeSpec, RationalCoweight]


def _weights(mu: MuLike) -> RationalCoweight:
    return mu.weights if isinstance(mu, MinusculeSpec) else mu


def _spec(mu: MuLike) -> MinusculeSpec:
    return mu if isinstance(mu, MinusculeSpec) else MinusculeSpec(mu)


# ----------------------------------------------------------------------------
# single elements


def newton_point(datum: GroupDatum, mu: MuLike, w: WeylElement) -> RationalCoweight:
    avg, _ = orbit_average(_weights(mu), lambda v: act_on_coweight(datum, w, v),
                           max_order=2 * datum.n * math.factorial(datum.dim) * 2 ** datum.dim)
    return dominantize(avg, datum.ctx)


def polygon_of_point(datum: GroupDatum, nu: RationalCoweight) -> NewtonPolygon:
    return NewtonPolygon.from_multiset(pair(nu, chi) for chi in standard_weights(datum))


def newton_polygon_of(datum: GroupDatum, mu: MuLike, w: WeylElement) -> NewtonPolygon:
    return polygon_of_point(datum, newton_point(datum, mu, w))


def point_is_basic(datum: GroupDatum, nu: RationalCoweight) -> bool:
    return all(pair(nu, a) == 0 for a in positive_roots(datum))


def is_basic(datum: GroupDatum, mu: MuLike, w: WeylElement) -> bool:
    return point_is_basic(datum, newton_point(datum, mu, w))


def _signed_cycles_negative(datum: GroupDatum, w: WeylElement) -> bool:
    """Every cycle of the full ``w sigma`` signed permutation has sign product -1,
    i.e. the action has no non-zero fixed vector."""
    m, n = datum.dim, datum.n
    tperm, tsign = datum.twist_perm
    T, S = [0] * (n * m), [1] * (n * m)
    for s in range(n):
        perm, signs = w.factors[s]
        for i in range(m):
            j, sg = perm[i], signs[i]
            if s == n - 1:
                sg *= tsign[j]
                j = tperm[j]
            T[s * m + i] = ((s + 1) % n) * m + j
            S[s * m + i] = sg
    seen = [False] * (n * m)
    for i0 in range(n * m):
        if seen[i0]:
            continue
        c, i = 1, i0
        while not seen[i]:
            seen[i] = True
            c *= S[i]
            i = T[i]
        if c > 0:
            return False
    return True


def construct_basic_element(datum: GroupDatum, mu: Optional[MuLike] = None) -> WeylElement:
    """A Weyl element whose Newton point is central.

    Sign-changing types use ``-1`` on the first factor; ``A``/``GL`` use the
    full cycle (twisted ``A`` uses the longest element, which composes with the
    twist to ``-1``).  Remaining ``D`` cases search the composite enumeration
    for the first element acting without fixed vectors.
    """
    m, fam = datum.dim, datum.family
    rest = (identity_perm(m),) * (datum.n - 1)
    if fam in ("B", "C", "GSp") or (fam == "D" and datum.twist == 1 and datum.rank % 2 == 0):
        w = WeylElement(((tuple(range(m)), (-1,) * m),) + rest)
    elif fam in ("A", "GL") and datum.twist == 1:
        w = WeylElement(((tuple((i + 1) % m for i in range(m)), (1,) * m),) + rest)
    elif fam == "A":
        w = WeylElement(((tuple(m - 1 - i for i in range(m)), (1,) * m),) + rest)
    else:
        w = next((v for v in enumerate_weyl(datum, composite=True) if _signed_cycles_negative(datum, v)), None)
        if w is None:
            raise InternalConsistencyError(f"no elliptic element found for {datum.label()}")
    check = mu if mu is not None else MinusculeSpec.from_l(datum, 1)
    if not is_basic(datum, check, w):
        raise InternalConsistencyError(f"constructed element {w.one_line()} is not basic for {datum.label()}")
    return w


# ----------------------------------------------------------------------------
# strata


@dataclass(frozen=True)
class NewtonStratum:
    nu: RationalCoweight
    polygon: NewtonPolygon
    representative: WeylElement
    count: int


@dataclass(frozen=True)
class StrataResult:
    strata: Tuple[NewtonStratum, ...]
    scanned: int

    @property
    def count(self) -> int:
        return len(self.strata)

    def __iter__(self):
        return iter(self.strata)

    def __len__(self):
        return len(self.strata)


def _nu_key(nu: RationalCoweight):
    return (nu.flat(), nu.similitude)


def _kernel_problem(datum: GroupDatum, mu: RationalCoweight, choices) -> _kernels.KernelProblem:
    n, m = datum.n, datum.dim
    if datum.has_similitude:
        scaled = [2 * x - mu.similitude for x in mu.flat()]
    else:
        scaled = list(mu.flat())
    if any(Fraction(x).denominator != 1 for x in scaled):
        raise ValueError("the batch kernel needs integral cocharacters")
    mu_arr = np.array([int(x) for x in scaled], dtype=np.int64)
    radix = np.array([c if isinstance(c, int) else len(c) for c in choices], dtype=np.int64)
    full = np.array([isinstance(c, int) for c in choices], dtype=np.bool_)
    T = max([1] + [len(c) for c in choices if not isinstance(c, int)])
    tp = np.zeros((n, T, m), dtype=np.int64)
    ts = np.ones((n, T, m), dtype=np.int64)
    for s, c in enumerate(choices):
        if isinstance(c, int):
            continue
        for k, (perm, signs) in enumerate(c):
            tp[s, k] = perm
            ts[s, k] = signs
    twp, tws = datum.twist_perm
    sort_mode = {"A": 0, "GL": 0, "B": 1, "C": 1, "GSp": 1, "D": 2}[datum.family]
    den_max, offset, bits, per_word, words = _kernels.make_codec(n, m, mu_arr)
    return _kernels.KernelProblem(
        n=n, m=m, sort_mode=sort_mode, sign_mode=datum.sign_mode, radix=radix, full=full,
        table_perm=tp, table_sign=ts, twist_perm=np.array(twp, dtype=np.int64),
        twist_sign=np.array(tws, dtype=np.int64), mu=mu_arr, den_max=den_max, offset=offset,
        bits=bits, per_word=per_word, words=words)


def _decode_key(datum: GroupDatum, prob, key, mu: RationalCoweight) -> RationalCoweight:
    vals = [Fraction(a, b) for a, b in _kernels.unpack(prob, key)]
    m = datum.dim
    if datum.has_similitude:
        c = -mu.similitude
        vals = [(v + c) / 2 for v in vals]
        return RationalCoweight(tuple(tuple(vals[s * m:(s + 1) * m]) for s in range(datum.n)), c)
    return RationalCoweight(tuple(tuple(vals[s * m:(s + 1) * m]) for s in range(datum.n)))


def strata(datum: GroupDatum, mu: MuLike, composite: bool = True, backend: Optional[str] = None,
           threads: int = 1, verify: bool = True) -> StrataResult:
    """Distinct Newton points over the (composite or full) Weyl enumeration.

    ``backend`` is ``"numba"``, ``"numpy"`` or ``"python"`` (exact reference
    loop); the default follows ``NEWTON_STRATA_NO_NUMBA``.  Strata are sorted
    lexicographically by ``nu``.
    """
    spec = _spec(mu)
    spec.validate(datum)
    weights = spec.weights
    choices = factor_choices(datum, composite, spec)
    total = math.prod(c if isinstance(c, int) else len(c) for c in choices)
    cap = max_elements()
    if total > cap:
        raise ResourceBoundError(f"{datum.label()}: {total} elements exceed the cap {cap} "
                                 "(set NEWTON_STRATA_MAX_ELEMENTS to raise it)")
    backend = backend or _kernels.default_backend()
    if backend == "python":
        found: Dict = {}
        for k in range(total):
            w = element_at(datum, choices, k)
            nu = newton_point(datum, weights, w)
            key = _nu_key(nu)
            if key in found:
                found[key][1] += 1
            else:
                found[key] = [nu, 1, w]
        rows = [(nu, cnt, w) for nu, cnt, w in found.values()]
    else:
        prob = _kernel_problem(datum, weights, choices)
        raw = _kernels.run(prob, backend=backend, threads=threads)
        rows = []
        for key, (cnt, first) in raw.items():
            nu = _decode_key(datum, prob, key, weights)
            w = element_at(datum, choices, first)
            if verify and newton_point(datum, weights, w) != nu:
                raise InternalConsistencyError(f"kernel and exact Newton point disagree at {w.one_line()}")
            rows.append((nu, cnt, w))
    rows.sort(key=lambda t: _nu_key(t[0]))
    out = tuple(NewtonStratum(nu, polygon_of_point(datum, nu), w, cnt) for nu, cnt, w in rows)
    if sum(s.count for s in out) != total:
        raise InternalConsistencyError("stratum counts do not add up to the enumeration size")
    return StrataResult(out, total)


# ----------------------------------------------------------------------------
# Kottwitz class and admissibility


@dataclass(frozen=True)
class KottwitzClass:
    """Coordinates in ``Z/d_1 + ... + Z/d_t + Z^f`` for a fixed Smith basis."""

    torsion: Tuple[Tuple[int, int], ...]   # (value mod d, d)
    free: Tuple[int, ...]

    def is_identity(self) -> bool:
        return all(v == 0 for v, _ in self.torsion) and all(v == 0 for v in self.free)

    def __str__(self) -> str:
        tor = ",".join(f"{v}mod{d}" for v, d in self.torsion)
        return f"[{tor}|{','.join(map(str, self.free))}]"


def _lattice_vec(datum: GroupDatum, nu: RationalCoweight) -> List:
    v = list(nu.flat())
    if datum.has_similitude:
        v.append(nu.similitude)
    return v


def _from_lattice(datum: GroupDatum, v: Sequence) -> RationalCoweight:
    m = datum.dim
    facs = tuple(tuple(v[s * m:(s + 1) * m]) for s in range(datum.n))
    return RationalCoweight(facs, v[-1] if datum.has_similitude else None)


def _kottwitz_basis(datum: GroupDatum):
    """Smith data of the relations: coroots of every factor and ``x - sigma x``."""
    size = datum.n * datum.dim + (1 if datum.has_similitude else 0)
    rows = []
    for s in range(datum.n):
        for cv in positive_coroots(datum):
            row = [0] * size
            row[s * datum.dim:(s + 1) * datum.dim] = cv
            rows.append(row)
    for j in range(size):
        e = [0] * size
        e[j] = 1
        img = _lattice_vec(datum, frobenius_step(datum, _from_lattice(datum, e)))
        rows.append([int(a - b) for a, b in zip(e, img)])
    diag, V = smith_normal_form(rows, size)
    return diag, V, size


def _classify(datum: GroupDatum, vec: Sequence) -> Tuple[List, List]:
    diag, V, size = _kottwitz_basis(datum)
    y = row_times(vec, V)
    rank = len(diag)
    torsion = [(y[i], diag[i]) for i in range(rank) if diag[i] > 1]
    free = [y[i] for i in range(rank, size)]
    return torsion, free


def kottwitz_class(datum: GroupDatum, mu: MuLike) -> KottwitzClass:
    """Class of ``mu(1/p)``, i.e. the image of ``-mu``, in the Frobenius
    coinvariants of ``X_*(T) / (coroot lattice)``."""
    vec = [-x for x in _lattice_vec(datum, _weights(mu))]
    torsion, free = _classify(datum, vec)
    return KottwitzClass(tuple((int(v) % d, d) for v, d in torsion), tuple(int(v) for v in free))


def kottwitz_free_part(datum: GroupDatum, nu: RationalCoweight) -> Tuple[Fraction, ...]:
    """Image of a rational coweight in the free part, ``pi_1 (x) Q``."""
    _, free = _classify(datum, _lattice_vec(datum, nu))
    return tuple(Fraction(v) for v in free)


def minus_mu_bar(datum: GroupDatum, mu: MuLike) -> RationalCoweight:
    avg, _ = orbit_average(_weights(mu), lambda v: frobenius_step(datum, v), max_order=4 * datum.n)
    return dominantize(avg, datum.ctx)


def admissible_check(datum: GroupDatum, mu: MuLike, w: WeylElement) -> bool:
    return dominance_leq(newton_point(datum, mu, w), minus_mu_bar(datum, mu), datum.ctx)


# ----------------------------------------------------------------------------
# parabolic profile


@dataclass(frozen=True)
class ParabolicProfile:
    positive: Tuple
    zero: Tuple
    negative: Tuple
    levi_simple: Tuple

    @property
    def p_plus(self) -> Tuple:
        return self.positive + self.zero

    @property
    def p_minus(self) -> Tuple:
        return self.negative + self.zero


def parabolic_profile(datum: GroupDatum, mu: MuLike, w: WeylElement) -> ParabolicProfile:
    nu = newton_point(datum, mu, w)
    pos, zero, neg = [], [], []
    for a in all_roots(datum):
        v = pair(nu, a)
        (pos if v > 0 else neg if v < 0 else zero).append(a)
    levi = tuple(a for a in simple_roots(datum) if pair(nu, a) == 0)
    return ParabolicProfile(tuple(pos), tuple(zero), tuple(neg), levi)
