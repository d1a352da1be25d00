"""Named verification suites shared by the CLI and the acceptance tests."""
from __future__ import annotations

import itertools
import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence

from .coweights import dominance_leq
from .isocrystal import (
    MonomialOperator,
    NewtonPolygon,
    PairingSpec,
    cycles,
    enumerate_symmetric_polygons,
    integer_slope_witness,
    manin_achievability,
    pairing_symmetry_check,
    sharp_check,
    slope_polygon,
)
from .newton import (
    admissible_check,
    construct_basic_element,
    is_basic,
    minus_mu_bar,
    newton_point,
    newton_polygon_of,
    strata,
)
from .padic import make_split_problem, split_slopes, verify_conjugation
from .rootdata import (
    MinusculeSpec,
    WeylElement,
    decode_factor_element,
    enumerate_weyl,
    make_group_datum,
    pairing_involution,
    weyl_to_monomial,
)


@dataclass
class CheckReport:
    name: str
    passed: bool
    counters: Dict[str, int] = field(default_factory=dict)
    expected: object = None
    actual: object = None
    counterexample: Optional[str] = None
    wall_time: float = 0.0

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        counters = " ".join(f"{k}={v}" for k, v in sorted(self.counters.items()))
        line = f"{status} {self.name}: expected={self.expected} actual={self.actual} {counters}".rstrip()
        if self.counterexample:
            line += f" counterexample={self.counterexample}"
        return line


@dataclass
class CheckParams:
    max_rank: Optional[int] = None
    factors: Optional[Sequence[int]] = None
    samples: Optional[int] = None
    seed: int = 0
    threads: int = 1
    composite: bool = True


def p_count_l2(r: int) -> int:
    return r + (r - r // 2) * (r // 2 + 1)


# ----------------------------------------------------------------------------


def check_strata_l1(params: CheckParams) -> CheckReport:
    ranks = range(1, (params.max_rank or 8) + 1)
    factors = tuple(params.factors or (1, 2, 3))
    rep = CheckReport("strata-count-l1", True, {"cases": 0, "elements": 0})
    exp, act = [], []
    for r, n in itertools.product(ranks, factors):
        d = make_group_datum("B", r, n)
        res = strata(d, MinusculeSpec.from_l(d, 1), composite=params.composite, threads=params.threads)
        rep.counters["cases"] += 1
        rep.counters["elements"] += res.scanned
        exp.append(r + 1)
        act.append(res.count)
        if res.count != r + 1 and rep.passed:
            rep.passed = False
            rep.counterexample = f"B{r} n={n}: {res.count} strata"
    rep.expected, rep.actual = exp, act
    return rep


def check_strata_l2(params: CheckParams) -> CheckReport:
    ranks = range(2, (params.max_rank or 8) + 1)
    factors = tuple(params.factors or (2,))
    rep = CheckReport("strata-count-l2", True, {"cases": 0, "elements": 0})
    exp, act = [], []
    for r, n in itertools.product(ranks, factors):
        d = make_group_datum("B", r, n)
        exp.append(p_count_l2(r))
        try:
            mu = MinusculeSpec.from_l(d, 2)
        except ValueError as exc:
            act.append(None)
            rep.passed = False
            rep.counterexample = rep.counterexample or f"B{r} n={n}: {exc}"
            continue
        res = strata(d, mu, composite=params.composite, threads=params.threads)
        rep.counters["cases"] += 1
        rep.counters["elements"] += res.scanned
        act.append(res.count)
        if res.count != p_count_l2(r) and rep.passed:
            rep.passed = False
            rep.counterexample = f"B{r} n={n}: {res.count} strata"
    rep.expected, rep.actual = exp, act
    return rep


def check_integer_slope(params: CheckParams) -> CheckReport:
    exps = (0, 0, 2, 2)
    forbidden = NewtonPolygon.from_multiset([Fraction(1, 2)] * 2 + [Fraction(3, 2)] * 2)
    witnesses = 0
    bad = None
    perms = list(itertools.permutations(range(4)))
    for perm in perms:
        op = MonomialOperator(perm, exps)
        if integer_slope_witness(op) is not None:
            witnesses += 1
        elif bad is None:
            bad = f"perm={perm}"
        if slope_polygon(op) == forbidden and bad is None:
            bad = f"perm={perm} realizes {forbidden}"
    ok = witnesses == len(perms) and bad is None
    return CheckReport("integer-slope", ok, {"operators": len(perms)}, len(perms), witnesses, bad)


def check_manin(params: CheckParams) -> CheckReport:
    ranks = range(1, (params.max_rank or 4) + 1)
    rep = CheckReport("manin", True, {"elements": 0})
    exp, act = [], []
    for r in ranks:
        report = manin_achievability(r)
        rep.counters["elements"] += 2 ** r * math.factorial(r)
        exp.append(len(report.admissible))
        act.append(len(report.achieved))
        bad = next((p for p in report.achieved if not sharp_check(p, r)), None)
        if (not report.equal or bad is not None) and rep.passed:
            rep.passed = False
            rep.counterexample = f"r={r}: " + (f"{bad} fails the symmetry test" if bad else
                                               f"sets differ by {set(report.achieved) ^ set(report.admissible)}")
    rep.expected, rep.actual = exp, act
    return rep


def basic_cases(max_rank: Optional[int] = None):
    top = max_rank or 8
    for fam in ("A", "GL", "B", "C", "GSp"):
        for r in range(1, top + 1):
            yield make_group_datum(fam, r)
    for r in range(2, min(top, 6) + 1):
        for tw in (1, 2):
            yield make_group_datum("D", r, 1, tw)
    for r in range(2, min(top, 8) + 1):
        yield make_group_datum("A", r, 1, 2)


def check_basic(params: CheckParams) -> CheckReport:
    rep = CheckReport("basic-elements", True, {"groups": 0})
    for d in basic_cases(params.max_rank):
        w = construct_basic_element(d)
        rep.counters["groups"] += 1
        mu = MinusculeSpec.siegel(d) if d.family == "GSp" else MinusculeSpec.from_l(d, 1)
        if not is_basic(d, mu, w) and rep.passed:
            rep.passed = False
            rep.counterexample = f"{d.label()} w={w.one_line()} nu={newton_point(d, mu, w)}"
    rep.expected = rep.actual = rep.counters["groups"] if rep.passed else None
    return rep


def check_admissibility(params: CheckParams) -> CheckReport:
    top = params.max_rank or 6
    factors = tuple(params.factors or (1, 2))
    rep = CheckReport("admissibility", True, {"elements": 0, "cases": 0})
    for r, n in itertools.product(range(1, top + 1), factors):
        d = make_group_datum("B", r, n)
        for l in (1, 2):
            if l > n:
                continue
            mu = MinusculeSpec.from_l(d, l)
            bound = minus_mu_bar(d, mu)
            res = strata(d, mu, composite=params.composite, threads=params.threads)
            rep.counters["cases"] += 1
            rep.counters["elements"] += res.scanned
            bad = next((s for s in res if not dominance_leq(s.nu, bound, d.ctx)), None)
            ident = newton_point(d, mu, WeylElement.identity(d))
            if bad is not None and rep.passed:
                rep.passed = False
                rep.counterexample = f"B{r} n={n} l={l} w={bad.representative.one_line()} nu={bad.nu} bound={bound}"
            if n == 1 and ident != bound and rep.passed:
                rep.passed = False
                rep.counterexample = f"B{r} n=1 l={l}: nu(1)={ident} differs from {bound}"
    rep.expected = rep.actual = "nu(w) <= -mu_bar" if rep.passed else None
    return rep


def random_sample(rng: random.Random):
    """A seed-determined ``(datum, mu, w)`` across all families and twists."""
    while True:
        fam = rng.choice(("A", "GL", "B", "C", "D", "GSp"))
        r = rng.randint(1, 5)
        n = rng.randint(1, 3)
        tw = rng.choice((1, 1, 2))
        try:
            d = make_group_datum(fam, r, n, tw)
        except ValueError:
            continue
        break
    kind = rng.random()
    if fam == "GSp" and kind < 0.5:
        mu = MinusculeSpec.siegel(d)
    elif kind < 0.8:
        mu = MinusculeSpec.from_l(d, rng.randint(0, n))
    else:
        ws = [[rng.randint(-2, 2) for _ in range(d.dim)] for _ in range(n)]
        mu = MinusculeSpec.from_weights(d, ws, rng.randint(-2, 2) if d.has_similitude else None)
    w = WeylElement(tuple(decode_factor_element(rng.randrange(d.weyl_factor_order), d.dim, d.sign_mode)
                          for _ in range(n)))
    return d, mu, w


def check_dual_oracle(params: CheckParams) -> CheckReport:
    rng = random.Random(params.seed)
    total = params.samples or 1000
    rep = CheckReport("dual-oracle", True, {"samples": total})
    for _ in range(total):
        d, mu, w = random_sample(rng)
        a = newton_polygon_of(d, mu, w)
        b = slope_polygon(weyl_to_monomial(d, w, mu))
        if a != b:
            rep.passed = False
            rep.counterexample = f"{d.label()} mu={mu.weights} w={w.one_line()}: {a} vs {b}"
            break
    rep.expected = rep.actual = total if rep.passed else None
    return rep


def check_pairing(params: CheckParams) -> CheckReport:
    top = params.max_rank or 4
    rep = CheckReport("pairing-symmetry", True, {"operators": 0})
    for fam, c in (("B", 0), ("GSp", 1)):
        for r in range(1, top + 1):
            d = make_group_datum(fam, r)
            mu = MinusculeSpec.siegel(d) if fam == "GSp" else MinusculeSpec.from_l(d, 1)
            spec = PairingSpec(pairing_involution(d), Fraction(c))
            for w in enumerate_weyl(d):
                rep.counters["operators"] += 1
                if not pairing_symmetry_check(weyl_to_monomial(d, w, mu), spec):
                    rep.passed = False
                    rep.counterexample = f"{d.label()} w={w.one_line()}"
                    return rep
    rep.expected = rep.actual = rep.counters["operators"]
    return rep


def random_split_problem(p: int, N: int, rng: random.Random):
    """Block-diagonal ``phi`` with isoclinic blocks of integral slopes and a
    random unipotent ``u`` on the positive-slope blocks."""
    nb = rng.randint(2, 3)
    blocks = [rng.randint(1, 2) for _ in range(nb)]
    slopes = sorted(rng.randint(0, 3) for _ in range(nb))
    size = sum(blocks)
    owner = [a for a, b in enumerate(blocks) for _ in range(b)]
    phi = [[0] * size for _ in range(size)]
    u = [[int(i == j) for j in range(size)] for i in range(size)]
    units = [x for x in range(1, p * p) if x % p]
    for a in range(nb):
        idx = [i for i in range(size) if owner[i] == a]
        img = idx[:]
        rng.shuffle(img)
        for i, j in zip(idx, img):
            phi[j][i] = p ** slopes[a] * rng.choice(units)
    for i in range(size):
        for j in range(size):
            if slopes[owner[i]] > slopes[owner[j]]:
                u[i][j] = rng.randrange(p ** N)
    return make_split_problem(p, N, blocks, slopes, phi, u), (blocks, slopes, phi, u)


def check_splitting(params: CheckParams) -> CheckReport:
    rng = random.Random(params.seed)
    per_prime = params.samples or 100
    rep = CheckReport("splitting", True, {"problems": 0})
    prob = make_split_problem(5, 3, [1, 1], [0, 1], [[1, 0], [0, 5]], [[1, 0], [1, 1]])
    h = split_slopes(prob, 3)
    entry = h[1, 0].residue(3)
    if entry != 94:
        rep.passed = False
        rep.counterexample = f"2x2 entry {entry} != 94"
    worst = 20
    for p in (2, 3, 5):
        for _ in range(per_prime):
            P, (blocks, slopes, phi, u) = random_split_problem(p, 20, rng)
            h = split_slopes(P, 20)
            v = verify_conjugation(h, P.u, P.phi, 20)
            worst = min(worst, v)
            low = [[x % p ** 10 if P.relative_slope(i, j) > 0 else x for j, x in enumerate(row)]
                   for i, row in enumerate(u)]
            h10 = split_slopes(make_split_problem(p, 10, blocks, slopes, phi, low), 10)
            same = all(a.congruent(b, 10) for ra, rb in zip(h.rows, h10.rows) for a, b in zip(ra, rb))
            rep.counters["problems"] += 1
            if (v < 20 or not same) and rep.passed:
                rep.passed = False
                rep.counterexample = f"p={p} blocks={blocks} slopes={slopes} valuation={v} congruent={same}"
    rep.expected, rep.actual = (94, 20), (entry, worst)
    return rep


def random_operator(rng: random.Random, max_size: int = 12) -> MonomialOperator:
    m = rng.randint(1, max_size)
    perm = list(range(m))
    rng.shuffle(perm)
    return MonomialOperator(tuple(perm), tuple(rng.randint(-5, 5) for _ in range(m)))


def check_operator_invariants(params: CheckParams) -> CheckReport:
    rng = random.Random(params.seed)
    total = params.samples or 10_000
    rep = CheckReport("operator-invariants", True, {"operators": total})
    for _ in range(total):
        op = random_operator(rng)
        cyc = cycles(op)
        deg = sum(g * len(c) for c, g in cyc)
        integral = all((g * len(c)).denominator == 1 for c, g in cyc)
        if deg != sum(op.exponents) or not integral or slope_polygon(op).degree != sum(op.exponents):
            rep.passed = False
            rep.counterexample = f"perm={op.perm} exps={op.exponents}"
            break
    rep.expected = rep.actual = total if rep.passed else None
    return rep


CHECKS: Dict[str, Callable[[CheckParams], CheckReport]] = {
    "strata-count-l1": check_strata_l1,
    "strata-count-l2": check_strata_l2,
    "integer-slope": check_integer_slope,
    "manin": check_manin,
    "basic-elements": check_basic,
    "admissibility": check_admissibility,
    "dual-oracle": check_dual_oracle,
    "pairing-symmetry": check_pairing,
    "splitting": check_splitting,
    "operator-invariants": check_operator_invariants,
}

def resolve(name: str) -> str:
    if name not in CHECKS:
        raise KeyError(name)
    return name


def run_check(name: str, params: Optional[CheckParams] = None) -> CheckReport:
    key = resolve(name)
    start = time.perf_counter()
    rep = CHECKS[key](params or CheckParams())
    rep.wall_time = time.perf_counter() - start
    return rep
