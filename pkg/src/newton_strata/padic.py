"""Finite-precision p-adic numbers and matrices, and the slope-splitting iteration.

A :class:`PadicApprox` stands for ``p^val * unit`` known modulo
``p^(val + prec)``.  Products keep the smaller relative precision, sums the
smaller absolute precision, so no operation claims more than its inputs
justify.  A zero is ``unit == 0`` with ``val`` its absolute precision; exact
zeros (structural entries) use ``val == EXACT``.

The splitting solves ``h u phi h^-1 = phi`` for ``u`` unipotent with support
on strictly positive relative slopes.  Writing ``h = 1 + X`` and
``u = 1 + N``, the lowest slope stratum satisfies ``X - Ad(phi) X = -N``,
solved by ``X = -sum_j Ad(phi)^j N``; ``u`` is then recomputed and the next
stratum treated.  Coefficients are fixed by Frobenius, so ``Ad(phi)`` is plain
conjugation.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from .coweights import PreconditionError

EXACT = 1 << 40


class PadicError(ArithmeticError):
    pass


class PrecisionError(PadicError):
    """Not enough precision left to decide a valuation."""


class DivergenceError(PadicError):
    """A series failed to gain valuation at the rate its slopes promise."""


def valuation_of(p: int, x: Fraction) -> int:
    x = Fraction(x)
    if x == 0:
        raise ValueError("valuation of 0")
    v = 0
    a, b = x.numerator, x.denominator
    while a % p == 0:
        a //= p
        v += 1
    while b % p == 0:
        b //= p
        v -= 1
    return v


def parse_rational(p: int, text: Union[str, int, Fraction]) -> Fraction:
    """Integers, fractions ``a/b`` or ``q^v*u`` (``q`` is ``p`` or the literal prime)."""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    s = str(text).replace(" ", "")
    m = re.fullmatch(r"(p|\d+)\^(-?\d+)(?:\*(-?\d+(?:/\d+)?))?", s)
    if m:
        base = p if m.group(1) == "p" else int(m.group(1))
        if base != p:
            raise ValueError(f"entry {text!r} uses prime {base}, expected {p}")
        u = Fraction(m.group(3)) if m.group(3) else Fraction(1)
        return Fraction(p) ** int(m.group(2)) * u
    try:
        return Fraction(s)
    except ValueError as exc:
        raise ValueError(f"cannot parse p-adic entry {text!r}") from exc


@dataclass(frozen=True)
class PadicApprox:
    p: int
    unit: int
    val: int
    prec: int

    @classmethod
    def zero(cls, p: int, absprec: int = EXACT) -> "PadicApprox":
        return cls(p, 0, absprec, 0)

    @classmethod
    def from_rational(cls, p: int, x, absprec: int) -> "PadicApprox":
        """Reduce the rational ``x`` to absolute precision ``absprec``."""
        if p < 2:
            raise ValueError("p must be >= 2")
        x = Fraction(x)
        if absprec >= EXACT // 2:
            if x != 0:
                raise PrecisionError("only zero can be exact")
            return cls.zero(p)
        if x == 0:
            return cls.zero(p, absprec)
        v = valuation_of(p, x)
        if v >= absprec:
            return cls.zero(p, absprec)
        rel = absprec - v
        mod = p ** rel
        y = x / Fraction(p) ** v
        unit = y.numerator * pow(y.denominator, -1, mod) % mod
        return cls(p, unit, v, rel)

    @classmethod
    def with_relprec(cls, p: int, x, relprec: int) -> "PadicApprox":
        x = Fraction(x)
        if x == 0:
            return cls.zero(p)
        return cls.from_rational(p, x, valuation_of(p, x) + relprec)

    @classmethod
    def parse(cls, p: int, text: Union[str, int], absprec: int) -> "PadicApprox":
        return cls.from_rational(p, parse_rational(p, text), absprec)

    @property
    def is_zero(self) -> bool:
        return self.unit == 0

    @property
    def is_exact(self) -> bool:
        return self.unit == 0 and self.val >= EXACT // 2

    @property
    def absprec(self) -> int:
        return self.val + self.prec

    @property
    def valuation(self) -> int:
        """Valuation (for a zero: the absolute precision, a lower bound)."""
        return self.val

    def rational(self) -> Fraction:
        if self.unit == 0:
            return Fraction(0)
        return Fraction(self.p) ** self.val * self.unit

    def _check(self, other: "PadicApprox") -> None:
        if self.p != other.p:
            raise ValueError(f"prime mismatch: {self.p} vs {other.p}")

    def __add__(self, other: "PadicApprox") -> "PadicApprox":
        self._check(other)
        A = min(self.absprec, other.absprec)
        if A >= EXACT // 2:
            return PadicApprox.zero(self.p)
        if self.unit == 0 or other.unit == 0:
            x = other if self.unit == 0 else self
            return x if x.absprec == A else _normalized(self.p, x.unit, x.val, A)
        v = min(self.val, other.val)
        total = self.unit * self.p ** (self.val - v) + other.unit * self.p ** (other.val - v)
        return _normalized(self.p, total, v, A)

    def __neg__(self) -> "PadicApprox":
        if self.unit == 0:
            return self
        return PadicApprox(self.p, (-self.unit) % self.p ** self.prec, self.val, self.prec)

    def __sub__(self, other: "PadicApprox") -> "PadicApprox":
        return self + (-other)

    def __mul__(self, other: "PadicApprox") -> "PadicApprox":
        self._check(other)
        A = min(self.absprec + other.val, other.absprec + self.val)
        if A >= EXACT // 2:
            return PadicApprox.zero(self.p)
        if self.unit == 0 or other.unit == 0:
            return PadicApprox.zero(self.p, A)
        rel = min(self.prec, other.prec)
        return PadicApprox(self.p, self.unit * other.unit % self.p ** rel, self.val + other.val, rel)

    def inverse(self) -> "PadicApprox":
        if self.unit == 0:
            raise PrecisionError("cannot invert a value indistinguishable from zero")
        return PadicApprox.from_rational(self.p, 1 / self.rational(), -self.val + self.prec)

    def invert_unit(self) -> "PadicApprox":
        if self.unit == 0 or self.val != 0:
            raise PadicError("not a unit")
        return self.inverse()

    def reduce_precision(self, absprec: int) -> "PadicApprox":
        return PadicApprox.from_rational(self.p, self.rational(), min(absprec, self.absprec))

    def residue(self, k: int) -> int:
        """Integer in ``[0, p^k)`` congruent to the value; needs ``val >= 0``."""
        if self.absprec < k:
            raise PrecisionError(f"value known only mod p^{self.absprec}")
        x = self.rational()
        mod = self.p ** k
        if x.denominator % self.p == 0:
            raise PadicError("value is not integral")
        return x.numerator * pow(x.denominator, -1, mod) % mod

    def congruent(self, other: "PadicApprox", k: int) -> bool:
        d = self - other
        if d.absprec < k:
            raise PrecisionError(f"difference known only mod p^{d.absprec}")
        return d.unit == 0 or d.val >= k

    def __str__(self) -> str:
        if self.unit == 0:
            return "0" if self.is_exact else f"O({self.p}^{self.val})"
        return f"{self.p}^{self.val}*{self.unit}+O({self.p}^{self.absprec})"


def _normalized(p: int, total: int, v: int, absprec: int) -> PadicApprox:
    """``p^v * total`` reduced to absolute precision ``absprec``."""
    if total == 0:
        return PadicApprox.zero(p, absprec)
    while total % p == 0:
        total //= p
        v += 1
    if v >= absprec:
        return PadicApprox.zero(p, absprec)
    rel = absprec - v
    return PadicApprox(p, total % p ** rel, v, rel)


# ----------------------------------------------------------------------------
# matrices


@dataclass(frozen=True)
class PadicMatrix:
    p: int
    precision: int
    rows: Tuple[Tuple[PadicApprox, ...], ...]

    def __post_init__(self):
        n = len(self.rows)
        if any(len(r) != n for r in self.rows):
            raise ValueError("matrix must be square")
        if any(e.p != self.p for r in self.rows for e in r):
            raise ValueError("entries must share the matrix prime")

    @property
    def size(self) -> int:
        return len(self.rows)

    @classmethod
    def from_entries(cls, p: int, precision: int, rows) -> "PadicMatrix":
        return cls(p, precision, tuple(tuple(e for e in r) for r in rows))

    @classmethod
    def from_rationals(cls, p: int, precision: int, rows, exact_zeros: bool = False) -> "PadicMatrix":
        def conv(x):
            if exact_zeros and Fraction(x) == 0:
                return PadicApprox.zero(p)
            return PadicApprox.from_rational(p, x, precision)
        return cls(p, precision, tuple(tuple(conv(x) for x in r) for r in rows))

    @classmethod
    def identity(cls, p: int, size: int, precision: int, relprec: Optional[int] = None) -> "PadicMatrix":
        one = PadicApprox.with_relprec(p, 1, precision if relprec is None else relprec)
        z = PadicApprox.zero(p)
        return cls(p, precision, tuple(tuple(one if i == j else z for j in range(size)) for i in range(size)))

    def __getitem__(self, ij) -> PadicApprox:
        i, j = ij
        return self.rows[i][j]

    def _same(self, other: "PadicMatrix") -> None:
        if self.p != other.p:
            raise ValueError(f"prime mismatch: {self.p} vs {other.p}")
        if self.size != other.size:
            raise ValueError("size mismatch")

    def __add__(self, other: "PadicMatrix") -> "PadicMatrix":
        self._same(other)
        return PadicMatrix(self.p, self.precision, tuple(
            tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)))

    def __neg__(self) -> "PadicMatrix":
        return PadicMatrix(self.p, self.precision, tuple(tuple(-a for a in r) for r in self.rows))

    def __sub__(self, other: "PadicMatrix") -> "PadicMatrix":
        return self + (-other)

    def __matmul__(self, other: "PadicMatrix") -> "PadicMatrix":
        self._same(other)
        n = self.size
        z = PadicApprox.zero(self.p)
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = z
                for k in range(n):
                    a, b = self.rows[i][k], other.rows[k][j]
                    if a.is_exact or b.is_exact:
                        continue
                    acc = acc + a * b
                row.append(acc)
            out.append(tuple(row))
        return PadicMatrix(self.p, self.precision, tuple(out))

    def transpose(self) -> "PadicMatrix":
        return PadicMatrix(self.p, self.precision, tuple(zip(*self.rows)))

    def map(self, fn) -> "PadicMatrix":
        return PadicMatrix(self.p, self.precision, tuple(tuple(fn(e) for e in r) for r in self.rows))

    def reduce_precision(self, absprec: int) -> "PadicMatrix":
        return PadicMatrix(self.p, min(self.precision, absprec), tuple(
            tuple(e if e.is_exact else e.reduce_precision(absprec) for e in r) for r in self.rows))

    def max_absprec(self) -> int:
        return max((e.absprec for r in self.rows for e in r if not e.is_exact), default=self.precision)

    def min_valuation(self) -> int:
        return min(e.val for r in self.rows for e in r)

    def is_zero(self) -> bool:
        return all(e.is_zero for r in self.rows for e in r)

    def inverse(self) -> "PadicMatrix":
        """Gauss-Jordan elimination, pivoting on the entry of least valuation."""
        n = self.size
        A = [list(r) for r in self.rows]
        finite = [e.absprec for r in self.rows for e in r if not e.is_exact]
        I = [list(r) for r in PadicMatrix.identity(self.p, n, self.precision,
                                                   max(finite, default=self.precision) + 8).rows]
        for c in range(n):
            cand = [(A[i][c].val, i) for i in range(c, n) if not A[i][c].is_zero]
            if not cand:
                raise PrecisionError("matrix is singular at the working precision")
            _, piv = min(cand)
            A[c], A[piv] = A[piv], A[c]
            I[c], I[piv] = I[piv], I[c]
            inv = A[c][c].inverse()
            A[c] = [x * inv for x in A[c]]
            I[c] = [x * inv for x in I[c]]
            for i in range(n):
                if i == c or A[i][c].is_zero:
                    continue
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[c])]
                I[i] = [x - f * y for x, y in zip(I[i], I[c])]
        return PadicMatrix(self.p, self.precision, tuple(tuple(r) for r in I))

    def __str__(self) -> str:
        return "\n".join(" ".join(str(e) for e in r) for r in self.rows)


def ad_phi(phi: PadicMatrix, X: PadicMatrix, phi_inv: Optional[PadicMatrix] = None) -> PadicMatrix:
    """``phi X phi^-1``."""
    if phi.size != X.size:
        raise ValueError("size mismatch")
    return phi @ X @ (phi_inv if phi_inv is not None else phi.inverse())


# ----------------------------------------------------------------------------
# splitting


@dataclass(frozen=True)
class SplitProblem:
    """``phi`` block diagonal with isoclinic blocks of integral slope, ``u``
    unipotent, trivial on diagonal blocks and supported on blocks ``(a, b)``
    with ``slope_a > slope_b``."""

    phi: PadicMatrix
    u: PadicMatrix
    blocks: Tuple[int, ...]
    slopes: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(int(b) for b in self.blocks))
        object.__setattr__(self, "slopes", tuple(int(s) for s in self.slopes))
        if len(self.blocks) != len(self.slopes) or any(b < 1 for b in self.blocks):
            raise ValueError("blocks and slopes must be equal-length, blocks positive")
        if sum(self.blocks) != self.phi.size or self.u.size != self.phi.size:
            raise ValueError("block sizes do not add up to the matrix size")
        if self.phi.p != self.u.p:
            raise ValueError("phi and u use different primes")
        owner = self.owner
        n = self.phi.size
        for i in range(n):
            for j in range(n):
                a, b = owner[i], owner[j]
                e = self.u[i, j]
                if a == b:
                    d = e - PadicApprox.with_relprec(self.p, 1, e.absprec) if i == j else e
                    if d.val < min(self.precision, d.absprec):
                        raise PreconditionError(f"u is not the identity on diagonal block {a}")
                    continue
                if self.phi[i, j].val < self.precision:
                    raise PreconditionError("phi is not block diagonal")
                if not e.is_zero and self.slopes[a] <= self.slopes[b]:
                    raise PreconditionError(
                        f"u has an entry at ({i},{j}) of relative slope {self.slopes[a] - self.slopes[b]} <= 0")
        for a in range(len(self.blocks)):
            idx = self.block_indices(a)
            for i in idx:
                for j in idx:
                    e = self.phi[i, j]
                    if not e.is_zero and e.val != self.slopes[a]:
                        raise PreconditionError(f"block {a} of phi is not isoclinic of slope {self.slopes[a]}")

    @property
    def p(self) -> int:
        return self.phi.p

    @property
    def precision(self) -> int:
        return self.u.precision

    @property
    def owner(self) -> List[int]:
        return [a for a, b in enumerate(self.blocks) for _ in range(b)]

    def block_indices(self, a: int) -> range:
        start = sum(self.blocks[:a])
        return range(start, start + self.blocks[a])

    def relative_slope(self, i: int, j: int) -> int:
        o = self.owner
        return self.slopes[o[i]] - self.slopes[o[j]]

    def strata(self) -> List[int]:
        """Distinct positive relative slopes, increasing."""
        return sorted({sa - sb for sa in self.slopes for sb in self.slopes if sa > sb})

    def working_precision(self, N: int) -> int:
        spread = max(self.slopes) - min(self.slopes)
        return N + spread * (len(self.blocks) + 1) + 2


def make_split_problem(p: int, N: int, blocks: Sequence[int], slopes: Sequence[int],
                       phi_rows, u_rows) -> SplitProblem:
    """Build a problem from rational (or ``"p^v*u"`` string) entries.

    ``phi`` is taken as exact data; ``u`` is known modulo ``p^N``.  Entries of
    ``u`` outside positive-slope blocks must be the identity pattern.
    """
    owner = [a for a, b in enumerate(blocks) for _ in range(b)]
    slopes = [int(s) for s in slopes]
    n = len(owner)
    W = N + (max(slopes) - min(slopes)) * (len(blocks) + 1) + 2

    R = W + 2 * max(map(abs, slopes)) + 4

    def phi_entry(x):
        x = parse_rational(p, x)
        return PadicApprox.zero(p) if x == 0 else PadicApprox.with_relprec(p, x, R)

    phi = PadicMatrix(p, N, tuple(tuple(phi_entry(x) for x in r) for r in phi_rows))
    u_out = []
    for i in range(n):
        row = []
        for j in range(n):
            x = u_rows[i][j]
            if owner[i] == owner[j] or slopes[owner[i]] <= slopes[owner[j]]:
                val = parse_rational(p, x)
                row.append(PadicApprox.with_relprec(p, val, R) if val else PadicApprox.zero(p))
            else:
                row.append(PadicApprox.parse(p, x, N))
        u_out.append(tuple(row))
    return SplitProblem(phi, PadicMatrix(p, N, tuple(u_out)), tuple(blocks), tuple(slopes))


def _stratum_part(problem: SplitProblem, M: PadicMatrix, eta: int) -> PadicMatrix:
    n = M.size
    z = PadicApprox.zero(M.p)
    return PadicMatrix(M.p, M.precision, tuple(
        tuple(M[i, j] if problem.relative_slope(i, j) == eta else z for j in range(n)) for i in range(n)))


def _solve_stratum(phi, phi_inv, Nh: PadicMatrix, eta: int, W: int) -> PadicMatrix:
    """``X = -sum_j Ad(phi)^j (Nh)``, truncated once terms vanish mod ``p^W``."""
    term = Nh
    total = -Nh
    best = term.min_valuation()
    stall = 0
    patience = max(1, math.ceil(1 / eta))
    for _ in range(10 * W + 10):
        term = ad_phi(phi, term, phi_inv).reduce_precision(W)
        if term.min_valuation() >= W:
            return total
        total = total - term
        v = term.min_valuation()
        if v > best:
            best, stall = v, 0
        else:
            stall += 1
            if stall >= patience:
                raise DivergenceError(f"series term stuck at valuation {v} for slope {eta}")
    raise DivergenceError("series did not converge")


def split_slopes(problem: SplitProblem, N: Optional[int] = None) -> PadicMatrix:
    """Unipotent ``h`` with ``h u phi h^-1 == phi`` modulo ``p^N`` in every entry."""
    N = problem.precision if N is None else N
    if N < 1:
        raise ValueError("N must be >= 1")
    p, n = problem.p, problem.phi.size
    W = problem.working_precision(N)
    phi = problem.phi
    phi_inv = phi.inverse()
    one = PadicMatrix.identity(p, n, W, W + 8)
    h = one
    u = problem.u.reduce_precision(W)
    for eta in problem.strata():
        Nh = _stratum_part(problem, u - one, eta)
        if Nh.min_valuation() >= W:
            continue
        X = _solve_stratum(phi, phi_inv, Nh, eta, W)
        step = one + X
        h = step @ h
        # u <- step u phi step^-1 phi^-1
        u = (step @ u @ ad_phi(phi, _unipotent_inverse(step), phi_inv)).reduce_precision(W)
    return h.reduce_precision(N)


def _unipotent_inverse(h: PadicMatrix) -> PadicMatrix:
    """``(1 + X)^-1 = sum (-X)^k`` for nilpotent ``X``."""
    n = h.size
    one = PadicMatrix.identity(h.p, n, h.precision, h.max_absprec() + 8)
    X = h - one
    out, term = one, one
    for _ in range(n):
        term = term @ (-X)
        if term.is_zero():
            break
        out = out + term
    return out


def split_negative(problem_phi: PadicMatrix, u: PadicMatrix, blocks: Sequence[int], slopes: Sequence[int],
                   N: int) -> PadicMatrix:
    """Negative standard form (``u`` on negative relative slopes), reduced by
    transposition: ``(u phi)^T = u' phi^T`` with ``u' = Ad(phi^T)(u^T)``
    supported on positive slopes; if ``h'`` splits ``(u', phi^T)`` then
    ``h = (h'^T)^-1``."""
    phi_t = problem_phi.transpose()
    u_t = ad_phi(phi_t, u.transpose()).reduce_precision(u.precision)
    problem = SplitProblem(phi_t, u_t, tuple(blocks), tuple(slopes))
    hp = split_slopes(problem, N)
    return _unipotent_inverse(hp.transpose())


def verify_conjugation(h: PadicMatrix, u: PadicMatrix, phi: PadicMatrix, N: int) -> int:
    """``min(N, min valuation of h u phi h^-1 - phi)``; entries that vanish to
    their known precision count with that precision."""
    if not (h.size == u.size == phi.size):
        raise ValueError("size mismatch")
    R = h @ u @ phi @ h.inverse() - phi
    return min(N, R.min_valuation())
