"""Membership oracles for the concrete discordant-set constructions.

Covers B-free sets and their exponent-pattern and multidimensional
relatives, Straus sets, rotation visiting-time sets (with a fat Cantor
target) and the anti-recurrent AR sets built from shrinking arcs around
an orbit segment.

Irrational rotations run in 64-bit fixed point: an angle is an integer
``num`` standing for num / 2**64 plus a bound on the approximation error in
units of 2**-64.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import BudgetError, ConstructionError, ConvergenceError, PrecisionError
from .folner import SetOracle

ONE = 1 << 64
ULP = 2.0 ** -64


# ---------------------------------------------------------------------------
# arithmetic helpers


def primes_up_to(n: int) -> np.ndarray:
    """All primes <= n (Eratosthenes on a byte array)."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    return np.flatnonzero(sieve).astype(np.int64)


def zeta(s: int) -> float:
    """Riemann zeta at an integer s >= 2 (Euler-Maclaurin tail)."""
    if s < 2:
        raise ValueError("zeta needs s >= 2")
    if s == 2:
        return math.pi ** 2 / 6
    N = 1000
    head = math.fsum(k ** -s for k in range(1, N))
    return head + N ** (1 - s) / (s - 1) + 0.5 * N ** -s + s * N ** (-s - 1) / 12


def exponent_valuation(b: int, k: int) -> float:
    """Largest m with b**m dividing k; ``math.inf`` for k == 0."""
    if b < 2:
        raise ValueError(f"base must be >= 2, got {b}")
    if k == 0:
        return math.inf
    k = abs(k)
    m = 0
    while k % b == 0:
        k //= b
        m += 1
    return m


@dataclass(frozen=True)
class BSequence:
    """A finite prefix of a pairwise coprime sequence of integers >= 2.

    ``tail_bound`` bounds the reciprocal sum of the omitted terms, which is
    what separates the prefix density product from the full one.
    """

    terms: tuple[int, ...]
    tail_bound: float = 0.0
    checked: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        terms = tuple(int(b) for b in self.terms)
        object.__setattr__(self, "terms", terms)
        if any(b < 2 for b in terms):
            raise ConstructionError("B-sequence terms must be >= 2")
        if not self.checked:
            seen = 1
            for i, b in enumerate(terms):
                if math.gcd(seen, b) != 1:
                    j = next(j for j in range(i) if math.gcd(terms[j], b) != 1)
                    raise ConstructionError(f"terms {terms[j]} and {b} are not coprime")
                seen *= b

    @classmethod
    def prime_powers(cls, k: int = 2, limit: int | None = None, count: int | None = None) -> "BSequence":
        """p**k over primes, either all p**k <= limit or the first ``count``."""
        if (limit is None) == (count is None):
            raise ValueError("give exactly one of limit, count")
        if limit is not None:
            ps = primes_up_to(int(round(limit ** (1 / k))) + 2)
            terms = [int(p) ** k for p in ps if int(p) ** k <= limit]
        else:
            bound = max(20, int(count * (math.log(count + 2) + math.log(math.log(count + 3)) + 2)))
            terms = [int(p) ** k for p in primes_up_to(bound)[:count]]
        # omitted terms exceed the last one and are spaced at least like prime powers
        last = terms[-1] if terms else 1
        root = round(last ** (1 / k))
        tail = (k - 1) ** -1 * root ** (1 - k) if k > 1 else math.inf
        return cls(tuple(terms), tail_bound=tail, checked=True)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __getitem__(self, i):
        return self.terms[i]

    @property
    def reciprocal_sum(self) -> float:
        return math.fsum(1 / b for b in self.terms)

    @property
    def density(self) -> float:
        return math.prod(1 - 1 / b for b in self.terms)


@dataclass(frozen=True)
class ExponentPattern:
    u: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "u", tuple(int(x) for x in self.u))
        if any(x < 1 for x in self.u):
            raise ConstructionError("exponents must be positive")


def _range_mask_multiples(lo: int, hi: int, m: int, mask: np.ndarray, value: bool = False) -> None:
    """Set mask positions of multiples of m in lo..hi to ``value``."""
    start = (-lo) % m
    mask[start::m] = value


# ---------------------------------------------------------------------------
# B-free sets


def bfree_oracle(B: BSequence, label: str | None = None, known_density: float | None = None) -> SetOracle:
    """Integers divisible by no term of ``B``."""
    terms = np.asarray(B.terms, dtype=np.int64)

    def contains(k: int) -> bool:
        if k == 0:
            return len(terms) == 0
        return all(k % b for b in B.terms)

    def interval(lo: int, hi: int) -> np.ndarray:
        mask = np.ones(hi - lo + 1, dtype=bool)
        for b in B.terms:
            if b > max(abs(lo), abs(hi)) and not lo <= 0 <= hi:
                break
            _range_mask_multiples(lo, hi, b, mask)
        return mask

    def batch(X: np.ndarray) -> np.ndarray:
        mask = np.ones(len(X), dtype=bool)
        top = int(np.abs(X).max()) if len(X) else 0
        for b in terms:
            if b > top:
                break
            mask &= X % b != 0
        if len(terms):
            mask &= X != 0
        return mask

    return SetOracle(
        contains=contains,
        label=label or f"B-free{B.terms[:4]}{'...' if len(B) > 4 else ''}",
        known_density=B.density if known_density is None else known_density,
        batch=batch,
        interval=interval,
    )


@lru_cache(maxsize=8)
def _primes_cached(n: int) -> np.ndarray:
    return primes_up_to(n)


def _prime_list(n: int) -> np.ndarray:
    size = 1 << max(10, n.bit_length())
    return _primes_cached(size)


def kfree(k: int = 2) -> SetOracle:
    """k-free integers (no p**k divisor), exact for every integer.

    The terms needed for a query are generated on demand, so the oracle
    represents the full infinite sequence; its density is 1/zeta(k).
    """
    if k < 2:
        raise ValueError("k must be >= 2")

    def roots_for(top: int) -> np.ndarray:
        r = int(top ** (1 / k)) + 1
        ps = _prime_list(r)
        return ps[ps ** k <= max(top, 1)]

    def contains(x: int) -> bool:
        x = abs(int(x))
        if x == 0:
            return False
        for p in roots_for(x):
            if x % (int(p) ** k) == 0:
                return False
        return True

    def interval(lo: int, hi: int) -> np.ndarray:
        mask = np.ones(hi - lo + 1, dtype=bool)
        for p in roots_for(max(abs(lo), abs(hi))):
            _range_mask_multiples(lo, hi, int(p) ** k, mask)
        if lo <= 0 <= hi:
            mask[-lo] = False
        return mask

    def batch(X: np.ndarray) -> np.ndarray:
        mask = X != 0
        if len(X):
            for p in roots_for(int(np.abs(X).max())):
                mask &= X % (int(p) ** k) != 0
        return mask

    name = "squarefree" if k == 2 else f"{k}-free"
    return SetOracle(contains=contains, label=name, known_density=1 / zeta(k), batch=batch, interval=interval)


def squarefree() -> SetOracle:
    return kfree(2)


def bufree_oracle(B: BSequence, u: ExponentPattern | Sequence[int]) -> SetOracle:
    """Integers k with e_b(k) != u_b for every paired (b, u_b)."""
    if not isinstance(u, ExponentPattern):
        u = ExponentPattern(tuple(u))
    if len(u.u) != len(B):
        raise ValueError(f"exponent pattern has {len(u.u)} entries for {len(B)} terms")
    pairs = list(zip(B.terms, u.u))
    density = math.prod(1 - (b - 1) / b ** (e + 1) for b, e in pairs)

    def contains(k: int) -> bool:
        return all(exponent_valuation(b, k) != e for b, e in pairs)

    def interval(lo: int, hi: int) -> np.ndarray:
        mask = np.ones(hi - lo + 1, dtype=bool)
        top = max(abs(lo), abs(hi))
        for b, e in pairs:
            step = b ** e
            if step > top:
                continue
            pos = np.arange((-lo) % step, hi - lo + 1, step)
            vals = pos + lo
            exact = (vals % (step * b) != 0)
            mask[pos[exact]] = False
        return mask

    def batch(X: np.ndarray) -> np.ndarray:
        mask = np.ones(len(X), dtype=bool)
        for b, e in pairs:
            step = b ** e
            mask &= ~((X % step == 0) & (X % (step * b) != 0))
        return mask

    return SetOracle(contains=contains, label=f"B^u-free{tuple(pairs)}", known_density=density,
                     batch=batch, interval=interval)


def _box_divisibility_free(rows: Sequence[Sequence[int]]) -> tuple:
    """Shared batch/contains for 'no n has rows[i][n] | v_i for every i'."""
    d = len(rows)
    if d < 1 or len({len(r) for r in rows}) != 1:
        raise ValueError("rows must be nonempty and of equal length")
    cols = np.asarray(rows, dtype=np.int64).T  # one line per index n

    def contains(v) -> bool:
        return not any(all(vi % bi == 0 for vi, bi in zip(v, line)) for line in cols.tolist())

    def batch(X: np.ndarray) -> np.ndarray:
        mask = np.ones(len(X), dtype=bool)
        if not len(X) or not len(cols):
            return mask
        first = X[:, 0]
        order = np.argsort(first, kind="stable")
        values, starts = np.unique(first[order], return_index=True)
        ends = np.append(starts[1:], len(order))
        for a, s, e in zip(values.tolist(), starts.tolist(), ends.tolist()):
            # only indices whose first modulus divides a can fire on this slice
            live = cols[a % cols[:, 0] == 0]
            if not len(live):
                continue
            idx = order[s:e]
            sub = X[idx, 1:]
            hit = np.zeros(len(idx), dtype=bool)
            for line in live:
                hit |= np.all(sub % line[1:] == 0, axis=1) if d > 1 else True
            mask[idx] = ~hit
        return mask

    return contains, batch


def coprime_tuple_oracle(rows: Sequence[BSequence | Sequence[int]]) -> SetOracle:
    """Vectors v in Z^d such that no index n has b_{n,i} | v_i for all i.

    ``rows[i]`` lists the moduli b_{n,i} used on coordinate i.
    """
    rows = [r if isinstance(r, BSequence) else BSequence(tuple(r)) for r in rows]
    if len(rows) < 2:
        raise ValueError("coprime tuples need d >= 2 rows")
    if len({len(r) for r in rows}) != 1:
        raise ValueError("ragged rows")
    contains, batch = _box_divisibility_free([r.terms for r in rows])
    density = math.prod(1 - 1 / math.prod(line) for line in zip(*(r.terms for r in rows)))
    return SetOracle(contains=lambda v: contains(tuple(v)), label=f"coprime-tuples(d={len(rows)})",
                     known_density=density, batch=batch)


def coprime_pairs(limit: int) -> SetOracle:
    """Pairs with no common prime factor <= limit (exact gcd test for |v_i| <= limit)."""
    P = BSequence(tuple(int(p) for p in primes_up_to(limit)), checked=True)
    o = coprime_tuple_oracle([P, P])
    return SetOracle(contains=o.contains, label="coprime-pairs", known_density=6 / math.pi ** 2, batch=o.batch)


def heisenberg_bfree_oracle(B: BSequence) -> SetOracle:
    """Heisenberg triples (a, b, c) such that no term of B divides all three."""
    contains, batch = _box_divisibility_free([B.terms] * 3)
    density = math.prod(1 - 1 / b ** 3 for b in B.terms)
    return SetOracle(contains=lambda v: contains(tuple(v)), label=f"H3-B-free{B.terms[:4]}",
                     known_density=density, batch=batch)


# ---------------------------------------------------------------------------
# Straus sets


class StrausVariant(enum.Enum):
    SINGLE = "single"  # remove a_n N + (n - 1)
    BLOCK = "block"    # remove a_n N + {0, ..., n - 1}


@dataclass(frozen=True)
class StrausParams:
    a: tuple[int, ...]
    variant: StrausVariant = StrausVariant.SINGLE

    def __post_init__(self):
        a = tuple(int(x) for x in self.a)
        object.__setattr__(self, "a", a)
        if not a or any(x < 2 for x in a) or any(y <= x for x, y in zip(a, a[1:])):
            raise ConstructionError("a must be a nonempty increasing list of integers >= 2")
        weight = self.weight_sum
        if weight >= 1:
            raise ConstructionError(f"removal weight {weight:.4f} is not < 1")

    @classmethod
    def powers_of_two(cls, horizon: int, variant: StrausVariant = StrausVariant.SINGLE) -> "StrausParams":
        """a_n = 2**(n + 2), with enough terms to decide every x <= horizon."""
        a = []
        n = 1
        while True:
            a.append(2 ** (n + 2))
            p = cls(tuple(a), variant)
            if p.horizon >= horizon:
                return p
            n += 1

    @property
    def weight_sum(self) -> float:
        if self.variant is StrausVariant.SINGLE:
            return math.fsum(1 / x for x in self.a)
        return math.fsum(n / x for n, x in enumerate(self.a, start=1))

    @property
    def horizon(self) -> int:
        """Largest x decided by this finite prefix.

        Any omitted term a_{N+1} > a_N removes nothing below a_{N+1} (block)
        or a_{N+1} + N (single residue).
        """
        N = len(self.a)
        return self.a[-1] + N if self.variant is StrausVariant.SINGLE else self.a[-1]


def straus_set(p: StrausParams) -> SetOracle:
    """The complement in N of the removed progressions of ``p``."""
    if p.variant is StrausVariant.SINGLE:
        classes = [(a, (n - 1,)) for n, a in enumerate(p.a, start=1)]
    else:
        classes = [(a, tuple(range(n))) for n, a in enumerate(p.a, start=1)]

    def check(hi: int):
        if hi > p.horizon:
            raise BudgetError(f"x={hi} beyond the horizon {p.horizon} of the supplied prefix")

    def contains(x: int) -> bool:
        check(x)
        if x < 0:
            return False
        # x = a*k + r with k >= 1
        return not any(x - r >= a and (x - r) % a == 0 for a, rs in classes if a <= x for r in rs)

    def interval(lo: int, hi: int) -> np.ndarray:
        check(hi)
        xs = np.arange(lo, hi + 1, dtype=np.int64)
        mask = xs >= 0
        for a, rs in classes:
            if a > hi:
                break
            for r in rs:
                mask &= ~((xs % a == r) & (xs >= a + r))
        return mask

    def batch(X: np.ndarray) -> np.ndarray:
        if len(X):
            check(int(X.max()))
        mask = X >= 0
        for a, rs in classes:
            for r in rs:
                mask &= ~((X % a == r) & (X >= a + r))
        return mask

    o = SetOracle(contains=contains, label=f"straus-{p.variant.value}{p.a[:3]}", batch=batch, interval=interval)
    return o


def straus_density_lower_bound(p: StrausParams) -> float:
    return 1 - p.weight_sum


# ---------------------------------------------------------------------------
# fixed-point circle arithmetic


@dataclass(frozen=True)
class Angle:
    """A point of the circle as num / 2**64 with |true - num/2**64| <= err ulps."""

    num: int
    err: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "num", int(self.num) % ONE)

    @classmethod
    def from_value(cls, x) -> "Angle":
        """Round an exact value (float, Fraction, str, int) to the nearest ulp."""
        f = Fraction(x) % 1
        return cls(round(f * ONE), 0.5)

    @classmethod
    def golden(cls) -> "Angle":
        """(sqrt(5) - 1) / 2, truncated from a 136-bit integer square root."""
        s = math.isqrt(5 << 144)  # floor(sqrt(5) * 2**72)
        return cls((s - (1 << 72)) >> 9, 1.0)

    @classmethod
    def sqrt(cls, d: int) -> "Angle":
        """Fractional part of sqrt(d) for a non-square d."""
        s = math.isqrt(d << 144)
        return cls((s >> 8) % ONE, 1.0)

    @property
    def value(self) -> float:
        return self.num / ONE

    def orbit(self, n: np.ndarray, base: int = 0) -> np.ndarray:
        """base + n*num mod 2**64, as uint64, for int64 n."""
        with np.errstate(over="ignore"):
            return np.asarray(n, dtype=np.int64).astype(np.uint64) * np.uint64(self.num) + np.uint64(base % ONE)

    def budget(self, n_abs: int, base_err: float = 0.5) -> float:
        """Error bound in ulps of the computed orbit point at |n| = n_abs."""
        return n_abs * self.err + base_err


def _exact(x) -> Fraction:
    """Decimal reading of floats, so 0.2 means 1/5."""
    return Fraction(repr(x)) if isinstance(x, float) else Fraction(x)


def _ulp(x) -> int:
    return round(Fraction(x) * ONE)


@dataclass(frozen=True)
class IntervalUnion:
    """Disjoint half-open arcs [lo, hi) of [0, 1], stored in ulps and merged."""

    arcs: tuple[tuple[int, int], ...]

    @classmethod
    def of(cls, pieces) -> "IntervalUnion":
        raw = []
        for lo, hi in pieces:
            L, H = _ulp(lo), _ulp(hi)
            if not 0 <= L <= H <= ONE:
                raise ConstructionError(f"arc [{lo}, {hi}) not within [0, 1]")
            if H > L:
                raw.append((L, H))
        return cls.from_ulps(raw)

    @classmethod
    def from_ulps(cls, raw) -> "IntervalUnion":
        raw = sorted(raw)
        merged: list[list[int]] = []
        for L, H in raw:
            if merged and L <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], H)
            else:
                merged.append([L, H])
        return cls(tuple((L, H) for L, H in merged))

    @classmethod
    def circle(cls) -> "IntervalUnion":
        return cls(((0, ONE),))

    @classmethod
    def nothing(cls) -> "IntervalUnion":
        return cls(())

    @classmethod
    def arcs_around(cls, centers_ulp, radius_ulp: int) -> "IntervalUnion":
        """Open arcs (c - r, c + r) on the circle, split where they wrap."""
        raw = []
        for c in centers_ulp:
            if 2 * radius_ulp >= ONE:
                return cls.circle()
            lo, hi = c - radius_ulp, c + radius_ulp
            if lo < 0:
                raw += [(0, hi), (lo + ONE, ONE)]
            elif hi > ONE:
                raw += [(lo, ONE), (0, hi - ONE)]
            else:
                raw.append((lo, hi))
        return cls.from_ulps(raw)

    @property
    def measure(self) -> float:
        return sum(H - L for L, H in self.arcs) / ONE

    @property
    def max_length(self) -> float:
        return max((H - L for L, H in self.arcs), default=0) / ONE

    def boundaries(self) -> np.ndarray:
        pts = set()
        for L, H in self.arcs:
            pts.add(L % ONE)
            pts.add(H % ONE)
        # 0 ~ 1 is interior when arcs meet across it
        if self.arcs and self.arcs[0][0] == 0 and self.arcs[-1][1] == ONE:
            pts.discard(0)
        return np.array(sorted(pts), dtype=np.uint64)

    def contains_ulps(self, y: np.ndarray) -> np.ndarray:
        if not self.arcs:
            return np.zeros(len(y), dtype=bool)
        starts = np.array([L for L, _ in self.arcs], dtype=np.uint64)
        lasts = np.array([H - 1 for _, H in self.arcs], dtype=np.uint64)
        i = np.searchsorted(starts, y, side="right") - 1
        ok = i >= 0
        res = np.zeros(len(y), dtype=bool)
        res[ok] = y[ok] <= lasts[i[ok]]
        return res

    def near_boundary(self, y: np.ndarray, budget: float) -> np.ndarray:
        pts = self.boundaries()
        if not len(pts) or budget <= 0:
            return np.zeros(len(y), dtype=bool)
        b = np.uint64(math.ceil(budget))
        j = np.searchsorted(pts, y)
        lo = pts[(j - 1) % len(pts)]
        hi = pts[j % len(pts)]
        with np.errstate(over="ignore"):
            d1 = y - lo   # wraps correctly modulo 2**64
            d2 = hi - y
        return (d1 <= b) | (d2 <= b)


@dataclass(frozen=True)
class RotationSpec:
    alpha: Angle
    target: IntervalUnion
    base: Angle = field(default_factory=lambda: Angle(0, 0.0))
    max_error: float = 2.0 ** -32

    @property
    def max_abs_n(self) -> int:
        """Largest |n| whose orbit error stays inside ``max_error``."""
        if self.alpha.err == 0:
            return 2 ** 62
        return int((self.max_error * ONE - self.base.err) / self.alpha.err)


def rotation_visit_oracle(spec: RotationSpec) -> SetOracle:
    """n such that base + n*alpha lands in the target set.

    Orbit points closer to an endpoint than the error budget are reported
    as not contained, and flagged by ``ambiguous``.
    """
    lim = spec.max_abs_n

    def points(X: np.ndarray):
        X = np.asarray(X, dtype=np.int64)
        top = int(np.abs(X).max()) if len(X) else 0
        if top > lim:
            raise PrecisionError(f"|n|={top} exceeds the precision budget {lim}")
        return spec.alpha.orbit(X, spec.base.num), spec.alpha.budget(top, spec.base.err)

    def batch(X):
        y, budget = points(X)
        return spec.target.contains_ulps(y) & ~spec.target.near_boundary(y, budget)

    def ambiguous(X):
        y, budget = points(X)
        return spec.target.near_boundary(y, budget)

    return SetOracle(
        contains=lambda n: bool(batch(np.array([n]))[0]),
        label=f"R_E(x) alpha={spec.alpha.value:.10f}",
        known_density=spec.target.measure,
        batch=batch,
        ambiguous=ambiguous,
    )


@dataclass(frozen=True)
class FatCantorSpec:
    target_measure: float
    depth: int
    removed: tuple[tuple[Fraction, Fraction], ...]
    kept: tuple[tuple[Fraction, Fraction], ...]

    @property
    def measure(self) -> Fraction:
        return sum((b - a for a, b in self.kept), Fraction(0))

    @property
    def max_kept_length(self) -> Fraction:
        return max(b - a for a, b in self.kept)

    def target(self) -> IntervalUnion:
        return IntervalUnion.of(self.kept)


def fat_cantor(c: float, depth: int) -> FatCantorSpec:
    """Symmetric Cantor scheme on [0, 1) with limiting measure c.

    Stage k removes a middle gap of length (1-c)/2**(2k-1) from each of the
    2**(k-1) surviving intervals, a stage total of (1-c)/2**k.
    """
    if not 0 < c < 1:
        raise ValueError("c must lie in (0, 1)")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    cf = _exact(c)
    kept = [(Fraction(0), Fraction(1))]
    removed = []
    for k in range(1, depth + 1):
        gap = (1 - cf) / 2 ** (2 * k - 1)
        nxt = []
        for a, b in kept:
            mid = (a + b) / 2
            removed.append((mid - gap / 2, mid + gap / 2))
            nxt += [(a, mid - gap / 2), (mid + gap / 2, b)]
        kept = nxt
    return FatCantorSpec(float(c), depth, tuple(removed), tuple(kept))


# ---------------------------------------------------------------------------
# AR sets


def ar_radius(t, n: int) -> Fraction:
    return _exact(t) / ((2 * n + 1) * 2 ** (n + 1))


@dataclass(frozen=True)
class ARSetSpec:
    """Parameters for Z minus the truncated return-time sets of B_0, ..., B_N.

    B_n is the union of arcs of radius r_n around k*alpha, |k| <= n; the
    truncated set keeps only returns m with |m| >= cutoff(n). The default
    cutoff n + 1 discards exactly the forced returns m = k.
    """

    t: float
    alpha: Angle = field(default_factory=Angle.golden)
    stages: int = 40
    cutoffs: tuple[int, ...] | None = None
    max_error: float = 2.0 ** -32

    def __post_init__(self):
        if not 0 < self.t < 1:
            raise ConstructionError("t must lie in (0, 1)")
        if self.cutoffs is not None and len(self.cutoffs) != self.stages + 1:
            raise ConstructionError("need one cutoff per stage 0..N")

    def cutoff(self, n: int) -> int:
        return n + 1 if self.cutoffs is None else self.cutoffs[n]

    def radius(self, n: int) -> Fraction:
        return ar_radius(self.t, n)


def _circle_dist(y: np.ndarray) -> np.ndarray:
    """Distance to the nearest integer, in ulps (as uint64)."""
    with np.errstate(over="ignore"):
        neg = np.uint64(0) - y
    return np.minimum(y, neg)


def _ar_scan(spec: ARSetSpec, X: np.ndarray):
    X = np.asarray(X, dtype=np.int64)
    N = spec.stages
    top = int(np.abs(X).max()) + N if len(X) else N
    lim = int(spec.max_error * ONE / spec.alpha.err)
    if top > lim:
        raise PrecisionError(f"|m|+N={top} exceeds the precision budget {lim}")
    budget = spec.alpha.budget(top, 0.0)
    b = math.ceil(budget)
    hit = np.zeros(len(X), dtype=bool)
    amb = np.zeros(len(X), dtype=bool)
    absX = np.abs(X)
    closest = _circle_dist(spec.alpha.orbit(X))
    for n in range(N + 1):
        if n:
            closest = np.minimum(closest, np.minimum(_circle_dist(spec.alpha.orbit(X - n)),
                                                     _circle_dist(spec.alpha.orbit(X + n))))
        R = math.floor(spec.radius(n) * ONE)
        active = absX >= spec.cutoff(n)
        # dist < r_n is certain below R - b, and undecided within b of R
        sure = closest.astype(np.float64) < R - b
        near = np.abs(closest.astype(np.float64) - R) <= b
        hit |= active & sure
        amb |= active & near & ~sure
    return hit, amb & ~hit


def ar_set(spec: ARSetSpec) -> SetOracle:
    """Membership in the AR set; undecided points count as removed."""

    def batch(X):
        hit, amb = _ar_scan(spec, X)
        return ~hit & ~amb

    return SetOracle(
        contains=lambda m: bool(batch(np.array([m]))[0]),
        label=f"AR(t={spec.t})",
        batch=batch,
        ambiguous=lambda X: _ar_scan(spec, X)[1],
    )


def ar_antirecurrence_violations(spec: ARSetSpec, k: int, lo: int, hi: int) -> list[int]:
    """Members m of A in lo..hi with ||(m - k) alpha|| < r_|k| / 2."""
    ms = np.arange(lo, hi + 1, dtype=np.int64)
    inside = ar_set(spec).mask(ms)
    d = _circle_dist(spec.alpha.orbit(ms - k)).astype(np.float64) / ONE
    close = d < float(spec.radius(abs(k))) / 2
    return ms[inside & close].tolist()


def ar_union_measure(t: float, alpha: Angle, stages: int = 40) -> float:
    """Lebesgue measure of B_0 ∪ ... ∪ B_N (tail beyond N is at most t/2**(N-1))."""
    raw = []
    for n in range(stages + 1):
        R = math.floor(ar_radius(t, n) * ONE)
        if R == 0:
            break
        centers = [(k * alpha.num) % ONE for k in range(-n, n + 1)]
        raw += list(IntervalUnion.arcs_around(centers, R).arcs)
    return IntervalUnion.from_ulps(raw).measure


def tune_ar_density(target_c: float, alpha: Angle | None = None, precision: float = 1e-4,
                    stages: int = 40, max_iter: int = 200) -> float:
    """Bisect t so the measured union of the B_n equals 1 - target_c."""
    if not 0 < target_c < 1:
        raise ValueError("target density must lie in (0, 1)")
    alpha = alpha or Angle.golden()
    goal = 1 - target_c
    lo, hi = 0.0, 1.0 - 1e-12
    for _ in range(max_iter):
        mid = (lo + hi) / 2
        f = ar_union_measure(mid, alpha, stages)
        if abs(f - goal) <= precision:
            return mid
        if f < goal:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    raise ConvergenceError(f"no t found within {precision} of union measure {goal}")
