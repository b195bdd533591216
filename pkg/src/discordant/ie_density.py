"""Window checks for inclusion-exclusion good families.

A family E_1, E_2, ... of subsets has the property that the density of the
set avoiding all of them is the product of (1 - d(E_n)). The checks here
measure each ingredient on explicit Følner windows: independence of finite
intersections, the bounded-overcount sums over k-subsets, and the pointwise
alternating-sum inequality behind the product formula.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .folner import (
    FolnerWindow,
    GroupContext,
    SetOracle,
    count_in_window,
    folner_window,
    residue_class,
)


@dataclass
class IEFamily:
    members: list[SetOracle]
    ctx: GroupContext
    moduli: list[int] | None = None  # set for congruence families m_i Z

    def __post_init__(self):
        for m in self.members:
            if m.known_density is None:
                raise ValueError(f"member {m.label} has no known density")

    def __len__(self) -> int:
        return len(self.members)

    @property
    def densities(self) -> list[float]:
        return [m.known_density for m in self.members]

    @property
    def density_sum(self) -> float:
        return math.fsum(self.densities)

    @classmethod
    def multiples(cls, moduli: Sequence[int], ctx: GroupContext | None = None) -> "IEFamily":
        """The congruence family m_1 Z, m_2 Z, ... in Z."""
        return cls([residue_class(m) for m in moduli], ctx or GroupContext.integers(), list(moduli))

    def intersection(self, I: Sequence[int]) -> SetOracle:
        """E_I for a set of 0-based member indices."""
        if not I:
            raise ValueError("index set must be nonempty")
        o = self.members[I[0]]
        for i in I[1:]:
            o = o & self.members[i]
        return o

    def avoid_all(self, upto: int | None = None) -> SetOracle:
        """The set avoiding E_1, ..., E_upto."""
        ms = self.members[:upto]
        if not ms:
            from .folner import whole
            return whole()
        u = ms[0]
        for m in ms[1:]:
            u = u | m
        return u.complement()

    def empty_beyond_support(self, size: int, samples: Sequence[int] = range(-500, 501)) -> str:
        """Check on samples that index sets larger than ``size`` meet nothing.

        For congruence families this is exact: E_I is the multiples of
        lcm(I), which leaves any finite window once lcm(I) outgrows it.
        Otherwise the verdict is "assumed".
        """
        if self.moduli is None:
            return "assumed"
        for I in itertools.combinations(range(len(self)), size + 1):
            l = math.lcm(*(self.moduli[i] for i in I))
            if any(s % l == 0 and s != 0 for s in samples):
                return "violated"
        return "verified"


@dataclass
class PartialProductTrace:
    prefix_products: list[float]
    tail_bound: float

    @property
    def last(self) -> float:
        return self.prefix_products[-1] if self.prefix_products else 1.0

    def interval(self) -> tuple[float, float]:
        """Range certainly containing the infinite product.

        The remaining factors multiply the last prefix by something in
        [1 - tail, 1] when the tail density sum is at most ``tail``.
        """
        return max(0.0, self.last * (1 - self.tail_bound)), self.last


def ie_partial_products(densities: Sequence[float], tail_bound: float = 0.0) -> PartialProductTrace:
    """Running products of (1 - d_i); ``tail_bound`` bounds the omitted d_i."""
    prods = []
    acc = 1.0
    for d in densities:
        if not 0 <= d < 1:
            raise ValueError(f"density {d} outside [0, 1)")
        acc *= 1 - d
        prods.append(acc)
    return PartialProductTrace(prods, tail_bound)


@dataclass
class IndependenceReport:
    I: tuple[int, ...]
    n: int
    ratio: float
    product: float
    diff: float
    tolerance: float

    @property
    def flagged(self) -> bool:
        return self.diff > self.tolerance


def ie_check_independence(family: IEFamily, I: Sequence[int], n: int, tolerance: float | None = None) -> IndependenceReport:
    """Window ratio of E_I against the product of member densities.

    The default flagging tolerance is a few boundary effects of the window.
    """
    I = tuple(sorted(set(I)))
    if any(not 0 <= i < len(family) for i in I):
        raise ValueError("index set outside the family")
    window = folner_window(family.ctx, n)
    count, _ = count_in_window(family.intersection(I), window)
    ratio = count / window.size
    product = math.prod(family.members[i].known_density for i in I)
    if tolerance is None:
        tolerance = 4 * len(window.lows) / (window.size ** (1 / len(window.lows)))
    return IndependenceReport(I, n, ratio, product, abs(ratio - product), tolerance)


@dataclass
class OvercountReport:
    k: int
    n: int
    truncation: int
    average: float
    density_sum: float
    diff: float
    tail_bound: float


def _subset_sum_counts(family: IEFamily, m: int, window: FolnerWindow) -> np.ndarray:
    """For each window row, the number of members among the first m containing it."""
    parts = []
    for chunk in window.chunks():
        acc = np.zeros(len(chunk), dtype=np.int64)
        for o in family.members[:m]:
            acc += o.mask(chunk)
        parts.append(acc)
    return np.concatenate(parts)


def ie_check_bounded_overcount(family: IEFamily, k: int, n: int, truncation: int | None = None) -> OvercountReport:
    """Compare the window average of sum_{|I|=k, I ⊆ [m]} 1_{E_I} with sum d(E_I).

    A point lying in exactly r members is counted C(r, k) times. Member
    densities are multiplied for d(E_I), as in an independent family. The
    tail bound covers subsets reaching past the truncation.
    """
    m = len(family) if truncation is None else truncation
    if k < 1:
        raise ValueError("k must be >= 1")
    if m > len(family):
        raise ValueError("truncation exceeds the family size")
    window = folner_window(family.ctx, n)
    if k > m:
        return OvercountReport(k, n, m, 0.0, 0.0, 0.0, 0.0)
    r = _subset_sum_counts(family, m, window)
    total = sum(math.comb(int(v), k) * int(c) for v, c in zip(*np.unique(r, return_counts=True)))
    average = total / window.size
    ds = family.densities
    dsum = math.fsum(math.prod(ds[i] for i in I) for I in itertools.combinations(range(m), k))
    # subsets touching an index >= m: at most (sum of tail densities) * e_{k-1}(all)
    tail = math.fsum(ds[m:]) * math.fsum(ds) ** (k - 1) / math.factorial(k - 1) if m < len(ds) else 0.0
    return OvercountReport(k, n, m, average, dsum, abs(average - dsum), tail)


def truncated_alternating_sum(r: int, n: int) -> int:
    """f(r) = sum_{i < 2n} (-1)^i C(r, i) for a point lying in exactly r members."""
    return sum((-1) ** i * math.comb(r, i) for i in range(2 * n))


def indicator_truncation_check(family: IEFamily, n: int, samples: Sequence) -> bool:
    """Pointwise 1_F >= sum_{|I| < 2n} (-1)^{|I|} 1_{E_I} on the samples.

    Also asserts the closed form -C(r-1, 2n-1) of the right side for every
    sample outside F.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    for s in samples:
        r = sum(1 for o in family.members if o.contains(s))
        f = truncated_alternating_sum(r, n)
        if r == 0:
            if f != 1:
                return False
            continue
        if f != -math.comb(r - 1, 2 * n - 1) or f > 0:
            return False
    return True


def product_family(famG: IEFamily, famH: IEFamily) -> IEFamily:
    """Members D_n x E_n in the product context, densities multiplied.

    Only scalar and lattice factors are supported; the product of Z^a and
    Z^b is Z^(a+b) with the product window of the factor windows.
    """
    if len(famG) != len(famH):
        raise ValueError("families differ in length")
    dg = famG.ctx.rank
    dh = famH.ctx.rank
    if not (famG.ctx.commutative and famH.ctx.commutative):
        raise ValueError("product families are supported for lattice factors only")
    ctx = GroupContext.lattice(dg + dh)
    members = []
    for D, E in zip(famG.members, famH.members):
        members.append(_product_oracle(D, E, dg))
    return IEFamily(members, ctx, None)


def _product_oracle(D: SetOracle, E: SetOracle, split: int) -> SetOracle:
    def unpack(v, lo, hi):
        part = tuple(v[lo:hi])
        return part[0] if len(part) == 1 else part

    def contains(v):
        return D.contains(unpack(v, 0, split)) and E.contains(unpack(v, split, len(v)))

    def batch(X):
        left = X[:, 0] if split == 1 else X[:, :split]
        right = X[:, split] if X.shape[1] - split == 1 else X[:, split:]
        return D.mask(left) & E.mask(right)

    return SetOracle(contains=contains, label=f"{D.label}x{E.label}",
                     known_density=D.known_density * E.known_density, batch=batch)


def paired_series_limit(a: Callable[[int, int], float], b: Callable[[int, int], float],
                        ns: Sequence[int], terms: int = 200) -> list[float]:
    """Values of sum_k a(k, n) b(k, n) for each n, summing k = 1..terms.

    Used to check that the sum converges to sum_k a_k b_k when the
    doubly indexed sequences converge termwise under a summable bound.
    """
    return [math.fsum(a(k, n) * b(k, n) for k in range(1, terms + 1)) for n in ns]
