"""Entry-bounded balls in SL2(Z) and the principal congruence subgroups.

F_n is the set of integer matrices [[a, b], [c, d]] with determinant 1 and
all entries bounded by n in absolute value. Balls are enumerated row by
row: for each coprime top row (a, b) the bottom rows form a single family
(c0 + t*a, d0 + t*b), so only an interval of t has to be walked.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BudgetError, ConstructionError

MAX_BALL = 200


@dataclass(frozen=True)
class Mat2:
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.a * self.d - self.b * self.c != 1:
            raise ConstructionError(f"determinant of {self.rows()} is not 1")

    def rows(self):
        return ((self.a, self.b), (self.c, self.d))

    def __matmul__(self, other: "Mat2") -> "Mat2":
        return Mat2(self.a * other.a + self.b * other.c, self.a * other.b + self.b * other.d,
                    self.c * other.a + self.d * other.c, self.c * other.b + self.d * other.d)

    def mod(self, k: int) -> tuple[int, int, int, int]:
        return (self.a % k, self.b % k, self.c % k, self.d % k)

    @property
    def height(self) -> int:
        return max(abs(self.a), abs(self.b), abs(self.c), abs(self.d))


IDENTITY = Mat2(1, 0, 0, 1)


@dataclass
class Sl2Ball:
    n: int
    entries: np.ndarray  # shape (count, 4): a, b, c, d

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def members(self) -> list[Mat2]:
        return [Mat2(*map(int, r)) for r in self.entries]


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    """(g, x, y) with a*x + b*y = g >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def _t_range(base: int, step: int, n: int) -> tuple[int, int] | None:
    """Integers t with |base + t*step| <= n, as an inclusive range."""
    if step == 0:
        return (-math.inf, math.inf) if abs(base) <= n else None
    if step < 0:
        base, step = -base, -step
    lo = -((n + base) // step)      # ceil((-n - base) / step)
    hi = (n - base) // step
    return (lo, hi) if lo <= hi else None


def bottom_rows(a: int, b: int, n: int) -> list[tuple[int, int]]:
    """All (c, d) with ad - bc = 1 and |c|, |d| <= n."""
    g, x, y = _egcd(a, b)
    if g != 1:
        return []
    # a*x + b*y = 1, so (c, d) = (-y, x) is one solution; the rest add t*(a, b)
    c0, d0 = -y, x
    rc = _t_range(c0, a, n)
    rd = _t_range(d0, b, n)
    if rc is None or rd is None:
        return []
    lo, hi = max(rc[0], rd[0]), min(rc[1], rd[1])
    if lo > hi:
        return []
    return [(c0 + t * a, d0 + t * b) for t in range(int(lo), int(hi) + 1)]


def enumerate_ball(n: int) -> Sl2Ball:
    """Every matrix of SL2(Z) with entries bounded by n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > MAX_BALL:
        raise BudgetError(f"ball radius {n} exceeds the budget {MAX_BALL}")
    out = []
    for a in range(-n, n + 1):
        for b in range(-n, n + 1):
            for c, d in bottom_rows(a, b, n):
                out.append((a, b, c, d))
    return Sl2Ball(n, np.array(out, dtype=np.int64).reshape(-1, 4))


def brute_force_ball(n: int) -> set[tuple[int, int, int, int]]:
    r = range(-n, n + 1)
    return {m for m in itertools.product(r, repeat=4) if m[0] * m[3] - m[1] * m[2] == 1}


@dataclass
class BallBoundReport:
    n: int
    size: int
    bound: float
    holds: bool


def ball_lower_bound_check(n: int) -> BallBoundReport:
    """|F_n| against (12 / pi^2) n^2."""
    size = len(enumerate_ball(n))
    bound = 12 / math.pi ** 2 * n * n
    return BallBoundReport(n, size, bound, size >= bound)


def least_n_lower_bound(upto: int = 60) -> int | None:
    """Least N such that the ball lower bound holds for every n in N..upto."""
    ok = [ball_lower_bound_check(n).holds for n in range(1, upto + 1)]
    if not ok[-1]:
        return None
    i = len(ok)
    while i > 0 and ok[i - 1]:
        i -= 1
    return i + 1


def gamma_membership(M: Mat2, k: int) -> bool:
    if k < 2:
        raise ValueError("k must be >= 2")
    return M.mod(k) == (1 % k, 0, 0, 1 % k)


def gamma_mask(entries: np.ndarray, k: int) -> np.ndarray:
    e = entries % k
    return (e[:, 0] == 1) & (e[:, 1] == 0) & (e[:, 2] == 0) & (e[:, 3] == 1)


@dataclass
class GammaCountReport:
    k: int
    n: int
    count: int
    bound: float
    holds: bool


def gamma_count_bound_check(k: int, n: int, ball: Sl2Ball | None = None) -> GammaCountReport:
    """|Γ(k) ∩ F_n| against (96 / k^2) n^2, valid for n >= k."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if n < k:
        raise ValueError(f"the count bound needs n >= k, got n={n} < k={k}")
    ball = ball if ball is not None and ball.n == n else enumerate_ball(n)
    count = int(gamma_mask(ball.entries, k).sum())
    bound = 96 / k ** 2 * n * n
    return GammaCountReport(k, n, count, bound, count <= bound)


@dataclass
class ComplementRow:
    n: int
    ball_size: int
    in_set: int
    ratio: float


@dataclass
class ComplementReport:
    moduli: tuple[int, ...]
    rows: list[ComplementRow]
    lower_bound: float


def congruence_complement_density(B: Sequence[int], n_range: Sequence[int]) -> ComplementReport:
    """Ratios |A ∩ F_n| / |F_n| for A = SL2(Z) minus the union of Γ(b)."""
    B = tuple(int(b) for b in B)
    for i, j in itertools.combinations(range(len(B)), 2):
        if math.gcd(B[i], B[j]) != 1:
            raise ValueError(f"{B[i]} and {B[j]} are not coprime")
    if any(b < 2 for b in B):
        raise ValueError("moduli must be >= 2")
    rows = []
    for n in n_range:
        ball = enumerate_ball(n)
        hit = np.zeros(len(ball), dtype=bool)
        for b in B:
            hit |= gamma_mask(ball.entries, b)
        inside = int((~hit).sum())
        rows.append(ComplementRow(n, len(ball), inside, inside / len(ball)))
    bound = 1 - sum(8 * math.pi ** 2 / b ** 2 for b in B)
    return ComplementReport(B, rows, bound)


def _radical_outside(a: int, b: int) -> int:
    """Product of the primes dividing a but not b (trial division)."""
    a = abs(a)
    q = 1
    p = 2
    while p * p <= a:
        if a % p == 0:
            if b % p:
                q *= p
            while a % p == 0:
                a //= p
        p += 1
    if a > 1 and b % a:
        q *= a
    return q


def crt_split(T: Sequence[int] | Mat2, m: int, n: int) -> Mat2:
    """S in SL2(Z) with S ≡ T mod m and S ≡ I mod n.

    ``T`` is (a, b, c, d) with ad - bc ≡ 1 mod m. Blend T and I with
    mx + ny = 1, make the top row coprime by adding mnq to b', then fix
    the determinant with a multiple of mn on the bottom row. Python ints
    are unbounded, so intermediate growth cannot overflow.
    """
    if m < 2 or n < 2 or math.gcd(m, n) != 1:
        raise ValueError("m and n must be coprime and >= 2")
    a, b, c, d = (T.a, T.b, T.c, T.d) if isinstance(T, Mat2) else map(int, T)
    if (a * d - b * c - 1) % m:
        raise ValueError("T does not have determinant 1 mod m")
    mn = m * n
    _, x, y = _egcd(m, n)  # m x + n y = 1
    a1 = m * x + a * n * y
    b1 = b * n * y
    c1 = c * n * y
    d1 = m * x + d * n * y
    # a1 ≡ 1 mod n, so a1 != 0 and q below is well defined
    q = _radical_outside(a1, b1)
    b2 = b1 + mn * q
    g, u, v = _egcd(a1, b2)
    if g != 1:
        raise ConstructionError(f"top row ({a1}, {b2}) is not coprime")
    det = a1 * d1 - b2 * c1
    if (det - 1) % mn:
        raise ConstructionError("blended determinant is not 1 mod mn")
    s = (det - 1) // mn
    # a1 u + b2 v = 1, so this lowers the determinant by exactly s*mn
    c2 = c1 + mn * s * v
    d2 = d1 - mn * s * u
    S = Mat2(a1, b2, c2, d2)
    if S.mod(m) != (a % m, b % m, c % m, d % m) or S.mod(n) != (1 % n, 0, 0, 1 % n):
        raise ConstructionError("split failed its congruence verification")
    return S
