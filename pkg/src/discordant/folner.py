"""Semigroup contexts, Følner windows and window density estimation.

Every built-in window is an integer box, so windows are stored by their
per-coordinate bounds and materialized lazily (whole, or in chunks of rows).
Elements of scalar contexts (``nat``, ``int``) are plain ints; everything
else is a tuple of ints.
"""
from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Iterator, Sequence

import numpy as np

from .errors import ConfigurationError

Element = Any


class Kind(enum.Enum):
    NAT = "nat"
    INT = "int"
    LATTICE = "lattice"
    HEISENBERG = "heisenberg"
    FREE = "free"


@dataclass(frozen=True)
class GroupContext:
    """A countable cancellative semigroup with an integer-tuple encoding.

    ``nat`` is the additive monoid {0, 1, 2, ...}; its Følner windows are
    {1..n}. The Heisenberg group uses triples (a, b, c) with product
    (a1 + a2, b1 + b2, a1*b2 + c1 + c2).
    """

    kind: Kind
    dim: int = 1
    alphabet: str = ""

    @classmethod
    def nat(cls) -> "GroupContext":
        return cls(Kind.NAT)

    @classmethod
    def integers(cls) -> "GroupContext":
        return cls(Kind.INT)

    @classmethod
    def lattice(cls, d: int) -> "GroupContext":
        if d < 1:
            raise ConfigurationError(f"lattice dimension must be >= 1, got {d}")
        return cls(Kind.INT) if d == 1 else cls(Kind.LATTICE, dim=d)

    @classmethod
    def heisenberg(cls) -> "GroupContext":
        return cls(Kind.HEISENBERG, dim=3)

    @classmethod
    def free_words(cls, alphabet: str = "ab") -> "GroupContext":
        if len(set(alphabet)) != len(alphabet) or not alphabet:
            raise ConfigurationError("alphabet must be nonempty with distinct letters")
        return cls(Kind.FREE, dim=0, alphabet=alphabet)

    @property
    def name(self) -> str:
        if self.kind is Kind.LATTICE:
            return f"Z^{self.dim}"
        if self.kind is Kind.FREE:
            return f"free({self.alphabet})"
        return {"nat": "N", "int": "Z", "heisenberg": "H3(Z)"}[self.kind.value]

    @property
    def scalar(self) -> bool:
        return self.kind in (Kind.NAT, Kind.INT)

    @property
    def rank(self) -> int:
        """Number of integer coordinates per encoded element."""
        if self.scalar or self.kind is Kind.FREE:
            return 1
        return self.dim

    @property
    def commutative(self) -> bool:
        return self.kind in (Kind.NAT, Kind.INT, Kind.LATTICE)

    @property
    def identity(self) -> Element:
        if self.scalar:
            return 0
        if self.kind is Kind.FREE:
            return ""
        return (0,) * self.dim

    def op(self, g: Element, h: Element) -> Element:
        k = self.kind
        if k is Kind.NAT or k is Kind.INT:
            return g + h
        if k is Kind.LATTICE:
            return tuple(x + y for x, y in zip(g, h))
        if k is Kind.HEISENBERG:
            a1, b1, c1 = g
            a2, b2, c2 = h
            return (a1 + a2, b1 + b2, a1 * b2 + c1 + c2)
        return g + h

    def is_element(self, g: Element) -> bool:
        k = self.kind
        if k is Kind.NAT:
            return isinstance(g, (int, np.integer)) and g >= 0
        if k is Kind.INT:
            return isinstance(g, (int, np.integer))
        if k is Kind.FREE:
            return isinstance(g, str) and set(g) <= set(self.alphabet)
        return isinstance(g, tuple) and len(g) == self.dim

    # -- encoding -------------------------------------------------------
    def encode(self, g: Element) -> tuple[int, ...]:
        if not self.is_element(g):
            raise ConfigurationError(f"{g!r} is not an element of {self.name}")
        if self.scalar:
            return (int(g),)
        if self.kind is Kind.FREE:
            # bijective base-k numeral: shortlex order, "" -> 0
            k = len(self.alphabet)
            idx = 0
            for ch in g:
                idx = idx * k + self.alphabet.index(ch) + 1
            return (idx,)
        return tuple(int(x) for x in g)

    def decode(self, code: Sequence[int]) -> Element:
        if self.scalar:
            return int(code[0])
        if self.kind is Kind.FREE:
            k = len(self.alphabet)
            idx = int(code[0])
            if idx < 0:
                raise ConfigurationError("negative word index")
            letters = []
            while idx > 0:
                idx, r = divmod(idx - 1, k)
                letters.append(self.alphabet[r])
            return "".join(reversed(letters))
        return tuple(int(x) for x in code)

    # -- vectorized translation on encoded rows --------------------------
    def left_translate(self, g: Element, X: np.ndarray) -> np.ndarray:
        """Rows of ``op(g, x)`` for encoded rows ``x`` of ``X``."""
        k = self.kind
        if self.scalar:
            return X + g
        if k is Kind.LATTICE:
            return X + np.asarray(g, dtype=np.int64)
        if k is Kind.HEISENBERG:
            a, b, c = g
            return np.stack([X[:, 0] + a, X[:, 1] + b, a * X[:, 1] + X[:, 2] + c], axis=1)
        raise ConfigurationError(f"no vectorized translation for {self.name}")

    def right_translate(self, X: np.ndarray, g: Element) -> np.ndarray:
        """Rows of ``op(x, g)``."""
        if self.kind is Kind.HEISENBERG:
            a, b, c = g
            return np.stack([X[:, 0] + a, X[:, 1] + b, X[:, 0] * b + X[:, 2] + c], axis=1)
        return self.left_translate(g, X)

    def row_to_element(self, row) -> Element:
        if self.scalar:
            return int(row)
        return tuple(int(v) for v in row)


@dataclass(frozen=True)
class FolnerWindow:
    """An integer box Φ_n, stored by inclusive per-coordinate bounds."""

    ctx: GroupContext
    index: int
    lows: tuple[int, ...]
    highs: tuple[int, ...]

    @property
    def size(self) -> int:
        return math.prod(h - l + 1 for l, h in zip(self.lows, self.highs))

    def __len__(self) -> int:
        return self.size

    @property
    def bounds(self) -> tuple[int, int]:
        if len(self.lows) != 1:
            raise ConfigurationError("bounds are only defined for scalar windows")
        return self.lows[0], self.highs[0]

    def contains_batch(self, X: np.ndarray) -> np.ndarray:
        if X.ndim == 1:
            return (X >= self.lows[0]) & (X <= self.highs[0])
        lo = np.asarray(self.lows)
        hi = np.asarray(self.highs)
        return np.all((X >= lo) & (X <= hi), axis=1)

    def __contains__(self, g: Element) -> bool:
        code = self.ctx.encode(g)
        return all(l <= c <= h for c, l, h in zip(code, self.lows, self.highs))

    def chunks(self, max_rows: int = 1 << 20) -> Iterator[np.ndarray]:
        """Yield the window's encoded rows in deterministic order."""
        if len(self.lows) == 1:
            lo, hi = self.bounds
            for start in range(lo, hi + 1, max_rows):
                yield np.arange(start, min(hi, start + max_rows - 1) + 1, dtype=np.int64)
            return
        tail = [np.arange(l, h + 1, dtype=np.int64) for l, h in zip(self.lows[1:], self.highs[1:])]
        grids = np.meshgrid(*tail, indexing="ij")
        rest = np.stack([g.ravel() for g in grids], axis=1)
        per_slice = max(1, max_rows // len(rest))
        firsts = np.arange(self.lows[0], self.highs[0] + 1, dtype=np.int64)
        for start in range(0, len(firsts), per_slice):
            block = firsts[start:start + per_slice]
            head = np.repeat(block, len(rest))[:, None]
            yield np.concatenate([head, np.tile(rest, (len(block), 1))], axis=1)

    def array(self) -> np.ndarray:
        parts = list(self.chunks(max(self.size, 1)))
        return parts[0] if len(parts) == 1 else np.concatenate(parts)

    @cached_property
    def elements(self) -> list:
        arr = self.array()
        return [self.ctx.row_to_element(r) for r in arr]


def folner_window(ctx: GroupContext, n: int) -> FolnerWindow:
    """Return the n-th built-in Følner window of ``ctx``.

    {1..n} for N, {-n..n} for Z, {-n..n}^d for Z^d, and for the Heisenberg
    group the box a, b in [-n, n], c in [-n^2, n^2] (the wide range sits on
    the coordinate that absorbs the a1*b2 cross term).
    """
    if n < 1:
        raise ValueError(f"window index must be >= 1, got {n}")
    k = ctx.kind
    if k is Kind.NAT:
        return FolnerWindow(ctx, n, (1,), (n,))
    if k is Kind.INT:
        return FolnerWindow(ctx, n, (-n,), (n,))
    if k is Kind.LATTICE:
        return FolnerWindow(ctx, n, (-n,) * ctx.dim, (n,) * ctx.dim)
    if k is Kind.HEISENBERG:
        return FolnerWindow(ctx, n, (-n, -n, -n * n), (n, n, n * n))
    raise ConfigurationError(f"{ctx.name} has no built-in Følner sequence")


def folner_defect(ctx: GroupContext, g: Element, n: int) -> float:
    """|Φ_n △ gΦ_n| / |Φ_n| with gΦ_n = {op(g, x) : x in Φ_n}."""
    ctx.encode(g)
    window = folner_window(ctx, n)
    inside = 0
    for chunk in window.chunks():
        inside += int(window.contains_batch(ctx.left_translate(g, chunk)).sum())
    # left translation is injective, so |gΦ| = |Φ|
    return 2 * (window.size - inside) / window.size


# ---------------------------------------------------------------------------
# membership oracles


@dataclass(frozen=True)
class SetOracle:
    """A pure membership predicate for a subset of a semigroup.

    ``batch`` evaluates encoded rows at once; ``interval`` returns the mask
    of a scalar range lo..hi (inclusive) and is used for sieving. Either
    may be absent, in which case ``contains`` is called per element.
    ``ambiguous`` flags rows whose classification sits inside a numeric
    error budget; such rows are reported separately by density reports.
    """

    contains: Callable[[Element], bool]
    label: str
    known_density: float | None = None
    batch: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False)
    interval: Callable[[int, int], np.ndarray] | None = field(default=None, compare=False)
    ambiguous: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False)

    def __call__(self, g: Element) -> bool:
        return bool(self.contains(g))

    def mask(self, X: np.ndarray) -> np.ndarray:
        if self.batch is not None:
            return np.asarray(self.batch(X), dtype=bool)
        if X.ndim == 1:
            return np.fromiter((self.contains(int(x)) for x in X), dtype=bool, count=len(X))
        return np.fromiter((self.contains(tuple(int(v) for v in r)) for r in X), dtype=bool, count=len(X))

    def interval_mask(self, lo: int, hi: int) -> np.ndarray:
        if self.interval is not None:
            return np.asarray(self.interval(lo, hi), dtype=bool)
        return self.mask(np.arange(lo, hi + 1, dtype=np.int64))

    def complement(self) -> "SetOracle":
        d = None if self.known_density is None else 1.0 - self.known_density
        return SetOracle(
            contains=lambda g: not self.contains(g),
            label=f"complement({self.label})",
            known_density=d,
            batch=None if self.batch is None else (lambda X: ~self.mask(X)),
            interval=None if self.interval is None else (lambda lo, hi: ~self.interval_mask(lo, hi)),
        )

    def __invert__(self) -> "SetOracle":
        return self.complement()

    def union(self, other: "SetOracle") -> "SetOracle":
        return _combine(self, other, np.logical_or, any, "∪")

    def intersection(self, other: "SetOracle") -> "SetOracle":
        return _combine(self, other, np.logical_and, all, "∩")

    __or__ = union
    __and__ = intersection


def _combine(a: SetOracle, b: SetOracle, vec, scalar, sym: str) -> SetOracle:
    fast = a.batch is not None or b.batch is not None
    ranged = a.interval is not None or b.interval is not None
    return SetOracle(
        contains=lambda g: scalar((a.contains(g), b.contains(g))),
        label=f"({a.label} {sym} {b.label})",
        batch=(lambda X: vec(a.mask(X), b.mask(X))) if fast else None,
        interval=(lambda lo, hi: vec(a.interval_mask(lo, hi), b.interval_mask(lo, hi))) if ranged else None,
    )


def whole(label: str = "G") -> SetOracle:
    return SetOracle(
        contains=lambda g: True,
        label=label,
        known_density=1.0,
        batch=lambda X: np.ones(len(X), dtype=bool),
        interval=lambda lo, hi: np.ones(hi - lo + 1, dtype=bool),
    )


def empty(label: str = "∅") -> SetOracle:
    return SetOracle(
        contains=lambda g: False,
        label=label,
        known_density=0.0,
        batch=lambda X: np.zeros(len(X), dtype=bool),
        interval=lambda lo, hi: np.zeros(hi - lo + 1, dtype=bool),
    )


def residue_class(m: int, r: int = 0) -> SetOracle:
    """{x : x ≡ r mod m} in a scalar context."""
    if m < 1:
        raise ValueError("modulus must be positive")
    r %= m

    def batch(X):
        if X.ndim != 1:
            raise ConfigurationError("residue classes live in scalar contexts")
        return X % m == r

    return SetOracle(
        contains=lambda x: x % m == r,
        label=f"{m}Z+{r}" if r else f"{m}Z",
        known_density=1.0 / m,
        batch=batch,
        interval=lambda lo, hi: np.arange(lo, hi + 1, dtype=np.int64) % m == r,
    )


def evens() -> SetOracle:
    return residue_class(2, 0)


def shift_oracle(oracle: SetOracle, ctx: GroupContext, g: Element) -> SetOracle:
    """The preimage g⁻¹A = {x : op(g, x) ∈ A}."""
    ctx.encode(g)
    batch = None
    interval = None
    if oracle.batch is not None or ctx.kind is not Kind.FREE:
        batch = lambda X: oracle.mask(ctx.left_translate(g, X))
    if ctx.scalar:
        interval = lambda lo, hi: oracle.interval_mask(lo + g, hi + g)
    return SetOracle(
        contains=lambda x: oracle.contains(ctx.op(g, x)),
        label=f"{g}^-1·{oracle.label}",
        known_density=oracle.known_density,
        batch=batch,
        interval=interval,
    )


# ---------------------------------------------------------------------------
# density estimation


@dataclass
class DensityReport:
    """Exact window counts with tail-half limsup / liminf estimates."""

    label: str
    ratios: list[tuple[int, float]]
    counts: list[int]
    sizes: list[int]
    upper: float
    lower: float
    known_density: float | None = None
    ambiguous: list[int] | None = None

    @property
    def upper_estimate(self) -> float:
        return self.upper

    @property
    def lower_estimate(self) -> float:
        return self.lower

    def rows(self) -> list[dict]:
        out = []
        for i, (n, r) in enumerate(self.ratios):
            row = {"n": n, "count": self.counts[i], "size": self.sizes[i], "ratio": r}
            if self.known_density is not None:
                row["known_density"] = self.known_density
                row["abs_diff"] = abs(r - self.known_density)
            if self.ambiguous is not None:
                row["ambiguous"] = self.ambiguous[i]
            out.append(row)
        return out


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("DISCORDANT_THREADS", "1")))
    except ValueError:
        return 1


def count_in_window(oracle: SetOracle, window: FolnerWindow, workers: int | None = None) -> tuple[int, int]:
    """Return (|A ∩ Φ|, number of ambiguous rows) by exact counting."""
    if len(window.lows) == 1 and oracle.interval is not None and oracle.ambiguous is None:
        lo, hi = window.bounds
        return int(oracle.interval_mask(lo, hi).sum()), 0

    def work(chunk: np.ndarray) -> tuple[int, int]:
        hits = int(oracle.mask(chunk).sum())
        amb = 0 if oracle.ambiguous is None else int(np.asarray(oracle.ambiguous(chunk)).sum())
        return hits, amb

    workers = workers or default_workers()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, window.chunks()))
    else:
        parts = [work(c) for c in window.chunks()]
    return sum(p[0] for p in parts), sum(p[1] for p in parts)


def density_report(
    oracle: SetOracle,
    ctx: GroupContext,
    n_range: Sequence[int],
    workers: int | None = None,
) -> DensityReport:
    """Count |A ∩ Φ_n| / |Φ_n| for every n in ``n_range``.

    The upper (lower) estimate is the max (min) ratio over the last
    ceil(len/2) requested windows.
    """
    n_range = list(n_range)
    if not n_range:
        raise ValueError("n_range must be nonempty")
    if any(b <= a for a, b in zip(n_range, n_range[1:])):
        raise ValueError("n_range must be strictly increasing")
    ratios, counts, sizes, amb = [], [], [], []
    for n in n_range:
        window = folner_window(ctx, n)
        c, a = count_in_window(oracle, window, workers)
        counts.append(c)
        sizes.append(window.size)
        amb.append(a)
        ratios.append((n, c / window.size))
    tail = [r for _, r in ratios[len(ratios) // 2:]]
    return DensityReport(
        label=oracle.label,
        ratios=ratios,
        counts=counts,
        sizes=sizes,
        upper=max(tail),
        lower=min(tail),
        known_density=oracle.known_density,
        ambiguous=amb if oracle.ambiguous is not None else None,
    )
