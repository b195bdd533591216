"""Binary configurations on a group and the shift action on them.

A configuration is a lazy map G -> {0, 1}, usually the indicator of a set.
The shift acts by right translation, (g·alpha)(x) = alpha(op(x, g)), which
satisfies g·(h·alpha) = op(g, h)·alpha. Most statistics here run in the
scalar contexts N and Z, where a configuration is read off as a uint8
array over an interval.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .errors import ConfigurationError
from .folner import GroupContext, Kind, SetOracle, folner_window

DEFAULT_SEED = 0x5EED_2024_C0FF_EE11
_GAMMA = 0x9E3779B97F4A7C15


@dataclass(frozen=True)
class BinaryConfig:
    ctx: GroupContext
    eval: Callable[[Any], int]
    label: str = "alpha"
    batch: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False)
    log: Any = field(default=None, compare=False)

    def __call__(self, g) -> int:
        return int(self.eval(g))

    def on(self, X: np.ndarray) -> np.ndarray:
        """Values on encoded rows, as uint8."""
        if self.batch is not None:
            return np.asarray(self.batch(X), dtype=np.uint8)
        if X.ndim == 1:
            return np.fromiter((self.eval(int(x)) for x in X), dtype=np.uint8, count=len(X))
        return np.fromiter((self.eval(tuple(int(v) for v in r)) for r in X), dtype=np.uint8, count=len(X))

    def values(self, lo: int, hi: int) -> np.ndarray:
        """alpha(lo), ..., alpha(hi) in a scalar context."""
        return self.on(np.arange(lo, hi + 1, dtype=np.int64))

    def to_oracle(self) -> SetOracle:
        return SetOracle(contains=lambda g: bool(self.eval(g)), label=f"supp({self.label})",
                         batch=lambda X: self.on(X).astype(bool))

    @classmethod
    def from_oracle(cls, oracle: SetOracle, ctx: GroupContext) -> "BinaryConfig":
        return cls(ctx, lambda g: int(oracle.contains(g)), f"1_{oracle.label}",
                   batch=lambda X: oracle.mask(X).astype(np.uint8))

    @classmethod
    def constant(cls, ctx: GroupContext, bit: int) -> "BinaryConfig":
        return cls(ctx, lambda g: bit, f"const{bit}",
                   batch=lambda X: np.full(len(X), bit, dtype=np.uint8))

    @classmethod
    def from_window(cls, bits: Sequence[int], ctx: GroupContext | None = None, periodic: bool = True) -> "BinaryConfig":
        """A scalar config from a finite word, repeated or padded with 0s."""
        w = np.asarray(bits, dtype=np.uint8)
        L = len(w)
        if periodic:
            return cls(ctx or GroupContext.integers(), lambda x: int(w[x % L]), "periodic",
                       batch=lambda X: w[X % L])
        return cls(ctx or GroupContext.integers(), lambda x: int(w[x]) if 0 <= x < L else 0, "window",
                   batch=lambda X: np.where((X >= 0) & (X < L), w[np.clip(X, 0, L - 1)], 0).astype(np.uint8))


def _scalar(ctx: GroupContext):
    if not ctx.scalar:
        raise ConfigurationError(f"this operation supports N and Z, not {ctx.name}")


def shift_config(alpha: BinaryConfig, g) -> BinaryConfig:
    """(g·alpha)(x) = alpha(op(x, g))."""
    ctx = alpha.ctx
    ctx.encode(g)
    if ctx.kind is Kind.FREE:
        return BinaryConfig(ctx, lambda x: alpha.eval(ctx.op(x, g)), f"{g}·{alpha.label}")
    return BinaryConfig(ctx, lambda x: alpha.eval(ctx.op(x, g)), f"{g}·{alpha.label}",
                        batch=lambda X: alpha.on(ctx.right_translate(X, g)))


# ---------------------------------------------------------------------------
# patterns


@dataclass(frozen=True)
class CylinderPattern:
    """alpha is 1 on ``ones`` and 0 on ``zeros``."""

    ones: frozenset
    zeros: frozenset

    def __post_init__(self):
        object.__setattr__(self, "ones", frozenset(self.ones))
        object.__setattr__(self, "zeros", frozenset(self.zeros))
        if self.ones & self.zeros:
            raise ValueError("pattern supports overlap")

    @classmethod
    def word(cls, bits: str | Sequence[int]) -> "CylinderPattern":
        bits = [int(b) for b in bits]
        return cls(frozenset(i for i, b in enumerate(bits) if b), frozenset(i for i, b in enumerate(bits) if not b))

    @property
    def support(self) -> list:
        return sorted(self.ones | self.zeros)

    def as_word(self) -> str | None:
        """The bit string when the support is {0, ..., k-1}."""
        s = self.support
        if s != list(range(len(s))):
            return None
        return "".join("1" if i in self.ones else "0" for i in s)


@dataclass(frozen=True)
class WordPattern:
    """A finite shape K with a prescribed bit for each element."""

    K: tuple
    omega: tuple[int, ...]

    def __post_init__(self):
        if len(self.K) != len(self.omega) or len(set(self.K)) != len(self.K):
            raise ValueError("omega must give one bit per distinct element of K")

    @classmethod
    def of(cls, bits: str, start: int = 0) -> "WordPattern":
        return cls(tuple(range(start, start + len(bits))), tuple(int(b) for b in bits))

    def pattern(self) -> CylinderPattern:
        return CylinderPattern({k for k, w in zip(self.K, self.omega) if w},
                               {k for k, w in zip(self.K, self.omega) if not w})


def cylinder_match(alpha: BinaryConfig, p: CylinderPattern, g) -> bool:
    """alpha is 1 on L1·g and 0 on L2·g."""
    op = alpha.ctx.op
    return all(alpha(op(l, g)) == 1 for l in p.ones) and all(alpha(op(l, g)) == 0 for l in p.zeros)


def word_catalog(max_len: int) -> list[CylinderPattern]:
    """All binary words of length 1..max_len as patterns on {0..k-1}."""
    return [CylinderPattern.word(bits) for k in range(1, max_len + 1)
            for bits in itertools.product((0, 1), repeat=k)]


def _window_codes(a: np.ndarray, k: int) -> np.ndarray:
    """Integer code of a[g:g+k] (bit i at position i) for every start g."""
    n = len(a) - k + 1
    if n <= 0:
        return np.zeros(0, dtype=np.int64)
    codes = np.zeros(n, dtype=np.int64)
    for i in range(k):
        codes |= a[i:i + n].astype(np.int64) << i
    return codes


def _first_occurrences(a: np.ndarray, k: int) -> dict[int, int]:
    codes = _window_codes(a, k)
    vals, idx = np.unique(codes, return_index=True)
    return dict(zip(vals.tolist(), idx.tolist()))


def _pattern_offsets(a: np.ndarray, p: CylinderPattern) -> np.ndarray:
    """Starts g (offsets into a) where the pattern matches, support shifted to min 0."""
    s = p.support
    lo, span = s[0], s[-1] - s[0] + 1
    n = len(a) - span + 1
    if n <= 0:
        return np.zeros(0, dtype=np.int64)
    ok = np.ones(n, dtype=bool)
    for l in p.ones:
        ok &= a[l - lo:l - lo + n] == 1
    for l in p.zeros:
        ok &= a[l - lo:l - lo + n] == 0
    return np.flatnonzero(ok)


@dataclass
class ScanResult:
    pattern: CylinderPattern
    witness: int | None


def disjunctivity_scan(alpha: BinaryConfig, catalog: Sequence[CylinderPattern], search_bound: int) -> list[ScanResult]:
    """Least g in 0..search_bound-1 with cylinder_match(alpha, p, g), per pattern."""
    _scalar(alpha.ctx)
    if not catalog:
        return []
    lo_s = min(min(p.support) for p in catalog)
    hi_s = max(max(p.support) for p in catalog)
    base = lo_s
    a = alpha.values(base, search_bound - 1 + hi_s)
    # offset j in a stands for element base + j; pattern at g reads a[g + l - base]
    by_len: dict[int, dict[int, int]] = {}
    out = []
    for p in catalog:
        w = p.as_word()
        if w is not None and base == 0:
            k = len(w)
            if k not in by_len:
                by_len[k] = _first_occurrences(a, k)
            code = sum(1 << i for i, b in enumerate(w) if b == "1")
            g = by_len[k].get(code)
        else:
            offs = _pattern_offsets(a, p)
            # offset o matches support min at element base + o, so g = base + o - min(support)
            gs = offs + base - min(p.support)
            gs = gs[gs >= 0]
            g = int(gs[0]) if len(gs) else None
        out.append(ScanResult(p, g if g is not None and g < search_bound else None))
    return out


# ---------------------------------------------------------------------------
# disjunctive generator


def _block_start(k: int, d: int = 1) -> int:
    """Offset of the region holding all words on the box {0..k-1}^d."""
    return sum(j * 2 ** (j ** d) for j in range(1, k))


@dataclass
class PlacementLog:
    """Where the generator wrote each pattern on the box {0..k-1}^d."""

    d: int

    def offset(self, p: CylinderPattern) -> Any:
        if self.d == 1:
            w = p.as_word()
            if w is None:
                raise ValueError("placements are recorded for words on {0..k-1}")
            k = len(w)
            return _block_start(k) + int(w, 2) * k
        raise ValueError("use offset_box for lattice placements")

    def offset_box(self, bits: Sequence[int], k: int) -> tuple:
        idx = int("".join(str(int(b)) for b in bits), 2)
        return (_block_start(k, self.d) + idx * k,) + (0,) * (self.d - 1)

    def entries(self, max_len: int) -> list[tuple[CylinderPattern, int]]:
        return [(p, self.offset(p)) for p in word_catalog(max_len)]


def _champernowne_bits(x: np.ndarray) -> np.ndarray:
    """Bit x of the concatenation of all words of length 1, 2, ... (lex order, MSB first)."""
    x = np.asarray(x, dtype=np.int64)
    out = np.zeros(len(x), dtype=np.uint8)
    if not len(x):
        return out
    top = int(x.max())
    starts = [0]
    k = 1
    while starts[-1] <= top:
        starts.append(starts[-1] + k * 2 ** k)
        k += 1
    starts_arr = np.array(starts, dtype=np.int64)
    valid = x >= 0
    xv = x[valid]
    kk = np.searchsorted(starts_arr, xv, side="right")  # block k has index k
    off = xv - starts_arr[kk - 1]
    word = off // kk
    pos = off % kk
    out[valid] = ((word >> (kk - 1 - pos)) & 1).astype(np.uint8)
    return out


def _box_bits(X: np.ndarray, d: int) -> np.ndarray:
    """Lattice version: word-boxes laid out along the first axis."""
    out = np.zeros(len(X), dtype=np.uint8)
    first = X[:, 0]
    rest = X[:, 1:]
    for i, row in enumerate(X):
        x0 = int(first[i])
        if x0 < 0:
            continue
        k = 1
        while _block_start(k + 1, d) <= x0:
            k += 1
        off = x0 - _block_start(k, d)
        w, c0 = divmod(off, k)
        coords = (c0,) + tuple(int(v) for v in rest[i])
        if any(not 0 <= c < k for c in coords[1:]):
            continue
        # bit order: box cells in lexicographic order of coordinates, MSB first
        cell = 0
        for c in coords:
            cell = cell * k + c
        out[i] = (w >> (k ** d - 1 - cell)) & 1
    return out


def disjunctive_generator(ctx: GroupContext) -> BinaryConfig:
    """A disjunctive configuration built by placing every pattern once.

    In N and Z the words of length k occupy consecutive disjoint slots from
    offset sum_{j<k} j 2^j, in lexicographic order; negative positions are
    0. In Z^d the same is done with every 0/1 filling of the box
    {0..k-1}^d, boxes laid along the first axis.
    """
    if ctx.scalar:
        return BinaryConfig(ctx, lambda x: int(_champernowne_bits(np.array([x]))[0]), "disjunctive",
                            batch=_champernowne_bits, log=PlacementLog(1))
    if ctx.kind is Kind.LATTICE:
        d = ctx.dim
        return BinaryConfig(ctx, lambda v: int(_box_bits(np.array([v]), d)[0]), f"disjunctive-Z^{d}",
                            batch=lambda X: _box_bits(X, d), log=PlacementLog(d))
    raise ConfigurationError(f"no disjunctive generator for {ctx.name}")


# ---------------------------------------------------------------------------
# packings and word frequencies


@dataclass
class PackingFamily:
    K: tuple
    window: tuple[int, int]
    packing: list[int]
    upper_bound: int
    exact: bool

    def valid(self) -> bool:
        lo, hi = self.window
        cells = [k + y for y in self.packing for k in self.K]
        return len(cells) == len(set(cells)) and all(lo <= c <= hi for c in cells)


def _is_interval(K: Sequence[int]) -> bool:
    s = sorted(K)
    return s == list(range(s[0], s[0] + len(s)))


def packings(K: Sequence[int], lo: int, hi: int, phases: int | None = None) -> list[PackingFamily]:
    """Maximum packings of translates K + y inside lo..hi.

    Interval shapes get every phase-shifted greedy packing that attains the
    maximum count (exact). Other shapes get one greedy left-to-right
    packing together with the bound |window| / |K|.
    """
    K = tuple(sorted(int(k) for k in K))
    size = hi - lo + 1
    span = K[-1] - K[0] + 1
    bound = size // len(K)
    if _is_interval(K):
        best = size // span
        fams = []
        for p in range(span if phases is None else min(phases, span)):
            first = lo - K[0] + p
            count = (hi - (first + K[-1])) // span + 1 if first + K[-1] <= hi else 0
            if count == best and best > 0:
                fams.append(PackingFamily(K, (lo, hi), [first + t * span for t in range(count)], bound, True))
        return fams or [PackingFamily(K, (lo, hi), [], bound, True)]
    used = np.zeros(size, dtype=bool)
    Y = []
    offs = np.array(K) - K[0]
    for y in range(lo - K[0], hi - K[-1] + 1):
        cells = offs + (y + K[0] - lo)
        if not used[cells].any():
            used[cells] = True
            Y.append(y)
    return [PackingFamily(K, (lo, hi), Y, bound, False)]


@dataclass
class FrequencyDetail:
    n: int
    window: tuple[int, int]
    fractions: list[float]   # one per packing in the family
    packing_size: int
    upper_bound: int

    @property
    def value(self) -> float | None:
        return max(self.fractions) if self.fractions else None


def word_frequency_detail(alpha: BinaryConfig, K: Sequence[int], omega: Sequence[int], window_index: int) -> FrequencyDetail:
    _scalar(alpha.ctx)
    win = folner_window(alpha.ctx, window_index)
    lo, hi = win.bounds
    fams = packings(K, lo, hi)
    a = alpha.values(lo, hi)
    Ks = np.asarray(K, dtype=np.int64)
    om = np.asarray(omega, dtype=np.uint8)
    fr = []
    for fam in fams:
        if not fam.packing:
            continue
        Y = np.asarray(fam.packing, dtype=np.int64)
        vals = a[(Y[:, None] + Ks[None, :]) - lo]
        fr.append(float(np.all(vals == om, axis=1).mean()))
    size = len(fams[0].packing)
    return FrequencyDetail(window_index, (lo, hi), fr, size, fams[0].upper_bound)


def word_frequency(alpha: BinaryConfig, K: Sequence[int], omega: Sequence[int], window_index: int) -> float | None:
    """Matched fraction of K-translates over a maximum packing of the window.

    When several packings attain the maximum (phase shifts), the largest
    matched fraction is returned. None when no translate fits.
    """
    return word_frequency_detail(alpha, K, omega, window_index).value


@dataclass
class ENAStat:
    pattern: WordPattern
    upper: float
    lower: float
    per_window: list[tuple[int, float | None]]


def ena_statistics(alpha: BinaryConfig, catalog: Sequence[WordPattern], window_range: Iterable[int]) -> list[ENAStat]:
    """Max and min word frequency over the windows, per pattern."""
    window_range = list(window_range)
    out = []
    for wp in catalog:
        vals = [(n, word_frequency(alpha, wp.K, wp.omega, n)) for n in window_range]
        defined = [v for _, v in vals if v is not None]
        out.append(ENAStat(wp, max(defined, default=math.nan), min(defined, default=math.nan), vals))
    return out


@dataclass
class ENALog:
    indices: list[int]      # n_1 < n_2 < ...
    sparsity: int
    pattern: WordPattern

    def block_mode(self, k: int) -> str:
        return "match" if k % 2 == 0 else "nomatch"


def ena_indices(ctx: GroupContext, sparsity: int, count: int) -> list[int]:
    """Window indices with |Φ_{n_k}| >= s^k (|Φ_{n_1}| + ... + |Φ_{n_{k-1}}|).

    At most ``count`` indices; generation stops early below 2**62.
    """
    _scalar(ctx)
    size = (lambda n: n) if ctx.kind is Kind.NAT else (lambda n: 2 * n + 1)
    ns = [sparsity]
    while len(ns) < count:
        k = len(ns) + 1
        need = sparsity ** k * sum(size(n) for n in ns)
        n = need if ctx.kind is Kind.NAT else -(-(need - 1) // 2)
        if n >= 1 << 62:
            break  # further blocks lie beyond int64 positions
        ns.append(n)
    return ns


def ena_generator(ctx: GroupContext, sparsity: int, pattern: WordPattern | None = None, blocks: int = 12) -> BinaryConfig:
    """A configuration whose word frequency swings between ~1 and ~0.

    Block k is Φ_{n_k} minus Φ_{n_{k-1}}. Even blocks repeat omega along
    the interval packing of K that starts at the left end of Φ_{n_k}
    (cells of the packing period outside K get 0); odd blocks hold the constant
    1 - omega(min K), so no translate of K inside them matches.
    """
    if sparsity < 2:
        raise ValueError("sparsity must be >= 2")
    _scalar(ctx)
    wp = pattern or WordPattern.of("1")
    K = np.asarray(wp.K, dtype=np.int64)
    span = int(K.max() - K.min() + 1)
    tile = np.zeros(span, dtype=np.uint8)
    tile[K - K.min()] = wp.omega
    fill = 1 - wp.omega[int(np.argmin(K))]
    ns = ena_indices(ctx, sparsity, blocks)
    bounds = np.array(ns, dtype=np.int64)
    two_sided = ctx.kind is Kind.INT

    def batch(X):
        X = np.asarray(X, dtype=np.int64)
        r = np.abs(X) if two_sided else X
        if len(r) and int(r.max()) > ns[-1]:
            raise ConfigurationError(f"position beyond the last generated block n={ns[-1]}")
        k = np.searchsorted(bounds, r, side="left") + 1  # r <= n_1 is block 1
        out = np.full(len(X), fill, dtype=np.uint8)
        match = (k % 2 == 0)
        if match.any():
            # align the tiling with the packing that starts at the left end of Φ_{n_k}
            rel = X[match] + bounds[k[match] - 1] if two_sided else X[match] - 1
            out[match] = tile[rel % span]
        if not two_sided:
            out[X < 0] = 0
        return out

    return BinaryConfig(ctx, lambda x: int(batch(np.array([x]))[0]), f"ENA(s={sparsity})", batch=batch,
                        log=ENALog(ns, sparsity, wp))


# ---------------------------------------------------------------------------
# normality


def pseudorandom_bits(seed: int = DEFAULT_SEED, ctx: GroupContext | None = None) -> BinaryConfig:
    """Fair bits from splitmix64: bit x is the top bit of mix(seed + (x+1)·γ)."""
    s = np.uint64(seed % (1 << 64))

    def batch(X):
        with np.errstate(over="ignore"):
            z = s + (np.asarray(X, dtype=np.int64).astype(np.uint64) + np.uint64(1)) * np.uint64(_GAMMA)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
            z = z ^ (z >> np.uint64(31))
        return (z >> np.uint64(63)).astype(np.uint8)

    return BinaryConfig(ctx or GroupContext.nat(), lambda x: int(batch(np.array([x]))[0]), f"splitmix64({seed:#x})",
                        batch=batch)


@dataclass
class NormalRow:
    n: int
    word: str
    frequency: float
    target: float
    diff: float


@dataclass
class NormalReport:
    rows: list[NormalRow]
    max_diff: float
    tolerance: float

    @property
    def normal_on_windows(self) -> bool:
        return self.max_diff <= self.tolerance


def normal_statistics(alpha: BinaryConfig, K: Sequence[int], window_range: Iterable[int],
                      tolerance: float = 5e-3) -> NormalReport:
    """Sliding frequency of every omega in {0,1}^K per window, vs 2^-|K|.

    The count is |{g : K+g inside Φ_n and alpha(k+g) = omega(k)}| / |Φ_n|.
    """
    _scalar(alpha.ctx)
    K = sorted(int(k) for k in K)
    target = 2.0 ** -len(K)
    rows = []
    for n in window_range:
        lo, hi = folner_window(alpha.ctx, n).bounds
        a = alpha.values(lo, hi)
        size = hi - lo + 1
        offs = np.array(K) - K[0]
        m = size - (K[-1] - K[0])
        codes = np.zeros(max(m, 0), dtype=np.int64)
        for i, o in enumerate(offs):
            codes |= a[o:o + m].astype(np.int64) << i
        counts = np.bincount(codes, minlength=2 ** len(K))
        for c in range(2 ** len(K)):
            word = "".join(str((c >> i) & 1) for i in range(len(K)))
            f = counts[c] / size
            rows.append(NormalRow(n, word, float(f), target, abs(f - target)))
    return NormalReport(rows, max((r.diff for r in rows), default=0.0), tolerance)


# ---------------------------------------------------------------------------
# orbit-closure queries


def orbit_window_membership(beta: BinaryConfig, alpha: BinaryConfig, shape: Sequence[int], search_bound: int,
                            candidates: Iterable[int] | None = None) -> int | None:
    """Least g in 0..search_bound-1 with beta(x) = alpha(x + g) for x in shape.

    With ``candidates`` the listed g are tried in order instead, and the
    first agreeing one is returned.
    """
    _scalar(alpha.ctx)
    shape = sorted(int(x) for x in shape)
    want = beta.on(np.array(shape, dtype=np.int64))
    if candidates is not None:
        for g in candidates:
            if np.array_equal(alpha.on(np.array(shape, dtype=np.int64) + g), want):
                return int(g)
        return None
    a = alpha.values(shape[0], search_bound - 1 + shape[-1])
    m = search_bound
    ok = np.ones(m, dtype=bool)
    for x, w in zip(shape, want):
        ok &= a[x - shape[0]:x - shape[0] + m] == w
    hits = np.flatnonzero(ok)
    return int(hits[0]) if len(hits) else None


@dataclass
class ExtractionReport:
    status: str              # "stabilized" or "inconclusive"
    H: tuple | None
    window: list[int] | None
    max_gap: int | None
    anchor: int | None
    class_sizes: list[int]
    candidates: int
    coverage: float


def _max_gap(bits: np.ndarray) -> int:
    """Longest run of zeros plus one (1 for all-ones, len+1 for all-zeros)."""
    z = (bits == 0)
    if not z.any():
        return 1
    padded = np.concatenate(([0], z.astype(np.int8), [0]))
    e = np.flatnonzero(np.diff(padded))
    return int((e[1::2] - e[::2]).max()) + 1


def syndetic_extraction(alpha: BinaryConfig, length: int, search_bound: int, h_budget: int = 6) -> ExtractionReport:
    """Replay the pigeonhole that pulls a syndetic point out of a PS orbit.

    For H = {0..h-1}, h = 1..h_budget, collect all g < search_bound whose
    window g..g+length-1 lies inside H^-1 supp(alpha). Then refine by the
    pattern of alpha on g..g+m for m = 1..length, keeping the most common
    class each time (earliest on ties). The survivor's window is the
    extracted pattern; by construction its gaps are at most h.
    """
    _scalar(alpha.ctx)
    a = alpha.values(0, search_bound + length + h_budget)
    coverage = 0.0
    for h in range(1, h_budget + 1):
        m = len(a) - h + 1
        cov = np.zeros(m, dtype=bool)
        for j in range(h):
            cov |= a[j:j + m] == 1
        coverage = float(cov[:search_bound].mean())
        c = np.concatenate(([0], np.cumsum(cov.astype(np.int64))))
        g = np.arange(search_bound)
        good = g[(g + length <= m) & (c[np.minimum(g + length, m)] - c[g] == length)]
        if not len(good):
            continue
        cls = good
        sizes = []
        for depth in range(1, length + 1):
            keys = Counter(a[x:x + depth].tobytes() for x in cls.tolist())
            best = max(keys.values())
            # earliest member among the most common classes
            winner = next(a[x:x + depth].tobytes() for x in cls.tolist() if keys[a[x:x + depth].tobytes()] == best)
            cls = np.array([x for x in cls.tolist() if a[x:x + depth].tobytes() == winner])
            sizes.append(len(cls))
        anchor = int(cls[0])
        win = a[anchor:anchor + length]
        return ExtractionReport("stabilized", tuple(range(h)), win.tolist(), _max_gap(win), anchor, sizes,
                                len(good), coverage)
    return ExtractionReport("inconclusive", None, None, None, None, [], 0, coverage)


@dataclass
class GapRow:
    pattern: CylinderPattern
    occurrences: int
    max_gap_half: int | None
    max_gap_full: int | None
    classification: str


def _occurrence_gap(occ: np.ndarray, lo: int, hi: int) -> int | None:
    if not len(occ):
        return None
    pts = np.concatenate(([lo - 1], occ, [hi + 1]))
    return int(np.diff(pts).max())


def minimal_orbit_gap_report(alpha: BinaryConfig, catalog: Sequence[CylinderPattern], window_index: int) -> list[GapRow]:
    """Occurrence sets {g in Φ_n : g·alpha in V(L1, L2)} and their gaps.

    Gaps include the stretch from the window edges to the first and last
    occurrence. A pattern is "bounded-gap" when the largest gap on Φ_n is
    no bigger than on Φ_{n/2}, and "growing-gap" otherwise.
    """
    _scalar(alpha.ctx)
    lo, hi = folner_window(alpha.ctx, window_index).bounds
    lo_h, hi_h = folner_window(alpha.ctx, max(1, window_index // 2)).bounds
    smin = min(min(p.support) for p in catalog)
    smax = max(max(p.support) for p in catalog)
    a = alpha.values(lo + smin, hi + smax)
    out = []
    for p in catalog:
        offs = _pattern_offsets(a, p)
        # offset o places the pattern's least support point at lo + smin + o
        occ = offs + lo + smin - min(p.support)
        occ = occ[(occ >= lo) & (occ <= hi)]
        half = occ[(occ >= lo_h) & (occ <= hi_h)]
        gf = _occurrence_gap(occ, lo, hi)
        gh = _occurrence_gap(half, lo_h, hi_h)
        if gf is None:
            cls = "empty"
        elif gh is not None and gf <= gh:
            cls = "bounded-gap"
        else:
            cls = "growing-gap"
        out.append(GapRow(p, len(occ), gh, gf, cls))
    return out
