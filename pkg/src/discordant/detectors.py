"""Finite-window evidence for thickness, syndeticity and piecewise syndeticity.

None of these properties is decidable from finitely many values, so each
procedure scans a bounded region and reports what it saw: verified
witnesses, plus budgets and grades. Conventions:

* thickness uses shapes F and translates F*g = {op(f, g)}; in scalar
  contexts the shape of index n is the interval {0, ..., n-1};
* H^-1 A = {x : op(h, x) in A for some h in H};
* a ps_evidence profile is graded on a ladder of budgets (quarter
  steps up to the full budget): "unbounded" when H^-1 A filled the whole
  scan, "growing" when the profile still grew on the last rung, "stalled"
  otherwise.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .errors import ConfigurationError, ConstructionError
from .folner import (
    GroupContext,
    Kind,
    SetOracle,
    folner_window,
    shift_oracle,
)


@dataclass
class ThicknessProfile:
    max_shape_index: int
    search_bound: int
    witness: Any = None
    saturated: bool = False  # the set filled the whole scanned region


@dataclass
class SyndeticityCertificate:
    H: tuple
    covered_window: int
    failure_witness: Any = None

    @property
    def covered(self) -> bool:
        return self.failure_witness is None


@dataclass
class CRTWitness:
    x: int
    N: int
    shifts: tuple[int, ...]
    moduli: tuple[int, ...]
    residues: tuple[int, ...]
    verified_range: tuple[int, int] | None = None

    @property
    def residue_proof(self) -> list[dict]:
        return [{"shift": f, "modulus": m, "residue": r, "value_mod": (f + self.x) % m}
                for f, m, r in zip(self.shifts, self.moduli, self.residues)]

    def to_json(self) -> dict:
        return {
            "shifts": list(self.shifts),
            "moduli": list(self.moduli),
            "x": self.x,
            "N": self.N,
            "verifiedRange": list(self.verified_range) if self.verified_range else None,
        }


# ---------------------------------------------------------------------------
# scalar helpers


def _scan_range(ctx: GroupContext, budget: int) -> tuple[int, int]:
    if ctx.kind is Kind.NAT:
        return 1, max(1, budget)
    half = max(0, (budget - 1) // 2)
    return -half, half


def longest_run(mask: np.ndarray) -> tuple[int, int]:
    """(length, start offset) of the first longest run of True."""
    if not mask.any():
        return 0, -1
    padded = np.concatenate(([False], mask, [False])).astype(np.int8)
    edges = np.flatnonzero(np.diff(padded))
    starts, ends = edges[::2], edges[1::2]
    lengths = ends - starts
    i = int(np.argmax(lengths))
    return int(lengths[i]), int(starts[i])


def preimage_mask(oracle: SetOracle, H: Sequence[int], lo: int, hi: int) -> np.ndarray:
    """Mask of H^-1 A on lo..hi for a scalar context, one sieve for all h."""
    H = sorted(set(int(h) for h in H))
    a, b = lo + H[0], hi + H[-1]
    base = oracle.interval_mask(a, b)
    out = np.zeros(hi - lo + 1, dtype=bool)
    for h in H:
        s = lo + h - a
        out |= base[s:s + hi - lo + 1]
    return out


def preimage_oracle(oracle: SetOracle, ctx: GroupContext, H: Iterable) -> SetOracle:
    H = list(H)
    if not H:
        raise ValueError("H must be nonempty")
    parts = [shift_oracle(oracle, ctx, h) for h in H]
    u = parts[0]
    for p in parts[1:]:
        u = u | p
    if ctx.scalar:
        Hs = [int(h) for h in H]
        u = SetOracle(contains=u.contains, label=f"H^-1 {oracle.label}", batch=u.batch,
                      interval=lambda lo, hi: preimage_mask(oracle, Hs, lo, hi))
    return u


# ---------------------------------------------------------------------------
# thickness


def _cube(ctx: GroupContext, s: int) -> list:
    return [ctx.decode(c) for c in itertools.product(range(s), repeat=ctx.rank)]


def _window_for_budget(ctx: GroupContext, budget: int):
    n = 1
    while folner_window(ctx, n + 1).size <= budget:
        n += 1
    return folner_window(ctx, n)


def thickness_profile(oracle: SetOracle, ctx: GroupContext, search_bound: int) -> ThicknessProfile:
    """Largest shape index with a verified translate F_n * g inside A.

    Scalar contexts scan a region of ``search_bound`` elements for the
    longest run. Lattice and Heisenberg contexts try cubes {0..s-1}^r
    translated to every g of the largest window within the budget.
    """
    if search_bound < 1:
        raise ValueError("search_bound must be >= 1")
    if ctx.kind is Kind.FREE:
        raise ConfigurationError("thickness scans need a windowed context")
    if ctx.scalar:
        lo, hi = _scan_range(ctx, search_bound)
        mask = oracle.interval_mask(lo, hi)
        length, start = longest_run(mask)
        return ThicknessProfile(length, search_bound, lo + start if length else None,
                                saturated=length == len(mask))
    window = _window_for_budget(ctx, search_bound)
    G = window.array()
    best, wit = 0, None
    s = 1
    while s <= window.index + 1:
        ok = np.ones(len(G), dtype=bool)
        for f in _cube(ctx, s):
            ok &= oracle.mask(ctx.left_translate(f, G))
            if not ok.any():
                break
        if not ok.any():
            break
        best, wit = s, ctx.row_to_element(G[int(np.argmax(ok))])
        s += 1
    return ThicknessProfile(best, search_bound, wit, saturated=best == window.index + 1)


def verify_thickness_witness(oracle: SetOracle, ctx: GroupContext, profile: ThicknessProfile) -> bool:
    if profile.max_shape_index == 0:
        return profile.witness is None
    if ctx.scalar:
        return all(oracle.contains(profile.witness + i) for i in range(profile.max_shape_index))
    return all(oracle.contains(ctx.op(f, profile.witness)) for f in _cube(ctx, profile.max_shape_index))


# ---------------------------------------------------------------------------
# syndeticity


def syndeticity_check(oracle: SetOracle, ctx: GroupContext, H: Iterable, window_index: int) -> SyndeticityCertificate:
    """Whether H^-1 A covers the window, else the first uncovered element."""
    H = tuple(H)
    if not H:
        raise ValueError("H must be nonempty")
    window = folner_window(ctx, window_index)
    if ctx.scalar:
        lo, hi = window.bounds
        mask = preimage_mask(oracle, H, lo, hi)
        bad = np.flatnonzero(~mask)
        return SyndeticityCertificate(H, window_index, int(lo + bad[0]) if len(bad) else None)
    pre = preimage_oracle(oracle, ctx, H)
    for chunk in window.chunks():
        bad = np.flatnonzero(~pre.mask(chunk))
        if len(bad):
            return SyndeticityCertificate(H, window_index, ctx.row_to_element(chunk[bad[0]]))
    return SyndeticityCertificate(H, window_index, None)


def verify_failure(oracle: SetOracle, ctx: GroupContext, cert: SyndeticityCertificate) -> bool:
    x = cert.failure_witness
    return x is not None and not any(oracle.contains(ctx.op(h, x)) for h in cert.H)


# ---------------------------------------------------------------------------
# piecewise syndeticity evidence


@dataclass
class PSEvidence:
    H: tuple
    ladder: list[tuple[int, int]]  # (budget, max shape index)
    witness: Any
    grade: str


def ps_evidence(oracle: SetOracle, ctx: GroupContext, H_family: Sequence[Iterable], search_bound: int,
                rungs: int = 4) -> list[PSEvidence]:
    """Thickness profiles of H^-1 A on a budget ladder, for each H."""
    if not H_family:
        raise ValueError("H_family must be nonempty")
    budgets = sorted({max(1, search_bound >> (2 * i)) for i in range(rungs)})
    out = []
    for H in H_family:
        H = tuple(H)
        pre = preimage_oracle(oracle, ctx, H)
        ladder = []
        prof = None
        for b in budgets:
            prof = thickness_profile(pre, ctx, b)
            ladder.append((b, prof.max_shape_index))
        if prof.saturated:
            grade = "unbounded"
        elif len(ladder) > 1 and ladder[-1][1] > ladder[-2][1]:
            grade = "growing"
        else:
            grade = "stalled"
        out.append(PSEvidence(H, ladder, prof.witness, grade))
    return out


# ---------------------------------------------------------------------------
# CRT witnesses


def crt(residues: Sequence[int], moduli: Sequence[int]) -> tuple[int, int]:
    """Least x >= 0 with x ≡ r_i mod m_i, and the product modulus."""
    x, N = 0, 1
    for r, m in zip(residues, moduli):
        if m < 1:
            raise ValueError("moduli must be positive")
        if math.gcd(N, m) != 1:
            raise ValueError(f"modulus {m} is not coprime to the others")
        # x + N*t ≡ r mod m
        t = ((r - x) * pow(N, -1, m)) % m
        x, N = x + N * t, N * m
    return x % N, N


def crt_witness(F: Sequence[int], moduli: Sequence[int], residues: Sequence[int] | None = None,
                oracle: SetOracle | None = None, ks: range = range(0, 11)) -> CRTWitness:
    """Place f + x in the removed class r_i + m_i Z for each shift f_i.

    Shifts are paired with the moduli in order; residues default to 0.
    With an oracle, every f + x + kN for k in ``ks`` is checked to lie
    outside the set.
    """
    F = tuple(int(f) for f in F)
    if len(F) > len(moduli):
        raise ValueError(f"{len(F)} shifts but only {len(moduli)} moduli")
    used = tuple(int(m) for m in moduli[:len(F)])
    for i, j in itertools.combinations(range(len(used)), 2):
        if math.gcd(used[i], used[j]) != 1:
            raise ValueError(f"moduli {used[i]} and {used[j]} are not coprime")
    res = tuple(0 for _ in F) if residues is None else tuple(int(r) for r in residues[:len(F)])
    x, N = crt([r - f for r, f in zip(res, F)], used)
    w = CRTWitness(x, N, F, used, res)
    if oracle is not None:
        for k in ks:
            for f in F:
                if oracle.contains(f + x + k * N):
                    raise ConstructionError(f"{f + x + k * N} lies in {oracle.label}")
        w.verified_range = (ks.start, ks.stop - 1)
    return w


# ---------------------------------------------------------------------------
# structural helpers


@dataclass
class STDecomposition:
    S: SetOracle
    T: SetOracle
    window_index: int
    agrees: bool


def st_decompose(oracle: SetOracle, ctx: GroupContext, H: Iterable, window_index: int) -> STDecomposition:
    """T = A ∪ H^-1 A and S = A ∪ T^c, so A = S ∩ T; checked on the window."""
    pre = preimage_oracle(oracle, ctx, H)
    T = oracle | pre
    S = oracle | T.complement()
    window = folner_window(ctx, window_index)
    for chunk in window.chunks():
        if not np.array_equal((S & T).mask(chunk), oracle.mask(chunk)):
            raise ConstructionError("S ∩ T differs from A on the window")
    return STDecomposition(S, T, window_index, True)


@dataclass
class DualityRow:
    H: tuple
    failure: Any
    complement_translate: Any
    consistent: bool


def find_translate(oracle: SetOracle, ctx: GroupContext, shape: Sequence, window_index: int):
    """First g of the window with op(f, g) in the set for every f in shape."""
    window = folner_window(ctx, window_index)
    for chunk in window.chunks():
        ok = np.ones(len(chunk), dtype=bool)
        for f in shape:
            ok &= oracle.mask(ctx.left_translate(f, chunk))
        hits = np.flatnonzero(ok)
        if len(hits):
            return ctx.row_to_element(chunk[hits[0]])
    return None


def duality_check(oracle: SetOracle, ctx: GroupContext, H_catalog: Sequence[Iterable], window_index: int) -> list[DualityRow]:
    """Pair syndeticity failures of A with translates of H inside A^c.

    A fails to be covered by H^-1 A at x exactly when H*x lies in A^c, so
    both searches must return the same first element.
    """
    comp = oracle.complement()
    rows = []
    for H in H_catalog:
        H = tuple(H)
        cert = syndeticity_check(oracle, ctx, H, window_index)
        g = find_translate(comp, ctx, H, window_index)
        rows.append(DualityRow(H, cert.failure_witness, g, cert.failure_witness == g))
    return rows


@dataclass
class PartitionReport:
    classes: list[list[PSEvidence]]
    strongest: int


_GRADE_RANK = {"stalled": 0, "growing": 1, "unbounded": 2}


def color_class(oracle: SetOracle, coloring: Callable[[Any], int], color: int) -> SetOracle:
    def batch(X):
        base = oracle.mask(X)
        cols = np.fromiter((coloring(int(x)) for x in X), dtype=np.int64, count=len(X)) if X.ndim == 1 else \
            np.fromiter((coloring(tuple(int(v) for v in r)) for r in X), dtype=np.int64, count=len(X))
        return base & (cols == color)

    return SetOracle(contains=lambda g: oracle.contains(g) and coloring(g) == color,
                     label=f"{oracle.label}[color {color}]", batch=batch)


def partition_experiment(oracle: SetOracle, ctx: GroupContext, coloring: Callable[[Any], int], colors: int,
                         H_family: Sequence[Iterable], search_bound: int) -> PartitionReport:
    """ps_evidence for each color class A ∩ {coloring = i}, i = 1..colors."""
    classes = []
    for c in range(1, colors + 1):
        classes.append(ps_evidence(color_class(oracle, coloring, c), ctx, H_family, search_bound))

    def strength(evs):
        best = max(evs, key=lambda e: (_GRADE_RANK[e.grade], e.ladder[-1][1]))
        return (_GRADE_RANK[best.grade], best.ladder[-1][1])

    strongest = max(range(colors), key=lambda i: strength(classes[i])) + 1
    return PartitionReport(classes, strongest)
