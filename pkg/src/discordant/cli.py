"""Batch runner: ``discordant run spec.json [--threads N] [--out DIR]``.

A spec is a JSON object with ``command``, ``params`` and an optional
``output`` path prefix. Tables are written as CSV (header row, floats with
9 significant digits, LF line endings) and certificates as JSON. Exit
codes: 0 success, 2 when an expectation stated in the spec fails, 1 on
any error.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import jsonschema

from . import constructions as C
from . import detectors as D
from . import ie_density as IE
from . import sl2 as S
from . import symbolic as Y
from .errors import ConfigurationError
from .folner import GroupContext, density_report, evens

THREADS_ENV = "DISCORDANT_THREADS"

COMMANDS = ["density", "detect", "witness", "sl2", "symbolic", "rotate", "ena", "ie"]

_int_list = {"type": "array", "items": {"type": "integer"}}
_pos_list = {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1}
_arcs = {"type": "array", "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}}
_alpha = {"oneOf": [{"enum": ["golden"]}, {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}]}
_fat = {"type": "object", "additionalProperties": False, "required": ["c", "depth"],
        "properties": {"c": {"type": "number"}, "depth": {"type": "integer", "minimum": 1}}}

SET_NAMES = ["squarefree", "kfree", "bfree", "bufree", "coprime_pairs", "coprime_tuples",
             "heisenberg_bfree", "straus", "ar", "evens"]

_set_props = {
    "set": {"enum": SET_NAMES},
    "k": {"type": "integer", "minimum": 2},
    "B": {"type": "array", "items": {"type": "integer", "minimum": 2}},
    "u": _pos_list,
    "rows": {"type": "array", "items": {"type": "array", "items": {"type": "integer", "minimum": 2}}},
    "limit": {"type": "integer", "minimum": 2},
    "variant": {"enum": ["single", "block"]},
    "t": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
    "alpha": _alpha,
}

PARAMS = {
    "density": {
        "type": "object", "additionalProperties": False, "required": ["set", "windows"],
        "properties": {**_set_props, "windows": _pos_list,
                       "tolerance": {"type": "number", "minimum": 0},
                       "min_lower": {"type": "number"}},
    },
    "detect": {
        "type": "object", "additionalProperties": False, "required": ["set", "mode"],
        "properties": {**_set_props,
                       "mode": {"enum": ["thickness", "syndetic", "ps", "duality"]},
                       "complement": {"type": "boolean"},
                       "H": _int_list,
                       "H_family": {"type": "array", "items": _int_list, "minItems": 1},
                       "search_bound": {"type": "integer", "minimum": 1},
                       "window": {"type": "integer", "minimum": 1},
                       "expect_grade": {"enum": ["stalled", "growing", "unbounded"]}},
    },
    "witness": {
        "type": "object", "additionalProperties": False, "required": ["shifts", "moduli"],
        "properties": {"shifts": _int_list, "moduli": {"type": "array", "items": {"type": "integer", "minimum": 2}},
                       "residues": _int_list, "verify": {"enum": ["squarefree", "none"]},
                       "k_max": {"type": "integer", "minimum": 0},
                       "expect": {"type": "object", "additionalProperties": False,
                                  "properties": {"x": {"type": "integer"}, "N": {"type": "integer"}}}},
    },
    "sl2": {
        "type": "object", "additionalProperties": False, "required": ["n_min", "n_max"],
        "properties": {"n_min": {"type": "integer", "minimum": 1}, "n_max": {"type": "integer", "minimum": 1},
                       "k": {"type": "array", "items": {"type": "integer", "minimum": 2}},
                       "assert_from": {"type": "integer", "minimum": 1}},
    },
    "symbolic": {
        "type": "object", "additionalProperties": False, "required": ["config", "task"],
        "properties": {"config": {"enum": ["disjunctive", "evens", "squarefree", "random", "empty", "full"]},
                       "task": {"enum": ["disjunctivity", "gaps", "extraction", "orbit"]},
                       "max_len": {"type": "integer", "minimum": 1, "maximum": 16},
                       "search_bound": {"type": "integer", "minimum": 1},
                       "window": {"type": "integer", "minimum": 1},
                       "length": {"type": "integer", "minimum": 1},
                       "h_budget": {"type": "integer", "minimum": 1},
                       "target": {"enum": ["disjunctive", "evens", "squarefree", "random", "empty", "full"]},
                       "shape": _int_list,
                       "candidates": {"type": "object", "additionalProperties": False, "required": ["start", "step", "count"],
                                      "properties": {"start": {"type": "integer"}, "step": {"type": "integer"},
                                                     "count": {"type": "integer", "minimum": 1}}},
                       "seed": {"type": "integer", "minimum": 0}},
    },
    "rotate": {
        "type": "object", "additionalProperties": False, "required": ["windows"],
        "properties": {"alpha": _alpha, "target": _arcs, "fat_cantor": _fat,
                       "base": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                       "context": {"enum": ["nat", "int"]}, "windows": _pos_list,
                       "tolerance": {"type": "number", "minimum": 0}},
    },
    "ena": {
        "type": "object", "additionalProperties": False, "required": ["sparsity"],
        "properties": {"sparsity": {"type": "integer", "minimum": 2}, "context": {"enum": ["nat", "int"]},
                       "omega": {"type": "string", "pattern": "^[01]+$"},
                       "blocks": {"type": "integer", "minimum": 1, "maximum": 6},
                       "expect_upper": {"type": "number"}, "expect_lower": {"type": "number"},
                       "normal": {"type": "object", "additionalProperties": False,
                                  "properties": {"seed": {"type": "integer", "minimum": 0},
                                                 "K": _int_list, "windows": _pos_list,
                                                 "tolerance": {"type": "number", "minimum": 0}}}},
    },
    "ie": {
        "type": "object", "additionalProperties": False, "required": ["moduli", "window"],
        "properties": {"moduli": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
                       "window": {"type": "integer", "minimum": 1},
                       "k": {"type": "integer", "minimum": 1},
                       "truncation_n": {"type": "integer", "minimum": 1},
                       "expect_flagged": {"type": "array", "items": _int_list}},
    },
}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["command", "params"],
    "properties": {
        "command": {"enum": COMMANDS},
        "params": {"type": "object"},
        "output": {"type": "string", "minLength": 1},
    },
    "allOf": [
        {"if": {"properties": {"command": {"const": c}}, "required": ["command"]},
         "then": {"properties": {"params": PARAMS[c]}}}
        for c in COMMANDS
    ],
}


class SpecError(ValueError):
    def __init__(self, messages: list[str]):
        super().__init__("\n".join(messages))
        self.messages = messages


@dataclass
class ExperimentSpec:
    command: str
    params: dict
    output: str


def default_output(command: str, now: _dt.datetime | None = None) -> str:
    now = now or _dt.datetime.now()
    return f"out/{command}-{now.strftime('%Y%m%d-%H%M%S')}"


def parse_spec(text: str) -> ExperimentSpec:
    """Parse and validate a spec; every violation is reported with its path."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecError([f"JSON parse error at line {e.lineno}, column {e.colno}: {e.msg}"]) from None
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        msgs = []
        for e in errors:
            where = "/".join(map(str, e.absolute_path)) or "<root>"
            msgs.append(f"{where}: {e.message}")
        raise SpecError(msgs)
    return ExperimentSpec(raw["command"], raw["params"], raw.get("output") or default_output(raw["command"]))


# ---------------------------------------------------------------------------
# output helpers


def _fmt(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".9g")
    if v is None:
        return ""
    return str(v)


def write_csv(path: Path, header: list[str], rows: list[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(r.get(h)) for h in header])


def write_json(path: Path, obj: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass
class RunResult:
    status: int
    artifacts: list[Path]
    messages: list[str]


# ---------------------------------------------------------------------------
# set builders


def _alpha(p: dict) -> C.Angle:
    a = p.get("alpha", "golden")
    return C.Angle.golden() if a == "golden" else C.Angle.from_value(a)


def build_set(p: dict):
    """(oracle, context) for the named construction."""
    name = p["set"]
    nat, z = GroupContext.nat(), GroupContext.integers()
    if name == "squarefree":
        return C.squarefree(), nat
    if name == "kfree":
        return C.kfree(p.get("k", 2)), nat
    if name == "evens":
        return evens(), z
    if name == "bfree":
        return C.bfree_oracle(C.BSequence(tuple(p["B"]))), nat
    if name == "bufree":
        return C.bufree_oracle(C.BSequence(tuple(p["B"])), tuple(p["u"])), nat
    if name == "coprime_pairs":
        return C.coprime_pairs(p.get("limit", 2000)), GroupContext.lattice(2)
    if name == "coprime_tuples":
        rows = p["rows"]
        return C.coprime_tuple_oracle(rows), GroupContext.lattice(len(rows))
    if name == "heisenberg_bfree":
        return C.heisenberg_bfree_oracle(C.BSequence(tuple(p["B"]))), GroupContext.heisenberg()
    if name == "straus":
        variant = C.StrausVariant(p.get("variant", "single"))
        return C.straus_set(C.StrausParams.powers_of_two(p.get("limit", 10 ** 6), variant)), nat
    if name == "ar":
        return C.ar_set(C.ARSetSpec(p.get("t", 0.2), _alpha(p))), z
    raise ConfigurationError(f"unknown set {name}")


def _density_rows(rep) -> tuple[list[str], list[dict]]:
    header = ["n", "count", "ratio", "known_density", "abs_diff"]
    if rep.ambiguous is not None:
        header.append("ambiguous")
    rows = []
    for i, (n, r) in enumerate(rep.ratios):
        kd = rep.known_density
        row = {"n": n, "count": rep.counts[i], "ratio": r, "known_density": kd,
               "abs_diff": abs(r - kd) if kd is not None else None}
        if rep.ambiguous is not None:
            row["ambiguous"] = rep.ambiguous[i]
        rows.append(row)
    return header, rows


# ---------------------------------------------------------------------------
# commands


def _run_density(p, prefix, workers):
    oracle, ctx = build_set(p)
    rep = density_report(oracle, ctx, p["windows"], workers=workers)
    header, rows = _density_rows(rep)
    out = Path(prefix + ".csv")
    write_csv(out, header, rows)
    msgs, status = [], 0
    if "tolerance" in p and rows[-1]["abs_diff"] is not None and rows[-1]["abs_diff"] > p["tolerance"]:
        status, msgs = 2, [f"abs_diff {rows[-1]['abs_diff']:.3g} exceeds {p['tolerance']}"]
    if "min_lower" in p and rep.lower < p["min_lower"]:
        status, msgs = 2, msgs + [f"lower estimate {rep.lower:.6g} below {p['min_lower']}"]
    return RunResult(status, [out], msgs)


def _run_detect(p, prefix, workers):
    oracle, ctx = build_set(p)
    if p.get("complement"):
        oracle = oracle.complement()
    bound = p.get("search_bound", 10 ** 5)
    mode = p["mode"]
    status, msgs = 0, []
    if mode == "thickness":
        prof = D.thickness_profile(oracle, ctx, bound)
        header = ["search_bound", "max_shape_index", "witness", "saturated"]
        rows = [{"search_bound": bound, "max_shape_index": prof.max_shape_index,
                 "witness": prof.witness, "saturated": prof.saturated}]
    elif mode == "syndetic":
        cert = D.syndeticity_check(oracle, ctx, p.get("H", [0]), p.get("window", 1000))
        header = ["H", "window", "covered", "failure_witness"]
        rows = [{"H": " ".join(map(str, cert.H)), "window": cert.covered_window,
                 "covered": cert.covered, "failure_witness": cert.failure_witness}]
    elif mode == "ps":
        fam = p.get("H_family") or [p.get("H", [0])]
        header = ["H", "budget", "max_shape_index", "grade"]
        rows = []
        for ev in D.ps_evidence(oracle, ctx, fam, bound):
            for b, s in ev.ladder:
                rows.append({"H": " ".join(map(str, ev.H)), "budget": b, "max_shape_index": s, "grade": ev.grade})
            if "expect_grade" in p and ev.grade != p["expect_grade"]:
                status = 2
                msgs.append(f"H={ev.H}: grade {ev.grade}, expected {p['expect_grade']}")
    else:
        fam = p.get("H_family") or [p.get("H", [0])]
        header = ["H", "failure", "complement_translate", "consistent"]
        rows = []
        for r in D.duality_check(oracle, ctx, fam, p.get("window", 1000)):
            rows.append({"H": " ".join(map(str, r.H)), "failure": r.failure,
                         "complement_translate": r.complement_translate, "consistent": r.consistent})
            if not r.consistent:
                status = 2
    out = Path(prefix + ".csv")
    write_csv(out, header, rows)
    return RunResult(status, [out], msgs)


def _run_witness(p, prefix, workers):
    oracle = C.squarefree() if p.get("verify", "squarefree") == "squarefree" else None
    ks = range(0, p.get("k_max", 10) + 1)
    w = D.crt_witness(p["shifts"], p["moduli"], p.get("residues"), oracle=oracle, ks=ks)
    out = Path(prefix + ".json")
    write_json(out, w.to_json())
    exp = p.get("expect", {})
    bad = [f"{k}={getattr(w, k)}, expected {v}" for k, v in exp.items() if getattr(w, k) != v]
    return RunResult(2 if bad else 0, [out], bad)


def _run_sl2(p, prefix, workers):
    ks = p.get("k", [2])
    start = p.get("assert_from", 10)
    header = ["n", "ball_size", "lower_bound"]
    for k in ks:
        header += [f"gamma{k}", f"gamma{k}_bound"]
    rows, msgs = [], []
    for n in range(p["n_min"], p["n_max"] + 1):
        ball = S.enumerate_ball(n)
        lb = 12 / math.pi ** 2 * n * n
        row = {"n": n, "ball_size": len(ball), "lower_bound": lb}
        if n >= start and len(ball) < lb:
            msgs.append(f"|F_{n}| = {len(ball)} below {lb:.6g}")
        for k in ks:
            cnt = int(S.gamma_mask(ball.entries, k).sum())
            bound = 96 / k ** 2 * n * n
            row[f"gamma{k}"] = cnt
            row[f"gamma{k}_bound"] = bound
            if n >= k and cnt > bound:
                msgs.append(f"Γ({k}) count {cnt} exceeds {bound:.6g} at n={n}")
        rows.append(row)
    out = Path(prefix + ".csv")
    write_csv(out, header, rows)
    return RunResult(2 if msgs else 0, [out], msgs)


def _config(name: str, seed: int | None = None) -> Y.BinaryConfig:
    nat = GroupContext.nat()
    if name == "disjunctive":
        return Y.disjunctive_generator(nat)
    if name == "evens":
        return Y.BinaryConfig.from_oracle(evens(), nat)
    if name == "squarefree":
        return Y.BinaryConfig.from_oracle(C.squarefree(), nat)
    if name == "random":
        return Y.pseudorandom_bits(Y.DEFAULT_SEED if seed is None else seed)
    return Y.BinaryConfig.constant(nat, 0 if name == "empty" else 1)


def _run_symbolic(p, prefix, workers):
    alpha = _config(p["config"], p.get("seed"))
    task = p["task"]
    status, msgs = 0, []
    if task == "disjunctivity":
        res = Y.disjunctivity_scan(alpha, Y.word_catalog(p.get("max_len", 8)), p.get("search_bound", 10 ** 5))
        header = ["pattern", "witness"]
        rows = [{"pattern": r.pattern.as_word(), "witness": r.witness} for r in res]
        if any(r.witness is None for r in res):
            status, msgs = 2, ["some patterns were not found"]
    elif task == "gaps":
        res = Y.minimal_orbit_gap_report(alpha, Y.word_catalog(p.get("max_len", 3)), p.get("window", 10 ** 4))
        header = ["pattern", "occurrences", "max_gap_half", "max_gap_full", "classification"]
        rows = [{"pattern": r.pattern.as_word(), "occurrences": r.occurrences, "max_gap_half": r.max_gap_half,
                 "max_gap_full": r.max_gap_full, "classification": r.classification} for r in res]
    elif task == "extraction":
        r = Y.syndetic_extraction(alpha, p.get("length", 32), p.get("search_bound", 10 ** 5), p.get("h_budget", 6))
        header = ["status", "H", "anchor", "max_gap", "window"]
        rows = [{"status": r.status, "H": " ".join(map(str, r.H or ())), "anchor": r.anchor, "max_gap": r.max_gap,
                 "window": "".join(map(str, r.window or []))}]
    else:
        beta = _config(p.get("target", "empty"))
        cand = p.get("candidates")
        cands = None if cand is None else (cand["start"] + i * cand["step"] for i in range(cand["count"]))
        g = Y.orbit_window_membership(beta, alpha, p.get("shape", [0]), p.get("search_bound", 10 ** 5), cands)
        header = ["shape", "witness"]
        rows = [{"shape": " ".join(map(str, p.get("shape", [0]))), "witness": g}]
    out = Path(prefix + ".csv")
    write_csv(out, header, rows)
    return RunResult(status, [out], msgs)


def _run_rotate(p, prefix, workers):
    if "fat_cantor" in p:
        target = C.fat_cantor(p["fat_cantor"]["c"], p["fat_cantor"]["depth"]).target()
    else:
        target = C.IntervalUnion.of(p.get("target", [[0, 0.5]]))
    spec = C.RotationSpec(_alpha(p), target, C.Angle.from_value(p.get("base", 0)))
    ctx = GroupContext.nat() if p.get("context", "int") == "nat" else GroupContext.integers()
    rep = density_report(C.rotation_visit_oracle(spec), ctx, p["windows"], workers=workers)
    header, rows = _density_rows(rep)
    out = Path(prefix + ".csv")
    write_csv(out, header, rows)
    if "tolerance" in p and rows[-1]["abs_diff"] > p["tolerance"]:
        return RunResult(2, [out], [f"abs_diff {rows[-1]['abs_diff']:.3g} exceeds {p['tolerance']}"])
    return RunResult(0, [out], [])


def _run_ena(p, prefix, workers):
    ctx = GroupContext.nat() if p.get("context", "nat") == "nat" else GroupContext.integers()
    wp = Y.WordPattern.of(p.get("omega", "1"))
    gen = Y.ena_generator(ctx, p["sparsity"], wp)
    idx = gen.log.indices[:p.get("blocks", 3)]
    st = Y.ena_statistics(gen, [wp], idx)[0]
    rows = [{"n": n, "block": i + 1, "mode": gen.log.block_mode(i + 1), "frequency": f}
            for i, (n, f) in enumerate(st.per_window)]
    out = Path(prefix + ".csv")
    write_csv(out, ["n", "block", "mode", "frequency"], rows)
    arts, msgs = [out], []
    if "expect_upper" in p and st.upper < p["expect_upper"]:
        msgs.append(f"upper frequency {st.upper:.6g} below {p['expect_upper']}")
    if "expect_lower" in p and st.lower > p["expect_lower"]:
        msgs.append(f"lower frequency {st.lower:.6g} above {p['expect_lower']}")
    if "normal" in p:
        q = p["normal"]
        rep = Y.normal_statistics(Y.pseudorandom_bits(q.get("seed", Y.DEFAULT_SEED)), q.get("K", [0, 1, 2]),
                                  q.get("windows", [10 ** 6]), q.get("tolerance", 5e-3))
        nout = Path(prefix + "-normal.csv")
        write_csv(nout, ["n", "word", "frequency", "target", "diff"],
                  [{"n": r.n, "word": r.word, "frequency": r.frequency, "target": r.target, "diff": r.diff}
                   for r in rep.rows])
        arts.append(nout)
        if not rep.normal_on_windows:
            msgs.append(f"normal statistics deviate by {rep.max_diff:.3g}")
    return RunResult(2 if msgs else 0, arts, msgs)


def _run_ie(p, prefix, workers):
    fam = IE.IEFamily.multiples(p["moduli"])
    n = p["window"]
    rows = []
    flagged = []
    for I in [(i, j) for i in range(len(fam)) for j in range(i + 1, len(fam))]:
        r = IE.ie_check_independence(fam, I, n)
        rows.append({"check": "independence", "I": " ".join(str(p["moduli"][i]) for i in I),
                     "observed": r.ratio, "expected": r.product, "diff": r.diff, "flagged": r.flagged})
        if r.flagged:
            flagged.append(sorted(p["moduli"][i] for i in I))
    k = p.get("k", 1)
    oc = IE.ie_check_bounded_overcount(fam, k, n)
    rows.append({"check": f"overcount k={k}", "I": "", "observed": oc.average, "expected": oc.density_sum,
                 "diff": oc.diff, "flagged": None})
    tn = p.get("truncation_n", 1)
    ok = IE.indicator_truncation_check(fam, tn, range(-500, 501))
    rows.append({"check": f"truncation n={tn}", "I": "", "observed": None, "expected": None, "diff": None,
                 "flagged": not ok})
    out = Path(prefix + ".csv")
    write_csv(out, ["check", "I", "observed", "expected", "diff", "flagged"], rows)
    msgs = []
    if "expect_flagged" in p and sorted(map(sorted, p["expect_flagged"])) != sorted(flagged):
        msgs.append(f"flagged pairs {flagged}, expected {p['expect_flagged']}")
    if not ok:
        msgs.append("indicator truncation inequality failed")
    return RunResult(2 if msgs else 0, [out], msgs)


RUNNERS = {
    "density": _run_density, "detect": _run_detect, "witness": _run_witness, "sl2": _run_sl2,
    "symbolic": _run_symbolic, "rotate": _run_rotate, "ena": _run_ena, "ie": _run_ie,
}


def run_experiment(spec: ExperimentSpec, out_dir: str | None = None, threads: int | None = None) -> RunResult:
    prefix = spec.output
    if out_dir is not None:
        prefix = str(Path(out_dir) / Path(prefix).name)
    workers = threads or int(os.environ.get(THREADS_ENV, "1") or 1)
    return RUNNERS[spec.command](spec.params, prefix, workers)


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="discordant", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)
    run = sub.add_parser("run", help="run one JSON experiment spec")
    run.add_argument("spec", help="path to the spec file")
    run.add_argument("--threads", type=int, default=None,
                     help=f"worker threads for window counting (default: ${THREADS_ENV} or 1)")
    run.add_argument("--out", default=None, help="directory for outputs (overrides the spec's directory)")
    args = ap.parse_args(argv)
    try:
        text = Path(args.spec).read_text(encoding="utf-8")
        spec = parse_spec(text)
        result = run_experiment(spec, args.out, args.threads)
    except SpecError as e:
        for m in e.messages:
            print(f"error: {m}", file=sys.stderr)
        return 1
    except (OSError, ValueError, ArithmeticError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    for a in result.artifacts:
        print(a)
    for m in result.messages:
        print(f"check failed: {m}", file=sys.stderr)
    return result.status


if __name__ == "__main__":
    sys.exit(main())
