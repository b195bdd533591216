"""Run every spec in experiments/ and tabulate the exit status.

bad.json is invalid on purpose and should exit 1.
"""
import argparse
from pathlib import Path

from discordant.cli import main

ROOT = Path(__file__).resolve().parents[1]


def run(out: str, threads: int | None) -> int:
    worst = 0
    for spec in sorted((ROOT / "experiments").glob("*.json")):
        argv = ["run", str(spec), "--out", out]
        if threads:
            argv += ["--threads", str(threads)]
        code = main(argv)
        print(f"{code}  {spec.name}")
        if spec.name != "bad.json":
            worst = max(worst, code)
    return worst


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out")
    ap.add_argument("--threads", type=int, default=None)
    args = ap.parse_args()
    raise SystemExit(run(args.out, args.threads))
