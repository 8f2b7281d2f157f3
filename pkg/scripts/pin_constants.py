"""Sweep the default corpus on N=32 and N=64 and pin the max ratios.

Writes tests/data/pinned_ratios.json, keyed by inequality and grid, together
with the corpus digest so a changed corpus cannot silently reuse old values.

    python scripts/pin_constants.py [--out PATH]
"""
import argparse
import json
import time
from pathlib import Path

from besovflow.corpus import CorpusSpec
from besovflow.inequalities import run_corpus

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", type=Path, default=ROOT / "tests" / "data" / "pinned_ratios.json")
    args = ap.parse_args()

    spec = CorpusSpec(grids=(32, 64))
    t0 = time.perf_counter()
    result = run_corpus(spec)
    elapsed = time.perf_counter() - t0
    if result.failures:
        raise SystemExit("corpus failures:\n" + "\n".join(result.failures))

    table = {}
    for (name, n), rep in sorted(result.reports.items()):
        table.setdefault(name, {})[str(n)] = rep.max_ratio
    doc = {
        "corpus_digest": result.digest,
        "spec": {"grids": list(spec.grids), "families": list(spec.families),
                 "count": spec.count, "rng_seed": spec.rng_seed, "k_max": spec.k_max},
        "max_ratio": table,
    }
    args.out.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")

    print(f"{'inequality':<26} {'N=32':>12} {'N=64':>12} {'shift':>8}")
    for name, row in table.items():
        a, b = row["32"], row["64"]
        print(f"{name:<26} {a:12.6g} {b:12.6g} {abs(b - a) / a:8.2%}")
    print(f"digest {result.digest}\nsweep {elapsed:.1f} s -> {args.out}")


if __name__ == "__main__":
    main()
