"""Synthesize a rule for every config in configs/ and print a one-line summary each.

    python3 scripts/worked_examples.py [--configs DIR] [--out DIR]
"""

import argparse
import json
import time
from pathlib import Path

from mvquad.config import load_config
from mvquad.pipeline import synthesize, verify


def main():
    root = Path(__file__).resolve().parent.parent
    p = argparse.ArgumentParser()
    p.add_argument("--configs", default=str(root / "configs"))
    p.add_argument("--out", help="also write each rule as <name>.rule.json here")
    args = p.parse_args()
    for path in sorted(Path(args.configs).glob("*.json")):
        cfg = load_config(path)
        t0 = time.perf_counter()
        rule = synthesize(cfg)
        secs = time.perf_counter() - t0
        ok = verify(rule, cfg)["passed"]
        nodes = ", ".join("(" + ", ".join(f"{c:.6g}" for c in p) + ")" for p in rule.nodes)
        print(f"{path.stem:12s} n={cfg.n} nodes={len(rule.nodes)} reduced={rule.reduced} "
              f"residual={rule.residual:.1e} verified={ok} {secs:.2f}s  [{nodes}]")
        if args.out:
            Path(args.out).mkdir(parents=True, exist_ok=True)
            (Path(args.out) / f"{path.stem}.rule.json").write_text(json.dumps(rule.to_json(), indent=2) + "\n")


if __name__ == "__main__":
    main()
