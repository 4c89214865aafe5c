"""Run every acceptance criterion and print one PASS/FAIL line each.

    python3 scripts/run_acceptance.py [--json artifacts.json] [--only 1 3 5]

Exit status is 0 when every selected criterion passes.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

import acceptance_cases as ac  # noqa: E402


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--json", help="write the computed artifacts (rules, pruned sets, reports) here")
    p.add_argument("--only", type=int, nargs="+", choices=sorted(ac.CRITERIA))
    args = p.parse_args(argv)
    results = []
    for k in args.only or sorted(ac.CRITERIA):
        results.append(ac.CRITERIA[k]())
        print(results[-1].line(), flush=True)
    if args.json:
        Path(args.json).write_bytes(ac.artifact_bytes(results))
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
