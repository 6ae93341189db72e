"""Run acceptance criteria 1-11 and print one PASS/FAIL line each.

Exits nonzero if any criterion fails or overruns its time budget.
"""
import argparse
import sys

from hsw.suites import CRITERIA, SuiteConfig, acceptance_line


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--only", type=int, nargs="*", help="criterion numbers to run")
    args = ap.parse_args()
    ok = True
    for k in sorted(args.only or CRITERIA):
        res = CRITERIA[k](SuiteConfig(seed=args.seed))
        print(acceptance_line(k, res), flush=True)
        for f in res.failures[:3]:
            print(f"    {f}")
        ok &= res.passed
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
