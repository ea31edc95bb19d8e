"""Run every verification suite and print one line per check; exit 1 if any fails."""

import sys

from pseudomodes.verify import SUITES, run_suite


def main():
    ok = True
    for name in SUITES:
        for c in run_suite(name):
            print(f"[{name}] {c.line()}")
            ok &= c.passed
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
