"""Print the acceptance table with timings; same content as ``tentlab report``."""
import sys

from tentlab.acceptance import run_all


def main():
    rows = run_all()
    for c in rows:
        print(f"{c.line():60s} {c.seconds:6.1f}s")
    failed = [c.number for c in rows if not c.passed]
    print("all criteria pass" if not failed else f"failing: {failed}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
