"""Run the property suite and keep the results.

Prints the human summary to stdout and optionally writes the JSON report;
the exit code mirrors the suite outcome so this can gate CI.
"""

import argparse
import json
import sys
import time

from polysched.verify import load_corpus, theorem_suite


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--corpus", metavar="DIR",
                        help="directory of instances (default: bundled corpus)")
    parser.add_argument("--out", metavar="FILE", help="write the JSON report")
    parser.add_argument("--bound", type=int, default=3,
                        help="oracle box bound per variable")
    parser.add_argument("--quiet", action="store_true",
                        help="suppress progress lines on stderr")
    args = parser.parse_args()

    corpus = load_corpus(args.corpus) if args.corpus else None
    progress = None if args.quiet else \
        lambda msg: print(msg, file=sys.stderr, flush=True)

    t0 = time.perf_counter()
    report = theorem_suite(corpus, bound=args.bound, progress=progress)
    took = time.perf_counter() - t0

    print(report.summary())
    print(f"took {took:.1f} s")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(report.to_json(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
