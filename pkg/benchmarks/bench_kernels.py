"""Compare the numba kernels with the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N] [--json]
"""

import argparse
import json

from pursuitlab import kernels
from pursuitlab.bench import format_table, run_benchmark


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--json", action="store_true")
    args = parser.parse_args()
    rows = run_benchmark(args.repeat, args.seed)
    if args.json:
        print(json.dumps({"default_backend": kernels.BACKEND, "rows": rows}, indent=2))
    else:
        print(f"default backend: {kernels.BACKEND}")
        print(format_table(rows))


if __name__ == "__main__":
    main()
