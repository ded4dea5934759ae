"""Hit rate of the semantic cache under Zipf and uniform request streams.

    python scripts/cache_workload.py [--requests 10000] [--distinct 500] [--capacity 100] [--s 1.0]
"""

from __future__ import annotations

import argparse

from edgeassist.bench import run_cache_workload


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--requests", type=int, default=10_000)
    p.add_argument("--distinct", type=int, default=500)
    p.add_argument("--capacity", type=int, nargs="+", default=[25, 50, 100, 200])
    p.add_argument("--s", type=float, default=1.0, help="Zipf exponent")
    p.add_argument("--seed", type=int, default=7)
    args = p.parse_args()
    print("capacity  zipf_hit  uniform_hit  peak_size")
    for cap in args.capacity:
        z = run_cache_workload("zipf", args.requests, args.distinct, cap, args.seed, args.s)
        u = run_cache_workload("uniform", args.requests, args.distinct, cap, args.seed)
        print(f"{cap:>8}  {z.hit_rate:8.3f}  {u.hit_rate:11.3f}  {max(z.max_size, u.max_size):>9}")


if __name__ == "__main__":
    main()
