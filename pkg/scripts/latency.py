"""Wall-clock latency of cache-hit text requests through a gateway with mocks.

    python scripts/latency.py [--requests 1000]
"""

from __future__ import annotations

import argparse

import numpy as np

from edgeassist.bench import cache_hit_latencies


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--requests", type=int, default=1000)
    args = p.parse_args()
    ms = cache_hit_latencies(args.requests)
    for q in (50, 90, 99):
        print(f"p{q}: {np.percentile(ms, q):.2f} ms")
    print(f"max: {ms.max():.2f} ms over {ms.size} requests")


if __name__ == "__main__":
    main()
