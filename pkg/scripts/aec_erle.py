"""ERLE of the echo canceller on the synthetic double-talk scenario, over several seeds.

    python scripts/aec_erle.py [--seeds 5] [--taps 256] [--plain]
"""

from __future__ import annotations

import argparse

from edgeassist.audio.aec import AecConfig
from edgeassist.bench import echo_scenario, measure_erle


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--taps", type=int, default=256)
    p.add_argument("--mu", type=float, default=0.5)
    p.add_argument("--near-snr-db", type=float, default=0.0)
    p.add_argument("--plain", action="store_true", help="single-filter NLMS without the shadow path")
    args = p.parse_args()
    cfg = AecConfig(taps=args.taps, step_size_mu=args.mu, two_path=not args.plain)
    print("seed  erle_db  runtime_s")
    for seed in range(args.seeds):
        erle, _, runtime = measure_erle(echo_scenario(seed, near_snr_db=args.near_snr_db), cfg)
        print(f"{seed:>4}  {erle:7.2f}  {runtime:9.3f}")


if __name__ == "__main__":
    main()
