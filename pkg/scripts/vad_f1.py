"""Frame-level VAD F1 on alternating speech-shaped-noise/silence blocks.

    python scripts/vad_f1.py [--seeds 5] [--block 1.0] [--snr-db 20]
"""

from __future__ import annotations

import argparse

from edgeassist.bench import measure_vad_f1, vad_scenario


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--block", type=float, nargs="+", default=[1.0, 0.5])
    p.add_argument("--snr-db", type=float, default=20.0)
    args = p.parse_args()
    print("block_s  seed  speech_first  f1")
    for block in args.block:
        for seed in range(args.seeds):
            for first in (False, True):
                x, truth = vad_scenario(seed, block_s=block, speech_first=first, snr_db=args.snr_db)
                print(f"{block:7.2f}  {seed:>4}  {first!s:>12}  {measure_vad_f1(x, truth):.3f}")


if __name__ == "__main__":
    main()
