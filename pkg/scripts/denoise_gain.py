"""Segmental-SNR improvement of spectral subtraction on a sine in 0 dB white noise.

    python scripts/denoise_gain.py [--seeds 5] [--freq 1000 440 3000]
"""

from __future__ import annotations

import argparse

from edgeassist.bench import denoise_scenario, measure_denoise_gain


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--freq", type=float, nargs="+", default=[1000.0])
    args = p.parse_args()
    print("freq_hz  seed  in_db  out_db  gain_db")
    for freq in args.freq:
        for seed in range(args.seeds):
            clean, noisy, lead = denoise_scenario(seed, freq=freq)
            before, after = measure_denoise_gain(clean, noisy, lead)
            print(f"{freq:7.0f}  {seed:>4}  {before:5.1f}  {after:6.1f}  {after - before:7.1f}")


if __name__ == "__main__":
    main()
