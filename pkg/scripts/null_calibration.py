"""Share of FDR-significant cells when no signal is planted (beta = 0).

Compares the stationary-level noise model with a random-walk one; the latter
shows the inflation caused by overlapping return and score windows.

    python scripts/null_calibration.py --seeds 50
"""

import argparse

import numpy as np

from sentiment_lab import DEFAULT_GRID
from sentiment_lab.correlation import build_grid
from sentiment_lab.market import build_return_grid
from sentiment_lab.significance import assess
from sentiment_lab.signal import signal_family
from sentiment_lab.synthetic import generate_synthetic_fixture


def significant_fraction(seed, noise_model, alpha, days):
    fx = generate_synthetic_fixture(seed, beta=0.0, n_days=days, noise_model=noise_model)
    family = signal_family(fx.sentiments, DEFAULT_GRID)
    hits = total = 0
    for prices in fx.prices.values():
        sig = assess(build_grid(family, build_return_grid(prices, DEFAULT_GRID)), alpha)
        hits += int(sig.mask.sum())
        total += int((~np.isnan(sig.raw_p)).sum())
    return hits / total


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=50)
    ap.add_argument("--alpha", type=float, default=0.01)
    ap.add_argument("--days", type=int, default=3500)
    ap.add_argument("--models", nargs="+", default=["level", "walk"], choices=["level", "walk"])
    args = ap.parse_args()

    for model in args.models:
        fr = np.array([significant_fraction(1000 + s, model, args.alpha, args.days) for s in range(args.seeds)])
        within = (fr <= 2 * args.alpha).mean() * 100
        print(f"{model:5s}  median {np.median(fr):.4f}  max {fr.max():.4f}  "
              f"seeds within 2*alpha: {within:.0f}%")


if __name__ == "__main__":
    main()
