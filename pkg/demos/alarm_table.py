"""Alarm times for exponential claims over a grid of alarm parameters.

The risk process has exponential(0.5) claims at rate 20, premium rate 25 and
initial capital 15, so premiums exactly match expected claims.  One ruin-time
CDF is estimated and every (d, alpha) cell reuses it; a cell reads "NA" when
no grid time meets both the window and the survival conditions.

Run:  python3 demos/alarm_table.py [--paths N] [--beta B]
"""

import argparse

from ruinalarm import Exponential, RiskModel, estimate_ruin_cdf
from ruinalarm.alarm import AlarmParams, find_alarm

ALPHAS = (0.3, 0.325, 0.35, 0.375, 0.4, 0.425, 0.45, 0.475, 0.5)
WINDOWS = (0.75, 0.8, 0.85, 0.9, 0.95, 1.0, 1.05, 1.1, 1.15)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=100_000)
    ap.add_argument("--beta", type=float, default=0.025)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    model = RiskModel(Exponential(0.5), 20.0, 25.0, 15.0)
    cdf = estimate_ruin_cdf(model, horizon=3.0, n_paths=args.paths, master_seed=args.seed)
    print(f"P(T <= 1) = {cdf.at(1.0):.4f}, P(T <= 3) = {cdf.at(3.0):.4f}  ({args.paths} paths)")
    print("d \\ alpha " + "".join(f"{a:>7}" for a in ALPHAS))
    for d in WINDOWS:
        cells = []
        for alpha in ALPHAS:
            res = find_alarm(cdf.time_grid, cdf.survival, AlarmParams(alpha, args.beta, d, search_horizon=3.0))
            cells.append("NA" if res.time is None else f"{res.time:.2f}")
        print(f"{d:<10}" + "".join(f"{c:>7}" for c in cells))
    # A larger alpha tolerates a smaller ruin probability in the window, so alarms move earlier.


if __name__ == "__main__":
    main()
