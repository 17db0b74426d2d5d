"""Closed-form and series ruin probabilities checked against simulation.

Two oracles: the finite-horizon formula for exponential claims, and the
Appell-polynomial series for integer-valued (logarithmic) claims.  Each is
compared with a Monte Carlo estimate and its z-score.

Run:  python3 demos/analytic_vs_simulation.py [--paths N]
"""

import argparse
import math

from ruinalarm import Exponential, Logarithmic, RiskModel, estimate_ruin_cdf
from ruinalarm.analytic import psi_finite_exponential, psi_ultimate_exponential, survival_finite_discrete_ik
from ruinalarm.simulate import time_grid


def _row(label, exact, mc, n):
    z = (mc - exact) / math.sqrt(max(mc * (1 - mc), 1e-300) / n)
    print(f"{label:<22} exact {exact:.5f}  MC {mc:.5f}  z {z:+.2f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    # exponential(1) claims at rate 1, premium 1.5: loading 0.5
    m = RiskModel(Exponential(1.0), 1.0, 1.5, 5.0)
    cdf = estimate_ruin_cdf(m, horizon=10.0, n_paths=args.paths, master_seed=args.seed, grid=time_grid(10.0, 0.5))
    for t in (1.0, 5.0, 10.0):
        _row(f"exponential psi(5,{t:g})", psi_finite_exponential(1.0, 0.5, 5.0, t, premium_rate=1.5), cdf.at(t), args.paths)
    print(f"psi(5) ultimate {psi_ultimate_exponential(1.0, 0.5, 5.0):.5f}, "
          f"psi(5, 200) {psi_finite_exponential(1.0, 0.5, 5.0, 200.0, premium_rate=1.5):.5f}")

    m = RiskModel(Logarithmic(0.5), 1.0, 1.2, 2.0)
    cdf = estimate_ruin_cdf(m, horizon=2.0, n_paths=args.paths, master_seed=args.seed, grid=time_grid(2.0, 0.5))
    for t in (0.5, 1.0, 2.0):
        _row(f"logarithmic psi(2,{t:g})", 1.0 - survival_finite_discrete_ik(m, 2.0, t), cdf.at(t), args.paths)


if __name__ == "__main__":
    main()
