"""Compare sampled TPM statistics with the analytic tables on the Rabi example.

    python3 scripts/monte_carlo_compare.py [--samples N] [--seed S]
"""

import argparse
import math

from nonideal_tpm.fluct import jarzynski_functional
from nonideal_tpm.measurement import PointerModel, assignment_minimal_energy, build_channel
from nonideal_tpm.scenarios.montecarlo import monte_carlo_tpm
from nonideal_tpm.scenarios.rabi import rabi_process
from nonideal_tpm.tpm import energy_change_nonideal, mean_work_of, nonideal_joint


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--samples", type=int, default=1_000_000)
    parser.add_argument("--seed", type=int, default=2024)
    args = parser.parse_args()
    beta = 1.0 / 30.0
    print(f"{'ratio':>6} {'theta':>7} {'<W> mc':>12} {'<W> exact':>12} {'z':>6} {'<e^-bW> mc':>12} {'exact':>12} {'z':>6}")
    for index, (ratio, theta) in enumerate((r, t) for r in (1, 150, 750) for t in (math.pi / 3, math.pi)):
        p = rabi_process(1.0, theta)
        ch = build_channel(PointerModel.qubit_register(3, 0.1, ratio * beta), assignment_minimal_energy(2), p.h0)
        est = monte_carlo_tpm(p, beta, ch, ch, args.samples, args.seed, index)
        w = mean_work_of(nonideal_joint(p, beta, ch), p.h0, p.hf)
        j = jarzynski_functional(p, beta, ch)
        zw = (est.mean_w.value - w) / est.mean_w.stderr
        zj = (est.jarzynski.value - j) / est.jarzynski.stderr
        print(f"{ratio:>6} {theta:>7.4f} {est.mean_w.value:>12.6f} {w:>12.6f} {zw:>6.2f} {est.jarzynski.value:>12.6f} {j:>12.6f} {zj:>6.2f}")
        de = energy_change_nonideal(p, beta, ch, ch)
        print(f"{'':>14} energy change mc {est.energy_change.value:.6f} +- {est.energy_change.stderr:.1e}, exact {de:.6f}")


if __name__ == "__main__":
    main()
