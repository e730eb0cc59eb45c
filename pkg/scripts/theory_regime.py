"""Small-step SGD from the symmetric init with the stability bounds enforced.

Prints, per seed: updates used against the 3R^2/gamma^2 budget, the final
errors, the worst drift and ||M|| ratios to their bounds, and how often
same-weight input pairs get the same prediction.
"""
import argparse
from dataclasses import replace

from symnet import harness
from symnet.rng import make_rng


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--pairs", type=int, default=1000)
    args = p.parse_args()
    cfg = replace(harness.figure_preset("theory"), n=args.n, seeds=args.seeds)
    print("seed  updates/budget    train   true    drift/bound  |M|/bound  agreement")
    for seed in range(args.seeds):
        arm = harness.run_seed(cfg, seed, keep_nets=True).arms["symmetric"]
        mons = [m for m in arm.trace.monitors if m.t > 0]
        d = max(m.max_drift / m.drift_bound for m in mons)
        mm = max(m.M_norm / m.M_bound for m in mons)
        agree = harness.weight_class_agreement(arm.net, args.n, args.pairs, make_rng(seed, "pairs"))
        print(f"{seed:4d}  {arm.updates:>8d}/{arm.update_budget:<9d} {arm.final_train_error:.4f}  "
              f"{arm.final_true_error:.4f}  {d:.3e}    {mm:.3f}      {agree:.4f}")


if __name__ == "__main__":
    main()
