"""Run experiment presets and write CSV/SVG results.

    python3 scripts/reproduce_figures.py fig2 fig3 --out results
    python3 scripts/reproduce_figures.py --all --seeds 3
"""
import argparse
import logging
import time
from dataclasses import replace

from symnet import harness


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("presets", nargs="*", help=f"any of {', '.join(harness.PRESET_IDS)}")
    p.add_argument("--all", action="store_true", help="every preset, slow ones included")
    p.add_argument("--seeds", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="results")
    args = p.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    ids = harness.PRESET_IDS if args.all else args.presets
    if not ids:
        p.error("name at least one preset or pass --all")
    for pid in ids:
        cfg = harness.figure_preset(pid)
        if args.seeds:
            cfg = replace(cfg, seeds=args.seeds)
        t0 = time.perf_counter()
        result = harness.run_experiment(cfg, seed=args.seed, jobs=args.jobs)
        root = harness.write_outputs(result, args.out)
        print(f"{pid}: {cfg.description} ({time.perf_counter() - t0:.0f}s)")
        for label, st in result.aggregate().items():
            print(f"  {label:>20}  train {st['mean_final_train_error']:.4f}  true {st['mean_final_true_error']:.4f}"
                  f"  (true min {st['min_final_true_error']:.4f}, max {st['max_final_true_error']:.4f})")
        print(f"  -> {root}")


if __name__ == "__main__":
    main()
