"""Certified margin of the symmetric-init embedding and perceptron updates as n grows.

For parity, majority and a random target: gamma_lb = 0.5 / ||(M*, b*)||, the
embedding radius R, the update bound 3R^2/gamma^2 and the updates the modified
perceptron actually needs with beta = R^2 h.
"""
import argparse
import math

from symnet.perceptron import embedding_point_set, lemma3_certificate, run_modified_perceptron
from symnet.rng import make_rng
from symnet.symfun import majority_support, parity_support, random_symfun


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--sizes", type=int, nargs="+", default=[5, 10, 20, 30, 40])
    args = p.parse_args()
    print(f"{'n':>3} {'target':>8} {'gamma_lb':>10} {'n*gamma':>8} {'R':>9} {'bound':>12} {'updates':>10} {'margin':>10}")
    for n in args.sizes:
        for name, f in (("parity", parity_support(n)), ("majority", majority_support(n)),
                        ("random", random_symfun(n, make_rng(n, "target")))):
            cert = lemma3_certificate(n, f)
            ps = embedding_point_set(n, f)
            h = n**-3.0
            res = run_modified_perceptron(ps, h, ps.R**2 * h, gamma=cert.margin_lb)
            print(f"{n:3d} {name:>8} {cert.margin_lb:10.4g} {n * cert.margin_lb:8.3f} {ps.R:9.2f} "
                  f"{math.ceil(res.bound_updates):12d} {res.updates:10d} {res.achieved_margin:10.4g}")


if __name__ == "__main__":
    main()
