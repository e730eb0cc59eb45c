"""Command-line front end.

Exit status: 0 on success, 1 when a checked bound or representation fails,
2 on usage errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import harness
from .network import random_init, save_network, symmetric_init
from .perceptron import (
    AlignmentError,
    PerceptronDidNotConverge,
    embedding_point_set,
    lemma3_certificate,
    run_modified_perceptron,
)
from .reprbuild import build_relu_net, build_sigmoid_net, sigmoid_gaps_ok, verify_repr
from .rng import make_rng
from .symfun import (
    SymmetricFunction,
    flip_labels,
    majority_support,
    parity_support,
    perturb_inputs,
    random_symfun,
    sample_dataset,
    sample_inputs,
    write_dataset_csv,
)
from .trainer import BoundViolation, TrainConfig, TrainingDiverged, train

log = logging.getLogger("symnet")


class UsageError(Exception):
    pass


def _target(spec: str, n: int, seed: int | None) -> SymmetricFunction:
    """parity | majority | random | empty | full | comma-separated weights."""
    if spec == "parity":
        return parity_support(n)
    if spec == "majority":
        return majority_support(n)
    if spec == "random":
        if seed is None:
            raise UsageError("a random target needs --seed")
        return random_symfun(n, make_rng(seed, "target"))
    if spec == "empty":
        return SymmetricFunction(n, frozenset())
    if spec == "full":
        return SymmetricFunction(n, frozenset(range(n + 1)))
    try:
        return SymmetricFunction(n, frozenset(int(k) for k in spec.split(",") if k.strip()))
    except ValueError as exc:
        raise UsageError(f"bad target {spec!r}: {exc}") from exc


def _out_dir(args) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_repr_verify(args) -> int:
    f = _target(args.support, args.n, args.seed)
    net = build_relu_net(f) if args.activation == "relu" else build_sigmoid_net(f)
    report = verify_repr(net, f)
    path = _out_dir(args) / f"repr_{args.activation}_n{args.n}.csv"
    report.to_csv(path)
    ok = report.passed and (args.activation == "relu" or sigmoid_gaps_ok(net, f))
    print(f"support: {f.sorted_support}")
    print(f"hidden units: {net.hidden_width}; exact arithmetic: {report.exact}; "
          f"exhaustive over {{0,1}}^n: {report.exhaustive}")
    print(f"{'PASS' if ok else 'FAIL'}  failing weights: {report.failures}")
    print(path)
    return 0 if ok else 1


def cmd_init_dump(args) -> int:
    if args.kind == "symmetric":
        net = symmetric_init(args.n)
    else:
        if args.seed is None:
            raise UsageError("random initialization needs --seed")
        width = args.hidden or 4 * args.n + 2
        net = random_init(args.n, width, args.scale, make_rng(args.seed, "init"))
    path = _out_dir(args) / f"init_{args.kind}_n{args.n}.json"
    save_network(net, path)
    print(f"{args.kind} network: n={net.n}, hidden width {net.hidden_width}")
    print(path)
    return 0


def cmd_certify(args) -> int:
    f = _target(args.target, args.n, args.seed)
    try:
        cert = lemma3_certificate(args.n, f)
    except AlignmentError as exc:
        print(f"FAIL  {exc}")
        return 1
    bound = math.ceil(3 * cert.R**2 / cert.margin_lb**2)
    print(f"support: {f.sorted_support}")
    print(f"gamma_lb = {cert.margin_lb:.6g}")
    print(f"||(M*, b*)|| = {cert.norm:.6g}")
    print(f"R = {cert.R:.6g}")
    print(f"update bound (beta = R^2 h) = {bound}")
    if args.out:
        path = _out_dir(args) / f"certificate_n{args.n}.json"
        path.write_text(json.dumps(cert.summary() | {"update_bound": bound, "support": f.sorted_support}, indent=1) + "\n")
        print(path)
    return 0


def cmd_perceptron(args) -> int:
    f = _target(args.target, args.n, args.seed)
    ps = embedding_point_set(args.n, f)
    cert = lemma3_certificate(args.n, f)
    h = harness.evaluate_expr(args.h, n=args.n)
    beta = harness.evaluate_expr(args.beta, n=args.n, h=h, R=ps.R)
    try:
        res = run_modified_perceptron(ps, h, beta, gamma=cert.margin_lb)
    except PerceptronDidNotConverge as exc:
        print(f"FAIL  {exc}")
        return 1
    ok_updates = res.updates <= math.ceil(res.bound_updates)
    ok_margin = res.achieved_margin >= res.bound_margin
    print(f"updates {res.updates} (bound {res.bound_updates:.6g})  {'ok' if ok_updates else 'VIOLATED'}")
    print(f"margin {res.achieved_margin:.6g} (bound {res.bound_margin:.6g})  {'ok' if ok_margin else 'VIOLATED'}")
    if args.out:
        path = _out_dir(args) / f"perceptron_n{args.n}.json"
        res.save(path)
        print(path)
    return 0 if ok_updates and ok_margin else 1


def cmd_train(args) -> int:
    if args.seed is None:
        raise UsageError("train needs --seed")
    n = args.n
    f = _target(args.target, n, args.seed)
    m = int(round(harness.evaluate_expr(args.m, n=n)))
    h = harness.evaluate_expr(args.h, n=n)
    R = n**1.5
    beta = harness.evaluate_expr(args.beta, n=n, h=h, R=R)
    ds = sample_dataset(f, m, make_rng(args.seed, "data", m))
    if args.flip:
        ds = flip_labels(ds, args.flip, make_rng(args.seed, "corrupt", m))
    if args.shift:
        ds = perturb_inputs(ds, args.shift, make_rng(args.seed, "corrupt", m))
    if args.init == "random":
        net0 = random_init(n, 4 * n + 2, args.scale, make_rng(args.seed, "init", args.init))
    else:
        net0 = symmetric_init(n)
    cfg = TrainConfig(h=h, beta=beta, max_epochs=args.epochs, frozen_hidden=args.init == "frozen_hidden",
                      monitor_probe_size=args.probes, log_every=args.log_cadence)
    if args.theory_monitors:
        gamma = lemma3_certificate(n, f).margin_lb
        cfg = replace(cfg, max_updates=math.ceil(3 * R**2 / gamma**2), bound_R=R,
                      bound_RX=max(math.sqrt(n), float(np.linalg.norm(ds.X, axis=1).max())),
                      enforce_bounds=True)
    X_test = sample_inputs(n, 10_000, make_rng(args.seed, "test"))
    y_test = f.labels(X_test)
    out = _out_dir(args)
    try:
        net, trace = train(net0, ds, cfg, make_rng(args.seed, "train", args.init),
                           lambda nn: float(np.mean(nn.predict_many(X_test) != y_test)), harness.log_schedule)
    except BoundViolation as exc:
        print(f"FAIL  bound violated: {exc}")
        return 1
    except TrainingDiverged as exc:
        print(f"FAIL  diverged: {exc}")
        return 1
    trace.to_csv(out / "trace.csv")
    save_network(net, out / "network.json")
    write_dataset_csv(ds, out / "dataset.csv")
    print(f"status {trace.status}: {trace.updates} updates in {len(trace.epochs)} epochs")
    print(f"train error {trace.final_train_error:.4g}, true error {trace.final_true_error:.4g}")
    print(out / "trace.csv")
    return 0


def cmd_experiment(args) -> int:
    if args.seed is None:
        raise UsageError("experiment needs --seed")
    if bool(args.preset) == bool(args.config):
        raise UsageError("give exactly one of --preset or --config")
    try:
        cfg = harness.figure_preset(args.preset) if args.preset else harness.load_config(args.config)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from exc
    if args.seeds:
        cfg = replace(cfg, seeds=args.seeds)
    if cfg.slow:
        log.warning("preset %s is slow", cfg.preset)
    try:
        result = harness.run_experiment(cfg, seed=args.seed, jobs=args.jobs)
    except harness.SeedFailure as exc:
        print(f"FAIL  {exc}")
        return 1
    root = harness.write_outputs(result, args.out or "results")
    print(cfg.description)
    for label, stats in result.aggregate().items():
        print(f"  {label:>20}: train {stats['mean_final_train_error']:.4f}  "
              f"true {stats['mean_final_true_error']:.4f}  updates {stats['mean_updates']:.0f}")
    print(root)
    return 0


def cmd_list_presets(args) -> int:
    for pid in harness.PRESET_IDS:
        cfg = harness.figure_preset(pid)
        flag = " [slow]" if cfg.slow else ""
        print(f"{pid:7} {cfg.description}{flag}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="seed for every random stream")
    common.add_argument("--out", help="output directory")
    common.add_argument("--jobs", type=int, default=1, help="concurrent seeds")
    common.add_argument("--log-cadence", type=int, default=None, help="updates between monitor records")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="symnet", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)
    target_help = "parity | majority | random | empty | full | comma-separated weights"

    s = sub.add_parser("repr-verify", parents=[common],
                       help="check the explicit sigmoid/ReLU representations on every weight class",
                       description="Builds the sign(-0.5 + sum Delta_i) sigmoid network or the ReLU network "
                                   "with midpoint corrections and checks it on every "
                                   "Hamming weight; exact arithmetic for ReLU.")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--support", default="random", help=target_help)
    s.add_argument("--activation", choices=["relu", "sigmoid"], default="relu")
    s.set_defaults(func=cmd_repr_verify)

    s = sub.add_parser("init-dump", parents=[common], help="write an initial network",
                       description="Writes the symmetry-based initialization (4n+2 hidden ReLU units, "
                                   "M = 0, b = 0) or a Gaussian random one as hex-float JSON.")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--kind", choices=["symmetric", "random"], default="symmetric")
    s.add_argument("--hidden", type=int, default=None)
    s.add_argument("--scale", type=float, default=1.0)
    s.set_defaults(func=cmd_init_dump)

    s = sub.add_parser("certify", parents=[common], help="margin certificate on the initial embedding",
                       description="Margin lower bound of the initial embedding "
                                   "from the ReLU representation, and the perceptron update bound for beta = R^2 h.")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--target", default="parity", help=target_help)
    s.set_defaults(func=cmd_certify)

    s = sub.add_parser("perceptron", parents=[common], help="modified perceptron on the initial embedding",
                       description="Runs the modified perceptron (update while y w.v <= beta) on the n+1 "
                                   "embedded weight classes and checks its update-count and margin guarantees.")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--target", default="parity", help=target_help)
    s.add_argument("--h", default="1")
    s.add_argument("--beta", default="R^2*h", help="expression in n, h and R (embedding radius)")
    s.set_defaults(func=cmd_perceptron)

    s = sub.add_parser("train", parents=[common], help="hinge-loss SGD on the full network",
                       description="SGD with batch size one on both layers (the four-part update); "
                                   "--theory-monitors enforces the hidden-drift and ||M|| growth bounds "
                                   "with R = n^(3/2).")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--target", default="random", help=target_help)
    s.add_argument("--m", default="10*n", help="sample size expression in n")
    s.add_argument("--h", default="n^-6")
    s.add_argument("--beta", default="n^3*h")
    s.add_argument("--init", choices=["symmetric", "random", "frozen_hidden"], default="symmetric")
    s.add_argument("--scale", type=float, default=1.0, help="random init scale")
    s.add_argument("--epochs", type=int, default=100_000)
    s.add_argument("--flip", type=float, default=0.0, help="label flip probability")
    s.add_argument("--shift", type=float, default=0.0, help="uniform input shift radius")
    s.add_argument("--probes", type=int, default=0, help="extra fresh inputs for drift monitoring")
    s.add_argument("--theory-monitors", action="store_true")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("experiment", parents=[common], help="run a preset experiment",
                       description="Runs a preset (fig1a..fig7, theory) or a JSON config; writes "
                                   "<out>/<preset>/<seed>/trace.csv, summary.csv and figure.svg.")
    s.add_argument("--preset")
    s.add_argument("--config")
    s.add_argument("--seeds", type=int, default=None, help="override the preset's seed count")
    s.set_defaults(func=cmd_experiment)

    s = sub.add_parser("list-presets", parents=[common], help="list experiment presets")
    s.set_defaults(func=cmd_list_presets)
    p._subcommands = sub.choices
    return p


def dispatch(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser._subcommands[args.command].print_usage(sys.stderr)
        print(f"usage error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
