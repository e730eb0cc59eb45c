"""Experiment presets, per-seed runs, aggregation and output files."""
from __future__ import annotations

import ast
import csv
import json
import math
import operator
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .network import TwoLayerNetwork, random_init, symmetric_init
from .perceptron import lemma3_certificate
from .rng import make_rng
from .symfun import (
    SymmetricFunction,
    flip_labels,
    parity_support,
    perturb_inputs,
    random_symfun,
    sample_dataset,
    sample_inputs,
)
from .trainer import TRACE_HEADER, TrainConfig, TrainTrace, train, train_error

SYMMETRIC = "symmetric"
RANDOM = "random"
FROZEN = "frozen_hidden"

PARITY = "parity"
RANDOM_SYMMETRIC = "random_symmetric"
EXPLICIT = "explicit"

NO_CORRUPTION = "none"
LABEL_FLIP = "label_flip"
INPUT_SHIFT = "input_shift"


# -- parameter expressions --------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}


def evaluate_expr(expr: str | float | int, **names: float) -> float:
    """Evaluate expressions such as ``n^-6``, ``n^3*h`` or ``10*n``.

    ``^`` means power; only numbers, the given names, + - * / and powers are allowed.
    """
    if isinstance(expr, (int, float)):
        return float(expr)
    tree = ast.parse(str(expr).replace("^", "**"), mode="eval")

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name):
            if node.id not in names:
                raise ValueError(f"unknown name {node.id!r} in {expr!r}")
            return float(names[node.id])
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](ev(node.operand))
        raise ValueError(f"unsupported syntax in {expr!r}")

    return ev(tree)


# -- configuration -----------------------------------------------------------

@dataclass(frozen=True)
class Arm:
    """One training curve: an init scheme with its own sample size and step."""

    label: str
    init: str = SYMMETRIC
    sample_size: str = "n"
    h: str = "n^-6"
    beta: str = "n^3*h"
    epochs: int = 200_000


@dataclass(frozen=True)
class ExperimentConfig:
    preset: str
    n: int
    target: str
    arms: tuple[Arm, ...]
    support: tuple[int, ...] | None = None
    corruption: str = NO_CORRUPTION
    corruption_level: float = 0.0
    seeds: int = 10
    true_error_samples: int = 10_000
    random_init_scale: float = 1.0
    stop_at_zero_loss: bool = True
    # enforce the drift and ||M|| bounds on symmetric arms, R = n^(3/2), update budget 3R^2/gamma^2
    theory_monitors: bool = False
    monitor_probe_size: int = 0
    eval_schedule: str = "log"
    slow: bool = False
    description: str = ""

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.seeds < 1:
            raise ValueError("seeds must be >= 1")
        if self.target not in (PARITY, RANDOM_SYMMETRIC, EXPLICIT):
            raise ValueError(f"unknown target {self.target!r}")
        if self.target == EXPLICIT and self.support is None:
            raise ValueError("explicit target needs a support")
        if self.corruption not in (NO_CORRUPTION, LABEL_FLIP, INPUT_SHIFT):
            raise ValueError(f"unknown corruption {self.corruption!r}")
        labels = [a.label for a in self.arms]
        if not labels or len(set(labels)) != len(labels):
            raise ValueError("arms must be nonempty with distinct labels")
        for a in self.arms:
            if a.init not in (SYMMETRIC, RANDOM, FROZEN):
                raise ValueError(f"unknown init {a.init!r}")
            m, h, beta = self.arm_params(a)
            if not (m >= 1 and math.isfinite(h) and h > 0 and math.isfinite(beta) and beta >= 0):
                raise ValueError(f"arm {a.label!r}: bad parameters m={m}, h={h}, beta={beta}")

    def arm_params(self, arm: Arm) -> tuple[int, float, float]:
        n = self.n
        m = int(round(evaluate_expr(arm.sample_size, n=n)))
        h = evaluate_expr(arm.h, n=n)
        beta = evaluate_expr(arm.beta, n=n, h=h, R=n**1.5)
        return m, h, beta

    def to_dict(self) -> dict:
        d = asdict(self)
        d["arms"] = [asdict(a) for a in self.arms]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        d["arms"] = tuple(Arm(**a) for a in d["arms"])
        if d.get("support") is not None:
            d["support"] = tuple(d["support"])
        return cls(**d)


def load_config(path) -> ExperimentConfig:
    return ExperimentConfig.from_dict(json.loads(Path(path).read_text()))


def save_config(cfg: ExperimentConfig, path) -> None:
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=1) + "\n")


# -- presets -----------------------------------------------------------------

def _fig1(n: int, preset: str, slow: bool) -> ExperimentConfig:
    return ExperimentConfig(
        preset, n, RANDOM_SYMMETRIC,
        (Arm("frozen_hidden", FROZEN), Arm("full", SYMMETRIC)),
        slow=slow,
        description=f"sample of size n, n={n}; second layer only vs. both layers, h=n^-6",
    )


def _sample_sweep(n: int, preset: str, target: str, name: str) -> ExperimentConfig:
    # epoch caps keep each arm near a few million SGD steps
    sizes = (("n", 20_000), ("n^2", 20_000), ("n^3", 500), ("n^4", 25))
    arms = []
    for size, epochs in sizes:
        tag = size.replace("^", "")
        arms.append(Arm(f"random_m={tag}", RANDOM, size, "n^-3", "n^3*h", epochs))
        arms.append(Arm(f"symmetric_m={tag}", SYMMETRIC, size, "n^-3", "n^3*h", epochs))
    return ExperimentConfig(
        preset, n, target, tuple(arms), slow=True,
        description=f"{name}: random vs. symmetric init, samples n..n^4, n={n}, h=n^-3",
    )


def _preset_table() -> dict[str, ExperimentConfig]:
    p = {
        "fig1a": _fig1(30, "fig1a", False),
        "fig1b": _fig1(60, "fig1b", True),
        "fig2": ExperimentConfig(
            "fig2", 30, RANDOM_SYMMETRIC,
            tuple(Arm(f"h=n^-{k}", SYMMETRIC, "n", f"n^-{k}") for k in (2, 3, 4)),
            description="step sizes n^-2, n^-3, n^-4; n=30, sample of size n",
        ),
        "fig3": ExperimentConfig(
            "fig3", 30, RANDOM_SYMMETRIC, (Arm("beta=0", SYMMETRIC, "n", "n^-6", "0"),),
            description="beta=0; n=30, sample of size n",
        ),
        "fig4": _sample_sweep(20, "fig4", PARITY, "parity"),
        "fig5": _sample_sweep(20, "fig5", RANDOM_SYMMETRIC, "random symmetric function"),
        "fig6": ExperimentConfig(
            "fig6", 30, RANDOM_SYMMETRIC, (Arm("label_flip", SYMMETRIC, "10*n", "n^-6", "n^3*h", 10_000),),
            corruption=LABEL_FLIP, corruption_level=0.1,
            description="labels flipped with probability 1/10; n=30, sample of size 10n",
        ),
        "fig7": ExperimentConfig(
            "fig7", 30, RANDOM_SYMMETRIC, (Arm("input_shift", SYMMETRIC, "10*n", "n^-6", "n^3*h", 10_000),),
            corruption=INPUT_SHIFT, corruption_level=0.1,
            description="inputs shifted uniformly in [-0.1, 0.1]; n=30, sample of size 10n",
        ),
        "theory": ExperimentConfig(
            "theory", 20, RANDOM_SYMMETRIC,
            (Arm("symmetric", SYMMETRIC, "10*n", "n^-6", "R^2*h", 1_000_000),),
            theory_monitors=True, monitor_probe_size=1000,
            description="Theory regime: n=20, m=10n, h=n^-6, beta=R^2 h with R=n^(3/2), bounds enforced",
        ),
    }
    return p


PRESET_IDS = ("fig1a", "fig1b", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "theory")


def figure_preset(preset_id: str) -> ExperimentConfig:
    table = _preset_table()
    if preset_id not in table:
        raise KeyError(f"unknown preset {preset_id!r}; choose from {', '.join(PRESET_IDS)}")
    return table[preset_id]


# -- error estimates ---------------------------------------------------------

def estimate_true_error(net: TwoLayerNetwork, f: SymmetricFunction, n: int, sample_count: int,
                        rng: np.random.Generator) -> float:
    """Misclassification rate on ``sample_count`` fresh uniform inputs."""
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    X = sample_inputs(n, sample_count, rng)
    return float(np.mean(net.predict_many(X) != f.labels(X)))


def weight_class_agreement(net: TwoLayerNetwork, n: int, pairs: int, rng: np.random.Generator) -> float:
    """Fraction of random same-weight input pairs (x, a permutation of x) predicted alike."""
    X = sample_inputs(n, pairs, rng)
    Xp = np.array([x[rng.permutation(n)] for x in X]).reshape(pairs, n)
    return float(np.mean(net.predict_many(X) == net.predict_many(Xp)))


def log_schedule(epoch: int) -> bool:
    """Every epoch up to 100, then about 90 epochs per decade."""
    if epoch <= 100:
        return True
    step = 10 ** (int(math.log10(epoch)) - 1)
    return epoch % step == 0


# -- running -----------------------------------------------------------------

@dataclass
class ArmResult:
    label: str
    trace: TrainTrace
    m: int
    h: float
    beta: float
    update_budget: int | None = None
    gamma_lb: float | None = None
    net: TwoLayerNetwork | None = field(default=None, repr=False)

    @property
    def final_train_error(self) -> float:
        return self.trace.final_train_error

    @property
    def final_true_error(self) -> float:
        return self.trace.final_true_error

    @property
    def updates(self) -> int:
        return self.trace.updates

    @property
    def status(self) -> str:
        return self.trace.status


@dataclass
class SeedResult:
    seed: int
    support: tuple[int, ...]
    arms: dict[str, ArmResult]


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    seeds: list[SeedResult]

    @property
    def arm_labels(self) -> list[str]:
        return [a.label for a in self.config.arms]

    def aggregate(self) -> dict[str, dict[str, float]]:
        """Mean/min/max of final train error, true error and updates per arm."""
        out = {}
        for label in self.arm_labels:
            rows = [s.arms[label] for s in self.seeds if label in s.arms]
            stats = {"seeds": float(len(rows))}
            for key in ("final_train_error", "final_true_error", "updates"):
                vals = np.array([getattr(r, key) for r in rows], dtype=np.float64)
                if len(vals):
                    stats[f"mean_{key}"] = float(vals.mean())
                    stats[f"min_{key}"] = float(vals.min())
                    stats[f"max_{key}"] = float(vals.max())
            out[label] = stats
        return out


class SeedFailure(RuntimeError):
    pass


def _make_target(cfg: ExperimentConfig, seed: int) -> SymmetricFunction:
    if cfg.target == PARITY:
        return parity_support(cfg.n)
    if cfg.target == EXPLICIT:
        return SymmetricFunction(cfg.n, frozenset(cfg.support))
    return random_symfun(cfg.n, make_rng(seed, "target"))


def run_seed(cfg: ExperimentConfig, seed: int, keep_nets: bool = False) -> SeedResult:
    """Run every arm of ``cfg`` for one seed; arms share the target, test batch and
    (per sample size) the training data."""
    n = cfg.n
    f = _make_target(cfg, seed)
    test_rng = make_rng(seed, "test")
    X_test = sample_inputs(n, cfg.true_error_samples, test_rng)
    y_test = f.labels(X_test)

    def true_error(net):
        return float(np.mean(net.predict_many(X_test) != y_test))

    schedule = log_schedule if cfg.eval_schedule == "log" else None
    arms = {}
    for arm in cfg.arms:
        m, h, beta = cfg.arm_params(arm)
        ds = sample_dataset(f, m, make_rng(seed, "data", m))
        if cfg.corruption == LABEL_FLIP:
            ds = flip_labels(ds, cfg.corruption_level, make_rng(seed, "corrupt", m))
        elif cfg.corruption == INPUT_SHIFT:
            ds = perturb_inputs(ds, cfg.corruption_level, make_rng(seed, "corrupt", m))

        if arm.init == RANDOM:
            net0 = random_init(n, 4 * n + 2, cfg.random_init_scale, make_rng(seed, "init", arm.label))
        else:
            net0 = symmetric_init(n)

        tcfg = TrainConfig(h=h, beta=beta, max_epochs=arm.epochs, frozen_hidden=arm.init == FROZEN,
                           stop_at_zero_loss=cfg.stop_at_zero_loss,
                           monitor_probe_size=cfg.monitor_probe_size)
        budget = gamma = None
        if cfg.theory_monitors and arm.init != RANDOM:
            R = n**1.5
            gamma = lemma3_certificate(n, f).margin_lb
            budget = math.ceil(3 * R**2 / gamma**2)
            R_X = max(math.sqrt(n), float(np.linalg.norm(ds.X, axis=1).max()))
            tcfg = replace(tcfg, max_updates=budget, bound_R=R, bound_RX=R_X, enforce_bounds=True)
        try:
            net, trace = train(net0, ds, tcfg, make_rng(seed, "train", arm.label), true_error, schedule)
        except (FloatingPointError, AssertionError) as exc:
            raise SeedFailure(f"seed {seed}, arm {arm.label}: {exc}") from exc
        arms[arm.label] = ArmResult(arm.label, trace, m, h, beta, budget, gamma, net if keep_nets else None)
    return SeedResult(seed, tuple(f.sorted_support), arms)


def _run_seed_star(args):
    return run_seed(*args)


def run_experiment(cfg: ExperimentConfig, seed: int = 0, jobs: int = 1, keep_nets: bool = False) -> ExperimentResult:
    """Seeds ``seed .. seed + cfg.seeds - 1``; results depend only on (cfg, seed)."""
    seeds = [seed + i for i in range(cfg.seeds)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_seed_star, [(cfg, s, keep_nets) for s in seeds]))
    else:
        results = [run_seed(cfg, s, keep_nets) for s in seeds]
    return ExperimentResult(cfg, results)


# -- output ------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return str(v)


def write_csv(result: ExperimentResult, out_dir) -> Path:
    """Write ``<out>/<preset>/<seed>/trace.csv``, ``summary.csv`` and ``seeds.csv``."""
    root = Path(out_dir) / result.config.preset
    try:
        root.mkdir(parents=True, exist_ok=True)
        for s in result.seeds:
            d = root / str(s.seed)
            d.mkdir(exist_ok=True)
            with (d / "trace.csv").open("w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["arm"] + TRACE_HEADER)
                for label, arm in s.arms.items():
                    for r in arm.trace.epochs:
                        w.writerow([label] + [_fmt(getattr(r, k)) for k in TRACE_HEADER])
        with (root / "seeds.csv").open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["seed", "arm", "m", "status", "epochs", "updates", "final_train_error", "final_true_error"])
            for s in result.seeds:
                for label, arm in s.arms.items():
                    w.writerow([s.seed, label, arm.m, arm.status, len(arm.trace.epochs), arm.updates,
                                _fmt(arm.final_train_error), _fmt(arm.final_true_error)])
        agg = result.aggregate()
        keys = ["seeds"] + [f"{s}_{k}" for k in ("final_train_error", "final_true_error", "updates")
                            for s in ("mean", "min", "max")]
        with (root / "summary.csv").open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["arm"] + keys)
            for label in result.arm_labels:
                w.writerow([label] + [_fmt(agg[label].get(k, math.nan)) for k in keys])
        meta = {"config": result.config.to_dict(), "seeds": [s.seed for s in result.seeds],
                "note": "curves are seed means"}
        (root / "metadata.json").write_text(json.dumps(meta, indent=1) + "\n")
    except OSError as exc:
        raise OSError(f"writing results under {root}: {exc}") from exc
    return root


def _mean_curves(result: ExperimentResult, label: str, key: str) -> list[tuple[int, float]]:
    """Across-seed mean of a per-epoch series; a finished run keeps its last value."""
    series = []
    for s in result.seeds:
        recs = [r for r in s.arms[label].trace.epochs if not math.isnan(getattr(r, key))]
        if recs:
            series.append((np.array([r.epoch for r in recs]), np.array([getattr(r, key) for r in recs])))
    if not series:
        return []
    last_epochs = {int(e[-1]) for e, _ in series}
    grid = np.array(sorted({int(x) for e, _ in series for x in e if log_schedule(int(x))} | last_epochs))
    total = np.zeros(len(grid))
    for e, v in series:
        idx = np.clip(np.searchsorted(e, grid, side="right") - 1, 0, None)
        total += v[idx]
    return [(int(g), float(t / len(series))) for g, t in zip(grid, total)]


_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"]


def render_svg(result: ExperimentResult) -> str:
    """Train (solid) and true (dashed) error vs. epoch on a log axis; one pair of polylines per arm."""
    W, H, L, T, Rm, Bm = 720, 420, 70, 40, 200, 60
    pw, ph = W - L - Rm, H - T - Bm
    curves = []
    for label in result.arm_labels:
        for key, dash in (("train_error", ""), ("true_error", "6,4")):
            curves.append((label, key, dash, _mean_curves(result, label, key)))
    max_epoch = max([e for *_, pts in curves for e, _ in pts] + [10])
    span = math.log10(max_epoch)

    def px(e):
        return L + pw * (math.log10(e) / span)

    def py(v):
        return T + ph * (1.0 - min(max(v, 0.0), 1.0))

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2:.1f}" y="20" text-anchor="middle" font-size="14">{_esc(result.config.preset)}</text>',
        f'<line x1="{L}" y1="{T + ph}" x2="{L + pw}" y2="{T + ph}" stroke="black"/>',
        f'<line x1="{L}" y1="{T}" x2="{L}" y2="{T + ph}" stroke="black"/>',
    ]
    for v in (0.0, 0.25, 0.5, 0.75, 1.0):
        lines.append(f'<text x="{L - 8}" y="{py(v) + 4:.1f}" text-anchor="end" font-size="11">{v:.2f}</text>')
    for k in range(int(span) + 1):
        x = px(10**k)
        lines.append(f'<text x="{x:.1f}" y="{T + ph + 18}" text-anchor="middle" font-size="11">1e{k}</text>')
    lines.append(f'<text x="{L + pw / 2:.1f}" y="{H - 15}" text-anchor="middle" font-size="12">epoch (log scale)</text>')
    lines.append(f'<text x="18" y="{T + ph / 2:.1f}" text-anchor="middle" font-size="12" '
                 f'transform="rotate(-90 18 {T + ph / 2:.1f})">error</text>')
    for i, (label, key, dash, pts) in enumerate(curves):
        color = _PALETTE[(i // 2) % len(_PALETTE)]
        coords = " ".join(f"{px(e):.2f},{py(v):.2f}" for e, v in pts)
        style = f' stroke-dasharray="{dash}"' if dash else ""
        lines.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{style} points="{coords}"/>')
        ly = T + 14 * i
        lines.append(f'<line x1="{W - Rm + 10}" y1="{ly}" x2="{W - Rm + 30}" y2="{ly}" stroke="{color}"{style}/>')
        lines.append(f'<text x="{W - Rm + 35}" y="{ly + 4}" font-size="10">{_esc(label)} {key.split("_")[0]}</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def write_svg(result: ExperimentResult, path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(render_svg(result))
    except OSError as exc:
        raise OSError(f"writing {path}: {exc}") from exc
    return path


def write_outputs(result: ExperimentResult, out_dir) -> Path:
    root = write_csv(result, out_dir)
    write_svg(result, root / "figure.svg")
    return root


__all__ = [
    "Arm", "ExperimentConfig", "ExperimentResult", "PRESET_IDS", "estimate_true_error", "evaluate_expr",
    "figure_preset", "run_experiment", "run_seed", "train_error", "weight_class_agreement",
    "write_csv", "write_svg", "write_outputs",
]
