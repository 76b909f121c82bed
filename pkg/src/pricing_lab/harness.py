"""Experiment harness: single episodes, seed sweeps, power-law fits, reports.

The unit of work is one (algorithm, instance, horizon, seed) run. Pseudo-regret
accrues per round as the clairvoyant value minus the expected revenue of the
posted price, never the realized revenue, so traces are deterministic given
the config. Sweeps persist one JSON fragment per completed run plus a manifest
recording completion state; the combined traces.csv is always rebuilt from
fragments in sorted run order, making its bytes independent of worker count
and identical across re-runs.
"""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .cmrup import CmrupConfig, CmrupPolicy
from .env import NoiseSpec, PricingInstance, benchmark_instance, sample_block
from .errors import DegenerateFitError, InvalidSpecError
from .exp4 import D2Exp4Policy, hyperparams
from .rng import derive_rng

ALGORITHMS = ("cmrup", "d2exp4", "oracle", "fixed-price")
NOISE_PRESETS = ("uniform", "cliff")
TRACE_COLUMNS = ("algorithm", "noise", "d", "T", "seed", "checkpoint_t", "cum_regret")
FIGURE_COLUMNS = ("algorithm", "noise", "T", "mean_final_regret", "stderr", "alpha", "c_coef")
SCHEMA_VERSION = 1
_BLOCK = 4096
# float dust from evaluating the oracle max and the posted price through the
# same expression; anything more negative is a real invariant violation
_REGRET_EPS = 1e-9


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines one run; equal configs give equal traces."""

    algo: str
    noise: str = "uniform"
    d: int = 5
    horizon: int = 8000
    seed: int = 0
    master_seed: int = 12345
    delta_mult: float = 0.35
    c_ucb: float = 0.5
    k_theta: int = 256
    k_f: int = 64
    k_policy: int = 2048
    fixed_price: float | None = None
    custom_noise: dict | None = None
    log_realized: bool = False

    def __post_init__(self) -> None:
        if self.algo not in ALGORITHMS:
            raise InvalidSpecError(f"unknown algorithm {self.algo!r}, expected one of {ALGORITHMS}")
        if self.noise not in NOISE_PRESETS and self.noise != "custom":
            raise InvalidSpecError(f"unknown noise {self.noise!r}")
        if self.noise == "custom" and not self.custom_noise:
            raise InvalidSpecError("custom noise requires custom_noise components")
        if self.horizon < 1:
            raise InvalidSpecError(f"horizon must be positive, got {self.horizon}")
        if self.seed < 0 or self.d < 2:
            raise InvalidSpecError(f"bad run shape: d={self.d} seed={self.seed}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise InvalidSpecError(f"unknown run config keys: {sorted(unknown)}")
        return cls(**data)


@dataclass
class RunTrace:
    """Checkpointed cumulative pseudo-regret plus run diagnostics."""

    config: RunConfig
    checkpoints: list[tuple[int, float]]
    metadata: dict = field(default_factory=dict)

    @property
    def final_regret(self) -> float:
        return self.checkpoints[-1][1]


def run_key(cfg: RunConfig) -> str:
    return f"{cfg.algo}-{cfg.noise}-d{cfg.d}-T{cfg.horizon}-s{cfg.seed}"


def checkpoint_schedule(horizon: int) -> list[int]:
    """Powers of two up to the horizon, plus the final round."""
    ts = []
    t = 1
    while t <= horizon:
        ts.append(t)
        t *= 2
    if ts[-1] != horizon:
        ts.append(horizon)
    return ts


def make_instance(cfg: RunConfig) -> PricingInstance:
    if cfg.noise == "custom":
        return benchmark_instance(NoiseSpec.from_dict(cfg.custom_noise), cfg.d)
    return benchmark_instance(cfg.noise, cfg.d)


class OraclePolicy:
    """Clairvoyant baseline: posts the revenue-maximizing price each round."""

    def __init__(self, instance: PricingInstance):
        self.instance = instance

    def act(self, x: np.ndarray) -> float:
        return self.instance.oracle.best(self.instance.u_of(x))[0]

    def observe(self, o: int) -> None:
        pass


class FixedPricePolicy:
    """Posts one constant price forever; the no-learning floor."""

    def __init__(self, price: float):
        self.price = float(price)

    def act(self, x: np.ndarray) -> float:
        return self.price

    def observe(self, o: int) -> None:
        pass


def make_policy(cfg: RunConfig, instance: PricingInstance, rng: np.random.Generator):
    if cfg.algo == "cmrup":
        policy_cfg = CmrupConfig(
            horizon=cfg.horizon,
            price_cap=instance.price_cap,
            support_radius=instance.c,
            delta_mult=cfg.delta_mult,
            c_ucb=cfg.c_ucb,
        )
        return CmrupPolicy(policy_cfg, instance.d, rng)
    if cfg.algo == "d2exp4":
        return D2Exp4Policy(
            instance.d,
            cfg.horizon,
            rng,
            price_cap=instance.price_cap,
            support_radius=instance.c,
            k_theta=cfg.k_theta,
            k_f=cfg.k_f,
            k_policy=cfg.k_policy,
        )
    if cfg.algo == "oracle":
        return OraclePolicy(instance)
    price = instance.price_cap if cfg.fixed_price is None else cfg.fixed_price
    if not 0.0 <= price <= instance.price_cap:
        raise InvalidSpecError(f"fixed price {price} outside [0, {instance.price_cap}]")
    return FixedPricePolicy(price)


def run_episode(cfg: RunConfig) -> RunTrace:
    """One deterministic run.

    Per round: draw (x, y) from the env stream (contexts before noise, in
    blocks), post policy.act(x), feed back the sale bit, and charge
    V*(u) - p * S(p - u). Increments more negative than rounding dust fail
    the run; traces are therefore non-negative and non-decreasing.
    """
    instance = make_instance(cfg)
    env_rng = derive_rng(cfg.master_seed, cfg.horizon, cfg.seed, "env")
    policy_rng = derive_rng(cfg.master_seed, cfg.horizon, cfg.seed, "policy")
    policy = make_policy(cfg, instance, policy_rng)
    oracle = instance.oracle
    surv_value = instance.survival.value
    cpset = set(checkpoint_schedule(cfg.horizon))
    checkpoints: list[tuple[int, float]] = []
    cum = 0.0
    realized = 0.0
    t = 0
    started = time.perf_counter()
    remaining = cfg.horizon
    while remaining:
        n = min(_BLOCK, remaining)
        remaining -= n
        xs, ys = sample_block(instance, env_rng, n)
        for i in range(n):
            t += 1
            price = policy.act(xs[i])
            o = 1 if price <= ys[i] else 0
            policy.observe(o)
            # same dot-product expression the policies use, so the oracle
            # baseline cancels exactly instead of drifting by an ulp of u
            u = instance.u_of(xs[i])
            inc = oracle.best(u)[1] - price * surv_value(price - u)
            if inc < 0.0:
                if inc < -_REGRET_EPS:
                    raise RuntimeError(
                        f"negative regret increment {inc} at round {t}; "
                        "the oracle value failed to dominate a posted price"
                    )
                inc = 0.0
            cum += inc
            if cfg.log_realized:
                realized += price * o
            if t in cpset:
                checkpoints.append((t, cum))
    meta: dict = {
        "code_version": __version__,
        "wall_time_s": time.perf_counter() - started,
        "final_regret": cum,
    }
    if cfg.log_realized:
        meta["realized_revenue"] = realized
    if cfg.algo == "cmrup":
        est = policy.theta_hat
        meta.update(
            t1=policy.t1,
            tw=policy.tw,
            delta=est.delta if est else None,
            theta_hat=est.theta.tolist() if est else None,
            rank_deficient=bool(est.rank_deficient) if est else None,
            clipped_probes=int(policy.clipped_probes),
            direct_probes=int(policy.direct_counts.sum()) if policy.direct_counts is not None else 0,
        )
    elif cfg.algo == "d2exp4":
        h = hyperparams(cfg.horizon, cfg.k_policy)
        meta.update(gamma=h.gamma, k_act=h.k_act, eta=h.eta, explore=h.explore)
        meta["survival_grid"] = policy.ensemble.tab_points.tolist()
    trace = RunTrace(cfg, checkpoints, meta)
    validate_trace(trace)
    return trace


def validate_trace(trace: RunTrace) -> None:
    """Monotone-regret invariant; violated traces must never persist."""
    prev = 0.0
    for t, r in trace.checkpoints:
        if r < prev or r < 0 or not math.isfinite(r):
            raise RuntimeError(f"trace for {run_key(trace.config)} is not monotone at t={t}")
        prev = r
    if trace.checkpoints[-1][0] != trace.config.horizon:
        raise RuntimeError("trace is missing its final-round checkpoint")


# ---- sweep persistence ----

_SWEEP_DEFAULTS = {
    "algos": ["cmrup"],
    "noises": ["uniform"],
    "horizons": [8000],
    "seeds": 10,
    "d": 5,
    "master_seed": 12345,
    "delta_mult": 0.35,
    "c_ucb": 0.5,
    "k_theta": 256,
    "k_f": 64,
    "k_policy": 2048,
    "fixed_price": None,
    "custom_noise": None,
    "log_realized": False,
}


def normalize_sweep_spec(spec: dict) -> dict:
    unknown = set(spec) - set(_SWEEP_DEFAULTS)
    if unknown:
        raise InvalidSpecError(f"unknown sweep keys: {sorted(unknown)}")
    out = dict(_SWEEP_DEFAULTS)
    out.update({k: v for k, v in spec.items() if v is not None or k in ("fixed_price", "custom_noise")})
    out["algos"] = list(dict.fromkeys(out["algos"]))
    out["noises"] = list(dict.fromkeys(out["noises"]))
    out["horizons"] = [int(t) for t in dict.fromkeys(out["horizons"])]
    if int(out["seeds"]) < 1:
        raise InvalidSpecError(f"seeds must be >= 1, got {out['seeds']}")
    out["seeds"] = int(out["seeds"])
    return out


def expand_sweep(spec: dict) -> list[RunConfig]:
    """Deterministic run order: algorithm, noise, horizon, then seed."""
    spec = normalize_sweep_spec(spec)
    noise_kind = "custom" if spec["custom_noise"] else None
    cfgs = []
    for algo in spec["algos"]:
        for noise in spec["noises"]:
            for horizon in spec["horizons"]:
                for seed in range(spec["seeds"]):
                    cfgs.append(
                        RunConfig(
                            algo=algo,
                            noise=noise_kind or noise,
                            d=spec["d"],
                            horizon=horizon,
                            seed=seed,
                            master_seed=spec["master_seed"],
                            delta_mult=spec["delta_mult"],
                            c_ucb=spec["c_ucb"],
                            k_theta=spec["k_theta"],
                            k_f=spec["k_f"],
                            k_policy=spec["k_policy"],
                            fixed_price=spec["fixed_price"],
                            custom_noise=spec["custom_noise"],
                            log_realized=spec["log_realized"],
                        )
                    )
    return cfgs


def _atomic_json(path: Path, payload: dict) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name)
    with os.fdopen(fd, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def _fragment_path(out_dir: Path, key: str) -> Path:
    return out_dir / "runs" / f"{key}.json"


def _write_fragment(out_dir: Path, trace: RunTrace) -> None:
    payload = {
        "config": trace.config.to_dict(),
        "checkpoints": [[t, r] for t, r in trace.checkpoints],
        "metadata": trace.metadata,
    }
    _atomic_json(_fragment_path(out_dir, run_key(trace.config)), payload)


def _sort_key(cfg_dict: dict) -> tuple:
    return (
        cfg_dict["algo"],
        cfg_dict["noise"],
        cfg_dict["d"],
        cfg_dict["horizon"],
        cfg_dict["seed"],
    )


def _rebuild_traces_csv(out_dir: Path, keys: list[str]) -> Path:
    fragments = []
    for key in keys:
        with open(_fragment_path(out_dir, key)) as fh:
            fragments.append(json.load(fh))
    fragments.sort(key=lambda fr: _sort_key(fr["config"]))
    csv_path = out_dir / "traces.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for fr in fragments:
            c = fr["config"]
            for t, r in fr["checkpoints"]:
                writer.writerow([c["algo"], c["noise"], c["d"], c["horizon"], c["seed"], t, repr(float(r))])
    return csv_path


def sweep(spec: dict, out_dir: str | Path, workers: int = 1) -> dict:
    """Run the horizons x seeds grid, resuming anything already completed.

    Re-running a finished sweep with the same spec is a no-op; pointing a
    different spec at the same directory is an error. Returns the manifest.
    """
    spec = normalize_sweep_spec(spec)
    out = Path(out_dir)
    (out / "runs").mkdir(parents=True, exist_ok=True)
    manifest_path = out / "manifest.json"
    if manifest_path.exists():
        with open(manifest_path) as fh:
            manifest = json.load(fh)
        if manifest.get("sweep") != spec:
            raise InvalidSpecError(
                f"{out} already holds a different sweep; pick a fresh output directory"
            )
    else:
        manifest = {
            "schema_version": SCHEMA_VERSION,
            "code_version": __version__,
            "sweep": spec,
            "runs": {},
        }
    cfgs = expand_sweep(spec)
    pending = [
        cfg
        for cfg in cfgs
        if manifest["runs"].get(run_key(cfg), {}).get("status") != "done"
        or not _fragment_path(out, run_key(cfg)).exists()
    ]

    def record(trace: RunTrace) -> None:
        _write_fragment(out, trace)
        manifest["runs"][run_key(trace.config)] = {
            "status": "done",
            "final_regret": trace.final_regret,
            "wall_time_s": trace.metadata.get("wall_time_s"),
        }
        _atomic_json(manifest_path, manifest)

    if workers <= 1:
        for cfg in pending:
            record(run_episode(cfg))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(run_episode, cfg): cfg for cfg in pending}
            for fut in as_completed(futures):
                record(fut.result())

    keys = [run_key(cfg) for cfg in cfgs]
    csv_path = _rebuild_traces_csv(out, keys)
    manifest["traces_csv"] = csv_path.name
    _atomic_json(manifest_path, manifest)
    return manifest


def load_traces(csv_path: str | Path) -> list[dict]:
    """Typed rows from a traces.csv."""
    rows = []
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != list(TRACE_COLUMNS):
            raise InvalidSpecError(f"unexpected trace columns: {reader.fieldnames}")
        for raw in reader:
            rows.append(
                {
                    "algorithm": raw["algorithm"],
                    "noise": raw["noise"],
                    "d": int(raw["d"]),
                    "T": int(raw["T"]),
                    "seed": int(raw["seed"]),
                    "checkpoint_t": int(raw["checkpoint_t"]),
                    "cum_regret": float(raw["cum_regret"]),
                }
            )
    return rows


# ---- fits and reports ----


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares line through (ln T, ln mean regret)."""

    alpha: float
    c_coef: float
    stderr: float
    n_points: int


def fit_power_law(points) -> PowerLawFit:
    """Fit mean regret ~ C * T^alpha by OLS in log-log space.

    stderr is the usual slope standard error (zero when the fit is exact or
    has no residual degrees of freedom). Fewer than two distinct horizons or
    a non-positive mean are degenerate.
    """
    pts = [(float(t), float(r)) for t, r in points]
    if len(pts) < 2:
        raise DegenerateFitError(f"need at least two points, got {len(pts)}")
    if any(r <= 0 for _, r in pts):
        raise DegenerateFitError("non-positive mean regret cannot be fit in log space")
    xs = np.log([t for t, _ in pts])
    ys = np.log([r for _, r in pts])
    sxx = float(np.sum((xs - xs.mean()) ** 2))
    if sxx == 0.0:
        raise DegenerateFitError("all horizons are equal")
    slope = float(np.sum((xs - xs.mean()) * (ys - ys.mean())) / sxx)
    intercept = float(ys.mean() - slope * xs.mean())
    resid = ys - (intercept + slope * xs)
    dof = len(pts) - 2
    stderr = math.sqrt(float(resid @ resid) / dof / sxx) if dof > 0 else 0.0
    return PowerLawFit(alpha=slope, c_coef=math.exp(intercept), stderr=stderr, n_points=len(pts))


def final_regrets(rows: list[dict]) -> dict[tuple, dict[int, list[float]]]:
    """Group final-round regrets: (algorithm, noise) -> horizon -> per-seed values."""
    out: dict[tuple, dict[int, list[float]]] = {}
    for row in rows:
        if row["checkpoint_t"] != row["T"]:
            continue
        group = out.setdefault((row["algorithm"], row["noise"]), {})
        group.setdefault(row["T"], []).append(row["cum_regret"])
    return out


def summarize(rows: list[dict]) -> list[dict]:
    """Per (algorithm, noise, horizon): seed count, mean final regret, stderr."""
    table = []
    for (algo, noise), by_t in sorted(final_regrets(rows).items()):
        for t, vals in sorted(by_t.items()):
            arr = np.asarray(vals)
            stderr = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
            table.append(
                {
                    "algorithm": algo,
                    "noise": noise,
                    "T": t,
                    "n_seeds": len(arr),
                    "mean_final_regret": float(arr.mean()),
                    "stderr": stderr,
                }
            )
    return table


def report(rows: list[dict], out_dir: str | Path) -> dict:
    """Summary tables, per-group power-law fits, and the figure-input file.

    Groups with a single horizon get alpha = c_coef = nan rather than a
    refusal, so mixed sweeps (for example a one-horizon baseline comparison
    merged with a full horizon ladder) still report cleanly.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = summarize(rows)
    fits: dict[tuple, PowerLawFit | None] = {}
    for (algo, noise), by_t in sorted(final_regrets(rows).items()):
        means = [(t, float(np.mean(vals))) for t, vals in sorted(by_t.items())]
        try:
            fits[(algo, noise)] = fit_power_law(means)
        except DegenerateFitError:
            fits[(algo, noise)] = None

    summary_path = out / "summary.csv"
    with open(summary_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["algorithm", "noise", "T", "n_seeds", "mean_final_regret", "stderr"])
        for row in summary:
            writer.writerow(
                [
                    row["algorithm"],
                    row["noise"],
                    row["T"],
                    row["n_seeds"],
                    repr(row["mean_final_regret"]),
                    repr(row["stderr"]),
                ]
            )

    figure_path = out / "figure_input.csv"
    with open(figure_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(FIGURE_COLUMNS)
        for row in summary:
            fit = fits[(row["algorithm"], row["noise"])]
            alpha = repr(fit.alpha) if fit else "nan"
            c_coef = repr(fit.c_coef) if fit else "nan"
            writer.writerow(
                [
                    row["algorithm"],
                    row["noise"],
                    row["T"],
                    repr(row["mean_final_regret"]),
                    repr(row["stderr"]),
                    alpha,
                    c_coef,
                ]
            )

    return {
        "summary": summary,
        "fits": {
            f"{algo}/{noise}": (
                {"alpha": f.alpha, "c_coef": f.c_coef, "stderr": f.stderr, "n_points": f.n_points}
                if f
                else None
            )
            for (algo, noise), f in fits.items()
        },
        "summary_csv": str(summary_path),
        "figure_input_csv": str(figure_path),
    }
