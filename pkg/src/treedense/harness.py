"""Experiment configs, Monte Carlo sweeps over seeds, and CSV/JSON emission.

Trial ``i`` of an experiment uses seed ``base + i``.  Per-trial results are
collected in trial order and aggregated with :func:`math.fsum`, so the
output is byte-identical whatever the number of worker threads.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Sequence

from . import bounds, density
from .samplers import BipartiteSite, MaxOfK, empirical_marginal, exact_marginal, parse_sampler
from .stats import mean_interval, wilson_interval
from .tree import MASK64, Seed

KINDS = ("density-sweep", "bounds-curve", "coverage", "barrier", "copies",
         "marginal", "survival", "exact")

COLUMNS = {
    "density-sweep": ["kind", "d", "sampler", "n", "trials", "mean", "max", "ci_lo", "ci_hi", "seconds"],
    "bounds-curve": ["p", "lower", "source", "k"],
    "coverage": ["kind", "d", "k_max", "gap_lo", "gap_hi"],
    "barrier": ["kind", "d", "sampler", "n", "a", "c", "trials", "survive_frac", "ci_lo", "ci_hi",
                "mean_count", "capped", "seconds"],
    "copies": ["kind", "d", "sampler", "n", "trials", "fully_open", "violations",
               "mean_best_copy", "min_best_copy_open", "seconds"],
    "marginal": ["kind", "sampler", "d", "depth", "trials", "mean", "ci_lo", "ci_hi", "exact"],
    "survival": ["kind", "d", "p", "n", "p_fully_open", "limit"],
    "exact": ["kind", "d", "p", "n", "mean_density", "p_fully_open"],
}


class ConfigError(ValueError):
    pass


def _num(x):
    if isinstance(x, float):
        if math.isfinite(x):
            return float(f"{x:.12g}")
        return x
    return x


@dataclass
class ResultRecord:
    kind: str
    values: dict[str, Any]

    def __post_init__(self):
        self.values = {k: _num(v) for k, v in self.values.items()}
        lo, hi = self.values.get("ci_lo"), self.values.get("ci_hi")
        if lo is not None and hi is not None and lo > hi:
            raise ValueError("confidence interval bounds out of order")


@dataclass
class ExperimentConfig:
    kind: str
    sampler: str = "bernoulli(0.5)"
    d: int = 3
    horizons: list[int] = field(default_factory=lambda: [10])
    seed: int = 0
    trials: int = 100
    p: float = 0.5
    p_grid: str = "0.001:0.999:0.001"
    k_max: int = 64
    grid_step: float = 1e-4
    a: float = 0.5
    c: float = 0.0
    cap: int = density.DEFAULT_BARRIER_CAP
    threads: int = 1
    timing: bool = False
    out: str | None = None
    format: str = "csv"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.horizons or any(h < 1 for h in self.horizons):
            raise ConfigError("horizons must be a nonempty list of positive integers")
        if any(b <= a for a, b in zip(self.horizons, self.horizons[1:])):
            raise ConfigError("horizons must be strictly increasing")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.format!r}")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        return cls.from_dict(data)


def parse_grid(text: str) -> list[float]:
    """``start:stop:step``, start included, stop excluded."""
    try:
        start, stop, step = (float(t) for t in text.split(":"))
    except ValueError:
        raise ConfigError(f"grid must look like start:stop:step, got {text!r}") from None
    if step <= 0 or stop <= start:
        raise ConfigError(f"empty or ill-formed grid {text!r}")
    count = math.ceil((stop - start) / step - 1e-9)
    return [round(start + i * step, 12) for i in range(count)]


def confidence_interval(successes: int, trials: int) -> tuple[float, float]:
    return wilson_interval(successes, trials)


def mean_ci(samples: Sequence[float]) -> tuple[float, float]:
    _, lo, hi = mean_interval(samples)
    return lo, hi


def _trial_seeds(cfg: ExperimentConfig) -> list[Seed]:
    return [Seed((cfg.seed + i) & MASK64) for i in range(cfg.trials)]


def _map(cfg: ExperimentConfig, fn: Callable, items: list) -> list:
    if cfg.threads == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        return list(pool.map(fn, items))


def _density_sweep(cfg, spec):
    hs = cfg.horizons
    if isinstance(spec, BipartiteSite):
        def trial(seed):
            return {n: density.site_path_density(spec, seed, cfg.d, n).value * n for n in hs}
    else:
        def trial(seed):
            return density.max_path_sweep(spec, seed, cfg.d, hs)[0]
    per_trial = _map(cfg, trial, _trial_seeds(cfg))
    rows = []
    for n in hs:
        xs = [t[n] / n for t in per_trial]
        mean, lo, hi = mean_interval(xs)
        rows.append({"n": n, "trials": cfg.trials, "mean": mean, "max": max(xs),
                     "ci_lo": lo, "ci_hi": hi})
    return rows


def _barrier(cfg, spec):
    rows = []
    for n in cfg.horizons:
        def trial(seed, n=n):
            return density.barrier_survival(spec, seed, cfg.d, n, cfg.a, cfg.c, cfg.cap)
        res = _map(cfg, trial, _trial_seeds(cfg))
        alive = sum(r.count > 0 for r in res)
        lo, hi = wilson_interval(alive, cfg.trials)
        rows.append({"n": n, "a": cfg.a, "c": cfg.c, "trials": cfg.trials,
                     "survive_frac": alive / cfg.trials, "ci_lo": lo, "ci_hi": hi,
                     "mean_count": math.fsum(r.count for r in res) / cfg.trials,
                     "capped": sum(r.capped for r in res)})
    return rows


def _copies(cfg, spec):
    if not isinstance(spec, MaxOfK):
        raise ConfigError("copies experiment needs a max(...,k=...) sampler")
    rows = []
    for n in cfg.horizons:
        def trial(seed, n=n):
            return density.best_copy_density(spec, seed, cfg.d, n)
        res = _map(cfg, trial, _trial_seeds(cfg))
        full = [r for r in res if r.record.open_count == n]
        need = math.ceil(n / spec.k)
        violations = sum(max(r.record.copy_counts) < need for r in full)
        rows.append({"n": n, "trials": cfg.trials, "fully_open": len(full),
                     "violations": violations,
                     "mean_best_copy": math.fsum(r.best_copy_average for r in res) / cfg.trials,
                     "min_best_copy_open": min((r.best_copy_average for r in full), default=math.nan)})
    return rows


def _marginal(cfg, spec):
    seeds = range(cfg.seed, cfg.seed + cfg.trials)
    est = empirical_marginal(spec, seeds, cfg.d)
    exact = exact_marginal(spec, cfg.d)
    return [{"d": cfg.d, "depth": depth, "trials": cfg.trials, "mean": m, "ci_lo": lo,
             "ci_hi": hi, "exact": exact}
            for depth, (m, lo, hi) in est.per_depth.items()]


def run(cfg: ExperimentConfig) -> list[ResultRecord]:
    kind = cfg.kind
    if kind == "bounds-curve":
        out = []
        for p in parse_grid(cfg.p_grid):
            pt = bounds.lower_bound_curve(cfg.d, p)
            out.append(ResultRecord(kind, {"p": pt.p, "lower": pt.lower, "source": pt.source,
                                           "k": pt.k if pt.k is not None else ""}))
        return out
    if kind == "coverage":
        rep = bounds.interval_coverage(cfg.d, cfg.k_max, cfg.grid_step)
        return [ResultRecord(kind, {"kind": kind, "d": cfg.d, "k_max": cfg.k_max,
                                    "gap_lo": lo, "gap_hi": hi}) for lo, hi in rep.gaps]
    if kind in ("survival", "exact"):
        out = []
        for n in cfg.horizons:
            surv = density.survival_fully_open(cfg.d, cfg.p, n)
            vals = {"kind": kind, "d": cfg.d, "p": cfg.p, "n": n}
            if kind == "exact":
                dist = density.exact_bernoulli_distribution(cfg.d, cfg.p, n)
                vals.update(mean_density=dist.mean_density, p_fully_open=surv.probability)
            else:
                vals.update(p_fully_open=surv.probability, limit=surv.limit)
            out.append(ResultRecord(kind, vals))
        return out

    spec = parse_sampler(cfg.sampler)
    started = time.perf_counter()
    if kind == "density-sweep":
        rows = _density_sweep(cfg, spec)
    elif kind == "barrier":
        rows = _barrier(cfg, spec)
    elif kind == "copies":
        rows = _copies(cfg, spec)
    else:
        rows = _marginal(cfg, spec)
    seconds = time.perf_counter() - started if cfg.timing else 0.0
    out = []
    for row in rows:
        vals = {"kind": kind, "d": cfg.d, "sampler": cfg.sampler, **row}
        if "seconds" in COLUMNS[kind]:
            vals["seconds"] = seconds
        out.append(ResultRecord(kind, {c: vals[c] for c in COLUMNS[kind]}))
    return out


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def render(records: Sequence[ResultRecord], fmt: str = "csv", kind: str | None = None) -> str:
    if fmt == "json":
        return json.dumps([{"kind": r.kind, **r.values} for r in records], indent=1) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    kind = kind or (records[0].kind if records else None)
    if kind not in COLUMNS:
        raise ValueError("an empty CSV needs the experiment kind for its header")
    cols = COLUMNS[kind]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for r in records:
        writer.writerow([_fmt(r.values.get(c, "")) for c in cols])
    return buf.getvalue()


def emit(records: Sequence[ResultRecord], fmt: str, path, kind: str | None = None) -> None:
    text = render(records, fmt, kind)
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


def load_json(path) -> list[ResultRecord]:
    with open(path) as fh:
        data = json.load(fh)
    out = []
    for obj in data:
        obj = dict(obj)
        kind = obj.pop("kind")
        if "kind" in COLUMNS[kind]:
            obj = {"kind": kind, **obj}
        out.append(ResultRecord(kind, obj))
    return out
