"""Command-line entry point: ``treedense <subcommand> [flags]``.

Exit codes: 0 success, 1 runtime error, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import fields

from .harness import ConfigError, ExperimentConfig, parse_grid, render, run
from .samplers import BipartiteSite, MaxOfK, SamplerParseError, parse_sampler

SUBCOMMANDS = {
    "bounds": "bounds-curve",
    "coverage": "coverage",
    "exact": "exact",
    "survival": "survival",
    "density": "density-sweep",
    "barrier": "barrier",
    "copies": "copies",
    "marginal": "marginal",
}

DEFAULT_COPIES_SAMPLER = "max(bernoulli(0.4226497308103742),k=2)"


def _horizons(text: str) -> list[int]:
    try:
        hs = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"horizons must be comma-separated integers, got {text!r}")
    if not hs:
        raise argparse.ArgumentTypeError("no horizons given")
    return hs


def _doubling(text: str) -> list[int]:
    hs = _horizons(text)
    if len(hs) > 1:
        return hs
    top = hs[0]
    out = []
    n = 1
    while n < top:
        out.append(n)
        n *= 2
    return out + [top]


def _add_globals(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=S, help="base seed; trial i uses seed+i")
    g.add_argument("--trials", type=int, default=S, help="number of Monte Carlo trials")
    g.add_argument("--out", default=S, help="output file (default: stdout)")
    g.add_argument("--format", choices=("csv", "json"), default=S, help="output format")
    g.add_argument("--threads", type=int, default=S,
                   help="worker threads (fallback: $TREEDENSE_THREADS, then 1)")
    g.add_argument("--config", default=S, help="JSON config; explicit flags override it")


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = argparse.ArgumentParser(
        prog="treedense", allow_abbrev=False,
        description="Path densities of percolation on d-regular trees.")
    _add_globals(parser)
    sub = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text, allow_abbrev=False)
        p.add_argument("--d", type=int, default=S, help="tree degree d >= 3 (default 3)")
        _add_globals(p)
        return p

    p = add("bounds", "lower bound on D_d(p): max(p, 1 if p >= 2/d, 1/k where a(d,k) <= p)")
    p.add_argument("--p-grid", default=S,
                   help="start:stop:step grid of marginals p (stop excluded); "
                        "a(d,k) = 1 - (1 - 2/d)^(1/k)")

    p = add("coverage", "gaps in the union of [a(d,k), 1/k) over k")
    p.add_argument("--k-max", type=int, default=S, help="largest k listed (default 64)")
    p.add_argument("--grid-step", type=float, default=S, help="grid spacing in p (default 1e-4)")

    p = add("exact", "exact E[M_n]/n and P(M_n = n) for Bernoulli(p) by the subtree recursion "
                     "Q_j(m) = [p Q_{j-1}(m-1) + (1-p) Q_{j-1}(m)]^(d-1)")
    p.add_argument("--p", type=float, default=S, help="edge marginal p")
    p.add_argument("--n", dest="horizons", type=_doubling, default=S,
                   help="horizon N (rows at 1,2,4,...,N) or a comma-separated list")

    p = add("survival", "P(fully open length-n path) and its limit 1 - (1 - p*theta)^d, "
                        "theta = 1 - (1 - p*theta)^(d-1)")
    p.add_argument("--p", type=float, default=S, help="edge marginal p")
    p.add_argument("--n", dest="horizons", type=_doubling, default=S,
                   help="horizon N (rows at 1,2,4,...,N) or a comma-separated list")

    p = add("density", "Monte Carlo M_n/n, the horizon-n proxy of sup over paths of the limsup density")
    p.add_argument("--sampler", default=S, help="sampler text, e.g. bernoulli(0.5), matching")
    p.add_argument("--horizons", type=_horizons, default=S, help="comma-separated increasing horizons")

    p = add("barrier", "paths whose every prefix of length j has >= a*j - c open edges")
    p.add_argument("--sampler", default=S, help="sampler text")
    p.add_argument("--n", dest="horizons", type=_horizons, default=S, help="horizon(s)")
    p.add_argument("--a", type=float, default=S, help="target density a in [0, 1]")
    p.add_argument("--c", type=float, default=S, help="slack c >= 0")
    p.add_argument("--cap", type=int, default=S, help="stop counting survivors at this many")

    p = add("copies", "best single copy along the max path of max-of-k copies; "
                      "a fully open path gives some copy >= ceil(n/k) open edges")
    p.add_argument("--sampler", default=S,
                   help=f"max(...,k=...) sampler (default {DEFAULT_COPIES_SAMPLER})")
    p.add_argument("--n", dest="horizons", type=_horizons, default=S, help="horizon(s)")

    p = add("marginal", "empirical P(edge open) with a 95%% Wilson interval, at depths 1..4")
    p.add_argument("--sampler", default=S, help="sampler text")
    return parser


def _config(args: argparse.Namespace) -> ExperimentConfig:
    data: dict = {}
    ns = vars(args)
    if "config" in ns:
        with open(ns["config"]) as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        data.update(loaded)
    kind = SUBCOMMANDS[ns["command"]]
    if data.get("kind", kind) != kind:
        raise ConfigError(f"config kind {data['kind']!r} does not match subcommand {ns['command']!r}")
    data["kind"] = kind
    if kind == "copies":
        data.setdefault("sampler", DEFAULT_COPIES_SAMPLER)
        data.setdefault("horizons", [24])
    if "threads" not in ns and "threads" not in data and os.environ.get("TREEDENSE_THREADS"):
        try:
            data["threads"] = int(os.environ["TREEDENSE_THREADS"])
        except ValueError:
            raise ConfigError("TREEDENSE_THREADS must be an integer") from None
    for key, value in ns.items():
        if key in ("command", "config"):
            continue
        data[key.replace("-", "_")] = value
    _validate(data)
    try:
        return ExperimentConfig.from_dict(data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def _validate(data: dict) -> None:
    # checked on the merged dict so that messages can name the flag
    defaults = {f.name: f.default for f in fields(ExperimentConfig)}
    defaults["horizons"] = [10]
    unknown = sorted(set(data) - set(defaults))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    v = {**defaults, **data}
    hs = v["horizons"]
    checks = [
        ("--d", lambda: 3 <= v["d"] <= 255, "degree must be in [3, 255]"),
        ("--p", lambda: 0.0 <= v["p"] <= 1.0, "p must be in [0, 1]"),
        ("--a", lambda: 0.0 <= v["a"] <= 1.0, "a must be in [0, 1]"),
        ("--c", lambda: v["c"] >= 0.0, "c must be >= 0"),
        ("--cap", lambda: v["cap"] >= 1, "cap must be >= 1"),
        ("--k-max", lambda: v["k_max"] >= 1, "k-max must be >= 1"),
        ("--grid-step", lambda: 0.0 < v["grid_step"] < 1.0, "grid step must be in (0, 1)"),
        ("--trials", lambda: v["trials"] >= 1, "trials must be >= 1"),
        ("--threads", lambda: v["threads"] >= 1, "threads must be >= 1"),
        ("--horizons/--n", lambda: bool(hs) and min(hs) >= 1
         and all(b > a for a, b in zip(hs, hs[1:])),
         "horizons must be positive and strictly increasing"),
    ]
    for flag, ok, message in checks:
        try:
            good = ok()
        except TypeError:
            good = False
        if not good:
            raise ConfigError(f"{flag}: {message}")
    try:
        parse_grid(v["p_grid"])
    except ConfigError as exc:
        raise ConfigError(f"--p-grid: {exc}") from None
    try:
        spec = parse_sampler(v["sampler"])
    except SamplerParseError as exc:
        raise ConfigError(f"--sampler: {exc}") from None
    if v["kind"] == "copies" and not isinstance(spec, MaxOfK):
        raise ConfigError("--sampler: copies needs a max(...,k=...) sampler")
    if v["kind"] == "barrier" and isinstance(spec, BipartiteSite):
        raise ConfigError("--sampler: barrier search needs an edge process")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _config(args)
    except (ConfigError, SamplerParseError, ValueError, OSError) as exc:
        print(f"treedense {args.command}: error: {exc}", file=sys.stderr)
        return 2
    try:
        records = run(cfg)
        text = render(records, cfg.format, cfg.kind)
        if cfg.out:
            with open(cfg.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        if cfg.kind == "coverage" and not records:
            print(f"d={cfg.d}: no gaps", file=sys.stderr if not cfg.out else sys.stdout)
    except Exception as exc:  # noqa: BLE001
        print(f"treedense {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
