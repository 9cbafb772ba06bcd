"""Command-line entry point.

Subcommands ``volatility``, ``analyze``, ``surrogate`` and ``simulate``.
Exit codes: 0 success, 1 validation error, 2 runtime or data error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from . import __version__
from .intervals import MIN_EXCEEDANCES
from .io import (config_hash, discover_inputs, ensure_dir, header_line, instrument_id, read_series,
                 volatility_rows, write_csv, write_json)
from .multiscaling import DEFAULT_RANGE, AlphaEnsemble, alpha_histogram
from .pipeline import (DEFAULT_M_VALUES, DEFAULT_Q_VALUES, AnalysisConfig, InsufficientData,
                       analyze_series, default_targets, surrogate_values)
from .simulate import PlanError, load_plans, run_discreteness_experiment, run_finite_size_experiment
from .surrogate import SurrogateConfig
from .volatility import PriceFormatError, VolatilityError, compute_volatility, load_prices

log = logging.getLogger("retscale")


class ValidationError(Exception):
    pass


@dataclass
class RunConfig:
    inputs: list[str] = field(default_factory=list)
    instruments: list[str] | None = None
    targets: list[float] | None = None
    fit_range: tuple[float, float] = DEFAULT_RANGE
    m_values: list[float] = field(default_factory=lambda: list(DEFAULT_M_VALUES))
    q_values: list[float] = field(default_factory=lambda: list(DEFAULT_Q_VALUES))
    surrogate: dict = field(default_factory=lambda: {"iterations": 30, "spectrum_tolerance": None})
    with_surrogate: bool = False
    plan: str | dict | None = None
    out: str = "out"
    seed: int = 0
    min_exceedances: int = MIN_EXCEEDANCES
    workers: int | None = None

    def validate(self) -> None:
        lo, hi = self.fit_range
        if not (0 <= lo < hi):
            raise ValidationError(f"fit_range must satisfy 0 <= low < high, got {self.fit_range}")
        if not self.m_values or any(m == 0 for m in self.m_values):
            raise ValidationError("m_values must be nonempty and nonzero")
        if any(q <= 0 for q in self.q_values):
            raise ValidationError("q_values must be positive")
        if self.targets is not None and (not self.targets or sorted(self.targets) != list(self.targets)):
            raise ValidationError("targets must be a nonempty ascending list")
        if int(self.surrogate.get("iterations", 30)) < 1:
            raise ValidationError("surrogate.iterations must be >= 1")
        if self.min_exceedances < 2:
            raise ValidationError("min_exceedances must be >= 2")
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError("seed must be an unsigned 64-bit integer")

    def hash(self) -> str:
        d = asdict(self)
        for k in ("out", "workers"):
            d.pop(k)
        if isinstance(self.plan, str):
            with open(self.plan, encoding="utf-8") as fh:
                d["plan"] = json.load(fh)
        return config_hash(d)

    def analysis(self) -> AnalysisConfig:
        targets = self.targets if self.targets is not None else default_targets(self.fit_range)
        return AnalysisConfig(list(targets), tuple(self.m_values), tuple(self.q_values),
                              tuple(self.fit_range), self.min_exceedances)

    def surrogate_config(self) -> SurrogateConfig:
        return SurrogateConfig(int(self.surrogate.get("iterations", 30)), 0,
                               self.surrogate.get("spectrum_tolerance"))

    def n_workers(self) -> int:
        if self.workers:
            return int(self.workers)
        return max(1, int(os.environ.get("RETSCALE_THREADS", "1") or 1))


def parse_range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(p) for p in text.split(":"))
    except ValueError:
        raise ValidationError(f"--range expects lo:hi, got {text!r}") from None
    if not lo < hi:
        raise ValidationError(f"--range needs lo < hi, got {text!r}")
    return lo, hi


def build_config(args) -> RunConfig:
    data = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {args.config}: {exc}") from None
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ValidationError(f"unknown config field(s): {', '.join(sorted(unknown))}")
    if "fit_range" in data:
        data["fit_range"] = tuple(data["fit_range"])
    if isinstance(data.get("plan"), str) and args.config:
        data["plan"] = str(Path(args.config).parent / data["plan"])
    cfg = RunConfig(**data)
    if getattr(args, "inputs", None):
        cfg.inputs = list(args.inputs)
    if args.seed is not None:
        cfg.seed = args.seed
    if getattr(args, "range", None):
        cfg.fit_range = parse_range(args.range)
    if getattr(args, "surrogate", False):
        cfg.with_surrogate = True
    if getattr(args, "plan", None):
        cfg.plan = args.plan
    if args.out:
        cfg.out = args.out
    cfg.validate()
    return cfg


def _inputs(cfg: RunConfig) -> list[Path]:
    try:
        files = discover_inputs(cfg.inputs)
    except FileNotFoundError as exc:
        raise ValidationError(str(exc)) from None
    if cfg.instruments:
        wanted = set(cfg.instruments)
        files = [f for f in files if instrument_id(f) in wanted]
    if not files:
        raise ValidationError("no instruments found")
    return files


def _manifest(out: Path, cfg: RunConfig, h: str, command: str, extra: dict) -> None:
    write_json(out / "manifest.json", {"command": command, "version": __version__,
                                       "config": json.loads(json.dumps(asdict(cfg), default=str)),
                                       **extra}, cfg_hash=h, seed=cfg.seed)


def cmd_volatility(cfg: RunConfig) -> list[Path]:
    files = _inputs(cfg)
    out = ensure_dir(cfg.out)
    h = cfg.hash()

    def work(path: Path):
        with open(path, "rb") as fh:
            prices = load_prices(fh, instrument_id(path), name=str(path))
        return compute_volatility(prices)

    written = []
    with ThreadPoolExecutor(cfg.n_workers()) as ex:
        for v in ex.map(work, files):
            written.append(write_csv(out / f"{v.instrument_id}.volatility.csv", ["day", "minute", "v"],
                                     volatility_rows(v), cfg_hash=h, seed=cfg.seed))
            written.append(write_csv(out / f"{v.instrument_id}.profile.csv", ["minute", "profile"],
                                     enumerate(v.seasonal_profile.tolist()), cfg_hash=h, seed=cfg.seed))
    _manifest(out, cfg, h, "volatility",
              {"instruments": [instrument_id(f) for f in files]})
    return written


def cmd_surrogate(cfg: RunConfig) -> list[Path]:
    files = _inputs(cfg)
    out = ensure_dir(cfg.out)
    h = cfg.hash()
    scfg = cfg.surrogate_config()

    def work(path: Path):
        v = read_series(path)
        s, dist = surrogate_values(v.instrument_id, v, scfg, cfg.seed)
        return v.with_values(s), dist

    written, residuals = [], {}
    with ThreadPoolExecutor(cfg.n_workers()) as ex:
        for sv, dist in ex.map(work, files):
            residuals[sv.instrument_id] = dist
            written.append(write_csv(out / f"{sv.instrument_id}.surrogate.volatility.csv",
                                     ["day", "minute", "v"], volatility_rows(sv),
                                     cfg_hash=h, seed=cfg.seed))
    _manifest(out, cfg, h, "surrogate", {"spectrum_distance": residuals})
    return written


def _write_analysis(out: Path, a, h: str, seed: int, suffix: str) -> list[Path]:
    iid = a.instrument_id + suffix
    w = []
    rows = []
    for e in a.sweep.entries:
        for m, c in sorted(a.curves.items()):
            k = [i for i, t in enumerate(c.mean_tau) if t == e.mean_tau]
            if k:
                rows.append((m, e.q, e.mean_tau, float(c.mu[k[0]])))
    rows.sort(key=lambda r: (r[0], r[2]))
    w.append(write_csv(out / f"{iid}.moments.csv", ["m", "q", "mean_tau", "mu_m"], rows,
                       cfg_hash=h, seed=seed))
    w.append(write_csv(out / f"{iid}.alpha.csv", ["m", "alpha", "stderr", "n_points"],
                       [(m, e.alpha, e.stderr, e.n_points) for m, e in sorted(a.alphas.items())],
                       cfg_hash=h, seed=seed))
    for cdf in a.cdfs:
        w.append(write_csv(out / f"{iid}.survival_q{cdf.q:g}.csv", ["x", "survival"],
                           zip(cdf.xs.tolist(), cdf.survival.tolist()), cfg_hash=h, seed=seed))
    with open(out / f"{iid}.intervals.csv", "w", encoding="utf-8") as fh:
        fh.write(header_line(h, seed))
        fh.write("q,mean_tau,n,taus...\n")
        for s in a.threshold_series:
            fh.write(s.to_csv_row() + "\n")
    w.append(out / f"{iid}.intervals.csv")
    report = {
        "instrument": a.instrument_id,
        "source": a.source,
        "gamma_fits": {f"{q:g}": {"gamma": f.gamma, "residual": f.residual,
                                  "x_range": list(f.x_range), "n_samples": f.n_samples}
                       for q, f in sorted(a.gamma_fits.items())},
        "collapse": a.deviation.to_dict() if a.deviation is not None else None,
        "notes": a.notes,
    }
    if a.spectrum_residual is not None:
        report["spectrum_distance"] = a.spectrum_residual
    w.append(write_json(out / f"{iid}.collapse.json", report, cfg_hash=h, seed=seed))
    return w


def _write_ensemble(out: Path, analyses, h: str, seed: int, suffix: str) -> list[Path]:
    by_m: dict[float, list] = {}
    for a in analyses:
        for m, e in a.alphas.items():
            by_m.setdefault(m, []).append(e)
    rows, w = [], []
    for m in sorted(by_m):
        ens = AlphaEnsemble.from_estimates(by_m[m])
        rows.append((m, ens.mean_alpha, ens.std_alpha))
        hist = alpha_histogram(by_m[m])
        w.append(write_csv(out / f"alpha_hist{suffix}_m{m:g}.csv", ["bin_left", "bin_right", "count"],
                           zip(hist.edges[:-1].tolist(), hist.edges[1:].tolist(), hist.counts.tolist()),
                           cfg_hash=h, seed=seed))
    w.append(write_csv(out / f"alpha_ensemble{suffix}.csv", ["m", "mean_alpha", "std_alpha"], rows,
                       cfg_hash=h, seed=seed))
    return w


def cmd_analyze(cfg: RunConfig) -> list[Path]:
    files = _inputs(cfg)
    out = ensure_dir(cfg.out)
    h = cfg.hash()
    acfg = cfg.analysis()
    scfg = cfg.surrogate_config()

    def work(path: Path):
        results, skipped = [], []
        try:
            v = read_series(path)
        except (PriceFormatError, VolatilityError) as exc:
            return path, [], [(instrument_id(path), "original", str(exc))]
        sources = [("original", v.values, None)]
        if cfg.with_surrogate:
            s, dist = surrogate_values(v.instrument_id, v, scfg, cfg.seed)
            sources.append(("surrogate", s, dist))
        for name, vals, dist in sources:
            try:
                a = analyze_series(v.instrument_id, vals, acfg, name)
                a.spectrum_residual = dist
                results.append(a)
            except InsufficientData as exc:
                skipped.append((v.instrument_id, name, str(exc)))
        return path, results, skipped

    written, skipped = [], []
    per_source: dict[str, list] = {"original": [], "surrogate": []}
    with ThreadPoolExecutor(cfg.n_workers()) as ex:
        for path, results, skip in ex.map(work, files):
            skipped.extend(skip)
            for a in results:
                suffix = "" if a.source == "original" else ".surrogate"
                written.extend(_write_analysis(out, a, h, cfg.seed, suffix))
                per_source[a.source].append(a)
    for name, analyses in per_source.items():
        if analyses:
            written.extend(_write_ensemble(out, analyses, h, cfg.seed,
                                           "" if name == "original" else ".surrogate"))
    written.append(write_csv(out / "skipped.csv", ["instrument", "source", "reason"], skipped,
                             cfg_hash=h, seed=cfg.seed))
    _manifest(out, cfg, h, "analyze", {"instruments": [instrument_id(f) for f in files],
                                       "skipped": len(skipped)})
    return written


def cmd_simulate(cfg: RunConfig) -> list[Path]:
    if cfg.plan is None:
        raise ValidationError("simulate needs a plan (--plan or 'plan' in --config)")
    try:
        plans = load_plans(cfg.plan)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read plan: {exc}") from None
    except PlanError as exc:
        raise ValidationError(f"invalid plan: {exc}") from None
    out = ensure_dir(cfg.out)
    h = cfg.hash()
    w = []
    # the run's master seed governs every experiment
    if "discreteness" in plans:
        plan = _reseed(plans["discreteness"], cfg.seed)
        res = run_discreteness_experiment(plan, workers=cfg.n_workers())
        w.append(write_csv(out / "discreteness.csv", ["resolution", "m", "mean_tau", "mu_m"],
                           res.rows(), cfg_hash=h, seed=cfg.seed))
    if "finite_size" in plans:
        plan = _reseed(plans["finite_size"], cfg.seed)
        rows = run_finite_size_experiment(plan, workers=cfg.n_workers())
        w.append(write_csv(out / "finite_size.csv", ["size", "m", "mean_alpha"],
                           [(r.size, r.m, r.mean_alpha) for r in rows], cfg_hash=h, seed=cfg.seed))
        w.append(write_csv(out / "finite_size_detail.csv",
                           ["size", "m", "mean_alpha", "std_alpha", "mean_alpha_full", "n_realizations"],
                           [(r.size, r.m, r.mean_alpha, r.std_alpha, r.mean_alpha_full, r.n_realizations)
                            for r in rows], cfg_hash=h, seed=cfg.seed))
    _manifest(out, cfg, h, "simulate", {"experiments": sorted(plans)})
    return w


def _reseed(plan, seed: int):
    return replace(plan, rng_seed=int(seed))


COMMANDS = {"volatility": cmd_volatility, "analyze": cmd_analyze,
            "surrogate": cmd_surrogate, "simulate": cmd_simulate}


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--seed", type=int, help="master seed (u64)")
    common.add_argument("--out", help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="retscale", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"retscale {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("volatility", parents=[common], help="prices -> normalized volatility")
    s.add_argument("inputs", nargs="*", help="price CSV files or directories")

    s = sub.add_parser("analyze", parents=[common], help="interval statistics and alpha fits")
    s.add_argument("inputs", nargs="*", help="price or volatility CSV files or directories")
    s.add_argument("--range", help="alpha fit range lo:hi (default 10:100)")
    s.add_argument("--surrogate", action="store_true", help="repeat the analysis on IAAFT surrogates")

    s = sub.add_parser("surrogate", parents=[common], help="write IAAFT surrogate volatility series")
    s.add_argument("inputs", nargs="*")

    s = sub.add_parser("simulate", parents=[common], help="discreteness and finite-size experiments")
    s.add_argument("--plan", help="simulation plan JSON")
    return p


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = build_config(args)
        COMMANDS[args.command](cfg)
    except ValidationError as exc:
        print(f"retscale: error: {exc}", file=sys.stderr)
        return 1
    except (PriceFormatError, VolatilityError, OSError, ValueError) as exc:
        print(f"retscale: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
