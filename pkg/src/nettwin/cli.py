"""Command-line orchestration of the pipeline.

Commands: grid, train, predict, eval, noise, denoise, bench, pipeline.
Exit codes: 0 ok, 2 bad arguments, 3 I/O failure, 4 domain error,
5 budget starvation (treated as success with a message).
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .automl import build_twin, evaluate, load_twin, save_twin
from .bench import BenchReport, project_pipeline, run_quality_study, time_speedup
from .data import (SweepSpec, generate_dataset, holdout_configs,
                   interval_indices, read_csv, simulate_configs, write_csv)
from .denoise import FilterSpec, NoiseSpec, add_gaussian_noise, denoise_dataset
from .errors import NettwinError
from .jsonio import load_json, save_json
from .seeding import derive_seed
from .simulator import FlowSpec

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_DOMAIN = 4
EXIT_STARVED = 5


@dataclass
class PipelineConfig:
    sweep: SweepSpec = field(default_factory=SweepSpec)
    flow: FlowSpec = field(default_factory=FlowSpec)
    sample_n: int = 400
    test_n: int = 2000
    budget_s: float = 300.0
    preset: str = "good"
    seed: int = 7
    noise: dict = field(default_factory=lambda: {"sigma": 1.0, "mu": 0.0,
                                                 "clamp_floor_s": 1e-6})
    filter: dict = field(default_factory=lambda: {"window": 11, "order": 3})
    bench_n_configs: int = 100
    bench_repeats: int = 5
    output_dir: str = "nettwin-out"
    jobs: int = 1

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        doc = load_json(path)
        cfg = cls()
        if "sweep" in doc:
            cfg.sweep = SweepSpec(**doc["sweep"])
        if "flow" in doc:
            cfg.flow = FlowSpec(**doc["flow"])
        if "bench" in doc:
            cfg.bench_n_configs = doc["bench"].get("n_configs", cfg.bench_n_configs)
            cfg.bench_repeats = doc["bench"].get("repeats", cfg.bench_repeats)
        for name in ("sample_n", "test_n", "budget_s", "preset", "seed",
                     "noise", "filter", "output_dir", "jobs"):
            if name in doc:
                setattr(cfg, name, doc[name])
        return cfg

    def to_json(self) -> dict:
        return {
            "sweep": vars(self.sweep).copy(),
            "flow": vars(self.flow).copy(),
            "sample_n": self.sample_n,
            "test_n": self.test_n,
            "budget_s": self.budget_s,
            "preset": self.preset,
            "seed": self.seed,
            "noise": self.noise,
            "filter": self.filter,
            "bench": {"n_configs": self.bench_n_configs, "repeats": self.bench_repeats},
            "output_dir": self.output_dir,
            "jobs": self.jobs,
        }


def _sweep_from_args(args) -> SweepSpec:
    if getattr(args, "config", None):
        return PipelineConfig.from_file(args.config).sweep
    return SweepSpec()


def _flow_from_args(args) -> FlowSpec:
    if getattr(args, "config", None):
        return PipelineConfig.from_file(args.config).flow
    return FlowSpec()


def _leaderboards_json(leaderboards: dict) -> dict:
    return {target: lb.to_json() for target, lb in leaderboards.items()}


def _is_starved(leaderboards: dict) -> bool:
    return any(
        sum(1 for e in lb.entries if e.spec.family != "weighted_ensemble") <= 1
        for lb in leaderboards.values()
    )


# ---------------------------------------------------------------------------
# subcommands

def cmd_grid(args) -> int:
    sweep = _sweep_from_args(args)
    flow = _flow_from_args(args)
    t0 = time.perf_counter()
    ds = generate_dataset(sweep, flow, sample_n=args.sample, jobs=args.jobs)
    write_csv(ds, args.out)
    print(f"wrote {len(ds)} rows to {args.out} "
          f"({time.perf_counter() - t0:.1f}s)")
    return EXIT_OK


def cmd_train(args) -> int:
    train = read_csv(args.data)
    twin, leaderboards = build_twin(train, args.budget, args.preset, args.seed)
    save_twin(twin, args.out)
    if args.leaderboard:
        save_json(_leaderboards_json(leaderboards), args.leaderboard)
    for target, lb in leaderboards.items():
        head = lb.head()
        print(f"{target}: {len(lb.entries)} candidates, best {head.spec.label()} "
              f"(val rmse {head.metrics.rmse:.4g}, acc {head.metrics.accuracy_pct:.2f}%)")
    print(f"twin written to {args.out}")
    if _is_starved(leaderboards):
        print("warning: budget allowed only the mandatory candidate", file=sys.stderr)
        return EXIT_STARVED
    return EXIT_OK


def cmd_predict(args) -> int:
    from .runtime import predict_batch, read_configs_csv, write_predictions_csv
    twin = load_twin(args.twin)
    configs = read_configs_csv(args.infile)
    preds = predict_batch(twin, configs)
    write_predictions_csv(preds, args.out)
    n_extra = sum(p.extrapolation for p in preds)
    print(f"predicted {len(preds)} configs -> {args.out} "
          f"({n_extra} outside the training hull)")
    return EXIT_OK


def cmd_eval(args) -> int:
    twin = load_twin(args.twin)
    truth = read_csv(args.truth)
    report = {}
    for target in ("path1", "path2"):
        m = evaluate(twin, truth, target)
        report[target] = m.to_json()
        print(f"{target}: accuracy {m.accuracy_pct:.2f}%  rmse {m.rmse:.4g}  "
              f"r2 {m.r2:.4f}")
    if args.report:
        save_json(report, args.report)
    return EXIT_OK


def cmd_noise(args) -> int:
    ds = read_csv(args.infile)
    spec = NoiseSpec(sigma=args.sigma, mu=args.mu, seed=args.seed,
                     clamp_floor_s=args.floor)
    noised, clamped = add_gaussian_noise(ds, spec)
    write_csv(noised, args.out)
    save_json({"sigma": spec.sigma, "mu": spec.mu, "seed": spec.seed,
               "clamp_floor_s": spec.clamp_floor_s, "clamped": clamped,
               "rows": len(noised)}, str(args.out) + ".meta.json")
    print(f"noised {len(noised)} rows -> {args.out} ({clamped} values clamped)")
    return EXIT_OK


def cmd_denoise(args) -> int:
    ds = read_csv(args.infile)
    spec = FilterSpec(window=args.window, order=args.order)
    cleaned = denoise_dataset(ds, spec)
    write_csv(cleaned, args.out)
    print(f"filtered {len(cleaned)} rows -> {args.out} "
          f"(window {spec.window}, order {spec.order})")
    return EXIT_OK


def cmd_bench(args) -> int:
    twin = load_twin(args.twin)
    sweep = _sweep_from_args(args)
    flow = _flow_from_args(args)
    configs = holdout_configs(sweep, args.n_configs, derive_seed(args.seed, "bench"))
    sim_mean, twin_mean, speedup = time_speedup(twin, flow, configs,
                                                repeats=args.repeats)
    grid_size = sweep.grid_size()
    projection = project_pipeline(grid_size, sim_mean, args.collect_n,
                                  args.train_time, twin_mean * grid_size)
    report = BenchReport(sim_mean_s=sim_mean, twin_mean_s=twin_mean,
                         speedup=speedup, n_timed=len(configs),
                         repeats=args.repeats, accuracy={}, projection=projection,
                         params={"seed": args.seed, "collect_n": args.collect_n,
                                 "train_time_s": args.train_time,
                                 "grid_size": grid_size})
    if args.report:
        save_json(report.to_json(), args.report)
    print(f"simulator {sim_mean * 1e3:.2f} ms/config, twin {twin_mean * 1e6:.1f} "
          f"us/config -> speedup {speedup:.0f}x")
    print(f"full-grid simulation {projection['full_grid_sim_hours']:.2f} h vs "
          f"pipeline {projection['pipeline_hours']:.2f} h -> "
          f"factor {projection['projection_factor']:.0f}x")
    return EXIT_OK


def _write_series_csv(values, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["index", "latency_s"])
        for i, v in enumerate(values):
            w.writerow([i, repr(float(v))])


def _summary_table(quality_metrics: dict, leaderboards: dict, bench: BenchReport) -> str:
    lines = []
    lines.append("Candidate leaderboard (raw training data)")
    lines.append(f"{'Model':<58s} {'Path':<6s} {'Accuracy':>9s} {'Time(s)':>8s}")
    for target, lb in leaderboards.items():
        for e in lb.entries:
            lines.append(f"{e.spec.label():<58s} {target:<6s} "
                         f"{e.metrics.accuracy_pct:>8.2f}% {e.fit_time_s:>8.2f}")
    lines.append("")
    lines.append("Held-out accuracy by training-data variant")
    lines.append(f"{'Variant':<10s} {'Path 1':>8s} {'Path 2':>8s}")
    for variant, per_target in quality_metrics.items():
        lines.append(f"{variant:<10s} {per_target['path1'].accuracy_pct:>7.2f}% "
                     f"{per_target['path2'].accuracy_pct:>7.2f}%")
    lines.append("")
    lines.append(f"Simulator {bench.sim_mean_s * 1e3:.2f} ms/config vs twin "
                 f"{bench.twin_mean_s * 1e6:.1f} us/config: speedup {bench.speedup:.0f}x")
    p = bench.projection
    lines.append(f"Projected full-grid simulation {p['full_grid_sim_hours']:.2f} h vs "
                 f"twin pipeline {p['pipeline_hours']:.2f} h: "
                 f"factor {p['projection_factor']:.0f}x")
    return "\n".join(lines) + "\n"


def cmd_pipeline(args) -> int:
    cfg = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    for name in ("seed", "budget", "sample", "jobs", "preset", "out"):
        v = getattr(args, name, None)
        if v is not None:
            setattr(cfg, {"budget": "budget_s", "sample": "sample_n",
                          "out": "output_dir"}.get(name, name), v)
    outdir = Path(cfg.output_dir)
    stage = "setup"
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        probe = outdir / ".write-probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        print(f"pipeline failed at stage {stage}: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        save_json(cfg.to_json(), outdir / "config_used.json")

        stage = "generate"
        print(f"[{stage}] simulating {cfg.sample_n} interval-sampled configs "
              f"of the {cfg.sweep.grid_size()}-point grid")
        train = generate_dataset(cfg.sweep, cfg.flow, sample_n=cfg.sample_n,
                                 jobs=cfg.jobs)
        write_csv(train, outdir / "train.csv")

        stage = "sample"
        print(f"[{stage}] simulating {cfg.test_n} held-out configs")
        exclude = set(interval_indices(cfg.sweep.grid_size(), cfg.sample_n))
        test_configs = holdout_configs(cfg.sweep, cfg.test_n,
                                       derive_seed(cfg.seed, "holdout"), exclude)
        test = simulate_configs(test_configs, cfg.flow, jobs=cfg.jobs)
        write_csv(test, outdir / "test.csv")

        stage = "train"
        print(f"[{stage}] model search (budget {cfg.budget_s}s, preset {cfg.preset})")
        t_train0 = time.perf_counter()
        twin, leaderboards = build_twin(train, cfg.budget_s, cfg.preset,
                                        derive_seed(cfg.seed, "train"))
        train_time_s = time.perf_counter() - t_train0
        save_twin(twin, outdir / "twin.json")
        save_json(_leaderboards_json(leaderboards), outdir / "leaderboard.json")

        stage = "evaluate"
        eval_report = {t: evaluate(twin, test, t).to_json() for t in ("path1", "path2")}
        save_json(eval_report, outdir / "eval.json")
        for t in ("path1", "path2"):
            print(f"[{stage}] {t} accuracy {eval_report[t]['accuracy_pct']:.2f}%")

        stage = "noise"
        noise_spec = NoiseSpec(seed=derive_seed(cfg.seed, "noise"), **cfg.noise)
        noised, clamped = add_gaussian_noise(train, noise_spec)
        write_csv(noised, outdir / "noisy.csv")
        save_json({"sigma": noise_spec.sigma, "mu": noise_spec.mu,
                   "seed": noise_spec.seed, "clamp_floor_s": noise_spec.clamp_floor_s,
                   "clamped": clamped, "rows": len(noised)},
                  outdir / "noisy.csv.meta.json")

        stage = "denoise"
        filt_spec = FilterSpec(**cfg.filter)
        cleaned = denoise_dataset(noised, filt_spec)
        write_csv(cleaned, outdir / "clean.csv")

        stage = "retrain"
        print(f"[{stage}] training twins on noised and filtered variants")
        study = run_quality_study(cfg.sweep, cfg.flow, noise_spec, filt_spec,
                                  cfg.budget_s, cfg.seed, sample_n=cfg.sample_n,
                                  train=train, test=test, jobs=cfg.jobs,
                                  preset=cfg.preset)
        quality = {
            "clamped": study["clamped"],
            "variants": {
                v: {t: m.to_json() for t, m in per_target.items()}
                for v, per_target in study["metrics"].items()
            },
        }
        save_json(quality, outdir / "quality.json")
        for variant in ("raw", "noised", "cleaned"):
            save_twin(study["twins"][variant], outdir / f"twin_{variant}.json")
            for t in ("path1", "path2"):
                _write_series_csv(study["series"][variant][t],
                                  outdir / f"series_{variant}_{t}.csv")

        stage = "bench"
        print(f"[{stage}] timing {cfg.bench_n_configs} configs x {cfg.bench_repeats} repeats")
        bench_configs = holdout_configs(cfg.sweep, cfg.bench_n_configs,
                                        derive_seed(cfg.seed, "bench"))
        sim_mean, twin_mean, speedup = time_speedup(twin, cfg.flow, bench_configs,
                                                    repeats=cfg.bench_repeats)
        grid_size = cfg.sweep.grid_size()
        projection = project_pipeline(grid_size, sim_mean, cfg.sample_n,
                                      train_time_s, twin_mean * grid_size)
        bench = BenchReport(sim_mean_s=sim_mean, twin_mean_s=twin_mean,
                            speedup=speedup, n_timed=len(bench_configs),
                            repeats=cfg.bench_repeats, accuracy=study["metrics"],
                            projection=projection,
                            params={"seed": cfg.seed, "grid_size": grid_size,
                                    "collect_n": cfg.sample_n,
                                    "preset": cfg.preset, "budget_s": cfg.budget_s,
                                    "noise": cfg.noise, "filter": cfg.filter})
        save_json(bench.to_json(), outdir / "bench.json")
        (outdir / "summary.txt").write_text(
            _summary_table(study["metrics"], leaderboards, bench))
        print(f"[{stage}] speedup {speedup:.0f}x, projection factor "
              f"{projection['projection_factor']:.0f}x")
        print(f"pipeline artifacts in {outdir}")
    except NettwinError as exc:
        print(f"pipeline failed at stage {stage}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"pipeline failed at stage {stage}: {exc}", file=sys.stderr)
        return EXIT_IO
    if _is_starved(leaderboards):
        print("warning: budget allowed only the mandatory candidate", file=sys.stderr)
        return EXIT_STARVED
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nettwin",
                                description="Latency digital twins for a two-path network")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("grid", help="simulate a sweep grid into a dataset CSV")
    g.add_argument("--out", required=True)
    g.add_argument("--sample", type=int, default=None,
                   help="interval-sample this many grid points (default: full grid)")
    g.add_argument("--config", help="pipeline config JSON providing sweep/flow")
    g.add_argument("--jobs", type=int, default=1)
    g.set_defaults(func=cmd_grid)

    t = sub.add_parser("train", help="search the model zoo and write a twin")
    t.add_argument("--data", required=True)
    t.add_argument("--budget", type=float, default=300.0)
    t.add_argument("--preset", choices=("fast", "good", "best"), default="good")
    t.add_argument("--seed", type=int, default=7)
    t.add_argument("--out", required=True)
    t.add_argument("--leaderboard")
    t.set_defaults(func=cmd_train)

    pr = sub.add_parser("predict", help="batch-predict latencies for config rows")
    pr.add_argument("--twin", required=True)
    pr.add_argument("--in", dest="infile", required=True)
    pr.add_argument("--out", required=True)
    pr.set_defaults(func=cmd_predict)

    e = sub.add_parser("eval", help="score a twin against a truth dataset")
    e.add_argument("--twin", required=True)
    e.add_argument("--truth", required=True)
    e.add_argument("--report")
    e.set_defaults(func=cmd_eval)

    n = sub.add_parser("noise", help="add seeded Gaussian noise to latencies")
    n.add_argument("--in", dest="infile", required=True)
    n.add_argument("--out", required=True)
    n.add_argument("--sigma", type=float, default=1.0)
    n.add_argument("--mu", type=float, default=0.0)
    n.add_argument("--seed", type=int, default=0)
    n.add_argument("--floor", type=float, default=1e-6)
    n.set_defaults(func=cmd_noise)

    d = sub.add_parser("denoise", help="Savitzky-Golay filter the latency columns")
    d.add_argument("--in", dest="infile", required=True)
    d.add_argument("--out", required=True)
    d.add_argument("--window", type=int, default=11)
    d.add_argument("--order", type=int, default=3)
    d.set_defaults(func=cmd_denoise)

    b = sub.add_parser("bench", help="time the simulator against a twin")
    b.add_argument("--twin", required=True)
    b.add_argument("--report")
    b.add_argument("--config", help="pipeline config JSON providing sweep/flow")
    b.add_argument("--n-configs", type=int, default=100)
    b.add_argument("--repeats", type=int, default=5)
    b.add_argument("--seed", type=int, default=7)
    b.add_argument("--collect-n", type=int, default=400)
    b.add_argument("--train-time", type=float, default=300.0,
                   help="training wall time to charge in the pipeline projection")
    b.set_defaults(func=cmd_bench)

    pl = sub.add_parser("pipeline", help="run the full experiment end to end")
    pl.add_argument("--config", help="PipelineConfig JSON (defaults if omitted)")
    pl.add_argument("--out", help="output directory (overrides config)")
    pl.add_argument("--seed", type=int)
    pl.add_argument("--budget", type=float)
    pl.add_argument("--sample", type=int)
    pl.add_argument("--preset", choices=("fast", "good", "best"))
    pl.add_argument("--jobs", type=int)
    pl.set_defaults(func=cmd_pipeline)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NettwinError as exc:
        # config/spec invariant violations from flag values are usage errors
        from .errors import InvalidConfigError
        code = EXIT_USAGE if isinstance(exc, InvalidConfigError) else EXIT_DOMAIN
        print(f"error: {exc}", file=sys.stderr)
        return code
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
