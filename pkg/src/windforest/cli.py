"""Command-line pipeline: ``gen``, ``analyze``, ``embed``, ``train``,
``forecast`` and ``evaluate``.

Settings resolve as defaults < ``--config`` JSON file < command-line flags.
Every run writes the resolved settings to ``<output-dir>/resolved_config.json``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from . import synthetic
from .analysis import mi_profile
from .embedding import embed, plan_split
from .forecast import iterate_forecast, rmse, rolling_evaluate
from .forest import ForestConfig, load_model, save_model, train_forest
from .timeseries import IngestConfig, parse_csv, write_csv

log = logging.getLogger("windforest")

SUBCOMMANDS = ("gen", "analyze", "embed", "train", "forecast", "evaluate")


@dataclass
class RunConfig:
    subcommand: str = ""
    input: str | None = None
    output_dir: str = "."
    model: str | None = None
    # ingestion
    interval_s: int = 600
    max_gap: int = 6
    timestamp_format: str = "auto"
    # analysis
    max_delay: int = 144
    bins: int = 16
    threshold_fraction: float = 0.05
    lag_rule: str = "threshold"
    # embedding / split; m may be "auto" (selected lag)
    m: int | str = 72
    n_train: int = 2016
    n_validation: int = 2016
    emit_matrix: bool = False
    # forest
    n_trees: int = 100
    mtry: int | None = None
    min_leaf: int = 5
    max_depth: int | None = None
    bootstrap: bool = True
    subsample_fraction: float | None = None
    seed: int = 0
    n_jobs: int = 1
    # forecasting / evaluation
    origin: int | None = None
    first_test_index: int | None = None
    stride: int = 2016
    block_len: int = 2016
    horizon_steps: int = 6
    # synthetic generator
    kind: str = "ar2"
    length: int = 20000
    phi1: float = 1.2
    phi2: float = -0.3
    sigma: float = 0.5
    period: float = 144.0
    amplitude: float = 3.0
    offset: float = 8.0
    gen_seed: int | None = None

    @classmethod
    def resolve(cls, file_values: dict, flag_values: dict) -> "RunConfig":
        names = {f.name for f in fields(cls)}
        unknown = sorted(set(file_values) - names)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        merged = {**file_values, **flag_values}
        cfg = cls(**merged)
        cfg.explicit = frozenset(merged)
        cfg.check()
        return cfg

    def check(self) -> None:
        if self.subcommand not in SUBCOMMANDS:
            raise ValueError(f"unknown subcommand {self.subcommand!r}")
        if self.m != "auto" and (not isinstance(self.m, int) or self.m < 1):
            raise ValueError(f"m must be a positive integer or 'auto', got {self.m!r}")
        for name in ("max_delay", "bins", "n_trees", "min_leaf", "n_train", "stride", "block_len", "horizon_steps", "length", "n_jobs"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.n_validation < 0:
            raise ValueError(f"n_validation must be >= 0, got {self.n_validation}")
        if not 0 < self.threshold_fraction < 1:
            raise ValueError(f"threshold_fraction must lie in (0, 1), got {self.threshold_fraction}")

    def forest_config(self, m: int) -> ForestConfig:
        cfg = ForestConfig(
            n_trees=self.n_trees,
            mtry=self.mtry,
            min_leaf=self.min_leaf,
            max_depth=self.max_depth,
            bootstrap=self.bootstrap,
            subsample_fraction=self.subsample_fraction,
            seed=self.seed,
        )
        return cfg.validate(m)

    def ingest_config(self) -> IngestConfig:
        return IngestConfig(interval_s=self.interval_s, max_gap=self.max_gap, timestamp_format=self.timestamp_format)


class _Outputs:
    """Tracks files written by a run so they can be removed on failure."""

    def __init__(self, directory):
        self.dir = Path(directory)
        self.written: list[Path] = []

    def path(self, name: str) -> Path:
        self.dir.mkdir(parents=True, exist_ok=True)
        p = self.dir / name
        self.written.append(p)
        return p

    def write_text(self, name: str, text: str) -> Path:
        p = self.path(name)
        p.write_text(text, encoding="utf-8")
        return p

    def write_json(self, name: str, doc) -> Path:
        return self.write_text(name, json.dumps(doc, indent=2) + "\n")

    def discard(self) -> None:
        for p in self.written:
            p.unlink(missing_ok=True)
            Path(str(p) + ".tmp").unlink(missing_ok=True)


def _fmt(v: float) -> str:
    return repr(float(v))


def _load_series(cfg: RunConfig):
    if not cfg.input:
        raise ValueError("--input is required")
    series, report = parse_csv(cfg.input, cfg.ingest_config())
    if report.rows_rejected or report.gaps_filled:
        log.warning(
            "%s: %d rows rejected, %d samples interpolated", cfg.input, report.rows_rejected, report.gaps_filled
        )
    return series


def _resolve_m(cfg: RunConfig, series) -> int:
    if cfg.m != "auto":
        return cfg.m
    return mi_profile(series, cfg.max_delay, cfg.bins, cfg.threshold_fraction, cfg.lag_rule).selected_lag


def cmd_gen(cfg: RunConfig, out: _Outputs) -> None:
    seed = cfg.seed if cfg.gen_seed is None else cfg.gen_seed
    if cfg.kind == "noise":
        series = synthetic.noise(cfg.length, offset=cfg.offset, seed=seed, interval_s=cfg.interval_s)
    elif cfg.kind == "ar2":
        series = synthetic.ar2(
            cfg.length, cfg.phi1, cfg.phi2, cfg.sigma, offset=cfg.offset, seed=seed, interval_s=cfg.interval_s
        )
    elif cfg.kind == "sine":
        series = synthetic.sine(
            cfg.length, cfg.period, cfg.amplitude, cfg.sigma, offset=cfg.offset, seed=seed, interval_s=cfg.interval_s
        )
    else:
        raise ValueError(f"unknown generator kind {cfg.kind!r} (choose from {', '.join(synthetic.GENERATORS)})")
    write_csv(series, out.path("series.csv"), timestamp_header="timestamp")
    print(f"wrote {len(series)} samples to {out.dir / 'series.csv'}")


def cmd_analyze(cfg: RunConfig, out: _Outputs) -> None:
    series = _load_series(cfg)
    profile = mi_profile(series, cfg.max_delay, cfg.bins, cfg.threshold_fraction, cfg.lag_rule)
    lines = ["lag,acf,mi_bits"]
    for lag in range(profile.max_delay + 1):
        mi = "" if lag == 0 else _fmt(profile.mi_bits[lag - 1])
        lines.append(f"{lag},{_fmt(profile.acf[lag])},{mi}")
    out.write_text("profile.csv", "\n".join(lines) + "\n")
    summary = f"selected_lag={profile.selected_lag}"
    if not profile.converged:
        summary += " converged=false"
    out.write_text("summary.txt", summary + "\n")
    print(summary)


def cmd_embed(cfg: RunConfig, out: _Outputs) -> None:
    series = _load_series(cfg)
    m = _resolve_m(cfg, series)
    ds = embed(series, m)
    if cfg.emit_matrix:
        with open(out.path("embedding.csv"), "w", encoding="utf-8") as fh:
            fh.write(",".join([f"w{j + 1}" for j in range(m)] + ["target"]) + "\n")
            for row, target in zip(ds.inputs.tolist(), ds.targets.tolist()):
                fh.write(",".join(map(repr, row + [target])) + "\n")
    print(json.dumps({"m": m, "rows": len(ds), "columns": m}))


def cmd_train(cfg: RunConfig, out: _Outputs) -> None:
    series = _load_series(cfg)
    m = _resolve_m(cfg, series)
    plan = plan_split(series, m, cfg.n_train, cfg.n_validation)
    model = train_forest(plan.train, cfg.forest_config(m), n_jobs=cfg.n_jobs)
    model_path = Path(cfg.model) if cfg.model else out.path("model.json")
    if cfg.model:
        out.written.append(model_path)
        model_path.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, model_path)
    metrics = {
        "m": m,
        "n_train": len(plan.train),
        "n_validation": len(plan.validation),
        "test_start_index": plan.test_start_index,
        "train_rmse": rmse(plan.train.targets, model.predict(plan.train.inputs)),
        "validation_rmse": (
            rmse(plan.validation.targets, model.predict(plan.validation.inputs)) if len(plan.validation) else None
        ),
        "oob_rmse": model.oob_rmse,
        "model": str(model_path),
    }
    out.write_json("train_metrics.json", metrics)
    print(json.dumps(metrics))


def _model_for(cfg: RunConfig):
    if not cfg.model:
        raise ValueError("--model is required")
    model = load_model(cfg.model)
    if "m" in getattr(cfg, "explicit", ()) and cfg.m != model.m:
        raise ValueError(f"model was trained with m={model.m} but m={cfg.m} was requested")
    return model


def cmd_forecast(cfg: RunConfig, out: _Outputs) -> None:
    model = _model_for(cfg)
    series = _load_series(cfg)
    origin = len(series) if cfg.origin is None else cfg.origin
    if origin < model.m:
        raise ValueError(f"origin {origin} leaves fewer than m={model.m} past samples")
    if origin > len(series):
        raise ValueError(f"origin {origin} lies beyond the series end ({len(series)})")
    preds = iterate_forecast(model, series.values[origin - model.m : origin], cfg.horizon_steps)[0]
    lines = ["step,predicted_ms"] + [f"{k + 1},{_fmt(v)}" for k, v in enumerate(preds)]
    out.write_text("forecast.csv", "\n".join(lines) + "\n")
    print("\n".join(lines))


def cmd_evaluate(cfg: RunConfig, out: _Outputs) -> None:
    model = _model_for(cfg)
    series = _load_series(cfg)
    first = cfg.first_test_index
    if first is None:
        first = model.m + cfg.n_train + cfg.n_validation
    report = rolling_evaluate(model, series, first, cfg.stride, cfg.horizon_steps, cfg.block_len, n_jobs=cfg.n_jobs)
    lines = ["block_index,test_start_index,horizon_steps,rmse"]
    lines += [f"{w.block_index},{w.test_start_index},{w.horizon_steps},{_fmt(w.rmse)}" for w in report.windows]
    out.write_text("evaluate.csv", "\n".join(lines) + "\n")
    steps = ["block_index,step,rmse"]
    steps += [f"{w.block_index},{k + 1},{_fmt(r)}" for w in report.windows for k, r in enumerate(w.step_rmse)]
    out.write_text("step_rmse.csv", "\n".join(steps) + "\n")
    summary = report.summary()
    out.write_json("summary.json", summary)
    print(json.dumps(summary))


COMMANDS = {
    "gen": cmd_gen,
    "analyze": cmd_analyze,
    "embed": cmd_embed,
    "train": cmd_train,
    "forecast": cmd_forecast,
    "evaluate": cmd_evaluate,
}


def _m_arg(text: str):
    return text if text == "auto" else int(text)


def _bool_arg(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _optional_int(text: str):
    return None if text.lower() == "none" else int(text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    g = common.add_argument_group("global")
    g.add_argument("--input", help="speed CSV (timestamp,speed_ms)")
    g.add_argument("--output-dir", dest="output_dir")
    g.add_argument("--config", dest="_config", help="JSON file with RunConfig fields")
    g.add_argument("--seed", type=int)
    g.add_argument("--model", help="model file (written by train, read by forecast/evaluate)")
    g.add_argument("--n-jobs", dest="n_jobs", type=int)
    g.add_argument("--interval-s", dest="interval_s", type=int)
    g.add_argument("--max-gap", dest="max_gap", type=int)
    g.add_argument("--timestamp-format", dest="timestamp_format", choices=["auto", "epoch", "iso"])
    g.add_argument("-v", "--verbose", dest="_verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="windforest", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("gen", parents=[common], argument_default=argparse.SUPPRESS, help="write a synthetic series")
    p.add_argument("--kind", choices=sorted(synthetic.GENERATORS))
    p.add_argument("--length", type=int)
    p.add_argument("--phi1", type=float)
    p.add_argument("--phi2", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--period", type=float)
    p.add_argument("--amplitude", type=float)
    p.add_argument("--offset", type=float)
    p.add_argument("--gen-seed", dest="gen_seed", type=int)

    analysis_flags = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    analysis_flags.add_argument("--max-delay", dest="max_delay", type=int)
    analysis_flags.add_argument("--bins", type=int)
    analysis_flags.add_argument("--threshold-fraction", dest="threshold_fraction", type=float)
    analysis_flags.add_argument("--lag-rule", dest="lag_rule", choices=["threshold", "first_minimum"])

    split_flags = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    split_flags.add_argument("--m", type=_m_arg, help="embedding length or 'auto'")
    split_flags.add_argument("--n-train", dest="n_train", type=int)
    split_flags.add_argument("--n-validation", dest="n_validation", type=int)

    eval_flags = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    eval_flags.add_argument("--horizon-steps", dest="horizon_steps", type=int)

    sub.add_parser("analyze", parents=[common, analysis_flags], argument_default=argparse.SUPPRESS,
                   help="ACF / mutual-information profile and lag selection")

    p = sub.add_parser("embed", parents=[common, analysis_flags, split_flags], argument_default=argparse.SUPPRESS,
                       help="report (and optionally dump) the delay-embedding matrix")
    p.add_argument("--emit-matrix", dest="emit_matrix", action="store_true")

    p = sub.add_parser("train", parents=[common, analysis_flags, split_flags], argument_default=argparse.SUPPRESS,
                       help="train a random forest on the training split")
    p.add_argument("--n-trees", dest="n_trees", type=int)
    p.add_argument("--mtry", type=_optional_int)
    p.add_argument("--min-leaf", dest="min_leaf", type=int)
    p.add_argument("--max-depth", dest="max_depth", type=_optional_int)
    p.add_argument("--bootstrap", type=_bool_arg)
    p.add_argument("--subsample-fraction", dest="subsample_fraction", type=float)

    p = sub.add_parser("forecast", parents=[common, split_flags, eval_flags], argument_default=argparse.SUPPRESS,
                       help="iterated forecast from one origin")
    p.add_argument("--origin", type=int, help="index of the first forecast sample (default: series end)")

    p = sub.add_parser("evaluate", parents=[common, split_flags, eval_flags], argument_default=argparse.SUPPRESS,
                       help="rolling block RMSE across the test span")
    p.add_argument("--first-test-index", dest="first_test_index", type=int)
    p.add_argument("--stride", type=int)
    p.add_argument("--block-len", dest="block_len", type=int)
    return parser


def main(argv=None) -> int:
    args = vars(build_parser().parse_args(argv))
    config_path = args.pop("_config", None)
    verbose = args.pop("_verbose", False)
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(levelname)s: %(message)s")

    out = None
    try:
        file_values = {}
        if config_path:
            try:
                file_values = json.loads(Path(config_path).read_text(encoding="utf-8"))
            except OSError as exc:
                raise ValueError(f"cannot read config {config_path}: {exc.strerror or exc}") from None
            file_values.pop("subcommand", None)
        cfg = RunConfig.resolve(file_values, args)
        out = _Outputs(cfg.output_dir)
        COMMANDS[cfg.subcommand](cfg, out)
        out.write_json("resolved_config.json", asdict(cfg))
    except (ValueError, OSError, IndexError) as exc:
        if out is not None:
            out.discard()
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"windforest: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
