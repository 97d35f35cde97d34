"""Run sets of experiments and write their CSV logs, summaries and charts.

A suite document is a JSON object with either an explicit ``runs`` list of
experiment configs, or a ``preset`` name plus an optional ``base`` config:

``fig3``
    ideal/awgn/rayleigh channels x MEE/MSE/MAE on the regression case.
``localization``
    MEE/MSE/MAE on the localization case, plus a one-row MED summary.
``bench``
    kernel vs matrix timing on the regression case.

``seeds`` (list of ints) repeats every run once per seed.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, replace
from pathlib import Path

from . import plots
from .config import ExperimentConfig, read_json, use_case_1, use_case_2
from .errors import ConfigError
from .harness import benchmark_complexity, prepare_data, summary_csv, summary_row, train, write_atomic

logger = logging.getLogger(__name__)

COMPARED = ("mee-matrix", "mse", "mae")
PRESETS = ("fig3", "localization", "bench")


def expand(doc: dict) -> tuple[list[ExperimentConfig], str | None]:
    doc = dict(doc)
    preset = doc.pop("preset", None)
    seeds = doc.pop("seeds", None)
    base_doc = doc.pop("base", None)
    runs_doc = doc.pop("runs", None)
    if doc:
        raise ConfigError(f"unknown suite keys: {sorted(doc)}")
    if preset is not None and preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}; choose from {PRESETS}")

    if runs_doc is not None:
        configs = [ExperimentConfig.from_dict(r) for r in runs_doc]
    elif preset is None:
        configs = []
    else:
        default = use_case_2() if preset == "localization" else use_case_1()
        base = ExperimentConfig.from_dict({**default.to_dict(), **(base_doc or {})}) if base_doc else default
        if preset == "fig3":
            configs = [
                base.with_overrides(loss=loss, channel_mode=mode)
                for mode in ("ideal", "awgn", "rayleigh")
                for loss in COMPARED
            ]
        elif preset == "localization":
            configs = [base.with_overrides(loss=loss) for loss in COMPARED]
        else:
            configs = [base]
    if seeds:
        configs = [replace(c, seed=int(s), run_id=None) for c in configs for s in seeds]
    return configs, preset


def run_suite(configs, out_dir, preset: str | None = None, svg: bool = True) -> int:
    """Run every config, write artifacts under ``out_dir``; return failure count."""
    configs = list(configs)
    if not configs:
        return 0
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc

    if preset == "bench":
        rows = []
        for cfg in configs:
            rep = benchmark_complexity(cfg, prepare_data(cfg))
            rows.append(asdict(rep))
        header = list(rows[0])
        text = ",".join(header) + "\n" + "".join(",".join(str(r[h]) for h in header) + "\n" for r in rows)
        write_atomic(out / "bench.csv", text)
        if svg:
            plots.timing_bars(rows[0], out / "bench.svg")
        return 0

    failures = 0
    results = []
    data_cache = {}
    for cfg in configs:
        key = data_key(cfg)
        try:
            if key not in data_cache:
                data_cache[key] = prepare_data(cfg)
            res = train(cfg, data_cache[key])
        except Exception as exc:  # noqa: BLE001 - a failed run must not stop the suite
            logger.error("run %s failed: %s", cfg.name, exc)
            failures += 1
            continue
        write_atomic(out / f"{cfg.name}.csv", res.log.to_csv())
        results.append(res)

    write_atomic(out / "summary.csv", summary_csv(summary_row(r) for r in results))
    if preset == "localization":
        meds = {}
        for r in results:
            meds.setdefault(r.config.loss, []).append(r.report.med)
        losses = [l for l in COMPARED if l in meds]
        row = [sum(meds[l]) / len(meds[l]) for l in losses]
        write_atomic(
            out / "med_summary.csv",
            ",".join(f"med_{l}" for l in losses) + "\n" + ",".join(repr(v) for v in row) + "\n",
        )
        if svg:
            plots.med_bars(dict(zip(losses, row)), out / "med.svg")
    if svg and results:
        groups = {}
        for r in results:
            groups.setdefault(r.config.channel.mode, []).append(r)
        for mode, group in groups.items():
            plots.loss_curves(group, out / f"curves_{mode}.svg", title=f"{mode} channel")
    return failures


def data_key(cfg: ExperimentConfig) -> tuple:
    return (
        cfg.use_case, cfg.data_path, cfg.target_columns, cfg.feature_columns, cfg.coord_columns,
        cfg.missing_value, cfg.drop_threshold, cfg.train_fraction, cfg.split_seed,
        cfg.n_samples, cfg.outlier_fraction, cfg.n_aps,
    )


def run_suite_file(path, out_dir, svg: bool = True) -> int:
    configs, preset = expand(read_json(path))
    return run_suite(configs, out_dir, preset=preset, svg=svg)
