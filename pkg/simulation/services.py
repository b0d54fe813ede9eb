"""
Monte Carlo campaigns over the link solver.

A campaign is cut into work items (series × sweep value × architecture ×
chunk of trial indices). Each item runs through ``run_trial_batch`` in this
process, in a process pool, or as a Celery task; results come back in the
canonical (series, sweep value, architecture, trial) order either way.
"""

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable

import numpy as np
from django.conf import settings
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .channel import Scenario, draw_channel, element_grid_shape
from .exceptions import ConfigError, InvalidParameterError, OutputError
from .metrics import unitarity_error, watt_to_dbm
from .schemas import Architecture, ExperimentConfig, GainMode, LinkBudget, PowerRule, SolverOptions, SweepKind
from .solver import SolverReport, solve_for_architecture

logger = logging.getLogger(__name__)

CONFIG_DIR = Path(__file__).resolve().parent / "configs"

BUNDLED_CONFIGS = {
    SweepKind.POWER: "power_sweep.json",
    SweepKind.ELEMENT: "element_sweep.json",
    SweepKind.ITH: "ith_sweep.json",
}

RESULT_COLUMNS = ["sweep_value", "architecture", "trial", "se_bits", "ps_w", "interference_w", "iters", "converged"]
SUMMARY_COLUMNS = ["sweep_value", "architecture", "trials", "mean_se_bits", "stddev_se_bits", "stderr_se_bits"]


class TrialResult(BaseModel):
    """One solved trial; ``series_value`` is I_th [W] or, for I_th sweeps, P_s [dBm]."""

    model_config = ConfigDict(frozen=True)

    series_value: float
    sweep_value: float
    architecture: Architecture
    trial_index: int = Field(ge=0)
    se_bits: float = Field(ge=0)
    P_s_w: float = Field(ge=0)
    interference_w: float = Field(ge=0)
    outer_iters: int = Field(ge=0)
    converged: bool


class SummaryRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    series_value: float
    sweep_value: float
    architecture: Architecture
    trials: int
    mean_se_bits: float
    stddev_se_bits: float
    stderr_se_bits: float


@dataclass(frozen=True)
class SweepPoint:
    series_value: float
    sweep_value: float
    scenario: Scenario
    budget: LinkBudget


# ─── Configuration ────────────────────────────────────────────────────────


def bundled_config_path(sweep: SweepKind) -> Path:
    return CONFIG_DIR / BUNDLED_CONFIGS[SweepKind(sweep)]


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse and validate a JSON experiment file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    try:
        return ExperimentConfig.model_validate_json(text)
    except ValidationError as exc:
        raise ConfigError(f"invalid config {path}:\n{exc}") from exc


def apply_overrides(
    cfg: ExperimentConfig,
    *,
    master_seed: int | None = None,
    trials: int | None = None,
    architectures: list[Architecture] | None = None,
    gmode: GainMode | None = None,
    prule: PowerRule | None = None,
) -> ExperimentConfig:
    """Return a re-validated copy of ``cfg`` with the given command-line overrides."""
    data = cfg.model_dump()
    if master_seed is not None:
        data["master_seed"] = master_seed
    if trials is not None:
        data["trials"] = trials
    if architectures is not None:
        data["fixed"]["architectures"] = architectures
    if gmode is not None:
        data["fixed"]["gmode"] = gmode
    if prule is not None:
        data["fixed"]["prule"] = prule
    return _validated(data, "invalid override")


def _validated(data: dict, context: str) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"{context}:\n{exc}") from exc


# ─── Scenario expansion ───────────────────────────────────────────────────


def series_values(cfg: ExperimentConfig) -> list[float]:
    return cfg.series_values()


def series_label(cfg: ExperimentConfig, series_value: float) -> str:
    if cfg.sweep is SweepKind.ITH:
        return f"ps{series_value:g}dbm"
    return f"ith{series_value:g}w"


def expand_scenario(cfg: ExperimentConfig, series_value: float, sweep_value: float) -> SweepPoint:
    fixed = cfg.fixed
    Mx, My = fixed.Mx, fixed.My
    if cfg.sweep is SweepKind.ELEMENT:
        Mx, My = element_grid_shape(int(sweep_value))
    budget = cfg.link_budget(series_value, sweep_value)
    scenario = Scenario(
        Mx=Mx,
        My=My,
        f_c=fixed.f_c_hz,
        q=fixed.spacing,
        links={tag: fixed.link(tag) for tag in ("h", "g", "f")},
    )
    return SweepPoint(series_value, sweep_value, scenario, budget)


# ─── Trial execution ──────────────────────────────────────────────────────


def run_trial(
    point: SweepPoint,
    architecture: Architecture,
    options: SolverOptions,
    master_seed: int,
    trial_index: int,
) -> TrialResult:
    chan = draw_channel(point.scenario, master_seed, trial_index)
    report = solve_for_architecture(architecture, chan, point.budget, options)
    return TrialResult(
        series_value=point.series_value,
        sweep_value=point.sweep_value,
        architecture=architecture,
        trial_index=trial_index,
        se_bits=report.se_bits,
        P_s_w=report.P_s_star,
        interference_w=report.interference_final,
        outer_iters=report.outer_iters,
        converged=report.converged,
    )


def run_trial_batch(
    cfg_payload: dict,
    series_value: float,
    sweep_value: float,
    architecture: str,
    trial_indices: list[int],
) -> list[dict]:
    """
    Solve a chunk of trials for one (series, sweep value, architecture).

    Takes and returns plain JSON-able data so the same function serves the
    process pool and the Celery task.
    """
    cfg = ExperimentConfig.model_validate(cfg_payload)
    point = expand_scenario(cfg, series_value, sweep_value)
    options = cfg.solver_options()
    arch = Architecture(architecture)
    return [
        run_trial(point, arch, options, cfg.master_seed, trial).model_dump(mode="json")
        for trial in trial_indices
    ]


def work_items(cfg: ExperimentConfig, batch_size: int) -> list[tuple[float, float, str, list[int]]]:
    """Work items in canonical order."""
    if batch_size < 1:
        raise ConfigError(f"batch size must be >= 1, got {batch_size}")
    items = []
    for series in series_values(cfg):
        for value in cfg.sweep_values:
            for arch in cfg.fixed.architectures:
                for start in range(0, cfg.trials, batch_size):
                    trials = list(range(start, min(start + batch_size, cfg.trials)))
                    items.append((series, value, arch.value, trials))
    return items


def _run_local(payload: dict, items: list, workers: int) -> list[list[dict]]:
    if workers <= 1:
        batches = []
        for i, item in enumerate(items, start=1):
            batches.append(run_trial_batch(payload, *item))
            logger.debug("Finished work item %d/%d.", i, len(items))
        return batches
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(run_trial_batch, payload, *item) for item in items]
        return [future.result() for future in futures]


def _run_celery(payload: dict, items: list) -> list[list[dict]]:
    from celery import group

    from .tasks import run_trial_batch_task

    job = group(run_trial_batch_task.s(payload, *item) for item in items)
    return job.apply_async().get()


def run_sweep(
    cfg: ExperimentConfig,
    workers: int | None = None,
    backend: str | None = None,
    batch_size: int | None = None,
) -> list[TrialResult]:
    """Every (series, sweep value, architecture, trial) of the campaign, in canonical order."""
    workers = workers if workers is not None else settings.SIMULATION_WORKERS
    backend = backend or settings.SIMULATION_BACKEND
    batch_size = batch_size or settings.SIMULATION_BATCH_SIZE

    # model_copy(update=...) skips validation; check every sweep point before any trial runs
    cfg = _validated(cfg.model_dump(), "invalid config")
    items = work_items(cfg, batch_size)
    payload = cfg.model_dump(mode="json")
    logger.info(
        "Running %s: %d series x %d values x %d architectures x %d trials in %d work items (%s backend).",
        cfg.sweep.value,
        len(series_values(cfg)),
        len(cfg.sweep_values),
        len(cfg.fixed.architectures),
        cfg.trials,
        len(items),
        backend,
    )

    if backend == "celery":
        batches = _run_celery(payload, items)
    elif backend == "local":
        batches = _run_local(payload, items, workers)
    else:
        raise ConfigError(f"unknown backend {backend!r}; expected 'local' or 'celery'")

    results = [TrialResult.model_validate(row) for batch in batches for row in batch]
    logger.info("Sweep %s finished: %d trial results.", cfg.sweep.value, len(results))
    return results


# ─── Aggregation ──────────────────────────────────────────────────────────


def aggregate(results: Iterable[TrialResult]) -> list[SummaryRow]:
    """Mean, sample stddev and standard error of se_bits per (series, sweep value, architecture)."""
    groups: dict[tuple, list[float]] = {}
    for row in results:
        groups.setdefault((row.series_value, row.sweep_value, row.architecture), []).append(row.se_bits)
    if not groups:
        raise InvalidParameterError("cannot aggregate an empty result set")

    summary = []
    for (series, value, arch), se in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2].value)):
        # sorted so the floating-point sums do not depend on input order
        samples = np.sort(np.asarray(se))
        n = samples.size
        std = float(np.std(samples, ddof=1)) if n > 1 else 0.0
        summary.append(
            SummaryRow(
                series_value=series,
                sweep_value=value,
                architecture=arch,
                trials=n,
                mean_se_bits=float(np.mean(samples)),
                stddev_se_bits=std,
                stderr_se_bits=std / math.sqrt(n),
            )
        )
    return summary


# ─── Output ───────────────────────────────────────────────────────────────


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8", newline="")
    except OSError as exc:
        raise OutputError(path, exc.strerror or str(exc)) from exc


def results_csv(results: Iterable[TrialResult]) -> str:
    output = io.StringIO()
    writer = csv.writer(output, lineterminator="\n")
    writer.writerow(RESULT_COLUMNS)
    for r in results:
        writer.writerow(
            [
                _fmt(r.sweep_value),
                r.architecture.value,
                r.trial_index,
                _fmt(r.se_bits),
                _fmt(r.P_s_w),
                _fmt(r.interference_w),
                r.outer_iters,
                "true" if r.converged else "false",
            ]
        )
    return output.getvalue()


def summary_csv(rows: Iterable[SummaryRow]) -> str:
    output = io.StringIO()
    writer = csv.writer(output, lineterminator="\n")
    writer.writerow(SUMMARY_COLUMNS)
    for s in rows:
        writer.writerow(
            [
                _fmt(s.sweep_value),
                s.architecture.value,
                s.trials,
                _fmt(s.mean_se_bits),
                _fmt(s.stddev_se_bits),
                _fmt(s.stderr_se_bits),
            ]
        )
    return output.getvalue()


def write_csv(results: Iterable[TrialResult], path: str | Path) -> None:
    _write_text(path, results_csv(results))


def write_summary_csv(rows: Iterable[SummaryRow], path: str | Path) -> None:
    _write_text(path, summary_csv(rows))


def series_output_paths(cfg: ExperimentConfig, out: str | Path) -> dict[float, Path]:
    """One file per series; ``<stem>_<label><suffix>`` once there is more than one."""
    out = Path(out)
    values = series_values(cfg)
    if len(values) == 1:
        return {values[0]: out}
    return {v: out.with_name(f"{out.stem}_{series_label(cfg, v)}{out.suffix}") for v in values}


# ─── Single-trial dump ────────────────────────────────────────────────────


def _report_dict(report: SolverReport) -> dict:
    return {
        "se_trace": report.se_trace,
        "P_s_star": report.P_s_star,
        "P_s_star_dbm": watt_to_dbm(report.P_s_star) if report.P_s_star > 0 else None,
        "interference_final": report.interference_final,
        "outer_iters": report.outer_iters,
        "converged": report.converged,
        "unitarity_error": unitarity_error(report.Phi_star.Phi),
        "power_trace": [asdict(p) for p in report.power_trace],
        "phase_traces": [
            {
                "converged": t.converged,
                "final_delta": t.final_delta,
                "mu_final": t.mu_final,
                "objective": t.objective_values,
            }
            for t in report.phase_traces
        ],
    }


def single_trial_report(cfg: ExperimentConfig, trial_index: int = 0) -> dict:
    """Full solver traces of one trial at the first series and first sweep value."""
    point = expand_scenario(cfg, series_values(cfg)[0], cfg.sweep_values[0])
    options = cfg.solver_options()
    chan = draw_channel(point.scenario, cfg.master_seed, trial_index)
    return {
        "sweep": cfg.sweep.value,
        "series_value": point.series_value,
        "sweep_value": point.sweep_value,
        "trial": trial_index,
        "M": chan.M,
        "budget": point.budget.model_dump(),
        "architectures": {
            arch.value: _report_dict(solve_for_architecture(arch, chan, point.budget, options))
            for arch in cfg.fixed.architectures
        },
    }


def write_json(data: dict, path: str | Path) -> None:
    _write_text(path, json.dumps(data, indent=2) + "\n")
