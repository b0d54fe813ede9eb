"""
``python manage.py simulate <power-sweep|element-sweep|ith-sweep|single>``

Runs a Monte Carlo campaign from a JSON config (bundled one by default) and
writes per-trial CSV, optionally a summary CSV. ``single`` dumps the full
solver traces of one trial as JSON.
"""

import json
import logging

from django.core.management.base import BaseCommand, CommandError

from simulation.exceptions import SimulationError
from simulation.schemas import Architecture, GainMode, PowerRule, SweepKind
from simulation.services import (
    aggregate,
    apply_overrides,
    bundled_config_path,
    load_config,
    run_sweep,
    series_output_paths,
    single_trial_report,
    write_csv,
    write_json,
    write_summary_csv,
)

logger = logging.getLogger(__name__)

ARCH_CHOICES = {
    "bd": [Architecture.BD],
    "d": [Architecture.D],
    "both": [Architecture.BD, Architecture.D],
}


class Command(BaseCommand):
    help = "Run BD-RIS / D-RIS underlay link simulations."

    def add_arguments(self, parser):
        subparsers = parser.add_subparsers(dest="subcommand", required=True)
        for kind in SweepKind:
            sub = subparsers.add_parser(kind.value, help=f"Monte Carlo {kind.value}")
            self._common_arguments(sub)
            sub.add_argument("--out", help="per-trial CSV path (default: <subcommand>.csv)")
            sub.add_argument("--summary", help="also write per-point mean/stderr CSV here")
            sub.add_argument("--workers", type=int, help="process-pool size (default: SIMULATION_WORKERS)")
            sub.add_argument("--backend", choices=["local", "celery"], help="default: SIMULATION_BACKEND")

        single = subparsers.add_parser("single", help="solve one trial and dump every trace as JSON")
        self._common_arguments(single)
        single.add_argument("--trial", type=int, default=0)
        single.add_argument("--out", help="JSON path (default: stdout)")

    @staticmethod
    def _common_arguments(sub):
        sub.add_argument("--config", help="JSON experiment file")
        sub.add_argument("--seed", type=int)
        sub.add_argument("--trials", type=int)
        sub.add_argument("--arch", choices=sorted(ARCH_CHOICES))
        sub.add_argument("--gain-mode", choices=[m.value for m in GainMode])
        sub.add_argument("--power-rule", choices=[r.value for r in PowerRule])

    def handle(self, *args, **options):
        try:
            cfg = self._load(options)
            if options["subcommand"] == "single":
                self._single(cfg, options)
            else:
                self._sweep(cfg, options)
        except SimulationError as exc:
            raise CommandError(str(exc)) from exc

    def _load(self, options):
        subcommand = options["subcommand"]
        path = options.get("config")
        if not path:
            path = bundled_config_path(SweepKind.POWER if subcommand == "single" else SweepKind(subcommand))
        cfg = load_config(path)
        if subcommand != "single" and cfg.sweep.value != subcommand:
            raise CommandError(f"{path} describes a {cfg.sweep.value}, not a {subcommand}")
        return apply_overrides(
            cfg,
            master_seed=options.get("seed"),
            trials=options.get("trials"),
            architectures=ARCH_CHOICES[options["arch"]] if options.get("arch") else None,
            gmode=options.get("gain_mode"),
            prule=options.get("power_rule"),
        )

    def _sweep(self, cfg, options):
        results = run_sweep(cfg, workers=options.get("workers"), backend=options.get("backend"))
        out = options.get("out") or f"{cfg.sweep.value}.csv"
        for series, path in series_output_paths(cfg, out).items():
            write_csv([r for r in results if r.series_value == series], path)
            logger.info("Wrote %s", path)
            self.stdout.write(str(path))
        if options.get("summary"):
            rows = aggregate(results)
            for series, path in series_output_paths(cfg, options["summary"]).items():
                write_summary_csv([s for s in rows if s.series_value == series], path)
                logger.info("Wrote summary %s", path)
                self.stdout.write(str(path))

    def _single(self, cfg, options):
        if options["trial"] < 0:
            raise CommandError("--trial must be >= 0")
        report = single_trial_report(cfg, options["trial"])
        if options.get("out"):
            write_json(report, options["out"])
            self.stdout.write(options["out"])
        else:
            self.stdout.write(json.dumps(report, indent=2))
