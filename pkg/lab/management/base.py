import json

from django.core.management.base import BaseCommand, CommandError

from lab.deletion import DeletionPolicy
from lab.runner import load_config, resolve_seed, run

# flag name -> argparse options; the dest is the params key
PARAM_ARGUMENTS = {
    "eps": {"type": float},
    "eps_grid": {"type": float, "nargs": "+"},
    "n_grid": {"type": int, "nargs": "+"},
    "reps": {"type": int},
    "n": {"type": int},
    "delta": {"type": float},
    "exponent": {"type": float},
    "paths": {"type": int},
    "n_start": {"type": int},
    "n_max": {"type": int},
    "mu": {"type": float},
    "sigma2": {"type": float},
    "diagnostic": {"choices": ["tail_prob", "bounded_functional"]},
}


class ExperimentCommand(BaseCommand):
    """One lab experiment: ``--config`` JSON plus flags, flags winning."""

    experiment = None
    overrides = ()
    plan_flags = False

    def add_arguments(self, parser):
        parser.add_argument("--config", help="Experiment config JSON file")
        parser.add_argument("--seed", type=int, help="Master seed, overrides the config")
        parser.add_argument("--workers", type=int, help="Worker processes; never changes results")
        parser.add_argument("--out", help="Output directory for the CSV and JSON artifacts")
        for name in self.overrides:
            parser.add_argument(f"--{name.replace('_', '-')}", dest=name, **PARAM_ARGUMENTS[name])
        if self.plan_flags:
            parser.add_argument("--k", type=int, help="Delete a fixed number of items")
            parser.add_argument(
                "--policy", choices=[policy.value for policy in DeletionPolicy], default=None
            )

    def read_config(self, path):
        try:
            return load_config(path)
        except (OSError, json.JSONDecodeError) as exc:
            raise CommandError(f"cannot read config {path}: {exc}", returncode=2)

    def build_config(self, options):
        config = self.read_config(options["config"]) if options["config"] else {}
        if not isinstance(config, dict):
            raise CommandError("a config file must hold a JSON object", returncode=2)
        if config.get("experiment", self.experiment) != self.experiment:
            raise CommandError(
                f"config is for {config['experiment']}, not {self.experiment}", returncode=2
            )
        config["experiment"] = self.experiment
        params = config.setdefault("params", {})
        for name in self.overrides:
            if options[name] is not None and isinstance(params, dict):
                params[name] = options[name]
        if self.plan_flags:
            plan = config.get("plan") or {}
            if options["k"] is not None:
                plan = {"schedule": {"kind": "fixed", "k": options["k"]}, "policy": "prefix"}
            if options["policy"] is not None and isinstance(plan, dict):
                plan["policy"] = options["policy"]
            if plan:
                config["plan"] = plan
        return resolve_seed(config, options["seed"])

    def handle(self, *args, **options):
        result = run(self.build_config(options), workers=options["workers"], out_dir=options["out"])
        for diagnostic in result.diagnostics:
            field = diagnostic.field or "config"
            self.stderr.write(f"{diagnostic.level}: {field}: {diagnostic.message}")
        if result.exit_status:
            raise CommandError(f"{self.experiment} run failed", returncode=result.exit_status)
        self.report(result)
        self.stdout.write(str(result.csv_path))
        self.stdout.write(str(result.json_path))

    def report(self, result):
        pass
