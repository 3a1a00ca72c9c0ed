"""Config-driven runs: validate, run one experiment, write CSV and JSON artifacts.

Artifacts are named ``<experiment>-<hash>`` where the hash covers the
validated config (defaults merged) and never the output directory or the
worker count, so the same config and seed reproduce the same bytes.
"""
import copy
import csv
import hashlib
import json
import logging
from collections import namedtuple
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from django.conf import settings
from rest_framework.exceptions import APIException

from dslab import __version__
from lab.conditions import FINITE_GRID_LABEL, bounded_on_grid, condition_table, csv_header
from lab.deletion import NegligibilityClass, clt_condition_holds, negligibility_class
from lab.dist_catalog import DistributionSpec, IIDArray
from lab.estimators import ESTIMATOR_FIELDS, expected_by_estimator, expected_values
from lab.exact_oracle import DiscreteLaw, enumerate_expectations, exact_tail_prob
from lab.exceptions import exit_status
from lab.mc_lab import (
    CURVE_CSV_HEADER,
    SLLN_NOTE,
    bias_experiment,
    bounded_functional,
    clt_curve,
    interval_probability,
    log_scaling_experiment,
    slln_proxy,
    wlln_experiment,
)
from lab.serializers import SCHEMA_VERSION, ExperimentConfigSerializer

logger = logging.getLogger(__name__)

ERROR = "error"
PRECONDITION = "precondition"
WARNING = "warning"

CLT_CSV_HEADER = ["n", "k", "ks", "stat_mean", "stat_var", "drift"]
BIAS_CSV_HEADER = ["estimator", "expected", "mc_mean", "mc_std_error"]
ORACLE_CSV_HEADER = ["estimator", "exact", "closed_form", "abs_diff"]

NEGATIVE_CONTROL_NOTE = "negative-control run"

Diagnostic = namedtuple("Diagnostic", ["level", "field", "message"])

Outcome = namedtuple("Outcome", ["header", "rows", "results", "notes"])


@dataclass(frozen=True)
class RunResult:
    exit_status: int
    diagnostics: tuple = ()
    csv_path: Path = None
    json_path: Path = None
    config_hash: str = None
    results: dict = None


def load_config(path):
    with open(path) as f:
        return json.load(f)


def resolve_seed(config, seed=None):
    """``--seed`` wins over the config, which wins over DSLAB_SEED."""
    config = dict(config)
    if seed is not None:
        config["master_seed"] = seed
    elif config.get("master_seed") is None and settings.DSLAB_SEED is not None:
        config["master_seed"] = settings.DSLAB_SEED
    return config


def with_defaults(config):
    config = copy.deepcopy(config)
    config.setdefault("schema", SCHEMA_VERSION)
    params = config.setdefault("params", {})
    if not isinstance(params, dict):
        return config
    defaults = {
        "wlln": {"n_grid": settings.DSLAB_N_GRID, "reps": settings.DSLAB_TAIL_REPS},
        "slln": settings.DSLAB_SLLN,
        "clt": {"n_grid": settings.DSLAB_N_GRID, "reps": settings.DSLAB_KS_REPS},
        "log_scaling": {
            "n_grid": settings.DSLAB_N_GRID,
            "paths": settings.DSLAB_LOG_SCALING_PATHS,
        },
        "conditions": {
            "n_grid": settings.DSLAB_N_GRID,
            "eps": 0.1,
            "eps_grid": settings.DSLAB_EPS_GRID,
            "delta": 1.0,
        },
    }.get(config.get("experiment"), {})
    for key, value in defaults.items():
        params.setdefault(key, copy.deepcopy(value))
    return config


def _flatten(errors, prefix=""):
    if isinstance(errors, dict):
        for key, value in errors.items():
            name = key if key != "non_field_errors" else ""
            yield from _flatten(value, f"{prefix}.{name}".strip(".") if name else prefix)
    elif isinstance(errors, list):
        for value in errors:
            yield from _flatten(value, prefix)
    else:
        yield Diagnostic(ERROR, prefix, str(errors))


def _law_of(source):
    if isinstance(source, DistributionSpec):
        return source
    if isinstance(source, IIDArray):
        return source.law
    return None


def _has_nonzero_mean(source):
    law = _law_of(source)
    if law is not None:
        return law.mean != 0
    return any(mean != 0 for mean in source.means(64))


def _precondition(message):
    return Diagnostic(PRECONDITION, "distribution", message)


def rule_diagnostics(attrs):
    """Cross-field rules that a schema cannot express."""
    experiment = attrs["experiment"]
    plan = attrs.get("plan")
    source = attrs.get("source")
    law = _law_of(source)
    found = []
    if law is not None:
        if not law.has_finite_mean and experiment in ("wlln", "slln", "log_scaling", "bias"):
            found.append(_precondition(f"finite mean required: {law} has no finite mean"))
        needs_variance = experiment in ("clt", "log_scaling") or (
            experiment == "bias" and attrs["params"].get("reps") is not None
        )
        if needs_variance and not law.has_finite_variance:
            found.append(_precondition(f"variance required: {law} has infinite variance"))
        if experiment == "log_scaling" and law.has_finite_mean and law.mean != 0:
            found.append(_precondition(f"zero-mean law required, {law} has mean {law.mean}"))
    if plan is None:
        return found
    schedule = plan.schedule
    violating = negligibility_class(schedule) is NegligibilityClass.VIOLATING
    if experiment in ("wlln", "slln") and violating:
        found.append(
            Diagnostic(
                WARNING,
                "plan.schedule",
                f"{schedule} violates the k/n -> 0 condition; {NEGATIVE_CONTROL_NOTE}",
            )
        )
    if experiment == "clt" and source is not None:
        nonzero = _has_nonzero_mean(source)
        if not clt_condition_holds(schedule, 1.0 if nonzero else 0.0):
            mean_note = " with a nonzero mean" if nonzero else ""
            found.append(
                Diagnostic(
                    WARNING,
                    "plan.schedule",
                    f"{schedule} violates the k/sqrt(n) -> 0 condition{mean_note}; "
                    f"{NEGATIVE_CONTROL_NOTE}",
                )
            )
    return found


def check(config):
    """Validated attrs (or None) and every diagnostic for a raw config."""
    serializer = ExperimentConfigSerializer(data=with_defaults(config))
    try:
        valid = serializer.is_valid()
    except APIException as exc:
        field = next((name for name in ("array", "distribution", "law") if name in config), "")
        level = PRECONDITION if exit_status(exc) == 3 else ERROR
        return None, [Diagnostic(level, field, str(exc.detail))]
    if not valid:
        return None, list(_flatten(serializer.errors))
    attrs = serializer.validated_data
    return attrs, rule_diagnostics(attrs)


def validate(config):
    return check(config)[1]


def canonical_config(attrs):
    data = {
        "schema": attrs["schema"],
        "experiment": attrs["experiment"],
        "master_seed": attrs.get("master_seed", 0),
        "params": dict(attrs["params"]),
    }
    for name in ("distribution", "array", "plan", "law"):
        if name in attrs:
            data[name] = attrs[name].to_json()
    return data


def config_hash(canonical):
    text = json.dumps(canonical, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]


def _run_wlln(attrs, seed, workers, chunk_size):
    params = attrs["params"]
    source, plan = attrs["source"], attrs["plan"]
    if params.get("diagnostic") == "bounded_functional":
        curve = bounded_functional(
            source, plan, params["n_grid"], params["reps"], seed, workers, chunk_size
        )
    else:
        curve = wlln_experiment(
            source, plan, params["eps"], params["n_grid"], params["reps"], seed, workers, chunk_size
        )
    return Outcome(CURVE_CSV_HEADER, curve.rows(), {"curve": curve.to_json()}, [])


def _run_slln(attrs, seed, workers, chunk_size):
    params = attrs["params"]
    curve = slln_proxy(
        attrs["distribution"],
        attrs["plan"],
        params["eps"],
        params["n_start"],
        params["n_max"],
        params["paths"],
        seed,
        n_grid=params.get("n_grid"),
        workers=workers,
        chunk_size=chunk_size,
    )
    return Outcome(CURVE_CSV_HEADER, curve.rows(), {"curve": curve.to_json()}, [SLLN_NOTE])


def _run_clt(attrs, seed, workers, chunk_size):
    params = attrs["params"]
    results, ks_curve, mean_curve = clt_curve(
        attrs["source"], attrs["plan"], params["n_grid"], params["reps"], seed, workers, chunk_size
    )
    rows = [[r.n, r.k, r.ks, r.stat_mean, r.stat_var, r.predicted_drift] for r in results]
    summary = {
        "points": [r.to_json() for r in results],
        "ks_curve": ks_curve.to_json(),
        "mean_curve": mean_curve.to_json(),
    }
    if params.get("a") is not None and params.get("b") is not None:
        summary["interval"] = [
            _interval_row(attrs, params, n, seed, workers, chunk_size) for n in params["n_grid"]
        ]
    return Outcome(CLT_CSV_HEADER, rows, summary, [])


def _interval_row(attrs, params, n, seed, workers, chunk_size):
    a, b = params["a"], params["b"]
    p, se, limit = interval_probability(
        attrs["source"], attrs["plan"], n, a, b, params["reps"], seed, workers, chunk_size
    )
    return {"n": n, "a": a, "b": b, "probability": p, "std_error": se, "limit": limit}


def _run_log_scaling(attrs, seed, workers, chunk_size):
    params = attrs["params"]
    curve = log_scaling_experiment(
        attrs["distribution"],
        attrs["plan"],
        params["exponent"],
        params["n_grid"],
        params["paths"],
        seed,
        workers,
        chunk_size,
    )
    return Outcome(CURVE_CSV_HEADER, curve.rows(), {"curve": curve.to_json()}, [])


def _run_bias(attrs, seed, workers, chunk_size):
    params = attrs["params"]
    plan, n = attrs["plan"], params["n"]
    if params.get("reps") is not None:
        report, checks = bias_experiment(
            attrs["distribution"], plan, n, params["reps"], seed, workers, chunk_size
        )
        rows = [[c.estimator, c.expected, c.mc_mean, c.mc_std_error] for c in checks]
        results = {"expectations": report.to_json(), "checks": [asdict(c) for c in checks]}
        return Outcome(BIAS_CSV_HEADER, rows, results, [])
    if params.get("mu") is not None and params.get("sigma2") is not None:
        mu, sigma2 = params["mu"], params["sigma2"]
    else:
        mu, sigma2 = attrs["distribution"].mean, attrs["distribution"].variance
    report = expected_values(n, plan.k_of_n(n), mu, sigma2)
    expected = expected_by_estimator(report)
    rows = [[name, expected[name], None, None] for name in ESTIMATOR_FIELDS]
    return Outcome(BIAS_CSV_HEADER, rows, {"expectations": report.to_json()}, [])


def _run_oracle(attrs, seed, workers, chunk_size):
    params = attrs["params"]
    plan, n = attrs["plan"], params["n"]
    law = attrs.get("law") or DiscreteLaw.from_distribution(attrs["distribution"])
    exact = enumerate_expectations(law, n, plan, workers=workers)
    closed = expected_by_estimator(expected_values(n, exact.k, law.mean, law.variance))
    rows = []
    for name in ESTIMATOR_FIELDS:
        value = getattr(exact, name)
        rows.append([name, value, closed[name], abs(value - closed[name])])
    results = {"exact": exact.to_json(), "closed_form": closed}
    if params.get("eps") is not None:
        results["tail_prob"] = exact_tail_prob(law, n, plan, params["eps"], workers=workers)
    return Outcome(ORACLE_CSV_HEADER, rows, results, [])


def _run_conditions(attrs, seed, workers, chunk_size):
    params = attrs["params"]
    eps_grid = params.get("eps_grid") or []
    reports = condition_table(
        attrs["source"],
        params["n_grid"],
        eps=params["eps"],
        delta=params["delta"],
        eps_grid=eps_grid,
    )
    results = {
        "table": [report.to_json() for report in reports],
        "rate_sigma": bounded_on_grid([r.rate_sigma for r in reports])._asdict(),
        "rate_mu": bounded_on_grid([r.rate_mu for r in reports])._asdict(),
    }
    rows = [report.as_row() for report in reports]
    notes = [f"rate verdicts are {FINITE_GRID_LABEL}"]
    return Outcome(csv_header(eps_grid), rows, results, notes)


RUNNERS = {
    "wlln": _run_wlln,
    "slln": _run_slln,
    "clt": _run_clt,
    "log_scaling": _run_log_scaling,
    "bias": _run_bias,
    "oracle": _run_oracle,
    "conditions": _run_conditions,
}


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_artifacts(out_dir, stem, outcome, document):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{stem}.csv"
    json_path = out_dir / f"{stem}.json"
    with open(csv_path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(outcome.header)
        writer.writerows([_cell(value) for value in row] for row in outcome.rows)
    with open(json_path, "w") as f:
        json.dump(document, f, sort_keys=True, indent=2)
        f.write("\n")
    return csv_path, json_path


def _log_diagnostic(diagnostic):
    level = logging.WARNING if diagnostic.level == WARNING else logging.ERROR
    logger.log(level, f"{diagnostic.level} [{diagnostic.field or 'config'}] {diagnostic.message}")


def run(config, workers=None, out_dir=None):
    """Validate ``config``, run its experiment and write the artifacts.

    Returns a RunResult whose ``exit_status`` is 0 on success, 2 for a
    validation error and 3 for a failed numeric precondition.
    """
    workers = workers or settings.DSLAB_WORKERS
    out_dir = Path(out_dir or settings.DSLAB_OUTPUT_DIR)
    attrs, diagnostics = check(config)
    for diagnostic in diagnostics:
        _log_diagnostic(diagnostic)
    levels = {diagnostic.level for diagnostic in diagnostics}
    if ERROR in levels:
        return RunResult(2, tuple(diagnostics))
    if PRECONDITION in levels:
        return RunResult(3, tuple(diagnostics))

    canonical = canonical_config(attrs)
    digest = config_hash(canonical)
    experiment = attrs["experiment"]
    seed = canonical["master_seed"]
    logger.info(f"Running {experiment} {digest} with seed {seed} on {workers} worker(s)")
    try:
        outcome = RUNNERS[experiment](attrs, seed, workers, settings.DSLAB_CHUNK_SIZE)
    except APIException as exc:
        status = exit_status(exc)
        failure = Diagnostic(PRECONDITION if status == 3 else ERROR, "", str(exc.detail))
        _log_diagnostic(failure)
        return RunResult(status, tuple(diagnostics) + (failure,), config_hash=digest)

    notes = list(outcome.notes)
    if any(NEGATIVE_CONTROL_NOTE in diagnostic.message for diagnostic in diagnostics):
        notes.append(NEGATIVE_CONTROL_NOTE)
    document = {
        "config": canonical,
        "config_hash": digest,
        "master_seed": seed,
        "version": __version__,
        "results": outcome.results,
        "diagnostics": [diagnostic._asdict() for diagnostic in diagnostics],
        "notes": notes,
    }
    csv_path, json_path = write_artifacts(out_dir, f"{experiment}-{digest}", outcome, document)
    logger.info(f"Wrote {csv_path} and {json_path}")
    return RunResult(0, tuple(diagnostics), csv_path, json_path, digest, outcome.results)
