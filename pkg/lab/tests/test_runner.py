import json
import tempfile
from pathlib import Path

from django.test import SimpleTestCase, override_settings

from lab.runner import (
    BIAS_CSV_HEADER,
    ERROR,
    ORACLE_CSV_HEADER,
    PRECONDITION,
    WARNING,
    canonical_config,
    check,
    config_hash,
    resolve_seed,
    run,
    validate,
)

NORMAL = {"family": "normal", "mu": 0, "sigma2": 1}


def clt_config(**overrides):
    config = {
        "schema": 1,
        "experiment": "clt",
        "master_seed": 42,
        "distribution": NORMAL,
        "plan": {"schedule": {"kind": "fixed", "k": 2}},
        "params": {"n_grid": [50], "reps": 1000},
    }
    config.update(overrides)
    return config


def bias_config(**params):
    return {
        "experiment": "bias",
        "plan": {"schedule": {"kind": "fixed", "k": 2}},
        "params": {"n": 10, "mu": 0, "sigma2": 1, **params},
    }


class ValidateTests(SimpleTestCase):
    def levels(self, config):
        return [(d.level, d.field) for d in validate(config)]

    def test_clean_config(self):
        self.assertEqual(validate(clt_config()), [])

    def test_missing_seed(self):
        config = clt_config()
        del config["master_seed"]
        self.assertIn((ERROR, "master_seed"), self.levels(config))

    def test_nested_errors_are_dotted(self):
        config = clt_config(distribution={"family": "normal", "mu": 0})
        self.assertIn((ERROR, "distribution.sigma2"), self.levels(config))

    def test_infinite_variance_is_a_precondition(self):
        config = clt_config(distribution={"family": "pareto", "alpha": 1.5})
        diagnostics = validate(config)
        self.assertEqual([d.level for d in diagnostics], [PRECONDITION])
        self.assertIn("variance required", diagnostics[0].message)

    def test_infinite_mean_is_a_precondition(self):
        config = {
            "experiment": "wlln",
            "master_seed": 1,
            "distribution": {"family": "pareto", "alpha": 0.8},
            "plan": {"schedule": {"kind": "zero"}},
            "params": {"eps": 0.1},
        }
        self.assertEqual(self.levels(config), [(PRECONDITION, "distribution")])

    def test_infinite_variance_array_row_is_a_precondition(self):
        config = {
            "experiment": "conditions",
            "array": {"kind": "cycle", "laws": [NORMAL, {"family": "pareto", "alpha": 1.5}]},
        }
        diagnostics = validate(config)
        self.assertEqual([(d.level, d.field) for d in diagnostics], [(PRECONDITION, "array")])
        self.assertIn("variance required", diagnostics[0].message)

    def test_clt_drift_warning(self):
        config = clt_config(
            distribution={"family": "normal", "mu": 2, "sigma2": 1},
            plan={"schedule": {"kind": "power", "r": 0.75}},
        )
        diagnostics = validate(config)
        self.assertEqual([d.level for d in diagnostics], [WARNING])
        self.assertIn("k/sqrt(n)", diagnostics[0].message)
        self.assertIn("nonzero mean", diagnostics[0].message)

    def test_power_law_is_fine_with_zero_mean(self):
        config = clt_config(plan={"schedule": {"kind": "power", "r": 0.75}})
        self.assertEqual(validate(config), [])

    def test_linear_fraction_warns_for_the_lln(self):
        config = {
            "experiment": "wlln",
            "master_seed": 1,
            "distribution": NORMAL,
            "plan": {"schedule": {"kind": "linear", "c": 0.5}},
            "params": {"eps": 0.1},
        }
        diagnostics = validate(config)
        self.assertEqual([d.level for d in diagnostics], [WARNING])
        self.assertIn("k/n", diagnostics[0].message)

    def test_defaults_are_merged(self):
        config = {
            "experiment": "wlln",
            "master_seed": 1,
            "distribution": NORMAL,
            "plan": {"schedule": {"kind": "zero"}},
            "params": {"eps": 0.1},
        }
        attrs, diagnostics = check(config)
        self.assertEqual(diagnostics, [])
        self.assertEqual(attrs["params"]["n_grid"], [100, 1000, 10000, 100000])
        self.assertEqual(attrs["params"]["reps"], 10000)


class SeedTests(SimpleTestCase):
    @override_settings(DSLAB_SEED=7)
    def test_precedence(self):
        self.assertEqual(resolve_seed({})["master_seed"], 7)
        self.assertEqual(resolve_seed({"master_seed": 3})["master_seed"], 3)
        self.assertEqual(resolve_seed({"master_seed": 3}, 5)["master_seed"], 5)

    @override_settings(DSLAB_SEED=None)
    def test_no_default(self):
        self.assertNotIn("master_seed", resolve_seed({}))


class HashTests(SimpleTestCase):
    def test_hash_ignores_key_order(self):
        attrs, _ = check(bias_config())
        canonical = canonical_config(attrs)
        reordered = json.loads(json.dumps(canonical, sort_keys=False))
        reversed_keys = dict(reversed(list(reordered.items())))
        self.assertEqual(config_hash(canonical), config_hash(reversed_keys))
        self.assertEqual(len(config_hash(canonical)), 12)

    def test_hash_tracks_the_config(self):
        first = config_hash(canonical_config(check(bias_config())[0]))
        second = config_hash(canonical_config(check(bias_config(n=11))[0]))
        self.assertNotEqual(first, second)


class RunTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.out = Path(self.tmp.name)

    def test_exit_codes(self):
        config = clt_config()
        del config["master_seed"]
        self.assertEqual(run(config, out_dir=self.out).exit_status, 2)
        pareto = clt_config(distribution={"family": "pareto", "alpha": 1.5})
        self.assertEqual(run(pareto, out_dir=self.out).exit_status, 3)
        log_scaling = {
            "experiment": "log_scaling",
            "master_seed": 1,
            "distribution": {"family": "normal", "mu": 1, "sigma2": 1},
            "plan": {"schedule": {"kind": "zero"}},
            "params": {"exponent": 0.5},
        }
        self.assertEqual(run(log_scaling, out_dir=self.out).exit_status, 3)
        self.assertEqual(list(self.out.iterdir()), [])

    def test_runtime_errors_map_to_exit_codes(self):
        config = {
            "experiment": "oracle",
            "law": {"atoms": [[0, 0.5], [1, 0.5]]},
            "plan": {"schedule": {"kind": "fixed", "k": 1}, "policy": "extremal_abs"},
            "params": {"n": 4},
        }
        result = run(config, out_dir=self.out)
        self.assertEqual(result.exit_status, 2)
        self.assertIn("index-blind", result.diagnostics[-1].message)

    def test_infinite_variance_array_exits_with_precondition(self):
        config = {
            "experiment": "conditions",
            "array": {"kind": "scaled", "base": {"family": "pareto", "alpha": 1.5}},
        }
        self.assertEqual(run(config, out_dir=self.out).exit_status, 3)
        self.assertEqual(list(self.out.iterdir()), [])

    def test_bias_artifacts(self):
        result = run(bias_config(), out_dir=self.out)
        self.assertEqual(result.exit_status, 0)
        self.assertEqual(result.csv_path.name, f"bias-{result.config_hash}.csv")
        lines = result.csv_path.read_text().splitlines()
        self.assertEqual(lines[0], ",".join(BIAS_CSV_HEADER))
        self.assertEqual(lines[1], "xbar,0.0,,")
        document = json.loads(result.json_path.read_text())
        self.assertEqual(document["config_hash"], result.config_hash)
        expectations = document["results"]["expectations"]
        self.assertEqual(expectations["s3_class"], result.results["expectations"]["s3_class"])
        self.assertAlmostEqual(expectations["e_s3t"], 0.704)

    def test_oracle_artifacts(self):
        config = {
            "experiment": "oracle",
            "distribution": {"family": "bernoulli", "p": 0.5},
            "plan": {"schedule": {"kind": "fixed", "k": 1}},
            "params": {"n": 4, "eps": 0.25},
        }
        result = run(config, out_dir=self.out)
        self.assertEqual(result.exit_status, 0)
        with open(result.csv_path) as f:
            header, *rows = [line.rstrip("\n").split(",") for line in f]
        self.assertEqual(header, ORACLE_CSV_HEADER)
        self.assertEqual([row[0] for row in rows], ["xbar", "s2", "xtilde", "s1t", "s2t", "s3t"])
        for row in rows:
            self.assertLessEqual(float(row[3]), 1e-12)
        self.assertIn("tail_prob", result.results)

    def test_reruns_are_byte_identical(self):
        config = {
            "experiment": "wlln",
            "master_seed": 99,
            "distribution": {"family": "exponential", "lam": 1},
            "plan": {"schedule": {"kind": "power", "r": 0.5}},
            "params": {"eps": 0.2, "n_grid": [10, 40], "reps": 100},
        }
        first = run(config, out_dir=self.out / "a")
        second = run(config, out_dir=self.out / "b")
        self.assertEqual(first.csv_path.name, second.csv_path.name)
        self.assertEqual(first.csv_path.read_bytes(), second.csv_path.read_bytes())
        self.assertEqual(first.json_path.read_bytes(), second.json_path.read_bytes())

    def test_negative_control_is_noted(self):
        config = {
            "experiment": "wlln",
            "master_seed": 5,
            "distribution": NORMAL,
            "plan": {"schedule": {"kind": "linear", "c": 0.5}},
            "params": {"eps": 0.5, "n_grid": [20], "reps": 100},
        }
        result = run(config, out_dir=self.out)
        self.assertEqual(result.exit_status, 0)
        document = json.loads(result.json_path.read_text())
        self.assertIn("negative-control run", document["notes"])
        self.assertEqual(document["diagnostics"][0]["level"], WARNING)

    def test_conditions_table(self):
        config = {
            "experiment": "conditions",
            "distribution": {"family": "uniform", "a": -1, "b": 1},
        }
        result = run(config, out_dir=self.out)
        self.assertEqual(result.exit_status, 0)
        header = result.csv_path.read_text().splitlines()[0]
        self.assertEqual(
            header,
            "n,lindeberg,lyapunov,feller_max,rate_sigma,rate_mu,b_n2,"
            "lindeberg@0.01,lindeberg@0.1,lindeberg@0.5",
        )
        self.assertTrue(result.results["rate_sigma"]["bounded"])

    def test_conditions_eps_grid(self):
        config = {
            "experiment": "conditions",
            "distribution": NORMAL,
            "params": {"n_grid": [100], "eps_grid": [0.01, 0.5]},
        }
        result = run(config, out_dir=self.out)
        self.assertEqual(result.exit_status, 0)
        header, row = [line.split(",") for line in result.csv_path.read_text().splitlines()]
        self.assertEqual(header[-2:], ["lindeberg@0.01", "lindeberg@0.5"])
        self.assertGreater(float(row[-2]), float(row[-1]))
        bad = dict(config, params={"eps_grid": [0.1, 0.0]})
        self.assertIn((ERROR, "params.eps_grid"), [(d.level, d.field) for d in validate(bad)])

    def test_clt_interval_probability(self):
        config = clt_config(plan={"schedule": {"kind": "zero"}})
        config["params"] = {"n_grid": [20], "reps": 1000, "a": -1.0, "b": 1.0}
        result = run(config, out_dir=self.out)
        self.assertEqual(result.exit_status, 0)
        (interval,) = result.results["interval"]
        self.assertAlmostEqual(interval["limit"], 0.682689492, places=6)
        self.assertLess(abs(interval["probability"] - interval["limit"]), 4 * interval["std_error"])
