import math

from django.test import SimpleTestCase

from lab.conditions import (
    CSV_HEADER,
    FINITE_GRID_LABEL,
    bounded_on_grid,
    condition_table,
    csv_header,
    feller_and_rates,
    lindeberg_sum,
    lyapunov_sum,
)
from lab.dist_catalog import (
    Bernoulli,
    Exponential,
    IIDArray,
    Normal,
    Pareto,
    Rademacher,
    ScaledArray,
    Uniform,
)
from lab.exceptions import InvalidParameter


class LindebergTests(SimpleTestCase):
    def test_bounded_support_vanishes(self):
        self.assertEqual(lindeberg_sum(Rademacher(), 5, 0.5), 0.0)
        self.assertEqual(lindeberg_sum(IIDArray(Rademacher()), 10000, 0.1), 0.0)

    def test_normal_collapses_to_one_truncated_moment(self):
        self.assertAlmostEqual(lindeberg_sum(Normal(0.0, 1.0), 400, 0.1), 0.26146, delta=1e-4)

    def test_normal_decreases_with_n(self):
        self.assertLess(
            lindeberg_sum(Normal(0.0, 1.0), 40000, 0.1), lindeberg_sum(Normal(0.0, 1.0), 400, 0.1)
        )

    def test_eps_must_be_positive(self):
        with self.assertRaises(InvalidParameter):
            lindeberg_sum(Normal(0.0, 1.0), 10, 0.0)

    def test_non_increasing_in_eps(self):
        eps_values = (0.01, 0.05, 0.1, 0.2, 0.5, 1.0)
        for law in (Bernoulli(0.3), Normal(0.0, 1.0), Exponential(1.0), Pareto(4.0)):
            for n in (100, 1000):
                with self.subTest(law=str(law), n=n):
                    values = [lindeberg_sum(law, n, eps) for eps in eps_values]
                    for before, after in zip(values, values[1:]):
                        self.assertLessEqual(after, before + 1e-12)

    def test_bounded_by_lyapunov_over_eps(self):
        laws = (
            Bernoulli(0.3),
            Rademacher(),
            Uniform(0.0, 1.0),
            Normal(0.0, 1.0),
            Exponential(1.0),
            Pareto(4.0),
        )
        for law in laws:
            for n in (100, 1000, 10000):
                lyapunov = lyapunov_sum(law, n, 1.0)
                for eps in (0.01, 0.1, 0.5):
                    with self.subTest(law=str(law), n=n, eps=eps):
                        self.assertLessEqual(lindeberg_sum(law, n, eps), lyapunov / eps + 1e-12)


class LyapunovTests(SimpleTestCase):
    def test_rademacher_rate(self):
        self.assertAlmostEqual(lyapunov_sum(Rademacher(), 100, 1.0), 0.1, places=14)
        self.assertAlmostEqual(lyapunov_sum(Rademacher(), 10000, 1.0), 0.01, places=14)

    def test_single_row(self):
        self.assertAlmostEqual(lyapunov_sum(Bernoulli(0.5), 1, 1.0), 1.0, places=14)

    def test_delta_must_be_positive(self):
        with self.assertRaises(InvalidParameter):
            lyapunov_sum(Rademacher(), 10, 0.0)


class FellerTests(SimpleTestCase):
    def test_iid_rates(self):
        report = feller_and_rates(Normal(3.0, 1.0), 100)
        self.assertAlmostEqual(report.feller_max, 0.01)
        self.assertAlmostEqual(report.rate_sigma, 1.0)
        self.assertAlmostEqual(report.rate_mu, 3.0)
        self.assertEqual(report.b_n2, 100.0)

    def test_growing_variances(self):
        report = feller_and_rates(ScaledArray(Normal(0.0, 1.0), gamma=1.0), 4)
        self.assertAlmostEqual(report.feller_max, 0.4)

    def test_divergent_lyapunov_moment_is_reported_as_missing(self):
        report = feller_and_rates(Pareto(2.5), 50)
        self.assertIsNone(report.lyapunov)
        self.assertGreater(report.lindeberg, 0.0)

    def test_table_rows_follow_header(self):
        reports = condition_table(Rademacher(), [100, 10000], eps=0.1, delta=1.0)
        self.assertEqual([report.n for report in reports], [100, 10000])
        row = reports[0].as_row()
        self.assertEqual(len(row), len(CSV_HEADER))
        self.assertEqual(row[0], 100)
        self.assertEqual(
            CSV_HEADER,
            ["n", "lindeberg", "lyapunov", "feller_max", "rate_sigma", "rate_mu", "b_n2"],
        )

    def test_eps_grid_columns(self):
        reports = condition_table(Normal(0.0, 1.0), [100], eps_grid=(0.01, 0.1, 0.5))
        self.assertEqual(
            csv_header((0.01, 0.1, 0.5)),
            CSV_HEADER + ["lindeberg@0.01", "lindeberg@0.1", "lindeberg@0.5"],
        )
        row = reports[0].as_row()
        self.assertEqual(len(row), len(CSV_HEADER) + 3)
        self.assertEqual(row[-2], reports[0].lindeberg)
        self.assertEqual(reports[0].to_json()["lindeberg_grid"][0], [0.01, row[-3]])


class GridVerdictTests(SimpleTestCase):
    def test_flat_sequence_is_bounded(self):
        verdict = bounded_on_grid([1.0, 1.0, 1.0, 1.0])
        self.assertTrue(verdict.bounded)
        self.assertEqual(verdict.label, FINITE_GRID_LABEL)

    def test_growing_sequence_is_not_bounded(self):
        verdict = bounded_on_grid([math.sqrt(n) for n in (100, 1000, 10000, 100000)])
        self.assertFalse(verdict.bounded)
        self.assertAlmostEqual(verdict.sup, math.sqrt(100000))

    def test_empty_sequence(self):
        self.assertFalse(bounded_on_grid([None, None]).bounded)
