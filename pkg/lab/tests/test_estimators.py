from fractions import Fraction

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings
from hypothesis import strategies as st

from lab.deletion import DeletionPlan, FixedK
from lab.estimators import (
    S3Ordering,
    SampleFrame,
    deleted_sum,
    estimator_batch,
    estimator_report,
    expansion_identities,
    expected_values,
    partition_residual,
    k1_threshold,
    s3_ordering,
)
from lab.exceptions import InvalidParameter
from lab.streams import derive_stream


@st.composite
def frames(draw):
    values = draw(
        st.lists(
            st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False),
            min_size=1,
            max_size=40,
        )
    )
    mask = draw(st.lists(st.booleans(), min_size=len(values), max_size=len(values)))
    if all(mask):
        mask[0] = False
    return SampleFrame(values, mask)


class FrameTests(SimpleTestCase):
    def test_deleted_sum_examples(self):
        self.assertEqual(deleted_sum(SampleFrame.from_indices([1.0, 2.0, 3.0], [1])), 4.0)
        self.assertEqual(deleted_sum(SampleFrame.from_indices([1.0, 2.0, 3.0], [])), 6.0)
        frame = SampleFrame.from_indices([0.5] * 8, [0, 3, 5])
        self.assertEqual(deleted_sum(frame), 5 * 0.5)

    def test_frame_validation(self):
        with self.assertRaises(InvalidParameter):
            SampleFrame([1.0, 2.0], [True, True])
        with self.assertRaises(InvalidParameter):
            SampleFrame([1.0, 2.0], [True])
        with self.assertRaises(InvalidParameter):
            SampleFrame([], [])

    def test_frame_from_plan(self):
        frame = SampleFrame.from_plan([3.0, 1.0, 2.0], DeletionPlan(FixedK(1), "extremal_abs"))
        self.assertEqual(frame.k, 1)
        np.testing.assert_array_equal(frame.deleted, [3.0])


class EstimatorReportTests(SimpleTestCase):
    def test_constant_frame(self):
        report = estimator_report(SampleFrame.from_indices([1.0, 1.0, 1.0, 1.0], [0]))
        self.assertEqual(report.xbar, 1.0)
        self.assertEqual(report.xtilde, 0.75)
        self.assertEqual(report.s2, 0.0)
        self.assertEqual(report.s3t, 0.046875)

    def test_no_deletion_collapses_estimators(self):
        report = estimator_report(SampleFrame.from_indices([0.3, -1.2, 4.0, 2.2], []))
        self.assertEqual(report.xtilde, report.xbar)
        self.assertEqual(report.s1t, report.s2)
        self.assertEqual(report.s2t, report.s2)
        self.assertEqual(report.s3t, report.s2)

    def test_two_point_frame(self):
        frame = SampleFrame.from_indices([0.0, 1.0], [1])
        report = estimator_report(frame)
        self.assertEqual(report.xtilde, 0.0)
        self.assertEqual(report.s1t, 0.5)
        self.assertEqual(expansion_identities(frame).s1t, 0.0)

    def test_identities_on_random_frame(self):
        values = derive_stream(8, "frame").normal(size=100)
        frame = SampleFrame.from_indices(values, [3, 17, 40, 41, 99])
        for residual in expansion_identities(frame):
            self.assertLess(abs(residual), 1e-10)
        self.assertLess(abs(partition_residual(frame)), 1e-12)

    def test_identities_on_constant_frame(self):
        frame = SampleFrame.from_indices([2.5] * 10, [0, 1, 2])
        for residual in expansion_identities(frame):
            self.assertLessEqual(abs(residual), 1e-12)

    @settings(max_examples=200, deadline=None)
    @given(frames())
    def test_identities_hold(self, frame):
        scale = (1 + np.abs(frame.values).max()) ** 2
        for residual in expansion_identities(frame):
            self.assertLessEqual(abs(residual), 1e-9 * scale)
        self.assertLessEqual(abs(partition_residual(frame)), 1e-9 * scale)

    @settings(max_examples=100, deadline=None)
    @given(frames())
    def test_batch_matches_single_frame(self, frame):
        batch = estimator_batch(frame.values[None, :], frame.deleted_mask[None, :])[0]
        report = estimator_report(frame)
        scale = (1 + np.abs(frame.values).max()) ** 2
        for value, field in zip(batch, ("xbar", "s2", "xtilde", "s1t", "s2t", "s3t")):
            self.assertLessEqual(abs(value - getattr(report, field)), 1e-9 * scale)


class ExpectedValueTests(SimpleTestCase):
    def test_zero_mean_example(self):
        report = expected_values(10, 2, 0.0, 1.0)
        self.assertEqual(report.e_xtilde, 0.0)
        self.assertAlmostEqual(report.e_s1t, 0.92, places=12)
        self.assertAlmostEqual(report.e_s2t, 0.72, places=12)
        self.assertAlmostEqual(report.e_s3t, 0.704, places=12)
        self.assertAlmostEqual(report.linear_k_e_s3t, 0.702, places=12)
        self.assertAlmostEqual(report.e_s2, 0.9, places=12)
        self.assertIs(report.s3_class, S3Ordering.MU_ZERO_BELOW)
        self.assertIsNone(report.threshold)

    def test_bernoulli_example(self):
        report = expected_values(4, 1, 0.5, 0.25)
        self.assertAlmostEqual(report.e_xtilde, 0.375, places=12)
        self.assertAlmostEqual(report.e_s1t, 0.21875, places=12)
        self.assertAlmostEqual(report.e_s2t, 0.140625, places=12)
        self.assertAlmostEqual(report.e_s3t, 0.140625, places=12)
        self.assertAlmostEqual(report.e_s2, 0.1875, places=12)
        self.assertAlmostEqual(report.threshold, -11.0, places=12)
        self.assertIs(report.s3_class, S3Ordering.BELOW_OR_EQUAL)

    def test_small_variance_example(self):
        report = expected_values(5, 1, 1.0, 0.01)
        self.assertAlmostEqual(report.e_s3t, 0.03808, places=12)
        self.assertAlmostEqual(report.e_s2, 0.008, places=12)
        self.assertAlmostEqual(report.threshold, 4.76, places=12)
        self.assertIs(report.s3_class, S3Ordering.ABOVE)

    def test_forms_agree_for_single_deletion(self):
        for n in (2, 5, 30):
            report = expected_values(n, 1, 1.5, 4.0)
            self.assertAlmostEqual(report.e_s3t, report.linear_k_e_s3t, places=12)

    def test_invalid_arguments(self):
        with self.assertRaises(InvalidParameter):
            expected_values(1, 0, 0.0, 1.0)
        with self.assertRaises(InvalidParameter):
            expected_values(5, 5, 0.0, 1.0)
        with self.assertRaises(InvalidParameter):
            expected_values(5, 1, 0.0, -1.0)

    def test_ordering_over_grid(self):
        mismatches = []
        for n in range(2, 51):
            for k in range(1, n):
                for mu in (-2.0, 0.0, 1.5):
                    for sigma2 in (0.01, 1.0, 4.0):
                        report = expected_values(n, k, mu, sigma2)
                        self.assertGreater(report.e_s1t, report.e_s2)
                        self.assertLess(report.e_s2t, report.e_s2)
                        f_n, f_k = Fraction(n), Fraction(k)
                        f_mu, f_sigma2 = Fraction(mu), Fraction(sigma2)
                        exact_gap = (
                            (1 - 1 / f_n - f_k / f_n + f_k**2 / f_n**3) * f_sigma2
                            + (1 - f_k / f_n) * (f_k**2 / f_n**2) * f_mu**2
                            - (1 - 1 / f_n) * f_sigma2
                        )
                        above = exact_gap > 0
                        if (report.s3_class is S3Ordering.ABOVE) != above:
                            mismatches.append((n, k, mu, sigma2))
                        if mu == 0:
                            self.assertIs(report.s3_class, S3Ordering.MU_ZERO_BELOW)
        self.assertEqual(mismatches, [])

    def test_threshold_matches_rule_for_single_deletion(self):
        for n in range(2, 51):
            for mu in (-2.0, 1.5):
                for sigma2 in (0.01, 1.0, 4.0):
                    threshold = k1_threshold(n, mu, sigma2)
                    below = s3_ordering(n, 1, mu, sigma2) is S3Ordering.BELOW_OR_EQUAL
                    self.assertEqual(below, 1 >= threshold, (n, mu, sigma2))

