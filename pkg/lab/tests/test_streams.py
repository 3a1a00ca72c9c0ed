import numpy as np
from django.test import SimpleTestCase

from lab.exceptions import InvalidParameter
from lab.streams import SEED_MAX, check_seed, derive_stream, label_key, open_unit


class StreamTests(SimpleTestCase):
    def test_same_address_gives_same_draws(self):
        first = open_unit(derive_stream(42, "draws:100", 7), 1000)
        second = open_unit(derive_stream(42, "draws:100", 7), 1000)
        np.testing.assert_array_equal(first, second)

    def test_label_and_index_separate_streams(self):
        base = open_unit(derive_stream(42, "draws:100", 0), 10)
        other_label = open_unit(derive_stream(42, "draws:200", 0), 10)
        other_index = open_unit(derive_stream(42, "draws:100", 1), 10)
        self.assertFalse(np.array_equal(base, other_label))
        self.assertFalse(np.array_equal(base, other_index))

    def test_open_unit_excludes_endpoints(self):
        u = open_unit(derive_stream(0, "unit"), 100000)
        self.assertGreater(u.min(), 0.0)
        self.assertLess(u.max(), 1.0)

    def test_label_key_is_stable(self):
        self.assertEqual(label_key("select"), label_key("select"))
        self.assertNotEqual(label_key("select"), label_key("sample"))
        self.assertLess(label_key("select"), 2**64)

    def test_seed_range(self):
        self.assertEqual(check_seed(SEED_MAX), SEED_MAX)
        self.assertEqual(check_seed(np.uint64(5)), 5)
        for bad in (-1, 2**64, True, "1", 1.5):
            with self.assertRaises(InvalidParameter):
                check_seed(bad)
