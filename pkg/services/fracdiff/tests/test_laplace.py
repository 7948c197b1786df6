"""
Tests for the Talbot-contour Laplace inversion.
"""

import unittest

import numpy as np
import pytest

from fracdiff.errors import DomainError, InversionError
from fracdiff.laplace import InversionConfig, invert, invert_many, principal_power


class TestInvertMany(unittest.TestCase):
    def test_exponential(self):
        t = np.array([0.1, 1.0, 5.0])
        np.testing.assert_allclose(invert_many(lambda s: 1.0 / (s + 1.0), t), np.exp(-t), rtol=1e-8)

    def test_ramp(self):
        t = np.array([0.5, 2.0])
        np.testing.assert_allclose(invert_many(lambda s: s ** -2, t), t, rtol=1e-8)

    def test_branch_cut_transform(self):
        # s^{-1/2} <-> 1 / sqrt(pi t)
        t = np.array([0.25, 1.0, 4.0])
        values = invert_many(lambda s: 1.0 / principal_power(s, 0.5), t)
        np.testing.assert_allclose(values, 1.0 / np.sqrt(np.pi * t), rtol=1e-8)

    def test_scalar_time(self):
        values = invert_many(lambda s: 1.0 / (s + 2.0), 0.5)
        self.assertEqual(values.shape, (1,))
        self.assertAlmostEqual(values[0], np.exp(-1.0), places=9)

    def test_more_nodes_do_not_hurt(self):
        cfg = InversionConfig(node_count=48)
        value = invert_many(lambda s: 1.0 / (s * s + 1.0), 1.5, cfg)[0]
        self.assertAlmostEqual(value, np.sin(1.5), places=9)

    def test_non_finite_transform_raises(self):
        with self.assertRaises(InversionError) as ctx:
            invert_many(lambda s: np.full(s.shape, np.nan, dtype=complex), 1.0)
        self.assertEqual(ctx.exception.node, 0)

    def test_rejects_nonpositive_times(self):
        with self.assertRaises(DomainError):
            invert_many(lambda s: 1.0 / s, [1.0, 0.0])

    def test_rejects_shape_mismatch(self):
        with self.assertRaises(DomainError):
            invert_many(lambda s: np.ones(3, dtype=complex), [1.0, 2.0])


class TestInvert(unittest.TestCase):
    def test_scalar_only_transform(self):
        # complex() refuses arrays, so the evaluator is applied node by node
        value = invert(lambda s: complex(1.0 / (s + 1.0)), 2.0)
        self.assertAlmostEqual(value, np.exp(-2.0), places=9)

    def test_vectorised_transform(self):
        self.assertAlmostEqual(invert(lambda s: 1.0 / s, 3.0), 1.0, places=10)


class TestInversionConfig(unittest.TestCase):
    def test_validation(self):
        with self.assertRaises(DomainError):
            InversionConfig(node_count=4)
        with self.assertRaises(DomainError):
            InversionConfig(contour_scale=0.0)
        with self.assertRaises(DomainError):
            InversionConfig(radius_cap=-1.0)
        with self.assertRaises(DomainError):
            InversionConfig(working_precision_guard=1.0)


@pytest.mark.parametrize(
    "transform, exact",
    [
        (lambda s: 1.0 / (s + 1.0), lambda t: np.exp(-t)),
        (lambda s: s ** -2, lambda t: t),
        (lambda s: 1.0 / principal_power(s, 0.5), lambda t: 1.0 / np.sqrt(np.pi * t)),
    ],
    ids=["exponential", "ramp", "branch_cut"],
)
def test_error_shrinks_as_nodes_double(transform, exact):
    t = np.array([0.5, 1.0, 2.0])
    errors = [
        np.max(np.abs(invert_many(transform, t, InversionConfig(node_count=n)) - exact(t)))
        for n in (16, 32, 64)
    ]
    # rounding noise floor at double precision
    floor = 1e-12
    assert errors[1] <= max(errors[0], floor)
    assert errors[2] <= max(errors[1], floor)
    assert errors[2] < 1e-9


if __name__ == "__main__":
    unittest.main()
