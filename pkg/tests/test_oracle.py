"""Exact-oracle tests: enumeration, conditionals, projections, TV and local uniformity."""
import math
import unittest
from fractions import Fraction

import numpy as np

from hypercolour.assignments import ProjectedConfig
from hypercolour.errors import BudgetExceededError, EmptySupportError, PreconditionUnmetError
from hypercolour.hypergraph import validate
from hypercolour.oracle import (
    ExactDistribution,
    colour_lists,
    conditional_distribution,
    conditional_marginal,
    empirical_marginals,
    enumerate_proper,
    local_uniformity_check,
    projected_distribution,
    projected_distribution_direct,
    projected_marginal,
    scan_stationarity,
    tv_distance,
    uniform_distribution,
    vertex_marginals,
)
from hypercolour.projection import build

EDGE = validate([(0, 1, 2)], 3, 3)
TWO = validate([(0, 1, 2), (1, 2, 3)], 4, 3)
SPLIT = validate([(0, 1, 2), (3, 4, 5)], 6, 3)


class EnumerateTests(unittest.TestCase):
    def test_single_edge_two_colours(self) -> None:
        self.assertEqual(enumerate_proper(EDGE, [(1, 2)] * 3).shape, (6, 3))

    def test_no_edges(self) -> None:
        rows = enumerate_proper(validate([], 2, 3), [(1, 2, 3)] * 2)
        self.assertEqual(rows.shape[0], 9)

    def test_singleton_equal_lists(self) -> None:
        self.assertEqual(enumerate_proper(EDGE, [(2,)] * 3).shape[0], 0)

    def test_lexicographic_order(self) -> None:
        rows = enumerate_proper(validate([], 2, 3), [(2, 1)] * 2)
        self.assertEqual(rows.tolist(), [[1, 1], [1, 2], [2, 1], [2, 2]])

    def test_budget(self) -> None:
        with self.assertRaises(BudgetExceededError):
            enumerate_proper(EDGE, [range(1, 5)] * 3, budget=63)

    def test_chunked_enumeration_matches_count(self) -> None:
        # 8^6 assignments spans several chunks; proper count is q^6 minus colourings with a mono edge.
        q = 8
        rows = enumerate_proper(SPLIT, [range(1, q + 1)] * 6)
        per_edge = q**3 - q
        self.assertEqual(rows.shape[0], per_edge * per_edge)

    def test_colour_lists(self) -> None:
        scheme = build(10)
        y = ProjectedConfig.from_mapping(3, 4, {0: 3, 2: 1})
        self.assertEqual(colour_lists(scheme, y), [(7, 8), tuple(range(1, 11)), (1, 2, 3)])


class ConditionalTests(unittest.TestCase):
    def test_all_edges_satisfied_gives_uniform(self) -> None:
        scheme = build(4)
        y = ProjectedConfig.from_mapping(3, 2, {0: 1, 1: 2})
        dist = conditional_marginal(EDGE, scheme, 2, y)
        self.assertEqual(dist.fractions(), {c: Fraction(1, 4) for c in range(1, 5)})

    def test_neighbours_in_same_bucket(self) -> None:
        scheme = build(4)
        y = ProjectedConfig.from_mapping(3, 2, {0: 1, 1: 1})
        dist = conditional_marginal(EDGE, scheme, 2, y)
        self.assertEqual(dist.total, 14)
        self.assertEqual(dist.counts, (3, 3, 4, 4))
        self.assertAlmostEqual(float(dist.probs.sum()), 1.0, places=12)

    def test_value_at_v_is_ignored(self) -> None:
        scheme = build(4)
        with_v = ProjectedConfig.from_mapping(3, 2, {0: 1, 1: 1, 2: 2})
        without_v = with_v.without([2])
        self.assertEqual(conditional_marginal(EDGE, scheme, 2, with_v), conditional_marginal(EDGE, scheme, 2, without_v))

    def test_empty_support(self) -> None:
        with self.assertRaises(EmptySupportError):
            conditional_marginal(EDGE, build(1), 0, ProjectedConfig.empty(3, 1))

    def test_component_restriction_agrees_with_full_enumeration(self) -> None:
        scheme = build(4)
        rng = np.random.default_rng(4)
        h = validate([(0, 1, 2), (2, 3, 4), (4, 5, 6)], 8, 3)
        for _ in range(10):
            v = int(rng.integers(h.n))
            values = rng.integers(0, 3, size=h.n)
            values[v] = 0
            y = ProjectedConfig(values, 2)
            full = conditional_distribution(h, scheme, [v], y).fractions()
            local = conditional_marginal(h, scheme, v, y).fractions()
            self.assertEqual({c[0]: p for c, p in full.items()}, local)

    def test_product_factorization(self) -> None:
        scheme = build(3)
        y = ProjectedConfig.from_mapping(6, 2, {0: 1, 4: 2})
        joint = conditional_distribution(SPLIT, scheme, range(6), y).fractions()
        left = conditional_distribution(SPLIT, scheme, [0, 1, 2], y).fractions()
        right = conditional_distribution(SPLIT, scheme, [3, 4, 5], y).fractions()
        product = {a + b: pa * pb for a, pa in left.items() for b, pb in right.items()}
        self.assertEqual(joint, product)

    def test_projected_marginal_sums_bucket_mass(self) -> None:
        scheme = build(4)
        y = ProjectedConfig.from_mapping(3, 2, {0: 1, 1: 1})
        nu = projected_marginal(EDGE, scheme, 2, y)
        self.assertEqual(nu.support, (1, 2))
        self.assertEqual(nu.counts, (6, 8))


class ProjectedDistributionTests(unittest.TestCase):
    def test_push_forward_equals_direct(self) -> None:
        for h, q in ((EDGE, 4), (TWO, 4), (TWO, 5), (EDGE, 2)):
            scheme = build(q)
            self.assertEqual(projected_distribution(h, scheme).fractions(), projected_distribution_direct(h, scheme).fractions())

    def test_uniform_distribution_support(self) -> None:
        mu = uniform_distribution(EDGE, [(1, 2)] * 3)
        self.assertEqual(len(mu.support), 6)
        self.assertEqual(set(mu.fractions().values()), {Fraction(1, 6)})

    def test_stationarity_with_full_support(self) -> None:
        report = scan_stationarity(TWO, build(4))
        self.assertTrue(report.balanced)
        self.assertTrue(report.stationary)
        self.assertTrue(report.full_support)
        self.assertEqual(report.states, 16)
        self.assertEqual(report.max_violation, 0.0)

    def test_stationarity_without_full_support(self) -> None:
        report = scan_stationarity(EDGE, build(2))
        self.assertTrue(report.balanced)
        self.assertTrue(report.stationary)
        self.assertFalse(report.full_support)
        self.assertEqual(report.positive_states, 6)


class TvDistanceTests(unittest.TestCase):
    def test_examples(self) -> None:
        self.assertEqual(tv_distance({0: 0.3, 1: 0.7}, {0: 0.3, 1: 0.7}), 0.0)
        self.assertEqual(tv_distance({0: 1.0, 1: 0.0}, {0: 0.0, 1: 1.0}), 1.0)
        self.assertAlmostEqual(tv_distance({0: 0.5, 1: 0.5}, {0: 1.0, 1: 0.0}), 0.5)

    def test_histograms_are_normalised(self) -> None:
        self.assertAlmostEqual(tv_distance({1: 30, 2: 10}, ExactDistribution((1, 2), (3, 1))), 0.0)

    def test_metric_properties(self) -> None:
        rng = np.random.default_rng(0)
        for _ in range(100):
            p, r, w = (dict(enumerate(rng.dirichlet(np.ones(5)))) for _ in range(3))
            self.assertAlmostEqual(tv_distance(p, r), tv_distance(r, p))
            self.assertLessEqual(tv_distance(p, w), tv_distance(p, r) + tv_distance(r, w) + 1e-12)
            self.assertGreater(tv_distance(p, r), 0.0)
            self.assertEqual(tv_distance(p, dict(p)), 0.0)


class LocalUniformityTests(unittest.TestCase):
    def test_single_edge_exactly_uniform(self) -> None:
        report = local_uniformity_check(EDGE, [range(1, 4)] * 3, 3)
        self.assertTrue(report.passed)
        self.assertEqual(len(report.entries), 9)
        for entry in report.entries:
            self.assertAlmostEqual(entry.prob, 1 / 3, places=12)
            self.assertAlmostEqual(entry.lower, math.exp(-2 / 3) / 3)

    def test_edge_free_instance(self) -> None:
        h = validate([], 3, 3)
        report = local_uniformity_check(h, [(1, 2), (1, 2, 3), (4,)], 3)
        self.assertTrue(report.passed)
        self.assertEqual([e.prob for e in report.entries if e.vertex == 0], [0.5, 0.5])

    def test_precondition_unmet(self) -> None:
        with self.assertRaises(PreconditionUnmetError):
            local_uniformity_check(EDGE, [(1, 2)] * 3, 3)
        with self.assertRaises(PreconditionUnmetError):
            local_uniformity_check(EDGE, [range(1, 4)] * 3, 2)

    def test_report_serialises(self) -> None:
        out = local_uniformity_check(EDGE, [range(1, 4)] * 3, 3).to_dict()
        self.assertEqual(out["violations"], [])
        self.assertTrue(out["passed"])


class DistributionTests(unittest.TestCase):
    def test_invariants(self) -> None:
        with self.assertRaises(ValueError):
            ExactDistribution((1, 1), (1, 2))
        with self.assertRaises(EmptySupportError):
            ExactDistribution((1, 2), (0, 0))

    def test_empirical_marginals(self) -> None:
        out = empirical_marginals(np.array([[1, 2], [1, 3], [2, 3]]), 3)
        self.assertEqual(out[0].counts, (2, 1, 0))
        self.assertEqual(out[1].counts, (0, 1, 2))

    def test_vertex_marginals_total(self) -> None:
        marginals = vertex_marginals(TWO, [range(1, 4)] * 4)
        totals = {m.total for m in marginals}
        self.assertEqual(totals, {enumerate_proper(TWO, [range(1, 4)] * 4).shape[0]})


if __name__ == "__main__":
    unittest.main()
