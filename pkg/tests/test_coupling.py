"""Maximal coupling, coupled idealised scans and the mixing curve."""
import unittest
from collections import Counter

import numpy as np
from scipy.stats import chisquare

from hypercolour.coupling import (
    CSV_HEADER,
    MarginalCache,
    default_checkpoints,
    ideal_scan,
    maximal_coupling,
    mixing_curve,
    reference_steps,
    run_coupled_scan,
)
from hypercolour.errors import EmptySupportError, InvalidInputError
from hypercolour.hypergraph import validate
from hypercolour.assignments import ProjectedConfig
from hypercolour.oracle import ExactDistribution, projected_distribution, projected_marginal, tv_distance
from hypercolour.projection import build

TWO = validate([(0, 1, 2), (1, 2, 3)], 4, 3)


class MaximalCouplingTests(unittest.TestCase):
    def test_identical_laws_always_agree(self) -> None:
        rng = np.random.default_rng(0)
        p = [0.2, 0.3, 0.5]
        for _ in range(500):
            x, y = maximal_coupling(p, p, rng)
            self.assertEqual(x, y)

    def test_disjoint_laws_always_differ(self) -> None:
        rng = np.random.default_rng(1)
        for _ in range(200):
            self.assertEqual(maximal_coupling([1.0, 0.0], [0.0, 1.0], rng), (0, 1))

    def test_half_overlap(self) -> None:
        rng = np.random.default_rng(2)
        draws = [maximal_coupling([0.5, 0.5], [1.0, 0.0], rng) for _ in range(20000)]
        self.assertAlmostEqual(sum(x != y for x, y in draws) / len(draws), 0.5, delta=0.02)
        self.assertTrue(all(y == 0 for _, y in draws))
        self.assertAlmostEqual(sum(x == 0 for x, _ in draws) / len(draws), 0.5, delta=0.02)

    def test_disagreement_matches_tv(self) -> None:
        rng = np.random.default_rng(3)
        runs = 4000
        for _ in range(5):
            p = rng.dirichlet(np.ones(4))
            r = rng.dirichlet(np.ones(4))
            tv = tv_distance(dict(enumerate(p)), dict(enumerate(r)))
            rate = sum(x != y for x, y in (maximal_coupling(p, r, rng) for _ in range(runs))) / runs
            self.assertLess(abs(rate - tv), 4 * np.sqrt(tv * (1 - tv) / runs) + 1e-3)

    def test_marginals_are_preserved(self) -> None:
        rng = np.random.default_rng(10)
        p = np.array([0.2, 0.5, 0.3])
        r = np.array([0.4, 0.1, 0.5])
        runs = 20000
        draws = [maximal_coupling(p, r, rng) for _ in range(runs)]
        xs = Counter(x for x, _ in draws)
        ys = Counter(y for _, y in draws)
        self.assertGreater(chisquare([xs[i] for i in range(3)], f_exp=p * runs).pvalue, 0.001)
        self.assertGreater(chisquare([ys[i] for i in range(3)], f_exp=r * runs).pvalue, 0.001)

    def test_exact_distributions_return_support_values(self) -> None:
        rng = np.random.default_rng(4)
        p = ExactDistribution((3, 5), (1, 1))
        r = ExactDistribution((5, 7), (1, 3))
        seen = Counter(maximal_coupling(p, r, rng) for _ in range(2000))
        self.assertTrue({x for x, _ in seen} <= {3, 5})
        self.assertTrue({y for _, y in seen} <= {5, 7})

    def test_shape_mismatch(self) -> None:
        with self.assertRaises(InvalidInputError):
            maximal_coupling([0.5, 0.5], [1.0], np.random.default_rng(0))


class CoupledScanTests(unittest.TestCase):
    def test_equal_starts_never_diverge(self) -> None:
        start = [1, 2, 1, 2]
        trace = run_coupled_scan(TWO, 4, start, start, 40, seed=5)
        self.assertTrue(all(not d for d in trace.discrepancies))
        self.assertEqual(trace.coalesced_at, 0)

    def test_schedule(self) -> None:
        trace = run_coupled_scan(TWO, 4, [1, 1, 1, 1], [2, 2, 2, 2], 11, seed=0)
        self.assertEqual(trace.updated, [t % 4 for t in range(1, 12)])
        self.assertEqual(trace.final.t, 11)

    def test_edge_free_coalesces_after_one_sweep(self) -> None:
        h = validate([], 4, 3)
        trace = run_coupled_scan(h, 9, [1, 1, 1, 1], [3, 3, 3, 3], 8, seed=6)
        for t, disc in enumerate(trace.discrepancies, start=1):
            updated = set(trace.updated[:t])
            self.assertTrue(updated.isdisjoint(disc))
        self.assertEqual(trace.discrepancies[3], ())
        self.assertEqual(trace.coalesced_at, 4)

    def test_agreement_is_absorbing(self) -> None:
        for seed in range(20):
            trace = run_coupled_scan(TWO, 4, [1, 1, 1, 1], [2, 2, 2, 2], 60, seed=seed)
            met = trace.coalesced_at
            if met is not None:
                self.assertTrue(all(not d for d in trace.discrepancies[max(met - 1, 0):]))

    def test_one_step_kernels_match_exact_marginals(self) -> None:
        # Step 1 updates vertex 1; the two chains disagree at vertices 0 and 2 beforehand.
        scheme = build(4)
        cache = MarginalCache(TWO, scheme)
        x0 = [1, 1, 2, 2]
        y0 = [2, 1, 1, 2]
        xs: Counter = Counter()
        ys: Counter = Counter()
        runs = 4000
        for seed in range(runs):
            final = run_coupled_scan(TWO, 4, x0, y0, 1, seed=seed, scheme=scheme, cache=cache).final
            xs[int(final.x.values[1])] += 1
            ys[int(final.y.values[1])] += 1
        for start, seen in ((x0, xs), (y0, ys)):
            nu = projected_marginal(TWO, scheme, 1, ProjectedConfig(np.array(start), scheme.s))
            observed = [seen.get(b, 0) for b in nu.support]
            self.assertEqual(sum(observed), runs)
            self.assertGreater(chisquare(observed, f_exp=nu.probs * runs).pvalue, 0.001)

    def test_partial_initial_state_rejected(self) -> None:
        with self.assertRaises(InvalidInputError):
            run_coupled_scan(TWO, 4, [1, 1, 1], [1, 1, 1, 1], 4)
        with self.assertRaises(InvalidInputError):
            run_coupled_scan(TWO, 4, [1, 1, 1, 0], [1, 1, 1, 1], 4)

    def test_cache_is_shared(self) -> None:
        scheme = build(4)
        cache = MarginalCache(TWO, scheme)
        self.assertEqual(len(cache), 0)
        run_coupled_scan(TWO, 4, [1, 1, 1, 1], [2, 2, 2, 2], 12, seed=1, scheme=scheme, cache=cache)
        filled = len(cache)
        self.assertGreater(filled, 0)
        self.assertLessEqual(filled, TWO.n * scheme.s ** (TWO.n - 1))


class IdealScanTests(unittest.TestCase):
    def test_long_run_matches_projected_law(self) -> None:
        scheme = build(4)
        nu = projected_distribution(TWO, scheme)
        cache = MarginalCache(TWO, scheme)
        runs = 4000
        counts = Counter(
            tuple(int(b) for b in ideal_scan(TWO, scheme, None, 40, seed=seed, cache=cache).values)
            for seed in range(runs)
        )
        observed = [counts.get(tau, 0) for tau in nu.support]
        self.assertEqual(sum(observed), runs)
        expected = [p * runs for p in nu.probs]
        self.assertGreater(chisquare(observed, f_exp=expected).pvalue, 0.001)

    def test_zero_steps_returns_start(self) -> None:
        out = ideal_scan(TWO, build(4), [2, 1, 2, 1], 0, seed=0)
        self.assertEqual(list(out.values), [2, 1, 2, 1])


class MixingCurveTests(unittest.TestCase):
    def test_curve_decreases(self) -> None:
        curve = mixing_curve(TWO, 4, 0.1, [0, 4, 40], runs=200, seed=7, random_pairs=3)
        self.assertEqual(len(curve.rows), 3 * TWO.n)
        self.assertEqual(curve.worst(0), 1.0)
        self.assertLess(curve.worst(40), curve.worst(0))
        self.assertEqual(curve.pairs, 4)
        self.assertAlmostEqual(curve.target, 0.1 / TWO.n)
        row = curve.rate(40, 0)
        self.assertAlmostEqual(row.stderr, np.sqrt(row.rate * (1 - row.rate) / 200))

    def test_csv_header_and_determinism(self) -> None:
        a = mixing_curve(TWO, 4, 0.1, [0, 8], runs=20, seed=3, random_pairs=2)
        b = mixing_curve(TWO, 4, 0.1, [8, 0], runs=20, seed=3, random_pairs=2)
        self.assertEqual(a.to_csv(), b.to_csv())
        lines = a.to_csv().splitlines()
        self.assertEqual(lines[0], ",".join(CSV_HEADER))
        self.assertEqual(len(lines), 1 + 2 * TWO.n)

    def test_workers_match_serial(self) -> None:
        serial = mixing_curve(TWO, 4, 0.1, [0, 8], runs=10, seed=9, random_pairs=2)
        pooled = mixing_curve(TWO, 4, 0.1, [0, 8], runs=10, seed=9, random_pairs=2, workers=2)
        self.assertEqual(serial.rows, pooled.rows)

    def test_infeasible_pairs(self) -> None:
        h = validate([(0, 1, 2)], 3, 3)
        with self.assertRaises(EmptySupportError):
            mixing_curve(h, 1, 0.1, [0, 3], runs=2, seed=0, random_pairs=1)

    def test_invalid_arguments(self) -> None:
        with self.assertRaises(InvalidInputError):
            mixing_curve(TWO, 4, 0.1, [0, 4], runs=0)
        with self.assertRaises(InvalidInputError):
            mixing_curve(TWO, 4, 0.1, [], runs=5)


class CheckpointTests(unittest.TestCase):
    def test_doubling(self) -> None:
        self.assertEqual(default_checkpoints(100, 10), [0, 10, 20, 40, 80, 100])
        self.assertEqual(default_checkpoints(0, 10), [0])
        self.assertEqual(default_checkpoints(10, 10), [0, 10])

    def test_reference_steps(self) -> None:
        self.assertEqual(reference_steps(10, 2, 0.1), int(np.ceil(500 * np.log(200))))
        self.assertEqual(reference_steps(5, 0, 0.1), reference_steps(5, 1, 0.1))


if __name__ == "__main__":
    unittest.main()
