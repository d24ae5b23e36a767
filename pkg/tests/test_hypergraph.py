"""Unit tests for hypergraph validation, line graphs, pruning and the instance format."""
import os
import tempfile
import unittest
from itertools import combinations

import networkx as nx
import numpy as np

from hypercolour.assignments import ProjectedConfig
from hypercolour.errors import EdgeArityError, InstanceFormatError, VertexOutOfRangeError
from hypercolour.hypergraph import (
    Graph,
    components,
    format_instance,
    line_graph,
    parse_graph,
    parse_instance,
    pruned_component,
    read_instance,
    satisfied_by,
    satisfied_mask,
    validate,
    write_instance,
)
from hypercolour.workbench import GenSpec, generate_instance

PATH3 = [(0, 1, 2), (2, 3, 4), (4, 5, 6)]


class ValidateTests(unittest.TestCase):
    def test_single_edge(self) -> None:
        h = validate([(0, 1, 2)], 3, 3)
        self.assertEqual(h.max_degree, 1)
        self.assertTrue(h.simple)

    def test_two_edges_share_one_vertex(self) -> None:
        h = validate([{0, 1, 2}, {2, 3, 4}], 5, 3)
        self.assertEqual(h.max_degree, 2)
        self.assertEqual(h.incidence[2], (0, 1))
        self.assertTrue(h.simple)

    def test_overlap_of_two_is_not_simple(self) -> None:
        h = validate([(0, 1, 2), (0, 1, 3)], 4, 3)
        self.assertFalse(h.simple)

    def test_edges_are_sorted(self) -> None:
        h = validate([(4, 2, 3)], 5, 3)
        self.assertEqual(h.edges, ((2, 3, 4),))

    def test_wrong_arity_rejected(self) -> None:
        with self.assertRaises(EdgeArityError):
            validate([(0, 1)], 3, 3)

    def test_repeated_vertex_rejected(self) -> None:
        with self.assertRaises(EdgeArityError):
            validate([(0, 0, 1)], 3, 3)

    def test_vertex_out_of_range(self) -> None:
        with self.assertRaises(VertexOutOfRangeError):
            validate([(0, 1, 3)], 3, 3)

    def test_empty_edge_list(self) -> None:
        h = validate([], 4, 3)
        self.assertEqual(h.m, 0)
        self.assertEqual(h.max_degree, 0)
        self.assertEqual(h.edge_array.shape, (0, 3))

    def test_incidence_and_simplicity_on_random_instances(self) -> None:
        for seed in range(10):
            h = generate_instance(GenSpec(n=20, k=3, max_degree=3, m=12, seed=seed))
            for v in range(h.n):
                self.assertEqual(set(h.incidence[v]), {e for e, edge in enumerate(h.edges) if v in edge})
            self.assertEqual(h.max_degree, max(len(ids) for ids in h.incidence))
            pairwise = all(len(set(a) & set(b)) <= 1 for a, b in combinations(h.edges, 2))
            self.assertEqual(h.simple, pairwise)


class LineGraphTests(unittest.TestCase):
    def test_shared_vertex_gives_one_edge(self) -> None:
        lg = line_graph(validate([(0, 1, 2), (2, 3, 4)], 5, 3))
        self.assertEqual(lg.edges(), [(0, 1)])

    def test_single_edge_has_no_line_edges(self) -> None:
        lg = line_graph(validate([(0, 1, 2)], 3, 3))
        self.assertEqual(lg.num_nodes, 1)
        self.assertEqual(lg.edges(), [])

    def test_pairwise_sharing_gives_triangle(self) -> None:
        lg = line_graph(validate([(0, 1, 2), (2, 3, 4), (4, 5, 0)], 6, 3))
        self.assertEqual(lg.edges(), [(0, 1), (0, 2), (1, 2)])

    def test_degree_bound(self) -> None:
        h = generate_instance(GenSpec(n=30, k=4, max_degree=3, m=15, seed=3))
        self.assertLessEqual(line_graph(h).max_degree, h.k * h.max_degree)


class SatisfiedTests(unittest.TestCase):
    def test_disagreement_satisfies(self) -> None:
        y = ProjectedConfig.from_mapping(6, 3, {0: 1, 1: 2})
        self.assertTrue(satisfied_by((0, 1, 2), y))

    def test_agreement_does_not_satisfy(self) -> None:
        y = ProjectedConfig.from_mapping(6, 3, {0: 1, 1: 1})
        self.assertFalse(satisfied_by((0, 1, 2), y))

    def test_outside_domain(self) -> None:
        y = ProjectedConfig.from_mapping(6, 3, {5: 2})
        self.assertFalse(satisfied_by((0, 1, 2), y))

    def test_mask_matches_scalar_and_is_monotone(self) -> None:
        rng = np.random.default_rng(7)
        h = generate_instance(GenSpec(n=15, k=3, max_degree=3, m=10, seed=1))
        for _ in range(50):
            values = rng.integers(0, 4, size=h.n)
            y = ProjectedConfig(values, 3)
            mask = satisfied_mask(h, y)
            self.assertEqual(list(mask), [satisfied_by(e, y) for e in h.edges])
            unset = np.flatnonzero(values == 0)
            if unset.size:
                extended = values.copy()
                extended[unset] = rng.integers(1, 4, size=unset.size)
                wider = satisfied_mask(h, ProjectedConfig(extended, 3))
                self.assertTrue(np.all(wider[mask]))


class PrunedComponentTests(unittest.TestCase):
    def setUp(self) -> None:
        self.h = validate(PATH3, 7, 3)

    def test_all_edges_satisfied(self) -> None:
        y = ProjectedConfig(np.array([1, 2, 1, 2, 1, 2, 1]), 2)
        comp = pruned_component(self.h, y, 3, cap=10)
        self.assertEqual(comp.vertices, (3,))
        self.assertEqual(comp.edges, ())
        self.assertFalse(comp.cap_exceeded)

    def test_empty_domain_gives_full_path(self) -> None:
        comp = pruned_component(self.h, ProjectedConfig.empty(7, 2), 0, cap=10)
        self.assertEqual(comp.edges, (0, 1, 2))
        self.assertEqual(comp.vertices, tuple(range(7)))
        self.assertFalse(comp.cap_exceeded)

    def test_cap_one_trips_after_two_edges(self) -> None:
        comp = pruned_component(self.h, ProjectedConfig.empty(7, 2), 0, cap=1)
        self.assertTrue(comp.cap_exceeded)
        self.assertEqual(len(comp.edges), 2)

    def test_cap_zero_trips_on_first_edge(self) -> None:
        comp = pruned_component(self.h, ProjectedConfig.empty(7, 2), 6, cap=0)
        self.assertTrue(comp.cap_exceeded)
        self.assertEqual(comp.edges, (2,))

    def test_depth_first_follows_first_edge_before_the_next(self) -> None:
        # Edge 2 hangs off vertex 2 of edge 0, so it is reached before edge 1 at the start.
        h = validate([(0, 1, 2), (0, 3, 4), (2, 5, 6)], 7, 3)
        comp = pruned_component(h, ProjectedConfig.empty(7, 2), 0, cap=2)
        self.assertTrue(comp.cap_exceeded)
        self.assertEqual(comp.edges, (0, 2))
        full = pruned_component(h, ProjectedConfig.empty(7, 2), 0, cap=3)
        self.assertFalse(full.cap_exceeded)
        self.assertEqual(full.edges, (0, 1, 2))

    def test_mask_over_selected_edges(self) -> None:
        y = ProjectedConfig(np.array([1, 2, 1, 1, 1, 0, 0]), 2)
        self.assertEqual(list(satisfied_mask(self.h, y, [2, 0])), [False, True])
        self.assertEqual(satisfied_mask(self.h, y, []).shape, (0,))

    def test_partition_matches_networkx(self) -> None:
        rng = np.random.default_rng(11)
        for seed in range(8):
            h = generate_instance(GenSpec(n=18, k=3, max_degree=2, m=10, seed=seed))
            y = ProjectedConfig(rng.integers(0, 3, size=h.n), 2)
            mask = satisfied_mask(h, y)
            g = nx.Graph()
            g.add_nodes_from(range(h.n))
            for e_id, edge in enumerate(h.edges):
                if not mask[e_id]:
                    g.add_edges_from(combinations(edge, 2))
            expected = sorted(tuple(sorted(c)) for c in nx.connected_components(g))
            found = components(h, y)
            self.assertEqual(sorted(c.vertices for c in found), expected)
            self.assertEqual(sum(len(c.edges) for c in found), int((~mask).sum()))

    def test_components_stop_at_first_oversized(self) -> None:
        h = validate([(0, 1, 2), (3, 4, 5), (4, 5, 6)], 7, 3)
        found = components(h, ProjectedConfig.empty(7, 2), cap=1)
        self.assertEqual(len(found), 2)
        self.assertFalse(found[0].cap_exceeded)
        self.assertTrue(found[1].cap_exceeded)


class InstanceFormatTests(unittest.TestCase):
    TEXT = "# three disjoint edges\n9 3 3\n0 1 2\n3 4 5\n6 7 8\n"

    def test_round_trip_text(self) -> None:
        h = parse_instance(self.TEXT)
        self.assertEqual(format_instance(h, comment="three disjoint edges"), self.TEXT)

    def test_round_trip_file(self) -> None:
        h = generate_instance(GenSpec(n=12, k=3, max_degree=2, m=6, seed=5))
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "inst.txt")
            write_instance(h, path)
            self.assertEqual(read_instance(path), h)

    def test_edge_count_mismatch(self) -> None:
        with self.assertRaises(InstanceFormatError):
            parse_instance("4 2 3\n0 1 2\n")

    def test_bad_header(self) -> None:
        with self.assertRaises(InstanceFormatError):
            parse_instance("4 3\n")

    def test_non_integer_token(self) -> None:
        with self.assertRaises(InstanceFormatError):
            parse_instance("3 1 3\n0 1 x\n")

    def test_graph_format(self) -> None:
        g = parse_graph("# path\n4 3\n0 1\n1 2\n2 3\n")
        self.assertEqual(g.edges(), [(0, 1), (1, 2), (2, 3)])
        self.assertEqual(g.layer([0], 2), {2})
        self.assertEqual(g.distance([0], [3]), 3.0)


class GraphTests(unittest.TestCase):
    def test_neighbourhood_and_components(self) -> None:
        g = Graph.from_networkx(nx.path_graph(6))
        self.assertEqual(g.neighbourhood([2, 3]), {1, 4})
        self.assertEqual(g.neighbourhood([2, 3], within={0, 1, 2, 3}), {1})
        self.assertEqual(g.induced_components([0, 1, 3, 5]), [(0, 1), (3,), (5,)])
        self.assertTrue(g.is_connected([1, 2, 3]))
        self.assertFalse(g.is_connected([1, 3]))

    def test_unreachable_distance_is_infinite(self) -> None:
        g = Graph.from_edges(4, [(0, 1), (2, 3)])
        self.assertEqual(g.distance([0], [3]), float("inf"))


if __name__ == "__main__":
    unittest.main()
