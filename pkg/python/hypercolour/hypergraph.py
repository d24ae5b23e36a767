"""k-uniform hypergraphs, line graphs, and satisfied-edge pruning.

Vertices are 0..n-1 and edges are stored as sorted tuples so that iteration
order (and therefore every seeded run) is reproducible.
"""
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from .assignments import UNSET, ProjectedConfig
from .errors import EdgeArityError, InstanceFormatError, VertexOutOfRangeError

Edge = Tuple[int, ...]


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph on vertices 0..N-1."""

    adjacency: Tuple[FrozenSet[int], ...]

    @classmethod
    def from_edges(cls, num_vertices: int, pairs: Iterable[Tuple[int, int]]) -> "Graph":
        adj: List[Set[int]] = [set() for _ in range(num_vertices)]
        for a, b in pairs:
            a, b = int(a), int(b)
            if not (0 <= a < num_vertices and 0 <= b < num_vertices):
                raise VertexOutOfRangeError(f"graph edge ({a}, {b}) outside [0, {num_vertices})")
            if a == b:
                continue
            adj[a].add(b)
            adj[b].add(a)
        return cls(tuple(frozenset(s) for s in adj))

    @classmethod
    def from_networkx(cls, g) -> "Graph":
        """Relabel a networkx graph to 0..N-1 in sorted node order."""
        nodes = sorted(g.nodes())
        index = {node: i for i, node in enumerate(nodes)}
        return cls.from_edges(len(nodes), ((index[a], index[b]) for a, b in g.edges()))

    @property
    def num_vertices(self) -> int:
        return len(self.adjacency)

    @property
    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)

    def edges(self) -> List[Tuple[int, int]]:
        return [(a, b) for a in range(self.num_vertices) for b in sorted(self.adjacency[a]) if a < b]

    def neighbourhood(self, vertices: Iterable[int], within: Optional[Set[int]] = None) -> Set[int]:
        """Γ(A): vertices outside A adjacent to A (optionally inside `within`)."""
        a = set(vertices)
        out: Set[int] = set()
        for v in a:
            out.update(self.adjacency[v])
        out -= a
        if within is not None:
            out &= within
        return out

    def distances_from(self, vertices: Iterable[int], within: Optional[Set[int]] = None) -> Dict[int, int]:
        """BFS distances from a vertex set, optionally inside an induced subgraph."""
        dist: Dict[int, int] = {}
        queue: deque = deque()
        for v in sorted(set(vertices)):
            dist[v] = 0
            queue.append(v)
        while queue:
            u = queue.popleft()
            for w in sorted(self.adjacency[u]):
                if w in dist or (within is not None and w not in within):
                    continue
                dist[w] = dist[u] + 1
                queue.append(w)
        return dist

    def layer(self, vertices: Iterable[int], i: int) -> Set[int]:
        """Γ^i(A): vertices at distance exactly i from A."""
        return {v for v, d in self.distances_from(vertices).items() if d == i}

    def distance(self, a: Iterable[int], b: Iterable[int]) -> float:
        dist = self.distances_from(a)
        found = [dist[v] for v in b if v in dist]
        return float(min(found)) if found else float("inf")

    def induced_components(self, vertices: Iterable[int]) -> List[Tuple[int, ...]]:
        """Connected components of G[vertices], each sorted, ordered by minimum vertex."""
        remaining = set(vertices)
        comps: List[Tuple[int, ...]] = []
        for v in sorted(remaining):
            if v not in remaining:
                continue
            comp = self.distances_from([v], within=remaining)
            remaining -= comp.keys()
            comps.append(tuple(sorted(comp)))
        return comps

    def is_connected(self, vertices: Iterable[int]) -> bool:
        vs = set(vertices)
        if not vs:
            return False
        return len(self.distances_from([min(vs)], within=vs)) == len(vs)


@dataclass(frozen=True, eq=False)
class Hypergraph:
    n: int
    k: int
    edges: Tuple[Edge, ...]
    incidence: Tuple[Tuple[int, ...], ...]
    max_degree: int
    simple: bool
    edge_array: np.ndarray = field(repr=False)

    @property
    def m(self) -> int:
        return len(self.edges)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Hypergraph):
            return NotImplemented
        return (self.n, self.k, self.edges) == (other.n, other.k, other.edges)

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class LineGraph:
    """Lin(H): one node per hyperedge, adjacent when the hyperedges intersect."""

    graph: Graph

    @property
    def num_nodes(self) -> int:
        return self.graph.num_vertices

    @property
    def max_degree(self) -> int:
        return self.graph.max_degree

    def edges(self) -> List[Tuple[int, int]]:
        return self.graph.edges()


@dataclass(frozen=True)
class Component:
    vertices: Tuple[int, ...]
    edges: Tuple[int, ...]
    cap_exceeded: bool = False


def validate(raw_edges: Iterable[Iterable[int]], n: int, k: int) -> Hypergraph:
    if n < 0 or k < 1:
        raise EdgeArityError(f"need n >= 0 and k >= 1, got n={n}, k={k}")
    edges: List[Edge] = []
    for idx, raw in enumerate(raw_edges):
        members = [int(v) for v in raw]
        verts = tuple(sorted(set(members)))
        if len(verts) != k or len(members) != k:
            raise EdgeArityError(f"edge {idx} {members} does not have exactly {k} distinct vertices")
        if verts[0] < 0 or verts[-1] >= n:
            raise VertexOutOfRangeError(f"edge {idx} {members} has a vertex outside [0, {n})")
        edges.append(verts)

    incidence: List[List[int]] = [[] for _ in range(n)]
    for e_id, e in enumerate(edges):
        for v in e:
            incidence[v].append(e_id)

    # Simple iff no vertex pair is covered by two edges.
    simple = True
    seen_pairs: Set[Tuple[int, int]] = set()
    for e in edges:
        for pair in combinations(e, 2):
            if pair in seen_pairs:
                simple = False
                break
            seen_pairs.add(pair)
        if not simple:
            break

    edge_array = np.array(edges, dtype=np.int64).reshape(len(edges), k)
    return Hypergraph(
        n=n,
        k=k,
        edges=tuple(edges),
        incidence=tuple(tuple(ids) for ids in incidence),
        max_degree=max((len(ids) for ids in incidence), default=0),
        simple=simple,
        edge_array=edge_array,
    )


def line_graph(h: Hypergraph) -> LineGraph:
    pairs: Set[Tuple[int, int]] = set()
    for ids in h.incidence:
        for a, b in combinations(ids, 2):
            pairs.add((a, b))
    return LineGraph(Graph.from_edges(h.m, sorted(pairs)))


def satisfied_by(edge: Sequence[int], y: ProjectedConfig) -> bool:
    vals = y.values[np.asarray(edge, dtype=np.int64)]
    vals = vals[vals != UNSET]
    return bool(vals.size >= 2 and (vals != vals[0]).any())


def satisfied_mask(h: Hypergraph, y: ProjectedConfig, edge_ids: Optional[Sequence[int]] = None) -> np.ndarray:
    """Vectorised satisfiedBy over every edge of h, or over `edge_ids` in that order."""
    rows = h.edge_array if edge_ids is None else h.edge_array[list(edge_ids)]
    if rows.shape[0] == 0:
        return np.zeros(0, dtype=bool)
    vals = y.values[rows]
    defined = vals != UNSET
    # An edge is satisfied iff its defined values are not all equal.
    big = np.iinfo(np.int64).max
    lo = np.where(defined, vals, big).min(axis=1)
    hi = np.where(defined, vals, -1).max(axis=1)
    return (defined.sum(axis=1) >= 2) & (lo != hi)


def pruned_component(
    h: Hypergraph,
    y: ProjectedConfig,
    start: int,
    cap: Optional[int] = None,
    satisfied: Optional[np.ndarray] = None,
) -> Component:
    """Component of `start` in H with Y-satisfied edges removed.

    Depth-first: from each vertex, its unsatisfied edges are taken in
    ascending id and each edge's unseen vertices are visited in ascending id
    before the next edge. Discovery stops as soon as the edge count exceeds
    `cap` (None means no cap).
    """
    if not 0 <= start < h.n:
        raise VertexOutOfRangeError(f"start vertex {start} outside [0, {h.n})")
    if satisfied is None:
        satisfied = satisfied_mask(h, y)

    seen_vertices = {start}
    seen_edges: Set[int] = set()
    exceeded = False

    def frontier(u: int):
        nonlocal exceeded
        for e_id in h.incidence[u]:
            if satisfied[e_id] or e_id in seen_edges:
                continue
            seen_edges.add(e_id)
            if cap is not None and len(seen_edges) > cap:
                exceeded = True
                return
            for w in h.edges[e_id]:
                if w not in seen_vertices:
                    yield w

    stack = [frontier(start)]
    while stack and not exceeded:
        w = next(stack[-1], None)
        if w is None:
            stack.pop()
        elif w not in seen_vertices:
            seen_vertices.add(w)
            stack.append(frontier(w))
    return Component(tuple(sorted(seen_vertices)), tuple(sorted(seen_edges)), cap_exceeded=exceeded)


def components(
    h: Hypergraph,
    y: ProjectedConfig,
    starts: Optional[Iterable[int]] = None,
    cap: Optional[int] = None,
    satisfied: Optional[np.ndarray] = None,
) -> List[Component]:
    """Pruned components meeting `starts` (default: all of V), in start order.

    With a cap, the list ends at the first component that exceeds it.
    `satisfied` may carry a precomputed satisfied_mask(h, y).
    """
    if satisfied is None:
        satisfied = satisfied_mask(h, y)
    covered: Set[int] = set()
    out: List[Component] = []
    for v in (range(h.n) if starts is None else sorted(set(starts))):
        if v in covered:
            continue
        comp = pruned_component(h, y, v, cap=cap, satisfied=satisfied)
        out.append(comp)
        if comp.cap_exceeded:
            break
        covered.update(comp.vertices)
    return out


def _data_lines(text: str) -> List[List[str]]:
    rows = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append(line.split())
    return rows


def parse_instance(text: str) -> Hypergraph:
    rows = _data_lines(text)
    if not rows or len(rows[0]) != 3:
        raise InstanceFormatError("instance header must be `n m k`")
    try:
        n, m, k = (int(x) for x in rows[0])
        raw_edges = [[int(x) for x in row] for row in rows[1:]]
    except ValueError as exc:
        raise InstanceFormatError(f"non-integer token in instance: {exc}") from exc
    if len(raw_edges) != m:
        raise InstanceFormatError(f"header declares {m} edges, found {len(raw_edges)}")
    return validate(raw_edges, n, k)


def format_instance(h: Hypergraph, comment: Optional[str] = None) -> str:
    lines = []
    if comment:
        lines.extend(f"# {c}" for c in comment.splitlines())
    lines.append(f"{h.n} {h.m} {h.k}")
    lines.extend(" ".join(str(v) for v in e) for e in h.edges)
    return "\n".join(lines) + "\n"


def read_instance(path: Union[str, Path]) -> Hypergraph:
    return parse_instance(Path(path).read_text(encoding="utf-8"))


def write_instance(h: Hypergraph, path: Union[str, Path], comment: Optional[str] = None) -> None:
    Path(path).write_text(format_instance(h, comment=comment), encoding="utf-8")


def parse_graph(text: str) -> Graph:
    rows = _data_lines(text)
    if not rows or len(rows[0]) != 2:
        raise InstanceFormatError("graph header must be `N M`")
    try:
        num_vertices, m = (int(x) for x in rows[0])
        pairs = [(int(a), int(b)) for a, b in rows[1:]]
    except ValueError as exc:
        raise InstanceFormatError(f"bad graph line: {exc}") from exc
    if len(pairs) != m:
        raise InstanceFormatError(f"header declares {m} edges, found {len(pairs)}")
    return Graph.from_edges(num_vertices, pairs)


def read_graph(path: Union[str, Path]) -> Graph:
    return parse_graph(Path(path).read_text(encoding="utf-8"))
