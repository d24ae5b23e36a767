"""2-block-trees: generation, validity, block dropping, DFS encoding and counts.

Everything works on a plain `Graph`; callers wire it to the line graph of a
hypergraph. All "arbitrary" choices are resolved by vertex id (minimum vertex,
then lexicographically smallest sorted vertex tuple), so every routine here is
deterministic.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

from .errors import BudgetExceededError, InvalidInputError, VertexOutOfRangeError
from .hypergraph import Graph

logger = logging.getLogger(__name__)

SUBSET_BUDGET = 10**6

Block = Tuple[int, ...]


def _evolve(frontier: FrozenSet[int], g: Graph, within: Optional[Set[int]]) -> Iterator[FrozenSet[int]]:
    for u in frontier:
        for w in g.adjacency[u]:
            if w not in frontier and (within is None or w in within):
                yield frontier | frozenset([w])


def connected_subsets(
    g: Graph,
    v: int,
    size: int,
    within: Optional[Iterable[int]] = None,
    budget: int = SUBSET_BUDGET,
) -> List[Block]:
    """Connected induced vertex sets of `size` containing v, sorted lexicographically.

    With `within`, only sets inside that vertex set are produced.
    """
    if size < 1:
        raise InvalidInputError(f"subset size must be >= 1, got {size}")
    if not 0 <= v < g.num_vertices:
        raise VertexOutOfRangeError(f"vertex {v} outside [0, {g.num_vertices})")
    allowed = None if within is None else set(within)
    if allowed is not None and v not in allowed:
        return []

    start = frozenset([v])
    if size == 1:
        return [(v,)]
    visited = {start}
    stack = [start]
    found: List[Block] = []
    while stack:
        cur = stack.pop()
        for nxt in _evolve(cur, g, allowed):
            if nxt in visited:
                continue
            visited.add(nxt)
            if len(visited) > budget:
                raise BudgetExceededError(f"more than {budget} connected sets around vertex {v}")
            if len(nxt) == size:
                found.append(tuple(sorted(nxt)))
            else:
                stack.append(nxt)
    return sorted(found)


def count_connected_subgraphs(g: Graph, v: int, ell: int, budget: int = SUBSET_BUDGET) -> int:
    return len(connected_subsets(g, v, ell, budget=budget))


def connected_subgraph_bound(d: int, ell: int) -> float:
    """(e d)^(ell-1) / 2, the cap on connected size-ell sets at one vertex (ell >= 2)."""
    return (math.e * d) ** (ell - 1) / 2.0


def block_tree_bound(theta: int, d: int, ell: int) -> float:
    """(theta e^theta d^(theta+1))^ell, the cap on 2-block-trees at one vertex (d >= 1)."""
    return (theta * math.exp(theta) * d ** (theta + 1)) ** ell


def anchored_index(g: Graph, u: int, block: Sequence[int]) -> int:
    """1-based rank of `block` among the connected sets of its size containing u."""
    key = tuple(sorted(block))
    options = connected_subsets(g, u, len(key))
    try:
        return options.index(key) + 1
    except ValueError:
        raise InvalidInputError(f"{key} is not a connected set containing vertex {u}") from None


@dataclass(frozen=True)
class BlockTreeRun:
    theta: int
    blocks: Tuple[Block, ...]
    # anchors[i] is the vertex u_i the i-th block was grown from.
    anchors: Tuple[int, ...]
    exhausted: bool

    @property
    def ell(self) -> int:
        return len(self.blocks)


def _check_vertices(g: Graph, vertices: Iterable[int]) -> None:
    for x in vertices:
        if not 0 <= x < g.num_vertices:
            raise VertexOutOfRangeError(f"vertex {x} outside [0, {g.num_vertices})")


def generate_block_tree(g: Graph, u: int, c: Iterable[int], theta: int) -> BlockTreeRun:
    """Carve a 2-block-tree out of the connected set C, starting from u.

    Blocks are grown inside the working set V (initially C); after each block
    its closed neighbourhood in G[C] leaves V, as does every component of
    G[V] smaller than theta. The loop runs while |V| >= theta.
    """
    region = set(int(x) for x in c)
    _check_vertices(g, region | {u})
    if theta < 1:
        raise InvalidInputError(f"theta must be >= 1, got {theta}")
    if u not in region:
        raise InvalidInputError(f"start vertex {u} is not in C")
    if len(region) <= theta:
        raise InvalidInputError(f"|C| = {len(region)} must exceed theta = {theta}")
    if not g.is_connected(region):
        raise InvalidInputError("C does not induce a connected subgraph")

    working = set(region)
    blocks: List[Block] = []
    anchors: List[int] = []
    while len(working) >= theta:
        if not blocks:
            anchor = u
        else:
            anchor = min(g.neighbourhood(region - working, within=working))
        block = connected_subsets(g, anchor, theta, within=working)[0]
        blocks.append(block)
        anchors.append(anchor)
        working -= set(block) | g.neighbourhood(block, within=region)
        for comp in g.induced_components(working):
            if len(comp) < theta:
                working -= set(comp)
    logger.debug("block tree from %d over %d vertices: %d blocks", u, len(region), len(blocks))
    return BlockTreeRun(theta=theta, blocks=tuple(blocks), anchors=tuple(anchors), exhausted=not working)


def block_adjacency(g: Graph, blocks: Sequence[Sequence[int]]) -> List[List[int]]:
    """Blocks adjacent in G^2, assuming pairwise distance >= 2."""
    adj: List[List[int]] = [[] for _ in blocks]
    for i in range(len(blocks)):
        for j in range(i + 1, len(blocks)):
            if g.distance(blocks[i], blocks[j]) <= 2:
                adj[i].append(j)
                adj[j].append(i)
    return adj


def _bfs_order(adj: List[List[int]], root: int) -> List[int]:
    order = [root]
    seen = {root}
    for i in order:
        for j in adj[i]:
            if j not in seen:
                seen.add(j)
                order.append(j)
    return order


def is_block_tree(g: Graph, blocks: Sequence[Sequence[int]], theta: int) -> bool:
    if not blocks or theta < 1:
        return False
    try:
        _check_vertices(g, (x for b in blocks for x in b))
    except VertexOutOfRangeError:
        return False
    for b in blocks:
        if len(set(b)) != theta or len(b) != theta or not g.is_connected(b):
            return False
    for i in range(len(blocks)):
        for j in range(i + 1, len(blocks)):
            if g.distance(blocks[i], blocks[j]) < 2:
                return False
    return len(_bfs_order(block_adjacency(g, blocks), 0)) == len(blocks)


def drop_block(g: Graph, blocks: Sequence[Sequence[int]], v: int) -> Tuple[Block, ...]:
    """Remove one block so the rest is still a 2-block-tree containing v.

    The dropped block is the last one reached by a BFS over the block graph
    rooted at v's block, which is always a leaf of that BFS tree.
    """
    blocks = [tuple(sorted(b)) for b in blocks]
    if len(blocks) < 2:
        raise InvalidInputError("need at least two blocks to drop one")
    if not is_block_tree(g, blocks, len(blocks[0])):
        raise InvalidInputError("blocks do not form a 2-block-tree")
    holders = [i for i, b in enumerate(blocks) if v in b]
    if not holders:
        raise InvalidInputError(f"vertex {v} is in no block")
    leaf = _bfs_order(block_adjacency(g, blocks), holders[0])[-1]
    return tuple(b for i, b in enumerate(blocks) if i != leaf)


@dataclass(frozen=True)
class Encoding:
    # DFS preorder of the encoding tree: (parent position, child rank); the root is (-1, 0).
    tree: Tuple[Tuple[int, int], ...]
    xi: Tuple[int, ...]

    def to_dict(self) -> Dict[str, Any]:
        return {"tree": [list(p) for p in self.tree], "xi": list(self.xi)}


def encode(g: Graph, v: int, blocks: Sequence[Sequence[int]]) -> Encoding:
    """DFS encoding of a 2-block-tree containing v.

    Each visited block records the index of itself among the connected sets
    anchored at its entry vertex; a block reached through vertex u' of the
    distance-2 layer of block C becomes the rank(u')-th child of C.
    """
    blocks = [tuple(sorted(b)) for b in blocks]
    if not blocks or not is_block_tree(g, blocks, len(blocks[0])):
        raise InvalidInputError("blocks do not form a 2-block-tree")
    owner = {x: i for i, b in enumerate(blocks) for x in b}
    if v not in owner:
        raise InvalidInputError(f"vertex {v} is in no block")

    visited = [False] * len(blocks)
    tree: List[Tuple[int, int]] = []
    xi: List[int] = []

    def visit(i: int, u: int, parent: int, rank: int) -> None:
        visited[i] = True
        position = len(tree)
        tree.append((parent, rank))
        xi.append(anchored_index(g, u, blocks[i]))
        for r, w in enumerate(sorted(g.layer(blocks[i], 2)), start=1):
            j = owner.get(w)
            if j is not None and not visited[j]:
                visit(j, w, position, r)

    visit(owner[v], v, -1, 0)
    return Encoding(tree=tuple(tree), xi=tuple(xi))


def enumerate_block_trees(g: Graph, v: int, theta: int, ell: int) -> List[Tuple[Block, ...]]:
    """Every 2-block-tree with ell blocks of size theta containing v, sorted."""
    if theta < 1 or ell < 1:
        raise InvalidInputError("theta and ell must be >= 1")
    _check_vertices(g, [v])
    pool: Set[Block] = set()
    for x in range(g.num_vertices):
        pool.update(connected_subsets(g, x, theta))
    closed = {b: set(b) | g.neighbourhood(b) for b in pool}
    ring = {b: g.layer(b, 2) for b in pool}

    level = {frozenset([b]) for b in pool if v in b}
    for _ in range(ell - 1):
        grown: Set[FrozenSet[Block]] = set()
        for tree in level:
            blocked = set().union(*(closed[b] for b in tree))
            reach = set().union(*(ring[b] for b in tree))
            for b in pool:
                if b not in tree and reach.intersection(b) and not blocked.intersection(b):
                    grown.add(tree | {b})
        level = grown
    return sorted(tuple(sorted(t)) for t in level)


@dataclass
class InjectivityReport:
    vertex: int
    theta: int
    ell: int
    count: int
    bound: Optional[float]
    injective: bool
    collisions: List[List[List[int]]] = field(default_factory=list)

    @property
    def within_bound(self) -> bool:
        return self.bound is None or self.count <= self.bound

    def to_dict(self) -> Dict[str, Any]:
        return {
            "vertex": self.vertex,
            "theta": self.theta,
            "ell": self.ell,
            "count": self.count,
            "bound": self.bound,
            "injective": self.injective,
            "within_bound": self.within_bound,
            "collisions": self.collisions,
        }


def check_injective(g: Graph, v: int, theta: int, ell: int) -> InjectivityReport:
    trees = enumerate_block_trees(g, v, theta, ell)
    seen: Dict[Encoding, Tuple[Block, ...]] = {}
    collisions: List[List[List[int]]] = []
    for tree in trees:
        code = encode(g, v, tree)
        if code in seen:
            collisions.append([list(b) for b in seen[code]] + [list(b) for b in tree])
        else:
            seen[code] = tree
    d = g.max_degree
    return InjectivityReport(
        vertex=v,
        theta=theta,
        ell=ell,
        count=len(trees),
        bound=block_tree_bound(theta, d, ell) if d >= 1 else None,
        injective=not collisions,
        collisions=collisions,
    )


def residual_components(g: Graph, c: Iterable[int], blocks: Sequence[Sequence[int]]) -> List[Tuple[int, ...]]:
    """Components of G[C] once the neighbourhoods (in G[C]) of all blocks are removed."""
    region = set(c)
    removed: Set[int] = set()
    for b in blocks:
        removed |= g.neighbourhood(b, within=region)
    return g.induced_components(region - removed)


@dataclass
class AuditReport:
    name: str
    checked: int = 0
    counterexamples: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.counterexamples

    def fail(self, **details: Any) -> None:
        self.counterexamples.append(details)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "check": self.name,
            "passed": self.passed,
            "checked": self.checked,
            "counterexamples": self.counterexamples,
        }


def all_connected_sets(g: Graph, max_size: int) -> List[Block]:
    out: Set[Block] = set()
    for x in range(g.num_vertices):
        for size in range(1, min(max_size, g.num_vertices) + 1):
            out.update(connected_subsets(g, x, size))
    return sorted(out, key=lambda b: (len(b), b))


def audit_generator(g: Graph, theta: int, max_size: int = 9) -> AuditReport:
    """Run the generator from every start in every connected C with theta < |C| <= max_size."""
    report = AuditReport("generate")
    for region in all_connected_sets(g, max_size):
        if len(region) <= theta:
            continue
        for u in region:
            report.checked += 1
            run = generate_block_tree(g, u, region, theta)
            where = {"theta": theta, "u": u, "C": list(region), "blocks": [list(b) for b in run.blocks]}
            if run != generate_block_tree(g, u, region, theta):
                report.fail(reason="nondeterministic", **where)
            if not run.exhausted:
                report.fail(reason="working set not empty", **where)
            if u not in run.blocks[0] or not all(set(b) <= set(region) for b in run.blocks):
                report.fail(reason="blocks outside C or first block misses u", **where)
            if not is_block_tree(g, run.blocks, theta):
                report.fail(reason="not a 2-block-tree", **where)
            if any(len(comp) > theta for comp in residual_components(g, region, run.blocks)):
                report.fail(reason="residual component larger than theta", **where)
            for i in range(1, run.ell):
                dist = g.distances_from([run.anchors[i]], within=set(region))
                if not any(min(dist.get(x, math.inf) for x in run.blocks[j]) == 2 for j in range(i)):
                    report.fail(reason=f"block {i} not at distance 2 from an earlier block", **where)
    return report


def audit_encodings(g: Graph, theta: int, max_ell: int = 3) -> AuditReport:
    """Exhaustive injectivity, counting and block-drop checks at every vertex."""
    report = AuditReport("inject")
    d = g.max_degree
    rank_cap = theta * d * d
    xi_cap = max(1, math.ceil(connected_subgraph_bound(d, theta)))
    for v in range(g.num_vertices):
        for ell in range(1, max_ell + 1):
            result = check_injective(g, v, theta, ell)
            report.checked += result.count
            if not result.injective:
                report.fail(reason="encoding collision", **result.to_dict())
            if not result.within_bound:
                report.fail(reason="block-tree count above bound", **result.to_dict())
            for tree in enumerate_block_trees(g, v, theta, ell):
                code = encode(g, v, tree)
                if len(code.tree) != ell or any(r > rank_cap for _, r in code.tree) or max(code.xi) > xi_cap:
                    report.fail(reason="encoding out of range", vertex=v, blocks=[list(b) for b in tree], **code.to_dict())
                if ell >= 2:
                    rest = drop_block(g, tree, v)
                    if not is_block_tree(g, rest, theta) or not any(v in b for b in rest):
                        report.fail(reason="drop_block broke the tree", vertex=v, blocks=[list(b) for b in tree])
    return report


def audit_counts(g: Graph, max_ell: int = 4) -> AuditReport:
    report = AuditReport("counts")
    d = g.max_degree
    for v in range(g.num_vertices):
        for ell in range(1, max_ell + 1):
            count = count_connected_subgraphs(g, v, ell)
            report.checked += 1
            if ell == 1 and count != 1:
                report.fail(reason="singleton count", vertex=v, ell=ell, count=count)
            elif ell >= 2 and count > connected_subgraph_bound(d, ell):
                report.fail(
                    reason="connected-subgraph count above bound",
                    vertex=v,
                    ell=ell,
                    count=count,
                    bound=connected_subgraph_bound(d, ell),
                )
    return report
