"""Brute-force ground truth for small instances.

Every distribution here is a push-forward of the uniform law on proper list
colourings, so probabilities are kept as integer counts over a common total
and converted to floats (or Fractions) only on request. Enumeration is
lexicographic, vertex 0 most significant.
"""
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .assignments import ProjectedConfig
from .errors import BudgetExceededError, EmptySupportError, PreconditionUnmetError
from .hypergraph import Hypergraph, pruned_component
from .projection import ProjectionScheme

logger = logging.getLogger(__name__)

ENUMERATION_BUDGET = 10**8
_CHUNK = 1 << 16


@dataclass(frozen=True)
class ExactDistribution:
    support: Tuple[Hashable, ...]
    counts: Tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.support) != len(self.counts):
            raise ValueError("support and counts differ in length")
        if len(set(self.support)) != len(self.support):
            raise ValueError("support must be deduplicated")
        if any(c < 0 for c in self.counts):
            raise ValueError("counts must be non-negative")
        if self.total == 0:
            raise EmptySupportError("distribution has no mass")

    @classmethod
    def from_counter(cls, counter: Mapping[Hashable, int], keys: Optional[Iterable[Hashable]] = None) -> "ExactDistribution":
        """Sorted support; `keys` forces a fixed support (missing keys count 0)."""
        support = tuple(sorted(counter) if keys is None else keys)
        return cls(support, tuple(int(counter.get(x, 0)) for x in support))

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def probs(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=np.float64) / float(self.total)

    def fractions(self) -> Dict[Hashable, Fraction]:
        t = self.total
        return {x: Fraction(c, t) for x, c in zip(self.support, self.counts) if c}

    def prob(self, x: Hashable) -> float:
        try:
            return self.counts[self.support.index(x)] / self.total
        except ValueError:
            return 0.0

    def as_mapping(self) -> Dict[Hashable, float]:
        t = float(self.total)
        return {x: c / t for x, c in zip(self.support, self.counts)}

    def push_forward(self, fn: Callable[[Hashable], Hashable], keys: Optional[Iterable[Hashable]] = None) -> "ExactDistribution":
        out: Counter = Counter()
        for x, c in zip(self.support, self.counts):
            out[fn(x)] += c
        return ExactDistribution.from_counter(out, keys=keys)


Distribution = Union[ExactDistribution, Mapping[Hashable, float]]


def _as_probabilities(p: Distribution) -> Dict[Hashable, float]:
    if isinstance(p, ExactDistribution):
        return p.as_mapping()
    total = float(sum(p.values()))
    if total <= 0:
        raise EmptySupportError("histogram has no mass")
    return {x: float(w) / total for x, w in p.items()}


def tv_distance(p: Distribution, r: Distribution) -> float:
    """Half the L1 distance; histograms (raw counts) are normalised first."""
    pp = _as_probabilities(p)
    rr = _as_probabilities(r)
    return 0.5 * sum(abs(pp.get(x, 0.0) - rr.get(x, 0.0)) for x in set(pp) | set(rr))


def enumerate_proper(
    h: Hypergraph,
    lists: Sequence[Sequence[int]],
    vertices: Optional[Sequence[int]] = None,
    edge_ids: Optional[Sequence[int]] = None,
    budget: int = ENUMERATION_BUDGET,
) -> np.ndarray:
    """All proper list colourings, one row per colouring, columns in `vertices` order.

    `lists[i]` is the list of `vertices[i]` (default: all of V). Only the
    edges in `edge_ids` (default: all, which must lie inside `vertices`) are
    checked for monochromacy.
    """
    verts = list(range(h.n)) if vertices is None else [int(v) for v in vertices]
    if len(lists) != len(verts):
        raise ValueError("need exactly one colour list per vertex")
    sorted_lists = [np.asarray(sorted(set(int(c) for c in lst)), dtype=np.int64) for lst in lists]
    shape = tuple(len(lst) for lst in sorted_lists)
    total = math.prod(shape)
    if total > budget:
        raise BudgetExceededError(f"{total} assignments exceed the enumeration budget {budget}")
    logger.debug("enumerating %d list assignments over %d vertices", total, len(verts))
    if total == 0:
        return np.zeros((0, len(verts)), dtype=np.int64)
    if not verts:
        return np.zeros((1, 0), dtype=np.int64)

    position = {v: i for i, v in enumerate(verts)}
    ids = range(h.m) if edge_ids is None else edge_ids
    local = np.array([[position[v] for v in h.edges[e]] for e in ids], dtype=np.int64).reshape(-1, h.k)

    found: List[np.ndarray] = []
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(total, start + _CHUNK))
        digits = np.unravel_index(idx, shape)
        rows = np.stack([sorted_lists[i][digits[i]] for i in range(len(verts))], axis=1)
        if local.size:
            coloured = rows[:, local]
            mono = (coloured == coloured[:, :, :1]).all(axis=2).any(axis=1)
            rows = rows[~mono]
        found.append(rows)
    return np.concatenate(found, axis=0)


def colour_lists(scheme: ProjectionScheme, y: ProjectedConfig, vertices: Optional[Sequence[int]] = None) -> List[Tuple[int, ...]]:
    """Q_v = h^{-1}(Y_v) on the domain of Y, [q] elsewhere."""
    verts = list(range(y.n)) if vertices is None else list(vertices)
    lows, sizes = scheme.list_bounds(y.values[np.asarray(verts, dtype=np.int64)])
    return [tuple(range(int(lo), int(lo + sz))) for lo, sz in zip(lows, sizes)]


def uniform_distribution(h: Hypergraph, lists: Sequence[Sequence[int]], budget: int = ENUMERATION_BUDGET) -> ExactDistribution:
    rows = enumerate_proper(h, lists, budget=budget)
    if rows.shape[0] == 0:
        raise EmptySupportError("no proper list colouring exists")
    return ExactDistribution(tuple(tuple(int(c) for c in row) for row in rows), (1,) * rows.shape[0])


def vertex_marginals(h: Hypergraph, lists: Sequence[Sequence[int]], budget: int = ENUMERATION_BUDGET) -> List[ExactDistribution]:
    """mu_v for every vertex, each supported on the vertex's own list."""
    rows = enumerate_proper(h, lists, budget=budget)
    if rows.shape[0] == 0:
        raise EmptySupportError("no proper list colouring exists")
    out = []
    for v in range(h.n):
        counts = Counter(int(c) for c in rows[:, v])
        out.append(ExactDistribution.from_counter(counts, keys=sorted(set(int(c) for c in lists[v]))))
    return out


def conditional_distribution(
    h: Hypergraph,
    scheme: ProjectionScheme,
    subset: Sequence[int],
    y: ProjectedConfig,
    budget: int = ENUMERATION_BUDGET,
) -> ExactDistribution:
    """mu^{Y_Lambda}_S by enumerating all of V (no pruning)."""
    cols = sorted(set(int(v) for v in subset))
    rows = enumerate_proper(h, colour_lists(scheme, y), budget=budget)
    if rows.shape[0] == 0:
        raise EmptySupportError("no proper colouring is consistent with Y")
    counts = Counter(tuple(int(c) for c in row) for row in rows[:, cols])
    return ExactDistribution.from_counter(counts)


def conditional_marginal(
    h: Hypergraph,
    scheme: ProjectionScheme,
    v: int,
    y: ProjectedConfig,
    budget: int = ENUMERATION_BUDGET,
) -> ExactDistribution:
    """mu^{Y}_v over [q], enumerating only v's pruned component.

    Y is read on V minus {v}; a value at v itself is ignored.
    """
    y_rest = y.without([v])
    comp = pruned_component(h, y_rest, v)
    rows = enumerate_proper(
        h,
        colour_lists(scheme, y_rest, comp.vertices),
        vertices=comp.vertices,
        edge_ids=comp.edges,
        budget=budget,
    )
    if rows.shape[0] == 0:
        raise EmptySupportError(f"no proper colouring of vertex {v}'s component is consistent with Y")
    col = comp.vertices.index(v)
    counts = Counter(int(c) for c in rows[:, col])
    return ExactDistribution.from_counter(counts, keys=range(1, scheme.q + 1))


def projected_marginal(
    h: Hypergraph,
    scheme: ProjectionScheme,
    v: int,
    y: ProjectedConfig,
    budget: int = ENUMERATION_BUDGET,
) -> ExactDistribution:
    """nu^{Y}_v over [s]: the bucket law of v given Y on V minus {v}."""
    return conditional_marginal(h, scheme, v, y, budget=budget).push_forward(
        scheme.evaluate, keys=range(1, scheme.s + 1)
    )


def projected_distribution(h: Hypergraph, scheme: ProjectionScheme, budget: int = ENUMERATION_BUDGET) -> ExactDistribution:
    """nu as the image of mu under h."""
    rows = enumerate_proper(h, [range(1, scheme.q + 1)] * h.n, budget=budget)
    if rows.shape[0] == 0:
        raise EmptySupportError("no proper colouring exists")
    images = scheme.evaluate_many(rows)
    return ExactDistribution.from_counter(Counter(tuple(int(b) for b in row) for row in images))


def projected_distribution_direct(h: Hypergraph, scheme: ProjectionScheme, budget: int = ENUMERATION_BUDGET) -> ExactDistribution:
    """nu(tau) from per-image list-colouring counts; zero-mass images are dropped."""
    if scheme.s**h.n > budget:
        raise BudgetExceededError(f"{scheme.s}^{h.n} images exceed the enumeration budget {budget}")
    counts: Dict[Tuple[int, ...], int] = {}
    for tau in product(range(1, scheme.s + 1), repeat=h.n):
        lists = [scheme.preimage(j) for j in tau]
        c = enumerate_proper(h, lists, budget=budget).shape[0]
        if c:
            counts[tau] = c
    if not counts:
        raise EmptySupportError("no proper colouring exists")
    return ExactDistribution.from_counter(counts)


@dataclass
class StationarityReport:
    states: int
    positive_states: int
    full_support: bool
    balanced: bool
    stationary: bool
    max_violation: float = 0.0

    def to_dict(self) -> Dict[str, object]:
        return {
            "states": self.states,
            "positive_states": self.positive_states,
            "full_support": self.full_support,
            "balanced": self.balanced,
            "stationary": self.stationary,
            "max_violation": self.max_violation,
        }


def scan_stationarity(h: Hypergraph, scheme: ProjectionScheme, budget: int = ENUMERATION_BUDGET) -> StationarityReport:
    """Check the single-site bucket kernels against nu, in exact arithmetic.

    nu comes from per-image counting while each kernel row comes from the
    component-restricted conditional marginal, so the check ties the two
    oracle paths together: detailed balance nu(a)P_v(a,b) = nu(b)P_v(b,a)
    and stationarity nu P_v = nu for every vertex v.
    """
    nu = projected_distribution_direct(h, scheme, budget=budget).fractions()
    states = scheme.s**h.n
    worst = Fraction(0)
    balanced = True
    stationary = True
    for v in range(h.n):
        kernel: Dict[Tuple[int, ...], Dict[int, Fraction]] = {}
        for tau in nu:
            key = tau[:v] + (0,) + tau[v + 1:]
            if key in kernel:
                continue
            y = ProjectedConfig(np.asarray(key, dtype=np.int64), scheme.s)
            kernel[key] = projected_marginal(h, scheme, v, y, budget=budget).fractions()

        pushed: Dict[Tuple[int, ...], Fraction] = {}
        for tau, mass in nu.items():
            key = tau[:v] + (0,) + tau[v + 1:]
            for b, p in kernel[key].items():
                target = tau[:v] + (b,) + tau[v + 1:]
                pushed[target] = pushed.get(target, Fraction(0)) + mass * p
                back = kernel[key].get(tau[v], Fraction(0))
                gap = abs(mass * p - nu.get(target, Fraction(0)) * back)
                if gap:
                    balanced = False
                    worst = max(worst, gap)
        for tau in set(nu) | set(pushed):
            gap = abs(pushed.get(tau, Fraction(0)) - nu.get(tau, Fraction(0)))
            if gap:
                stationary = False
                worst = max(worst, gap)
    return StationarityReport(
        states=states,
        positive_states=len(nu),
        full_support=len(nu) == states,
        balanced=balanced,
        stationary=stationary,
        max_violation=float(worst),
    )


def empirical_marginals(samples: np.ndarray, q: int) -> List[ExactDistribution]:
    """Per-vertex colour histograms of a (runs x n) sample array."""
    samples = np.asarray(samples, dtype=np.int64)
    out = []
    for v in range(samples.shape[1]):
        counts = np.bincount(samples[:, v], minlength=q + 1)[1:]
        out.append(ExactDistribution(tuple(range(1, q + 1)), tuple(int(c) for c in counts)))
    return out


@dataclass
class UniformityEntry:
    vertex: int
    colour: int
    prob: float
    lower: float
    upper: float

    @property
    def ok(self) -> bool:
        return self.lower - 1e-12 <= self.prob <= self.upper + 1e-12


@dataclass
class LocalUniformityReport:
    r: float
    q0: int
    q1: int
    max_degree: int
    entries: List[UniformityEntry] = field(default_factory=list)

    @property
    def violations(self) -> List[UniformityEntry]:
        return [e for e in self.entries if not e.ok]

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> Dict[str, object]:
        return {
            "r": self.r,
            "q0": self.q0,
            "q1": self.q1,
            "max_degree": self.max_degree,
            "checked": len(self.entries),
            "violations": [
                {"vertex": e.vertex, "colour": e.colour, "prob": e.prob, "lower": e.lower, "upper": e.upper}
                for e in self.violations
            ],
            "passed": self.passed,
        }


def local_uniformity_precondition(h: Hypergraph, lists: Sequence[Sequence[int]], r: float) -> bool:
    sizes = [len(set(lst)) for lst in lists]
    if not sizes:
        return False
    q0, q1 = min(sizes), max(sizes)
    return r >= h.k >= 2 and q0**h.k >= math.e * q1 * r * h.max_degree


def local_uniformity_check(
    h: Hypergraph,
    lists: Sequence[Sequence[int]],
    r: float,
    budget: int = ENUMERATION_BUDGET,
) -> LocalUniformityReport:
    """Exact mu_v(c) against the envelope exp(-+2/r)/|Q_v|."""
    sizes = [len(set(lst)) for lst in lists]
    if not local_uniformity_precondition(h, lists, r):
        raise PreconditionUnmetError(
            f"need r >= k >= 2 and q0^k >= e*q1*r*Delta (k={h.k}, r={r}, "
            f"q0={min(sizes, default=0)}, q1={max(sizes, default=0)}, Delta={h.max_degree})"
        )
    report = LocalUniformityReport(r=r, q0=min(sizes), q1=max(sizes), max_degree=h.max_degree)
    for v, marginal in enumerate(vertex_marginals(h, lists, budget=budget)):
        size = sizes[v]
        lower = math.exp(-2.0 / r) / size
        upper = math.exp(2.0 / r) / size
        for c, p in zip(marginal.support, marginal.probs):
            report.entries.append(UniformityEntry(vertex=v, colour=int(c), prob=float(p), lower=lower, upper=upper))
    return report
