"""Coupled idealised scans and empirical mixing curves.

The idealised scan resamples Y(v) from the exact projected conditional
marginal (oracle enumeration over v's pruned component). Two chains are
coupled vertex by vertex with a maximal coupling of their two conditional
marginals, so agreement, once reached, is never lost.
"""
import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Hashable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .assignments import UNSET, ProjectedConfig
from .errors import EmptySupportError, InvalidInputError
from .hypergraph import Hypergraph
from .oracle import ENUMERATION_BUDGET, ExactDistribution, projected_marginal
from .projection import ProjectionScheme, build

logger = logging.getLogger(__name__)

CSV_HEADER = ("T", "vertex", "discrepancy_rate", "stderr")
RANDOM_PAIRS = 10

Categorical = Union[ExactDistribution, Sequence[float], np.ndarray]


def _aligned(p: Categorical, r: Categorical) -> Tuple[List[Hashable], np.ndarray, np.ndarray]:
    if isinstance(p, ExactDistribution) and isinstance(r, ExactDistribution):
        support = sorted(set(p.support) | set(r.support))
        pm, rm = p.as_mapping(), r.as_mapping()
        return support, np.array([pm.get(x, 0.0) for x in support]), np.array([rm.get(x, 0.0) for x in support])
    pv = np.asarray(p, dtype=np.float64)
    rv = np.asarray(r, dtype=np.float64)
    if pv.shape != rv.shape or pv.ndim != 1:
        raise InvalidInputError("distributions must be probability vectors of equal length")
    return list(range(pv.size)), pv / pv.sum(), rv / rv.sum()


def maximal_coupling(p: Categorical, r: Categorical, rng: np.random.Generator) -> Tuple[Hashable, Hashable]:
    """Draw (x, y) with x ~ p, y ~ r and Pr[x != y] = d_TV(p, r).

    Probability vectors are indexed 0..K-1; ExactDistributions return values
    from their support.
    """
    support, pv, rv = _aligned(p, r)
    overlap = np.minimum(pv, rv)
    omega = float(overlap.sum())
    if omega >= 1.0 - 1e-12 or rng.random() < omega:
        i = int(rng.choice(len(support), p=overlap / omega))
        return support[i], support[i]
    res_p = pv - overlap
    res_r = rv - overlap
    i = int(rng.choice(len(support), p=res_p / res_p.sum()))
    j = int(rng.choice(len(support), p=res_r / res_r.sum()))
    return support[i], support[j]


class MarginalCache:
    """Memoised nu_v given the buckets on V minus {v}; safe to reuse across runs."""

    def __init__(self, h: Hypergraph, scheme: ProjectionScheme, budget: int = ENUMERATION_BUDGET) -> None:
        self.h = h
        self.scheme = scheme
        self.budget = budget
        self._table: Dict[Tuple[int, bytes], Tuple[np.ndarray, np.ndarray]] = {}

    def __len__(self) -> int:
        return len(self._table)

    def probs(self, v: int, values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(buckets, probabilities) of the conditional law of bucket v."""
        cond = values.copy()
        cond[v] = UNSET
        key = (v, cond.tobytes())
        hit = self._table.get(key)
        if hit is None:
            dist = projected_marginal(self.h, self.scheme, v, ProjectedConfig(cond, self.scheme.s), budget=self.budget)
            hit = (np.asarray(dist.support, dtype=np.int64), dist.probs)
            self._table[key] = hit
        return hit


@dataclass
class CoupledState:
    x: ProjectedConfig
    y: ProjectedConfig
    t: int = 0

    @property
    def discrepancy(self) -> Tuple[int, ...]:
        return tuple(int(v) for v in np.flatnonzero(self.x.values != self.y.values))


@dataclass
class CouplingTrace:
    initial: Tuple[int, ...] = ()
    updated: List[int] = field(default_factory=list)
    discrepancies: List[Tuple[int, ...]] = field(default_factory=list)
    final: Optional[CoupledState] = None

    @property
    def coalesced_at(self) -> Optional[int]:
        """First step after which the chains agree everywhere (0 if they start equal)."""
        if self.final is None or self.final.discrepancy:
            return None
        history = [self.initial] + self.discrepancies
        t = len(history)
        while t > 0 and not history[t - 1]:
            t -= 1
        return t


def _full_config(values: Union[ProjectedConfig, Sequence[int]], n: int, s: int) -> np.ndarray:
    arr = np.asarray(values.values if isinstance(values, ProjectedConfig) else values, dtype=np.int64).copy()
    if arr.shape != (n,):
        raise InvalidInputError(f"initial state must assign all {n} vertices")
    if (arr < 1).any() or (arr > s).any():
        raise InvalidInputError(f"initial state must use buckets in [1, {s}] at every vertex")
    return arr


def run_coupled_scan(
    h: Hypergraph,
    q: int,
    x0: Union[ProjectedConfig, Sequence[int]],
    y0: Union[ProjectedConfig, Sequence[int]],
    steps: int,
    seed: Optional[int] = None,
    scheme: Optional[ProjectionScheme] = None,
    cache: Optional[MarginalCache] = None,
) -> CouplingTrace:
    if scheme is None:
        scheme = build(q)
    if cache is None:
        cache = MarginalCache(h, scheme)
    rng = np.random.default_rng(seed)
    x = _full_config(x0, h.n, scheme.s)
    y = _full_config(y0, h.n, scheme.s)

    trace = CouplingTrace(initial=tuple(int(u) for u in np.flatnonzero(x != y)))
    for t in range(1, steps + 1):
        v = t % h.n
        support, px = cache.probs(v, x)
        same_context = np.array_equal(np.delete(x, v), np.delete(y, v))
        if same_context:
            x[v] = y[v] = support[int(rng.choice(support.size, p=px))]
        else:
            _, py = cache.probs(v, y)
            i, j = maximal_coupling(px, py, rng)
            x[v], y[v] = support[i], support[j]
        trace.updated.append(v)
        trace.discrepancies.append(tuple(int(u) for u in np.flatnonzero(x != y)))
    trace.final = CoupledState(ProjectedConfig(x, scheme.s), ProjectedConfig(y, scheme.s), t=steps)
    return trace


def ideal_scan(
    h: Hypergraph,
    scheme: ProjectionScheme,
    y0: Optional[Union[ProjectedConfig, Sequence[int]]],
    steps: int,
    seed: Optional[int] = None,
    cache: Optional[MarginalCache] = None,
) -> ProjectedConfig:
    """The uncoupled idealised scan; a missing y0 starts uniform on [s]^V."""
    if cache is None:
        cache = MarginalCache(h, scheme)
    rng = np.random.default_rng(seed)
    if y0 is None:
        y = rng.integers(1, scheme.s + 1, size=h.n).astype(np.int64)
    else:
        y = _full_config(y0, h.n, scheme.s)
    for t in range(1, steps + 1):
        v = t % h.n
        support, p = cache.probs(v, y)
        y[v] = support[int(rng.choice(support.size, p=p))]
    return ProjectedConfig(y, scheme.s)


def reference_steps(n: int, max_degree: int, epsilon: float) -> int:
    """ceil(50 n ln(n Delta / eps)), the scan length the mixing bound is stated for."""
    return math.ceil(50 * n * math.log(n * max(max_degree, 1) / epsilon))


def default_checkpoints(t_max: int, n: int) -> List[int]:
    """0, then n, 2n, 4n, ... below t_max, then t_max."""
    points = [0]
    t = max(n, 1)
    while t < t_max:
        points.append(t)
        t *= 2
    if t_max > 0:
        points.append(t_max)
    return points


@dataclass(frozen=True)
class CurveRow:
    steps: int
    vertex: int
    rate: float
    stderr: float


@dataclass
class MixingCurve:
    rows: List[CurveRow]
    epsilon: float
    target: float
    reference_steps: int
    pairs: int
    runs: int

    def rate(self, steps: int, vertex: int) -> CurveRow:
        for row in self.rows:
            if row.steps == steps and row.vertex == vertex:
                return row
        raise KeyError((steps, vertex))

    def worst(self, steps: int) -> float:
        return max(row.rate for row in self.rows if row.steps == steps)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in self.rows:
            writer.writerow([row.steps, row.vertex, f"{row.rate:.6f}", f"{row.stderr:.6f}"])
        return buf.getvalue()

    def to_dict(self) -> Dict[str, object]:
        return {
            "epsilon": self.epsilon,
            "target": self.target,
            "reference_steps": self.reference_steps,
            "pairs": self.pairs,
            "runs": self.runs,
            "rows": [[r.steps, r.vertex, r.rate, r.stderr] for r in self.rows],
        }


def initial_pairs(n: int, s: int, rng: np.random.Generator, random_pairs: int = RANDOM_PAIRS) -> List[Tuple[np.ndarray, np.ndarray]]:
    """(all bucket 1, all bucket s) followed by `random_pairs` uniform pairs."""
    pairs = [(np.ones(n, dtype=np.int64), np.full(n, s, dtype=np.int64))]
    for _ in range(random_pairs):
        pairs.append((rng.integers(1, s + 1, size=n), rng.integers(1, s + 1, size=n)))
    return pairs


def _pair_indicators(
    args: Tuple[Hypergraph, ProjectionScheme, np.ndarray, np.ndarray, List[int], List[int]]
) -> Optional[np.ndarray]:
    """(runs x checkpoints x n) discrepancy indicators for one initial pair, or None if infeasible."""
    h, scheme, x0, y0, checkpoints, seeds = args
    cache = MarginalCache(h, scheme)
    t_max = max(checkpoints)
    out = np.zeros((len(seeds), len(checkpoints), h.n), dtype=bool)
    start = x0 != y0
    try:
        for r, seed in enumerate(seeds):
            trace = run_coupled_scan(h, scheme.q, x0, y0, t_max, seed=seed, scheme=scheme, cache=cache)
            for c, t in enumerate(checkpoints):
                if t == 0:
                    out[r, c] = start
                else:
                    out[r, c, list(trace.discrepancies[t - 1])] = True
    except EmptySupportError as exc:
        logger.warning("skipping initial pair with no consistent colouring: %s", exc)
        return None
    return out


def mixing_curve(
    h: Hypergraph,
    q: int,
    epsilon: float,
    checkpoints: Sequence[int],
    runs: int,
    seed: Optional[int] = None,
    random_pairs: int = RANDOM_PAIRS,
    scheme: Optional[ProjectionScheme] = None,
    workers: int = 1,
) -> MixingCurve:
    """Per-vertex discrepancy rates at each checkpoint, maximised over initial pairs.

    The reported stderr is the binomial standard error of the maximising pair.
    """
    if runs < 1:
        raise InvalidInputError("need at least one run per initial pair")
    if not checkpoints or any(t < 0 for t in checkpoints):
        raise InvalidInputError("need at least one checkpoint, all >= 0")
    if scheme is None:
        scheme = build(q)
    points = sorted(set(int(t) for t in checkpoints))
    root = np.random.SeedSequence(seed)
    pair_seq, *run_seqs = root.spawn(1 + 1 + random_pairs)
    pairs = initial_pairs(h.n, scheme.s, np.random.default_rng(pair_seq), random_pairs)
    jobs = [
        (h, scheme, x0, y0, points, [int(c.generate_state(1)[0]) for c in seq.spawn(runs)])
        for (x0, y0), seq in zip(pairs, run_seqs)
    ]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_pair_indicators, jobs))
    else:
        results = [_pair_indicators(job) for job in jobs]
    kept = [res.mean(axis=0) for res in results if res is not None]
    if not kept:
        raise EmptySupportError("no initial pair admits a consistent colouring")

    worst = np.stack(kept).max(axis=0)
    rows = []
    for c, t in enumerate(points):
        for v in range(h.n):
            p = float(worst[c, v])
            rows.append(CurveRow(steps=t, vertex=v, rate=p, stderr=math.sqrt(p * (1.0 - p) / runs)))
    return MixingCurve(
        rows=rows,
        epsilon=epsilon,
        target=epsilon / h.n,
        reference_steps=reference_steps(h.n, h.max_degree, epsilon),
        pairs=len(kept),
        runs=runs,
    )
