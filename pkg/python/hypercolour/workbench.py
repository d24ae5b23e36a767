"""Instance generation, regime checks, graph corpora and scan timing."""
import logging
import math
import time
from dataclasses import dataclass
from itertools import combinations
from typing import Any, Dict, List, Optional, Sequence, Set, Tuple

import networkx as nx
import numpy as np

from .errors import InfeasibleError, InvalidInputError
from .hypergraph import Graph, Hypergraph, validate
from .sampler import derive_params_for, run_scan

logger = logging.getLogger(__name__)

GENERATION_RETRIES = 10**4
REGIME_SLACK = 1e-9
DEFAULT_EPSILON = 0.01

PASS = "pass"
FAIL = "fail"
MARGINAL = "marginal"


@dataclass(frozen=True)
class GenSpec:
    n: int
    k: int
    max_degree: int
    m: int
    seed: Optional[int] = None
    simple: bool = False


def _try_build(spec: GenSpec, rng: np.random.Generator, retries: int) -> Optional[List[Tuple[int, ...]]]:
    degree = np.zeros(spec.n, dtype=np.int64)
    pairs: Set[Tuple[int, int]] = set()
    edges: Set[Tuple[int, ...]] = set()
    for _ in range(spec.m):
        for _attempt in range(retries):
            free = np.flatnonzero(degree < spec.max_degree)
            if free.size < spec.k:
                return None
            edge = tuple(sorted(int(v) for v in rng.choice(free, size=spec.k, replace=False)))
            if edge in edges:
                continue
            edge_pairs = list(combinations(edge, 2))
            if spec.simple and any(p in pairs for p in edge_pairs):
                continue
            break
        else:
            return None
        edges.add(edge)
        pairs.update(edge_pairs)
        degree[list(edge)] += 1
    return sorted(edges)


def generate_instance(spec: GenSpec, retries: int = GENERATION_RETRIES) -> Hypergraph:
    """Random k-uniform hypergraph with m distinct edges and degree <= max_degree.

    Each edge gets up to `retries` candidate draws; a dead end restarts the
    whole instance, again at most `retries` times.
    """
    if spec.n < 0 or spec.k < 1 or spec.m < 0 or spec.max_degree < 0:
        raise InvalidInputError(f"bad generator spec {spec}")
    if spec.m * spec.k > spec.n * spec.max_degree:
        raise InfeasibleError(f"m*k = {spec.m * spec.k} exceeds n*Delta = {spec.n * spec.max_degree}")
    if spec.m and spec.k > spec.n:
        raise InfeasibleError(f"k = {spec.k} exceeds n = {spec.n}")
    rng = np.random.default_rng(spec.seed)
    for attempt in range(retries):
        edges = _try_build(spec, rng, retries)
        if edges is not None:
            if attempt:
                logger.debug("instance generated after %d restarts", attempt)
            return validate(edges, spec.n, spec.k)
    raise InfeasibleError(f"no instance for {spec} within {retries} restarts")


def _status(value: float, threshold: float) -> str:
    if math.isinf(threshold):
        return FAIL
    slack = REGIME_SLACK * max(1.0, abs(threshold))
    if abs(value - threshold) <= slack:
        return MARGINAL
    return PASS if value > threshold else FAIL


def _power_threshold(scale: float, base: float, numerator: float, denominator: float) -> float:
    """scale * base^(numerator/denominator); inf when the denominator is not positive."""
    if denominator <= 0:
        return math.inf
    return scale * base ** (numerator / denominator)


@dataclass(frozen=True)
class RegimeReport:
    """Sufficient conditions of the fast-sampling regime for one instance.

    Only inputs are stored; every threshold and status is recomputed on access.
    """

    n: int
    k: int
    q: int
    max_degree: int
    delta: float
    alpha: float
    epsilon: float = DEFAULT_EPSILON

    @property
    def theta(self) -> int:
        return math.ceil(4.0 / self.delta)

    @property
    def k_threshold(self) -> float:
        return 20.0 * (1.0 + self.delta) / self.delta

    @property
    def q_threshold(self) -> float:
        return _power_threshold(100.0, self.max_degree / self.alpha, 2.0 + self.delta, self.k - 4.0 / self.delta - 4.0)

    @property
    def component_threshold(self) -> float:
        return _power_threshold(100.0, self.max_degree, 2.0 + self.delta, self.k - 4.0 / self.delta - 3.0)

    @property
    def coupling_threshold(self) -> float:
        return _power_threshold(40.0, self.max_degree, 2.0, self.k - 4.0)

    @property
    def rejection_threshold(self) -> float:
        return _power_threshold(100.0, self.max_degree, 2.0, self.k - 3.0)

    @property
    def k_status(self) -> str:
        return _status(self.k, self.k_threshold)

    @property
    def q_status(self) -> str:
        return _status(self.q, self.q_threshold)

    @property
    def k_ok(self) -> bool:
        return self.k_status != FAIL

    @property
    def q_ok(self) -> bool:
        return self.q_status != FAIL

    @property
    def in_regime(self) -> bool:
        return self.k_ok and self.q_ok

    @property
    def runtime_estimate(self) -> float:
        """Delta^2 k^5 n (n Delta/eps)^(alpha/100) ln^4(n Delta q/eps)."""
        d = max(self.max_degree, 1)
        return (
            d**2 * self.k**5 * self.n
            * (self.n * d / self.epsilon) ** (self.alpha / 100.0)
            * math.log(self.n * d * self.q / self.epsilon) ** 4
        )

    def to_dict(self) -> Dict[str, Any]:
        params = derive_params_for(self.n, self.max_degree, self.k, self.q, self.epsilon)

        def finite(x: float) -> Optional[float]:
            return None if math.isinf(x) else x

        return {
            "n": self.n,
            "k": self.k,
            "q": self.q,
            "max_degree": self.max_degree,
            "delta": self.delta,
            "alpha": self.alpha,
            "epsilon": self.epsilon,
            "theta": self.theta,
            "k_threshold": self.k_threshold,
            "k_status": self.k_status,
            "q_threshold": finite(self.q_threshold),
            "q_status": self.q_status,
            "in_regime": self.in_regime,
            "auxiliary": {
                "component": {"threshold": finite(self.component_threshold), "status": _status(self.q, self.component_threshold)},
                "coupling": {"threshold": finite(self.coupling_threshold), "status": _status(self.q, self.coupling_threshold)},
                "rejection": {"threshold": finite(self.rejection_threshold), "status": _status(self.q, self.rejection_threshold)},
            },
            "derived": {
                "eta": params.to_dict()["eta"],
                "steps": params.steps,
                "rejection_trials": params.rejection_trials,
                "component_cap": params.component_cap,
            },
            "runtime_estimate": self.runtime_estimate,
        }


def regime_check_for(
    n: int,
    k: int,
    q: int,
    max_degree: int,
    delta: float,
    alpha: float = 1.0,
    epsilon: float = DEFAULT_EPSILON,
) -> RegimeReport:
    if not delta > 0:
        raise InvalidInputError(f"delta must be > 0, got {delta}")
    if not 0 < alpha <= 1:
        raise InvalidInputError(f"alpha must lie in (0, 1], got {alpha}")
    if not 0 < epsilon < 1:
        raise InvalidInputError(f"epsilon must lie in (0, 1), got {epsilon}")
    return RegimeReport(n=n, k=k, q=q, max_degree=max_degree, delta=delta, alpha=alpha, epsilon=epsilon)


def regime_check(h: Hypergraph, q: int, delta: float, alpha: float = 1.0, epsilon: float = DEFAULT_EPSILON) -> RegimeReport:
    return regime_check_for(h.n, h.k, q, h.max_degree, delta, alpha, epsilon)


def graph_corpus(max_vertices: int = 9, seed: int = 0, random_graphs: int = 3) -> List[Tuple[str, Graph]]:
    """Paths, cycles, stars and seeded G(n, p) graphs with at most max_vertices vertices."""
    corpus: List[Tuple[str, Graph]] = []
    for n in range(2, max_vertices + 1):
        corpus.append((f"path-{n}", Graph.from_networkx(nx.path_graph(n))))
    for n in range(3, max_vertices + 1):
        corpus.append((f"cycle-{n}", Graph.from_networkx(nx.cycle_graph(n))))
    for leaves in range(2, max_vertices):
        corpus.append((f"star-{leaves}", Graph.from_networkx(nx.star_graph(leaves))))
    rng = np.random.default_rng(seed)
    for i in range(random_graphs):
        n = int(rng.integers(max(2, max_vertices - 3), max_vertices + 1))
        g = nx.gnp_random_graph(n, 0.35, seed=int(rng.integers(2**31)))
        corpus.append((f"gnp-{n}-{i}", Graph.from_networkx(g)))
    return corpus


def bench_scan(
    sizes: Sequence[int],
    k: int = 3,
    q: int = 16,
    max_degree: int = 3,
    epsilon: float = 0.1,
    seed: Optional[int] = None,
) -> List[Dict[str, Any]]:
    """Wall-clock timing of one run_scan per size on a generated instance."""
    rows = []
    for n in sizes:
        spec = GenSpec(n=n, k=k, max_degree=max_degree, m=(n * max_degree) // (2 * k), seed=seed)
        h = generate_instance(spec)
        t0 = time.time()
        report = run_scan(h, q, epsilon, seed=seed)
        elapsed = time.time() - t0
        logger.info("n=%d: %d steps in %.2fs", n, report.steps, elapsed)
        rows.append({
            "n": n,
            "m": h.m,
            "k": k,
            "q": q,
            "max_degree": h.max_degree,
            "steps": report.steps,
            "bad_com_count": report.bad_com_count,
            "bad_rej_count": report.bad_rej_count,
            "seconds": round(elapsed, 3),
            "steps_per_second": round(report.steps / elapsed, 1) if elapsed > 0 else None,
        })
    return rows
