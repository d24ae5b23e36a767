"""Projected systematic scan sampler for proper hypergraph colourings.

run_scan walks vertices in label order (t mod n), resampling each vertex's
bucket from an approximate conditional draw; sample_subroutine prunes
satisfied edges and rejection-samples each remaining component, falling back
to a uniform draw when a component is too large (flag "com") or rejection
runs out of trials (flag "rej").
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .assignments import UNSET, Colouring, ProjectedConfig
from .errors import DegenerateInstanceError, InvalidInputError, InvalidQError
from .hypergraph import Component, Hypergraph, components, satisfied_mask
from .projection import ProjectionScheme, build

logger = logging.getLogger(__name__)

FLAG_COM = "com"
FLAG_REJ = "rej"

# R can overflow for tiny eta; beyond this the guard is effectively off anyway.
MAX_REJECTION_TRIALS = 2**62
REJECTION_BATCH_MAX = 1024
# Trial bound used when the R guard is disabled.
GUARD_FREE_TRIALS = 10**7


@dataclass(frozen=True)
class SamplerOverrides:
    steps: Optional[int] = None
    rejection_trials: Optional[int] = None
    component_cap: Optional[int] = None
    s: Optional[int] = None
    disable_guards: bool = False


@dataclass(frozen=True)
class SamplerParams:
    n: int
    max_degree: int
    k: int
    q: int
    epsilon: float
    steps: int
    zeta: float
    eta: float
    # None means unbounded (guard disabled).
    rejection_trials: Optional[int]
    component_cap: Optional[int]
    s: Optional[int] = None

    @property
    def guards_disabled(self) -> bool:
        return self.rejection_trials is None and self.component_cap is None

    def to_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        out["eta"] = None if math.isinf(self.eta) else self.eta
        return out


@dataclass(frozen=True)
class SampleResult:
    colouring: Colouring
    flag: Optional[str] = None
    component_count: int = 0


@dataclass(frozen=True)
class StepRecord:
    t: int
    vertex: int
    colour: int
    bucket: int
    flag: Optional[str]


@dataclass(eq=False)
class RunReport:
    colouring: Colouring
    projection: ProjectedConfig
    bad_com_count: int
    bad_rej_count: int
    steps: int
    seed: Optional[int]
    params: SamplerParams
    final_flag: Optional[str] = None
    step_records: Optional[List[StepRecord]] = None

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "seed": self.seed,
            "steps": self.steps,
            "bad_com_count": self.bad_com_count,
            "bad_rej_count": self.bad_rej_count,
            "final_flag": self.final_flag,
            "colouring": [int(x) for x in self.colouring.values],
            "projection": [int(x) for x in self.projection.values],
            "params": self.params.to_dict(),
        }
        if self.step_records is not None:
            out["step_flags"] = [r.flag or "" for r in self.step_records]
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RunReport):
            return NotImplemented
        return self.to_dict() == other.to_dict()


def derive_params_for(
    n: int,
    max_degree: int,
    k: int,
    q: int,
    epsilon: float,
    overrides: Optional[SamplerOverrides] = None,
) -> SamplerParams:
    """T, zeta, eta, R and the component cap, with natural logarithms.

    A degree-0 instance takes eta = inf, so R collapses to ceil(10 ln(n/zeta));
    the other formulas use max(Delta, 1) since nothing can be pruned anyway.
    """
    if n < 1:
        raise DegenerateInstanceError("instance has no vertices")
    if not 0.0 < epsilon < 1.0:
        raise InvalidInputError(f"epsilon must lie in (0, 1), got {epsilon}")
    if q < 1:
        raise InvalidQError(f"q must be >= 1, got {q}")

    deg = max(max_degree, 1)
    steps = math.ceil(50 * n * math.log(2 * n * deg / epsilon))
    zeta = epsilon / (4 * steps)
    eta = math.inf if max_degree == 0 else (1.0 / max_degree) * (q / 100.0) ** ((k - 3) / 2.0)
    exponent = 0.0 if math.isinf(eta) else 1.0 / (1000.0 * eta)

    log_n_zeta = math.log(n / zeta)
    log_r = math.log(10.0) + exponent * math.log(n * deg / zeta) + math.log(log_n_zeta)
    if log_r >= math.log(MAX_REJECTION_TRIALS):
        logger.warning("rejection budget R overflows (eta=%g); clamping to %d", eta, MAX_REJECTION_TRIALS)
        rejection_trials: Optional[int] = MAX_REJECTION_TRIALS
    else:
        rejection_trials = math.ceil(10.0 * (n * deg / zeta) ** exponent * log_n_zeta)
    component_cap: Optional[int] = math.ceil(4 * deg * k**3 * math.log(n * deg / zeta))

    params = SamplerParams(
        n=n,
        max_degree=max_degree,
        k=k,
        q=q,
        epsilon=epsilon,
        steps=steps,
        zeta=zeta,
        eta=eta,
        rejection_trials=rejection_trials,
        component_cap=component_cap,
    )
    if overrides is None:
        return params
    if overrides.steps is not None:
        if overrides.steps < 0:
            raise InvalidInputError("step override must be >= 0")
        params = replace(params, steps=overrides.steps)
    if overrides.rejection_trials is not None:
        params = replace(params, rejection_trials=overrides.rejection_trials)
    if overrides.component_cap is not None:
        params = replace(params, component_cap=overrides.component_cap)
    if overrides.s is not None:
        params = replace(params, s=overrides.s)
    if overrides.disable_guards:
        params = replace(params, rejection_trials=None, component_cap=None)
    return params


def derive_params(
    h: Hypergraph,
    q: int,
    epsilon: float,
    overrides: Optional[SamplerOverrides] = None,
) -> SamplerParams:
    return derive_params_for(h.n, h.max_degree, h.k, q, epsilon, overrides)


def rejection_sample(
    h: Hypergraph,
    component: Component,
    scheme: ProjectionScheme,
    y: ProjectedConfig,
    trials: Optional[int],
    rng: np.random.Generator,
) -> Optional[np.ndarray]:
    """Colours for component.vertices (same order), or None after `trials` failures.

    `trials=None` (guard disabled) is bounded by GUARD_FREE_TRIALS instead.
    Trials are drawn in growing batches; the first proper draw in sequence
    wins, which is the same law as drawing one at a time.
    """
    if trials is not None and trials < 1:
        return None
    verts = np.asarray(component.vertices, dtype=np.int64)
    lows, sizes = scheme.list_bounds(y.values[verts])
    if not component.edges:
        return lows + rng.integers(0, sizes)

    local_edges = np.searchsorted(verts, h.edge_array[list(component.edges)])
    limit = GUARD_FREE_TRIALS if trials is None else trials
    done = 0
    batch = 1
    while done < limit:
        b = min(batch, limit - done)
        draws = lows + rng.integers(0, sizes, size=(b, verts.size))
        coloured = draws[:, local_edges]
        mono = (coloured == coloured[:, :, :1]).all(axis=2).any(axis=1)
        proper = np.flatnonzero(~mono)
        if proper.size:
            return draws[proper[0]]
        done += b
        batch = min(batch * 2, REJECTION_BATCH_MAX)
    if trials is None:
        logger.warning("no proper draw for a %d-edge component in %d guard-free trials", len(component.edges), limit)
    return None


def _uniform_fallback(n: int, q: int, subset: Tuple[int, ...], rng: np.random.Generator, flag: str) -> SampleResult:
    values = np.zeros(n, dtype=np.int64)
    values[list(subset)] = rng.integers(1, q + 1, size=len(subset))
    return SampleResult(Colouring(values, q), flag=flag)


def forced_monochromatic(h: Hypergraph, component: Component, scheme: ProjectionScheme, y: ProjectedConfig) -> bool:
    """True if some edge of the component has one and the same single-colour list at every vertex.

    Such an edge is monochromatic in every list colouring, so the component
    has no proper colouring consistent with Y.
    """
    if not component.edges:
        return False
    lows, sizes = scheme.list_bounds(y.values[h.edge_array[list(component.edges)]])
    return bool(((sizes == 1).all(axis=1) & (lows == lows[:, :1]).all(axis=1)).any())


def sample_subroutine(
    h: Hypergraph,
    scheme: ProjectionScheme,
    subset: Sequence[int],
    y: ProjectedConfig,
    params: SamplerParams,
    rng: np.random.Generator,
    satisfied: Optional[np.ndarray] = None,
) -> SampleResult:
    """Draw X_S from the conditional law given Y on its domain.

    Returns an exact draw from that law unless a guard fires, in which case
    X_S is uniform on [q]^S and the result carries the guard's flag. A
    component with no consistent proper colouring takes the "rej" exit
    whether or not R is bounded. `satisfied` may carry satisfied_mask(h, y).
    """
    subset_t = tuple(sorted(set(int(v) for v in subset)))
    comps = components(h, y, starts=subset_t, cap=params.component_cap, satisfied=satisfied)
    if comps and comps[-1].cap_exceeded:
        logger.debug("component guard fired at vertex %d (> %s edges)", comps[-1].vertices[0], params.component_cap)
        return _uniform_fallback(h.n, scheme.q, subset_t, rng, FLAG_COM)

    values = np.zeros(h.n, dtype=np.int64)
    for comp in comps:
        if forced_monochromatic(h, comp, scheme, y):
            logger.debug("component at vertex %d has an edge forced monochromatic", comp.vertices[0])
            return _uniform_fallback(h.n, scheme.q, subset_t, rng, FLAG_REJ)
        x = rejection_sample(h, comp, scheme, y, params.rejection_trials, rng)
        if x is None:
            logger.debug("rejection guard fired on a %d-edge component", len(comp.edges))
            return _uniform_fallback(h.n, scheme.q, subset_t, rng, FLAG_REJ)
        values[list(comp.vertices)] = x

    out = np.zeros(h.n, dtype=np.int64)
    out[list(subset_t)] = values[list(subset_t)]
    return SampleResult(Colouring(out, scheme.q), flag=None, component_count=len(comps))


def run_scan(
    h: Hypergraph,
    q: int,
    epsilon: float,
    seed: Optional[int] = None,
    overrides: Optional[SamplerOverrides] = None,
    record_steps: bool = False,
) -> RunReport:
    params = derive_params(h, q, epsilon, overrides)
    scheme = build(q, params.s)
    rng = np.random.default_rng(seed)

    y = rng.integers(1, scheme.s + 1, size=h.n).astype(np.int64)
    # Satisfaction of every edge under the full Y, refreshed around each updated vertex.
    satisfied = satisfied_mask(h, ProjectedConfig(y, scheme.s))
    records: Optional[List[StepRecord]] = [] if record_steps else None
    bad_com = bad_rej = 0

    for t in range(1, params.steps + 1):
        v = t % h.n
        incident = h.incidence[v]
        cond = y.copy()
        cond[v] = UNSET
        cond_y = ProjectedConfig(cond, scheme.s)
        cond_satisfied = satisfied.copy()
        cond_satisfied[list(incident)] = satisfied_mask(h, cond_y, incident)
        result = sample_subroutine(h, scheme, (v,), cond_y, params, rng, satisfied=cond_satisfied)
        if result.flag == FLAG_COM:
            bad_com += 1
        elif result.flag == FLAG_REJ:
            bad_rej += 1
        colour = int(result.colouring.values[v])
        y[v] = scheme.evaluate(colour)
        satisfied[list(incident)] = satisfied_mask(h, ProjectedConfig(y, scheme.s), incident)
        if records is not None:
            records.append(StepRecord(t=t, vertex=v, colour=colour, bucket=int(y[v]), flag=result.flag))

    final_y = ProjectedConfig(y.copy(), scheme.s)
    final = sample_subroutine(h, scheme, range(h.n), final_y, params, rng, satisfied=satisfied)
    if final.flag == FLAG_COM:
        bad_com += 1
    elif final.flag == FLAG_REJ:
        bad_rej += 1

    return RunReport(
        colouring=final.colouring,
        projection=ProjectedConfig(y, scheme.s),
        bad_com_count=bad_com,
        bad_rej_count=bad_rej,
        steps=params.steps,
        seed=seed,
        params=params,
        final_flag=final.flag,
        step_records=records,
    )


def spawn_seeds(seed: Optional[int], count: int) -> List[int]:
    """Independent per-run seeds from one root seed."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [int(c.generate_state(1)[0]) for c in children]


def _run_one(args: Tuple[Hypergraph, int, float, int, Optional[SamplerOverrides]]) -> RunReport:
    h, q, epsilon, seed, overrides = args
    return run_scan(h, q, epsilon, seed=seed, overrides=overrides)


def run_batch(
    h: Hypergraph,
    q: int,
    epsilon: float,
    seeds: Sequence[int],
    overrides: Optional[SamplerOverrides] = None,
    workers: int = 1,
) -> List[RunReport]:
    """Independent scans, one per seed, returned in seed order."""
    jobs = [(h, q, epsilon, int(seed), overrides) for seed in seeds]
    if workers <= 1 or len(jobs) <= 1:
        return [_run_one(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
