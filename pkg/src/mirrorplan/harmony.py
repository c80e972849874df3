"""Modified harmony search for constrained multi-objective minimization.

The engine keeps a fixed-size memory of evaluated candidates over a box-bounded
real vector. Feasible members are ranked by objective dominance (non-dominated
fronts, ties by an equal-weight normalized objective sum); infeasible members
rank below all feasible ones, ordered by how many other infeasible members
dominate them constraint-wise. A new candidate replaces the worst member only
when it is feasible against an infeasible worst, better among feasibles, or
constraint-dominating among infeasibles. A diversity guard keeps near-duplicate
genomes out of the memory, and a bounded archive collects the mutually
non-dominated feasible solutions that form the reported Pareto set.

Everything is deterministic given the seed: one sequential loop owns the RNG,
and batch replacements are applied in batch index order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from .errors import GeometricFailure, InfeasibleMember, InitializationExhausted, LengthMismatch
from .validation import (
    as_float_vector,
    check_bounds,
    check_count,
    check_non_negative,
    check_positive,
    check_probability,
)

_MAX_REDRAWS = 100


@dataclass
class ProblemSpec:
    """A constrained multi-objective problem over a box-bounded real vector.

    The evaluator maps a genome to (objectives, constraints) and may attach an
    arbitrary payload as a third tuple element; it must be pure and may raise
    GeometricFailure for genomes with no valid evaluation. Constraints follow
    the g(x) <= 0 convention. `objective_scales` normalizes objectives in
    scalar tiebreaks; `equality_tolerance` is carried for problems that fold
    equality constraints into inequalities (unused by the bundled case study).
    """

    lower_bounds: np.ndarray
    upper_bounds: np.ndarray
    objective_count: int
    constraint_count: int
    evaluator: Callable[[np.ndarray], tuple]
    equality_tolerance: float = 1e-6
    objective_scales: np.ndarray | None = None

    def __post_init__(self):
        self.lower_bounds, self.upper_bounds = check_bounds(self.lower_bounds, self.upper_bounds)
        self.objective_count = check_count("objective_count", self.objective_count, 1)
        self.constraint_count = check_count("constraint_count", self.constraint_count, 0)
        check_non_negative("equality_tolerance", self.equality_tolerance)
        if self.objective_scales is None:
            self.objective_scales = np.ones(self.objective_count)
        else:
            self.objective_scales = as_float_vector(
                "objective_scales", self.objective_scales, self.objective_count
            )
            if np.any(self.objective_scales <= 0):
                raise ValueError("objective_scales must be positive")

    @property
    def dimension(self) -> int:
        return int(self.lower_bounds.shape[0])

    @property
    def ranges(self) -> np.ndarray:
        return self.upper_bounds - self.lower_bounds


@dataclass(frozen=True)
class HSParams:
    """Harmony search settings; defaults follow the bundled case study."""

    hms: int = 50
    hmcr: float = 0.75
    par: float = 0.4
    bandwidth_fraction: float = 0.05
    iterations: int = 100
    batch_size: int = 20
    archive_capacity: int = 10
    diversity_delta: float = 1e-6
    seed: int = 1
    penalty_weights: tuple[float, ...] | None = None

    def __post_init__(self):
        check_count("hms", self.hms, 2)
        check_probability("hmcr", self.hmcr)
        check_probability("par", self.par)
        check_positive("bandwidth_fraction", self.bandwidth_fraction)
        check_count("iterations", self.iterations, 1)
        check_count("batch_size", self.batch_size, 1)
        check_count("archive_capacity", self.archive_capacity, 1)
        check_non_negative("diversity_delta", self.diversity_delta)
        if not isinstance(self.seed, (int, np.integer)) or isinstance(self.seed, bool):
            raise ValueError(f"seed must be an integer, got {self.seed!r}")


@dataclass
class Member:
    """One evaluated candidate: genome, objectives, constraints, feasibility."""

    x: np.ndarray
    f: np.ndarray
    g: np.ndarray
    feasible: bool
    member_id: int
    payload: Any = None
    rank_key: tuple | None = None


@dataclass
class HarmonyMemory:
    """The engine's population plus the context needed to rank and guard it."""

    members: list[Member]
    lower_bounds: np.ndarray
    upper_bounds: np.ndarray
    diversity_delta: float
    objective_scales: np.ndarray
    _cached_order: list[int] | None = field(default=None, init=False, repr=False)

    @property
    def ranges(self) -> np.ndarray:
        return self.upper_bounds - self.lower_bounds

    def __len__(self) -> int:
        return len(self.members)

    def invalidate(self) -> None:
        self._cached_order = None


def _evaluate(spec: ProblemSpec, x: np.ndarray, member_id: int) -> Member:
    out = spec.evaluator(x)
    if len(out) == 3:
        f, g, payload = out
    else:
        f, g = out
        payload = None
    f = as_float_vector("objective vector", f, spec.objective_count)
    g = as_float_vector("constraint vector", g, spec.constraint_count)
    return Member(
        x=np.array(x, dtype=float),
        f=f,
        g=g,
        feasible=bool(np.all(g <= 0.0)),
        member_id=member_id,
        payload=payload,
    )


def initialize_memory(
    spec: ProblemSpec, params: HSParams, rng: np.random.Generator
) -> HarmonyMemory:
    """Fill the memory with uniform in-bounds draws, redrawing on geometric
    failure or diversity violation (at most 100 redraws per slot)."""
    hm = HarmonyMemory(
        members=[],
        lower_bounds=spec.lower_bounds,
        upper_bounds=spec.upper_bounds,
        diversity_delta=params.diversity_delta,
        objective_scales=spec.objective_scales,
    )
    for slot in range(params.hms):
        for _ in range(1 + _MAX_REDRAWS):
            x = rng.uniform(spec.lower_bounds, spec.upper_bounds)
            if hm.members and min_member_distance(x, hm) < params.diversity_delta:
                continue
            try:
                member = _evaluate(spec, x, member_id=slot)
            except GeometricFailure:
                continue
            hm.members.append(member)
            break
        else:
            raise InitializationExhausted(
                f"memory slot {slot} not fillable within {_MAX_REDRAWS} redraws"
            )
    return hm


def improvise_candidate(
    hm: HarmonyMemory,
    spec: ProblemSpec,
    params: HSParams,
    rng: np.random.Generator,
    whole_harmony: bool = False,
) -> np.ndarray:
    """Compose a new genome dimension by dimension.

    With probability hmcr the value is copied from memory (then pitch-adjusted
    by a fair-signed uniform step of at most one bandwidth with probability
    par, clamped to bounds); otherwise it is drawn uniformly from the
    dimension's range. By default every considered dimension comes from an
    independently chosen member; with `whole_harmony=True` all considered
    dimensions come from one donor, which keeps correlated variables coherent.
    The engine alternates the two forms within each batch.
    """
    lo, hi = spec.lower_bounds, spec.upper_bounds
    bw = params.bandwidth_fraction * hm.ranges
    donor = hm.members[int(rng.integers(len(hm.members)))] if whole_harmony else None
    x = np.empty(spec.dimension)
    for j in range(spec.dimension):
        if rng.random() < params.hmcr:
            if donor is None:
                value = float(hm.members[int(rng.integers(len(hm.members)))].x[j])
            else:
                value = float(donor.x[j])
            if rng.random() < params.par:
                step = rng.random() * bw[j]
                sign = 1.0 if rng.random() < 0.5 else -1.0
                value = min(max(value + sign * step, lo[j]), hi[j])
        else:
            value = rng.uniform(lo[j], hi[j])
        x[j] = value
    return x


def min_member_distance(x: np.ndarray, hm: HarmonyMemory) -> float:
    """Smallest bound-normalized Euclidean distance from `x` to any member."""
    if not hm.members:
        raise ValueError("memory is empty")
    genomes = np.array([m.x for m in hm.members])
    deltas = (genomes - np.asarray(x, dtype=float)) / hm.ranges
    return float(np.sqrt((deltas * deltas).sum(axis=1)).min())


def dominates(fa: np.ndarray, fb: np.ndarray) -> bool:
    """Objective dominance: no component worse, at least one strictly better."""
    return bool(np.all(fa <= fb) and np.any(fa < fb))


def constraint_dominates(ga: Sequence, gb: Sequence) -> bool:
    """Constraint dominance between two (typically infeasible) members."""
    ga = np.asarray(ga, dtype=float)
    gb = np.asarray(gb, dtype=float)
    if ga.shape != gb.shape:
        raise LengthMismatch(f"constraint vectors differ in length: {ga.shape} vs {gb.shape}")
    return bool(np.all(ga <= gb) and np.any(ga < gb))


def _objective_scalar(member: Member, scales: np.ndarray) -> float:
    return float(np.sum(member.f / scales))


def _violation_sum(member: Member) -> float:
    return float(np.max(np.clip(member.g, 0.0, None), initial=0.0))


def _dominance_matrix(values: np.ndarray) -> np.ndarray:
    """Boolean matrix where entry (i, j) says row i dominates row j."""
    le = (values[:, None, :] <= values[None, :, :]).all(axis=2)
    lt = (values[:, None, :] < values[None, :, :]).any(axis=2)
    return le & lt


def _nondominated_fronts(objectives: np.ndarray) -> list[np.ndarray]:
    """Peel index arrays of successive non-dominated fronts off `objectives`."""
    dom = _dominance_matrix(objectives)
    count = dom.sum(axis=0).astype(int)
    remaining = np.ones(objectives.shape[0], dtype=bool)
    fronts = []
    while remaining.any():
        mask = remaining & (count == 0)
        if not mask.any():  # only mutually equal rows left; they form one front
            mask = remaining.copy()
        idx = np.where(mask)[0]
        fronts.append(idx)
        remaining[idx] = False
        count -= dom[idx, :].sum(axis=0)
    return fronts


def rank_memory(hm: HarmonyMemory) -> list[int]:
    """Order member indices best to worst and stamp each member's rank_key.

    Feasible members come first, sorted into non-dominated fronts with the
    normalized objective sum breaking ties inside a front. Infeasible members
    follow, ordered by ascending count of constraint-dominators, then by
    ascending total violation.
    """
    members = hm.members
    feasible = [i for i, m in enumerate(members) if m.feasible]
    infeasible = [i for i, m in enumerate(members) if not m.feasible]

    if feasible:
        objectives = np.array([members[i].f for i in feasible])
        for rank, front in enumerate(_nondominated_fronts(objectives)):
            for pos in front:
                i = feasible[pos]
                members[i].rank_key = (
                    0,
                    rank,
                    _objective_scalar(members[i], hm.objective_scales),
                )
    if infeasible:
        violations = np.array([members[i].g for i in infeasible])
        dom_counts = _dominance_matrix(violations).sum(axis=0)
        for pos, i in enumerate(infeasible):
            members[i].rank_key = (1, int(dom_counts[pos]), _violation_sum(members[i]))

    order = sorted(range(len(members)), key=lambda i: (members[i].rank_key, i))
    hm._cached_order = list(order)
    return order


def mean_objective(hm: HarmonyMemory, objective_index: int) -> float:
    """Arithmetic mean of one objective over the whole memory."""
    return float(np.mean([m.f[objective_index] for m in hm.members]))


def penalty_scalarization(f: float, g: Sequence, w: Sequence) -> float:
    """Penalty-form scalar fitness F = f + sum(w_i * max(0, g_i)^2).

    Baseline single-objective constraint handling for comparison runs; the
    dominance-based engine never calls this.
    """
    g = np.asarray(g, dtype=float)
    w = np.asarray(w, dtype=float)
    if g.shape != w.shape:
        raise LengthMismatch(f"weights/constraints differ in length: {w.shape} vs {g.shape}")
    return float(f + np.sum(w * np.clip(g, 0.0, None) ** 2))


def replace_worst(hm: HarmonyMemory, candidate: Member) -> bool:
    """Try to replace the worst-ranked member with `candidate`.

    Candidates closer than the diversity guard to any existing member are
    rejected outright. Replacement happens in exactly three cases: the
    candidate is feasible and the worst is not; both are feasible and the
    candidate is better (dominates, or neither dominates and its normalized
    objective sum is strictly smaller); both are infeasible and the candidate
    is less violating (constraint-dominates, or neither dominates and its
    total violation is strictly smaller).
    """
    if min_member_distance(candidate.x, hm) < hm.diversity_delta:
        return False
    order = hm._cached_order if hm._cached_order is not None else rank_memory(hm)
    worst_index = order[-1]
    worst = hm.members[worst_index]

    if candidate.feasible and not worst.feasible:
        replace = True
    elif candidate.feasible and worst.feasible:
        if dominates(candidate.f, worst.f):
            replace = True
        elif not dominates(worst.f, candidate.f):
            replace = _objective_scalar(candidate, hm.objective_scales) < _objective_scalar(
                worst, hm.objective_scales
            )
        else:
            replace = False
    elif not candidate.feasible and not worst.feasible:
        if constraint_dominates(candidate.g, worst.g):
            replace = True
        elif not constraint_dominates(worst.g, candidate.g):
            replace = _violation_sum(candidate) < _violation_sum(worst)
        else:
            replace = False
    else:
        replace = False

    if replace:
        hm.members[worst_index] = candidate
        hm.invalidate()
    return replace


def crowding_distances(objectives: np.ndarray) -> np.ndarray:
    """NSGA-II style crowding distances; boundary members get +inf."""
    n, m = objectives.shape
    dist = np.zeros(n)
    for k in range(m):
        order = np.argsort(objectives[:, k], kind="stable")
        lo, hi = objectives[order[0], k], objectives[order[-1], k]
        dist[order[0]] = dist[order[-1]] = np.inf
        if hi - lo <= 0:
            continue
        for pos in range(1, n - 1):
            i = order[pos]
            dist[i] += (objectives[order[pos + 1], k] - objectives[order[pos - 1], k]) / (hi - lo)
    return dist


class ParetoArchive:
    """Capacity-bounded set of mutually non-dominated feasible members."""

    def __init__(self, capacity: int):
        self.capacity = check_count("capacity", capacity, 1)
        self.members: list[Member] = []

    def __len__(self) -> int:
        return len(self.members)

    def update(self, member: Member) -> bool:
        """Insert a feasible member; returns True if it is present afterwards.

        Dominated candidates are rejected; an inserted member evicts every
        member it dominates. Genomes already present are ignored (the engine
        re-offers memory members every iteration). Over capacity, the member
        with the smallest crowding distance is evicted.
        """
        if not member.feasible:
            raise InfeasibleMember(f"member {member.member_id} violates constraints")
        for m in self.members:
            if np.array_equal(m.x, member.x):
                return False
        if any(dominates(m.f, member.f) for m in self.members):
            return False
        self.members = [m for m in self.members if not dominates(member.f, m.f)]
        self.members.append(member)
        if len(self.members) > self.capacity:
            objectives = np.array([m.f for m in self.members])
            evict = int(np.argmin(crowding_distances(objectives)))
            evicted = self.members.pop(evict)
            return evicted is not member
        return True

    def objective_minima(self) -> np.ndarray | None:
        if not self.members:
            return None
        return np.array([m.f for m in self.members]).min(axis=0)

    def select_best(self, scales: np.ndarray) -> Member | None:
        """Archive member with the smallest equal-weight normalized objective sum."""
        if not self.members:
            return None
        return min(self.members, key=lambda m: (_objective_scalar(m, scales), m.member_id))


@dataclass(frozen=True)
class IterationTrace:
    """Per-iteration record: best-so-far objectives, memory means, archive state."""

    iteration: int
    best_x: np.ndarray | None
    best_f: np.ndarray | None
    mean_f: np.ndarray
    archive_size: int
    archive_ids: tuple[int, ...]


@dataclass(frozen=True)
class EvaluationRecord:
    iteration: int
    member: Member


@dataclass
class OptimizationRun:
    """Everything a finished run produced: traces, archive, selection, log."""

    params: HSParams
    traces: list[IterationTrace]
    archive: ParetoArchive
    selected: Member | None
    evaluations: list[EvaluationRecord]


def run_optimization(
    spec: ProblemSpec,
    params: HSParams,
    progress: Callable[[int, int], None] | None = None,
) -> OptimizationRun:
    """Run the full loop: improvise, evaluate, replace, archive, trace.

    Each iteration improvises `batch_size` candidates against the memory as it
    stood at the iteration start (geometric failures are resampled up to 100
    times and never recorded), then applies replacements and archive updates
    in batch index order, then re-offers feasible memory members to the
    archive. Deterministic for a given seed.
    """
    if params.penalty_weights is not None and len(params.penalty_weights) != spec.constraint_count:
        raise LengthMismatch(
            f"penalty_weights has length {len(params.penalty_weights)}, "
            f"expected {spec.constraint_count}"
        )
    rng = np.random.default_rng(params.seed)
    hm = initialize_memory(spec, params, rng)
    archive = ParetoArchive(params.archive_capacity)
    evaluations: list[EvaluationRecord] = []
    traces: list[IterationTrace] = []
    next_id = params.hms

    for iteration in range(params.iterations):
        batch: list[Member] = []
        for slot in range(params.batch_size):
            for _ in range(1 + _MAX_REDRAWS):
                x = improvise_candidate(hm, spec, params, rng, whole_harmony=slot % 2 == 1)
                try:
                    member = _evaluate(spec, x, member_id=next_id)
                except GeometricFailure:
                    continue
                next_id += 1
                break
            else:
                raise InitializationExhausted(
                    f"batch slot {slot} of iteration {iteration} not fillable "
                    f"within {_MAX_REDRAWS} redraws"
                )
            batch.append(member)
            evaluations.append(EvaluationRecord(iteration=iteration, member=member))

        for member in batch:
            replace_worst(hm, member)
            if member.feasible:
                archive.update(member)
        for member in hm.members:
            if member.feasible:
                archive.update(member)

        best = archive.select_best(hm.objective_scales)
        traces.append(
            IterationTrace(
                iteration=iteration,
                best_x=None if best is None else best.x.copy(),
                best_f=archive.objective_minima(),
                mean_f=np.array([mean_objective(hm, k) for k in range(spec.objective_count)]),
                archive_size=len(archive),
                archive_ids=tuple(m.member_id for m in archive.members),
            )
        )
        if progress is not None:
            progress(iteration + 1, params.iterations)

    selected = archive.select_best(spec.objective_scales)
    return OptimizationRun(
        params=params,
        traces=traces,
        archive=archive,
        selected=selected,
        evaluations=evaluations,
    )


class HarmonySearch(BaseEstimator):
    """Estimator facade over `run_optimization`.

    Follows scikit-learn conventions: constructor arguments are stored
    verbatim (so `get_params`/`set_params`/`clone` work), validation happens
    in `fit`, and fitted state lands in trailing-underscore attributes.

    >>> search = HarmonySearch(iterations=20, seed=7)
    >>> search.fit(problem)            # doctest: +SKIP
    >>> search.archive_.members        # doctest: +SKIP
    """

    def __init__(
        self,
        hms: int = 50,
        hmcr: float = 0.75,
        par: float = 0.4,
        bandwidth_fraction: float = 0.05,
        iterations: int = 100,
        batch_size: int = 20,
        archive_capacity: int = 10,
        diversity_delta: float = 1e-6,
        seed: int = 1,
        penalty_weights: tuple[float, ...] | None = None,
    ):
        self.hms = hms
        self.hmcr = hmcr
        self.par = par
        self.bandwidth_fraction = bandwidth_fraction
        self.iterations = iterations
        self.batch_size = batch_size
        self.archive_capacity = archive_capacity
        self.diversity_delta = diversity_delta
        self.seed = seed
        self.penalty_weights = penalty_weights

    def params_(self) -> HSParams:
        return HSParams(
            hms=self.hms,
            hmcr=self.hmcr,
            par=self.par,
            bandwidth_fraction=self.bandwidth_fraction,
            iterations=self.iterations,
            batch_size=self.batch_size,
            archive_capacity=self.archive_capacity,
            diversity_delta=self.diversity_delta,
            seed=self.seed,
            penalty_weights=self.penalty_weights,
        )

    def fit(self, problem: ProblemSpec, progress: Callable[[int, int], None] | None = None):
        """Run the optimization against `problem`; returns self."""
        run = run_optimization(problem, self.params_(), progress=progress)
        self.run_ = run
        self.archive_ = run.archive
        self.selected_ = run.selected
        self.traces_ = run.traces
        self.evaluations_ = run.evaluations
        return self
