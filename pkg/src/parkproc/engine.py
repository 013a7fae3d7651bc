"""Synchronous parking dynamics with a deterministic randomness contract.

Every vertex starts as either a car origin (probability p) or a vacant
parking spot.  Each step has two phases: all unparked cars move
simultaneously along the kernel (phase 1), then every vacant spot with
arrivals parks the arriving car with the smallest tie-break value
(phase 2).  Parked cars and occupied spots are frozen forever.

The per-car walk and tie streams are indexed by (origin, wall-clock time),
which makes two runs sharing a seed follow literally the same walk paths
and tie values: the monotone coupling between densities p_low <= p_high is
exact, not approximate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from parkproc import stats as _stats
from parkproc.common import NO_SPOT, UNPARKED, VACANT
from parkproc.randomness import Purpose, RandomnessSource
from parkproc.topology import Topology

DEFAULT_MAX_CELLS = 2**33


class BudgetError(RuntimeError):
    """Raised when a run would exceed the configured size budget."""


@dataclass(frozen=True)
class InitialConfig:
    """Initial role assignment: role[v] = 1 iff draw(ROLE, v, 0) < p."""

    roles: np.ndarray
    p: float
    seed: int
    n_cars: int
    n_spots: int


def sample_initial(topo: Topology, p: float, source: RandomnessSource) -> InitialConfig:
    """Sample i.i.d. car/spot roles; thresholding makes them nested in p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    u = source.draw_array(Purpose.ROLE, np.arange(topo.n, dtype=np.int64), 0)
    roles = (u < p).astype(np.uint8)
    n_cars = int(roles.sum())
    return InitialConfig(
        roles=roles, p=p, seed=source.seed, n_cars=n_cars, n_spots=topo.n - n_cars
    )


class SimState:
    """Mutable state of one run: per-vertex occupancy plus per-car records.

    Cars are identified by their origin vertex; ``car_origin`` is sorted
    ascending and all per-car arrays share that indexing.  Aggregates
    (total visits, sum of squared visits, number of unvisited spots) are
    maintained incrementally so observable rows cost O(1) per step.
    """

    def __init__(self, topo: Topology, init: InitialConfig, source: RandomnessSource,
                 trajectory: bool = False):
        if len(init.roles) != topo.n:
            raise ValueError("initial config does not match topology size")
        self.topo = topo
        self.p = init.p
        self.source_seed = source.seed
        self.t = 0

        self.roles = init.roles.copy()
        self.is_spot = self.roles == 0
        self.occupied_at = np.where(self.is_spot, VACANT, NO_SPOT).astype(np.int64)

        self.car_origin = np.flatnonzero(init.roles).astype(np.int64)
        self.car_pos = self.car_origin.copy()
        self.park_time = np.full(len(self.car_origin), UNPARKED, dtype=np.int64)
        self.park_vertex = np.full(len(self.car_origin), UNPARKED, dtype=np.int64)

        self.visits = np.zeros(topo.n, dtype=np.int64)

        self.n_cars = init.n_cars
        self.n_spots = init.n_spots
        self.parked_count = 0
        self.visits_total = 0
        self.visits_sq_total = 0
        self.spots_unvisited = init.n_spots

        self._active = np.arange(len(self.car_origin), dtype=np.int64)
        self._walk_keys = source.stream_keys(Purpose.WALK, self.car_origin)
        self._tie_keys = source.stream_keys(Purpose.TIE, self.car_origin)

        self.trajectory: list[np.ndarray] | None = [self.car_pos.copy()] if trajectory else None

    # -- derived counters ----------------------------------------------

    @property
    def unparked_cars(self) -> int:
        return self.n_cars - self.parked_count

    @property
    def vacant_spots(self) -> int:
        return self.n_spots - self.parked_count

    @property
    def occupied_spots(self) -> int:
        return self.parked_count

    def active_car_ids(self) -> np.ndarray:
        return self._active.copy()

    def copy(self) -> "SimState":
        new = object.__new__(SimState)
        new.topo = self.topo
        new.p = self.p
        new.source_seed = self.source_seed
        new.t = self.t
        new.roles = self.roles.copy()
        new.is_spot = self.is_spot
        new.occupied_at = self.occupied_at.copy()
        new.car_origin = self.car_origin
        new.car_pos = self.car_pos.copy()
        new.park_time = self.park_time.copy()
        new.park_vertex = self.park_vertex.copy()
        new.visits = self.visits.copy()
        new.n_cars = self.n_cars
        new.n_spots = self.n_spots
        new.parked_count = self.parked_count
        new.visits_total = self.visits_total
        new.visits_sq_total = self.visits_sq_total
        new.spots_unvisited = self.spots_unvisited
        new._active = self._active.copy()
        new._walk_keys = self._walk_keys
        new._tie_keys = self._tie_keys
        new.trajectory = [a.copy() for a in self.trajectory] if self.trajectory is not None else None
        return new


def states_equal(a: SimState, b: SimState) -> bool:
    """Full state comparison used by the reference-equivalence oracle."""
    return (
        a.t == b.t
        and a.parked_count == b.parked_count
        and a.visits_total == b.visits_total
        and a.visits_sq_total == b.visits_sq_total
        and a.spots_unvisited == b.spots_unvisited
        and np.array_equal(a.roles, b.roles)
        and np.array_equal(a.occupied_at, b.occupied_at)
        and np.array_equal(a.car_pos, b.car_pos)
        and np.array_equal(a.park_time, b.park_time)
        and np.array_equal(a.park_vertex, b.park_vertex)
        and np.array_equal(a.visits, b.visits)
        and np.array_equal(a._active, b._active)
    )


def init_state(topo: Topology, init: InitialConfig, source: RandomnessSource,
               trajectory: bool = False) -> SimState:
    return SimState(topo, init, source, trajectory=trajectory)


def _record_arrivals(state: SimState, dest: np.ndarray) -> None:
    """Bump visit counters plus the incremental aggregates for ``dest``."""
    n = state.topo.n
    m = len(dest)
    if m * 8 < n:
        uniq, counts = np.unique(dest, return_counts=True)
    else:
        cnt = np.bincount(dest, minlength=n)
        uniq = np.flatnonzero(cnt)
        counts = cnt[uniq]
    old = state.visits[uniq]
    state.visits[uniq] = old + counts
    state.visits_total += m
    state.visits_sq_total += int((counts * (2 * old + counts)).sum())
    state.spots_unvisited -= int(((old == 0) & state.is_spot[uniq]).sum())


def step(state: SimState, source: RandomnessSource) -> SimState:
    """Advance one synchronous step (in place); returns the state.

    Phase 1 moves every unparked car by inverse-CDF sampling of its
    out-neighbors at walk-stream index t+1; phase 2 parks, at each vacant
    spot with arrivals, the car of minimal tie draw (equal draws broken by
    smaller origin).  The result does not depend on iteration order.
    """
    if source.seed != state.source_seed:
        raise ValueError("step must use the source the state was initialized with")
    t1 = state.t + 1
    active = state._active

    if len(active):
        u = source.uniform_from_keys(state._walk_keys[active], t1)
        pos = state.car_pos[active]
        cum = state.topo.out_cumw[pos]
        k = (u[:, None] >= cum).sum(axis=1)
        dest = state.topo.out_nbr[pos, k]
        state.car_pos[active] = dest
        _record_arrivals(state, dest)

        cand = state.occupied_at[dest] == VACANT
        if cand.any():
            cars = active[cand]
            spots = dest[cand]
            ties = source.uniform_from_keys(state._tie_keys[cars], t1)
            order = np.lexsort((state.car_origin[cars], ties, spots))
            spots_sorted = spots[order]
            first = np.ones(len(order), dtype=bool)
            first[1:] = spots_sorted[1:] != spots_sorted[:-1]
            winners = cars[order[first]]
            won_at = spots_sorted[first]
            state.park_time[winners] = t1
            state.park_vertex[winners] = won_at
            state.occupied_at[won_at] = t1
            state.parked_count += len(winners)
            state._active = active[state.park_time[active] == UNPARKED]

    state.t = t1
    if state.trajectory is not None:
        state.trajectory.append(state.car_pos.copy())
    return state


def visit_identity_check(state: SimState) -> "IdentityReport":
    """Pathwise identity: sum_v V_t(v) == sum_cars min(park_time, t)."""
    lhs = int(state.visits.sum())
    pt = state.park_time
    rhs = int(np.where(pt == UNPARKED, state.t, np.minimum(pt, state.t)).sum())
    return IdentityReport(lhs=lhs, rhs=rhs, t=state.t)


@dataclass(frozen=True)
class IdentityReport:
    lhs: int
    rhs: int
    t: int

    @property
    def equal(self) -> bool:
        return self.lhs == self.rhs


@dataclass(frozen=True)
class SnapshotView:
    """Per-vertex dump at a fixed time, the input to maps and spacetime plots."""

    t: int
    roles: np.ndarray  # 1 = car origin
    occupied_at: np.ndarray  # NO_SPOT / VACANT / time
    unparked_count: np.ndarray  # unparked cars currently at each vertex


def snapshot(state: SimState) -> SnapshotView:
    cnt = np.bincount(state.car_pos[state._active], minlength=state.topo.n)
    return SnapshotView(
        t=state.t,
        roles=state.roles.copy(),
        occupied_at=state.occupied_at.copy(),
        unparked_count=cnt.astype(np.int64),
    )


@dataclass
class SimSeries:
    """Observable rows of one run plus its summary facts."""

    topology: dict
    p: float
    seed: int
    t_end: int
    rows: list = field(default_factory=list)
    absorption_time: int | None = None
    snapshots: dict = field(default_factory=dict)
    final_state: SimState | None = None
    record_every: int = 1


def _guard_budget(n: int, t_max: int, max_cells: int) -> None:
    if n * (t_max + 1) > max_cells:
        raise BudgetError(
            f"N*(t_max+1) = {n * (t_max + 1)} exceeds the cell budget {max_cells}"
        )


def run(
    topo: Topology,
    p: float,
    seed: int,
    t_max: int,
    *,
    record_every: int = 1,
    trajectory: bool = False,
    snapshot_times: tuple[int, ...] = (),
    nearest_every: int | None = None,
    max_cells: int = DEFAULT_MAX_CELLS,
) -> SimSeries:
    """Fixed-horizon run collecting one observable row per recorded time."""
    if t_max < 0:
        raise ValueError("t_max must be >= 0")
    _guard_budget(topo.n, t_max, max_cells)
    source = RandomnessSource(seed)
    init = sample_initial(topo, p, source)
    state = init_state(topo, init, source, trajectory=trajectory)
    series = SimSeries(topology=topo.spec.to_dict(), p=p, seed=seed, t_end=t_max,
                       record_every=record_every)
    snap_set = set(snapshot_times)

    def record(st: SimState) -> None:
        want_nearest = nearest_every is not None and st.t % nearest_every == 0
        series.rows.append(_stats.observables_row(st, nearest=want_nearest))
        if st.t in snap_set:
            series.snapshots[st.t] = snapshot(st)

    record(state)
    for _ in range(t_max):
        step(state, source)
        if state.t % record_every == 0 or state.t == t_max:
            record(state)
    if state.unparked_cars == 0:
        # Locate the absorption step from the park times already stored.
        series.absorption_time = int(state.park_time.max()) if state.n_cars else 0
    series.final_state = state
    return series


def run_to_absorption(
    topo: Topology,
    p: float,
    seed: int,
    t_cap: int,
    *,
    record_every: int = 1,
    trajectory: bool = False,
    snapshot_times: tuple[int, ...] = (),
    nearest_every: int | None = None,
) -> tuple[SimSeries, int | None]:
    """Run until no unparked car remains, or until ``t_cap``.

    Returns the series plus the absorption time (None when the cap was
    reached first; that is a value, not an error).
    """
    if t_cap < 0:
        raise ValueError("t_cap must be >= 0")
    source = RandomnessSource(seed)
    init = sample_initial(topo, p, source)
    state = init_state(topo, init, source, trajectory=trajectory)
    series = SimSeries(topology=topo.spec.to_dict(), p=p, seed=seed, t_end=0,
                       record_every=record_every)
    snap_set = set(snapshot_times)

    def record(st: SimState) -> None:
        want_nearest = nearest_every is not None and st.t % nearest_every == 0
        series.rows.append(_stats.observables_row(st, nearest=want_nearest))
        if st.t in snap_set:
            series.snapshots[st.t] = snapshot(st)

    record(state)
    absorbed: int | None = 0 if state.unparked_cars == 0 else None
    while absorbed is None and state.t < t_cap:
        step(state, source)
        if state.unparked_cars == 0:
            absorbed = state.t
        if state.t % record_every == 0 or absorbed is not None:
            record(state)
    series.t_end = state.t
    series.absorption_time = absorbed
    series.final_state = state
    return series, absorbed


@dataclass
class CouplingReport:
    """Outcome of a coupled pair of runs sharing walk and tie streams."""

    p_low: float
    p_high: float
    seed: int
    t_max: int
    n_common_cars: int
    n_extra_cars: int
    park_violations: list = field(default_factory=list)
    visit_violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.park_violations and not self.visit_violations


def couple_run(
    topo: Topology,
    p_low: float,
    p_high: float,
    seed: int,
    t_max: int,
    max_reports: int = 20,
) -> CouplingReport:
    """Run the nested pair and check the pathwise monotonicity guarantees.

    Car sets are nested by the shared role threshold; walk and tie streams
    are shared because both runs draw them from the same seed at the same
    (origin, time) indices.  Any recorded violation is an engine bug.
    """
    if not 0.0 <= p_low <= p_high <= 1.0:
        raise ValueError("need 0 <= p_low <= p_high <= 1")
    source = RandomnessSource(seed)
    init_lo = sample_initial(topo, p_low, source)
    init_hi = sample_initial(topo, p_high, source)
    lo = init_state(topo, init_lo, source)
    hi = init_state(topo, init_hi, source)

    report = CouplingReport(
        p_low=p_low, p_high=p_high, seed=seed, t_max=t_max,
        n_common_cars=lo.n_cars, n_extra_cars=hi.n_cars - lo.n_cars,
    )
    for _ in range(t_max):
        step(lo, source)
        step(hi, source)
        bad = lo.visits > hi.visits
        if bad.any() and len(report.visit_violations) < max_reports:
            for v in np.flatnonzero(bad)[:5]:
                report.visit_violations.append({
                    "t": lo.t, "vertex": int(v),
                    "visits_low": int(lo.visits[v]), "visits_high": int(hi.visits[v]),
                })

    # park_time monotonicity on the common cars, censored at the horizon:
    # only a car parked in the high run constrains the low run.
    idx_hi = np.searchsorted(hi.car_origin, lo.car_origin)
    pt_lo = lo.park_time
    pt_hi = hi.park_time[idx_hi]
    bad = (pt_hi != UNPARKED) & ((pt_lo == UNPARKED) | (pt_lo > pt_hi))
    for i in np.flatnonzero(bad)[:max_reports]:
        report.park_violations.append({
            "origin": int(lo.car_origin[i]),
            "park_time_low": int(pt_lo[i]),
            "park_time_high": int(pt_hi[i]),
        })
    return report
