"""Observables, statistical checks, nearest-type maps and busy-set witnesses.

Everything here is a pure function of simulation state or of recorded
series; ensemble statistics merge associatively so replicas may be
produced concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

from parkproc.common import NO_SPOT, UNPARKED, VACANT
from parkproc.topology import Topology

if TYPE_CHECKING:  # pragma: no cover
    from parkproc.engine import SimSeries, SimState, SnapshotView


# ---------------------------------------------------------------------------
# observable rows


@dataclass(frozen=True)
class ObservableRow:
    """One per-time record: spatial visit averages, counts, fractions.

    The nearest-type fractions are optional because they need a
    multi-source BFS per time step; they are filled only when requested.
    """

    t: int
    vbar: float
    vbar_sq: float
    unparked_cars: int
    vacant_spots: int
    frac_spot_unvisited: float
    frac_closer_spot: float | None = None
    frac_closer_car: float | None = None
    frac_tie: float | None = None


def observables_row(state: "SimState", nearest: bool = False) -> ObservableRow:
    """Row at the state's current time; O(1) unless ``nearest`` is set."""
    n = state.topo.n
    fcs = fcc = ftie = None
    if nearest:
        res = classify_state(state)
        fcs, fcc, ftie = res.frac_closer_spot, res.frac_closer_car, res.frac_tie
    return ObservableRow(
        t=state.t,
        vbar=state.visits_total / n,
        vbar_sq=state.visits_sq_total / n,
        unparked_cars=state.unparked_cars,
        vacant_spots=state.vacant_spots,
        frac_spot_unvisited=state.spots_unvisited / n,
        frac_closer_spot=fcs,
        frac_closer_car=fcc,
        frac_tie=ftie,
    )


# ---------------------------------------------------------------------------
# nearest-type coloring


class NearestLabel(Enum):
    CLOSER_TO_CAR = "closer_to_car"
    CLOSER_TO_SPOT = "closer_to_spot"
    TIE = "tie"
    NON_EMPTY = "non_empty"


_LABEL_CODES = {
    NearestLabel.CLOSER_TO_CAR: 0,
    NearestLabel.CLOSER_TO_SPOT: 1,
    NearestLabel.TIE: 2,
    NearestLabel.NON_EMPTY: 3,
}


@dataclass(frozen=True)
class NearestTypeResult:
    """Per-vertex codes (0 car, 1 spot, 2 tie, 3 non-empty) and fractions.

    Fractions are over all N vertices; non-empty sites fall in none of the
    three distance classes.  ``degenerate`` flags a snapshot with no
    non-empty site at all (then every site is labeled Tie).
    """

    codes: np.ndarray
    frac_closer_car: float
    frac_closer_spot: float
    frac_tie: float
    degenerate: bool

    def label_names(self) -> np.ndarray:
        names = np.array([l.value for l in _LABEL_CODES], dtype=object)
        return names[self.codes]


def nearest_type_classify(topo: Topology, car_sources: np.ndarray,
                          spot_sources: np.ndarray) -> NearestTypeResult:
    """Label empty sites by their closest non-empty type.

    Non-empty means hosting at least one unparked car or being a vacant
    spot; occupied spots count as empty (the annihilated pair is gone).
    Distances are undirected graph distances; equal distances are ties.
    """
    n = topo.n
    non_empty = np.zeros(n, dtype=bool)
    non_empty[car_sources] = True
    non_empty[spot_sources] = True
    if not non_empty.any():
        return NearestTypeResult(
            codes=np.full(n, _LABEL_CODES[NearestLabel.TIE], dtype=np.int8),
            frac_closer_car=0.0, frac_closer_spot=0.0, frac_tie=1.0,
            degenerate=True,
        )
    big = np.iinfo(np.int64).max
    dc = topo.bfs_distances(car_sources) if len(car_sources) else np.full(n, -1, dtype=np.int64)
    ds = topo.bfs_distances(spot_sources) if len(spot_sources) else np.full(n, -1, dtype=np.int64)
    dc = np.where(dc < 0, big, dc)
    ds = np.where(ds < 0, big, ds)
    codes = np.full(n, _LABEL_CODES[NearestLabel.TIE], dtype=np.int8)
    codes[dc < ds] = _LABEL_CODES[NearestLabel.CLOSER_TO_CAR]
    codes[ds < dc] = _LABEL_CODES[NearestLabel.CLOSER_TO_SPOT]
    codes[non_empty] = _LABEL_CODES[NearestLabel.NON_EMPTY]
    return NearestTypeResult(
        codes=codes,
        frac_closer_car=float((codes == 0).sum()) / n,
        frac_closer_spot=float((codes == 1).sum()) / n,
        frac_tie=float((codes == 2).sum()) / n,
        degenerate=False,
    )


def classify_snapshot(topo: Topology, snap: "SnapshotView") -> NearestTypeResult:
    return nearest_type_classify(
        topo,
        car_sources=np.flatnonzero(snap.unparked_count > 0),
        spot_sources=np.flatnonzero(snap.occupied_at == VACANT),
    )


def classify_state(state: "SimState") -> NearestTypeResult:
    active_pos = state.car_pos[state.active_car_ids()]
    return nearest_type_classify(
        state.topo,
        car_sources=np.unique(active_pos),
        spot_sources=np.flatnonzero(state.occupied_at == VACANT),
    )


# ---------------------------------------------------------------------------
# recursion residuals (expected per-step increment law)


@dataclass(frozen=True)
class ResidualSeries:
    t: np.ndarray
    mean: np.ndarray
    se: np.ndarray
    n_replicas: int

    def within(self, z: float) -> np.ndarray:
        """Boolean per t: |mean| <= z * se (se == 0 requires mean == 0)."""
        return np.abs(self.mean) <= z * self.se + 1e-15


def _series_rows(series) -> list[ObservableRow]:
    return series.rows if hasattr(series, "rows") else list(series)


def recursion_residual(ensemble: Sequence, p: float) -> ResidualSeries:
    """Residuals of the increment law against the theoretical density.

    Per replica and time, r_t = (vbar_{t+1} - vbar_t) - (2p - 1)
    - frac_spot_unvisited(t); the law predicts the across-replica mean
    is 0 up to the binomial noise of the initial roles.
    """
    if len(ensemble) < 2:
        raise ValueError("need an ensemble of at least 2 replicas")
    per_rep = []
    for series in ensemble:
        rows = _series_rows(series)
        vbar = np.array([r.vbar for r in rows])
        fsu = np.array([r.frac_spot_unvisited for r in rows])
        per_rep.append(np.diff(vbar) - (2.0 * p - 1.0) - fsu[:-1])
    mat = np.stack(per_rep)
    rows0 = _series_rows(ensemble[0])
    return ResidualSeries(
        t=np.array([r.t for r in rows0[:-1]]),
        mean=mat.mean(axis=0),
        se=mat.std(axis=0, ddof=1) / math.sqrt(mat.shape[0]),
        n_replicas=mat.shape[0],
    )


def recursion_identity_gap(series) -> float:
    """Max |increment residual| with the *empirical* density in place of p.

    Pathwise, N*(vbar_{t+1} - vbar_t) = unparked_t and
    unparked_t = (N_cars - N_spots) + N*frac_spot_unvisited_t, because a
    spot is occupied exactly when it has ever been visited.  The gap is 0
    up to float round-off of the stored averages.
    """
    rows = _series_rows(series)
    vbar = np.array([r.vbar for r in rows])
    fsu = np.array([r.frac_spot_unvisited for r in rows])
    unparked = np.array([r.unparked_cars for r in rows], dtype=float)
    vacant = np.array([r.vacant_spots for r in rows], dtype=float)
    n = _n_vertices(series)
    excess = (unparked - vacant) / n  # == (N_cars - N_spots)/N at every t
    r = np.diff(vbar) - excess[:-1] - fsu[:-1]
    return float(np.abs(r).max()) if len(r) else 0.0


def _n_vertices(series) -> int:
    from parkproc.topology import TopologySpec

    return TopologySpec.from_dict(series.topology).n_vertices


# ---------------------------------------------------------------------------
# parking probabilities


@dataclass(frozen=True)
class ParkProbReport:
    parked: int
    n_cars: int
    n_spots: int
    frac_cars_parked: float | None
    frac_spots_parked_in: float | None
    se_cars: float | None
    se_spots: float | None


def empirical_park_probs(state: "SimState") -> ParkProbReport:
    """Fractions of cars parked and spots parked-in, with binomial SEs.

    Recounts both sides from the raw arrays and asserts the pathwise
    bijection parked_cars == occupied_spots.
    """
    parked_cars = int((state.park_time != UNPARKED).sum())
    occupied = int((state.occupied_at >= 0).sum())
    if parked_cars != occupied:
        raise AssertionError(
            f"parked cars ({parked_cars}) != occupied spots ({occupied})"
        )

    def frac_se(k: int, m: int) -> tuple[float | None, float | None]:
        if m == 0:
            return None, None
        f = k / m
        return f, math.sqrt(max(f * (1.0 - f), 0.0) / m)

    fc, sc = frac_se(parked_cars, state.n_cars)
    fs, ss = frac_se(occupied, state.n_spots)
    return ParkProbReport(
        parked=parked_cars, n_cars=state.n_cars, n_spots=state.n_spots,
        frac_cars_parked=fc, frac_spots_parked_in=fs, se_cars=sc, se_spots=ss,
    )


# ---------------------------------------------------------------------------
# conditional no-visit frequencies


@dataclass(frozen=True)
class NoVisitReport:
    p_given_car: float | None
    p_unconditional: float
    p_given_spot: float | None
    n_car_sites: int
    n_spot_sites: int
    t: int


def conditional_no_visit(states: Sequence["SimState"]) -> NoVisitReport:
    """Pooled frequencies of {V_t(v) = 0} split by the initial role of v.

    All states must sit at the same time; the expected ordering is
    P(no visit | car) <= P(no visit) <= P(no visit | spot).
    """
    t = states[0].t
    if any(s.t != t for s in states):
        raise ValueError("all ensemble states must be at the same time")
    zero_car = zero_spot = n_car = n_spot = 0
    for s in states:
        unvisited = s.visits == 0
        carmask = s.roles == 1
        n_car += int(carmask.sum())
        n_spot += int((~carmask).sum())
        zero_car += int((unvisited & carmask).sum())
        zero_spot += int((unvisited & ~carmask).sum())
    total = n_car + n_spot
    return NoVisitReport(
        p_given_car=zero_car / n_car if n_car else None,
        p_unconditional=(zero_car + zero_spot) / total,
        p_given_spot=zero_spot / n_spot if n_spot else None,
        n_car_sites=n_car, n_spot_sites=n_spot, t=t,
    )


# ---------------------------------------------------------------------------
# fits


@dataclass(frozen=True)
class PowerLawFit:
    window: tuple[int, int]
    slope: float
    intercept: float
    rss: float
    n_points: int


def fit_power_law(series, window: tuple[int, int]) -> PowerLawFit:
    """OLS of log(vbar) on log(t) over ``window`` (rows with vbar > 0)."""
    t_lo, t_hi = window
    if not t_lo < t_hi:
        raise ValueError("window must satisfy t_lo < t_hi")
    rows = _series_rows(series)
    pts = [(r.t, r.vbar) for r in rows if t_lo <= r.t <= t_hi and r.t >= 1 and r.vbar > 0]
    if len(pts) < 3:
        raise ValueError(f"window {window} has {len(pts)} usable points; need >= 3")
    x = np.log([q[0] for q in pts])
    y = np.log([q[1] for q in pts])
    slope, intercept = np.polyfit(x, y, 1)
    rss = float(((y - (slope * x + intercept)) ** 2).sum())
    return PowerLawFit(window=(t_lo, t_hi), slope=float(slope),
                       intercept=float(intercept), rss=rss, n_points=len(pts))


def fit_linear(series, window: tuple[int, int]) -> PowerLawFit:
    """OLS of vbar on t over ``window`` (for the linear-growth regime)."""
    t_lo, t_hi = window
    rows = _series_rows(series)
    pts = [(r.t, r.vbar) for r in rows if t_lo <= r.t <= t_hi]
    if len(pts) < 3:
        raise ValueError(f"window {window} has {len(pts)} points; need >= 3")
    x = np.array([q[0] for q in pts], dtype=float)
    y = np.array([q[1] for q in pts], dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    rss = float(((y - (slope * x + intercept)) ** 2).sum())
    return PowerLawFit(window=(t_lo, t_hi), slope=float(slope),
                       intercept=float(intercept), rss=rss, n_points=len(pts))


# ---------------------------------------------------------------------------
# busy-set witnesses


class SearchStatus(Enum):
    FOUND = "found"
    NONE = "none"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class BusyWitness:
    status: SearchStatus
    vertices: tuple[int, ...] = ()
    n_cars: int = 0
    n_spots: int = 0
    nodes_explored: int = 0

    @property
    def found(self) -> bool:
        return self.status is SearchStatus.FOUND


def _offsets_1d(topo: Topology, v: int, positions: np.ndarray) -> np.ndarray:
    """Signed offsets of ``positions`` relative to v (shortest wrap on cycles)."""
    from parkproc.topology import Family

    if topo.spec.family is Family.PATH_1D:
        return positions - v
    L = topo.spec.side
    return (positions - v + L // 2) % L - L // 2


def busy_witness_1d(topo: Topology, roles: np.ndarray, v: int,
                    trajectory: np.ndarray, t: int) -> BusyWitness:
    """Exhaustive interval scan for a busy witness of a surviving 1D car.

    Scans every interval inside the radius-2t ball around v that contains
    the trajectory, smallest first, and returns the first interval with at
    least as many initial cars as spots.  A surviving car with no witness
    is a defect signal, not a legitimate outcome.
    """
    from parkproc.topology import Family

    if topo.spec.family not in (Family.PATH_1D, Family.CYCLE_1D, Family.ORIENTED_CYCLE_1D):
        raise ValueError("busy_witness_1d needs a 1D topology")
    L = topo.spec.side
    traj = np.asarray(trajectory, dtype=np.int64)
    off = _offsets_1d(topo, v, traj)
    lo_t, hi_t = int(off.min()), int(off.max())

    if topo.spec.family is Family.PATH_1D:
        lo_lim = max(-2 * t, -v)
        hi_lim = min(2 * t, L - 1 - v)
    else:
        # Offsets cover each cycle vertex once; the ball additionally
        # caps the reach at 2t on either side.
        lo_lim = max(-2 * t, -(L // 2))
        hi_lim = min(2 * t, L - 1 - L // 2)

    width = hi_lim - lo_lim + 1
    sign = np.where(roles[(v + np.arange(lo_lim, hi_lim + 1)) % L] == 1, 1, -1)
    prefix = np.concatenate([[0], np.cumsum(sign)])

    def balance(a: int, b: int) -> int:
        return int(prefix[b - lo_lim + 1] - prefix[a - lo_lim])

    explored = 0
    for length in range(hi_t - lo_t + 1, width + 1):
        for a in range(max(lo_lim, hi_t - length + 1), min(lo_t, hi_lim - length + 1) + 1):
            b = a + length - 1
            explored += 1
            bal = balance(a, b)
            if bal >= 0:
                verts = tuple(int((v + d) % L) for d in range(a, b + 1))
                n_cars = (length + bal) // 2
                return BusyWitness(SearchStatus.FOUND, vertices=verts,
                                   n_cars=n_cars, n_spots=length - n_cars,
                                   nodes_explored=explored)
    return BusyWitness(SearchStatus.NONE, nodes_explored=explored)


def busy_witness_search(topo: Topology, roles: np.ndarray, v: int,
                        trajectory: np.ndarray, t: int,
                        node_budget: int = 1_000_000) -> BusyWitness:
    """Budgeted DFS over connected supersets of the trajectory in B(v, 2t).

    Branches include/exclude on boundary vertices (cars first), pruning a
    branch when even absorbing every remaining car vertex cannot lift the
    car-spot balance to zero.  Complete up to the node budget; returns
    INCONCLUSIVE when the budget runs out.
    """
    ball = topo.ball(v, 2 * t)
    in_ball = np.zeros(topo.n, dtype=bool)
    in_ball[ball] = True
    sign = np.where(roles == 1, 1, -1)

    base = np.unique(np.asarray(trajectory, dtype=np.int64))
    if not in_ball[base].all():
        raise ValueError("trajectory leaves the radius-2t ball")
    base_set = set(int(x) for x in base)
    bal0 = int(sign[base].sum())

    def boundary(members: set[int], excluded: set[int]) -> list[int]:
        out: set[int] = set()
        for x in members:
            for y in topo.und_nbr[x]:
                yi = int(y)
                if yi >= 0 and in_ball[yi] and yi not in members and yi not in excluded:
                    out.add(yi)
        # Cars first, then canonical index, so easy witnesses come early.
        return sorted(out, key=lambda q: (-sign[q], q))

    cars_in_ball = int(((roles == 1) & in_ball).sum())
    nodes = 0

    def witness(members: set[int], bal: int) -> BusyWitness:
        size = len(members)
        n_cars = (size + bal) // 2
        return BusyWitness(SearchStatus.FOUND, vertices=tuple(sorted(members)),
                           n_cars=n_cars, n_spots=size - n_cars, nodes_explored=nodes)

    def dfs(members: set[int], bal: int, excluded: set[int],
            cars_used: int) -> BusyWitness | None:
        nonlocal nodes
        nodes += 1
        if nodes > node_budget:
            return BusyWitness(SearchStatus.INCONCLUSIVE, nodes_explored=nodes)
        if bal >= 0:
            return witness(members, bal)
        cand = boundary(members, excluded)
        # Admissible prune: even taking every car vertex left in the ball
        # (connected or not) cannot close the deficit.
        cars_left = cars_in_ball - cars_used - len([q for q in excluded if sign[q] > 0])
        if bal + cars_left < 0 or not cand:
            return None
        x = cand[0]
        members.add(x)
        res = dfs(members, bal + int(sign[x]), excluded,
                  cars_used + (1 if sign[x] > 0 else 0))
        members.discard(x)
        if res is not None:
            return res
        excluded.add(x)
        res = dfs(members, bal, excluded, cars_used)
        excluded.discard(x)
        return res

    cars_used0 = int((sign[base] > 0).sum())
    res = dfs(set(base_set), bal0, set(), cars_used0)
    if res is None:
        return BusyWitness(SearchStatus.NONE, nodes_explored=nodes)
    return res


# ---------------------------------------------------------------------------
# E V at absorption across a density grid


@dataclass(frozen=True)
class CurvePoint:
    p: float
    mean_vbar: float | None
    se_vbar: float | None
    n_absorbed: int
    n_excluded: int
    vbar_by_replica: tuple


def estimate_ev_curve(topo: Topology, p_grid: Sequence[float], replicas: int,
                      t_cap: int, base_seed: int) -> list[CurvePoint]:
    """Mean spatial visit average at absorption, per density on the grid.

    Replica r uses the same derived seed at every p, so the per-seed
    monotone coupling applies across the grid.  Runs hitting the cap are
    excluded from the mean and counted.
    """
    from parkproc.engine import run_to_absorption
    from parkproc.randomness import derive_seed

    out = []
    for p in p_grid:
        vals = []
        excluded = 0
        for r in range(replicas):
            series, absorbed = run_to_absorption(
                topo, p, derive_seed(base_seed, r), t_cap, record_every=max(t_cap, 1)
            )
            if absorbed is None:
                excluded += 1
                vals.append(None)
            else:
                vals.append(series.rows[-1].vbar)
        good = [x for x in vals if x is not None]
        mean = float(np.mean(good)) if good else None
        se = float(np.std(good, ddof=1) / math.sqrt(len(good))) if len(good) > 1 else None
        out.append(CurvePoint(p=p, mean_vbar=mean, se_vbar=se,
                              n_absorbed=len(good), n_excluded=excluded,
                              vbar_by_replica=tuple(vals)))
    return out


# ---------------------------------------------------------------------------
# small helpers


def block_mean_se(values: np.ndarray, block_len: int) -> tuple[float, float, int]:
    """Batch-means mean and standard error for spatially dependent samples."""
    values = np.asarray(values, dtype=float)
    nblocks = len(values) // block_len
    if nblocks < 2:
        raise ValueError("need at least 2 full blocks")
    blocks = values[: nblocks * block_len].reshape(nblocks, block_len).mean(axis=1)
    return float(blocks.mean()), float(blocks.std(ddof=1) / math.sqrt(nblocks)), nblocks
