"""Independent exact computations the engine and the limit laws are checked
against: running-maximum laws, exhaustive enumeration of the oriented 1D
process, a naive reference step, exit-time solves, the exit-time generating
function, and the small-density threshold constants.

Exact rational arithmetic is used wherever enumeration budgets allow; the
large-horizon running-maximum path uses the skip-free hitting-time identity
P[first hit of level j at time s] = (j/s) P[S_s = j] in floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.stats import binom as _binom

from parkproc.common import UNPARKED, VACANT
from parkproc.randomness import Purpose, RandomnessSource
from parkproc.topology import Family, Topology, TopologySpec, build_topology

_DP_BUDGET = 64
_HORIZON_BUDGET = 200_000
_ENUM_BUDGET = 22


# ---------------------------------------------------------------------------
# distributions


@dataclass(frozen=True)
class Distribution:
    """Distribution on integers; probabilities are Fractions when exact."""

    support: tuple[int, ...]
    probs: tuple
    exact: bool

    def __post_init__(self):
        total = sum(self.probs)
        if self.exact:
            if total != 1:
                raise AssertionError(f"exact probabilities sum to {total}")
        elif abs(float(total) - 1.0) > 1e-12:
            raise AssertionError(f"probabilities sum to {float(total)}")
        if any(p < 0 for p in self.probs):
            raise AssertionError("negative probability")

    @property
    def mean(self):
        return sum(k * p for k, p in zip(self.support, self.probs))

    @property
    def variance(self):
        m = self.mean
        return sum((k - m) ** 2 * p for k, p in zip(self.support, self.probs))

    def prob_of(self, k: int):
        try:
            return self.probs[self.support.index(k)]
        except ValueError:
            return Fraction(0) if self.exact else 0.0


# ---------------------------------------------------------------------------
# running maximum of a +/-1 walk


def _running_max_dp(t: int, q) -> Distribution:
    """DP over (gap to max, max); exact when q is a Fraction."""
    exact = isinstance(q, Fraction)
    one = Fraction(1) if exact else 1.0
    up = q
    down = one - q
    states = {(0, 0): one}
    for _ in range(t):
        nxt: dict[tuple[int, int], object] = {}

        def add(key, val):
            nxt[key] = nxt.get(key, 0) + val

        for (g, m), pr in states.items():
            if g == 0:
                add((0, m + 1), pr * up)
                add((1, m), pr * down)
            else:
                add((g - 1, m), pr * up)
                add((g + 1, m), pr * down)
        states = nxt
    mass: dict[int, object] = {}
    for (_, m), pr in states.items():
        mass[m] = mass.get(m, 0) + pr
    support = tuple(sorted(mass))
    return Distribution(support=support, probs=tuple(mass[k] for k in support), exact=exact)


def _running_max_hitting(t: int, q: float) -> Distribution:
    """P[M_t >= j] summed from the skip-free hitting-time identity."""
    pm_ge = np.zeros(t + 2)
    pm_ge[0] = 1.0
    for j in range(1, t + 1):
        s = np.arange(j, t + 1, 2, dtype=np.int64)
        if len(s) == 0:
            break
        k = (s + j) // 2
        val = float((j / s * _binom.pmf(k, s, q)).sum())
        if val < 1e-17:
            break
        pm_ge[j] = val
    probs = np.maximum(pm_ge[: t + 1] - pm_ge[1 : t + 2], 0.0)
    return Distribution(support=tuple(range(t + 1)), probs=tuple(float(x) for x in probs),
                        exact=False)


def running_max_dist(t: int, q, dp_budget: int = _DP_BUDGET) -> Distribution:
    """Distribution of max_{0<=k<=t} S_k for a +-1 walk with up-probability q.

    Exact (gap, max) dynamic programming up to ``dp_budget`` steps, the
    hitting-time identity beyond it.  Both routes agree and are
    cross-checked in the test suite.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if t > _HORIZON_BUDGET:
        raise ValueError(f"t = {t} beyond budget {_HORIZON_BUDGET}")
    qf = float(q)
    if not 0.0 <= qf <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    if t <= dp_budget:
        return _running_max_dp(t, q)
    return _running_max_hitting(t, qf)


# ---------------------------------------------------------------------------
# oriented 1D exhaustive enumeration


def _simulate_oriented_ring(roles: Sequence[int], L: int, t: int) -> int:
    """Visits to vertex 0 within t steps of the deterministic left-drift ring.

    Cars keep their pairwise gaps, so no two ever arrive anywhere together
    and no tie-breaking is needed.
    """
    pos = [i for i in range(L) if roles[i] == 1]
    vacant = [roles[i] == 0 for i in range(L)]
    visits0 = 0
    for _ in range(t):
        nxt = []
        for x in pos:
            y = (x - 1) % L
            if y == 0:
                visits0 += 1
            if vacant[y]:
                vacant[y] = False  # parks; drops out of the walk
            else:
                nxt.append(y)
        pos = nxt
    return visits0


def oriented1d_exact(L: int, t: int, p) -> tuple[object, Distribution]:
    """Exact law of V_t(0) on the oriented ring by full 2^L enumeration.

    Weights every initial role configuration by p^#cars (1-p)^#spots and
    runs the deterministic dynamics.  Exact (Fraction) when p is a
    Fraction.  Needs L >= t + 2 to agree with the infinite-line law.
    """
    if L > _ENUM_BUDGET:
        raise ValueError(f"L = {L} beyond enumeration budget {_ENUM_BUDGET}")
    if L < 3:
        raise ValueError("need L >= 3")
    if t < 0:
        raise ValueError("t must be >= 0")
    exact = isinstance(p, Fraction)
    one = Fraction(1) if exact else 1.0
    q = one - p
    mass: dict[int, object] = {}
    for config in range(1 << L):
        roles = [(config >> i) & 1 for i in range(L)]
        ncars = sum(roles)
        weight = (p**ncars) * (q ** (L - ncars))
        v = _simulate_oriented_ring(roles, L, t)
        mass[v] = mass.get(v, 0) + weight
    support = tuple(sorted(mass))
    dist = Distribution(support=support, probs=tuple(mass[k] for k in support), exact=exact)
    return dist.mean, dist


# ---------------------------------------------------------------------------
# naive reference step (equivalence oracle for the engine)


def reference_step(state, source: RandomnessSource, order: str = "forward"):
    """Single-pass, per-car literal implementation of one update.

    Same contract as the engine step, written with plain Python loops and
    dictionary grouping: move every unparked car by scanning its
    cumulative kernel weights, then let each vacant spot with arrivals
    park the arriving car of minimal (tie value, origin).  Returns a new
    state; the input is untouched.
    """
    if order not in ("forward", "reversed"):
        raise ValueError("order must be 'forward' or 'reversed'")
    st = state.copy()
    t1 = st.t + 1
    ids = [i for i in range(len(st.car_origin)) if st.park_time[i] == UNPARKED]
    if order == "reversed":
        ids = ids[::-1]

    arrivals: dict[int, list[int]] = {}
    for i in ids:
        origin = int(st.car_origin[i])
        pos = int(st.car_pos[i])
        u = source.draw(Purpose.WALK, origin, t1)
        nbrs = st.topo.neighbors(pos)
        dest = nbrs[-1][0]
        acc = 0.0
        for ver, w in nbrs[:-1]:
            acc += w
            if u < acc:
                dest = ver
                break
        st.car_pos[i] = dest
        old = int(st.visits[dest])
        st.visits[dest] = old + 1
        st.visits_total += 1
        st.visits_sq_total += 2 * old + 1
        if old == 0 and st.is_spot[dest]:
            st.spots_unvisited -= 1
        arrivals.setdefault(dest, []).append(i)

    for vertex in sorted(arrivals):
        if st.occupied_at[vertex] != VACANT:
            continue
        best = None
        for i in arrivals[vertex]:
            origin = int(st.car_origin[i])
            key = (source.draw(Purpose.TIE, origin, t1), origin)
            if best is None or key < best[0]:
                best = (key, i)
        winner = best[1]
        st.park_time[winner] = t1
        st.park_vertex[winner] = vertex
        st.occupied_at[vertex] = t1
        st.parked_count += 1

    st._active = np.array(
        [i for i in range(len(st.car_origin)) if st.park_time[i] == UNPARKED],
        dtype=np.int64,
    )
    st.t = t1
    if st.trajectory is not None:
        st.trajectory.append(st.car_pos.copy())
    return st


# ---------------------------------------------------------------------------
# exit times from balls


def exit_time_mean(topo: Topology, j: int, v0: int = 0, max_states: int = 20_000) -> float:
    """Exact expected first time the walk's displacement from v0 exceeds j.

    Solves the absorbing linear system on the radius-j ball.  The instance
    must be large enough that the ball does not wrap into itself the way
    the infinite graph's would not.
    """
    if j < 0:
        raise ValueError("j must be >= 0")
    ball = topo.ball(v0, j)
    if len(ball) > max_states:
        raise ValueError(f"ball has {len(ball)} states, budget {max_states}")
    index = {int(x): i for i, x in enumerate(ball)}
    m = len(ball)
    q = np.zeros((m, m))
    for a_idx, a in enumerate(ball):
        for ver, w in topo.neighbors(int(a)):
            b_idx = index.get(ver)
            if b_idx is not None:
                q[a_idx, b_idx] += w
    e = np.linalg.solve(np.eye(m) - q, np.ones(m))
    return float(e[index[v0]])


def exit_time_mean_mc(topo: Topology, j: int, nsamples: int, seed: int,
                      v0: int = 0, t_cap: int | None = None) -> tuple[float, float, int]:
    """Monte Carlo mean exit time with standard error; capped walks counted.

    Returns (mean, standard_error, n_capped); capped walks contribute the
    cap itself, biasing the mean low, so callers should size t_cap to make
    n_capped zero.
    """
    if nsamples <= 0:
        raise ValueError("nsamples must be positive")
    if t_cap is None:
        t_cap = 200 * (j + 1) ** 2
    dist0 = topo.bfs_distances([v0])
    src = RandomnessSource(seed)
    keys = src.stream_keys(Purpose.WALK, np.arange(nsamples, dtype=np.int64))
    pos = np.full(nsamples, v0, dtype=np.int64)
    exit_at = np.zeros(nsamples, dtype=np.int64)
    alive = np.arange(nsamples, dtype=np.int64)
    for s in range(1, t_cap + 1):
        u = src.uniform_from_keys(keys[alive], s)
        cum = topo.out_cumw[pos[alive]]
        k = (u[:, None] >= cum).sum(axis=1)
        pos[alive] = topo.out_nbr[pos[alive], k]
        out = dist0[pos[alive]] > j
        exit_at[alive[out]] = s
        alive = alive[~out]
        if len(alive) == 0:
            break
    n_capped = len(alive)
    exit_at[alive] = t_cap
    mean = float(exit_at.mean())
    se = float(exit_at.std(ddof=1) / math.sqrt(nsamples))
    return mean, se, n_capped


@dataclass(frozen=True)
class FPartial:
    """Partial sums of the exit-time generating function at argument s."""

    s: float
    terms: tuple[float, ...]  # E t(j) * s^j
    partial_sums: tuple[float, ...]
    tail_decaying: bool


def f_partial(topo: Topology, s: float, j_max: int, v0: int = 0,
              max_states: int = 20_000) -> FPartial:
    """Partial sums sum_{j<=J} E[t(j)] s^j with a tail-decay indicator.

    The decay flag goes false when the last weighted terms stop
    decreasing, the numerical signature of leaving the guaranteed
    convergence region |s| < K_min^2.
    """
    if not 0.0 <= s < 1.0:
        raise ValueError("s must lie in [0, 1)")
    terms = []
    for j in range(j_max + 1):
        et = exit_time_mean(topo, j, v0=v0, max_states=max_states)
        terms.append(et * s**j if j > 0 else et)
    sums = np.cumsum(terms)
    if len(terms) >= 3 and s > 0:
        tail = terms[-3:]
        decaying = tail[2] < tail[1] < tail[0]
    else:
        decaying = True
    return FPartial(s=s, terms=tuple(terms), partial_sums=tuple(float(x) for x in sums),
                    tail_decaying=decaying)


# ---------------------------------------------------------------------------
# small-density thresholds


@dataclass(frozen=True)
class ThresholdConstants:
    """Kernel constants and the density below which E V is provably finite.

    c solves s_p < K_min^2 via p(1-p) < c with c = K_min^4 / (4 e^2 D^2);
    p_star is the exact small root of p(1-p) = c.
    """

    max_degree: int
    k_min: float
    c: float
    p_star: float

    def s_p(self, p: float) -> float:
        return 2.0 * math.e * self.max_degree * math.sqrt(p * (1.0 - p))


def small_p_threshold(max_degree: int, k_min: float) -> ThresholdConstants:
    if max_degree < 1:
        raise ValueError("max_degree must be >= 1")
    if not 0.0 < k_min <= 1.0:
        raise ValueError("k_min must lie in (0, 1]")
    c = k_min**4 / (4.0 * math.e**2 * max_degree**2)
    p_star = (1.0 - math.sqrt(1.0 - 4.0 * c)) / 2.0
    return ThresholdConstants(max_degree=max_degree, k_min=k_min, c=c, p_star=p_star)


@dataclass(frozen=True)
class BoundReport:
    """Everything the finite-E-V bound needs at one density p."""

    max_degree: int
    k_min: float
    p: float
    s_p: float
    c: float
    p_star: float
    below_threshold: bool
    f_partial_sums: tuple[float, ...]
    last_term: float
    tail_decaying: bool


def bound_report(topo: Topology, p: float, j_max: int = 12) -> BoundReport:
    ks = topo.kernel_stats()
    th = small_p_threshold(ks.max_degree, ks.k_min)
    sp = th.s_p(p)
    below = p * (1.0 - p) < th.c
    if sp < 1.0:
        fp = f_partial(topo, sp, j_max)
        sums, last, decaying = fp.partial_sums, fp.terms[-1], fp.tail_decaying
    else:
        sums, last, decaying = (), float("inf"), False
    return BoundReport(
        max_degree=ks.max_degree, k_min=ks.k_min, p=p, s_p=sp, c=th.c,
        p_star=th.p_star, below_threshold=below,
        f_partial_sums=sums, last_term=last, tail_decaying=decaying,
    )


# ---------------------------------------------------------------------------
# busy-probability bound


def binomial_busy(j: int, p) -> tuple[object, float]:
    """Exact P[j role signs sum >= 0] and its Chernoff bound (2 sqrt(p(1-p)))^j.

    Exact value is a Fraction when p is one.  The exact tail never exceeds
    the bound for p <= 1/2.
    """
    if j < 1:
        raise ValueError("j must be >= 1")
    exact_mode = isinstance(p, Fraction)
    one = Fraction(1) if exact_mode else 1.0
    q = one - p
    kmin = (j + 1) // 2  # sum of signs >= 0  <=>  #cars >= ceil(j/2)
    tail = sum(math.comb(j, k) * p**k * q ** (j - k) for k in range(kmin, j + 1))
    pf = float(p)
    bound = (2.0 * math.sqrt(pf * (1.0 - pf))) ** j
    return tail, bound
