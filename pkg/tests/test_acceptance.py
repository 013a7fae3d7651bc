"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line.

Run with:  pytest tests/test_acceptance.py -v -s
All expected values and tolerances are pinned here; the statistical ones
use fixed seeds so the whole suite is deterministic.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from parkproc import engine, oracles, stats
from parkproc.randomness import RandomnessSource, derive_seed
from parkproc.topology import Boundary, Family, TopologySpec, build_topology

MASTER_SEED = 20260809


def _report(num: int, name: str, passed: bool, detail: str = "") -> None:
    tag = "PASS" if passed else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"[criterion {num:02d}] {tag} {name}{suffix}")
    assert passed, f"criterion {num}: {name}{suffix}"


def _random_spec(rng, big_ok: bool) -> TopologySpec:
    fam = rng.choice([Family.UNORIENTED_TORUS, Family.ORIENTED_TORUS, Family.CYCLE_1D,
                      Family.ORIENTED_CYCLE_1D, Family.PATH_1D])
    if fam in (Family.UNORIENTED_TORUS, Family.ORIENTED_TORUS):
        side = int(rng.integers(3, 100 if big_ok else 21))
        return TopologySpec(fam, side=side, dimension=2)
    if fam is Family.PATH_1D:
        return TopologySpec(fam, side=int(rng.integers(5, 2001)), boundary=Boundary.REFLECTING)
    return TopologySpec(fam, side=int(rng.integers(5, 2001)))


# ---------------------------------------------------------------------------
# criteria 1 + 2: exact conservation and visit identity on 200 random runs


@pytest.fixture(scope="module")
def corpus_violations():
    rng = np.random.default_rng(MASTER_SEED)
    conservation_bad = 0
    identity_bad = 0
    runs = steps = 0
    t0 = time.time()
    for k in range(200):
        spec = _random_spec(rng, big_ok=(k % 4 == 0))
        topo = build_topology(spec)
        assert topo.n <= 10_000
        p = float(rng.uniform(0, 1))
        seed = int(rng.integers(0, 2**62))
        t_budget = max(1, min(500, 600_000 // topo.n))
        t_run = int(rng.integers(1, t_budget + 1))
        src = RandomnessSource(seed)
        state = engine.init_state(topo, engine.sample_initial(topo, p, src), src)
        for _ in range(t_run):
            engine.step(state, src)
            parked = int((state.park_time != engine.UNPARKED).sum())
            occupied = int((state.occupied_at >= 0).sum())
            if parked != occupied or parked != state.parked_count:
                conservation_bad += 1
            if state.unparked_cars - state.vacant_spots != state.n_cars - state.n_spots:
                conservation_bad += 1
            if not engine.visit_identity_check(state).equal:
                identity_bad += 1
            steps += 1
        runs += 1
    return {"conservation": conservation_bad, "identity": identity_bad,
            "runs": runs, "steps": steps, "elapsed": time.time() - t0}


def test_criterion_01_exact_conservation(corpus_violations):
    c = corpus_violations
    _report(1, "exact conservation on 200 random runs", c["conservation"] == 0,
            f"{c['runs']} runs, {c['steps']} steps, {c['elapsed']:.1f}s, "
            f"{c['conservation']} violations")


def test_criterion_02_visit_identity(corpus_violations):
    c = corpus_violations
    _report(2, "visit identity sum_v V_t(v) == sum_c min(park_time, t)",
            c["identity"] == 0, f"{c['steps']} steps checked, {c['identity']} violations")


# ---------------------------------------------------------------------------
# criterion 3: engine.step == reference_step, including reversed order


def test_criterion_03_reference_equivalence():
    rng = np.random.default_rng(MASTER_SEED + 3)
    mismatches = 0
    instances = 0
    t0 = time.time()
    for _ in range(100):
        fam = rng.choice([Family.UNORIENTED_TORUS, Family.ORIENTED_TORUS,
                          Family.CYCLE_1D, Family.ORIENTED_CYCLE_1D, Family.PATH_1D])
        if fam in (Family.UNORIENTED_TORUS, Family.ORIENTED_TORUS):
            spec = TopologySpec(fam, side=int(rng.integers(3, 32)), dimension=2)
        elif fam is Family.PATH_1D:
            spec = TopologySpec(fam, side=int(rng.integers(5, 1001)),
                                boundary=Boundary.REFLECTING)
        else:
            spec = TopologySpec(fam, side=int(rng.integers(5, 1001)))
        topo = build_topology(spec)
        assert topo.n <= 1000
        p = float(rng.uniform(0, 1))
        seed = int(rng.integers(0, 2**62))
        src = RandomnessSource(seed)
        init = engine.sample_initial(topo, p, src)
        budget = max(2, min(200, 40_000 // max(init.n_cars, 1)))
        t_run = int(rng.integers(1, budget + 1))
        fast = engine.init_state(topo, init, src)
        slow = engine.init_state(topo, init, src)
        for s in range(t_run):
            engine.step(fast, src)
            slow = oracles.reference_step(slow, src, order="reversed" if s % 2 else "forward")
            if not engine.states_equal(fast, slow):
                mismatches += 1
                break
        instances += 1
    _report(3, "engine.step state-identical to naive reference (both orders)",
            mismatches == 0, f"{instances} instances, {time.time() - t0:.1f}s")


# ---------------------------------------------------------------------------
# criterion 4: oriented-1D exact law and running-maximum asymptotics


def test_criterion_04_oriented_1d_exact_law():
    t0 = time.time()
    half = Fraction(1, 2)
    # (a) exhaustive enumeration == running-maximum law, exactly, t <= 10
    exact_ok = True
    for t in range(1, 11):
        _, dist = oracles.oriented1d_exact(t + 2, t, half)
        ref = oracles.running_max_dist(t, half)
        if dist.support != ref.support or any(a != b for a, b in zip(dist.probs, ref.probs)):
            exact_ok = False

    # (b) Monte Carlo engine vs the exact mean, 3 block standard errors
    t = 10
    topo = build_topology(TopologySpec(Family.ORIENTED_CYCLE_1D, side=100_000))
    zs = []
    mc_ok = True
    for p_frac in (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)):
        mean_exact = float(oracles.oriented1d_exact(t + 2, t, p_frac)[0])
        series = engine.run(topo, float(p_frac), seed=MASTER_SEED + 4, t_max=t,
                            record_every=t)
        visits = series.final_state.visits
        mean_mc, se, _ = stats.block_mean_se(visits, block_len=100 * (t + 2))
        z = abs(mean_mc - mean_exact) / se
        zs.append(round(z, 2))
        if z > 3.0:
            mc_ok = False

    # (c) E M_10000 against the sqrt(2t/pi) asymptotic
    m = float(oracles.running_max_dist(10_000, 0.5).mean)
    ratio = m / math.sqrt(2 * 10_000 / math.pi)
    ratio_ok = 0.98 <= ratio <= 1.02

    _report(4, "oriented-1D law: enumeration == running max; engine within 3 SE; "
               "E M_10000 asymptotic", exact_ok and mc_ok and ratio_ok,
            f"z-scores {zs}, ratio {ratio:.4f}, {time.time() - t0:.1f}s")


# ---------------------------------------------------------------------------
# criterion 5: theorem-1.3 finite-size parking probabilities


def test_criterion_05_parking_probabilities():
    t0 = time.time()
    topo = build_topology(TopologySpec(Family.UNORIENTED_TORUS, side=200, dimension=2))
    n = topo.n

    # p = 0.6: run past spot saturation; all spots fill, so the parked
    # fraction is exactly N_spots/N_cars, which estimates (1-p)/p.
    p = 0.6
    src = RandomnessSource(MASTER_SEED + 5)
    state = engine.init_state(topo, engine.sample_initial(topo, p, src), src)
    while state.vacant_spots > 0 and state.t < 20_000:
        engine.step(state, src)
    sat_ok = state.vacant_spots == 0
    rep = stats.empirical_park_probs(state)
    exact_ratio_ok = rep.frac_cars_parked == state.n_spots / state.n_cars
    sigma = math.sqrt(p * (1 - p) / n) / p**2  # delta method on (1-p)/p
    z_sat = abs(rep.frac_cars_parked - (1 - p) / p) / sigma
    sat_stat_ok = z_sat <= 3.0

    # p = 0.3: run to absorption; every car parks, and the parked-in
    # fraction of spots estimates p/(1-p).
    p = 0.3
    series, absorbed = engine.run_to_absorption(topo, p, MASTER_SEED + 6, t_cap=10**6,
                                                record_every=10**6)
    st = series.final_state
    abs_ok = absorbed is not None
    rep2 = stats.empirical_park_probs(st)
    all_parked_ok = rep2.frac_cars_parked == 1.0
    sigma2 = math.sqrt(p * (1 - p) / n) / (1 - p) ** 2
    z_abs = abs(rep2.frac_spots_parked_in - p / (1 - p)) / sigma2
    abs_stat_ok = z_abs <= 3.0

    _report(5, "Thm-1.3 finite size: saturation 2/3 and absorption 3/7",
            sat_ok and exact_ratio_ok and sat_stat_ok and abs_ok and all_parked_ok
            and abs_stat_ok,
            f"sat t={state.t} z={z_sat:.2f}; absorbed t={absorbed} z={z_abs:.2f}; "
            f"{time.time() - t0:.1f}s")


# ---------------------------------------------------------------------------
# criteria 6 + 8: increment recursion and the second-moment bound


@pytest.fixture(scope="module")
def torus_ensembles():
    topo = build_topology(TopologySpec(Family.UNORIENTED_TORUS, side=100, dimension=2))
    out = {}
    t0 = time.time()
    for p in (0.3, 0.5, 0.7):
        out[p] = [engine.run(topo, p, derive_seed(MASTER_SEED + 8, r), t_max=201)
                  for r in range(50)]
    out["elapsed"] = time.time() - t0
    return out


def test_criterion_06_increment_recursion(torus_ensembles):
    frac_ok = {}
    passed = True
    for p in (0.3, 0.5, 0.7):
        res = stats.recursion_residual(torus_ensembles[p], p)
        mask = res.t <= 200
        frac = float(res.within(4.0)[mask].mean())
        frac_ok[p] = round(frac, 3)
        if frac < 0.95:
            passed = False
    # exact zero at the degenerate densities
    topo = build_topology(TopologySpec(Family.UNORIENTED_TORUS, side=30, dimension=2))
    for p in (0.0, 1.0):
        ens = [engine.run(topo, p, derive_seed(1, r), t_max=30) for r in range(2)]
        res = stats.recursion_residual(ens, p)
        if not np.all(res.mean == 0.0):
            passed = False
    _report(6, "increment recursion residuals within 4 SE (>= 95% of t <= 200)",
            passed, f"fraction within: {frac_ok}, ensemble {torus_ensembles['elapsed']:.1f}s")


def test_criterion_08_second_moment_bound(torus_ensembles):
    passed = True
    worst = 0.0
    for p in (0.3, 0.5, 0.7):
        mat = np.array([[row.vbar_sq for row in series.rows]
                        for series in torus_ensembles[p]])
        tgrid = np.arange(mat.shape[1])
        keep = tgrid <= 200
        mean = mat.mean(axis=0)[keep]
        se = mat.std(axis=0, ddof=1)[keep] / math.sqrt(mat.shape[0])
        bound = p * (p + 1) * tgrid[keep].astype(float) ** 2
        slack = mean - (bound + 3 * se)
        worst = max(worst, float(slack.max()))
        if np.any(slack > 1e-9):
            passed = False
    _report(8, "second-moment bound mean V_t^2 <= p(p+1)t^2 + 3 SE", passed,
            f"worst slack {worst:.3g}")


# ---------------------------------------------------------------------------
# criterion 7: monotone coupling, 1000 pairs, zero violations


def test_criterion_07_monotone_coupling():
    rng = np.random.default_rng(MASTER_SEED + 7)
    t0 = time.time()
    park_bad = visit_bad = 0
    pairs = 0
    for k in range(1000):
        kind = k % 10
        if kind < 5:
            topo = build_topology(TopologySpec(Family.CYCLE_1D,
                                               side=int(rng.integers(30, 301))))
            t_max = int(rng.integers(30, 201))
        elif kind < 7:
            topo = build_topology(TopologySpec(Family.ORIENTED_CYCLE_1D,
                                               side=int(rng.integers(30, 301))))
            t_max = int(rng.integers(30, 201))
        elif kind < 9:
            topo = build_topology(TopologySpec(Family.UNORIENTED_TORUS,
                                               side=int(rng.integers(4, 13)), dimension=2))
            t_max = int(rng.integers(30, 151))
        else:
            topo = build_topology(TopologySpec(Family.PATH_1D,
                                               side=int(rng.integers(10, 101)),
                                               boundary=Boundary.REFLECTING))
            t_max = int(rng.integers(30, 151))
        p_lo = float(rng.uniform(0, 1))
        p_hi = float(rng.uniform(p_lo, 1))
        rep = engine.couple_run(topo, p_lo, p_hi, int(rng.integers(0, 2**62)), t_max)
        park_bad += len(rep.park_violations)
        visit_bad += len(rep.visit_violations)
        pairs += 1
    _report(7, "monotone coupling: park-time and visit monotonicity",
            park_bad == 0 and visit_bad == 0,
            f"{pairs} pairs, {park_bad} park / {visit_bad} visit violations, "
            f"{time.time() - t0:.1f}s")


# ---------------------------------------------------------------------------
# criterion 9: linear growth at p > 1/2


def test_criterion_09_linear_growth_supercritical():
    t0 = time.time()
    p = 0.7
    topo = build_topology(TopologySpec(Family.UNORIENTED_TORUS, side=100, dimension=2))
    src = RandomnessSource(MASTER_SEED + 9)
    state = engine.init_state(topo, engine.sample_initial(topo, p, src), src)
    rows = [stats.observables_row(state)]
    totals = [state.visits_total]
    t90 = tsat = None
    while state.t < 5000 and (tsat is None or state.t < tsat + 50):
        engine.step(state, src)
        rows.append(stats.observables_row(state))
        totals.append(state.visits_total)
        if t90 is None and state.parked_count >= 0.9 * state.n_spots:
            t90 = state.t
        if tsat is None and state.vacant_spots == 0:
            tsat = state.t
    excess = state.n_cars - state.n_spots
    post_increments = np.diff(totals[tsat:])
    post_exact = bool(np.all(post_increments == excess))
    fit = stats.fit_linear(rows, (t90, tsat))
    slope_ok = (2 * p - 1 - 0.05) <= fit.slope <= (2 * p - 1 + 0.05)
    _report(9, "linear growth at p=0.7: exact post-saturation increments and slope",
            post_exact and slope_ok,
            f"t90={t90}, tsat={tsat}, slope={fit.slope:.4f} vs 2p-1={2 * p - 1}, "
            f"{time.time() - t0:.1f}s")


# ---------------------------------------------------------------------------
# criterion 10: critical power-law slopes


def test_criterion_10_power_law_slopes():
    t0 = time.time()
    L = 300
    topo_o = build_topology(TopologySpec(Family.ORIENTED_TORUS, side=L, dimension=2))
    series_o = engine.run(topo_o, 0.5, seed=MASTER_SEED, t_max=L)
    fit_o = stats.fit_power_law(series_o, (L // 2, L))
    ok_o = 0.15 <= fit_o.slope <= 0.35

    topo_u = build_topology(TopologySpec(Family.UNORIENTED_TORUS, side=L, dimension=2))
    series_u = engine.run(topo_u, 0.5, seed=MASTER_SEED, t_max=4 * L)
    fit_u = stats.fit_power_law(series_u, (2 * L, 4 * L))
    ok_u = 0.38 <= fit_u.slope <= 0.60

    _report(10, "critical slopes: oriented [L/2,L], unoriented [2L,4L]",
            ok_o and ok_u,
            f"oriented {fit_o.slope:.4f} (paper 0.2528), "
            f"unoriented {fit_u.slope:.4f} (paper 0.4854), {time.time() - t0:.1f}s")


# ---------------------------------------------------------------------------
# criterion 11: threshold constants and the busy-probability bound


def test_criterion_11_threshold_constants_and_busy_bound():
    t0 = time.time()
    topo_u = build_topology(TopologySpec(Family.UNORIENTED_TORUS, side=5, dimension=2))
    topo_o = build_topology(TopologySpec(Family.ORIENTED_TORUS, side=5, dimension=2))
    ks_u, ks_o = topo_u.kernel_stats(), topo_o.kernel_stats()
    c_u = oracles.small_p_threshold(ks_u.max_degree, ks_u.k_min).c
    c_o = oracles.small_p_threshold(ks_o.max_degree, ks_o.k_min).c
    const_ok = (abs(c_u / (2.0**-14 / math.e**2) - 1) < 1e-5
                and abs(c_o / (2.0**-10 / math.e**2) - 1) < 1e-5
                and f"{c_u:.4e}" == "8.2602e-06" and f"{c_o:.4e}" == "1.3216e-04")

    # Chernoff domination, exact integer arithmetic: densities k/200 < 1/2.
    # tail^2 * 40000^j <= (4 k (200-k))^j  <=>  tail <= (2 sqrt(pq))^j.
    bad = 0
    for j in range(1, 61):
        for k in range(1, 100):
            tail, _ = oracles.binomial_busy(j, Fraction(k, 200))
            lhs = tail.numerator**2 * 40_000**j * tail.denominator**0
            rhs = tail.denominator**2 * (4 * k * (200 - k)) ** j
            if lhs > rhs:
                bad += 1
    _report(11, "threshold constants (5 digits) and exact busy bound on the grid",
            const_ok and bad == 0,
            f"c_unoriented={c_u:.6e}, c_oriented={c_o:.6e}, grid violations {bad}, "
            f"{time.time() - t0:.1f}s")


# ---------------------------------------------------------------------------
# criterion 12: busy witnesses for surviving cars


def test_criterion_12_busy_witnesses():
    t0 = time.time()
    rng = np.random.default_rng(MASTER_SEED + 12)

    survivors_1d = witnesses_1d = 0
    for k in range(100):
        fam = Family.CYCLE_1D if k % 3 else Family.ORIENTED_CYCLE_1D
        topo = build_topology(TopologySpec(fam, side=220))
        p = float(rng.uniform(0.15, 0.45))
        t = int(rng.integers(10, 51))
        seed = int(rng.integers(0, 2**62))
        src = RandomnessSource(seed)
        init = engine.sample_initial(topo, p, src)
        state = engine.init_state(topo, init, src, trajectory=True)
        for _ in range(t):
            engine.step(state, src)
        for c in state.active_car_ids():
            v = int(state.car_origin[c])
            traj = np.array([state.trajectory[s][c] for s in range(t + 1)])
            wit = stats.busy_witness_1d(topo, init.roles, v, traj, t)
            survivors_1d += 1
            if wit.found:
                witnesses_1d += 1
    ok_1d = survivors_1d > 0 and witnesses_1d == survivors_1d

    survivors_2d = witnesses_2d = 0
    for k in range(20):
        topo = build_topology(TopologySpec(Family.UNORIENTED_TORUS, side=17, dimension=2))
        p = float(rng.uniform(0.25, 0.45))
        t = 3
        seed = int(rng.integers(0, 2**62))
        src = RandomnessSource(seed)
        init = engine.sample_initial(topo, p, src)
        state = engine.init_state(topo, init, src, trajectory=True)
        for _ in range(t):
            engine.step(state, src)
        for c in state.active_car_ids():
            v = int(state.car_origin[c])
            traj = np.array([state.trajectory[s][c] for s in range(t + 1)])
            wit = stats.busy_witness_search(topo, init.roles, v, traj, t,
                                            node_budget=1_000_000)
            survivors_2d += 1
            if wit.found:
                witnesses_2d += 1
    ok_2d = survivors_2d > 0 and witnesses_2d == survivors_2d

    _report(12, "busy witnesses found for every surviving car",
            ok_1d and ok_2d,
            f"1D {witnesses_1d}/{survivors_1d}, 2D {witnesses_2d}/{survivors_2d}, "
            f"{time.time() - t0:.1f}s")
