"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` or ``python tests/test_acceptance.py``.
Criterion 10 writes per-seed dispersion traces to ``acceptance_out/``.
"""

from __future__ import annotations

import math
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

from gaugemarket import (AgentSpec, EconomicHistory, GaugeElement, SimConfig, TradeOp,
                         apply_gauge, arbitrage_search, cycle_curvature, edgeworth_economy,
                         edgeworth_equilibrium_oracle, enumerate_pareto_allocations,
                         excess_demand, gauge_norm, holonomy_covariance_check,
                         indifferent_drinks, init_simulation, parse_scenario,
                         path_holonomy, plaquette_check, run_simulation, solve_equilibrium,
                         tick, wbw_from_prices, wbw_gauge_transform, wbw_is_consistent,
                         wbw_projection_defect)
from gaugemarket.io import atomic_write_text, dumps, jsonl
from helpers import brute_force_cycles, consistent_wbw, random_economy, random_market

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "acceptance_out"


def report(number, label, ok, detail, capsys=None):
    line = f"[{'PASS' if ok else 'FAIL'}] C{number} {label}: {detail}"
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)
    return bool(ok)


# -- 1 -------------------------------------------------------------------------

def check_walras():
    rng = np.random.default_rng(20240101)
    economies = []
    for _ in range(1000):
        n = int(rng.integers(2, 11))
        economies.append((random_economy(rng, n, int(rng.integers(2, 21)), int(rng.integers(0, 6))),
                          rng.dirichlet(np.ones(n)) * 0.98 + 0.02 / n))
    start = time.perf_counter()
    worst = max(abs(float(p @ excess_demand(e, p))) for e, p in economies)
    elapsed = time.perf_counter() - start
    return worst <= 1e-10 and elapsed < 5.0, f"max |p.Z| = {worst:.2e} over 1000 economies in {elapsed:.2f} s"


def test_c1_walras(capsys):
    ok, detail = check_walras()
    assert report(1, "Walras's law", ok, detail, capsys), detail


# -- 2 -------------------------------------------------------------------------

def check_edgeworth():
    rng = np.random.default_rng(7)
    cases = [(rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95),
              rng.uniform(0.1, 10, 2), rng.uniform(0.1, 10, 2)) for _ in range(100)]
    start = time.perf_counter()
    worst = 0.0
    for alpha, beta, e1, e2 in cases:
        got = solve_equilibrium(edgeworth_economy(alpha, beta, e1, e2)).p_star
        worst = max(worst, float(np.max(np.abs(got - edgeworth_equilibrium_oracle(alpha, beta, e1, e2)))))
    elapsed = time.perf_counter() - start
    return worst <= 1e-6 and elapsed < 10.0, f"max |p* - oracle| = {worst:.2e} over 100 draws in {elapsed:.2f} s"


def test_c2_edgeworth_oracle(capsys):
    ok, detail = check_edgeworth()
    assert report(2, "equilibrium oracle equivalence", ok, detail, capsys), detail


# -- 3 -------------------------------------------------------------------------

def check_fixed_point():
    rng = np.random.default_rng(3)
    tol = 1e-8
    runs = []
    while len(runs) < 60:
        e = random_economy(rng, int(rng.integers(2, 6)), int(rng.integers(2, 8)), 0)
        # a Cobb-Douglas good with nothing to trade has no clearing price
        if np.all(sum(h.endowment for h in e.households) > 0):
            runs.append((e, tol))
    for _ in range(20):
        a, b = rng.uniform(0.05, 0.95, 2)
        runs.append((edgeworth_economy(a, b, rng.uniform(0.1, 5, 2), rng.uniform(0.1, 5, 2)), tol))
    bakery = parse_scenario(ROOT / "demos" / "scenarios" / "bakery.json")
    runs.append((bakery.model, bakery.options["tol"]))
    worst = 0.0
    for e, t in runs:
        r = solve_equilibrium(e, tol=t)
        z = excess_demand(e, r.p_star)
        margin = max(float(np.max(z)), float(np.max(np.abs(r.p_star * z))))
        if margin > t:
            return False, f"violation {margin:.2e} > tol {t:.0e}"
        worst = max(worst, margin / t)
    return True, f"{len(runs)} solves, worst max(Z, |pZ|)/tol = {worst:.3f}"


def test_c3_fixed_point_contract(capsys):
    ok, detail = check_fixed_point()
    assert report(3, "tatonnement fixed-point contract", ok, detail, capsys), detail


# -- 4 -------------------------------------------------------------------------

def check_multiplicity():
    bad = [(n, l, len(enumerate_pareto_allocations(indifferent_drinks(n, l))))
           for n in range(1, 9) for l in range(n + 1)]
    bad = [(n, l, got) for n, l, got in bad if got != math.comb(n, l)]
    return not bad, f"all (n, l) with n <= 8 exact" if not bad else f"mismatches {bad[:5]}"


def test_c4_symmetry_multiplicity(capsys):
    ok, detail = check_multiplicity()
    assert report(4, "symmetry multiplicity", ok, detail, capsys), detail


# -- 5 -------------------------------------------------------------------------

def _cycle(rng, n_agents, n_goods, length):
    agents = [int(rng.integers(n_agents))]
    while len(agents) < length:
        agents.append(int(rng.choice([k for k in range(n_agents) if k != agents[-1]])))
    if agents[-1] == agents[0]:
        agents[-1] = next(k for k in range(n_agents) if k not in (agents[0], agents[-2]))
    goods = [int(g) for g in rng.integers(n_goods, size=length)]
    goods.append(goods[0])
    return [TradeOp(agents[k], agents[(k + 1) % length], goods[k], goods[k + 1],
                    *np.exp(rng.normal(0, 1, 4))) for k in range(length)]


def check_gauge_suite():
    rng = np.random.default_rng(55)
    n_agents, n_goods = 4, 3
    dev = {"R": 0.0, "S": 0.0}
    norm_ok = consistency_ok = True
    for _ in range(1000):
        ops = _cycle(rng, n_agents, n_goods, int(rng.integers(2, 6)))
        phi = GaugeElement.random((n_agents, n_goods), rng)
        gauged = [t.gauge(phi) for t in ops]
        for kind in dev:
            before = cycle_curvature(kind, ops).value
            after = cycle_curvature(kind, gauged).value
            dev[kind] = max(dev[kind], abs(after / before - 1.0))
        v = np.exp(rng.normal(0, 2, (n_agents, n_goods)))
        norm_ok &= gauge_norm(apply_gauge(v, phi)) == gauge_norm(v) == n_agents * n_goods
        w = consistent_wbw(rng, n_goods)
        consistency_ok &= wbw_is_consistent(wbw_gauge_transform(w, phi.factors[0]))
    ok = dev["R"] <= 1e-12 and dev["S"] <= 1e-12 and norm_ok and consistency_ok
    detail = (f"max rel change R = {dev['R']:.1e}, S = {dev['S']:.1e} (limit 1e-12); "
              f"gauge_norm exact: {norm_ok}; W-consistency kept: {consistency_ok}")
    return ok, detail


def test_c5_gauge_invariance(capsys):
    ok, detail = check_gauge_suite()
    assert report(5, "gauge invariance suite", ok, detail, capsys), detail


# -- 6 -------------------------------------------------------------------------

def check_projection():
    rng = np.random.default_rng(6)
    worst = 0.0
    for n in range(1, 17):
        for _ in range(50):
            worst = max(worst, wbw_projection_defect(consistent_wbw(rng, n)) / n)
    return worst <= 1e-10, f"max defect / N = {worst:.2e} for N = 1..16"


def test_c6_projection_identity(capsys):
    ok, detail = check_projection()
    assert report(6, "projection identity", ok, detail, capsys), detail


# -- 7 -------------------------------------------------------------------------

def check_holonomy():
    rng = np.random.default_rng(77)
    loop_dev = 0.0
    inventory_exact = True
    cov_dev = 0.0
    for _ in range(200):
        n, k = int(rng.integers(2, 6)), int(rng.integers(3, 30))
        q = rng.uniform(0.1, 5, n)
        prices = np.exp(rng.normal(0, 1, (k, n)))
        prices[-1] = prices[0]
        loop = EconomicHistory(np.arange(k, dtype=float), np.tile(q, (k, 1)), prices)
        loop_dev = max(loop_dev, abs(path_holonomy(loop) - 1.0))
        baskets = rng.uniform(0.1, 5, (k, n))
        still = EconomicHistory(np.arange(k, dtype=float), baskets, np.tile(prices[0], (k, 1)))
        inventory_exact &= path_holonomy(still) == 1.0
        h = EconomicHistory(np.sort(rng.uniform(0, 1, k)) + np.arange(k), baskets, prices)
        lam = np.exp(rng.normal(0, 1, k))
        p0, p1 = holonomy_covariance_check(h, lam)
        cov_dev = max(cov_dev, abs((p1 / p0) / (lam[-1] / lam[0]) - 1.0))
    hs = [0.04, 0.02, 0.01, 0.005]
    defects = [plaquette_check([1, 1], [1, 1], h, h).defect for h in hs]
    orders = [math.log2(big / small) for big, small in zip(defects, defects[1:])]
    ok = (loop_dev <= 1e-12 and inventory_exact and cov_dev <= 1e-10
          and defects[2] <= 1e-8 and min(orders) >= 2)
    detail = (f"(a) max |P-1| = {loop_dev:.1e}; (b) exact: {inventory_exact}; "
              f"(c) max rel dev = {cov_dev:.1e}; (d) defect(0.01) = {defects[2]:.2e}, "
              f"orders {', '.join(f'{o:.2f}' for o in orders)}")
    return ok, detail


def test_c7_holonomy(capsys):
    ok, detail = check_holonomy()
    assert report(7, "holonomy", ok, detail, capsys), detail


# -- 8 -------------------------------------------------------------------------

def planted_market(rng, agents, goods, gain):
    w = consistent_wbw(rng, goods)
    out = np.stack([w] * agents)
    a, b = (int(x) for x in rng.choice(goods, 2, replace=False))
    # agent 0 now pays less for b in terms of a than everyone else
    out[0, a, b] /= gain
    out[0, b, a] *= gain
    return out


def check_arbitrage():
    rng = np.random.default_rng(88)
    shapes = [(a, g) for a in range(1, 9) for g in range(2, 9) if a * g <= 8]
    planted_found = with_cycles = 0
    for k in range(100):
        agents, goods = shapes[k % len(shapes)]
        if k % 4 == 0 and agents >= 2:
            market = planted_market(rng, agents, goods, float(rng.uniform(1.01, 2.0)))
        else:
            market = random_market(rng, agents, goods, unknown=float(rng.choice([0.0, 0.3])))
        got = {c.nodes: c.gain for c in arbitrage_search(market, max_len=4)}
        want = brute_force_cycles(market, 4)
        if set(got) != set(want):
            return False, f"market {k} {agents}x{goods}: {len(got)} cycles vs {len(want)} exhaustive"
        if any(abs(got[c] / want[c] - 1) > 1e-12 for c in got):
            return False, f"market {k}: gain mismatch"
        with_cycles += bool(got)
        planted_found += bool(got) and k % 4 == 0 and agents >= 2
    return planted_found > 0, (f"100 markets agree with exhaustive enumeration; {with_cycles} have cycles, "
                               f"{planted_found} planted gains recovered")


def test_c8_arbitrage_oracle(capsys):
    ok, detail = check_arbitrage()
    assert report(8, "arbitrage oracle equivalence", ok, detail, capsys), detail


# -- 9 -------------------------------------------------------------------------

def conservation_config():
    rng = np.random.default_rng(9)
    specs = tuple(AgentSpec(f"a{k:02d}", rng.uniform(5, 50, 3), units=np.exp(rng.normal(0, 1, 3)))
                  for k in range(20))
    return SimConfig(("x", "y", "z"), specs, seed=9, ticks=2000, belief_noise=0.5, max_trade=2.0)


def check_conservation():
    cfg = conservation_config()
    state = init_simulation(cfg)
    totals = state.totals()
    drift = 0.0
    for _ in range(cfg.ticks):
        tick(state)
        drift = max(drift, float(np.max(np.abs(state.totals() - totals))))
    first, second = run_simulation(cfg).ledger.to_csv(), run_simulation(cfg).ledger.to_csv()
    same = first == second == state.ledger.to_csv()
    return drift == 0.0 and same, (f"max total drift = {drift!r} over 2000 ticks, {len(state.ledger)} trades; "
                                   f"ledgers byte-identical: {same}")


def test_c9_conservation_and_determinism(capsys):
    ok, detail = check_conservation()
    assert report(9, "simulation conservation and determinism", ok, detail, capsys), detail


# -- 10 ------------------------------------------------------------------------

SEEDS = range(7, 27)


def reference_config(seed):
    specs = tuple(AgentSpec(f"a{k:02d}", [50.0, 50.0]) for k in range(20))
    return SimConfig(("x", "y"), specs, seed, ticks=2000, belief_noise=0.6)


def check_agreement(out_dir=OUT):
    ratios, rows = [], []
    for seed in SEEDS:
        trace = [rec["dispersion"]["x/y"] for rec in run_simulation(reference_config(seed)).observables]
        if trace[0] < 0.5:
            return False, f"seed {seed}: initial dispersion {trace[0]:.3f} below 0.5"
        ratios.append(trace[-1] / trace[0])
        rows.append({"seed": seed, "initial": trace[0], "final": trace[-1], "ratio": ratios[-1]})
        atomic_write_text(out_dir / f"dispersion_seed{seed}.jsonl",
                          jsonl({"tick": t, "dispersion": d} for t, d in enumerate(trace)))
    median = float(np.median(ratios))
    atomic_write_text(out_dir / "dispersion_summary.json",
                      dumps({"seeds": rows, "median_ratio": median}) + "\n")
    return median < 0.5, (f"median final/initial = {median:.4f} over {len(ratios)} seeds "
                          f"(range {min(ratios):.4f}..{max(ratios):.4f}); traces in {out_dir.name}/")


def test_c10_convergence_toward_agreement(capsys):
    ok, detail = check_agreement()
    assert report(10, "convergence toward agreement", ok, detail, capsys), detail


CHECKS = [
    (1, "Walras's law", check_walras),
    (2, "equilibrium oracle equivalence", check_edgeworth),
    (3, "tatonnement fixed-point contract", check_fixed_point),
    (4, "symmetry multiplicity", check_multiplicity),
    (5, "gauge invariance suite", check_gauge_suite),
    (6, "projection identity", check_projection),
    (7, "holonomy", check_holonomy),
    (8, "arbitrage oracle equivalence", check_arbitrage),
    (9, "simulation conservation and determinism", check_conservation),
    (10, "convergence toward agreement", check_agreement),
]


if __name__ == "__main__":
    results = [report(n, label, *fn()) for n, label, fn in CHECKS]
    print(f"{sum(results)}/{len(results)} criteria pass")
    sys.exit(0 if all(results) else 1)
