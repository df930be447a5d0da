import math
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rowplan import (ConfigError, ToolConfig, Displacement, HarmfulnessContext, OrderingError, PlannerConfig,
                     TrajectoryCandidate, WindowOverflowError, best_trajectory, build_graph, enumerate_notsp,
                     favorability, feasibility, harmfulness, harmfulness_map, plan_segment_view, score_trajectory,
                     select_trajectory)
from rowplan.oracle import brute_force_plan
from rowplan.verify import random_instance

from conftest import crop, row, weed


# favorability and feasibility


def test_favorability_reference_constants(tool):
    assert favorability(Displacement(0.5, 0.36), tool) == pytest.approx(0.928)
    assert favorability(Displacement(0.0, 0.1), tool) == pytest.approx(-0.02)
    assert favorability(Displacement(0.1, 1.0), tool) == pytest.approx(0.0, abs=1e-15)


def test_feasibility_values():
    assert feasibility(0.0, 30.0) == 0.5
    assert feasibility(0.1, 10.0) == pytest.approx(0.731059, abs=1e-6)
    assert feasibility(1e6, 10.0) == 1.0
    assert feasibility(-1e6, 10.0) == 0.0
    arr = feasibility(np.array([-1e6, 0.0, 0.1]), 10.0)
    assert arr.tolist() == pytest.approx([0.0, 0.5, 0.731059], abs=1e-6)


@given(st.floats(-100, 100), st.floats(-100, 100), st.floats(0.1, 100))
def test_feasibility_monotone(a, b, omega):
    lo, hi = sorted((a, b))
    assert feasibility(lo, omega) <= feasibility(hi, omega)


# harmfulness


def test_kappa_identity():
    ctx = HarmfulnessContext()
    w = weed(0, 1.0, 0.2, area_mm2=500, beta=1.0)
    assert harmfulness(w, [crop(1, 1.0, 1.2, area=500)], ctx) == pytest.approx(1.0)


def test_kappa_halves_with_distance():
    ctx = HarmfulnessContext()
    w = weed(0, 0.0, 0.2, area_mm2=200)
    assert harmfulness(w, [crop(1, 0.5, 0.2, area=100)], ctx) == pytest.approx(4.0)
    assert harmfulness(w, [crop(1, 1.0, 0.2, area=100)], ctx) == pytest.approx(2.0)


def test_kappa_weed_only_fallback():
    assert harmfulness(weed(0, 0.0, 0.2, area_mm2=1000), [], HarmfulnessContext()) == pytest.approx(2.0)


def test_kappa_priority_weight_and_clamp():
    ctx = HarmfulnessContext()
    low = weed(0, 0.0, 0.2, area_mm2=1000, priority="low")
    assert harmfulness(low, [], ctx) == pytest.approx(0.2)
    k, flag = harmfulness(weed(0, 0.5, 0.2), [crop(1, 0.5, 0.2)], ctx, return_flag=True)
    assert (k, flag) == (1e6, True)


def test_kappa_map_matches_scalar():
    ps = [weed(0, 0.1, 0.1), weed(1, 0.4, 1.0, priority="low"), crop(2, 0.3, 0.7), crop(3, 0.8, 0.7, area=500)]
    f = row(ps)
    ctx = HarmfulnessContext()
    m = harmfulness_map(f, ctx)
    for w in f.weeds:
        assert m[w.id] == pytest.approx(harmfulness(w, f.crops, ctx))


# graph


def test_empty_graph(tool):
    g = build_graph([], None, tool, PlannerConfig(), (0.0, 0.17))
    assert g.n == 0 and g.edges() == []


def test_full_dag_edge_count(tool):
    g = build_graph([weed(0, 0.1, 0.1), weed(1, 0.2, 0.1), weed(2, 0.3, 0.1)], None, tool, PlannerConfig(), (0, 0.1))
    assert len(g.edges()) == 6


def test_equal_x_has_no_edge(tool):
    g = build_graph([weed(0, 0.2, 0.1), weed(1, 0.2, 0.3)], None, tool, PlannerConfig(), (0, 0.1))
    assert {(e.from_id, e.to_id) for e in g.edges()} == {(-1, 0), (-1, 1)}


def test_target_behind_start_rejected(tool):
    with pytest.raises(OrderingError):
        build_graph([weed(0, 0.2, 0.1)], None, tool, PlannerConfig(), (0.5, 0.1))


def test_edge_scores_match_definitions(tool):
    cfg = PlannerConfig(omega=10.0)
    g = build_graph([weed(0, 0.5, 0.36)], None, tool, cfg, (0.0, 0.0))
    (e,) = g.edges()
    assert e.s == pytest.approx(0.928)
    assert e.gamma_score == pytest.approx(1 / (1 + math.exp(-9.28)))


# enumeration, scoring and selection


def test_single_reachable_target(tool):
    g = build_graph([weed(0, 0.3, 0.1)], None, tool, PlannerConfig(), (0, 0.1))
    assert [c.nodes for c in enumerate_notsp(g, PlannerConfig())] == [(), (0,)]


def test_two_node_fixture(tool):
    # both start edges clear rho but the 0 -> 1 hop does not
    ws = [weed(0, 0.2, 0.0), weed(1, 0.22, 0.3)]
    cfg = PlannerConfig()
    g = build_graph(ws, None, tool, cfg, (0.0, 0.15))
    assert g.gamma[0, 1] >= cfg.rho and g.gamma[0, 2] >= cfg.rho and g.gamma[1, 2] < cfg.rho
    assert sorted(c.nodes for c in enumerate_notsp(g, cfg)) == [(), (0,), (1,)]


def test_score_trajectory_cases(tool):
    cfg = PlannerConfig()
    ws = [weed(0, 1.0, 0.1), weed(1, 2.0, 0.1)]
    g = build_graph(ws, None, tool, cfg, (0, 0.1))
    assert score_trajectory((0, 1), g, cfg.rho) == pytest.approx(1.0)
    g.gamma[0, 1], g.gamma[1, 2] = 0.8, 0.9
    assert score_trajectory((0, 1), g, 0.6) == pytest.approx(0.85)
    g.gamma[1, 2] = 0.55
    assert score_trajectory((0, 1), g, 0.6) == 0.0
    assert score_trajectory((), g, 0.6) == 0.0


def test_select_by_kappa():
    cands = [TrajectoryCandidate(0, (1,), 0.9, 1.1), TrajectoryCandidate(0, (2,), 0.7, 2.0)]
    assert select_trajectory(cands, "biodiv").nodes == (2,)


def test_select_all_infeasible_is_empty():
    cands = [TrajectoryCandidate(2, (1,), 0.0), TrajectoryCandidate(2, (1, 2), 0.0)]
    best = select_trajectory(cands)
    assert best.nodes == () and best.axis_id == 2


def test_select_tie_breaks():
    # equal count and score: shorter lateral travel, then lowest first id
    a = TrajectoryCandidate(0, (3, 4), 0.9, distance=0.2)
    b = TrajectoryCandidate(0, (1, 4), 0.9, distance=0.3)
    c = TrajectoryCandidate(0, (2, 4), 0.9, distance=0.2)
    assert select_trajectory([a, b, c]).nodes == (2, 4)


def test_baseline_ignores_kappa_scale(tool):
    rng = np.random.default_rng(5)
    cfg = PlannerConfig()
    for _ in range(50):
        axis, plants, start = random_instance(rng, tool)
        ws = [p for p in plants if p.kind == "weed"]
        g = build_graph(ws, None, tool, cfg, start, axis)
        kap = {w.id: float(rng.uniform(0.1, 3)) for w in ws}
        a = best_trajectory(g, cfg, "baseline", kap)
        b = best_trajectory(g, cfg, "baseline", {k: 10 * v for k, v in kap.items()})
        assert a.nodes == b.nodes


def test_invalid_selection_mode(tool):
    g = build_graph([weed(0, 0.3, 0.1)], None, tool, PlannerConfig(), (0, 0.1))
    with pytest.raises(ValueError):
        best_trajectory(g, PlannerConfig(), "greedy")
    with pytest.raises(ValueError):
        select_trajectory([], "greedy")


def test_window_cap(tool):
    ws = [weed(i, 0.01 * (i + 1), 0.1) for i in range(13)]
    g = build_graph(ws, None, tool, PlannerConfig(), (0, 0.1))
    with pytest.raises(WindowOverflowError, match="shrink window_length"):
        best_trajectory(g, PlannerConfig())


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["baseline", "biodiv"]))
def test_fast_search_matches_enumeration_and_oracle(seed, mode):
    tool = ToolConfig()
    rng = np.random.default_rng(seed)
    axis, plants, start = random_instance(rng, tool, max_targets=7)
    f = row(plants)
    kap = harmfulness_map(f) if mode == "biodiv" else None
    cfg = PlannerConfig()
    g = build_graph(f.weeds, None, tool, cfg, start, axis)
    fast = best_trajectory(g, cfg, mode, kap)
    slow = select_trajectory(enumerate_notsp(g, cfg), mode, kap)
    ref = brute_force_plan(f.weeds, tool, cfg, mode, start=start, crops=f.crops)
    assert fast.nodes == slow.nodes == ref.best_nodes
    assert fast.c_score == pytest.approx(ref.best_c, abs=1e-12)
    if mode == "biodiv":
        assert fast.k_score == pytest.approx(ref.best_k)


def test_enumeration_matches_oracle_candidate_count(tool):
    # every ordered feasible subset found by brute force shows up exactly once
    import itertools
    cfg = PlannerConfig()
    rng = np.random.default_rng(8)
    for _ in range(30):
        axis, plants, start = random_instance(rng, tool, max_targets=6)
        ws = sorted((p for p in plants if p.kind == "weed"), key=lambda p: (p.x, p.y, p.id))
        g = build_graph(ws, None, tool, cfg, start, axis)
        found = {c.nodes for c in enumerate_notsp(g, cfg)}
        expected = {()}
        for r in range(1, len(ws) + 1):
            for combo in itertools.combinations(ws, r):
                if any(b.x <= a.x for a, b in zip(combo, combo[1:])):
                    continue
                prev = start
                ok = True
                for w in combo:
                    s = (w.x - prev[0]) / tool.gamma - abs(w.y - prev[1]) / tool.theta
                    ok &= 1 / (1 + math.exp(-cfg.omega * s)) >= cfg.rho
                    prev = (w.x, w.y)
                if ok:
                    expected.add(tuple(w.id for w in combo))
        assert found == expected


# planner config


@pytest.mark.parametrize("bad", [dict(rho=0.5), dict(rho=1.0), dict(omega=0), dict(mode="x"),
                                 dict(stride_fraction=0.3), dict(window_length=0), dict(max_window_targets=0)])
def test_invalid_planner_config(bad):
    with pytest.raises(ConfigError):
        PlannerConfig(**bad)


def test_planner_config_round_trip():
    c = PlannerConfig(omega=12, mode="segment", biodiv=True, stride_fraction=0.25)
    assert PlannerConfig.from_dict(c.to_dict()) == c
    assert c.stride == pytest.approx(0.25)


# segment view


def test_segment_empty_field(tool):
    plan = plan_segment_view(row([], length=3), tool, PlannerConfig(mode="segment"))
    assert plan.nodes() == [[], [], [], []]


def test_segment_one_weed_per_window_per_axis(tool):
    ws = [weed(4 * k + a, k + 0.5, tool.home(a)) for k in range(3) for a in range(4)]
    plan = plan_segment_view(row(ws), tool, PlannerConfig(mode="segment"))
    assert plan.planned_ids() == {w.id for w in ws}


def test_segment_plans_windows_independently(tool, two_segment_row):
    plan = plan_segment_view(two_segment_row, tool, PlannerConfig(mode="segment"))
    a0 = plan.axes[0]
    assert [w.nodes for w in a0.windows] == [(0,), ()]
    assert a0.nodes == [0]


def test_plan_dump_round_trip(tool, two_segment_row):
    from rowplan import Plan
    cfg = PlannerConfig(mode="segment")
    plan = plan_segment_view(two_segment_row, tool, cfg)
    d = plan.to_dict(two_segment_row, tool, cfg)
    assert d["axes"][0]["edges"][0]["from"] == -1
    assert d["axes"][0]["c"] == pytest.approx(d["axes"][0]["edges"][0]["gamma"])
    back = Plan.from_dict(d)
    assert back.nodes() == plan.nodes()
