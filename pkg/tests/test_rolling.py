import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rowplan import (AlreadyPassedError, FieldSpec, OrderingError, PlannerConfig, RollingPlanner, ToolConfig,
                     generate_field, harmfulness_map, plan_rolling_update, plan_rolling_view, plan_segment_view)
from rowplan.experiment import BIODIV_MIX

from conftest import weed


def test_no_new_plants_is_a_no_op(tool):
    st_ = RollingPlanner(tool, PlannerConfig())
    before = plan_rolling_update(st_, [weed(0, 0.3, 0.1), weed(1, 0.6, 0.8)], frontier=0.0)
    after = plan_rolling_update(st_, [], frontier=0.1)
    assert before == after == [[0], [], [1], []]
    assert [len(a.windows) for a in st_.axes] == [1, 0, 1, 0]


def test_observation_behind_frontier_rejected(tool):
    st_ = RollingPlanner(tool, PlannerConfig())
    with pytest.raises(AlreadyPassedError):
        st_.update([weed(0, 0.05, 0.1)], tool_x=0.0)  # frontier = 0.5 m/s * 0.2 s = 0.1 m


def test_frontier_cannot_move_back(tool):
    st_ = RollingPlanner(tool, PlannerConfig())
    st_.update([], frontier=1.0)
    with pytest.raises(OrderingError):
        st_.update([], frontier=0.5)


def test_update_needs_a_position(tool):
    with pytest.raises(ValueError):
        RollingPlanner(tool, PlannerConfig()).update([])


def test_rolling_reaches_what_segment_misses(tool, two_segment_row):
    seg = plan_segment_view(two_segment_row, tool, PlannerConfig(mode="segment"))
    rol = plan_rolling_view(two_segment_row, tool, PlannerConfig(mode="rolling"))
    assert seg.nodes()[0] == [0]
    # the intermediate frame sees the cluster while weed 0 is still uncommitted
    assert rol.nodes()[0] == [1, 2, 3]
    assert [w.nodes for w in rol.axes[0].windows] == [(0,), (1, 2, 3)]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([3.1, 8.2, 22.3]), st.booleans())
def test_full_stride_equals_segment_view(seed, lam, biodiv):
    tool = ToolConfig()
    f = generate_field(FieldSpec(lam=lam, length=6, seed=seed, species_mix=BIODIV_MIX, crop_spacing=0.25))
    kap = harmfulness_map(f)
    cfg = PlannerConfig(window_length=0.5, stride_fraction=1.0, commit_time=0.0, biodiv=biodiv)
    seg = plan_segment_view(f, tool, cfg, kappa=kap)
    rol = plan_rolling_view(f, tool, cfg, kappa=kap)
    assert seg.nodes() == rol.nodes()


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([0.5, 0.25]))
def test_committed_prefix_never_changes(seed, stride):
    tool = ToolConfig()
    f = generate_field(FieldSpec(lam=15.4, length=4, seed=seed))
    cfg = PlannerConfig(window_length=0.5, stride_fraction=stride)
    state = RollingPlanner(tool, cfg)
    s = cfg.stride
    m = cfg.strides_per_window
    cells = {}
    for p in f.plants:
        cells.setdefault(int(p.x // s), []).append(p)
    frozen = [[] for _ in range(tool.heads)]
    state.update([p for c in range(m) for p in cells.get(c, [])], frontier=0.0)
    for k in range(1, int(4 / s) + 1):
        plans = state.update(cells.get(k + m - 1, []), frontier=k * s)
        for i, nodes in enumerate(plans):
            assert nodes[:len(frozen[i])] == frozen[i]
            frozen[i] = nodes[:state._committed[i]]
            assert all(f.by_id()[n].x < k * s for n in frozen[i])
    state.finish()


def test_rolling_plan_is_kinematically_valid():
    from rowplan import SimConfig, simulate_run
    tool = ToolConfig()
    f = generate_field(FieldSpec(lam=22.3, length=10, seed=3))
    plan = plan_rolling_view(f, tool, PlannerConfig(window_length=0.5, stride_fraction=0.25))
    m = simulate_run(f, plan, tool, SimConfig())  # raises on any speed or band violation
    assert m.missed == m.total_weeds - len(plan.planned_ids())
