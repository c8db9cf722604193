import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isac.metrics import beam_gain
from isac.scenario import ScenarioConfig, steering_vector
from isac.solver_closed_form import InfeasibleError, feasibility, solve_no_interference
from oracles import cfg_with_load, corr_with_target, make_instance, random_feasible, subspace_oracle


def test_feasibility_examples(rng):
    h = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    cfg = ScenarioConfig(rate_threshold_bps=0)
    assert feasibility(h, cfg).feasible and feasibility(h, cfg).t == 0
    f = feasibility(h, cfg_with_load(cfg, h, 1.0))
    assert f.feasible and f.t == pytest.approx(1.0, rel=1e-12)
    assert not feasibility(h, cfg_with_load(cfg, h, 2.0)).feasible


def test_zero_channel_infeasible():
    f = feasibility(np.zeros(6), ScenarioConfig())
    assert not f.feasible and f.t == np.inf


def test_infeasible_raises_with_load(rng):
    h = rng.standard_normal(6) + 0j
    with pytest.raises(InfeasibleError) as info:
        solve_no_interference(h, cfg_with_load(ScenarioConfig(), h, 1.5))
    assert info.value.t_load == pytest.approx(1.5)


def test_no_rate_demand_is_radar_mrt(rng):
    cfg = ScenarioConfig(rate_threshold_bps=0)
    h = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    bf, diag = solve_no_interference(h, cfg)
    assert diag.case_taken == "mrt_radar"
    a = steering_vector(0, 6, 0.5)
    assert abs(np.vdot(a, bf.w)) ** 2 == pytest.approx(cfg.p0 * 6, rel=1e-12)


def test_aligned_channel(rng):
    h, cfg = make_instance(rng, "aligned")
    bf, diag = solve_no_interference(h, cfg)
    assert diag.case_taken in ("mrt_radar", "mrt_comm")
    a = steering_vector(0, 6, 0.5)
    assert abs(np.vdot(a, bf.w)) ** 2 == pytest.approx(cfg.p0 * 6, rel=1e-6)


def test_exactly_aligned_is_case_i():
    a = steering_vector(0, 6, 0.5)
    h = 0.8 * a
    cfg = cfg_with_load(ScenarioConfig(), h, 0.7)
    assert solve_no_interference(h, cfg)[1].case_taken == "mrt_radar"


def test_case_ii_reached_at_unit_load_near_alignment():
    a = steering_vector(0, 6, 0.5)
    e = np.zeros(6, complex)
    e[0], e[1] = 1, -1
    h = a + 1e-6 * e
    cfg = cfg_with_load(ScenarioConfig(), h, 1.0)
    # corr < 1 by ~1e-13 while load is 1 (up to rounding), so case i fails
    bf, diag = solve_no_interference(h, cfg)
    assert diag.case_taken in ("mrt_comm", "mrt_radar")
    assert abs(np.vdot(h, bf.w)) ** 2 >= cfg.omega * (1 - 1e-9)


@pytest.mark.parametrize("case", ["mrt_radar", "blend"])
def test_matches_subspace_oracle(rng, case):
    for _ in range(5):
        h, cfg = make_instance(rng, case)
        bf, diag = solve_no_interference(h, cfg)
        assert diag.case_taken == case
        ref = subspace_oracle(h, cfg)
        assert beam_gain(bf, 0, cfg) == pytest.approx(ref, rel=1e-6)


def test_blend_activates_rate(rng):
    for _ in range(20):
        h, cfg = make_instance(rng, "blend")
        bf, diag = solve_no_interference(h, cfg)
        assert abs(np.vdot(h, bf.w)) ** 2 == pytest.approx(cfg.omega, rel=1e-8)
        assert diag.u2 >= 0 and diag.z2 >= 0 and 0 <= diag.corr <= 1 and diag.t_load <= 1


def test_mrt_rate_slack(rng):
    for _ in range(20):
        h, cfg = make_instance(rng, "mrt_radar")
        bf, _ = solve_no_interference(h, cfg)
        assert abs(np.vdot(h, bf.w)) ** 2 > cfg.omega


def test_dominates_random_feasible(rng):
    for case in ("mrt_radar", "blend"):
        h, cfg = make_instance(rng, case)
        bf, _ = solve_no_interference(h, cfg)
        a = steering_vector(0, 6, 0.5)
        W = random_feasible(rng, h, cfg, 2000)
        assert np.max(np.abs(W @ a.conj()) ** 2) <= beam_gain(bf, 0, cfg) * (1 + 1e-9)


def test_orthogonal_channel_phase_guard():
    # h orthogonal to a(0) -> corr == 0, phase factor defaults to 1
    h = np.array([1, -1, 0, 0, 0, 0], complex)
    cfg = cfg_with_load(ScenarioConfig(), h, 0.3)
    bf, diag = solve_no_interference(h, cfg)
    assert diag.case_taken == "blend" and diag.corr == 0
    assert beam_gain(bf, 0, cfg) == pytest.approx(subspace_oracle(h, cfg), rel=1e-6)


def test_boundary_continuity(rng):
    base = ScenarioConfig()
    h = (rng.standard_normal(6) + 1j * rng.standard_normal(6)) / np.sqrt(2)
    c2 = corr_with_target(h, base) ** 2
    loads = c2 * (1 + np.linspace(-1e-7, 1e-7, 21))
    vals = [beam_gain(solve_no_interference(h, cfg_with_load(base, h, t))[0], 0, base) for t in loads]
    assert np.max(np.abs(np.diff(vals))) / vals[0] < 1e-6


def test_output_phase_normalized(rng):
    h, cfg = make_instance(rng, "blend")
    bf, _ = solve_no_interference(h, cfg)
    hw = np.vdot(h, bf.w)
    assert abs(hw.imag) <= 1e-12 * abs(hw) and hw.real > 0


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["mrt_radar", "blend", "aligned"]),
       st.integers(2, 12), st.floats(20, 40))
def test_full_power_property(seed, case, n, p0_dbm):
    r = np.random.default_rng(seed)
    h, cfg = make_instance(r, case, n, ScenarioConfig(p0_dbm=p0_dbm))
    bf, _ = solve_no_interference(h, cfg)
    assert np.vdot(bf.w, bf.w).real == pytest.approx(cfg.p0, rel=1e-10)
    assert abs(np.vdot(h, bf.w)) ** 2 >= cfg.omega - 1e-9 * cfg.p0 * np.vdot(h, h).real
