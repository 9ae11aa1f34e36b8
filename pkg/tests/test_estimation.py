import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qecmetrology.codes import logical_flip_retention
from qecmetrology.estimation import (
    EstimationBudget,
    OptimizationError,
    SweepConfig,
    baseline_bounds,
    closed_form_valid,
    default_bracket,
    encoded_objective,
    encoded_retention_power,
    f_per_t_asymptote,
    f_per_t_closed_form,
    fit_loglog_slope,
    odd_ceil_log,
    optimize_interrogation_time,
    precision_bound,
    scaling_sweep,
    t_opt_asymptote,
    t_opt_closed_form,
)


def unencoded(n, gamma):
    return lambda t: t * math.exp(-2 * n * gamma * t) * n * n


def numeric_opt(gamma, m, n):
    lo, hi = default_bracket(gamma)
    return optimize_interrogation_time(encoded_objective(gamma, m, n), hi, lo)


def test_precision_bounds():
    assert precision_bound(100.0, EstimationBudget(nu=1)).delta_lambda == pytest.approx(0.1, rel=1e-15)
    assert precision_bound(10.0, EstimationBudget(nu=1)).delta_lambda == pytest.approx(1 / math.sqrt(10), rel=1e-15)
    assert precision_bound(16.0, EstimationBudget(nu=4)).delta_lambda == pytest.approx(0.125, rel=1e-15)
    b = precision_bound(25.0, EstimationBudget(T_total=3.0))
    assert b.delta_lambda_sqrtT == pytest.approx(0.2, rel=1e-15)
    with pytest.raises(AttributeError):
        b.delta_lambda
    with pytest.raises(ValueError):
        EstimationBudget()
    with pytest.raises(ValueError):
        EstimationBudget(nu=0.5)
    with pytest.raises(ValueError):
        precision_bound(0.0, EstimationBudget(nu=1))


@pytest.mark.parametrize("n", [1, 10, 100])
@pytest.mark.parametrize("gamma", [0.1, 1.0])
def test_optimizer_unencoded(n, gamma):
    lo, hi = default_bracket(gamma)
    r = optimize_interrogation_time(unencoded(n, gamma), hi, lo)
    assert not r.at_boundary
    assert r.t_opt == pytest.approx(1 / (2 * n * gamma), rel=1e-6)
    assert r.value == pytest.approx(n / (2 * gamma * math.e), rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 5.0), st.floats(1e-3, 2.0))
def test_optimizer_recovers_peak_location(a, scale):
    # t exp(-t/a) peaks at t = a
    r = optimize_interrogation_time(lambda t: scale * t * math.exp(-t / a), 100 * a, 1e-6 * a)
    assert r.t_opt == pytest.approx(a, rel=1e-6)


def test_constant_objective_boundary():
    r = optimize_interrogation_time(lambda t: 1.0, 5.0)
    assert r.at_boundary and r.t_opt == pytest.approx(5.0, rel=1e-15)


def test_nonfinite_objective_rejected():
    with pytest.raises(OptimizationError):
        optimize_interrogation_time(lambda t: math.nan if t > 1 else t, 10.0)
    with pytest.raises(ValueError):
        optimize_interrogation_time(lambda t: t, 1.0, 2.0)


def test_encoded_objective_matches_retention():
    g, m, n, t = 1.0, 3, 4, 0.05
    pl = logical_flip_retention((1 + math.exp(-g * t)) / 2, m)
    assert encoded_retention_power(g, m, n, t) == pytest.approx((2 * pl - 1) ** (2 * n), rel=1e-12)
    assert encoded_objective(g, m, n)(t) == pytest.approx(t * (2 * pl - 1) ** (2 * n) * n * n, rel=1e-12)


def test_closed_forms_as_printed():
    m, g, n = 5, 0.2, 30
    base = 2 * math.comb(5, 3) * (g / 2) ** 3 * (3 + n * m)
    t = base ** (-2 / 7)
    assert t_opt_closed_form(m, g, n) == pytest.approx(t, rel=1e-15)
    assert f_per_t_closed_form(m, g, n) == pytest.approx(n * n * t * ((n * m + 2) / (n * m + 3)) ** (2 * n), rel=1e-14)
    with pytest.raises(ValueError):
        t_opt_closed_form(4, g, n)
    with pytest.raises(ValueError):
        t_opt_closed_form(1, g, n)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([3, 5, 7, 9, 11, 15]), st.floats(1e-4, 10.0), st.integers(1, 10**8))
def test_closed_forms_finite_positive(m, g, n):
    for v in (t_opt_closed_form(m, g, n), f_per_t_closed_form(m, g, n)):
        assert math.isfinite(v) and v > 0


def test_closed_t_opt_m3_gamma1_n100():
    g, n = 1.0, 100
    assert closed_form_valid(3, g, n)
    assert t_opt_closed_form(3, g, n) == pytest.approx(numeric_opt(g, 3, n).t_opt, rel=0.1)


def test_closed_t_opt_m3_gamma001_n1000():
    r = numeric_opt(0.01, 3, 1000)
    assert t_opt_closed_form(3, 0.01, 1000) == pytest.approx(r.t_opt, rel=0.1)


def test_closed_f_per_t_m3_gamma001_n1000():
    r = numeric_opt(0.01, 3, 1000)
    assert f_per_t_closed_form(3, 0.01, 1000) == pytest.approx(r.value, rel=0.1)


def test_t_opt_grows_with_m():
    for g, n in ((0.01, 1000), (1.0, 100)):
        ts = [t_opt_closed_form(m, g, n) for m in (3, 5, 7)]
        assert ts[0] < ts[1] < ts[2]
        nums = [numeric_opt(g, m, n).t_opt for m in (3, 5, 7)]
        assert nums[0] < nums[1] < nums[2]


def test_asymptotes():
    g = 0.01
    assert t_opt_asymptote(g) == pytest.approx(1 / (2 * g * math.e**2), rel=1e-15)
    n = 10**6
    m = odd_ceil_log(n)
    assert m == 15
    assert t_opt_closed_form(m, g, n) == pytest.approx(t_opt_asymptote(g), rel=0.2)
    # with m = ln N both Stirling forms sit a factor m^(-2/m) below the limit
    for n in (1e10, 1e40, 1e150):
        m = math.log(n)
        assert t_opt_asymptote(g, n, m) / t_opt_asymptote(g) == pytest.approx(m ** (-2 / m), rel=1e-10)
    n = 1e40
    m = math.log(n)
    assert f_per_t_asymptote(n, g, m) / f_per_t_asymptote(n, g) == pytest.approx(m ** (-2 / m), rel=1e-10)


def test_closed_forms_near_limit_for_large_n():
    # odd rounding of ln N makes the approach jagged, so check a band
    g = 0.01
    for k in range(4, 13):
        n = 10**k
        m = odd_ceil_log(n)
        assert 0.8 <= t_opt_closed_form(m, g, n) / t_opt_asymptote(g) <= 1.2
        assert 0.8 <= f_per_t_closed_form(m, g, n) / f_per_t_asymptote(n, g) <= 1.0


def test_odd_ceil_log():
    assert [odd_ceil_log(n) for n in (1, 2, 3, 8, 21, 10**6)] == [1, 1, 3, 3, 5, 15]
    with pytest.raises(ValueError):
        odd_ceil_log(0)


def test_baselines():
    b = baseline_bounds(100, 1.0)
    assert b.parallel == pytest.approx(math.sqrt(0.02), rel=1e-15)
    assert b.ghz_t_opt == pytest.approx(0.005, rel=1e-15)
    for n, g in ((1, 0.1), (37, 2.0), (10**5, 0.01)):
        bb = baseline_bounds(n, g)
        assert bb.classical / bb.parallel == pytest.approx(math.sqrt(math.e), rel=1e-14)
    assert baseline_bounds(1000, 1.0).transversal_t_opt == pytest.approx((3 / 1000) ** (1 / 3), rel=1e-15)
    with pytest.raises(ValueError):
        baseline_bounds(0, 1.0)


def test_encoding_crossover_exists():
    g = 0.01
    ns = [1, 2, 3, 5, 10, 30, 100, 1000]
    wins = [numeric_opt(g, 3, n).value > n / (2 * g * math.e) for n in ns]
    assert any(wins)
    n0 = ns[wins.index(True)]
    assert n0 == 1
    assert all(wins[ns.index(n0):])
    # closed-form column shows the same crossover, measured against the classical bound
    for n in ns[ns.index(n0):]:
        if n >= 10:
            assert 1 / math.sqrt(f_per_t_closed_form(3, g, n)) < baseline_bounds(n, g).classical


def test_phase_sweep_retention():
    res = scaling_sweep(SweepConfig(n_values=(10, 1000, 250_000, 10**7), m=5, mode="phase", p=1 - 1e-3))
    rows = {r.N: r for r in res.rows}
    assert rows[250_000].heisenberg_retention >= 0.99
    assert rows[10**7].heisenberg_retention < 0.99
    assert "below_retention" in rows[10**7].flags
    assert res.n_max == 250_000


def test_phase_sweep_slope():
    ns = np.unique(np.geomspace(10, 250_000, 20).astype(int))
    res = scaling_sweep(SweepConfig(n_values=tuple(ns), m=5, mode="phase", p=1 - 1e-3))
    slope = fit_loglog_slope([r.N for r in res.rows], [r.delta_lambda_sqrtT for r in res.rows])
    classical = fit_loglog_slope([r.N for r in res.rows], [r.baseline_classical for r in res.rows])
    assert slope == pytest.approx(-1.0, abs=0.02)
    assert classical == pytest.approx(-0.5, abs=1e-12)


def test_ceil_log_sweep_tends_to_heisenberg():
    p = 1 - 1e-3
    res = scaling_sweep(SweepConfig(n_values=(10, 100, 1000, 10**4, 10**5), m_policy="ceil_log", mode="phase", p=p))
    for r in res.rows:
        assert 4 * r.N * (2 * math.sqrt(1 - p)) ** r.m < 1
        assert r.m == odd_ceil_log(r.N)
    ret = [r.heisenberg_retention for r in res.rows]
    assert ret[-1] > 0.999


def test_noiseless_sweep():
    res = scaling_sweep(SweepConfig(n_values=(1, 7, 50), gamma=0.0, t_max=2.0))
    for r in res.rows:
        assert r.f_per_t * r.t_opt == pytest.approx(r.N**2 * r.t_opt**2, rel=1e-15)
        assert r.t_opt == 2.0
        assert r.delta_lambda_sqrtT * math.sqrt(2.0) == pytest.approx(1 / r.N, rel=1e-14)
        assert "noiseless" in r.flags


def test_frequency_sweep_columns():
    res = scaling_sweep(SweepConfig(n_values=(100, 10), m=3, gamma=0.01))
    assert [r.N for r in res.rows] == [10, 100]
    r = res.rows[1]
    assert r.t_opt == t_opt_closed_form(3, 0.01, 100)
    assert r.f_per_t == f_per_t_closed_form(3, 0.01, 100)
    assert r.t_opt_numeric == pytest.approx(numeric_opt(0.01, 3, 100).t_opt, rel=1e-12)
    assert r.delta_lambda_sqrtT == pytest.approx(r.f_per_t**-0.5, rel=1e-15)
    un = scaling_sweep(SweepConfig(n_values=(5,), m=1, gamma=0.1)).rows[0]
    assert "unencoded" in un.flags
    assert un.t_opt == pytest.approx(1.0, rel=1e-15)
    assert un.t_opt_numeric == pytest.approx(1.0, rel=1e-6)


def test_parallel_sweep_matches_serial():
    cfg = dict(n_values=(3, 30, 300), m=5, gamma=0.05)
    a = scaling_sweep(SweepConfig(**cfg))
    b = scaling_sweep(SweepConfig(**cfg, workers=3))
    assert a.rows == b.rows


def test_sweep_config_rejections():
    with pytest.raises(ValueError):
        SweepConfig(n_values=())
    with pytest.raises(ValueError):
        SweepConfig(n_values=(0, 2))
    with pytest.raises(ValueError):
        SweepConfig(n_values=(2,), m=4)
    with pytest.raises(ValueError):
        SweepConfig(n_values=(2,), mode="phase", p=0.4)
    with pytest.raises(ValueError):
        SweepConfig(n_values=(2,), gamma=-1.0)
