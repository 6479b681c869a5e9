import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import ndtr

from binary_homodyne.exceptions import ValidationError
from binary_homodyne.single import (
    delta_pi,
    optimal_displacement_success,
    optimize_single_posterior,
    p_minus,
    p_plus,
    single_posterior,
    single_report,
    single_success,
    success_at,
)
from binary_homodyne.states import variance_of_r


def test_p_plus_examples():
    assert p_plus(1.0, 0.0) == 0.5
    assert p_plus(1.0, 1.0) == pytest.approx(0.841345, abs=5e-7)
    assert p_plus(math.exp(-0.17), 1.0) == pytest.approx(0.8618, abs=1e-4)
    assert p_plus(math.exp(-0.17), 1.0) + p_minus(math.exp(-0.17), 1.0) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValidationError):
        p_plus(0.0, 1.0)


def test_delta_pi_examples():
    assert delta_pi(0, 1.3) == 0.0
    assert delta_pi(0.7, 0.0) == 0.0
    assert delta_pi(0.085, 0.9578) == pytest.approx(0.0206, abs=5e-5)
    assert delta_pi(0.3, 40.0) == 0.0


@given(st.floats(1e-3, 5), st.floats(0, 10))
def test_squeezed_state_favours_plus(r, alpha):
    assert p_plus(variance_of_r(r), alpha) >= p_plus(1.0, alpha)


def test_single_posterior_no_squeezing():
    for a in (0.0, 0.4, 1.5, 7.0):
        assert single_posterior(0, a) == pytest.approx(0.5, abs=1e-15)


def test_single_posterior_large_squeezing_limit():
    # r -> inf with alpha -> 0+ approaches 2/3
    assert single_posterior(30, 1e-12) == pytest.approx(2 / 3, abs=1e-6)


def test_single_posterior_monte_carlo():
    """Simulated Bayes updates: draw hypothesis, outcome, score posterior of the truth."""
    r, alpha = 0.085, 1.501
    rng = np.random.default_rng(20240611)
    n = 4_000_000
    pc, ps = ndtr(alpha), ndtr(alpha / math.exp(-r))
    truth_sqz = rng.random(n) < 0.5
    plus = rng.random(n) < np.where(truth_sqz, ps, pc)
    post_sqz = np.where(plus, ps / (pc + ps), (1 - ps) / (2 - pc - ps))
    score = np.where(truth_sqz, post_sqz, 1 - post_sqz)
    mc = score.mean()
    se = score.std() / math.sqrt(n)
    assert single_posterior(r, alpha) == pytest.approx(0.5006, abs=1e-4)
    assert abs(single_posterior(r, alpha) - mc) < 5 * se


def test_optimal_displacement_examples():
    assert optimal_displacement_success(0) == 1.0
    assert optimal_displacement_success(1e-9) == pytest.approx(1.0, abs=1e-8)
    assert optimal_displacement_success(0.085) == pytest.approx(0.9578, abs=5e-5)
    assert optimal_displacement_success(50) < 1e-20
    assert optimal_displacement_success(800) == 0.0 or optimal_displacement_success(800) < 1e-300


def test_single_success_examples():
    assert single_success(0) == (0.5, 0.0)
    p, a = single_success(0.085)
    assert p == pytest.approx(0.5103, abs=5e-5)
    assert a == pytest.approx(0.9578, abs=5e-5)


def test_single_success_bound_approached():
    p, _ = single_success(12)
    assert 0.7499 < p <= 0.75


@pytest.mark.parametrize("r", [0.01, 0.085, 0.3, 0.69, 2])
def test_success_maximizer_matches_closed_form(r):
    _, a = single_success(r)
    assert a == pytest.approx(optimal_displacement_success(r), abs=1e-6)


def test_optimize_single_posterior_examples():
    a, p = optimize_single_posterior(0.085)
    assert a == pytest.approx(1.501, abs=0.015)
    assert optimize_single_posterior(0) == (0.0, 0.5)


def test_optimize_single_posterior_dense_grid():
    grid = np.linspace(0, 10, 100001)
    vals = np.array([single_posterior(1.0, a) for a in grid])
    a, p = optimize_single_posterior(1.0)
    assert a == pytest.approx(grid[vals.argmax()], abs=1e-3)
    assert p == pytest.approx(vals.max(), abs=1e-3)
    assert p >= vals.max() - 1e-12


@pytest.mark.parametrize("r", [0.01, 0.05, 0.085, 0.2, 0.35, 0.5])
def test_posterior_optimum_lies_beyond_success_optimum(r):
    a_post, _ = optimize_single_posterior(r)
    _, a_succ = single_success(r)
    assert a_post > a_succ


def test_optima_converge_for_large_r():
    gaps = []
    for r in (0.1, 1.0, 3.0, 6.0):
        gaps.append(optimize_single_posterior(r)[0] - single_success(r)[1])
    assert all(b < a for a, b in zip(gaps, gaps[1:]))


@given(st.floats(0, 4), st.floats(0, 6))
def test_symmetry_under_alpha_reflection(r, alpha):
    # reflecting alpha swaps the outcome labels; both figures of merit are unchanged
    assert single_posterior(r, -alpha) == pytest.approx(single_posterior(r, alpha), abs=1e-15)
    assert success_at(r, -alpha) == pytest.approx(success_at(r, alpha), abs=1e-15)
    V = variance_of_r(r)
    assert p_plus(V, -alpha) == pytest.approx(p_minus(V, alpha), abs=1e-15)


@settings(max_examples=60)
@given(st.floats(0, 6), st.floats(0, 10))
def test_report_invariants(r, alpha):
    rep = single_report(r, alpha)
    assert rep.delta_pi == pytest.approx(rep.p_plus_sqz - rep.p_plus_coh, abs=1e-15)
    assert rep.delta_pi >= -1e-15
    assert 0.5 - 1e-15 <= rep.avg_posterior <= 2 / 3
    assert 0.5 <= rep.success_prob <= 0.75
