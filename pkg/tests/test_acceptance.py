"""Acceptance criteria, each at its stated tolerance and runtime budget.

Every test prints one ``criterion N: PASS/FAIL - detail`` line (collected
again in the terminal summary) and then asserts.
"""

import itertools
import math
import time

import numpy as np
from scipy import integrate, optimize

from binary_homodyne.ideal import ideal_avg_posterior, ideal_success
from binary_homodyne.link import LinkScenario, required_samples
from binary_homodyne.multicopy import (
    OutcomeCount,
    count_posterior,
    optimize_multicopy_posterior,
    optimize_multicopy_success,
    sequence_posterior,
)
from binary_homodyne.numerics import log_binomial_pmf, scaled_chi2_logpdf, std_normal_cdf
from binary_homodyne.samples import binarize, default_checkpoints, generate_samples, posterior_trace
from binary_homodyne.single import (
    optimal_displacement_success,
    optimize_single_posterior,
    single_success,
)
from binary_homodyne.states import Hypothesis, QuadratureModel, marginal_pdf, variance_of_r
from conftest import cached_overhead


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def test_criterion_1_posterior_optimal_displacement(acceptance_report):
    with Timer() as t:
        alpha, post = optimize_single_posterior(0.085)
    ok = abs(alpha - 1.501) <= 0.015 and t.elapsed < 1.0
    acceptance_report(1, ok, f"alpha={alpha:.5f} (1.501 +/- 0.015), posterior={post:.6f}, {t.elapsed:.2f}s (< 1s)")
    assert ok


def test_criterion_2_overhead_factor(acceptance_report):
    with Timer() as t:
        ratios = {
            (target, r): cached_overhead(target, r).ratio
            for r in (0.05, 0.085, 0.3)
            for target in (0.6, 0.7, 0.8, 0.9, 0.95)
        }
    bad = {k: v for k, v in ratios.items() if not 3.0 <= v <= 3.6}
    ok = not bad and t.elapsed < 300
    lo, hi = min(ratios.values()), max(ratios.values())
    acceptance_report(
        2, ok, f"ratios in [{lo:.3f}, {hi:.3f}] over 15 (target, r) pairs (need [3.0, 3.6]), "
        f"outside: {bad or 'none'}, {t.elapsed:.1f}s (< 300s)"
    )
    assert ok


def test_criterion_3_asymptotic_bounds(acceptance_report):
    with Timer() as t:
        succ, _ = single_success(5.0)
        _, post = optimize_single_posterior(5.0)
    ok = 0.749 <= succ <= 0.750 and 0.666 <= post <= 0.667 and t.elapsed < 1.0
    acceptance_report(
        3, ok, f"r=5: success={succ:.5f} (need [0.749, 0.750]), posterior={post:.5f} "
        f"(need [0.666, 0.667]), {t.elapsed:.2f}s (< 1s)"
    )
    assert ok


def test_criterion_4_discontinuity(acceptance_report):
    with Timer() as t:
        a20, tau20, _ = optimize_multicopy_success(20, 0.085)
        a21, tau21, _ = optimize_multicopy_success(21, 0.085)
    acc20 = tuple(range(tau20 + 1, 21))
    acc21 = tuple(range(tau21 + 1, 22))
    ok = (
        1.7 <= a20 <= 1.9 and acc20 == (20,)
        and 1.35 <= a21 <= 1.50 and acc21 == (20, 21)
        and t.elapsed < 10
    )
    acceptance_report(
        4, ok, f"N=20: alpha={a20:.4f}, accept k in {set(acc20)}; N=21: alpha={a21:.4f}, "
        f"accept k in {set(acc21)}; {t.elapsed:.2f}s (< 10s)"
    )
    assert ok


def test_criterion_5_link_budget_anchors(acceptance_report):
    results = {}
    for loss, anchor in ((40.0, 3e9), (45.0, 3e10)):
        with Timer() as t:
            n = required_samples(LinkScenario(loss_db=loss, squeezing_db_in=6.0, target_error=1e-2))
        results[loss] = (n, anchor, t.elapsed)
    ok = all(anchor / 3 <= n <= anchor * 3 and el < 120 for n, anchor, el in results.values())
    detail = "; ".join(
        f"{loss:g} dB: N={n:.3e} vs {anchor:.0e} (factor {n / anchor:.2f}, need <= 3), {el:.1f}s"
        for loss, (n, anchor, el) in results.items()
    )
    acceptance_report(5, ok, detail)
    assert ok


def test_criterion_6_sufficiency(acceptance_report):
    worst = 0.0
    checked = 0
    with Timer() as t:
        for r, alpha in ((0.085, 1.501), (0.69, 0.6)):
            for N in range(1, 13):
                by_k = {k: count_posterior(OutcomeCount(N, k), r, alpha) for k in range(N + 1)}
                for seq in itertools.product("+-", repeat=N):
                    a = sequence_posterior(seq, r, alpha)
                    b = by_k[seq.count("+")]
                    worst = max(worst, *(abs(a[h] - b[h]) for h in Hypothesis))
                    checked += 1
    ok = worst <= 1e-13 and t.elapsed < 60
    acceptance_report(
        6, ok, f"{checked} sequences (N <= 12, two (r, alpha) pairs), max |difference|={worst:.1e} "
        f"(floating-point exact: <= 1e-13), {t.elapsed:.1f}s (< 60s)"
    )
    assert ok


def test_criterion_7_monte_carlo(acceptance_report):
    r, alpha, n = 0.085, 1.501, 10**6
    Vs = variance_of_r(r)
    pc, ps = std_normal_cdf(alpha), std_normal_cdf(alpha / math.sqrt(Vs))
    cps = default_checkpoints(n)
    freq_ok = 0
    finals = []
    mean_trace = np.zeros(len(cps))
    with Timer() as t:
        for seed in range(20):
            coh = generate_samples(1.0, n, 2 * seed)
            sqz = generate_samples(Vs, n, 2 * seed + 1)
            within = all(
                abs(binarize(s, alpha).k / n - p) <= 4 * math.sqrt(p * (1 - p) / n)
                for s, p in ((coh, pc), (sqz, ps))
            )
            freq_ok += within
            tc, ts = posterior_trace(coh, sqz, r, alpha, cps)
            finals += [tc.posterior[-1], ts.posterior[-1]]
            mean_trace += 0.5 * (np.array(tc.posterior) + np.array(ts.posterior)) / 20
    ok = freq_ok >= 19 and min(finals) > 0.9 and t.elapsed < 120
    acceptance_report(
        7, ok, f"frequencies within 4 sigma in {freq_ok}/20 seeds (need >= 19); final posteriors "
        f"min={min(finals):.6f} (need > 0.9), mean trace at N=1e3: {mean_trace[cps.index(1000)]:.4f}; "
        f"{t.elapsed:.1f}s (< 120s)"
    )
    assert ok


def test_criterion_8_baseline_dominance(acceptance_report):
    rows = []
    with Timer() as t:
        for N in (1, 10, 100, 1000, 10_000):
            rows.append(
                (N, ideal_avg_posterior(N, 0.085), optimize_multicopy_posterior(N, 0.085)[1],
                 ideal_success(N, 0.085), optimize_multicopy_success(N, 0.085)[2])
            )
    ok = all(ip >= bp and is_ >= bs for _, ip, bp, is_, bs in rows) and t.elapsed < 120
    detail = ", ".join(f"N={N}: {ip:.4f}>={bp:.4f} / {is_:.4f}>={bs:.4f}" for N, ip, bp, is_, bs in rows)
    acceptance_report(8, ok, f"posterior / success (ideal >= BHD): {detail}; {t.elapsed:.1f}s (< 120s)")
    assert ok


def test_criterion_9_kernel_properties(acceptance_report):
    failures = []
    with Timer() as t:
        xs = np.linspace(-40, 40, 8001)
        sym = np.max(np.abs(std_normal_cdf(xs) + std_normal_cdf(-xs) - 1))
        if sym > 1e-12:
            failures.append(f"cdf symmetry {sym:.1e}")

        worst_norm = 0.0
        for N in (1, 7, 100, 1000, 10_000):
            for p in (0.1, 0.5, 0.84):
                total = math.fsum(np.exp(log_binomial_pmf(N, np.arange(N + 1), p)))
                worst_norm = max(worst_norm, abs(total - 1))
        if worst_norm > 1e-12:
            failures.append(f"binomial normalization {worst_norm:.1e}")

        worst_chi = 0.0
        for N in (1, 2, 7, 100):
            for V in (0.25, 1.0, 0.9999):
                pdf = lambda s: math.exp(scaled_chi2_logpdf(s, N, V))  # noqa: E731
                mass = sum(integrate.quad(pdf, a, b, limit=200)[0] for a, b in ((0, V), (V, np.inf)))
                mean = sum(integrate.quad(lambda s: s * pdf(s), a, b, limit=200)[0] for a, b in ((0, V), (V, np.inf)))
                worst_chi = max(worst_chi, abs(mass - 1), abs(mean / V - 1))
        if worst_chi > 1e-8:
            failures.append(f"chi-squared moments {worst_chi:.1e}")

        worst_x = 0.0
        for r in (0.05, 0.085, 0.3, 0.69):
            coh, sqz = QuadratureModel(1.0), QuadratureModel(variance_of_r(r))
            root = optimize.brentq(lambda x: marginal_pdf(coh, x) - marginal_pdf(sqz, x), 1e-6, 10, xtol=1e-14)
            worst_x = max(worst_x, abs(root - optimal_displacement_success(r)))
        if worst_x > 1e-10:
            failures.append(f"intersection identity {worst_x:.1e}")
    ok = not failures and t.elapsed < 30
    acceptance_report(
        9, ok, f"cdf symmetry {sym:.1e} (<= 1e-12), binomial normalization {worst_norm:.1e} (<= 1e-12), "
        f"chi-squared mass/mean {worst_chi:.1e} (<= 1e-8), intersection {worst_x:.1e} (<= 1e-10); "
        f"{t.elapsed:.2f}s (< 30s)"
    )
    assert ok
