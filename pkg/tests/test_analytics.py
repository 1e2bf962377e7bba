import math
from itertools import product

import numpy as np
import pytest
from scipy.special import erfc

from addbasis.analytics import (
    PoissonModel,
    asympt_mean_missing,
    exact_mean_missing_k2,
    exact_missing_prob_k2,
    janson_lower_missing_prob,
    psi_tail,
    stein_chen_c_p,
    stein_chen_diagnostics,
)
from addbasis.errors import ValidationError
from addbasis.exhaustive import (
    exhaustive_mean_missing,
    exhaustive_missing_prob,
    subset_sumset_table,
    subset_weights,
)
from addbasis.model import Mode, threshold_p, window_bounds


def test_exact_missing_prob_examples():
    assert math.isclose(exact_missing_prob_k2(1, 5, 0.5, Mode.TRUNCATED), 0.75)
    assert math.isclose(exact_missing_prob_k2(2, 5, 0.5, Mode.TRUNCATED), 0.375)
    assert math.isclose(exact_missing_prob_k2(2, 1, 0.5, Mode.TRUNCATED), 0.5)


def test_exact_missing_prob_rejects_out_of_range():
    with pytest.raises(ValidationError):
        exact_missing_prob_k2(11, 5, 0.5, Mode.TRUNCATED)
    with pytest.raises(ValidationError):
        exact_missing_prob_k2(6, 6, 0.5, Mode.MODULAR)


def test_exact_missing_prob_monotone():
    # Non-increasing in p always.  In j the exact probability alternates with
    # parity (the diagonal costs one element, a pair costs two), so the honest
    # monotonicity is within each parity class: j -> j+2 gains one pair.
    for n in (10, 25):
        for j in range(0, n):
            for p_lo, p_hi in ((0.1, 0.2), (0.4, 0.6)):
                assert exact_missing_prob_k2(j, n, p_hi, Mode.TRUNCATED) <= (
                    exact_missing_prob_k2(j, n, p_lo, Mode.TRUNCATED)
                )
        for j in range(0, n - 1):
            assert exact_missing_prob_k2(j + 2, n, 0.3, Mode.TRUNCATED) <= (
                exact_missing_prob_k2(j, n, 0.3, Mode.TRUNCATED)
            )


def test_exact_missing_prob_matches_enumeration():
    for n, mode in product((5, 6, 9, 10), (Mode.TRUNCATED, Mode.MODULAR)):
        modular = mode is Mode.MODULAR
        top = n - 1 if modular else 2 * n
        for p in (0.15, 0.5):
            for j in range(top + 1):
                want = exhaustive_missing_prob(j, n, p, k=2, modular=modular)
                got = exact_missing_prob_k2(j, n, p, mode)
                assert abs(got - want) < 1e-12, (n, p, j, mode)


def test_exact_mean_trivial_endpoints():
    assert exact_mean_missing_k2(10, 0.0, 0.5, Mode.TRUNCATED) == 11  # window [5,15]
    assert exact_mean_missing_k2(10, 1.0, 0.5, Mode.TRUNCATED) == 0.0
    assert exact_mean_missing_k2(9, 0.0, 0.5, Mode.MODULAR) == 9


def test_exact_mean_matches_exhaustive_expectation():
    for n in (10, 16):
        for alpha in (0.3, 0.5):
            lo, hi = window_bounds(n, 2, alpha)
            for p in (0.1, 0.4):
                want = exhaustive_mean_missing(n, p, lo, hi)
                got = exact_mean_missing_k2(n, p, alpha, Mode.TRUNCATED)
                assert abs(got - want) < 1e-10, (n, alpha, p)


def test_exact_mean_modular_matches_exhaustive():
    for n in (7, 12):
        for p in (0.2, 0.5):
            want = exhaustive_mean_missing(n, p, 0, n - 1, modular=True)
            got = exact_mean_missing_k2(n, p, 0.5, Mode.MODULAR)
            assert abs(got - want) < 1e-12


def test_asympt_mean_formulas():
    n, alpha = 10**4, 0.5
    p = threshold_p(n, 2, alpha, 0.0, Mode.TRUNCATED)  # ~0.052877
    want = (4 / p**2) * math.exp(-n * p * p * alpha / 2)
    got = asympt_mean_missing(n, p, alpha, 2, Mode.TRUNCATED)
    assert math.isclose(got, want, rel_tol=1e-12)
    assert math.isclose(got, 1.3176, abs_tol=2e-3)  # formula value at the exact threshold

    p = threshold_p(n, 2, alpha, 0.0, Mode.MODULAR)  # ~0.042918
    want = n * math.exp(-n * p * p / 2)
    got = asympt_mean_missing(n, p, alpha, 2, Mode.MODULAR)
    assert math.isclose(got, want, rel_tol=1e-12)
    assert math.isclose(got, 1.0, abs_tol=5e-3)

    # k=3 truncated spelled out
    n, p, k = 1000, 0.05, 3
    want = (2 * math.factorial(1) * math.factorial(3) / (alpha * n * p**3)) * math.exp(
        -(alpha**2) * n * n * p**3 / (math.factorial(2) * math.factorial(3))
    )
    assert math.isclose(asympt_mean_missing(n, p, alpha, k, Mode.TRUNCATED), want, rel_tol=1e-12)


def test_asympt_mean_rejects_p_zero():
    with pytest.raises(ValidationError):
        asympt_mean_missing(100, 0.0, 0.5, 2, Mode.TRUNCATED)


def test_exact_to_asympt_ratio_near_threshold():
    n, alpha = 10**5, 0.5
    p = threshold_p(n, 2, alpha, 0.0, Mode.TRUNCATED)
    ratio = exact_mean_missing_k2(n, p, alpha, Mode.TRUNCATED) / asympt_mean_missing(
        n, p, alpha, 2, Mode.TRUNCATED
    )
    assert 0.5 <= ratio <= 2.0


def test_janson_examples():
    assert math.isclose(janson_lower_missing_prob(2, 2, 5, 0.5), 0.375, rel_tol=1e-12)
    assert math.isclose(janson_lower_missing_prob(3, 3, 3, 0.5), 0.328125, rel_tol=1e-12)
    assert janson_lower_missing_prob(4, 3, 6, 0.0) == 1.0


def test_janson_equals_exact_at_k2():
    # pairs are disjoint at k=2, so the product bound is the exact probability
    for n in (5, 9):
        for p in (0.2, 0.6):
            for j in range(2 * n + 1):
                assert math.isclose(
                    janson_lower_missing_prob(j, 2, n, p),
                    exact_missing_prob_k2(j, n, p, Mode.TRUNCATED),
                    rel_tol=1e-12,
                )


def test_janson_lower_bounds_exact_at_k3():
    for n in (4, 7):
        table = subset_sumset_table(n, 3)
        for p in (0.3, 0.6):
            w = subset_weights(n + 1, p)
            for j in range(3 * n + 1):
                exact = float(w[(table >> np.uint64(j)) & np.uint64(1) == 0].sum())
                assert janson_lower_missing_prob(j, 3, n, p) <= exact + 1e-12


def test_psi_tail_gaussian_oracle():
    # k=3 is the Gaussian tail: integral of exp(-c x^2) on [t, inf) = sqrt(pi/c)/2 erfc(t sqrt(c))
    for t, c in ((2.0, 1.0), (1.0, 2.0), (0.5, 0.7)):
        got = psi_tail(t, 3, c)
        want = math.sqrt(math.pi / c) / 2 * float(erfc(t * math.sqrt(c)))
        assert math.isclose(got.quadrature, want, rel_tol=1e-7)
        assert got.quadrature <= got.upper


def test_psi_tail_example_values():
    got = psi_tail(2.0, 3, 1.0)
    assert math.isclose(got.quadrature, 4.145e-3, rel_tol=1e-3)
    assert math.isclose(got.upper, 0.25 * math.exp(-4.0), rel_tol=1e-12)


def test_psi_tail_ratio_tightens():
    got = psi_tail(6.0, 3, 1.0)
    assert got.quadrature / got.upper > 0.98
    loose = psi_tail(1.0, 4, 2.0)
    assert loose.quadrature <= loose.upper


def test_psi_tail_rejects_small_k():
    with pytest.raises(ValidationError):
        psi_tail(1.0, 2, 1.0)


def _sigma_raw(n, p, alpha):
    """Independent route: the raw double sums over pair counts, no binomial identity."""
    c = stein_chen_c_p(p)
    lo, hi = window_bounds(n, 2, alpha)
    s1 = s2 = 0.0
    for i in range(lo, hi + 1):
        f = (i + 2) // 2  # ceil((i+1)/2)
        for k in range(1, f + 1):
            s1 += (
                math.comb(f - 1, k)
                * p ** (2 * k)
                * (1 - p * p) ** (f - k - 1)
                * (1 - p)
                * c**k
            )
            s2 += (
                math.comb(f - 1, k - 1)
                * p ** (2 * k - 2)
                * (1 - p * p) ** (f - k)
                * p
                * c**k
            )
    return s1, s2


def test_stein_chen_c_p_value():
    assert math.isclose(stein_chen_c_p(0.1), 0.212, rel_tol=1e-12)


def test_stein_chen_matches_raw_double_sum():
    for n, p, alpha in ((4, 0.1, 0.5), (12, 0.25, 0.5), (9, 0.15, 0.3)):
        want1, want2 = _sigma_raw(n, p, alpha)
        diag = stein_chen_diagnostics(n, p, alpha)
        assert math.isclose(diag.sigma1, want1, rel_tol=1e-10)
        assert math.isclose(diag.sigma2, want2, rel_tol=1e-10)
    assert math.isclose(stein_chen_diagnostics(4, 0.1, 0.5).sigma1, 0.0170, abs_tol=5e-5)


def test_stein_chen_vanishes_as_p_to_zero():
    prev1 = prev2 = float("inf")
    for p in (1e-2, 1e-4, 1e-6):
        diag = stein_chen_diagnostics(50, p, 0.5)
        assert diag.sigma1 < prev1 and diag.sigma2 < prev2
        prev1, prev2 = diag.sigma1, diag.sigma2
    assert prev1 < 1e-10 and prev2 < 1e-8


def test_stein_chen_tv_bound_composition():
    diag = stein_chen_diagnostics(100, 0.2, 0.5)
    assert diag.tv_bound == diag.sigma1 + diag.sigma2 + diag.max_term
    assert diag.max_term == exact_missing_prob_k2(50, 100, 0.2, Mode.TRUNCATED)


def test_upper_chain_of_the_window_sum():
    # 2 sum_{j>=ceil(alpha n)}^n (1-p^2)^(j/2) <= (4/p^2) exp(-n p^2 alpha/2), always
    for n in (10**3, 10**4, 10**5):
        for alpha in (0.3, 0.5, 0.7):
            for p in (n**-0.5, 3 * n**-0.5, 0.1, 0.2):
                lo, _ = window_bounds(n, 2, alpha)
                js = np.arange(lo, n + 1, dtype=np.float64)
                lhs = 2.0 * float(np.exp(js * 0.5 * math.log1p(-p * p)).sum())
                rhs = (4.0 / p**2) * math.exp(-n * p * p * alpha / 2.0)
                assert lhs <= rhs + 1e-12 * max(1.0, rhs)


def test_sigma_ratio_and_tv_bound_decrease_along_wide_threshold():
    alphas_p = []
    for n in (10**3, 10**4, 10**5, 10**6):
        p = math.sqrt((1 / 0.5 + 1.0) * math.log(n) / n)
        alphas_p.append(stein_chen_diagnostics(n, p, 0.5))
    ratios = [d.sigma2 / d.sigma1 for d in alphas_p]
    bounds = [d.tv_bound for d in alphas_p]
    assert all(a > b for a, b in zip(ratios, ratios[1:]))
    assert all(a > b for a, b in zip(bounds, bounds[1:]))


def test_poisson_model_mass_and_tail():
    for lam in (0.0, 0.3, 1.0, 4.5, 20.0):
        pm = PoissonModel(lam)
        v, masses = pm.truncated_support(1e-12)
        assert abs(sum(masses) - 1.0) < 1e-12
        assert pm.tail_beyond(v) < 1e-12
    with pytest.raises(ValidationError):
        PoissonModel(-0.1)
