import math
from math import comb

import numpy as np
import pytest

from rdflb import bns, bss
from rdflb.ratedistortion import BinaryNonSymmetricSource, solve
from rdflb.special import binary_entropy, inverse_binary_entropy


# ---------------------------------------------------------------------------
# weight-conditional distance pmf
# ---------------------------------------------------------------------------

def test_pmf_hand_convolution():
    prof = bns.weight_distance_pmf(2, 1, 0.4)
    assert prof.pmf == pytest.approx([0.24, 0.52, 0.24], abs=1e-14)


def test_pmf_weight_zero_is_binomial():
    prof = bns.weight_distance_pmf(5, 0, 0.3)
    want = [comb(5, d) * 0.3**d * 0.7 ** (5 - d) for d in range(6)]
    assert prof.pmf == pytest.approx(want, rel=1e-12)


@pytest.mark.parametrize("n,w,z", [(7, 3, 0.37), (12, 12, 0.2), (20, 9, 0.5), (31, 1, 0.01)])
def test_pmf_normalizes(n, w, z):
    prof = bns.weight_distance_pmf(n, w, z)
    assert prof.pmf.sum() == pytest.approx(1.0, abs=1e-10)


def test_pmf_brute_force_enumeration():
    # sum over all 2^n codewords, weighted by the product Bernoulli law
    n, w, z = 8, 3, 0.35
    x = np.array([1] * w + [0] * (n - w))
    pmf = np.zeros(n + 1)
    for word in range(1 << n):
        y = (word >> np.arange(n)) & 1
        d = int((y != x).sum())
        pmf[d] += z ** y.sum() * (1 - z) ** (n - y.sum())
    prof = bns.weight_distance_pmf(n, w, z)
    assert prof.pmf == pytest.approx(pmf, rel=1e-11)


def test_total_mass_over_weights():
    n, p, rate = 12, 0.4, 0.5
    z = solve(BinaryNonSymmetricSource(p), rate).marginal_one_prob
    total = 0.0
    for w in range(n + 1):
        weight = comb(n, w) * p**w * (1 - p) ** (n - w)
        total += weight * bns.weight_distance_pmf(n, w, z).pmf.sum()
    assert total == pytest.approx(1.0, abs=1e-9)


# ---------------------------------------------------------------------------
# lower bound
# ---------------------------------------------------------------------------

def _oracle_paired_sum(n, rate, p):
    """Explicit 2^n-entry arrays, paired by sorting (float arithmetic)."""
    sol = solve(BinaryNonSymmetricSource(p), rate)
    d = sol.dstar
    q = 2.0 ** (n * rate)
    d_t = 0
    while d_t <= n and q * sum(comb(n, j) for j in range(d_t + 1)) <= 2.0**n:
        d_t += 1
    k_left = 2.0**n - q * sum(comb(n, j) for j in range(d_t))
    a = []
    for kk in range(n + 1):
        a.extend([p**kk * (1 - p) ** (n - kk)] * comb(n, kk))
    b = []
    for i in range(d_t):
        b.extend([i * math.log(d) + (n - i) * math.log1p(-d)] * int(round(q * comb(n, i))))
    b.extend([d_t * math.log(d) + (n - d_t) * math.log1p(-d)] * int(round(k_left)))
    a.sort(reverse=True)
    b.sort(reverse=True)
    return sol, sum(x * y for x, y in zip(a, b))


@pytest.mark.parametrize("n,rate,p", [(6, 0.5, 0.4), (10, 0.5, 0.4), (8, 0.25, 0.3), (10, 0.5, 0.2)])
def test_lower_bound_vs_explicit_arrays(n, rate, p):
    # integer Q needed so the explicit multiset has whole multiplicities
    assert float(n * rate).is_integer()
    sol, s = _oracle_paired_sum(n, rate, p)
    want = sol.dstar + sol.lambda_hat_nats / n * (
        n * rate * math.log(2) - (s + n * (-p * math.log(p) - (1 - p) * math.log1p(-p)))
    )
    assert bns.lower_bound(n, rate, p) == pytest.approx(want, rel=1e-10)


def test_rearrangement_beats_random_pairings():
    # sorted pairing dominates any sampled permutation (both arrays explicit)
    n, rate, p = 8, 0.5, 0.4
    sol, s_sorted = _oracle_paired_sum(n, rate, p)
    d = sol.dstar
    q = 2.0 ** (n * rate)
    d_t = 0
    while d_t <= n and q * sum(comb(n, j) for j in range(d_t + 1)) <= 2.0**n:
        d_t += 1
    k_left = 2.0**n - q * sum(comb(n, j) for j in range(d_t))
    a = []
    for kk in range(n + 1):
        a.extend([p**kk * (1 - p) ** (n - kk)] * comb(n, kk))
    b = []
    for i in range(d_t):
        b.extend([i * math.log(d) + (n - i) * math.log1p(-d)] * int(round(q * comb(n, i))))
    b.extend([d_t * math.log(d) + (n - d_t) * math.log1p(-d)] * int(round(k_left)))
    a.sort(reverse=True)
    b_sorted = sorted(b, reverse=True)
    rng = np.random.default_rng(11)
    a_arr = np.array(a)
    b_arr = np.array(b_sorted)
    for _ in range(2000):
        perm = rng.permutation(len(b_arr))
        assert float(a_arr @ b_arr[perm]) <= s_sorted + 1e-12


def test_lower_bound_residue_nonnegative():
    for (n, rate, p) in [(4, 0.5, 0.4), (16, 0.5, 0.4), (64, 0.25, 0.3), (256, 0.25, 0.1)]:
        sol = solve(BinaryNonSymmetricSource(p), rate)
        v = bns.lower_bound(n, rate, p)
        assert v >= sol.dstar - 1e-10


def test_lower_bound_asymptote_p04():
    sol = solve(BinaryNonSymmetricSource(0.4), 0.5)
    for n in (16, 64, 256):
        assert bns.lower_bound(n, 0.5, 0.4) >= sol.dstar - 1e-12


# ---------------------------------------------------------------------------
# ordered-statistics upper bound
# ---------------------------------------------------------------------------

def _oracle_os(n, rate, p, eps):
    z = solve(BinaryNonSymmetricSource(p), rate).marginal_one_prob
    q = 2.0 ** (n * rate)
    budget = math.log(1 / eps) / (q - 1)
    total = 0.0
    for w in range(n + 1):
        x = np.array([1] * w + [0] * (n - w))
        pmf = np.zeros(n + 1)
        for word in range(1 << n):
            y = (word >> np.arange(n)) & 1
            d = int((y != x).sum())
            pmf[d] += z ** y.sum() * (1 - z) ** (n - y.sum())
        acc = 0.0
        t = n
        for dd in range(n + 1):
            acc += pmf[dd]
            if acc >= budget:
                t = dd
                break
        weight = comb(n, w) * p**w * (1 - p) ** (n - w)
        total += weight * ((1 - eps) * t / n + eps / 2)
    return total


def test_upper_os_vs_exhaustive_oracle():
    got = bns.upper_bound_os(10, 0.5, 0.4, 0.01)
    want = _oracle_os(10, 0.5, 0.4, 0.01)
    assert got.value == pytest.approx(want, rel=1e-10)
    assert not got.degenerate


def test_upper_os_eps_sweep_range():
    for eps in (0.001, 0.01, 0.2):
        v = bns.upper_bound_os(40, 0.5, 0.4, eps).value
        assert 0.0 < v < 1.0


def test_upper_os_degenerate():
    r = bns.upper_bound_os(4, 0.1, 0.4, 0.01)
    assert r.degenerate


# ---------------------------------------------------------------------------
# reference-rate upper bound
# ---------------------------------------------------------------------------

def _oracle_rr(n, rate, p, d0):
    z0 = (p - d0) / (1 - 2 * d0)
    q = 2.0 ** (n * rate)
    budget = (1 / q) * ((q - 1) / q) ** (q - 1)
    total = 0.0
    for w in range(n + 1):
        x = np.array([1] * w + [0] * (n - w))
        pmf = np.zeros(n + 1)
        for word in range(1 << n):
            y = (word >> np.arange(n)) & 1
            d = int((y != x).sum())
            pmf[d] += z0 ** y.sum() * (1 - z0) ** (n - y.sum())
        acc = 0.0
        dx = n + 1
        for dd in range(n + 1):
            if acc + pmf[dd] > budget:
                dx = dd
                break
            acc += pmf[dd]
        px = p**w * (1 - p) ** (n - w)
        val = sum(pmf[j] * d0**j * (1 - d0) ** (n - j) / px for j in range(min(dx, n + 1)))
        if dx <= n:
            val += (budget - acc) * d0**dx * (1 - d0) ** (n - dx) / px
        u_w = z0 * (1 - w / n) + (1 - z0) * w / n
        total += comb(n, w) * px * u_w * val
    return d0 + total


def test_upper_rr_vs_exhaustive_oracle():
    got = bns.upper_bound_rr(12, 0.5, 0.4, 0.12)
    want = _oracle_rr(12, 0.5, 0.4, 0.12)
    assert got == pytest.approx(want, rel=1e-9)


def test_upper_rr_bounded_below_by_reference():
    for n in (12, 64, 256):
        assert bns.upper_bound_rr(n, 0.5, 0.4, 0.12) >= 0.12


def test_upper_rr_domain():
    with pytest.raises(ValueError):
        bns.upper_bound_rr(12, 0.5, 0.4, 0.05)  # below D
    with pytest.raises(ValueError):
        bns.upper_bound_rr(12, 0.5, 0.4, 0.45)  # above p


# ---------------------------------------------------------------------------
# degeneration to the symmetric source at p = 1/2
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("n", [8, 16, 32])
def test_degeneration_matches_bss(n):
    rate = 0.5
    assert bns.lower_bound(n, rate, 0.5) == pytest.approx(bss.lower_bound(n, rate), abs=1e-9)
    a = bns.upper_bound_os(n, rate, 0.5, 0.01)
    b = bss.upper_bound_os(n, rate, 0.01)
    assert a.value == pytest.approx(b.value, abs=1e-9)
    r0 = 0.45
    d0 = inverse_binary_entropy(1.0 - r0)
    assert bns.upper_bound_rr(n, rate, 0.5, d0) == pytest.approx(
        bss.upper_bound_rr(n, rate, r0), abs=1e-9
    )


def test_sandwich_bns():
    sol = solve(BinaryNonSymmetricSource(0.4), 0.5)
    for n in (10, 50, 200):
        lo = bns.lower_bound(n, 0.5, 0.4)
        hi = bns.upper_bound_os(n, 0.5, 0.4, 0.01).value
        assert sol.dstar - 1e-12 <= lo <= hi + 1e-12
