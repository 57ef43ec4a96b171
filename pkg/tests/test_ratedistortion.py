import math

import numpy as np
import pytest

from rdflb.ratedistortion import (
    BinaryNonSymmetricSource,
    BinarySymmetricSource,
    DiscreteChannel,
    GaussianSource,
    blahut_arimoto,
    kkt_residual,
    solve,
)

_LN2 = math.log(2.0)
HAMMING = np.array([[0.0, 1.0], [1.0, 0.0]])


def test_bss_operating_point():
    sol = solve(BinarySymmetricSource(), 0.5)
    # paper rounds this to 0.109
    assert sol.dstar == pytest.approx(0.110027864, abs=1e-8)
    from rdflb.special import binary_entropy

    assert binary_entropy(sol.dstar) == pytest.approx(1.0 - 0.5, abs=1e-10)
    # slope identity restated: lambda_nats * ln((1-q0)/q0) = 1
    assert sol.lambda_hat_nats * math.log((1 - sol.dstar) / sol.dstar) == pytest.approx(1.0, abs=1e-10)


def test_bns_operating_point():
    sol = solve(BinaryNonSymmetricSource(0.4), 0.5)
    # paper rounds this to 0.101
    assert sol.dstar == pytest.approx(0.1006, abs=2e-4)
    from rdflb.special import binary_entropy

    assert binary_entropy(0.4) - binary_entropy(sol.dstar) == pytest.approx(0.5, abs=1e-10)
    z = sol.marginal_one_prob
    assert z == pytest.approx((0.4 - sol.dstar) / (1 - 2 * sol.dstar), rel=1e-12)
    assert 0.0 < z < 1.0


def test_gaussian_operating_point():
    sol = solve(GaussianSource(1.0), 0.5)
    assert sol.dstar == pytest.approx(0.5, abs=1e-12)
    assert sol.lambda_hat_nats == pytest.approx(2 * sol.dstar, abs=1e-12)
    assert sol.marginal_variance == pytest.approx(0.5, abs=1e-12)


def test_rate_domain_errors():
    with pytest.raises(ValueError):
        solve(BinarySymmetricSource(), 0.0)
    with pytest.raises(ValueError):
        solve(BinarySymmetricSource(), 1.0)
    with pytest.raises(ValueError):
        solve(BinaryNonSymmetricSource(0.4), 0.98)  # above H(0.4)


@pytest.mark.parametrize("source", [BinarySymmetricSource(), BinaryNonSymmetricSource(0.4), GaussianSource(1.0)])
@pytest.mark.parametrize("rate", [0.2, 0.5, 0.8])
def test_lambda_matches_finite_difference(source, rate):
    h = 1e-5
    dp = solve(source, rate + h).dstar
    dm = solve(source, rate - h).dstar
    fd = -(dp - dm) / (2 * h) / _LN2  # -dD/dR in nats
    lam = solve(source, rate).lambda_hat_nats
    assert fd == pytest.approx(lam, rel=1e-6)


def _ba_at(source, rate):
    sol = solve(source, rate)
    if isinstance(source, BinarySymmetricSource):
        px = np.array([0.5, 0.5])
    else:
        px = np.array([1 - source.p, source.p])
    return sol, blahut_arimoto(px, HAMMING, slope=1.0 / sol.lambda_hat_nats, tol=1e-12)


@pytest.mark.parametrize("source", [BinarySymmetricSource(), BinaryNonSymmetricSource(0.4)])
def test_blahut_arimoto_matches_closed_form(source):
    for rate in np.arange(0.1, 0.91, 0.1):
        sol, res = _ba_at(source, float(rate))
        assert res.converged
        assert res.rate == pytest.approx(rate, abs=1e-4)
        assert res.distortion == pytest.approx(sol.dstar, abs=1e-4)


def test_blahut_arimoto_kkt_certificate():
    for source in (BinarySymmetricSource(), BinaryNonSymmetricSource(0.4)):
        sol, res = _ba_at(source, 0.5)
        rep = kkt_residual(res.channel, sol.lambda_hat_nats, 0.5)
        assert rep.max_violation <= 1e-8


def test_kkt_closed_form_bss():
    sol = solve(BinarySymmetricSource(), 0.5)
    q0 = sol.dstar
    ch = DiscreteChannel(np.array([0.5, 0.5]), HAMMING, np.array([[1 - q0, q0], [q0, 1 - q0]]))
    rep = kkt_residual(ch, sol.lambda_hat_nats, 0.5)
    assert rep.stationarity <= 1e-10
    assert rep.slackness <= 1e-10
    assert rep.rate_slack <= 1e-10


def test_kkt_detects_non_optimum():
    sol = solve(BinarySymmetricSource(), 0.5)
    ch = DiscreteChannel(np.array([0.5, 0.5]), HAMMING, np.array([[0.5, 0.5], [0.5, 0.5]]))
    rep = kkt_residual(ch, sol.lambda_hat_nats)
    assert rep.stationarity > 1e-3


def test_blahut_arimoto_lossless_limit():
    px = np.array([0.6, 0.4])
    res = blahut_arimoto(px, HAMMING, slope=200.0)
    h = -(0.6 * math.log2(0.6) + 0.4 * math.log2(0.4))
    assert res.rate == pytest.approx(h, abs=1e-6)
    assert res.distortion <= 1e-12


def test_discrete_channel_validation():
    with pytest.raises(ValueError):
        DiscreteChannel(np.array([0.5, 0.5]), HAMMING, np.array([[0.9, 0.2], [0.5, 0.5]]))
    with pytest.raises(ValueError):
        blahut_arimoto(np.full(65, 1 / 65), np.zeros((65, 2)), slope=1.0)
    with pytest.raises(ValueError):
        blahut_arimoto(np.array([0.5, 0.5]), HAMMING, slope=-1.0)
