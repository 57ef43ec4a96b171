import math

import pytest

from rdflb.quadrature import Quadrature, find_root, golden_min, integrate, integrate_report


def test_integrate_linear():
    assert integrate(lambda x: x, 0.0, 1.0) == pytest.approx(0.5, abs=1e-12)


def test_integrate_gaussian_normalization():
    f = lambda x: math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)
    assert integrate(f, -8.0, 8.0) == pytest.approx(1.0, abs=1e-10)


def test_integrate_sine():
    assert integrate(math.sin, 0.0, math.pi) == pytest.approx(2.0, abs=1e-10)


def test_integrate_empty_interval():
    assert integrate(lambda x: 1e9, 3.0, 3.0) == 0.0
    with pytest.raises(ValueError):
        integrate(lambda x: x, 1.0, 0.0)


def test_integrate_reports_exhausted_depth():
    cfg = Quadrature(rel_tol=1e-14, abs_tol=0.0, max_depth=2)
    res = integrate_report(lambda x: math.exp(3 * x) * math.sin(40 * x), 0.0, 2.0, cfg)
    assert not res.converged
    assert res.error_estimate > 0.0
    ok = integrate_report(lambda x: x * x, 0.0, 1.0)
    assert ok.converged
    assert ok.value == pytest.approx(1.0 / 3.0, abs=1e-12)


def test_quadrature_validation():
    with pytest.raises(ValueError):
        Quadrature(rel_tol=0.0)
    with pytest.raises(ValueError):
        Quadrature(max_depth=0)


def test_find_root_examples():
    assert find_root(lambda x: x - 1.0, 0.0, 2.0, 1e-12) == pytest.approx(1.0, abs=1e-12)
    assert find_root(lambda x: x * x - 2.0, 0.0, 2.0, 1e-13) == pytest.approx(math.sqrt(2.0), abs=1e-12)


def test_find_root_matches_inverse_entropy():
    from rdflb.special import binary_entropy, inverse_binary_entropy

    r = find_root(lambda q: binary_entropy(q) - 0.5, 1e-12, 0.5, 1e-14)
    assert r == pytest.approx(inverse_binary_entropy(0.5), abs=1e-10)
    assert r == pytest.approx(0.110027864, abs=1e-8)


def test_find_root_bracket_error():
    with pytest.raises(ValueError):
        find_root(lambda x: x * x + 1.0, -1.0, 1.0)


def test_find_root_deterministic():
    f = lambda x: math.cos(x) - x
    assert find_root(f, 0.0, 1.0) == find_root(f, 0.0, 1.0)


def test_golden_min():
    x, fx = golden_min(lambda t: (t - 0.3) ** 2 + 1.0, -2.0, 2.0)
    assert x == pytest.approx(0.3, abs=1e-7)
    assert fx == pytest.approx(1.0, abs=1e-12)
