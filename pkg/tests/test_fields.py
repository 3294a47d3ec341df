import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from revpref.core import InputError
from revpref.fields import (
    ClosedPath,
    ces_field,
    check_inverse_demand,
    circle,
    cobb_douglas_field,
    constant_path,
    discrete_path_sum,
    ellipse,
    non_potential_field,
    numeric_gradient,
    potentiality_check,
    standard_loops,
)
from revpref.generators import gen_cobb_douglas
from revpref.utility import build_homogeneous_utility


def test_constant_path_sum_is_exactly_zero():
    cd = cobb_douglas_field([0.5, 0.5])
    assert discrete_path_sum(constant_path([2.0, 2.0]), cd, 1000) == 0.0


def test_circle_sum_small_and_decaying():
    cd = cobb_douglas_field([0.5, 0.5])
    loop = circle([2.0, 2.0], 0.3)
    s1, s2 = discrete_path_sum(loop, cd, 1000), discrete_path_sum(loop, cd, 10000)
    assert abs(s1) < 1e-3
    assert abs(s1) / abs(s2) >= 5


def test_both_orientations_nonnegative():
    cd = cobb_douglas_field([0.3, 0.7])
    for loop in standard_loops(2):
        for n in (100, 1000):
            tol = 1e-9 / n
            assert discrete_path_sum(loop, cd, n) >= -tol
            assert discrete_path_sum(loop.reversed(), cd, n) >= -tol


def test_custom_cost_matches_default():
    cd = cobb_douglas_field([0.5, 0.5])
    loop = ellipse([1.0, 1.5], (0.5, 0.3))
    cost = lambda x, y: float(np.log(np.dot(x, y)))
    assert discrete_path_sum(loop, cd, 200, cost) == pytest.approx(discrete_path_sum(loop, cd, 200), abs=1e-12)


def test_path_points_close_and_stay_positive():
    loop = circle([0.5, 2.0], 3.0)
    pts = loop.points(400)
    assert np.all(pts > 0)
    np.testing.assert_allclose(loop.gamma(np.array([1.0])), loop.gamma(np.array([0.0])), atol=1e-12)


def test_path_needs_two_points():
    with pytest.raises(InputError):
        circle([2.0, 2.0], 0.3).points(1)


def test_path_leaving_orthant_rejected():
    bad = ClosedPath(lambda t: np.column_stack([np.cos(2 * np.pi * t), np.ones_like(t)]), 2, "bad")
    with pytest.raises(InputError):
        bad.points(10)


def test_invalid_plane():
    with pytest.raises(InputError):
        circle([1.0, 1.0], 0.1, plane=(0, 0))


@pytest.mark.parametrize("alpha", [[0.5, 0.5], [0.2, 0.8], [0.2, 0.3, 0.5]])
def test_cobb_douglas_passes(alpha):
    rep = potentiality_check(cobb_douglas_field(alpha), standard_loops(len(alpha)))
    assert rep.passed
    for path in rep.paths:
        assert path.ratios[0] >= 5


@pytest.mark.parametrize("rho,weights", [(0.5, [1, 2]), (-2.0, [1, 1, 3])])
def test_ces_passes(rho, weights):
    assert potentiality_check(ces_field(rho, weights), standard_loops(len(weights))).passed


@pytest.mark.parametrize("m", [2, 3])
def test_non_potential_fails(m):
    rep = potentiality_check(non_potential_field(m), standard_loops(m))
    assert not rep.passed
    assert any(p.ratios[0] < 5 for p in rep.paths)


def test_constant_path_report_exact_zeros():
    rep = potentiality_check(cobb_douglas_field([0.5, 0.5]), [constant_path([1.0, 3.0])])
    assert rep.passed
    assert rep.paths[0].sums == (0.0, 0.0)
    assert rep.to_dict()["paths"][0]["decay_ratios"] == [None]


def test_potentiality_needs_two_sizes():
    with pytest.raises(InputError):
        potentiality_check(cobb_douglas_field([0.5, 0.5]), standard_loops(2), n_values=[100])


def test_numeric_gradient_linear():
    p = np.array([1.5, 0.25, 3.0])
    g = numeric_gradient(lambda x: float(np.dot(x, p)), [1.0, 2.0, 3.0])
    np.testing.assert_allclose(g, p, atol=1e-10)


def test_numeric_gradient_log():
    g = numeric_gradient(lambda x: np.log(x[0] * x[1]) / 2, [2.0, 2.0], h=1e-5)
    np.testing.assert_allclose(g, [0.25, 0.25], atol=1e-8)


def test_numeric_gradient_constant():
    assert np.all(numeric_gradient(lambda x: 4.0, [1.0, 1.0]) == 0.0)


def test_numeric_gradient_domain_exit():
    with pytest.raises(InputError):
        numeric_gradient(lambda x: 0.0, [1e-6, 1.0], h=1e-5)
    with pytest.raises(InputError):
        numeric_gradient(lambda x: 0.0, [1.0, 1.0], h=0.0)


def test_inverse_demand_at_two_two():
    cd = cobb_douglas_field([0.5, 0.5])
    p = cd([2.0, 2.0])
    np.testing.assert_allclose(p / np.dot(p, [2.0, 2.0]), [0.25, 0.25])
    assert check_inverse_demand(cd, [[2.0, 2.0]]).max_residual <= 1e-15


@given(st.integers(1, 5), st.lists(st.floats(0.1, 10), min_size=5, max_size=5))
@settings(max_examples=50, deadline=None)
def test_equal_exponent_normalized_field(m, xs):
    x = np.array(xs[:m])
    cd = cobb_douglas_field(np.full(m, 1.0 / m))
    p = cd(x)
    np.testing.assert_allclose(p / np.dot(x, p), 1.0 / (m * x), rtol=1e-12)


@given(st.floats(1e-3, 1e3))
@settings(max_examples=30, deadline=None)
def test_scale_invariance(lam):
    cd = cobb_douglas_field([0.3, 0.7])
    x = np.array([[1.2, 0.7], [3.0, 2.0]])
    a = cd(x)
    b = cd.scaled(lam)(x)
    np.testing.assert_allclose(a / np.sum(a * x, 1)[:, None], b / np.sum(b * x, 1)[:, None], rtol=1e-12)


def test_inverse_demand_numeric_log_utility():
    rng = np.random.default_rng(3)
    alpha = np.array([0.2, 0.5, 0.3])
    pts = np.exp(rng.uniform(-1, 1, (50, 3)))
    rep = check_inverse_demand(cobb_douglas_field(alpha), pts, log_utility=lambda x: float(np.dot(alpha, np.log(x))))
    assert rep.passed and rep.points == 50


def test_inverse_demand_ces_analytic():
    rng = np.random.default_rng(4)
    pts = np.exp(rng.uniform(-1, 1, (50, 2)))
    assert check_inverse_demand(ces_field(0.4, [1.0, 2.0]), pts).passed


def test_inverse_demand_needs_gradient():
    with pytest.raises(InputError):
        check_inverse_demand(non_potential_field(2), [[1.0, 1.0]])


def test_field_validation():
    with pytest.raises(InputError):
        cobb_douglas_field([0.5, 0.6])
    with pytest.raises(InputError):
        ces_field(1.0, [1, 1])
    with pytest.raises(InputError):
        ces_field(0.0, [1, 1])
    with pytest.raises(InputError):
        non_potential_field(1)


def _unique_minimizer_points(model, data, margin=1e-6):
    logs = np.log(model.kernel.pairwise(data.quantities, data.prices)) + (model.potentials - model.normalizers)[None, :]
    keep = []
    for i in range(data.n):
        row = np.sort(logs[i])
        if data.n == 1 or row[1] - row[0] >= margin:
            if np.argmin(logs[i]) == i:
                keep.append(i)
    return keep


def test_utility_gradient_is_normal_and_euler():
    checked = 0
    for seed in range(30):
        data = gen_cobb_douglas(5, 3, alpha=[0.2, 0.3, 0.5], seed=seed)
        model = build_homogeneous_utility(data)
        u = lambda z: float(model.values(z[None, :])[0])
        for i in _unique_minimizer_points(model, data):
            x = data.quantities[i]
            g = numeric_gradient(u, x)
            p = data.prices[i]
            cos = np.dot(g, p) / (np.linalg.norm(g) * np.linalg.norm(p))
            assert cos >= 1 - 1e-6
            expected = np.exp(model.potentials[i] - model.normalizers[i]) * p
            np.testing.assert_allclose(g, expected, rtol=1e-6)
            assert np.dot(x, g) == pytest.approx(u(x), rel=1e-6)
            checked += 1
    # shortest-path potentials tie every non-root point with its tree parent
    assert checked >= 30


def test_utility_gradient_at_sampled_points():
    rng = np.random.default_rng(8)
    checked = 0
    for seed in range(10):
        data = gen_cobb_douglas(4, 3, seed=seed)
        model = build_homogeneous_utility(data)
        u = lambda z: float(model.values(z[None, :])[0])
        shifts = model.potentials - model.normalizers
        for z in np.exp(rng.uniform(-1, 1, (20, 3))):
            terms = np.sort(np.log(data.prices @ z) + shifts)
            if terms[1] - terms[0] < 1e-3:
                continue
            k = int(model.minimizers(z)[0])
            g = numeric_gradient(u, z)
            np.testing.assert_allclose(g, np.exp(shifts[k]) * data.prices[k], rtol=1e-6)
            assert np.dot(z, g) == pytest.approx(u(z), rel=1e-6)
            checked += 1
    assert checked > 50
