import numpy as np
import pytest
from hypothesis import given

from nslearn.core import Orientation, Panel
from nslearn.exceptions import NoConvergence, ShapeMismatch, ZeroVariance
from nslearn.functionals import (
    ConstantPredictionObjective,
    componentwise_mean_climatology,
    empirical_identification,
    finite_difference_gradient,
    identification_mean,
    identification_ns,
    m_estimate,
    ns_climatology,
    numeric_minimize,
    per_series_means,
    per_series_means_panel,
)
from nslearn.losses import EN, NS, nse_ext, realized_loss

from conftest import panels, random_panel


def test_componentwise_mean_example(toy):
    np.testing.assert_array_equal(componentwise_mean_climatology(toy).values, [0.5, 3.5])


def test_ns_climatology_example(toy):
    # weights 0.5 and 0.125: (0.5 * 1 + 0.125 * 0) / 0.625 = 0.8
    np.testing.assert_allclose(ns_climatology(toy).values, [0.8, 3.2], rtol=1e-15)


def test_single_series_climatologies():
    Y = Panel(np.array([[2.0], [5.0], [1.0]]), Orientation.COLUMNS)
    np.testing.assert_allclose(ns_climatology(Y).values, [2.0, 5.0, 1.0], rtol=1e-15)
    np.testing.assert_array_equal(componentwise_mean_climatology(Y).values, [2.0, 5.0, 1.0])


def test_all_equal_series():
    s = np.array([1.0, 4.0, 2.0])
    Y = Panel(np.column_stack([s, s, s]), Orientation.COLUMNS)
    np.testing.assert_array_equal(componentwise_mean_climatology(Y).values, s)
    np.testing.assert_allclose(ns_climatology(Y).values, s, rtol=1e-15)


def test_ns_climatology_large_a_tends_to_mean(rng):
    Y = random_panel(rng, 6, 30)
    gap = np.max(np.abs(ns_climatology(Y, 1e12).values - componentwise_mean_climatology(Y).values))
    assert gap < 1e-6


def test_ns_climatology_constant_series():
    Y = Panel(np.array([[1.0, 2.0], [3.0, 2.0]]), Orientation.COLUMNS)
    with pytest.raises(ZeroVariance):
        ns_climatology(Y)
    assert ns_climatology(Y, 1.0).kind == "nash_sutcliffe_extended"


def test_per_series_means_example(toy):
    np.testing.assert_array_equal(per_series_means(toy), [2.0, 2.0])
    const = Panel(np.array([[7.0], [7.0]]), Orientation.COLUMNS)
    np.testing.assert_array_equal(per_series_means(const), [7.0])
    np.testing.assert_array_equal(per_series_means_panel(toy).values, [[2.0, 2.0], [2.0, 2.0]])


def test_identification_examples():
    np.testing.assert_array_equal(identification_ns((1, 3), (1, 3)), [0.0, 0.0])
    np.testing.assert_array_equal(identification_ns((2, 2), (1, 3)), [0.5, -0.5])
    np.testing.assert_allclose(identification_ns((0.8, 3.2), (0, 4)), [0.1, -0.1], rtol=1e-14)
    np.testing.assert_array_equal(identification_mean((2, 2), (1, 3)), [1.0, -1.0])
    with pytest.raises(ShapeMismatch):
        identification_mean((1, 2, 3), (1, 2))


def test_empirical_identification_example(toy):
    Z = Panel(np.full((2, 2), 2.0), Orientation.COLUMNS)
    np.testing.assert_allclose(empirical_identification(Z, toy, "ns"), [0.375, -0.375])
    # per-series mean error has one entry per series
    np.testing.assert_array_equal(empirical_identification(Z, toy, "mean"), [0.0, 0.0])
    with pytest.raises(ValueError):
        empirical_identification(Z, toy, "median")


def test_m_estimate_examples(toy):
    np.testing.assert_array_equal(m_estimate(toy, EN).values, [0.5, 3.5])
    np.testing.assert_allclose(m_estimate(toy, NS).values, [0.8, 3.2], rtol=1e-15)
    np.testing.assert_allclose(m_estimate(toy, nse_ext(2.0)).values, ns_climatology(toy, 2.0).values)


@pytest.mark.parametrize("loss, expected", [(NS, [0.8, 3.2]), (EN, [0.5, 3.5])])
def test_numeric_minimize_recovers_closed_form(toy, loss, expected):
    theta = numeric_minimize(ConstantPredictionObjective(toy, loss), np.zeros(2), tol=1e-8)
    np.testing.assert_allclose(theta, expected, atol=1e-6)


def test_numeric_minimize_returns_start_when_already_optimal(toy):
    start = ns_climatology(toy).values
    theta = numeric_minimize(ConstantPredictionObjective(toy, NS), start)
    np.testing.assert_array_equal(theta, start)


def test_numeric_minimize_reports_no_convergence(rng):
    Y = random_panel(rng, 5, 20)
    with pytest.raises(NoConvergence) as info:
        numeric_minimize(ConstantPredictionObjective(Y, NS), np.full(5, 50.0), tol=1e-30, max_iter=3)
    assert info.value.last_iterate.shape == (5,)


def test_objective_gradient_matches_finite_differences(rng):
    Y = random_panel(rng, 5, 40)
    obj = ConstantPredictionObjective(Y, NS)
    theta = rng.normal(size=5)
    fd = finite_difference_gradient(obj.value, theta)
    np.testing.assert_allclose(obj.gradient(theta), fd, rtol=1e-6, atol=1e-9)


def test_objective_value_matches_realized_loss(rng):
    Y = random_panel(rng, 4, 10, Orientation.ROWS)
    theta = rng.normal(size=4)
    assert ConstantPredictionObjective(Y, EN).value(theta) == realized_loss(Y.broadcast(theta), Y, EN)


# properties


@given(panels())
def test_fixed_points(Y):
    scale = 1e-10 * (1 + np.max(np.abs(Y.values)))
    Z_ns = ns_climatology(Y).broadcast(Y)
    Z_mean = componentwise_mean_climatology(Y).broadcast(Y)
    # the NS identification is weight-scaled, so compare at the weight scale
    w_max = 1.0 / np.min(np.sum((Y.series_matrix - Y.series_matrix.mean(1, keepdims=True)) ** 2, 1))
    assert np.max(np.abs(empirical_identification(Z_ns, Y, "ns"))) <= scale * max(w_max, 1.0)
    assert np.max(np.abs(empirical_identification(Z_mean, Y, "mean_d"))) <= scale
    assert np.max(np.abs(empirical_identification(per_series_means_panel(Y), Y, "mean"))) <= scale


@given(panels())
def test_convex_combination_bound(Y):
    S = Y.series_matrix
    values = ns_climatology(Y).values
    assert np.all(values >= S.min(axis=0)) and np.all(values <= S.max(axis=0))


@given(panels())
def test_equal_weights_collapse_to_mean(Y):
    # shifting every series of the first one gives equal weights
    base = Y.series_matrix[0]
    S = base[None, :] + np.arange(Y.n_series)[:, None]
    P = Panel.from_series(S, Y.orientation)
    np.testing.assert_allclose(
        ns_climatology(P).values, componentwise_mean_climatology(P).values, rtol=1e-12, atol=1e-12
    )


def _gaps(Y, grid=(0, 1, 10, 1e6, 1e12)):
    mean = componentwise_mean_climatology(Y).values
    return [np.max(np.abs(ns_climatology(Y, a).values - mean)) for a in grid]


@given(panels())
def test_extended_weight_two_series_monotone(Y):
    # with two series the weight ratio moves monotonically to 1
    P = Panel.from_series(Y.series_matrix[:1].repeat(2, 0) * [[1.0], [0.5]] + [[0.0], [1.0]], Y.orientation)
    if P.n_series != 2 or np.allclose(P.series_matrix[0], P.series_matrix[1]):
        return
    gaps = _gaps(P)
    tol = 1e-12 * (1 + np.max(np.abs(P.values)))
    assert all(b <= a + tol for a, b in zip(gaps, gaps[1:]))


@given(panels())
def test_extended_weight_limit(Y):
    assert _gaps(Y)[-1] <= 1e-6 * (1 + np.max(np.abs(Y.values)))


def test_extended_weight_gap_not_monotone_for_three_series():
    # series with centered sums of squares 2, 8 and 0.5
    Y = Panel(np.array([[-2.0, 4.0, 0.0], [0.0, 0.0, 1.0]]), Orientation.COLUMNS)
    gaps = _gaps(Y, (0, 0.5, 10, 1e12))
    assert gaps[1] > gaps[0]
    assert gaps[3] < gaps[2] < gaps[0]
