import numpy as np
import pytest

from liecluster.cluster import (
    LinearConfig, LinearModel, PointCloud, RadialHarmonic, fit_linear, lorentz_vectors,
)
from liecluster.cluster.linear import ridge_solve
from liecluster.demos import N_CLOUDS, N_TRAIN, THRESHOLDS, run_demo
from liecluster.errors import InvalidArgumentError


def clouds(rng, count, lo=2, hi=6, arity=3):
    return [PointCloud(rng.normal(size=(int(rng.integers(lo, hi + 1)), arity))) for _ in range(count)]


def test_zero_target_gives_zero_weights(rng):
    cfg = LinearConfig(RadialHarmonic(l_max=1, n_max=2), max_order=2)
    params, report = fit_linear([(c, 0.0) for c in clouds(rng, 20)], cfg)
    assert np.all(params.readout_weights[0] == 0)
    assert report.rmse_train == 0


def test_sum_of_squares_nu1(rng):
    cfg = LinearConfig(RadialHarmonic(l_max=0, n_max=3, radial="monomial"), max_order=1)
    data = [(c, float(np.sum(c.raw ** 2))) for c in clouds(rng, 60)]
    params, report = fit_linear(data[:40], cfg, data[40:])
    assert report.rmse_train < 1e-8 and report.rmse_test < 1e-8
    pred = LinearModel(cfg).predict(params, [c for c, _ in data[40:]])
    assert np.abs(pred - [t for _, t in data[40:]]).max() < 1e-7


def test_lorentz_three_particles(rng):
    data = []
    for _ in range(60):
        p = rng.normal(size=(3, 3))
        E = np.sqrt(rng.uniform(0.1, 1.0, 3) ** 2 + np.sum(p ** 2, axis=1))
        data.append((PointCloud(np.column_stack([E, p])), E.sum() ** 2 - np.sum(p.sum(axis=0) ** 2)))
    cfg = LinearConfig(lorentz_vectors((0, 1)), max_order=2)
    _, report = fit_linear(data[:40], cfg, data[40:])
    assert report.rmse_test < 1e-6


def test_empty_dataset():
    with pytest.raises(InvalidArgumentError, match="empty"):
        fit_linear([], LinearConfig(RadialHarmonic()))


def test_duplicate_rows_do_not_fail(rng):
    c = clouds(rng, 1)[0]
    cfg = LinearConfig(RadialHarmonic(l_max=1, n_max=2), max_order=2)
    params, report = fit_linear([(c, 1.5)] * 10, cfg)
    assert report.rank == 1
    assert abs(LinearModel(cfg).predict(params, [c])[0] - 1.5) < 1e-6


def test_ridge_solve_matches_lstsq(rng):
    X = rng.normal(size=(30, 5)) * [1, 10, 0.1, 100, 1]
    y = rng.normal(size=30)
    w, rank = ridge_solve(X, y, 0.0)
    assert rank == 5
    assert np.abs(w - np.linalg.lstsq(X, y, rcond=None)[0]).max() < 1e-10
    with pytest.raises(InvalidArgumentError):
        LinearConfig(RadialHarmonic(), ridge=-1.0)


def test_threads_do_not_change_design(rng):
    cs = clouds(rng, 12)
    cfg1 = LinearConfig(RadialHarmonic(l_max=1, n_max=2), max_order=3, mode="trace", channels=2)
    cfg4 = LinearConfig(RadialHarmonic(l_max=1, n_max=2), max_order=3, mode="trace", channels=2, threads=4)
    assert np.array_equal(LinearModel(cfg1).design_matrix(cs), LinearModel(cfg4).design_matrix(cs))


@pytest.mark.parametrize("task", sorted(THRESHOLDS))
def test_demo(task):
    res = run_demo(task, 7)
    assert res.passed, res.lines()
    assert res.lines()[2] == f"clouds: {N_CLOUDS} (train {N_TRAIN}, test {N_CLOUDS - N_TRAIN})"
    assert run_demo(task, 7).lines() == res.lines()
