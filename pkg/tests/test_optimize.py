import numpy as np
import pytest

from qregress.optimize import DivergenceError, bfgs


def rosenbrock(v):
    x, y = v
    f = (1 - x) ** 2 + 100 * (y - x * x) ** 2
    g = np.array([-2 * (1 - x) - 400 * x * (y - x * x), 200 * (y - x * x)])
    return f, g


@pytest.mark.parametrize("start", [(-1.2, 1.0), (2.0, -1.0), (0.0, 0.0)])
def test_rosenbrock_converges(start):
    res = bfgs(rosenbrock, np.array(start), max_iter=500, gtol=1e-10)
    assert res.converged
    assert np.allclose(res.x, [1.0, 1.0], atol=1e-6)
    assert np.all(np.diff(res.history_cost) <= 0)
    assert np.all(np.diff(res.history_evals) > 0)


def test_quadratic_solves_in_few_iterations():
    a = np.array([[3.0, 1.0], [1.0, 2.0]])
    b = np.array([1.0, -1.0])
    res = bfgs(lambda v: (0.5 * v @ a @ v - b @ v, a @ v - b), np.zeros(2))
    assert np.allclose(res.x, np.linalg.solve(a, b), atol=1e-8)
    assert res.n_iter <= 10


def test_non_finite_start_raises():
    with pytest.raises(DivergenceError):
        bfgs(lambda v: (np.nan, v), np.zeros(2))
