"""Full-memory BFGS with a strong-Wolfe line search (bracketing + zoom)."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

ValueAndGrad = Callable[[np.ndarray], tuple[float, np.ndarray]]


class DivergenceError(RuntimeError):
    """The objective returned a non-finite value at the starting point."""

    def __init__(self, message: str, last_valid: np.ndarray | None):
        super().__init__(message)
        self.last_valid = last_valid


@dataclass
class OptimizeResult:
    x: np.ndarray
    fun: float
    grad: np.ndarray
    n_iter: int
    n_eval: int
    converged: bool
    message: str
    history_cost: list = field(default_factory=list)
    history_evals: list = field(default_factory=list)


def _cubic_min(a, fa, da, b, fb, db):
    """Minimizer of the cubic interpolating (a, fa, da) and (b, fb, db), or None."""
    d1 = da + db - 3.0 * (fa - fb) / (a - b)
    disc = d1 * d1 - da * db
    if disc < 0:
        return None
    d2 = np.sign(b - a) * np.sqrt(disc)
    denom = db - da + 2.0 * d2
    if denom == 0:
        return None
    return b - (b - a) * (db + d2 - d1) / denom


class _Counter:
    def __init__(self, fun: ValueAndGrad):
        self.fun = fun
        self.calls = 0

    def __call__(self, x):
        self.calls += 1
        f, g = self.fun(x)
        return float(f), np.asarray(g, dtype=float)


def strong_wolfe(phi, f0: float, d0: float, step0: float = 1.0, c1: float = 1e-4,
                 c2: float = 0.9, max_steps: int = 40):
    """Step length satisfying the strong Wolfe conditions.

    Args:
        phi: callable t -> (f(x + t p), directional derivative, gradient).
        f0: objective at t = 0.
        d0: directional derivative at t = 0 (must be negative).
        step0: first trial step.
        c1: sufficient-decrease constant.
        c2: curvature constant.
        max_steps: budget of trial evaluations.

    Returns:
        ``(t, f, g)`` or ``None`` when no acceptable step was found.
    """
    t_prev, f_prev, d_prev = 0.0, f0, d0
    t = step0
    for i in range(max_steps):
        f, d, g = phi(t)
        if not np.isfinite(f):
            t = 0.5 * (t_prev + t)
            continue
        if f > f0 + c1 * t * d0 or (i > 0 and f >= f_prev):
            return _zoom(phi, t_prev, f_prev, d_prev, t, f, d, f0, d0, c1, c2, max_steps - i)
        if abs(d) <= -c2 * d0:
            return t, f, g
        if d >= 0:
            return _zoom(phi, t, f, d, t_prev, f_prev, d_prev, f0, d0, c1, c2, max_steps - i)
        t_prev, f_prev, d_prev = t, f, d
        t = 2.0 * t
    return None


def _zoom(phi, lo, f_lo, d_lo, hi, f_hi, d_hi, f0, d0, c1, c2, budget):
    for _ in range(max(budget, 1)):
        t = _cubic_min(lo, f_lo, d_lo, hi, f_hi, d_hi)
        width = abs(hi - lo)
        if t is None or not np.isfinite(t) or abs(t - lo) < 0.1 * width or abs(t - hi) < 0.1 * width:
            t = 0.5 * (lo + hi)
        f, d, g = phi(t)
        if not np.isfinite(f) or f > f0 + c1 * t * d0 or f >= f_lo:
            hi, f_hi, d_hi = t, f, d
        else:
            if abs(d) <= -c2 * d0:
                return t, f, g
            if d * (hi - lo) >= 0:
                hi, f_hi, d_hi = lo, f_lo, d_lo
            lo, f_lo, d_lo = t, f, d
        if abs(hi - lo) < 1e-14 * max(1.0, abs(lo)):
            break
    if f_lo < f0 and lo > 0:
        f, d, g = phi(lo)
        return lo, f, g
    return None


def bfgs(fun: ValueAndGrad, x0: np.ndarray, max_iter: int = 2000, gtol: float = 1e-8,
         c1: float = 1e-4, c2: float = 0.9) -> OptimizeResult:
    """Minimize ``fun`` (returning value and gradient) from ``x0``.

    The inverse-Hessian approximation starts as the identity and is rescaled
    by ``y.s / y.y`` after the first step.  A failed line search resets the
    approximation once; a second consecutive failure stops the run.  The
    returned point is the best one seen, and ``history_cost`` is the
    best-so-far cost after each iteration.
    """
    counter = _Counter(fun)
    x = np.array(x0, dtype=float)
    f, g = counter(x)
    if not np.isfinite(f) or not np.all(np.isfinite(g)):
        raise DivergenceError("non-finite objective at the starting point", None)
    n = x.size
    h = np.eye(n)
    best = (f, x.copy(), g.copy())
    history_cost, history_evals = [f], [counter.calls]
    converged, message = False, "maximum iterations reached"
    failures = 0
    it = 0
    first_step = True
    for it in range(1, max_iter + 1):
        if np.linalg.norm(g, np.inf) <= gtol:
            converged, message = True, "gradient tolerance reached"
            it -= 1
            break
        p = -h @ g
        d0 = float(g @ p)
        if d0 >= 0:
            h = np.eye(n)
            p = -g
            d0 = float(g @ p)

        def phi(t, x=x, p=p):
            ft, gt = counter(x + t * p)
            return ft, float(gt @ p), gt

        step0 = min(1.0, 1.0 / max(np.linalg.norm(p), 1e-300)) if first_step else 1.0
        found = strong_wolfe(phi, f, d0, step0=step0, c1=c1, c2=c2)
        if found is None:
            failures += 1
            if failures >= 2:
                message = "line search failed"
                break
            h = np.eye(n)
            history_cost.append(best[0])
            history_evals.append(counter.calls)
            continue
        failures = 0
        t, f_new, g_new = found
        s = t * p
        y = g_new - g
        x, f, g = x + s, f_new, g_new
        if f < best[0]:
            best = (f, x.copy(), g.copy())
        sy = float(s @ y)
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            if first_step:
                h = np.eye(n) * sy / float(y @ y)
            rho = 1.0 / sy
            hy = h @ y
            h = h - rho * (np.outer(s, hy) + np.outer(hy, s)) + (rho * rho * float(y @ hy) + rho) * np.outer(s, s)
        first_step = False
        history_cost.append(best[0])
        history_evals.append(counter.calls)
    f_best, x_best, g_best = best
    return OptimizeResult(x=x_best, fun=f_best, grad=g_best, n_iter=it, n_eval=counter.calls,
                          converged=converged, message=message,
                          history_cost=history_cost, history_evals=history_evals)
