"""Box-constrained limited-memory quasi-Newton minimization.

Two-loop-recursion L-BFGS directions combined with projection onto the box
and Armijo backtracking on the projected step. Fully deterministic. Both the
model fitter and the acquisition optimizer run on this routine (the latter
negates its objective).
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LbfgsResult:
    point: np.ndarray
    value: float
    usable: bool  # False when the objective was non-finite at the start


def _two_loop(grad, s_mem, y_mem, rho_mem):
    q = grad.copy()
    alphas = []
    for s, y, rho in zip(reversed(s_mem), reversed(y_mem), reversed(rho_mem)):
        a = rho * float(np.dot(s, q))
        alphas.append(a)
        q -= a * y
    if s_mem:
        s, y = s_mem[-1], y_mem[-1]
        q *= float(np.dot(s, y)) / float(np.dot(y, y))
    for (s, y, rho), a in zip(zip(s_mem, y_mem, rho_mem), reversed(alphas)):
        b = rho * float(np.dot(y, q))
        q += (a - b) * s
    return q


def _line_search(fun, x, f, g, direction, lower, upper, step, armijo, shrink, max_backtracks):
    for _ in range(max_backtracks):
        candidate = np.clip(x + step * direction, lower, upper)
        delta = candidate - x
        slope = float(np.dot(g, delta))
        if np.max(np.abs(delta)) == 0.0:
            return False, x, f
        if slope < 0.0:
            fc = float(fun(candidate))
            if np.isfinite(fc) and fc <= f + armijo * slope:
                return True, candidate, fc
        step *= shrink
    return False, x, f


def minimize_lbfgs_box(
    fun,
    grad,
    x0,
    lower,
    upper,
    *,
    memory=10,
    max_iterations=100,
    gradient_tolerance=1e-8,
    armijo=1e-4,
    shrink=0.5,
    max_backtracks=30,
):
    """Minimize ``fun`` over the box [lower, upper] starting from ``x0``.

    Returns the best point seen, so the result value never exceeds the value
    at the (clipped) starting point.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    x = np.clip(np.asarray(x0, dtype=float), lower, upper)
    f = float(fun(x))
    if not np.isfinite(f):
        return LbfgsResult(x, np.inf, False)
    g = np.asarray(grad(x), dtype=float)
    if not np.all(np.isfinite(g)):
        return LbfgsResult(x, f, True)

    best_x, best_f = x, f
    s_mem, y_mem, rho_mem = [], [], []

    for _ in range(max_iterations):
        projected_grad = x - np.clip(x - g, lower, upper)
        if np.max(np.abs(projected_grad)) <= gradient_tolerance:
            break

        if s_mem:
            direction = -_two_loop(g, s_mem, y_mem, rho_mem)
            step = 1.0
            if not np.all(np.isfinite(direction)) or float(np.dot(direction, g)) >= 0.0:
                direction = -g
                step = min(1.0, 1.0 / max(float(np.max(np.abs(g))), 1e-12))
        else:
            direction = -g
            step = min(1.0, 1.0 / max(float(np.max(np.abs(g))), 1e-12))

        ok, xn, fn = _line_search(
            fun, x, f, g, direction, lower, upper, step, armijo, shrink, max_backtracks
        )
        if not ok and s_mem:
            # quasi-Newton direction failed; restart from steepest descent
            s_mem.clear()
            y_mem.clear()
            rho_mem.clear()
            step = min(1.0, 1.0 / max(float(np.max(np.abs(g))), 1e-12))
            ok, xn, fn = _line_search(
                fun, x, f, g, -g, lower, upper, step, armijo, shrink, max_backtracks
            )
        if not ok:
            break

        gn = np.asarray(grad(xn), dtype=float)
        if not np.all(np.isfinite(gn)):
            if fn < best_f:
                best_x, best_f = xn, fn
            break

        s = xn - x
        y = gn - g
        sy = float(np.dot(s, y))
        if sy > 1e-10 * float(np.linalg.norm(s)) * float(np.linalg.norm(y)):
            s_mem.append(s)
            y_mem.append(y)
            rho_mem.append(1.0 / sy)
            if len(s_mem) > memory:
                s_mem.pop(0)
                y_mem.pop(0)
                rho_mem.pop(0)

        x, f, g = xn, fn, gn
        if f < best_f:
            best_x, best_f = x, f

    return LbfgsResult(best_x, best_f, True)
