"""Limited-memory BFGS with Armijo backtracking."""

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import Inadmissible

CONVERGED = "converged"
MAX_ITER = "max_iter"
LINE_SEARCH_FAILURE = "line_search_failure"


@dataclass
class SolverStats:
    iterations: int = 0
    evaluations: int = 0
    grad_norm: float = np.inf
    status: str = MAX_ITER
    energy_trace: list = field(default_factory=list)

    @property
    def converged(self):
        return self.status == CONVERGED


def _two_loop(g, pairs):
    q = g.copy()
    alphas = []
    for s, y, rho in reversed(pairs):
        a = rho * np.dot(s, q)
        alphas.append(a)
        q -= a * y
    s, y, _ = pairs[-1]
    q *= np.dot(s, y) / np.dot(y, y)
    for (s, y, rho), a in zip(pairs, reversed(alphas)):
        b = rho * np.dot(y, q)
        q += (a - b) * s
    return q


def lbfgs(
    fun,
    x0,
    tol=1e-8,
    max_iter=5000,
    memory=10,
    c1=1e-4,
    shrink=0.5,
    max_backtracks=60,
    fixed=None,
    initial_step=0.1,
    callback=None,
):
    """Minimize ``fun(x) -> (value, gradient)``.

    Trial points where ``fun`` returns a non-finite value are rejected by the
    line search. ``fixed`` is an optional boolean mask of frozen coordinates.
    Stops when the gradient max-norm drops below ``tol``. Failures are
    reported through ``stats.status``; the best iterate is always returned.
    """
    x = np.array(x0, dtype=float)
    keep = np.ones_like(x) if fixed is None else (~np.asarray(fixed)).astype(float)
    f, g = fun(x)
    stats = SolverStats(evaluations=1)
    if not np.isfinite(f):
        raise Inadmissible([], "initial point is not admissible")
    g = g * keep
    stats.energy_trace.append(float(f))
    pairs = deque(maxlen=memory)

    for it in range(max_iter):
        gnorm = float(np.max(np.abs(g))) if g.size else 0.0
        stats.grad_norm = gnorm
        if gnorm < tol:
            stats.status = CONVERGED
            stats.iterations = it
            return x, f, g, stats

        if pairs:
            d = -_two_loop(g, list(pairs))
            if np.dot(g, d) >= 0:
                pairs.clear()
        if not pairs:
            d = -g * (initial_step / gnorm)
        slope = float(np.dot(g, d))

        t = 1.0
        accepted = False
        for _ in range(max_backtracks):
            x_new = x + t * d
            f_new, g_new = fun(x_new)
            stats.evaluations += 1
            if np.isfinite(f_new) and f_new < f and f_new <= f + c1 * t * slope:
                accepted = True
                break
            t *= shrink
        if not accepted:
            if pairs:
                pairs.clear()
                continue
            stats.status = LINE_SEARCH_FAILURE
            stats.iterations = it
            return x, f, g, stats

        g_new = g_new * keep
        s = x_new - x
        y = g_new - g
        sy = float(np.dot(s, y))
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            pairs.append((s, y, 1.0 / sy))
        x, f, g = x_new, f_new, g_new
        stats.energy_trace.append(float(f))
        if callback is not None:
            callback(x, f)

    stats.iterations = max_iter
    stats.grad_norm = float(np.max(np.abs(g))) if g.size else 0.0
    stats.status = CONVERGED if stats.grad_norm < tol else MAX_ITER
    return x, f, g, stats


def minimize(problem, init, eps=0.0, tol=1e-8, max_iter=5000, memory=10, freeze_phi=False):
    """Minimize the loaded functional at ``eps`` (``eps = 0``: linearized).

    Returns ``(state, report, stats)``.
    """
    fixed = None
    if freeze_phi:
        fixed = np.zeros(problem.num_dofs, dtype=bool)
        fixed[problem.num_u_dofs :] = True
    x0 = problem.pack(init)
    x, _, _, stats = lbfgs(
        problem.objective(eps), x0, tol=tol, max_iter=max_iter, memory=memory, fixed=fixed
    )
    state = problem.unpack(x)
    return state, problem.energy(state, eps), stats
