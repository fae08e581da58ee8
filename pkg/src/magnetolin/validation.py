"""Input checks shared by the estimator and the CLI."""

import numbers

import numpy as np

from .mesh import StateFields, apply_dirichlet


def check_eps(eps):
    if not isinstance(eps, numbers.Real) or not np.isfinite(eps) or eps < 0:
        raise ValueError(f"eps must be a finite nonnegative number, got {eps!r}")
    return float(eps)


def check_state(problem, X):
    """Coerce ``X`` into a :class:`StateFields` on ``problem.grid``.

    Accepts ``None`` (the lifted initial state), a ``StateFields``, a packed
    DOF vector, or a mapping with ``u`` and ``phi``. The boundary datum is
    reapplied so the result is admissible for the Dirichlet constraint.
    """
    grid = problem.grid
    if X is None:
        return problem.initial_state()
    if isinstance(X, StateFields):
        state = X.copy()
    elif isinstance(X, dict):
        state = StateFields(np.array(X["u"], dtype=float), np.array(X["phi"], dtype=float))
    else:
        x = np.asarray(X, dtype=float).ravel()
        if x.size != problem.num_dofs:
            raise ValueError(f"packed state needs {problem.num_dofs} entries, got {x.size}")
        state = problem.unpack(x)
    if state.u.shape != (grid.num_nodes, 2) or state.phi.shape != (grid.num_nodes,):
        raise ValueError(
            f"state shapes {state.u.shape}, {state.phi.shape} do not match a grid "
            f"with {grid.num_nodes} nodes"
        )
    if not (np.all(np.isfinite(state.u)) and np.all(np.isfinite(state.phi))):
        raise ValueError("state contains non-finite values")
    return apply_dirichlet(grid, state, problem.boundary)


def check_positive_int(value, name, minimum=1):
    if not isinstance(value, numbers.Integral) or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)
