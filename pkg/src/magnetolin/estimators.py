"""Estimator-style front end: ``fit`` minimizes the loaded energy at one eps."""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .energy import StoredEnergyModel
from .functional import LoadSpec, MagnetoelasticProblem, VectorField
from .magnetostatics import BoxGrid
from .mesh import BoundaryDatum, build_grid
from .optimize import minimize
from .validation import check_eps, check_positive_int, check_state


class MagnetoelasticMinimizer(BaseEstimator):
    """Minimize the loaded magnetoelastic energy on a uniform grid.

    ``eps = 0`` selects the linearized limit functional. ``fit(X)`` takes an
    optional initial state (``StateFields``, packed vector, or ``{"u", "phi"}``
    mapping) and stores the minimizer in ``u_`` and ``phi_``. There is no
    target; ``score`` is the negative minimized energy.
    """

    def __init__(
        self,
        eps=0.0,
        n=17,
        gamma="left-edge",
        p=4.0,
        a=2.0,
        mu0=1.0,
        pad=1.0,
        N=128,
        f=None,
        h=None,
        boundary="uniaxial-stretch",
        alpha=0.1,
        tol=1e-8,
        max_iter=5000,
        memory=10,
        freeze_phi=False,
    ):
        self.eps = eps
        self.n = n
        self.gamma = gamma
        self.p = p
        self.a = a
        self.mu0 = mu0
        self.pad = pad
        self.N = N
        self.f = f
        self.h = h
        self.boundary = boundary
        self.alpha = alpha
        self.tol = tol
        self.max_iter = max_iter
        self.memory = memory
        self.freeze_phi = freeze_phi

    def _build_problem(self):
        check_positive_int(self.n, "n", 3)
        check_positive_int(self.N, "N", 4)
        check_positive_int(self.max_iter, "max_iter")
        check_positive_int(self.memory, "memory")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol!r}")
        f = self.f if self.f is not None else VectorField("zero")
        h = self.h if self.h is not None else VectorField("constant", value=(0.1, 0.0))
        return MagnetoelasticProblem(
            build_grid(self.n, self.gamma),
            model=StoredEnergyModel(self.p, self.a),
            box=BoxGrid(self.pad, self.N),
            mu0=self.mu0,
            loads=LoadSpec(f, h),
            boundary=BoundaryDatum(self.boundary, self.alpha),
        )

    def fit(self, X=None, y=None):
        eps = check_eps(self.eps)
        problem = self._build_problem()
        init = check_state(problem, X)
        state, report, stats = minimize(
            problem,
            init,
            eps,
            tol=self.tol,
            max_iter=self.max_iter,
            memory=self.memory,
            freeze_phi=self.freeze_phi,
        )
        self.problem_ = problem
        self.state_ = state
        self.u_ = state.u
        self.phi_ = state.phi
        self.report_ = report
        self.stats_ = stats
        self.n_iter_ = stats.iterations
        self.converged_ = stats.converged
        self.energy_ = report.total
        return self

    def energy(self, X=None):
        """Energy report of ``X`` (default: the fitted state) at this eps."""
        check_is_fitted(self, "state_")
        state = self.state_ if X is None else check_state(self.problem_, X)
        return self.problem_.energy(state, check_eps(self.eps))

    def score(self, X=None, y=None):
        check_is_fitted(self, "state_")
        return -float(self.energy_ if X is None else self.energy(X).total)

    def magnetization(self):
        check_is_fitted(self, "state_")
        return np.column_stack([np.cos(self.phi_), np.sin(self.phi_)])


def from_config(config, eps=0.0):
    """Estimator with parameters taken from a :class:`RunConfig`."""
    ms = config.magnetostatics
    return MagnetoelasticMinimizer(
        eps=eps,
        n=config.grid.n,
        gamma=config.grid.gamma,
        p=config.model.p,
        a=config.model.a,
        mu0=ms.mu0,
        pad=ms.pad,
        N=ms.N,
        f=config.loads.f.build(),
        h=config.loads.h.build(),
        boundary=config.boundary.w,
        alpha=config.boundary.alpha,
        tol=config.solver.tol,
        max_iter=config.solver.max_iter,
        memory=config.solver.memory,
    )
