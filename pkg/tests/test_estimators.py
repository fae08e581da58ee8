import numpy as np
import pytest
from sklearn.base import clone

from magnetolin.config import parse_config
from magnetolin.estimators import MagnetoelasticMinimizer, from_config
from magnetolin.functional import VectorField
from magnetolin.harness import linear_solve


def _small(**kw):
    params = dict(n=5, N=32, mu0=0.0, tol=1e-8)
    params.update(kw)
    return MagnetoelasticMinimizer(**params)


def test_params_round_trip():
    est = _small(eps=0.1)
    params = est.get_params()
    assert params["eps"] == 0.1 and params["n"] == 5
    twin = clone(est)
    assert twin.get_params() == params
    est.set_params(eps=0.2, alpha=0.05)
    assert est.eps == 0.2 and est.alpha == 0.05


def test_fit_limit_problem():
    est = _small().fit()
    assert est.converged_ and est.n_iter_ > 0
    assert est.u_.shape == (25, 2) and est.phi_.shape == (25,)
    assert est.score() == pytest.approx(-est.energy_)
    assert np.allclose(np.linalg.norm(est.magnetization(), axis=1), 1.0)


def test_fit_from_packed_state_and_frozen_angles():
    est = _small(freeze_phi=True, h=VectorField("zero"))
    first = est.fit()
    direct = linear_solve(first.problem_, first.phi_)
    assert np.max(np.abs(direct - first.u_)) < 1e-6
    x0 = first.problem_.pack(first.state_)
    again = clone(est).fit(x0)
    assert again.n_iter_ <= 1


def test_fit_nonlinear_and_score_other_states():
    est = _small(eps=0.1, mu0=1.0).fit()
    assert est.converged_
    worse = {"u": np.zeros((25, 2)), "phi": np.full(25, 1.0)}
    assert est.score(worse) < est.score()


@pytest.mark.parametrize(
    "params",
    [dict(eps=-0.1), dict(eps=float("nan")), dict(n=2), dict(max_iter=0), dict(tol=0.0)],
)
def test_invalid_parameters(params):
    with pytest.raises(ValueError):
        _small(**params).fit()


def test_bad_initial_state():
    with pytest.raises(ValueError):
        _small().fit(np.zeros(7))
    with pytest.raises(ValueError):
        _small().fit({"u": np.full((25, 2), np.nan), "phi": np.zeros(25)})


def test_unfitted_access():
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        _small().magnetization()


def test_from_config():
    cfg = parse_config({"grid": {"n": 5}, "magnetostatics": {"N": 32}})
    est = from_config(cfg, eps=0.2)
    assert est.n == 5 and est.N == 32 and est.eps == 0.2
    assert est.h == VectorField("constant", (0.1, 0.0))
