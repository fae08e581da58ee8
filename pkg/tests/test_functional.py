import numpy as np
import pytest

from magnetolin import tensor
from magnetolin.energy import StoredEnergyModel
from magnetolin.errors import Inadmissible
from magnetolin.functional import LoadSpec, MagnetoelasticProblem, VectorField
from magnetolin.magnetostatics import BoxGrid
from magnetolin.mesh import BoundaryDatum, StateFields, build_grid, element_magnetization


def _problem(n=5, N=32, mu0=1.0, loads=None, boundary=None):
    return MagnetoelasticProblem(
        build_grid(n),
        box=BoxGrid(1.0, N),
        mu0=mu0,
        loads=loads,
        boundary=boundary or BoundaryDatum("uniaxial-stretch", 0.1),
        cg_tol=1e-14,
    )


def _bumpy_loads():
    return LoadSpec(
        VectorField("gaussian-bump", (0.3, -0.2), (0.4, 0.6), 0.3),
        VectorField("gaussian-bump", (0.5, 0.2), (0.6, 0.3), 0.25),
    )


def _directional_check(problem, state, eps, rng, rel):
    fun = problem.objective(eps)
    x = problem.pack(state)
    _, g = fun(x)
    for _ in range(3):
        d = rng.normal(size=x.size)
        d /= np.linalg.norm(d)
        t = 1e-6
        fd = (fun(x + t * d)[0] - fun(x - t * d)[0]) / (2 * t)
        assert abs(g @ d - fd) <= rel * max(abs(fd), np.linalg.norm(g) * 1e-3)


@pytest.mark.parametrize("eps", [0.3, 0.05])
def test_nonlinear_gradient_matches_finite_differences(eps, rng, make_state):
    problem = _problem(loads=_bumpy_loads())
    state = make_state(problem, rng)
    _directional_check(problem, state, eps, rng, 1e-5)


def test_limit_gradient_matches_finite_differences(rng, make_state):
    problem = _problem(loads=_bumpy_loads())
    state = make_state(problem, rng)
    _directional_check(problem, state, 0.0, rng, 1e-6)


def test_load_gradients_match_finite_differences(rng, make_state):
    problem = _problem(loads=_bumpy_loads(), mu0=0.0)
    state = make_state(problem, rng)
    eps = 0.2
    L, Z, dL, dZu, dZphi = problem.loads_eval(state, eps)
    du = rng.normal(size=state.u.shape)
    dphi = rng.normal(size=state.phi.shape)
    t = 1e-6

    def at(s):
        moved = StateFields(state.u + s * du, state.phi + s * dphi)
        return problem.loads_eval(moved, eps)[:2]

    (Lp, Zp), (Lm, Zm) = at(t), at(-t)
    assert np.sum(dL * du) == pytest.approx((Lp - Lm) / (2 * t), rel=1e-6)
    dz = np.sum(dZu * du) + dZphi @ dphi
    assert dz == pytest.approx((Zp - Zm) / (2 * t), rel=1e-6)


def _constant_state(grid, phi=0.0):
    return StateFields(np.zeros((grid.num_nodes, 2)), np.full(grid.num_nodes, phi))


def test_relaxed_limit_value_quarter():
    problem = _problem(mu0=0.0, boundary=BoundaryDatum("zero"))
    rep = problem.energy_G0(_constant_state(problem.grid, 0.7))
    assert rep.elastic == pytest.approx(0.25, rel=1e-13)
    assert rep.exchange == 0.0 and rep.total == pytest.approx(0.25, rel=1e-13)


def test_nonlinear_sequence_closed_form_and_limit():
    problem = _problem(mu0=0.0, boundary=BoundaryDatum("zero"))
    state = _constant_state(problem.grid)
    values = []
    for eps in (0.4, 0.2, 0.1, 0.05, 0.0125):
        # exp(eps E) = diag(e^{-eps/2}, e^{eps/2}); g_p is quadratic here
        dist2 = ((2 * np.cosh(eps / 2) - 2) ** 2 + 4 * np.sinh(eps / 2) ** 2) / 2
        expected = 0.5 * dist2 / eps**2
        rep = problem.energy_G_eps(state, eps)
        assert rep.total == pytest.approx(expected, rel=1e-12)
        values.append(rep.total)
    assert np.all(np.diff(values) < 0)
    assert values[-1] == pytest.approx(0.25, rel=1e-4)


def test_zero_stress_strain_has_no_elastic_energy():
    problem = _problem(mu0=0.0, boundary=BoundaryDatum("zero"))
    grid = problem.grid
    x = grid.nodes
    # sym grad u = diag(1/2, -1/2) = -e(M) for M = (1, 0)
    state = StateFields(np.column_stack([0.5 * x[:, 0], -0.5 * x[:, 1]]), np.zeros(len(x)))
    assert problem.energy_G0(state, with_loads=False).elastic == pytest.approx(0.0, abs=1e-14)


def test_antisymmetric_gradient_is_elastically_invisible():
    problem = _problem(mu0=0.0, boundary=BoundaryDatum("zero"))
    x = problem.grid.nodes
    rot = StateFields(np.column_stack([-x[:, 1], x[:, 0]]) * 0.3, np.full(len(x), 0.4))
    still = StateFields(np.zeros_like(x), np.full(len(x), 0.4))
    assert problem.energy_G0(rot).elastic == pytest.approx(problem.energy_G0(still).elastic)


def test_folding_state_is_inadmissible():
    problem = _problem(mu0=0.0, boundary=BoundaryDatum("zero"))
    x = problem.grid.nodes
    state = StateFields(np.column_stack([-2.0 * x[:, 0], 0 * x[:, 0]]), np.zeros(len(x)))
    with pytest.raises(Inadmissible):
        problem.energy_G_eps(state, 1.0)
    assert problem.objective(1.0)(problem.pack(state))[0] == np.inf
    with pytest.raises(ValueError):
        problem.energy_G_eps(state, 0.0)


def test_constant_zeeman_field_collapses(rng, make_state):
    h = np.array([0.3, -0.7])
    problem = _problem(mu0=0.0, loads=LoadSpec(h=VectorField("constant", tuple(h))))
    state = make_state(problem, rng)
    Me = element_magnetization(problem.grid, state.phi)[0]
    reference = h @ (problem.grid.areas @ Me)
    for eps in (0.0, 0.1, 0.4):
        _, Z, _, dZu, _ = problem.loads_eval(state, eps)
        assert Z == pytest.approx(reference, rel=1e-13)
        assert np.all(dZu == 0)


def test_zero_loads_vanish(rng, make_state):
    problem = _problem(mu0=0.0)
    L, Z, dL, dZu, dZphi = problem.loads_eval(make_state(problem, rng), 0.2)
    assert (L, Z) == (0.0, 0.0)
    assert not dL.any() and not dZu.any() and not dZphi.any()


def test_zeeman_at_zero_eps_matches_eulerian_quadrature(rng, make_state):
    loads = _bumpy_loads()
    problem = _problem(mu0=0.0, loads=loads)
    state = make_state(problem, rng)
    grid = problem.grid
    total = 0.0
    for e, tri in enumerate(grid.elements):
        y = grid.nodes[tri]
        e1, e2 = y[1] - y[0], y[2] - y[0]
        area = 0.5 * abs(e1[0] * e2[1] - e1[1] * e2[0])
        mean = np.mean(np.column_stack([np.cos(state.phi[tri]), np.sin(state.phi[tri])]), axis=0)
        m = mean / np.linalg.norm(mean)
        total += area * loads.h(y.mean(axis=0)) @ m
    assert problem.loads_eval(state, 0.0)[1] == pytest.approx(total, abs=1e-10)


def test_admissibility_reports(rng, make_state):
    problem = _problem()
    rep = problem.admissibility(StateFields.zeros(problem.grid), 0.3)
    assert rep.min_det == 1.0 and rep.ciarlet_pointwise and rep.overlap_cells == 0
    for _ in range(10):
        state = make_state(problem, rng, amplitude=1.0)
        H = np.array([tensor.operator_norm(g) for g in _grads(problem, state)])
        eps = 0.99 / H.max()
        rep = problem.admissibility(state, eps)
        assert rep.all_positive and rep.ciarlet_pointwise
        assert rep.implication_violations == 0


def _grads(problem, state):
    from magnetolin.mesh import element_gradient

    return element_gradient(problem.grid, state.u)


def test_admissibility_detects_folding():
    problem = _problem(n=7, N=64, boundary=BoundaryDatum("zero"))
    x = problem.grid.nodes
    # a crease along x1 = 1/2 reverses orientation on the right half at eps = 1
    u = np.column_stack([-2.5 * np.maximum(x[:, 0] - 0.5, 0.0), np.zeros(len(x))])
    state = StateFields(u, np.zeros(len(x)))
    assert problem.admissibility(state, 0.1).all_positive
    rep = problem.admissibility(state, 1.0)
    assert not rep.all_positive and rep.min_det < 0
    assert not rep.ciarlet_pointwise


def test_overlap_detected_for_non_injective_map():
    problem = _problem(n=5, N=64, boundary=BoundaryDatum("zero"))
    x = problem.grid.nodes
    # orientation-preserving but wraps the right part over the left
    theta = 1.9 * np.pi * x[:, 0]
    r = 0.5 - 0.2 * x[:, 1]
    y = np.column_stack([0.5 + r * np.cos(theta), 0.5 + r * np.sin(theta)])
    state = StateFields(y - x, np.zeros(len(x)))
    rep = problem.admissibility(state, 1.0)
    assert rep.all_positive
    theta2 = 2.6 * np.pi * x[:, 0]
    y2 = np.column_stack([0.5 + r * np.cos(theta2), 0.5 + r * np.sin(theta2)])
    rep2 = problem.admissibility(StateFields(y2 - x, np.zeros(len(x))), 1.0)
    assert rep2.all_positive and rep2.overlap_cells > 0
    assert rep.overlap_cells < rep2.overlap_cells


def test_coercivity_diagnostic(rng, make_state):
    problem = _problem(loads=_bumpy_loads())
    state = make_state(problem, rng)
    for eps in (0.0, 0.2):
        diag = problem.coercivity_diagnostic(state, eps)
        assert diag["holds"]
        assert np.isfinite(diag["C"]) and diag["C"] >= 0


def test_report_total_is_signed_sum(rng, make_state):
    problem = _problem(loads=_bumpy_loads())
    rep = problem.energy(make_state(problem, rng), 0.1)
    assert rep.total == pytest.approx(
        rep.elastic + rep.exchange + rep.magnetostatic - rep.load_work - rep.zeeman
    )
    assert rep.magnetostatic > 0


def test_other_stored_energy_parameters(rng, make_state):
    problem = MagnetoelasticProblem(build_grid(4), model=StoredEnergyModel(6.0, 3.0), mu0=0.0)
    state = make_state(problem, rng)
    _directional_check(problem, state, 0.2, rng, 1e-5)
