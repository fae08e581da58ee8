"""Discrete nonlinear and linearized magnetoelastic functionals with gradients.

Degrees of freedom are the displacement at nodes off the Dirichlet part of
the boundary (two components each, node-major) followed by the
magnetization angle at every node.
"""

from dataclasses import dataclass, field

import numpy as np

from . import tensor
from .energy import StoredEnergyModel, outer
from .errors import DegenerateElement, Inadmissible
from .magnetostatics import BoxGrid, PotentialSolver, coverage, rasterize
from .mesh import (
    BoundaryDatum,
    StateFields,
    apply_dirichlet,
    element_gradient,
    element_magnetization,
    exchange_terms,
    lifted_initial_state,
)

FIELD_KINDS = ("zero", "constant", "gaussian-bump", "shear")


@dataclass(frozen=True)
class VectorField:
    """Analytic 2-vector field from a small catalog.

    * ``constant``: ``value``
    * ``gaussian-bump``: ``value * exp(-|x - center|^2 / (2 width^2))``
    * ``shear``: ``alpha * (x2, 0)``
    """

    kind: str = "zero"
    value: tuple = (0.0, 0.0)
    center: tuple = (0.5, 0.5)
    width: float = 0.2
    alpha: float = 0.0

    def __post_init__(self):
        if self.kind not in FIELD_KINDS:
            raise ValueError(f"unknown field kind {self.kind!r}")
        object.__setattr__(self, "value", tuple(float(v) for v in self.value))
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))

    @property
    def is_zero(self):
        if self.kind == "zero":
            return True
        if self.kind == "shear":
            return self.alpha == 0
        return not any(self.value)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        shape = x.shape[:-1]
        if self.kind == "zero":
            return np.zeros(shape + (2,))
        if self.kind == "constant":
            return np.broadcast_to(np.array(self.value), shape + (2,)).copy()
        if self.kind == "shear":
            return np.stack([self.alpha * x[..., 1], np.zeros(shape)], axis=-1)
        r2 = np.sum((x - np.array(self.center)) ** 2, axis=-1)
        return np.exp(-0.5 * r2 / self.width**2)[..., None] * np.array(self.value)

    def jacobian(self, x):
        """``J[..., i, j] = d f_i / d x_j``."""
        x = np.asarray(x, dtype=float)
        shape = x.shape[:-1]
        J = np.zeros(shape + (2, 2))
        if self.kind == "shear":
            J[..., 0, 1] = self.alpha
        elif self.kind == "gaussian-bump":
            diff = x - np.array(self.center)
            g = np.exp(-0.5 * np.sum(diff**2, axis=-1) / self.width**2)
            J = -(g / self.width**2)[..., None, None] * outer(np.array(self.value), diff)
        return J


@dataclass(frozen=True)
class LoadSpec:
    f: VectorField = field(default_factory=VectorField)
    h: VectorField = field(default_factory=VectorField)


@dataclass
class EnergyReport:
    elastic: float
    exchange: float
    magnetostatic: float
    load_work: float
    zeeman: float
    total: float
    gradient: np.ndarray = field(repr=False, default=None)


@dataclass
class AdmissibilityReport:
    min_det: float
    max_opnorm_eps_grad_u: float
    all_positive: bool
    ciarlet_pointwise: bool
    ciarlet_global_hint: bool
    implication_violations: int = 0
    overlap_cells: int = 0


class MagnetoelasticProblem:
    """Discrete energies on a fixed grid, stored energy, box, and loads."""

    def __init__(
        self,
        grid,
        model=None,
        box=None,
        mu0=1.0,
        loads=None,
        boundary=None,
        cg_tol=1e-10,
        cg_max=1000,
    ):
        self.grid = grid
        self.model = model if model is not None else StoredEnergyModel()
        self.box = box if box is not None else BoxGrid()
        self.mu0 = float(mu0)
        if self.mu0 < 0:
            raise ValueError("mu0 must be nonnegative")
        self.loads = loads if loads is not None else LoadSpec()
        self.boundary = boundary if boundary is not None else BoundaryDatum()
        self.solver = (
            PotentialSolver(self.box, self.mu0, cg_tol, cg_max) if self.mu0 > 0 else None
        )
        self._free = grid.free_nodes
        self._reference_coverage = None

        ne = grid.num_elements
        self._scatter_nodes = grid.elements.ravel()
        self._num_nodes = grid.num_nodes
        self._ne = ne

    # --- dof handling ----------------------------------------------------

    @property
    def num_dofs(self):
        return 2 * len(self._free) + self.grid.num_nodes

    @property
    def num_u_dofs(self):
        return 2 * len(self._free)

    def pack(self, state):
        return np.concatenate([state.u[self._free].ravel(), state.phi])

    def unpack(self, x):
        x = np.asarray(x, dtype=float)
        state = apply_dirichlet(self.grid, StateFields.zeros(self.grid), self.boundary)
        state.u[self._free] = x[: self.num_u_dofs].reshape(-1, 2)
        state.phi = x[self.num_u_dofs :].copy()
        return state

    def initial_state(self):
        return lifted_initial_state(self.grid, self.boundary)

    def _pack_gradient(self, gu, gphi):
        return np.concatenate([gu[self._free].ravel(), gphi])

    # --- scatter helpers ---------------------------------------------------

    def _scatter(self, local):
        """Sum per-element, per-local-node values (ne, 3, k) onto nodes."""
        k = local.shape[-1]
        flat = local.reshape(-1, k)
        return np.stack(
            [np.bincount(self._scatter_nodes, flat[:, c], self._num_nodes) for c in range(k)],
            axis=-1,
        )

    def _nodal_from_grad(self, dG):
        """Nodal derivative from a derivative w.r.t. element gradients (ne, k, 2)."""
        local = np.einsum("ekj,eaj->eak", dG, self.grid.shape_grads)
        return self._scatter(local)

    def _phi_from_nodal_M(self, dM, phi):
        return -dM[:, 0] * np.sin(phi) + dM[:, 1] * np.cos(phi)

    def _phi_from_element_M(self, dMe, Me, norm, phi):
        tangent = dMe - np.sum(dMe * Me, axis=1)[:, None] * Me
        dmean = tangent / norm[:, None]
        local = np.repeat(dmean[:, None, :] / 3.0, 3, axis=1)
        return self._phi_from_nodal_M(self._scatter(local), phi)

    # --- loads -------------------------------------------------------------

    def loads_eval(self, state, eps):
        """Return ``(L, Z, dL/du, dZ/du, dZ/dphi)`` with nodal derivatives.

        ``L = int f . u dx`` and the Zeeman term is pulled back to the
        reference domain, ``int_Omega h(x + eps u) . M dx``; both use the
        element centroid rule.
        """
        grid = self.grid
        areas = grid.areas
        c = grid.centroids
        ubar = state.u[grid.elements].mean(axis=1)
        Me, _, norm = element_magnetization(grid, state.phi)
        zero_nodal = np.zeros((grid.num_nodes, 2))

        if self.loads.f.is_zero:
            L, dL = 0.0, zero_nodal
        else:
            fc = self.loads.f(c)
            L = float(np.sum(areas * np.sum(fc * ubar, axis=1)))
            dL = self._scatter(np.repeat((areas[:, None] * fc)[:, None] / 3.0, 3, axis=1))

        if self.loads.h.is_zero:
            return L, 0.0, dL, zero_nodal, np.zeros(grid.num_nodes)
        yc = c + eps * ubar
        hc = self.loads.h(yc)
        Z = float(np.sum(areas * np.sum(hc * Me, axis=1)))
        if eps != 0:
            Jh = self.loads.h.jacobian(yc)
            du_e = eps * areas[:, None] * np.einsum("eij,ei->ej", Jh, Me)
            dZu = self._scatter(np.repeat(du_e[:, None] / 3.0, 3, axis=1))
        else:
            dZu = zero_nodal
        dZphi = self._phi_from_element_M(areas[:, None] * hc, Me, norm, state.phi)
        return L, Z, dL, dZu, dZphi

    # --- energies ----------------------------------------------------------

    def energy_G_eps(self, state, eps, with_loads=True):
        """Rescaled nonlinear energy (minus loads when ``with_loads``)."""
        if eps <= 0:
            raise ValueError("eps must be positive; use energy_G0 for the limit")
        grid = self.grid
        areas = grid.areas
        H = element_gradient(grid, state.u)
        F = tensor.IDENTITY + eps * H
        det = tensor.determinant(F)
        bad = np.flatnonzero(det <= 0)
        if bad.size:
            raise Inadmissible(bad)
        Me, _, norm = element_magnetization(grid, state.phi)

        # exp(eps E(M)); for unit M the argument has fixed radius eps/2, so its
        # differential along the sphere is sinhc(eps/2) * eps * dE.
        Emat = -outer(Me, Me) + 0.5 * tensor.IDENTITY
        A = tensor.mat_exp_closed(eps * Emat)
        sinhc = tensor._cosh_sinhc(np.array((eps / 2.0) ** 2))[1]
        # A F - I assembled from small pieces so the O(eps^2) density keeps
        # its relative precision as eps -> 0
        A_minus_I = 2.0 * np.sinh(eps / 4.0) ** 2 * tensor.IDENTITY + 2.0 * np.sinh(
            eps / 2.0
        ) * Emat
        offset = A_minus_I + eps * H + A_minus_I @ (eps * H)
        val, P = self.model.phi_and_grad_offset(offset)
        w = areas / eps**2
        elastic = float(np.sum(w * val))
        dF = w[:, None, None] * (np.swapaxes(A, -1, -2) @ P)
        dA = w[:, None, None] * (P @ np.swapaxes(F, -1, -2))
        dEmat = sinhc * eps * dA
        dMe = -np.einsum("eij,ej->ei", dEmat + np.swapaxes(dEmat, -1, -2), Me)

        exchange, dK, dF_ex, _, _ = exchange_terms(grid, state, eps)
        dF = dF + dF_ex

        magnetostatic = 0.0
        gu_demag = 0.0
        if self.solver is not None:
            # cells carry the exact area-weighted average of the pushed-forward
            # magnetization, which keeps the energy continuous in u
            positions = grid.nodes + eps * state.u
            cov = coverage(grid, positions, self.box)
            values = Me / det[:, None]
            magnetostatic, dEdf, _ = self.solver.energy_and_grad(cov.field(values))
            g_e, dvert = cov.pullback(dEdf, values, self._ne)
            dMe = dMe + g_e / det[:, None]
            dJ = -np.sum(g_e * Me, axis=1) / det**2
            dF = dF + dJ[:, None, None] * tensor.cofactor(F)
            gu_demag = eps * self._scatter(dvert)

        gu = self._nodal_from_grad(eps * dF) + gu_demag
        gphi = self._phi_from_nodal_M(self._nodal_from_grad(dK), state.phi)
        gphi = gphi + self._phi_from_element_M(dMe, Me, norm, state.phi)

        L = Z = 0.0
        if with_loads:
            L, Z, dL, dZu, dZphi = self.loads_eval(state, eps)
            gu = gu - dL - dZu
            gphi = gphi - dZphi
        total = elastic + exchange + magnetostatic - L - Z
        return EnergyReport(
            elastic, exchange, magnetostatic, L, Z, total, self._pack_gradient(gu, gphi)
        )

    def reference_coverage(self):
        if self._reference_coverage is None:
            self._reference_coverage = coverage(self.grid, self.grid.nodes, self.box)
        return self._reference_coverage

    def energy_G0(self, state, with_loads=True):
        """Linearized limit energy (minus loads when ``with_loads``)."""
        grid = self.grid
        areas = grid.areas
        H = element_gradient(grid, state.u)
        Me, _, norm = element_magnetization(grid, state.phi)
        S = tensor.sym(H) + (-outer(Me, Me) + 0.5 * tensor.IDENTITY)
        CS = self.model.elasticity_apply(S)
        elastic = 0.5 * float(np.sum(areas * np.sum(CS * S, axis=(-2, -1))))
        Q = areas[:, None, None] * CS
        dMe = -np.einsum("eij,ej->ei", Q + np.swapaxes(Q, -1, -2), Me)

        K = element_gradient(grid, state.M)
        exchange = 0.5 * float(np.sum(areas * np.sum(K * K, axis=(-2, -1))))
        dK = areas[:, None, None] * K

        magnetostatic = 0.0
        if self.solver is not None:
            cov = self.reference_coverage()
            magnetostatic, dEdf, _ = self.solver.energy_and_grad(cov.field(Me))
            dMe = dMe + cov.pullback(dEdf, Me, self._ne)[0]

        gu = self._nodal_from_grad(Q)
        gphi = self._phi_from_nodal_M(self._nodal_from_grad(dK), state.phi)
        gphi = gphi + self._phi_from_element_M(dMe, Me, norm, state.phi)

        L = Z = 0.0
        if with_loads:
            L, Z, dL, dZu, dZphi = self.loads_eval(state, 0.0)
            gu = gu - dL - dZu
            gphi = gphi - dZphi
        total = elastic + exchange + magnetostatic - L - Z
        return EnergyReport(
            elastic, exchange, magnetostatic, L, Z, total, self._pack_gradient(gu, gphi)
        )

    def energy(self, state, eps=0.0, with_loads=True):
        if eps == 0:
            return self.energy_G0(state, with_loads)
        return self.energy_G_eps(state, eps, with_loads)

    def objective(self, eps=0.0, with_loads=True):
        """``x -> (value, gradient)``; inadmissible points evaluate to +inf."""

        def fun(x):
            try:
                rep = self.energy(self.unpack(x), eps, with_loads)
            except (DegenerateElement, ValueError):
                return np.inf, None
            return rep.total, rep.gradient

        return fun

    # --- diagnostics -------------------------------------------------------

    def admissibility(self, state, eps, c=1.0, check_overlap=True):
        H = element_gradient(self.grid, state.u)
        det = tensor.determinant(tensor.IDENTITY + eps * H)
        opn = eps * tensor.operator_norm(H)
        violations = int(np.sum((opn < 1.0) & (det <= 0)))
        if violations:
            raise AssertionError(
                f"{violations} element(s) with eps|grad u|_O < 1 but det <= 0"
            )
        overlap = 0
        if check_overlap and np.all(det > 0):
            positions = self.grid.nodes + eps * state.u
            try:
                overlap = rasterize(
                    self.grid, positions, np.zeros((self._ne, 1)), self.box
                ).overlap_cells
            except ValueError:
                overlap = -1
        return AdmissibilityReport(
            min_det=float(det.min()),
            max_opnorm_eps_grad_u=float(opn.max()),
            all_positive=bool(np.all(det > 0)),
            ciarlet_pointwise=bool(np.all(opn < 1.0)),
            ciarlet_global_hint=bool(opn.max() < c),
            implication_violations=violations,
            overlap_cells=overlap,
        )

    def coercivity_diagnostic(self, state, eps):
        """Bound ``G <= F + |f| |u| + |h o y| |M|`` and the implied constant.

        Returns a dict with ``G``, ``F``, the Cauchy-Schwarz right-hand side,
        and ``C = (rhs - F) / (1 + sqrt(G))``.
        """
        rep = self.energy(state, eps)
        G = rep.total + rep.load_work + rep.zeeman
        grid = self.grid
        areas = grid.areas
        c = grid.centroids
        ubar = state.u[grid.elements].mean(axis=1)
        f_norm = np.sqrt(np.sum(areas * np.sum(self.loads.f(c) ** 2, axis=1)))
        u_norm = np.sqrt(np.sum(areas * np.sum(ubar**2, axis=1)))
        h_norm = np.sqrt(np.sum(areas * np.sum(self.loads.h(c + eps * ubar) ** 2, axis=1)))
        M_norm = np.sqrt(np.sum(areas))
        rhs = rep.total + f_norm * u_norm + h_norm * M_norm
        return {
            "G": G,
            "F": rep.total,
            "rhs": float(rhs),
            "holds": bool(G <= rhs + 1e-12 * max(1.0, abs(rhs))),
            "C": float((rhs - rep.total) / (1.0 + np.sqrt(max(G, 0.0)))),
        }
