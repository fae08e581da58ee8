"""P1 discretization of the unit square reference domain."""

from dataclasses import dataclass, field

import numpy as np

from . import tensor
from .errors import DegenerateElement, InvalidGrid

GAMMA_CHOICES = ("left-edge", "full-boundary", "bottom-edge")
DATUM_CHOICES = ("zero", "uniaxial-stretch", "shear", "bending")


@dataclass(frozen=True, eq=False)
class GridSpec:
    """Uniform ``n x n`` node grid on (0, 1)^2 split into ``2 (n-1)^2`` triangles.

    Node ``k = j * n + i`` sits at ``(i h, j h)``. Each square is cut along
    its rising diagonal; both triangles are counter-clockwise.
    """

    n: int
    gamma: str = "left-edge"
    nodes: np.ndarray = field(init=False, repr=False)
    elements: np.ndarray = field(init=False, repr=False)
    areas: np.ndarray = field(init=False, repr=False)
    shape_grads: np.ndarray = field(init=False, repr=False)
    gamma_mask: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = int(self.n)
        if n < 3:
            raise InvalidGrid(f"need at least 3 nodes per side, got {self.n}")
        if self.gamma not in GAMMA_CHOICES:
            raise InvalidGrid(f"unknown boundary selector {self.gamma!r}")
        object.__setattr__(self, "n", n)
        h = 1.0 / (n - 1)
        jj, ii = np.divmod(np.arange(n * n), n)
        nodes = np.column_stack([ii * h, jj * h])

        sq_j, sq_i = np.divmod(np.arange((n - 1) ** 2), n - 1)
        k00 = sq_j * n + sq_i
        k10, k01, k11 = k00 + 1, k00 + n, k00 + n + 1
        elements = np.empty((2 * (n - 1) ** 2, 3), dtype=np.int64)
        elements[0::2] = np.column_stack([k00, k10, k11])
        elements[1::2] = np.column_stack([k00, k11, k01])

        x = nodes[elements]  # (ne, 3, 2)
        edges = np.stack([x[:, 1] - x[:, 0], x[:, 2] - x[:, 0]], axis=-1)
        det = tensor.determinant(edges)
        # grad N_a = rows of [-1 -1; 1 0; 0 1] @ inv(edges)
        ref = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
        shape_grads = ref @ tensor.invert(edges)

        if self.gamma == "left-edge":
            mask = ii == 0
        elif self.gamma == "bottom-edge":
            mask = jj == 0
        else:
            mask = (ii == 0) | (jj == 0) | (ii == n - 1) | (jj == n - 1)

        for name, value in [
            ("nodes", nodes),
            ("elements", elements),
            ("areas", 0.5 * det),
            ("shape_grads", shape_grads),
            ("gamma_mask", mask),
        ]:
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def num_nodes(self):
        return self.n * self.n

    @property
    def num_elements(self):
        return len(self.elements)

    @property
    def spacing(self):
        return 1.0 / (self.n - 1)

    @property
    def gamma_nodes(self):
        return np.flatnonzero(self.gamma_mask)

    @property
    def free_nodes(self):
        return np.flatnonzero(~self.gamma_mask)

    @property
    def centroids(self):
        return self.nodes[self.elements].mean(axis=1)


def build_grid(n, gamma="left-edge"):
    return GridSpec(n, gamma)


@dataclass(frozen=True)
class BoundaryDatum:
    """Polynomial Dirichlet datum ``w`` from a small catalog, scaled by ``alpha``."""

    kind: str = "zero"
    alpha: float = 0.0

    def __post_init__(self):
        if self.kind not in DATUM_CHOICES:
            raise ValueError(f"unknown boundary datum {self.kind!r}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        x1, x2 = x[..., 0], x[..., 1]
        a = self.alpha
        zero = np.zeros_like(x1)
        if self.kind == "zero":
            return np.stack([zero, zero], axis=-1)
        if self.kind == "uniaxial-stretch":
            return np.stack([a * x1, zero], axis=-1)
        if self.kind == "shear":
            return np.stack([a * x2, zero], axis=-1)
        # Pure bending of a beam along x1: axial strain linear in x2.
        return np.stack([-a * x1 * (x2 - 0.5), 0.5 * a * x1 * x1], axis=-1)


@dataclass
class StateFields:
    """Nodal displacement ``u`` (num_nodes, 2) and magnetization angle ``phi``."""

    u: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        self.u = np.array(self.u, dtype=float)
        self.phi = np.array(self.phi, dtype=float)
        if self.u.ndim != 2 or self.u.shape[1] != 2:
            raise ValueError(f"u must have shape (num_nodes, 2), got {self.u.shape}")
        if self.phi.shape != (len(self.u),):
            raise ValueError("phi must hold one angle per node")

    @classmethod
    def zeros(cls, grid):
        return cls(np.zeros((grid.num_nodes, 2)), np.zeros(grid.num_nodes))

    @property
    def M(self):
        return np.column_stack([np.cos(self.phi), np.sin(self.phi)])

    def copy(self):
        return StateFields(self.u.copy(), self.phi.copy())

    def to_dict(self, grid=None):
        out = {"u": self.u.tolist(), "phi": self.phi.tolist()}
        if grid is not None:
            out["grid"] = {"n": grid.n, "gamma": grid.gamma, "layout": "row-major, node k = j*n + i"}
        return out


def element_gradient(grid, values, elem=None):
    """Exact gradient of the P1 interpolant on each element.

    ``values`` has shape (num_nodes,) or (num_nodes, k); the result has shape
    (ne, 2) or (ne, k, 2), with rows holding d/dx1, d/dx2.
    """
    values = np.asarray(values, dtype=float)
    elems = grid.elements if elem is None else grid.elements[np.atleast_1d(elem)]
    dN = grid.shape_grads if elem is None else grid.shape_grads[np.atleast_1d(elem)]
    local = values[elems]
    if values.ndim == 1:
        out = np.einsum("ea,eaj->ej", local, dN)
    else:
        out = np.einsum("eak,eaj->ekj", local, dN)
    return out[0] if elem is not None and np.ndim(elem) == 0 else out


def deformation_gradient(grid, state, eps, elem=None):
    """``F = I + eps grad u`` per element."""
    H = element_gradient(grid, state.u, elem)
    return tensor.IDENTITY + eps * H


def element_magnetization(grid, phi):
    """Per-element unit magnetization: nodal (cos, sin) averaged, then renormalized.

    Returns ``(M_e, mean, norm)`` so callers can chain derivatives through the
    normalization.
    """
    M = np.column_stack([np.cos(phi), np.sin(phi)])
    mean = M[grid.elements].mean(axis=1)
    norm = np.linalg.norm(mean, axis=1)
    norm = np.maximum(norm, 1e-300)
    return mean / norm[:, None], mean, norm


def eulerian_magnetization(grid, state, eps, elem=None):
    """Eulerian field at the deformed element: ``m o y = M / det F``."""
    F = deformation_gradient(grid, state, eps)
    det = tensor.determinant(F)
    M_e = element_magnetization(grid, state.phi)[0]
    if elem is not None:
        idx = np.atleast_1d(elem)
        det, M_e = det[idx], M_e[idx]
    bad = np.flatnonzero(det <= 0)
    if bad.size:
        raise DegenerateElement(bad if elem is None else np.atleast_1d(elem)[bad])
    m = M_e / det[:, None]
    return m[0] if elem is not None and np.ndim(elem) == 0 else m


def exchange_terms(grid, state, eps):
    """Exchange energy pulled back to the reference grid, with partial derivatives.

    Returns ``(energy, dE/dK, dE/dF, F, det)`` where ``K`` is the per-element
    gradient of the nodal magnetization (components x derivatives).
    """
    K = element_gradient(grid, state.M)
    F = tensor.IDENTITY + eps * element_gradient(grid, state.u)
    det = tensor.determinant(F)
    bad = np.flatnonzero(det <= 0)
    if bad.size:
        raise DegenerateElement(bad)
    Finv = tensor.invert(F)
    FinvT = np.swapaxes(Finv, -1, -2)
    X = K @ Finv
    sq = np.sum(X * X, axis=(-2, -1))
    w = grid.areas / det
    energy = 0.5 * float(np.sum(w * sq))
    dK = w[:, None, None] * (X @ FinvT)
    XtX = np.swapaxes(X, -1, -2) @ X
    dF = -w[:, None, None] * (XtX @ FinvT + 0.5 * sq[:, None, None] * FinvT)
    return energy, dK, dF, F, det


def exchange_energy_pullback(grid, state, eps):
    """``1/2 int_{y(Omega)} |grad m|^2`` evaluated on reference elements.

    Per element this is ``|grad M F^-1|^2 / det F`` times the area; at
    ``eps = 0`` it is the Dirichlet energy of the nodal magnetization.
    """
    return exchange_terms(grid, state, eps)[0]


def apply_dirichlet(grid, state, w):
    """Copy of ``state`` with ``u = w`` on the boundary nodes of Gamma."""
    out = state.copy()
    idx = grid.gamma_nodes
    out.u[idx] = w(grid.nodes[idx])
    return out


def lifted_initial_state(grid, w):
    """Zero state carrying the Dirichlet datum, smoothed by one Jacobi sweep.

    Interior nodes receive the mean of their 4-neighbours so the datum
    blends into the interior; angles start at zero (M = e1).
    """
    state = apply_dirichlet(grid, StateFields.zeros(grid), w)
    n = grid.n
    u = state.u.reshape(n, n, 2)
    padded = np.pad(u, ((1, 1), (1, 1), (0, 0)), mode="edge")
    avg = 0.25 * (
        padded[:-2, 1:-1] + padded[2:, 1:-1] + padded[1:-1, :-2] + padded[1:-1, 2:]
    )
    free = grid.free_nodes
    state.u[free] = avg.reshape(-1, 2)[free]
    return state
