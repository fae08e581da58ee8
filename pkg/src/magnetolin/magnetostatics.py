"""Magnetostatic potential on a padded box and the demagnetization energy.

The potential solves ``div(-mu0 grad v + f) = 0`` with ``v = 0`` on the
box boundary. The box is cut into square cells, each split along its rising
diagonal into two P1 triangles; the Galerkin stiffness on that mesh is the
5-point Laplacian, and the source ``f`` is constant per cell. Energies use
the same triangle gradients as the solver, so ``mu0 |grad v| <= |f|`` holds
as an exact algebraic identity.
"""

from dataclasses import dataclass

import numpy as np
from scipy import fft

from . import tensor
from .errors import DegenerateElement, NoConvergence


@dataclass(frozen=True)
class BoxGrid:
    """Square box ``(-pad, 1 + pad)^2`` with ``N`` cells per side."""

    pad: float = 1.0
    N: int = 128

    def __post_init__(self):
        if self.pad <= 0:
            raise ValueError("pad must be positive")
        if int(self.N) < 4:
            raise ValueError("box needs at least 4 cells per side")
        object.__setattr__(self, "N", int(self.N))

    @property
    def lo(self):
        return -self.pad

    @property
    def hi(self):
        return 1.0 + self.pad

    @property
    def h(self):
        return (self.hi - self.lo) / self.N

    @property
    def cell_centers(self):
        """Array (N, N, 2); index ``[i, j]`` is the cell at column i, row j."""
        c = self.lo + (np.arange(self.N) + 0.5) * self.h
        X, Y = np.meshgrid(c, c, indexing="ij")
        return np.stack([X, Y], axis=-1)

    @property
    def node_coords(self):
        c = self.lo + np.arange(self.N + 1) * self.h
        X, Y = np.meshgrid(c, c, indexing="ij")
        return np.stack([X, Y], axis=-1)

    def contains(self, points, margin=0.0):
        points = np.asarray(points)
        return bool(np.all(points > self.lo + margin) and np.all(points < self.hi - margin))


@dataclass
class Raster:
    """Rasterized source: per-cell field, owning element (-1 if none), overlaps."""

    field: np.ndarray
    owner: np.ndarray
    overlap_cells: int


def _candidate_pairs(x, box, centers):
    """(element, cell i, cell j) pairs from triangle bounding boxes.

    With ``centers`` the candidates are cells whose centre lies in the
    bounding box, otherwise every cell the bounding box touches.
    """
    N, h, lo = box.N, box.h, box.lo
    if not box.contains(x):
        raise ValueError("deformed body leaves the magnetostatic box; increase pad")
    if centers:
        lo_idx = np.ceil((x.min(axis=1) - lo) / h - 0.5 - 1e-9)
        hi_idx = np.floor((x.max(axis=1) - lo) / h - 0.5 + 1e-9)
    else:
        lo_idx = np.floor((x.min(axis=1) - lo) / h)
        hi_idx = np.floor((x.max(axis=1) - lo) / h)
    lo_idx = np.clip(lo_idx, 0, N - 1).astype(np.int64)
    hi_idx = np.clip(hi_idx, -1, N - 1).astype(np.int64)
    ni = np.maximum(hi_idx[:, 0] - lo_idx[:, 0] + 1, 0)
    nj = np.maximum(hi_idx[:, 1] - lo_idx[:, 1] + 1, 0)
    counts = ni * nj
    elem = np.repeat(np.arange(len(x)), counts)
    start = np.repeat(np.cumsum(counts) - counts, counts)
    local = np.arange(counts.sum()) - start
    ci = lo_idx[elem, 0] + local % ni[elem]
    cj = lo_idx[elem, 1] + local // ni[elem]
    return elem, ci, cj


def rasterize(grid, node_positions, values, box, tol=1e-12):
    """Paint per-element ``values`` onto box cells whose centre lies in the triangle.

    Boundary points belong to the lowest-index containing triangle. Triangles
    are given by ``grid.elements`` over ``node_positions``.
    """
    N, h, lo = box.N, box.h, box.lo
    x = np.asarray(node_positions, dtype=float)[grid.elements]  # (ne, 3, 2)
    elem, ci, cj = _candidate_pairs(x, box, centers=True)
    px = lo + (ci + 0.5) * h
    py = lo + (cj + 0.5) * h

    a, b, c = x[elem, 0], x[elem, 1], x[elem, 2]
    v0 = b - a
    v1 = c - a
    det = v0[:, 0] * v1[:, 1] - v0[:, 1] * v1[:, 0]
    if np.any(det <= 0):
        raise DegenerateElement(np.unique(elem[det <= 0]))
    rx, ry = px - a[:, 0], py - a[:, 1]
    l1 = (rx * v1[:, 1] - ry * v1[:, 0]) / det
    l2 = (v0[:, 0] * ry - v0[:, 1] * rx) / det
    inside = (l1 >= -tol) & (l2 >= -tol) & (l1 + l2 <= 1.0 + tol)
    strict = (l1 > tol) & (l2 > tol) & (l1 + l2 < 1.0 - tol)

    cell = (ci * N + cj)[inside]
    elem_in = elem[inside]
    order = np.lexsort((elem_in, cell))
    cell, elem_in = cell[order], elem_in[order]
    first = np.ones(len(cell), dtype=bool)
    first[1:] = cell[1:] != cell[:-1]
    owner = np.full(N * N, -1, dtype=np.int64)
    owner[cell[first]] = elem_in[first]

    strict_cells = (ci * N + cj)[strict]
    overlap = int(np.sum(np.bincount(strict_cells, minlength=N * N) > 1))

    values = np.asarray(values, dtype=float)
    field = np.zeros((N * N, values.shape[-1]))
    hit = owner >= 0
    field[hit] = values[owner[hit]]
    return Raster(field.reshape(N, N, -1), owner.reshape(N, N), overlap)


@dataclass
class Coverage:
    """Exact areas of (deformed triangle) x (box cell) intersections.

    ``area_grad[k, a]`` is the derivative of ``area[k]`` with respect to the
    position of local vertex ``a`` of triangle ``elem[k]``.
    """

    elem: np.ndarray
    cell: np.ndarray
    area: np.ndarray
    area_grad: np.ndarray
    box: BoxGrid

    def field(self, values):
        """Cell averages ``sum_T |T cap cell| v_T / |cell|``, shape (N, N, k)."""
        values = np.asarray(values, dtype=float)
        N = self.box.N
        w = self.area / self.box.h**2
        cols = [
            np.bincount(self.cell, w * values[self.elem, c], N * N)
            for c in range(values.shape[1])
        ]
        return np.stack(cols, axis=-1).reshape(N, N, -1)

    def pullback(self, dE, values, num_elements):
        """Chain ``dE/dfield`` back to element values and vertex positions.

        Returns ``(dE/dvalues (ne, k), dE/dvertices (ne, 3, 2))``.
        """
        values = np.asarray(values, dtype=float)
        g = dE.reshape(-1, dE.shape[-1])[self.cell] / self.box.h**2  # (P, k)
        dvals = np.stack(
            [
                np.bincount(self.elem, self.area * g[:, c], num_elements)
                for c in range(g.shape[1])
            ],
            axis=-1,
        )
        weight = np.sum(g * values[self.elem], axis=1)
        local = weight[:, None, None] * self.area_grad
        dvert = np.zeros((num_elements, 3, 2))
        for a in range(3):
            for c in range(2):
                dvert[:, a, c] = np.bincount(self.elem, local[:, a, c], num_elements)
        return dvals, dvert


def _clip_interval(constraints, tol):
    """Liang-Barsky: the part ``[s0, s1]`` of ``[0, 1]`` where all
    ``alpha + beta s >= 0`` hold.

    ``constraints`` is a list of ``(alpha, beta, keep_tie)``. Where
    ``beta`` vanishes (within ``tol``) the constraint is all-or-nothing, and a
    segment lying on the constraint line is kept only where ``keep_tie``.
    """
    n = len(constraints[0][0])
    s0 = np.zeros(n)
    s1 = np.ones(n)
    empty = np.zeros(n, dtype=bool)
    for alpha, beta, keep_tie in constraints:
        flat = np.abs(beta) <= tol
        on_line = flat & (np.abs(alpha) <= tol)
        empty |= flat & ~on_line & (alpha < 0)
        empty |= on_line & ~keep_tie
        r = -alpha / np.where(flat, 1.0, beta)
        s0 = np.where(~flat & (beta > 0), np.maximum(s0, r), s0)
        s1 = np.where(~flat & (beta < 0), np.minimum(s1, r), s1)
    s1 = np.where(empty | (s1 < s0), s0, s1)
    return s0, s1


def _cross(u, v):
    return u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]


def coverage(grid, node_positions, box):
    """Intersection areas of each deformed triangle with the box cells it touches.

    The area of ``T cap C`` is the boundary integral of ``(x dy - y dx) / 2``
    over the triangle edges clipped to the cell plus the cell edges clipped to
    the triangle. Coordinates are taken relative to the cell centre.
    """
    N, h, lo = box.N, box.h, box.lo
    x = np.asarray(node_positions, dtype=float)[grid.elements]
    elem, ci, cj = _candidate_pairs(x, box, centers=False)
    tri = x[elem]
    e1, e2 = tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]
    orient = _cross(e1, e2)
    if np.any(orient <= 0):
        raise DegenerateElement(np.unique(elem[orient <= 0]))
    center = np.stack([lo + (ci + 0.5) * h, lo + (cj + 0.5) * h], axis=-1)
    tri = tri - center[:, None, :]
    half = 0.5 * h
    tol = 1e-10 * h

    area = np.zeros(len(elem))
    grad = np.zeros((len(elem), 3, 2))
    edges = [(a, (a + 1) % 3) for a in range(3)]
    for a, b in edges:
        p, e = tri[:, a], tri[:, b] - tri[:, a]
        # inward normal of the triangle edge is (-e_y, e_x)
        s0, s1 = _clip_interval(
            [
                (p[:, 0] + half, e[:, 0], -e[:, 1] > 0),
                (half - p[:, 0], -e[:, 0], e[:, 1] > 0),
                (p[:, 1] + half, e[:, 1], e[:, 0] > 0),
                (half - p[:, 1], -e[:, 1], -e[:, 0] > 0),
            ],
            tol,
        )
        q0, q1 = p + s0[:, None] * e, p + s1[:, None] * e
        area += 0.5 * _cross(q0, q1)
        # d|T cap C|/dP is the normal velocity integrated over the clipped edge
        normal = np.stack([e[:, 1], -e[:, 0]], axis=-1)
        wb = 0.5 * (s1**2 - s0**2)
        grad[:, a] += ((s1 - s0) - wb)[:, None] * normal
        grad[:, b] += wb[:, None] * normal

    corners = np.array([[-half, -half], [half, -half], [half, half], [-half, half]])
    scale = np.linalg.norm(tri[:, [1, 2, 0]] - tri, axis=-1).max(axis=1)
    for k in range(4):
        q = np.broadcast_to(corners[k], tri[:, 0].shape)
        d = np.broadcast_to(corners[(k + 1) % 4] - corners[k], q.shape)
        cons = []
        for a, b in edges:
            e = tri[:, b] - tri[:, a]
            cons.append((_cross(e, q - tri[:, a]), _cross(e, d), np.zeros(len(q), dtype=bool)))
        r0, r1 = _clip_interval(cons, tol * scale)
        q0, q1 = q + r0[:, None] * d, q + r1[:, None] * d
        area += 0.5 * _cross(q0, q1)

    keep = area > 1e-14 * h * h
    return Coverage(elem[keep], (ci * N + cj)[keep], area[keep], grad[keep], box)


def rasterize_pushforward(grid, state, eps, box):
    """Rasterize ``chi_{y(Omega)} m`` with ``m o y = M / det F`` per element."""
    from .mesh import element_magnetization

    F = tensor.IDENTITY + eps * _element_grad_u(grid, state)
    det = tensor.determinant(F)
    bad = np.flatnonzero(det <= 0)
    if bad.size:
        raise DegenerateElement(bad)
    M_e = element_magnetization(grid, state.phi)[0]
    positions = grid.nodes + eps * state.u
    return rasterize(grid, positions, M_e / det[:, None], box)


def _element_grad_u(grid, state):
    from .mesh import element_gradient

    return element_gradient(grid, state.u)


# --- discrete operators -------------------------------------------------


def cell_gradient_sum(v, h):
    """Sum of the two triangle gradients of nodal ``v`` in each cell, (N, N, 2)."""
    v00, v10 = v[:-1, :-1], v[1:, :-1]
    v01, v11 = v[:-1, 1:], v[1:, 1:]
    gx = (v10 - v00) + (v11 - v01)
    gy = (v11 - v10) + (v01 - v00)
    return np.stack([gx, gy], axis=-1) / h


def cell_gradient_sum_adjoint(g, h):
    """Adjoint of :func:`cell_gradient_sum`, returning a nodal (N+1, N+1) array."""
    gx, gy = g[..., 0] / h, g[..., 1] / h
    N = g.shape[0]
    out = np.zeros((N + 1, N + 1))
    out[1:, :-1] += gx - gy
    out[:-1, :-1] -= gx + gy
    out[1:, 1:] += gx + gy
    out[:-1, 1:] += gy - gx
    return out


def laplacian(v):
    """5-point stencil ``4 v_c - sum(neighbours)`` on interior nodes (zero boundary)."""
    out = np.zeros_like(v)
    out[1:-1, 1:-1] = (
        4.0 * v[1:-1, 1:-1] - v[:-2, 1:-1] - v[2:, 1:-1] - v[1:-1, :-2] - v[1:-1, 2:]
    )
    return out


def dirichlet_energy(v):
    """``int |grad v|^2`` over the box for nodal ``v`` (triangle gradients)."""
    dx = np.diff(v, axis=0)
    dy = np.diff(v, axis=1)
    return float(np.sum(dx * dx) + np.sum(dy * dy))


def _sine_eigenvalues(N):
    k = np.arange(1, N)
    lam = 2.0 - 2.0 * np.cos(np.pi * k / N)
    return lam[:, None] + lam[None, :]


def _poisson_inverse(r, eig):
    """Exact inverse of the interior 5-point Laplacian via DST-I."""
    inner = r[1:-1, 1:-1]
    z = fft.idstn(fft.dstn(inner, type=1, norm="ortho") / eig, type=1, norm="ortho")
    out = np.zeros_like(r)
    out[1:-1, 1:-1] = z
    return out


def conjugate_gradient(apply_A, b, tol=1e-10, max_iter=1000, precondition=None):
    """Preconditioned CG stopping on ``|r| <= tol |b|``.

    Returns ``(x, iterations)``; raises :class:`NoConvergence` otherwise.
    """
    x = np.zeros_like(b)
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        return x, 0
    r = b.copy()
    z = precondition(r) if precondition else r
    p = z.copy()
    rz = np.vdot(r, z)
    for it in range(1, max_iter + 1):
        Ap = apply_A(p)
        alpha = rz / np.vdot(p, Ap)
        x += alpha * p
        r -= alpha * Ap
        if np.linalg.norm(r) <= tol * bnorm:
            return x, it
        z = precondition(r) if precondition else r
        rz_new = np.vdot(r, z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise NoConvergence(
        f"CG reached {max_iter} iterations, residual {np.linalg.norm(r) / bnorm:.3e}",
        iterations=max_iter,
    )


@dataclass
class PotentialSolver:
    """Reusable solver for a fixed box; ``precondition`` selects the DST preconditioner."""

    box: BoxGrid
    mu0: float = 1.0
    tol: float = 1e-10
    max_iter: int = 1000
    precondition: bool = True

    def __post_init__(self):
        if self.mu0 <= 0:
            raise ValueError("mu0 must be positive")
        self._eig = _sine_eigenvalues(self.box.N)
        self.last_iterations = 0

    def rhs(self, f):
        """Load vector ``b_i = int f . grad phi_i`` (boundary rows zeroed)."""
        h = self.box.h
        b = 0.5 * h * h * cell_gradient_sum_adjoint(f, h)
        b[0, :] = b[-1, :] = b[:, 0] = b[:, -1] = 0.0
        return b

    def solve(self, f):
        b = self.rhs(np.asarray(f, dtype=float)) / self.mu0
        pre = (lambda r: _poisson_inverse(r, self._eig)) if self.precondition else None
        v, its = conjugate_gradient(laplacian, b, self.tol, self.max_iter, pre)
        self.last_iterations = its
        return v

    def energy_and_grad(self, f):
        """Demag energy ``mu0/2 int |grad v|^2`` and its derivative w.r.t. cell values."""
        v = self.solve(f)
        energy = 0.5 * self.mu0 * dirichlet_energy(v)
        # dE/df_cell = sum over the cell's two triangles of area * grad v
        dE = 0.5 * self.box.h**2 * cell_gradient_sum(v, self.box.h)
        return energy, dE, v


def solve_potential(f, mu0=1.0, box=None, tol=1e-10, max_iter=1000, precondition=True):
    """Nodal potential ``v`` on the box grid for the cell field ``f`` (N, N, 2)."""
    f = np.asarray(f, dtype=float)
    if box is None:
        box = BoxGrid(N=f.shape[0])
    return PotentialSolver(box, mu0, tol, max_iter, precondition).solve(f)


def demag_energy(v, mu0=1.0):
    """``mu0/2 int |grad v|^2`` with the solver's own discrete gradient."""
    return 0.5 * mu0 * dirichlet_energy(np.asarray(v, dtype=float))


def gradient_l2(v):
    return np.sqrt(dirichlet_energy(v))


def field_l2(f, box):
    f = np.asarray(f, dtype=float)
    return float(np.sqrt(box.h**2 * np.sum(f * f)))
