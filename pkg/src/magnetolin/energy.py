"""Pointwise energy densities: growth function, stored energy, coupling."""

from dataclasses import dataclass

import numpy as np

from . import tensor
from .errors import DomainError, UnitLengthViolation

UNIT_TOL = 1e-10


def g_p(t, p):
    """Quadratic-to-p-growth function: t^2/2 on [0, 1], t^p/p + 1/2 - 1/p beyond."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("g_p is defined for t >= 0 only")
    big = t > 1.0
    t_big = np.where(big, t, 1.0)
    out = np.where(big, t_big**p / p + 0.5 - 1.0 / p, 0.5 * t * t)
    return out if out.ndim else float(out)


def g_p_slope_ratio(t, p):
    """``g_p'(t) / t``: 1 on [0, 1] and t^(p-2) beyond (continuous at t = 1)."""
    t = np.asarray(t, dtype=float)
    return np.where(t > 1.0, np.maximum(t, 1.0) ** (p - 2.0), 1.0)


def _check_unit(M):
    M = np.asarray(M, dtype=float)
    if np.any(np.abs(np.linalg.norm(M, axis=-1) - 1.0) > UNIT_TOL):
        raise UnitLengthViolation("magnetization must have unit length")
    return M


def outer(a, b):
    return np.asarray(a)[..., :, None] * np.asarray(b)[..., None, :]


def E_of(M):
    """Zero-trace magnetostrictive strain ``-M (x) M + I/2`` of a unit vector."""
    M = _check_unit(M)
    return -outer(M, M) + 0.5 * tensor.IDENTITY


def e_of(F, m):
    """Eulerian strain ``-(det F)^2 m (x) m + I/2``."""
    F = np.asarray(F, dtype=float)
    m = np.asarray(m, dtype=float)
    det = tensor.determinant(F)
    return -(det**2)[..., None, None] * outer(m, m) + 0.5 * tensor.IDENTITY


def e_of_unit(m):
    """``e(I, m)``, the strain entering the linear model."""
    return E_of(m)


def theta_vol(delta, a):
    """Volumetric barrier ``delta^-a - 1 + a ln delta``; +inf for delta <= 0.

    Vanishes with zero slope at delta = 1, has curvature a^2 there, and
    is nonnegative on (0, inf).
    """
    delta = np.asarray(delta, dtype=float)
    pos = delta > 0
    d = np.where(pos, delta, 1.0)
    out = np.where(pos, d ** (-a) - 1.0 + a * np.log(d), np.inf)
    return out if out.ndim else float(out)


def theta_vol_prime(delta, a):
    delta = np.asarray(delta, dtype=float)
    pos = delta > 0
    d = np.where(pos, delta, 1.0)
    return np.where(pos, -a * d ** (-a - 1.0) + a / d, np.nan)


def _expm1_minus_linear(y):
    """``exp(y) - 1 - y`` without cancellation for small ``y``."""
    y = np.asarray(y, dtype=float)
    small = np.abs(y) < 0.5
    ys = np.where(small, y, 0.0)
    term = 0.5 * ys * ys
    series = term.copy()
    for k in range(3, 20):
        term = term * ys / k
        series = series + term
    with np.errstate(over="ignore"):
        direct = np.expm1(y) - y
    return np.where(small, series, direct)


@dataclass(frozen=True)
class ElasticityTensor:
    """Fourth-order tensor D^2 Phi(I) acting on 2x2 matrices.

    ``matrix`` represents the bilinear form on row-major ``vec(H)``.
    """

    matrix: np.ndarray

    def contract(self, H):
        """``C H : H``."""
        v = np.asarray(H, dtype=float).reshape(*np.shape(H)[:-2], 4)
        return np.einsum("...i,ij,...j->...", v, self.matrix, v)

    def apply(self, H):
        v = np.asarray(H, dtype=float).reshape(*np.shape(H)[:-2], 4)
        return (v @ self.matrix.T).reshape(np.shape(H))

    @property
    def sym3(self):
        """Restriction to symmetric matrices in the basis e11, e22, (e12+e21)/sqrt 2."""
        r = 1.0 / np.sqrt(2.0)
        basis = np.array(
            [[1.0, 0, 0, 0], [0, 0, 0, 1.0], [0, r, r, 0]],
        )
        return basis @ self.matrix @ basis.T


@dataclass(frozen=True)
class StoredEnergyModel:
    """Default frame-indifferent stored energy.

    ``Phi(F) = g_p(dist(F, SO(2))) + theta(det F)`` with growth exponent ``p``
    and determinant blow-up exponent ``a``. Subclasses may override
    :meth:`phi_and_grad` and :meth:`elasticity` to plug in another density.
    """

    p: float = 4.0
    a: float = 2.0

    def __post_init__(self):
        if not np.isfinite(self.p) or self.p <= 2:
            raise ValueError(f"growth exponent p must exceed 2, got {self.p}")
        if not np.isfinite(self.a) or self.a <= 1:
            raise ValueError(f"determinant exponent a must exceed 1, got {self.a}")

    def phi(self, F):
        F = np.asarray(F, dtype=float)
        out = self.phi_and_grad_offset(F - tensor.IDENTITY)[0]
        return out if np.ndim(out) else float(out)

    def phi_and_grad(self, F):
        """Return ``Phi(F)`` and ``dPhi/dF`` (nan gradient where Phi is infinite)."""
        F = np.asarray(F, dtype=float)
        return self.phi_and_grad_offset(F - tensor.IDENTITY)

    def phi_and_grad_offset(self, G):
        """``Phi(I + G)`` and its gradient, accurate to full relative precision
        when ``G`` is small (the energy is then O(|G|^2) and naive evaluation
        loses digits to cancellation)."""
        G = np.asarray(G, dtype=float)
        g00, g01 = G[..., 0, 0], G[..., 0, 1]
        g10, g11 = G[..., 1, 0], G[..., 1, 1]
        tr = g00 + g11
        w = g10 - g01
        s = np.hypot(2.0 + tr, w)
        s_minus_2 = (tr * (4.0 + tr) + w * w) / (s + 2.0)
        t = np.hypot(g00 - g11, g01 + g10)
        d = np.sqrt(0.5 * (s_minus_2**2 + t**2))
        x = tr + (g00 * g11 - g01 * g10)  # det(I + G) - 1

        pos = x > -1.0
        log_det = np.log1p(np.where(pos, x, 0.0))
        theta = np.where(pos, _expm1_minus_linear(-self.a * log_det), np.inf)
        value = g_p(d, self.p) + theta

        # I + G - R with R the rotation by atan2(w, 2 + tr)
        angle = np.arctan2(w, 2.0 + tr)
        one_minus_cos = 2.0 * np.sin(0.5 * angle) ** 2
        sin = np.sin(angle)
        diff = np.empty(G.shape)
        diff[..., 0, 0] = g00 + one_minus_cos
        diff[..., 1, 1] = g11 + one_minus_cos
        diff[..., 0, 1] = g01 + sin
        diff[..., 1, 0] = g10 - sin
        grad = g_p_slope_ratio(d, self.p)[..., None, None] * diff
        det = np.where(pos, 1.0 + x, 1.0)
        dtheta = np.where(pos, -self.a / det * np.expm1(-self.a * log_det), np.nan)
        grad = grad + dtheta[..., None, None] * tensor.cofactor(tensor.IDENTITY + G)
        return (value if np.ndim(value) else float(value)), grad

    def W(self, F, m):
        """Coupled density ``Phi(exp(e(F, m)) F)``."""
        F = np.asarray(F, dtype=float)
        return self.phi(tensor.mat_exp(e_of(F, m)) @ F)

    def elasticity(self):
        """Closed form: ``C H : H = |sym H|^2 + a^2 (tr H)^2``."""
        mat = np.zeros((4, 4))
        # sym part: |sym H|^2 = H00^2 + H11^2 + (H01 + H10)^2 / 2
        mat[0, 0] = mat[3, 3] = 1.0
        mat[1, 1] = mat[2, 2] = mat[1, 2] = mat[2, 1] = 0.5
        trace = np.array([1.0, 0, 0, 1.0])
        mat += self.a**2 * np.outer(trace, trace)
        return ElasticityTensor(mat)

    def elasticity_apply(self, S):
        """``C S`` for a (stack of) 2x2 matrices; equals the gradient of ``C S:S / 2``."""
        S = np.asarray(S, dtype=float)
        tr = S[..., 0, 0] + S[..., 1, 1]
        return tensor.sym(S) + (self.a**2 * tr)[..., None, None] * tensor.IDENTITY

    def quadratic_density(self, H, m):
        """Linearized density ``C(sym H + e(m)):(sym H + e(m)) / 2``."""
        S = tensor.sym(H) + E_of(m)
        out = 0.5 * np.sum(self.elasticity_apply(S) * S, axis=(-2, -1))
        return out if np.ndim(out) else float(out)


def elasticity_fd_oracle(model, step=1e-4):
    """Central second differences of ``model.phi`` at the identity."""
    basis = np.eye(4).reshape(4, 2, 2)
    I = tensor.IDENTITY
    mat = np.empty((4, 4))
    for i in range(4):
        for j in range(i, 4):
            hi, hj = step * basis[i], step * basis[j]
            val = (
                model.phi(I + hi + hj)
                - model.phi(I + hi - hj)
                - model.phi(I - hi + hj)
                + model.phi(I - hi - hj)
            ) / (4.0 * step * step)
            mat[i, j] = mat[j, i] = val
    return ElasticityTensor(mat)
