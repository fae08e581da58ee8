"""Small dense 2x2 matrix kernels.

Every function accepts a single matrix of shape ``(2, 2)`` or a stack of
shape ``(..., 2, 2)`` and broadcasts over the leading axes.
"""

import numpy as np

from .errors import NotOrientationPreserving, SingularMatrix

SINGULAR_TOL = 1e-14

IDENTITY = np.eye(2)


def _as_mat(F):
    F = np.asarray(F, dtype=float)
    if F.shape[-2:] != (2, 2):
        raise ValueError(f"expected (..., 2, 2) array, got shape {F.shape}")
    return F


def determinant(F):
    F = _as_mat(F)
    return F[..., 0, 0] * F[..., 1, 1] - F[..., 0, 1] * F[..., 1, 0]


def cofactor(F):
    """Cofactor matrix, ``det(F) * inv(F).T``."""
    F = _as_mat(F)
    C = np.empty_like(F)
    C[..., 0, 0] = F[..., 1, 1]
    C[..., 0, 1] = -F[..., 1, 0]
    C[..., 1, 0] = -F[..., 0, 1]
    C[..., 1, 1] = F[..., 0, 0]
    return C


def invert(F):
    F = _as_mat(F)
    det = determinant(F)
    if np.any(np.abs(det) <= SINGULAR_TOL):
        raise SingularMatrix(f"|det F| <= {SINGULAR_TOL:g}")
    return np.swapaxes(cofactor(F), -1, -2) / det[..., None, None]


def _polar_invariants(F):
    # s = |(a+d, c-b)|, t = |(a-d, b+c)|; sigma1 = (s+t)/2, sigma2 = |s-t|/2.
    a, b = F[..., 0, 0], F[..., 0, 1]
    c, d = F[..., 1, 0], F[..., 1, 1]
    return np.hypot(a + d, c - b), np.hypot(a - d, b + c)


def singular_values(F):
    """Return ``(sigma1, sigma2)`` with ``sigma1 >= sigma2 >= 0``."""
    s, t = _polar_invariants(_as_mat(F))
    return 0.5 * (s + t), 0.5 * np.abs(s - t)


def operator_norm(F):
    s, t = _polar_invariants(_as_mat(F))
    return 0.5 * (s + t)


def dist_SO(F):
    """Frobenius distance from ``F`` to the rotation group SO(2).

    Equal to ``sqrt((s1-1)^2 + (s2-1)^2)`` when det F > 0 and to
    ``sqrt((s1-1)^2 + (s2+1)^2)`` otherwise; both reduce to
    ``sqrt(((s-2)^2 + t^2) / 2)``, which keeps full precision near SO(2).
    """
    s, t = _polar_invariants(_as_mat(F))
    return np.sqrt(0.5 * ((s - 2.0) ** 2 + t**2))


def nearest_rotation(F):
    """Rotation closest to ``F`` in Frobenius norm (no orientation check)."""
    F = _as_mat(F)
    x = F[..., 0, 0] + F[..., 1, 1]
    y = F[..., 1, 0] - F[..., 0, 1]
    r = np.hypot(x, y)
    safe = np.where(r > 0, r, 1.0)
    cos = np.where(r > 0, x / safe, 1.0)
    sin = np.where(r > 0, y / safe, 0.0)
    R = np.empty_like(F)
    R[..., 0, 0] = cos
    R[..., 0, 1] = -sin
    R[..., 1, 0] = sin
    R[..., 1, 1] = cos
    return R


def project_SO(F):
    """Polar rotation factor of an orientation-preserving ``F``."""
    F = _as_mat(F)
    if np.any(determinant(F) <= 0):
        raise NotOrientationPreserving("project_SO requires det F > 0")
    return nearest_rotation(F)


def rotation(theta):
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    R = np.empty(theta.shape + (2, 2))
    R[..., 0, 0] = c
    R[..., 0, 1] = -s
    R[..., 1, 0] = s
    R[..., 1, 1] = c
    return R


def is_rotation(R, tol=1e-12):
    R = _as_mat(R)
    gram = np.swapaxes(R, -1, -2) @ R
    return bool(
        np.all(np.abs(gram - IDENTITY) <= tol)
        and np.all(np.abs(determinant(R) - 1.0) <= tol)
    )


def sym(H):
    H = np.asarray(H, dtype=float)
    return 0.5 * (H + np.swapaxes(H, -1, -2))


def frob(A):
    A = np.asarray(A, dtype=float)
    return np.sqrt(np.sum(A * A, axis=(-2, -1)))


def mat_exp(A, order=18):
    """Matrix exponential by scaling and squaring of a truncated Taylor series.

    Works for square matrices of any size; the argument is scaled by a power
    of two so that its norm is at most 1/2 before the series is summed.
    """
    A = np.asarray(A, dtype=float)
    norm = float(np.max(np.abs(A).sum(axis=-1))) if A.size else 0.0
    squarings = max(0, int(np.ceil(np.log2(norm / 0.5)))) if norm > 0.5 else 0
    X = A / 2.0**squarings
    n = A.shape[-1]
    result = np.broadcast_to(np.eye(n), A.shape).copy()
    term = result.copy()
    for k in range(1, order + 1):
        term = term @ X / k
        result = result + term
    for _ in range(squarings):
        result = result @ result
    return result


def mat_exp_closed(A):
    """Closed-form exponential of a 2x2 matrix.

    With ``A = tau I + B`` and ``tr B = 0`` one has ``B^2 = -det(B) I``, so
    ``exp A = e^tau (c I + s B)`` where c, s are cosh/sinhc of
    ``sqrt(-det B)`` (cos/sinc when ``det B > 0``).
    """
    A = _as_mat(A)
    tau = 0.5 * (A[..., 0, 0] + A[..., 1, 1])
    B = A - tau[..., None, None] * IDENTITY
    q = -determinant(B)
    c, s = _cosh_sinhc(q)
    out = c[..., None, None] * IDENTITY + s[..., None, None] * B
    return np.exp(tau)[..., None, None] * out


def _cosh_sinhc(q):
    """``cosh(sqrt q)`` and ``sinh(sqrt q)/sqrt q``, continued to ``q < 0``."""
    q = np.asarray(q, dtype=float)
    r = np.sqrt(np.abs(q))
    small = r < 1e-4
    r_safe = np.where(small, 1.0, r)
    c = np.where(q >= 0, np.cosh(r), np.cos(r))
    s = np.where(q >= 0, np.sinh(r_safe) / r_safe, np.sin(r_safe) / r_safe)
    s_series = 1.0 + q / 6.0 + q * q / 120.0
    return c, np.where(small, s_series, s)
