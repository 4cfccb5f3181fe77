"""Cyclic Jacobi eigensolver for dense Hermitian (or real symmetric) matrices.

Rotations are applied in round-robin order: each round annihilates n/2
disjoint (p, q) pairs at once, so one round is a handful of vectorised
row/column updates and a sweep is n - 1 rounds.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.linalg import qr

DEFAULT_TOL = 1e-14
DEFAULT_MAX_SWEEPS = 100
_NEGLIGIBLE = 1e-18


class ConvergenceError(RuntimeError):
    """Raised when the off-diagonal mass does not fall below tolerance."""


@lru_cache(maxsize=64)
def round_robin(n: int) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    """Pair schedule covering every (p, q), p < q, once per sweep."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        p, q = [], []
        for i in range(m // 2):
            a, b = players[i], players[m - 1 - i]
            if a < n and b < n:
                p.append(min(a, b))
                q.append(max(a, b))
        rounds.append((np.array(p, dtype=np.intp), np.array(q, dtype=np.intp)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return tuple(rounds)


def off_norm(a: np.ndarray) -> float:
    """Frobenius norm of the off-diagonal part."""
    off = a.copy()
    np.fill_diagonal(off, 0)
    return float(np.linalg.norm(off))


def _rotation_params(app, aqq, apq):
    """c, s and unit phase of the 2x2 rotations diagonalising [[app, apq], [apq*, aqq]]."""
    h = np.abs(apq)
    phase = apq / h
    with np.errstate(over="ignore"):
        tau = (aqq - app) / (2.0 * h)
        t = -np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.hypot(1.0, tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    return c[:, None], (t * c)[:, None], phase[:, None]


def _rotation(a: np.ndarray, p: np.ndarray, q: np.ndarray):
    """Parameters of the 2x2 unitaries G = [[c, -s], [s e^{-i phi}, c e^{-i phi}]]."""
    apq = a[p, q]
    h = np.abs(apq)
    app = a[p, p].real
    aqq = a[q, q].real
    # below roundoff of both diagonal entries: drop instead of rotating
    negligible = h <= _NEGLIGIBLE * (np.abs(app) + np.abs(aqq))
    if negligible.any():
        a[p[negligible], q[negligible]] = 0
        a[q[negligible], p[negligible]] = 0
    keep = ~negligible & (h > 0)
    if not keep.any():
        return None
    p, q = p[keep], q[keep]
    return (p, q, *_rotation_params(app[keep], aqq[keep], apq[keep]))


def _rows(x: np.ndarray, p, q, c, s, phase) -> None:
    # x <- G^H x, touching only rows p and q
    xp, xq = x[p], x[q]
    x[p] = c * xp + (s * phase) * xq
    x[q] = (c * phase) * xq - s * xp


def _sweep(a: np.ndarray, w: np.ndarray, schedule) -> np.ndarray:
    # A' = G^H A G is computed as G^H (G^H A)^H, valid because A' is Hermitian;
    # w holds V^H so that V <- V G is again a row update.
    for p, q in schedule:
        rot = _rotation(a, p, q)
        if rot is None:
            continue
        p, q = rot[0], rot[1]
        _rows(a, *rot)
        a = np.ascontiguousarray(a.conj().T)
        _rows(a, *rot)
        a[p, q] = 0
        a[q, p] = 0
        if np.iscomplexobj(a):
            a[p, p] = a[p, p].real
            a[q, q] = a[q, q].real
        _rows(w, *rot)
    return a


def jacobi_eigh(
    h: np.ndarray,
    tol: float = DEFAULT_TOL,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.

    Iterates sweeps until the off-diagonal Frobenius norm is at most
    ``tol * ||h||_F``.

    Raises
    ------
    ConvergenceError
        If ``max_sweeps`` sweeps do not reach the tolerance.
    """
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("expected a square matrix")
    dtype = np.complex128 if np.iscomplexobj(h) else np.float64
    a = np.array(h, dtype=dtype)
    a = 0.5 * (a + a.conj().T)
    n = a.shape[0]
    if n <= 1:
        return a.real.diagonal().copy(), np.eye(n, dtype=dtype)
    w_h = np.eye(n, dtype=dtype)

    scale = float(np.linalg.norm(a))
    target = tol * scale
    schedule = round_robin(n)
    for sweep in range(max_sweeps + 1):
        if off_norm(a) <= target:
            break
        if sweep == max_sweeps:
            raise ConvergenceError(
                f"Jacobi did not converge in {max_sweeps} sweeps "
                f"(off-diagonal {off_norm(a):.3e} > {target:.3e})"
            )
        a = _sweep(a, w_h, schedule)

    w = a.diagonal().real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], w_h.conj().T[:, order]


def jacobi_eigvalsh(h: np.ndarray, **kwargs) -> np.ndarray:
    return jacobi_eigh(h, **kwargs)[0]


def jacobi_svd(
    a: np.ndarray,
    tol: float = 1e-15,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
) -> tuple[np.ndarray, np.ndarray]:
    """Singular values (descending) and left singular vectors by one-sided Jacobi.

    The matrix is first reduced by a column-pivoted QR, a P = Q R, and the
    rows of R are then rotated pairwise until every pair is orthogonal to
    ``tol`` relative to the product of their norms.  The pivoting makes the
    rotations converge in a handful of sweeps even when the singular values
    span hundreds of decades.  Each singular value is accurate to about
    eps * ||a|| in absolute terms; the square root of a Gram eigenvalue is
    only good to about eps / sigma, which swamps anything below 1e-8.

    Raises
    ------
    ConvergenceError
        If ``max_sweeps`` sweeps leave a pair above the tolerance.
    """
    a = np.asarray(a)
    if a.ndim != 2 or 0 in a.shape:
        raise ValueError("expected a nonempty matrix")
    dtype = np.complex128 if np.iscomplexobj(a) else np.float64
    q, z, _ = qr(np.asarray(a, dtype=dtype), mode="economic", pivoting=True)
    # R = W Z with orthogonal rows in Z; z <- G^H z and w accumulates W^H
    n = z.shape[0]
    w = np.eye(n, dtype=dtype)
    schedule = round_robin(n) if n > 1 else ()
    for sweep in range(max_sweeps + 1):
        rotated = False
        for p, qq in schedule:
            zp, zq = z[p], z[qq]
            app = np.einsum("ij,ij->i", zp, zp.conj()).real
            aqq = np.einsum("ij,ij->i", zq, zq.conj()).real
            apq = np.einsum("ij,ij->i", zp, zq.conj())
            # sqrt taken separately: app * aqq underflows for tiny rows
            active = np.abs(apq) > tol * np.sqrt(app) * np.sqrt(aqq)
            if not active.any():
                continue
            rotated = True
            p, qq = p[active], qq[active]
            rot = (p, qq, *_rotation_params(app[active], aqq[active], apq[active]))
            _rows(z, *rot)
            _rows(w, *rot)
        if not rotated:
            break
        if sweep == max_sweeps:
            raise ConvergenceError(f"one-sided Jacobi did not converge in {max_sweeps} sweeps")

    sigma = np.linalg.norm(z, axis=1)
    order = np.argsort(-sigma, kind="stable")
    return sigma[order], q @ w[order].conj().T
