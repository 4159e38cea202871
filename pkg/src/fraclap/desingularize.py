"""Singularity removal for the graph Laplacian.

Three equivalent routes around the zero eigenvalue of L^T, each packaged
as a LinearOperator plus the closed-form recovery of g(L^T) b quantities:

* rank-one shift: work with M = L^T + theta*z*1^T, whose spectrum replaces
  0 by theta; then g(L^T) b = g(M) b + [g(0) - g(theta)] z.
* explicit projection: work with the (n-1)-dimensional Q^T L^T Q, where Q
  spans the orthogonal complement of the all-ones vector; then
  g(L^T) b = Q g(Q^T L^T Q) Q^T w + beta z with b = w + beta*z, w ⟂ 1.
* implicit projection: run the Krylov method on L^T itself but start it at
  w = b - beta*z; the iterates coincide with the explicitly projected ones
  in exact arithmetic.

Shifted solves with the rank-one operator use the cancellation-safe
splitting: solving (L^T - xi I) psi = w - (1^T w) z and adding
(1^T w)/(theta - xi) * z performs the near-cancelling subtraction
analytically, which matters for poles |xi| << 1.
"""

import math

import numpy as np

from fraclap.krylov import LinearOperator
from fraclap.solver import solve
from fraclap.sparse import spmv


def shifted_solve_safe(sys, z, theta, xi, w, factors=None, verify=False):
    """x = (L^T + theta*z*1^T - xi I)^{-1} w without cancellation.

    xi must be negative; the factorization of (L^T - xi I) is taken from
    the system cache unless explicitly provided. With verify=True the
    residual is checked against 1e-9 * ||w||.
    """
    if not xi < 0:
        raise ValueError(f"pole must be negative, got {xi}")
    if factors is None:
        factors = sys.shift_factors(xi)
    w = np.asarray(w, dtype=float)
    s = w.sum()
    psi = solve(factors, w - s * z)
    x = psi + (s / (theta - xi)) * z
    if verify:
        r = spmv(sys.Lt, x) + theta * x.sum() * z - xi * x - w
        if np.linalg.norm(r) > 1e-9 * max(np.linalg.norm(w), 1e-300):
            raise FloatingPointError(
                f"shifted solve residual {np.linalg.norm(r):.3e} exceeds tolerance"
            )
    return x


def rank_one_operator(sys, theta=1.0):
    """LinearOperator for M = L^T + theta*z*1^T (z from the system cache).

    Recover g(L^T) b from y ~= g(M) b via y + (g(0) - g(theta)) z; see
    rank_one_recovery.
    """
    if sys.z is None:
        raise ValueError("system has no null vector; compute z first")
    z = sys.z
    theta = float(theta)

    def apply(v):
        v = np.asarray(v, dtype=float)
        return spmv(sys.Lt, v) + (theta * v.sum()) * z

    def shifted_solve(xi, w):
        return shifted_solve_safe(sys, z, theta, xi, w)

    return LinearOperator(sys.n, apply, shifted_solve)


def rank_one_recovery(y, z, theta, p):
    """g(L^T) b from y = g(L^T + theta*z*1^T) b: add (g(0) - g(theta)) z."""
    from fraclap.matfun import frac_exp_scalar

    correction = 1.0 - frac_exp_scalar(theta, p).real
    return y + correction * z


def _q_coeff(n):
    s = (1.0 + 1.0 / math.sqrt(n)) / (1.0 - n)
    return s


def apply_Q(u):
    """Q u in O(n): embeds length n-1 into the complement of span{1}.

    Q is the first n-1 columns of the orthogonal matrix whose last column
    is 1/sqrt(n): first row 1/sqrt(n) * 1^T, below s*1*1^T + I with
    s = (1 + 1/sqrt(n))/(1 - n).
    """
    u = np.asarray(u, dtype=float)
    n = len(u) + 1
    s = _q_coeff(n)
    total = u.sum()
    out = np.empty(n)
    out[0] = total / math.sqrt(n)
    out[1:] = s * total + u
    return out


def apply_Qt(v):
    """Q^T v in O(n), the adjoint of apply_Q."""
    v = np.asarray(v, dtype=float)
    n = len(v)
    s = _q_coeff(n)
    tail = v[1:]
    return (v[0] / math.sqrt(n) + s * tail.sum()) + tail


def projected_operator(sys, ordering="rcm"):
    """LinearOperator for Q^T L^T Q of dimension n-1, never forming Q.

    apply(u) = Q^T (L^T (Q u)); shifted solves reduce to the plain
    Laplacian factorization via
    (Q^T L^T Q - xi I)^{-1} u = Q^T (L^T - xi I)^{-1} Q u.
    """
    if sys.n < 2:
        raise ValueError("projection needs n >= 2")

    def apply(u):
        return apply_Qt(spmv(sys.Lt, apply_Q(u)))

    def shifted_solve(xi, u):
        return apply_Qt(solve(sys.shift_factors(xi, ordering=ordering), apply_Q(u)))

    return LinearOperator(sys.n - 1, apply, shifted_solve)


def split_b(u0, z):
    """Decompose u0 = w + beta*z with beta = 1^T u0 and w ⟂ 1."""
    u0 = np.asarray(u0, dtype=float)
    beta = float(u0.sum())
    return u0 - beta * z, beta


def correct_sum(y, z):
    """y - (1^T y - 1) z: restores unit sum along the null direction."""
    y = np.asarray(y, dtype=float)
    return y - (y.sum() - 1.0) * z
