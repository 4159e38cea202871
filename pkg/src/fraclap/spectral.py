"""Estimates of the extreme nonzero Laplacian eigenvalue magnitudes.

|lambda_n| comes from power iteration on L; |lambda_2| from inverse power
iteration on the rank-one-shifted transpose L^T + theta*z*1^T, whose
spectrum replaces the zero eigenvalue of L by theta. Starting vectors are
deterministic so runs are reproducible.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from fraclap.sparse import spmv


class EigEstimate(NamedTuple):
    value: float
    iterations: int
    converged: bool


@dataclass
class SpectralExtent:
    lambda2_abs: float
    lambdaN_abs: float
    iterations_used: int
    converged: bool


def _start_vector(n):
    v = np.full(n, 1.0 / np.sqrt(n))
    v[0] += 1e-3
    return v / np.linalg.norm(v)


def estimate_lambda_max(sys, tol=1e-6, max_iter=5000):
    """|lambda_n| of L by power iteration.

    The magnitude is the geometric mean of two consecutive iterate-norm
    ratios, which stays stable when the dominant eigenvalues are a complex
    conjugate pair. Iteration stops when the magnitude estimate changes by
    less than tol relatively.
    """
    if sys.n < 2:
        raise ValueError("need n >= 2")
    bound = sys.gershgorin_bound()
    v = _start_vector(sys.n)
    prev_ratio = None
    estimate = None
    for it in range(1, max_iter + 1):
        w = spmv(sys.L, v)
        ratio = float(np.linalg.norm(w))
        if ratio == 0.0:
            return EigEstimate(0.0, it, True)
        v = w / ratio
        if prev_ratio is not None:
            new_estimate = float(np.sqrt(ratio * prev_ratio))
            if estimate is not None and abs(new_estimate - estimate) <= tol * new_estimate:
                return EigEstimate(min(new_estimate, bound), it, True)
            estimate = new_estimate
        prev_ratio = ratio
    return EigEstimate(min(estimate if estimate is not None else prev_ratio, bound), max_iter, False)


def estimate_lambda_2(sys, lambdaN, tol=1e-6, max_iter=5000):
    """|lambda_2| of L: smallest nonzero eigenvalue magnitude.

    Inverse power iteration on L^T + theta*z*1^T with theta = lambdaN, so
    the deflating shift sits away from the target cluster. Solves run
    through the cancellation-safe rank-one route at the tiny pole
    xi = -1e-8 * lambdaN, reusing one LU factorization of (L^T - xi I).
    """
    from fraclap.desingularize import shifted_solve_safe
    from fraclap.solver import ensure_nullvec

    if sys.n < 2:
        raise ValueError("need n >= 2")
    z = ensure_nullvec(sys)
    theta = float(lambdaN)
    eps_shift = 1e-8 * theta
    xi = -eps_shift
    fac = sys.shift_factors(xi)
    v = _start_vector(sys.n)
    prev_ratio = None
    estimate = None
    for it in range(1, max_iter + 1):
        w = shifted_solve_safe(sys, z, theta, xi, v, factors=fac)
        ratio = float(np.linalg.norm(w))
        v = w / ratio
        if prev_ratio is not None:
            shifted_mag = 1.0 / float(np.sqrt(ratio * prev_ratio))
            new_estimate = max(shifted_mag - eps_shift, np.finfo(float).tiny)
            if estimate is not None and abs(new_estimate - estimate) <= tol * new_estimate:
                return EigEstimate(new_estimate, it, True)
            estimate = new_estimate
        prev_ratio = ratio
    return EigEstimate(
        estimate if estimate is not None else 1.0 / prev_ratio, max_iter, False
    )


def estimate_extents(sys, tol=1e-6, max_iter=5000, force=False):
    """Estimate both extents, cache them on the system, and return them.

    User-provided sys.lambda2/sys.lambdaN values are kept unless
    force=True.
    """
    if not force and sys.lambda2 is not None and sys.lambdaN is not None:
        return SpectralExtent(sys.lambda2, sys.lambdaN, 0, True)
    emax = estimate_lambda_max(sys, tol=tol, max_iter=max_iter)
    if not force and sys.lambdaN is not None:
        emax = EigEstimate(sys.lambdaN, 0, True)
    e2 = estimate_lambda_2(sys, emax.value, tol=tol, max_iter=max_iter)
    if not force and sys.lambda2 is not None:
        e2 = EigEstimate(sys.lambda2, 0, True)
    lambda2 = min(e2.value, emax.value)
    sys.lambda2 = lambda2
    sys.lambdaN = emax.value
    return SpectralExtent(
        lambda2,
        emax.value,
        emax.iterations + e2.iterations,
        emax.converged and e2.converged,
    )
