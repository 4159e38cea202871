"""Dense evaluation of g(B) for g(z) = exp(-t z^alpha) on small matrices.

Used both on Krylov-projected matrices and as the brute-force reference on
whole small graphs. Evaluation goes through a complex eigendecomposition;
if the eigenvector basis is ill-conditioned (clustered or defective
eigenvalues) the matrix is retried with a tiny deterministic diagonal
spread that splits the cluster while keeping both the perturbation error
and the roundoff amplification near sqrt(machine epsilon).

Eigenvalues on the open negative real axis are a branch-cut error by
default. The iteration engine passes on_cut="continue" for intermediate
iterates: projections of the singular Laplacian can produce genuinely
negative real Ritz values mid-run, and the evaluation then continues with
the limit from above (log|z| + i*pi), yielding a complex matrix.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from fraclap.errors import BranchCutError, IllConditionedError

_EIG_COND_LIMIT = 1e12
_ZERO_SNAP_ABS = 1e-14
_IMAG_DISCARD_RTOL = 1e-12


@dataclass(frozen=True)
class FracExpParams:
    """Time t >= 0 and fractional exponent alpha in (0, 1]."""

    t: float
    alpha: float

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        if not (self.t >= 0.0):
            raise ValueError(f"t must be nonnegative, got {self.t}")


def _pow_continued(z, alpha):
    """Principal z^alpha, continued from above onto the negative real axis."""
    if z == 0:
        return 0.0 + 0.0j
    if alpha == 1.0:
        return complex(z)
    if z.imag == 0.0:
        z = complex(z.real, 0.0)  # normalize -0.0 so the cut side is 'from above'
    return np.exp(alpha * np.log(z))


def frac_pow_scalar(z, alpha):
    """Principal-branch z^alpha with 0^alpha = 0; cut on (-inf, 0)."""
    z = complex(z)
    if z.real < 0.0 and z.imag == 0.0:
        raise BranchCutError(f"z = {z} lies on the negative real axis")
    return _pow_continued(z, alpha)


def frac_exp_scalar(z, p):
    """exp(-t z^alpha) on the principal branch; exp(0) = 1 exactly at z = 0."""
    z = complex(z)
    if z == 0:
        return 1.0 + 0.0j
    return np.exp(-p.t * frac_pow_scalar(z, p.alpha))


def frac_exp_derivative_scalar(z, p):
    """g'(z) = -t*alpha*z^(alpha-1)*g(z) for z off the closed negative axis."""
    z = complex(z)
    if (z.real < 0.0 and z.imag == 0.0) or z == 0:
        raise BranchCutError(f"derivative undefined at z = {z}")
    return -p.t * p.alpha * _pow_continued(z, p.alpha - 1.0) * frac_exp_scalar(z, p)


def _eval_on_spectrum(w, f, scale, on_cut, extra_snap=0.0):
    # eigenvalues of a singular operator come back as O(eps * ||B||), so the
    # zero snap must track the matrix norm; perturbed retries widen it to
    # cover wherever the perturbation pushed an exact-zero eigenvalue
    snap = max(_ZERO_SNAP_ABS, 1e-13 * scale, extra_snap)
    fw = np.empty(len(w), dtype=complex)
    hit_cut = False
    for i, lam in enumerate(w):
        if abs(lam) <= snap:
            lam = 0.0
        elif lam.imag == 0.0 and lam.real < 0.0:
            if on_cut == "raise":
                raise BranchCutError(f"eigenvalue {lam} on the negative real axis")
            hit_cut = True
        fw[i] = f(lam)
    return fw, hit_cut


def _funm_eig(B, f, on_cut):
    """f(B) by diagonalization with conditioning safeguards."""
    B = np.asarray(B)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValueError(f"matrix must be square, got {B.shape}")
    n = B.shape[0]
    if n == 0:
        return np.zeros((0, 0))
    scale = np.linalg.norm(B, np.inf) or 1.0
    delta0 = np.sqrt(np.finfo(float).eps) * scale
    # centered spread keeps the mean eigenvalue perturbation at zero
    spread = (2.0 * np.arange(n) - (n - 1)) / max(n - 1, 1)

    is_real_input = not np.iscomplexobj(B)
    last_error = None
    for attempt in range(4):
        delta = 0.0 if attempt == 0 else delta0 * 4 ** (attempt - 1)
        Bp = B if attempt == 0 else B + np.diag(delta * spread)
        w, V = np.linalg.eig(Bp)
        cond = np.linalg.cond(V)
        if not np.isfinite(cond) or cond > _EIG_COND_LIMIT:
            last_error = f"eigenvector condition {cond:.2e}"
            continue
        fw, hit_cut = _eval_on_spectrum(w, f, scale, on_cut, extra_snap=3.0 * delta)
        F = np.linalg.solve(V.T, (V * fw).T).T
        if is_real_input and not hit_cut:
            fmax = np.max(np.abs(F)) or 1.0
            if np.max(np.abs(F.imag)) > _IMAG_DISCARD_RTOL * fmax:
                last_error = "non-negligible imaginary part in real-input result"
                continue
            F = F.real
        if attempt > 0:
            warnings.warn(
                f"matrix function evaluated after diagonal perturbation (attempt {attempt})",
                stacklevel=3,
            )
        return F
    raise IllConditionedError(f"matrix function evaluation failed: {last_error}")


def dense_frac_exp(B, p, on_cut="raise"):
    """g(B) for g(z) = exp(-t z^alpha); real input yields real output.

    on_cut="continue" evaluates negative real eigenvalues with the limit
    from above instead of raising, returning a complex matrix.
    """

    def f(z):
        return 1.0 + 0.0j if z == 0 else np.exp(-p.t * _pow_continued(z, p.alpha))

    return _funm_eig(B, f, on_cut)


def dense_frac_pow(B, alpha):
    """B^alpha on the principal branch (0^alpha = 0); for identity checks."""
    return _funm_eig(B, lambda z: _pow_continued(z, alpha), "raise")


def dense_reference(sys, u0, p, dense_limit=1500):
    """u(t) = g(L^T) u0 by densifying L^T; reference for small systems."""
    if sys.n > dense_limit:
        raise ValueError(f"n = {sys.n} exceeds dense limit {dense_limit}")
    F = dense_frac_exp(sys.Lt.to_dense(), p)
    return F @ np.asarray(u0, dtype=float)
