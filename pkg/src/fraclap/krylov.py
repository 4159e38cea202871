"""Rational Arnoldi iteration and the f(A)b approximation loop.

A LinearOperator packages a matvec with a shifted solve; the engine builds
an orthonormal basis V_k of the rational Krylov subspace determined by a
pole sequence, maintains the projection B_k = V_k^T A V_k, and evaluates
iterates y_k = ||b|| * V_k g(B_k) e_1.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from fraclap.matfun import dense_frac_exp
from fraclap.sparse import spmv
from fraclap.solver import solve

BREAKDOWN_RTOL = 1e-14

POLE_KINDS = ("poly", "si-geomean", "si-time", "eds")
_POLE_ALIASES = {
    "polynomial": "poly",
    "si_geomean": "si-geomean",
    "si_time": "si-time",
}


class LinearOperator:
    """Pairing of v -> A v and (xi, w) -> (A - xi I)^{-1} w."""

    def __init__(self, dimension, apply, shifted_solve):
        self.dimension = dimension
        self.apply = apply
        self.shifted_solve = shifted_solve


def laplacian_operator(sys, ordering="rcm"):
    """The plain operator A = L^T with cached shifted factorizations."""

    def apply(v):
        return spmv(sys.Lt, v)

    def shifted_solve(xi, w):
        return solve(sys.shift_factors(xi, ordering=ordering), w)

    return LinearOperator(sys.n, apply, shifted_solve)


@dataclass
class PoleSequence:
    """Lazily evaluated pole sequence; pole(j) is the pole of step j >= 1.

    kinds: "poly" (all poles infinite), "si-geomean" (constant
    -sqrt(lambda2*lambdaN)), "si-time" (constant -t^(-2/alpha)), "eds"
    (log-uniform equidistributed sequence on the negative spectral
    interval [-1.01*lambdaN, -0.99*lambda2]).
    """

    kind: str
    lambda2: float = None
    lambdaN: float = None
    t: float = None
    alpha: float = None
    seed_index: int = 0

    def pole(self, j):
        if self.kind == "poly":
            return math.inf
        if self.kind == "si-geomean":
            return -math.sqrt(self.lambda2 * self.lambdaN)
        if self.kind == "si-time":
            return -self.t ** (-2.0 / self.alpha)
        a = 0.99 * self.lambda2
        b = 1.01 * self.lambdaN
        s = math.fmod((j + self.seed_index) * (math.sqrt(2.0) - 1.0), 1.0)
        return -math.exp(math.log(a) + s * math.log(b / a))


def pole_sequence(kind, extents=None, params=None, eds_seed=0):
    """Validated PoleSequence for the given kind.

    extents: object with lambda2_abs/lambdaN_abs (required for si-geomean
    and eds). params: FracExpParams (required for si-time; t = 0 is
    rejected since the pole -t^(-2/alpha) blows up; use another kind).
    """
    kind = _POLE_ALIASES.get(kind, kind)
    if kind not in POLE_KINDS:
        raise ValueError(f"unknown pole kind {kind!r}; expected one of {POLE_KINDS}")
    lam2 = lamN = t = alpha = None
    if kind in ("si-geomean", "eds"):
        if extents is None:
            raise ValueError(f"pole kind {kind!r} needs spectral extents")
        lam2 = float(extents.lambda2_abs)
        lamN = float(extents.lambdaN_abs)
        if not (0 < lam2 <= lamN):
            raise ValueError(f"invalid extents: lambda2={lam2}, lambdaN={lamN}")
    if kind == "si-time":
        if params is None:
            raise ValueError("pole kind 'si-time' needs time/alpha parameters")
        if params.t == 0.0:
            raise ValueError("pole -t^(-2/alpha) undefined at t = 0; use another pole kind")
        t, alpha = params.t, params.alpha
    return PoleSequence(kind, lam2, lamN, t, alpha, int(eds_seed))


@dataclass
class StoppingRule:
    """Stop at max_k, or earlier when ||y_k - y_{k-1}|| <= tol * ||y_k||."""

    max_k: int = 60
    tol: float = None


@dataclass
class KrylovState:
    """Basis, projection and bookkeeping of a running rational Arnoldi."""

    V: np.ndarray  # n x max_k, columns 0..k-1 valid
    AV: np.ndarray  # A @ V, same layout
    B: np.ndarray  # max_k x max_k projection, leading k x k valid
    H: np.ndarray  # orthogonalization coefficients, (max_k+1) x max_k
    k: int
    breakdown: bool = False
    poles_used: list = field(default_factory=list)

    def basis(self):
        return self.V[:, : self.k]

    def projection(self):
        return self.B[: self.k, : self.k]


def start_state(op, b, max_k):
    b = np.asarray(b, dtype=float)
    nrm = np.linalg.norm(b)
    if nrm == 0.0:
        raise ValueError("starting vector must be nonzero")
    n = op.dimension
    max_k = min(max_k, n)
    V = np.zeros((n, max_k))
    AV = np.zeros((n, max_k))
    B = np.zeros((max_k, max_k))
    H = np.zeros((max_k + 1, max_k))
    V[:, 0] = b / nrm
    AV[:, 0] = op.apply(V[:, 0])
    B[0, 0] = V[:, 0] @ AV[:, 0]
    return KrylovState(V, AV, B, H, 1)


def rational_arnoldi_step(state, op, pole):
    """Extend the basis by one vector using the given pole.

    The continuation vector is the last basis vector v_k. For a finite
    pole, w = (I - A/xi)^{-1} A v_k = -xi (A - xi I)^{-1} A v_k; for an
    infinite pole, w = A v_k. Modified Gram-Schmidt plus one full
    reorthogonalization pass keeps ||V^T V - I|| at roundoff level. A
    negligible remainder flags breakdown: the subspace is invariant and
    the current approximation is exact.
    """
    if state.breakdown:
        raise RuntimeError("cannot extend past breakdown")
    k = state.k
    if k >= state.V.shape[1]:
        raise RuntimeError("state is at capacity")
    u = state.AV[:, k - 1]
    if math.isinf(pole):
        w = u.copy()
    else:
        w = -pole * op.shifted_solve(pole, u)
    norm0 = np.linalg.norm(w)

    Vk = state.V[:, :k]
    h = Vk.T @ w
    w -= Vk @ h
    h2 = Vk.T @ w  # full reorthogonalization pass
    w -= Vk @ h2
    h += h2
    hk1 = np.linalg.norm(w)
    state.H[:k, k - 1] = h
    state.H[k, k - 1] = hk1
    state.poles_used.append(pole)
    if hk1 <= BREAKDOWN_RTOL * norm0:
        state.breakdown = True
        return state

    vnew = w / hk1
    avnew = op.apply(vnew)
    state.V[:, k] = vnew
    state.AV[:, k] = avnew
    state.B[:k, k] = Vk.T @ avnew
    state.B[k, :k] = vnew @ state.AV[:, :k]
    state.B[k, k] = vnew @ avnew
    state.k = k + 1
    return state


@dataclass
class KrylovResult:
    """Iterates y_1..y_k of the f(A)b loop with timing and breakdown info."""

    y: np.ndarray
    iterates: list
    seconds: list
    breakdown: bool
    k: int


def krylov_fAb(op, b, p, poles, stop):
    """Approximate g(A) b, g(z) = exp(-t z^alpha), by rational Arnoldi.

    Returns a KrylovResult whose iterates list holds y_k for every k
    reached; y_k = ||b|| V_k g(B_k) e_1 which equals V_k g(B_k) V_k^T b.
    seconds[k-1] is the cumulative wall time after iterate k.
    """
    b = np.asarray(b, dtype=float)
    bnorm = np.linalg.norm(b)
    max_k = min(stop.max_k, op.dimension)
    t0 = time.perf_counter()
    state = start_state(op, b, max_k)
    iterates = []
    seconds = []

    def current_iterate():
        # negative real Ritz values can occur mid-run on the singular
        # operator; continue through the cut and keep the real part so the
        # iterate history stays defined at every k
        Fk = dense_frac_exp(state.projection(), p, on_cut="continue")
        col = Fk[:, 0]
        if np.iscomplexobj(col):
            col = col.real
        return bnorm * (state.basis() @ col)

    y = current_iterate()
    iterates.append(y)
    seconds.append(time.perf_counter() - t0)
    while state.k < max_k and not state.breakdown:
        rational_arnoldi_step(state, op, poles.pole(state.k))
        if state.breakdown:
            break
        y_new = current_iterate()
        iterates.append(y_new)
        seconds.append(time.perf_counter() - t0)
        diff = np.linalg.norm(y_new - y)
        y = y_new
        if stop.tol is not None and diff <= stop.tol * max(np.linalg.norm(y_new), 1e-300):
            break
    return KrylovResult(y, iterates, seconds, state.breakdown, state.k)
