"""Shared test utilities."""

import numpy as np

from fraclap.graphs import random_strong_digraph
from fraclap.laplacian import build_laplacian


def oracle_friendly_digraph(n, extra, rng, cond_limit=1e6):
    """Random strongly connected digraph whose Laplacian has a
    well-conditioned eigenvector basis.

    The dense reference evaluates f through an eigendecomposition, whose
    accuracy degrades like eps * cond(V); screening keeps 1e-9..1e-10
    oracle tolerances meaningful. Methods under test do not need the
    screening, only the shared reference does.
    """
    while True:
        A = random_strong_digraph(n, extra, rng)
        sys = build_laplacian(A)
        _, V = np.linalg.eig(sys.L.to_dense())
        if np.linalg.cond(V) <= cond_limit:
            return A, sys
