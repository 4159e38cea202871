"""Out-degree graph Laplacian construction and largest strongly connected
component extraction."""

import numpy as np

from fraclap.errors import GraphStructureError
from fraclap.sparse import from_coo, spmv, transpose


class LaplacianSystem:
    """A graph Laplacian L = diag(d) - A together with cached companions.

    Fields filled lazily: z (left null vector, normalized to sum 1) and the
    spectral extents lambda2/lambdaN. Shifted LU factorizations of L^T are
    cached per (pole, ordering) so repeated solves reuse one factorization.
    """

    def __init__(self, L, Lt, d):
        self.L = L
        self.Lt = Lt
        self.d = d
        self.n = L.n_rows
        self.z = None
        self.lambda2 = None
        self.lambdaN = None
        self._factor_cache = {}

    def shift_factors(self, xi, ordering="rcm"):
        """LU factors of (L^T - xi I), cached per pole and ordering."""
        key = (float(xi), ordering)
        fac = self._factor_cache.get(key)
        if fac is None:
            from fraclap.solver import lu_factorize

            fac = lu_factorize(self.Lt, xi, ordering=ordering)
            self._factor_cache[key] = fac
        return fac

    def gershgorin_bound(self):
        """Upper bound on eigenvalue magnitudes: 2 * max out-degree."""
        return 2.0 * float(np.max(self.d)) if self.n else 0.0


def build_laplacian(adj):
    """LaplacianSystem from a square, nonnegative, zero-diagonal adjacency."""
    if adj.n_rows != adj.n_cols:
        raise GraphStructureError(f"adjacency must be square, got {adj.shape}")
    if adj.nnz and np.min(adj.values) < 0:
        raise GraphStructureError("negative edge weight")
    rows = np.repeat(np.arange(adj.n_rows), np.diff(adj.row_ptr))
    if np.any(rows == adj.col_idx):
        raise GraphStructureError("self-loop present; remove loops first")
    n = adj.n_rows
    d = spmv(adj, np.ones(n))
    lrows = np.concatenate([np.arange(n), rows])
    lcols = np.concatenate([np.arange(n), adj.col_idx])
    lvals = np.concatenate([d, -adj.values])
    L = from_coo(n, n, lrows, lcols, lvals, drop_zeros=False)
    return LaplacianSystem(L, transpose(L), d)


def largest_scc(adj):
    """Largest strongly connected component of an adjacency matrix.

    Returns (nodes, sub_adjacency): original vertex indices in ascending
    order and the induced subgraph relabeled accordingly. Ties on component
    size break toward the component containing the smallest original index.
    Iterative Tarjan, O(n + nnz).
    """
    if adj.n_rows != adj.n_cols:
        raise GraphStructureError(f"adjacency must be square, got {adj.shape}")
    n = adj.n_rows
    indptr, indices = adj.row_ptr, adj.col_idx

    index = np.full(n, -1, dtype=np.int64)
    lowlink = np.zeros(n, dtype=np.int64)
    on_stack = np.zeros(n, dtype=bool)
    stack = []
    next_index = 0
    best = []

    for root in range(n):
        if index[root] != -1:
            continue
        # work stack entries: (node, next edge position to scan)
        work = [(root, indptr[root])]
        index[root] = lowlink[root] = next_index
        next_index += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, p = work[-1]
            if p < indptr[v + 1]:
                work[-1] = (v, p + 1)
                w = indices[p]
                if index[w] == -1:
                    index[w] = lowlink[w] = next_index
                    next_index += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, indptr[w]))
                elif on_stack[w]:
                    if index[w] < lowlink[v]:
                        lowlink[v] = index[w]
            else:
                work.pop()
                if lowlink[v] == index[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on_stack[w] = False
                        comp.append(w)
                        if w == v:
                            break
                    if len(comp) > len(best) or (
                        len(comp) == len(best) and best and min(comp) < min(best)
                    ):
                        best = comp
                if work:
                    u = work[-1][0]
                    if lowlink[v] < lowlink[u]:
                        lowlink[u] = lowlink[v]

    nodes = sorted(best)
    relabel = {orig: new for new, orig in enumerate(nodes)}
    member = np.zeros(n, dtype=bool)
    member[nodes] = True
    rows, cols, vals = [], [], []
    for orig in nodes:
        s, e = indptr[orig], indptr[orig + 1]
        for p in range(s, e):
            j = indices[p]
            if member[j]:
                rows.append(relabel[orig])
                cols.append(relabel[j])
                vals.append(adj.values[p])
    sub = from_coo(len(nodes), len(nodes), rows, cols, vals)
    return nodes, sub
