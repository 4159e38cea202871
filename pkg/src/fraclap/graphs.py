"""Small graph constructors used by experiments, benchmarks and tests."""

import numpy as np

from fraclap.sparse import from_coo


def path_graph(n):
    """Undirected path 0-1-...-(n-1) as a symmetric adjacency matrix."""
    heads = np.arange(n - 1)
    tails = heads + 1
    rows = np.concatenate([heads, tails])
    cols = np.concatenate([tails, heads])
    return from_coo(n, n, rows, cols, np.ones(len(rows)))


def cycle_digraph(n):
    """Directed cycle 0 -> 1 -> ... -> (n-1) -> 0."""
    rows = np.arange(n)
    cols = (rows + 1) % n
    return from_coo(n, n, rows, cols, np.ones(n))


def from_edges(n, edges):
    """Adjacency matrix from an iterable of (tail, head) pairs."""
    edges = list(edges)
    rows = [e[0] for e in edges]
    cols = [e[1] for e in edges]
    return from_coo(n, n, rows, cols, np.ones(len(edges)))


def random_strong_digraph(n, extra_edges, rng):
    """Random digraph guaranteed strongly connected.

    A random Hamiltonian cycle is laid down first, then ``extra_edges``
    random non-loop edges are sprinkled on top (duplicates merge to
    weight 1).
    """
    perm = rng.permutation(n)
    rows = list(perm)
    cols = list(np.roll(perm, -1))
    for _ in range(extra_edges):
        i = int(rng.integers(n))
        j = int(rng.integers(n))
        if i != j:
            rows.append(i)
            cols.append(j)
    A = from_coo(n, n, rows, cols, np.ones(len(rows)))
    # merge duplicate edges back to weight 1
    return from_coo(n, n, *_coo_of(A), drop_zeros=True)


def random_undirected_graph(n, extra_edges, rng):
    """Random connected undirected graph (random spanning path + extras)."""
    perm = rng.permutation(n)
    rows = list(perm[:-1])
    cols = list(perm[1:])
    for _ in range(extra_edges):
        i = int(rng.integers(n))
        j = int(rng.integers(n))
        if i != j:
            rows.append(i)
            cols.append(j)
    rows, cols = rows + cols, cols + rows
    A = from_coo(n, n, rows, cols, np.ones(len(rows)))
    return from_coo(n, n, *_coo_of(A), drop_zeros=True)


def _coo_of(A):
    rows = np.repeat(np.arange(A.n_rows), np.diff(A.row_ptr))
    return rows, A.col_idx, np.ones(A.nnz)
