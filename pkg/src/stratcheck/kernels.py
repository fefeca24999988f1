"""Array kernels for the hot verification loops.

Per-strategy objective evaluation reduces to two primitives over a CSR edge
list: masked/gated reachability and cycle detection inside an induced
subgraph. Both exist twice: a numba-compiled version and a vectorized
pure-numpy version. `STRATCHECK_KERNELS=numba|numpy` picks the path; the
default is numba when importable, else numpy. `benchmarks/bench_kernels.py`
times one against the other.
"""

import os

import numpy as np

try:
    from numba import njit
    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is an install-time choice
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        if args and callable(args[0]):
            return args[0]
        return wrap


def _resolve_backend():
    requested = os.environ.get("STRATCHECK_KERNELS", "").strip().lower()
    if requested not in ("numba", "numpy"):
        requested = "numba" if HAS_NUMBA else "numpy"
    if requested == "numba" and not HAS_NUMBA:
        requested = "numpy"
    return requested


_BACKEND = _resolve_backend()


def backend():
    """Name of the kernel path in use ("numba" or "numpy")."""
    return _BACKEND


def build_csr(n, src, dst):
    """Sort an edge list into CSR form: (indptr, ordered dst)."""
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    order = np.argsort(src, kind="stable")
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    return indptr, dst[order]


# ---------------------------------------------------------------------------
# numba path

@njit(cache=True)
def _gated_reach_nb(indptr, dst, start, visit, expand):
    n = indptr.shape[0] - 1
    visited = np.zeros(n, np.bool_)
    queue = np.empty(n, np.int64)
    qn = 0
    for u in range(n):
        if start[u] and visit[u]:
            visited[u] = True
            queue[qn] = u
            qn += 1
    qi = 0
    while qi < qn:
        u = queue[qi]
        qi += 1
        if not expand[u]:
            continue
        for e in range(indptr[u], indptr[u + 1]):
            v = dst[e]
            if visit[v] and not visited[v]:
                visited[v] = True
                queue[qn] = v
                qn += 1
    return visited


@njit(cache=True)
def _has_cycle_in_nb(indptr, dst, mask):
    n = indptr.shape[0] - 1
    indeg = np.zeros(n, np.int64)
    total = 0
    for u in range(n):
        if mask[u]:
            total += 1
            for e in range(indptr[u], indptr[u + 1]):
                v = dst[e]
                if mask[v]:
                    if v == u:
                        return True
                    indeg[v] += 1
    queue = np.empty(n, np.int64)
    qn = 0
    for u in range(n):
        if mask[u] and indeg[u] == 0:
            queue[qn] = u
            qn += 1
    qi = 0
    removed = 0
    while qi < qn:
        u = queue[qi]
        qi += 1
        removed += 1
        for e in range(indptr[u], indptr[u + 1]):
            v = dst[e]
            if mask[v] and v != u:
                indeg[v] -= 1
                if indeg[v] == 0:
                    queue[qn] = v
                    qn += 1
    return removed < total


# ---------------------------------------------------------------------------
# numpy path (level-synchronized frontier scatter / bincount peeling)

def _edge_srcs(indptr):
    n = indptr.shape[0] - 1
    return np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))

def _gated_reach_np(indptr, dst, start, visit, expand):
    n = indptr.shape[0] - 1
    src = _edge_srcs(indptr)
    visited = start & visit
    spent = np.zeros(n, dtype=bool)
    while True:
        frontier = visited & expand & ~spent
        if not frontier.any():
            return visited
        spent |= frontier
        hit = dst[frontier[src]]
        new = np.zeros(n, dtype=bool)
        new[hit] = True
        new &= visit & ~visited
        visited |= new


def _has_cycle_in_np(indptr, dst, mask):
    n = indptr.shape[0] - 1
    src = _edge_srcs(indptr)
    esel = mask[src] & mask[dst]
    if (esel & (src == dst)).any():
        return True
    indeg = np.bincount(dst[esel], minlength=n)
    alive = mask.copy()
    while True:
        zero = alive & (indeg == 0)
        if not zero.any():
            return alive.any()
        alive &= ~zero
        dead = esel & zero[src]
        esel &= ~dead
        indeg = indeg - np.bincount(dst[dead], minlength=n)


# ---------------------------------------------------------------------------
# dispatch

def gated_reach(indptr, dst, start, visit, expand):
    """States reachable from `start∩visit` along edges staying in `visit`,
    expanding only out of states in `expand`."""
    if _BACKEND == "numba":
        return _gated_reach_nb(indptr, dst, start, visit, expand)
    return _gated_reach_np(indptr, dst, start, visit, expand)


def reach(indptr, dst, start):
    ones = np.ones(indptr.shape[0] - 1, dtype=bool)
    return gated_reach(indptr, dst, start, ones, ones)


def has_cycle_in(indptr, dst, mask):
    """True when the subgraph induced by `mask` contains a cycle
    (self-loops count)."""
    if _BACKEND == "numba":
        return bool(_has_cycle_in_nb(indptr, dst, mask))
    return bool(_has_cycle_in_np(indptr, dst, mask))
