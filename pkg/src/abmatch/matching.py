"""Perfect bipartite matching primitives.

A matching over two size-n node sets is stored as a permutation: entry i
is the right-side partner of left node i.  The solver maximizes total
edge weight; among equally good matchings it returns the lexicographically
smallest assignment sequence, so identical inputs always give identical
outputs across runs and implementations.
"""

from dataclasses import dataclass
from itertools import permutations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import InvalidInputError, SizeLimitError

_BRUTE_FORCE_MAX_N = 9
_TIE_RTOL = 1e-9


@dataclass(frozen=True)
class Permutation:
    """A perfect matching: ``assignment[i]`` is the partner of left node i."""

    assignment: tuple

    def __post_init__(self):
        a = tuple(int(v) for v in self.assignment)
        object.__setattr__(self, "assignment", a)
        n = len(a)
        if n < 1:
            raise InvalidInputError("permutation must have length >= 1")
        if sorted(a) != list(range(n)):
            raise InvalidInputError(f"not a bijection on 0..{n - 1}: {a}")

    def __len__(self):
        return len(self.assignment)

    def __getitem__(self, i):
        return self.assignment[i]

    def __iter__(self):
        return iter(self.assignment)

    @property
    def n(self):
        return len(self.assignment)

    def to_array(self):
        return np.asarray(self.assignment, dtype=np.intp)

    @staticmethod
    def identity(n: int) -> "Permutation":
        return Permutation(tuple(range(n)))


@dataclass(frozen=True)
class WeightMatrix:
    """Square matrix of finite real edge weights."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < 1:
            raise InvalidInputError(f"weights must be square, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise InvalidInputError("weights must be finite")
        w = np.ascontiguousarray(w)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self):
        return self.weights.shape[0]


def _as_weights(w) -> np.ndarray:
    if isinstance(w, WeightMatrix):
        return w.weights
    arr = np.asarray(w, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise InvalidInputError(f"weight matrix must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("weight matrix entries must be finite")
    return arr


def matching_weight(w, perm) -> float:
    """Total weight of a matching: sum of w[i][perm[i]] in row order."""
    arr = _as_weights(w)
    idx = perm.to_array() if isinstance(perm, Permutation) else np.asarray(perm, dtype=np.intp)
    if idx.shape[0] != arr.shape[0]:
        raise InvalidInputError("permutation length does not match matrix size")
    total = 0.0
    for i in range(arr.shape[0]):
        total += arr[i, idx[i]]
    return total


def _column_duals(w: np.ndarray, col: np.ndarray) -> np.ndarray:
    """Feasible duals v for an optimal assignment ``col``.

    Solves the difference constraints v[j] >= v[col[i]] + w[i,j] - w[i,col[i]]
    by longest-path relaxation; converges because ``col`` is optimal (no
    positive cycles exist).
    """
    n = w.shape[0]
    c = w - w[np.arange(n), col][:, None]
    v = np.zeros(n)
    for _ in range(n):
        cand = (v[col][:, None] + c).max(axis=0)
        new_v = np.maximum(v, cand)
        if np.array_equal(new_v, v):
            break
        v = new_v
    return v


def _lex_min_tight_matching(tight: np.ndarray, init_col: np.ndarray) -> list:
    """Lexicographically smallest perfect matching of the tight-edge graph.

    ``init_col`` must be a perfect matching within ``tight``.  Rows are
    fixed in order to their smallest feasible column; feasibility of a
    candidate is checked by rerouting the column's current owner along a
    single augmenting path, so the fast case costs one adjacency scan.
    """
    n = len(init_col)
    adj = [[int(j) for j in np.flatnonzero(tight[i])] for i in range(n)]
    match_row = [int(j) for j in init_col]
    col_owner = [-1] * n
    for i, j in enumerate(match_row):
        col_owner[j] = i
    fixed = [False] * n

    def augment(r, seen):
        for j2 in adj[r]:
            if fixed[j2] or seen[j2]:
                continue
            seen[j2] = True
            owner = col_owner[j2]
            if owner == -1 or augment(owner, seen):
                col_owner[j2] = r
                match_row[r] = j2
                return True
        return False

    for i in range(n):
        cur = match_row[i]
        for j in adj[i]:
            if fixed[j]:
                continue
            if j == cur:
                break
            # tentatively give j to row i, freeing i's old column for rerouting
            r = col_owner[j]
            col_owner[cur] = -1
            col_owner[j] = i
            seen = [False] * n
            seen[j] = True
            if augment(r, seen):
                match_row[i] = j
                break
            col_owner[j] = r
            col_owner[cur] = i
        fixed[match_row[i]] = True
    return match_row


def max_weight_matching(w) -> Permutation:
    """Maximum-weight perfect matching (Hungarian core, O(n^3)).

    Ties are broken toward the lexicographically smallest assignment
    sequence: optimal dual potentials identify the edges that participate
    in some optimal matching, and the smallest matching inside that tight
    subgraph is selected.
    """
    arr = _as_weights(w)
    n = arr.shape[0]
    if n == 1:
        return Permutation((0,))
    if arr.min() == arr.max():
        # constant matrix: every matching ties; identity is lex-smallest
        return Permutation.identity(n)
    _, col = linear_sum_assignment(arr, maximize=True)
    col = col.astype(np.intp)
    v = _column_duals(arr, col)
    u = arr[np.arange(n), col] - v[col]
    scale = max(1.0, float(np.abs(arr).max()))
    tight = arr >= (u[:, None] + v[None, :]) - _TIE_RTOL * scale
    if int(tight.sum()) == n:
        return Permutation(tuple(int(j) for j in col))
    return Permutation(tuple(_lex_min_tight_matching(tight, col)))


def brute_force_matching(w) -> Permutation:
    """Exact argmax by enumeration; the testing oracle for the solver above."""
    arr = _as_weights(w)
    n = arr.shape[0]
    if n > _BRUTE_FORCE_MAX_N:
        raise SizeLimitError(f"brute force limited to n <= {_BRUTE_FORCE_MAX_N}, got {n}")
    best_perm = None
    best_total = -np.inf
    rows = range(n)
    for cand in permutations(range(n)):
        total = 0.0
        for i in rows:
            total += arr[i, cand[i]]
        # strict > keeps the first (lexicographically smallest) optimum
        if total > best_total:
            best_total = total
            best_perm = cand
    return Permutation(best_perm)


def hamming_distance(a, b) -> int:
    """Number of left nodes whose partners differ between two matchings."""
    aa = a.to_array() if isinstance(a, Permutation) else np.asarray(a, dtype=np.intp)
    bb = b.to_array() if isinstance(b, Permutation) else np.asarray(b, dtype=np.intp)
    if aa.shape != bb.shape:
        raise InvalidInputError(f"length mismatch: {aa.shape[0]} vs {bb.shape[0]}")
    return int(np.count_nonzero(aa != bb))
