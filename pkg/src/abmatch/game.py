"""Zero-sum game machinery for matching games.

The central object is a finite matrix game between a predictor (row
player, minimizing expected Hamming loss) and an adversary (column
player, maximizing loss plus a potential bonus).  Equilibria over the
full permutation space are found by double-oracle strategy generation:
repeatedly solve the restricted game over the strategies generated so
far, then let each player add its best response, computed as a
maximum-weight matching.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidInputError, NonConvergenceError, NumericFailureError
from .matching import Permutation, _as_weights, max_weight_matching


@dataclass(frozen=True)
class MixedStrategy:
    """A probability distribution over a finite set of permutations."""

    support: tuple
    probs: np.ndarray

    def __post_init__(self):
        support = tuple(p if isinstance(p, Permutation) else Permutation(tuple(p))
                        for p in self.support)
        probs = np.asarray(self.probs, dtype=float)
        if len(support) == 0:
            raise InvalidInputError("empty support")
        if probs.shape != (len(support),):
            raise InvalidInputError("probs length must match support length")
        if np.any(probs < -1e-12):
            raise InvalidInputError("negative probability")
        if abs(float(probs.sum()) - 1.0) > 1e-9:
            raise InvalidInputError(f"probabilities sum to {probs.sum()}, not 1")
        n = support[0].n
        if any(p.n != n for p in support):
            raise InvalidInputError("support permutations differ in size")
        if len({p.assignment for p in support}) != len(support):
            raise InvalidInputError("support entries must be distinct")
        probs = np.maximum(probs, 0.0)
        probs.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)

    @property
    def n(self):
        return self.support[0].n

    def support_array(self) -> np.ndarray:
        return np.array([p.assignment for p in self.support], dtype=np.intp)


@dataclass(frozen=True)
class Equilibrium:
    """Both players' mixed strategies with value and unary marginals."""

    predictor: MixedStrategy
    adversary: MixedStrategy
    value: float
    predictor_marginals: np.ndarray
    adversary_marginals: np.ndarray
    iterations: int
    support_size: int


@dataclass(frozen=True)
class GameConfig:
    eps_do: float = 1e-6
    eps_lp: float = 1e-9
    max_iters: Optional[int] = None
    warm_start: Optional[tuple] = None  # (predictor supports, adversary supports)

    def __post_init__(self):
        if not (self.eps_do > self.eps_lp > 0):
            raise InvalidInputError("need eps_do > eps_lp > 0")
        if self.max_iters is not None and self.max_iters < 1:
            raise InvalidInputError("max_iters must be >= 1")

    def iter_cap(self, n: int) -> int:
        return self.max_iters if self.max_iters is not None else max(10 * n * n, 20)


# ---------------------------------------------------------------------------
# restricted matrix games

def _simplex_max(A: np.ndarray, tol: float):
    """Maximize 1.x subject to A x <= 1, x >= 0 (A entrywise positive).

    Dense tableau simplex.  Returns (x, y, objective) where y is the dual
    vector (one entry per constraint).  Deterministic: Dantzig's rule with
    ties to the lowest index, Bland's rule after a pivot budget to rule
    out cycling.
    """
    k, m = A.shape
    # last row is the objective (reduced costs); last column the rhs
    T = np.zeros((k + 1, m + k + 1))
    T[:k, :m] = A
    T[:k, m:m + k] = np.eye(k)
    T[:k, -1] = 1.0
    T[k, :m] = -1.0
    basis = np.arange(m, m + k)

    bland_after = 200 + 20 * (m + k)
    max_pivots = 2000 + 200 * (m + k)
    pivots = 0
    obj = T[k]
    while True:
        if pivots < bland_after:
            enter = int(np.argmin(obj[:-1]))
            if obj[enter] >= -tol:
                break
        else:
            negative = np.flatnonzero(obj[:-1] < -tol)
            if negative.size == 0:
                break
            enter = int(negative[0])
        col = T[:k, enter]
        positive = col > tol
        if not positive.any():
            raise NumericFailureError("unbounded restricted game LP",
                                      residual=float(obj[enter]))
        ratios = np.full(k, np.inf)
        ratios[positive] = T[:k, -1][positive] / col[positive]
        leave = int(np.argmin(ratios))
        pivot_row = T[leave]
        pivot_row /= pivot_row[enter]
        factors = T[:, enter].copy()
        factors[leave] = 0.0
        T -= np.outer(factors, pivot_row)
        basis[leave] = enter
        pivots += 1
        if pivots > max_pivots:
            raise NumericFailureError("simplex pivot budget exhausted",
                                      residual=float(-obj[:-1].min()))

    x_full = np.zeros(m + k)
    x_full[basis] = T[:k, -1]
    return x_full[:m], obj[m:m + k].copy(), float(obj[-1])


def solve_matrix_game(payoffs) -> tuple:
    """Exact equilibrium of a finite zero-sum matrix game.

    The row player minimizes and the column player maximizes.  Returns
    (row_strategy, col_strategy, value); the value is unique even when
    the optimal strategies are not.
    """
    M = np.asarray(payoffs, dtype=float)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise InvalidInputError(f"payoff matrix must be 2-D and nonempty, got {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidInputError("payoffs must be finite")
    m, k = M.shape
    if m == 1 and k == 1:
        return np.array([1.0]), np.array([1.0]), float(M[0, 0])
    if m == 1:
        col = np.zeros(k)
        col[int(np.argmax(M[0]))] = 1.0
        return np.array([1.0]), col, float(M[0].max())
    if k == 1:
        row = np.zeros(m)
        row[int(np.argmin(M[:, 0]))] = 1.0
        return row, np.array([1.0]), float(M[:, 0].min())

    shift = 1.0 - float(M.min())
    A = M + shift  # entrywise >= 1
    scale = float(A.max())
    tol = 1e-12 * max(1.0, scale)
    # row player's LP: max 1.u  s.t.  A^T u <= 1;  duals give the column player
    u, y, total = _simplex_max(np.ascontiguousarray(A.T), tol)
    if total <= 0:
        raise NumericFailureError("degenerate game solve", residual=total)
    x = u / u.sum()
    ysum = y.sum()
    if ysum <= 0:
        raise NumericFailureError("degenerate dual solution", residual=ysum)
    z = y / ysum
    value = 1.0 / total - shift
    x = np.maximum(x, 0.0)
    x /= x.sum()
    z = np.maximum(z, 0.0)
    z /= z.sum()
    return x, z, value


# ---------------------------------------------------------------------------
# marginals

def _marginals_from_arrays(perms: np.ndarray, probs: np.ndarray, n: int) -> np.ndarray:
    M = np.zeros((n, n))
    rows = np.arange(n)
    for c in range(perms.shape[0]):
        if probs[c] != 0.0:
            M[rows, perms[c]] += probs[c]
    return M


def unary_marginals(s: MixedStrategy) -> np.ndarray:
    """M[i][j] = probability that node i is assigned partner j."""
    return _marginals_from_arrays(s.support_array(), s.probs, s.n)


def pairwise_marginals(s: MixedStrategy, i: int, j: int) -> np.ndarray:
    """Joint distribution Q[a][b] of the partners of nodes i and j.

    Bijectivity forces Q[a][a] = 0.  Row and column sums reproduce the
    unary marginals of i and j.
    """
    n = s.n
    if i == j:
        raise InvalidInputError("pairwise marginals need two distinct nodes")
    if not (0 <= i < n and 0 <= j < n):
        raise InvalidInputError(f"node index out of range for n={n}")
    Q = np.zeros((n, n))
    for perm, p in zip(s.support, s.probs):
        Q[perm[i], perm[j]] += p
    return Q


# ---------------------------------------------------------------------------
# best responses

def _check_doubly_stochastic(M: np.ndarray, what: str, tol: float = 1e-6):
    m = np.asarray(M, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInputError(f"{what} must be square")
    if (np.abs(m.sum(axis=0) - 1.0) > tol).any() or (np.abs(m.sum(axis=1) - 1.0) > tol).any():
        raise InvalidInputError(f"{what} is not doubly stochastic within {tol}")
    return m


def adversary_best_response(predictor_marginals, psi) -> Permutation:
    """Adversary's optimal pure strategy against predictor marginals.

    Maximizes expected Hamming loss plus potential, which decomposes per
    node, so a single maximum-weight matching suffices.
    """
    p_hat = _check_doubly_stochastic(predictor_marginals, "predictor marginals")
    w = _as_weights(psi)
    if w.shape != p_hat.shape:
        raise InvalidInputError("marginals and potentials disagree in size")
    return max_weight_matching((1.0 - p_hat) + w)


def predictor_best_response(adversary_marginals) -> Permutation:
    """Predictor's optimal pure strategy: minimize expected Hamming loss."""
    p_check = _check_doubly_stochastic(adversary_marginals, "adversary marginals")
    return max_weight_matching(p_check)


# ---------------------------------------------------------------------------
# double oracle

class _SupportSet:
    """Append-only set of permutations stored as an (s, n) int array."""

    def __init__(self, n: int):
        self.n = n
        self.perms = np.empty((0, n), dtype=np.intp)
        self._seen = set()

    def add(self, assignment: tuple) -> bool:
        if assignment in self._seen:
            return False
        self._seen.add(assignment)
        self.perms = np.vstack([self.perms, np.asarray(assignment, dtype=np.intp)])
        return True

    def __contains__(self, assignment: tuple):
        return assignment in self._seen

    def __len__(self):
        return self.perms.shape[0]


def _normalize_warm_start(entries, n: int):
    out = []
    seen = set()
    for p in entries:
        if isinstance(p, Permutation):
            a = p.assignment  # already validated
        else:
            a = tuple(int(v) for v in p)
            Permutation(a)  # validates bijectivity
        if len(a) != n:
            raise InvalidInputError("warm-start permutation has wrong size")
        if a not in seen:
            seen.add(a)
            out.append(a)
    if not out:
        raise InvalidInputError("warm start must contain at least one permutation")
    return out


def double_oracle_equilibrium(psi, cfg: GameConfig = GameConfig(),
                              trace: Optional[list] = None) -> Equilibrium:
    """Equilibrium of the matching game with payoff Hamming + potential.

    The predictor picks a distribution over permutations to minimize, the
    adversary one to maximize, E[Hamming(pred, adv)] + E[potential(adv)].
    Strategy sets start from the matching that maximizes the potential
    (or from cfg.warm_start) and grow by best responses until neither
    player can improve by more than cfg.eps_do.
    """
    w = _as_weights(psi)
    n = w.shape[0]
    if n == 1:
        pure = MixedStrategy((Permutation((0,)),), np.array([1.0]))
        ones = np.array([[1.0]])
        return Equilibrium(pure, pure, float(w[0, 0]), ones, ones.copy(), 0, 1)

    rows = np.arange(n)
    if cfg.warm_start is not None:
        pred_init, adv_init = cfg.warm_start
        pred_starts = _normalize_warm_start(pred_init, n)
        adv_starts = _normalize_warm_start(adv_init, n)
    else:
        seed = max_weight_matching(w).assignment
        pred_starts = [seed]
        adv_starts = [seed]

    pred = _SupportSet(n)
    adv = _SupportSet(n)
    for a in pred_starts:
        pred.add(a)
    for a in adv_starts:
        adv.add(a)

    adv_pots = w[rows, adv.perms].sum(axis=1)  # potential of each adversary column
    # payoff[r][c] = hamming(pred_r, adv_c) + pot(adv_c)
    payoff = (pred.perms[:, None, :] != adv.perms[None, :, :]).sum(axis=2) + adv_pots[None, :]
    payoff = payoff.astype(float)

    cap = cfg.iter_cap(n)
    last_gap = np.inf
    for iteration in range(1, cap + 1):
        x, z, value = solve_matrix_game(payoff)
        p_hat = _marginals_from_arrays(pred.perms, x, n)
        p_check = _marginals_from_arrays(adv.perms, z, n)

        adv_weights = (1.0 - p_hat) + w
        adv_br = max_weight_matching(adv_weights).assignment
        adv_br_arr = np.asarray(adv_br, dtype=np.intp)
        adv_br_value = float(adv_weights[rows, adv_br_arr].sum())

        pred_br = max_weight_matching(p_check).assignment
        pred_br_arr = np.asarray(pred_br, dtype=np.intp)
        expected_pot = float(z @ adv_pots)
        pred_br_value = float((1.0 - p_check[rows, pred_br_arr]).sum()) + expected_pot

        gap_adv = adv_br_value - value
        gap_pred = value - pred_br_value
        last_gap = max(gap_adv, gap_pred, 0.0)
        if trace is not None:
            trace.append({"value": value,
                          "added_adv": gap_adv > cfg.eps_do,
                          "added_pred": gap_pred > cfg.eps_do})

        grew = False
        if gap_adv > cfg.eps_do:
            if adv_br in adv:
                raise NumericFailureError(
                    "adversary best response already in support but improves",
                    residual=gap_adv)
            adv.add(adv_br)
            new_pot = float(w[rows, adv_br_arr].sum())
            adv_pots = np.append(adv_pots, new_pot)
            new_col = (pred.perms != adv_br_arr[None, :]).sum(axis=1) + new_pot
            payoff = np.hstack([payoff, new_col[:, None].astype(float)])
            grew = True
        if gap_pred > cfg.eps_do:
            if pred_br in pred:
                raise NumericFailureError(
                    "predictor best response already in support but improves",
                    residual=gap_pred)
            pred.add(pred_br)
            new_row = (adv.perms != pred_br_arr[None, :]).sum(axis=1) + adv_pots
            payoff = np.vstack([payoff, new_row[None, :].astype(float)])
            grew = True

        if not grew:
            pred_strategy = MixedStrategy(
                tuple(Permutation(tuple(int(v) for v in p)) for p in pred.perms), x)
            adv_strategy = MixedStrategy(
                tuple(Permutation(tuple(int(v) for v in p)) for p in adv.perms), z)
            return Equilibrium(pred_strategy, adv_strategy, value,
                               p_hat, p_check, iteration, len(adv))

    raise NonConvergenceError(
        f"double oracle did not converge in {cap} iterations", gap=last_gap)
