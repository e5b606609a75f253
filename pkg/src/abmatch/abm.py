"""Adversarial bipartite matching model.

Training pits a predictor against an adversary in a per-example zero-sum
game over permutations: the adversary maximizes expected Hamming loss
plus a feature-potential bonus, the predictor minimizes it.  The weight
vector follows stochastic subgradients of the game value; the adversary's
equilibrium mixture also powers all uncertainty quantities used for
active solicitation.
"""

import json
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import AbmatchError, InvalidInputError
from .game import (
    Equilibrium,
    GameConfig,
    double_oracle_equilibrium,
    pairwise_marginals,
    predictor_best_response,
)
from .matching import WeightMatrix
from .rng import substream

FORMAT_VERSION = 1
LOG2 = np.log(2.0)


@dataclass(frozen=True)
class ModelParams:
    """Learned weight vector plus a training-configuration echo."""

    theta: np.ndarray
    reg_lambda: float = 0.0
    trained_rounds: int = 0
    kind: str = "abm"

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        if theta.ndim != 1 or not np.all(np.isfinite(theta)):
            raise InvalidInputError("theta must be a finite 1-D vector")
        if self.reg_lambda < 0:
            raise InvalidInputError("reg_lambda must be nonnegative")
        theta = theta.copy()
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)

    @property
    def d(self):
        return self.theta.shape[0]


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    learning_rate: float = 0.5
    lr_decay_steps: float = 100.0
    reg_lambda: float = 0.0
    reg_squared: bool = True
    seed: int = 0
    game_cfg: GameConfig = field(default_factory=GameConfig)
    cache_equilibria: bool = True
    step_offset: int = 0  # continue a decay schedule from a previous call

    def __post_init__(self):
        if self.epochs < 1:
            raise InvalidInputError("epochs must be >= 1")
        if self.learning_rate <= 0:
            raise InvalidInputError("learning_rate must be positive")
        if self.lr_decay_steps <= 0:
            raise InvalidInputError("lr_decay_steps must be positive")
        if self.reg_lambda < 0:
            raise InvalidInputError("reg_lambda must be nonnegative")


class TrainTelemetry:
    """Optional collector for per-epoch training diagnostics."""

    def __init__(self):
        self.oracle_iterations = []  # total double-oracle iterations per epoch
        self.objective = []          # mean regularized per-example objective per epoch

    def record_epoch(self, iterations: int, objective: float):
        self.oracle_iterations.append(iterations)
        self.objective.append(objective)


def _check_instance_dim(x, d: int):
    if x.features.shape[2] != d:
        raise InvalidInputError(
            f"instance {x.id!r} has feature dimension {x.features.shape[2]}, model has {d}")


def potentials(m: ModelParams, x) -> WeightMatrix:
    """Edge potentials: inner product of theta with each edge's features."""
    _check_instance_dim(x, m.d)
    return WeightMatrix(x.features @ m.theta)


def _reg_gradient(theta: np.ndarray, reg_lambda: float, squared: bool) -> np.ndarray:
    if reg_lambda == 0.0:
        return 0.0
    if squared:
        return 2.0 * reg_lambda * theta
    norm = float(np.linalg.norm(theta))
    if norm == 0.0:
        return 0.0  # valid subgradient of the unsquared norm at the origin
    return reg_lambda * theta / norm


def _reg_value(theta: np.ndarray, reg_lambda: float, squared: bool) -> float:
    if reg_lambda == 0.0:
        return 0.0
    norm = float(np.linalg.norm(theta))
    return reg_lambda * (norm * norm if squared else norm)


def example_objective(theta: np.ndarray, x, game_cfg: GameConfig = GameConfig()) -> float:
    """Value of the example's matching game, with the truth potential netted out."""
    psi = x.features @ theta
    eq = double_oracle_equilibrium(psi, game_cfg)
    truth_pot = float(psi[np.arange(psi.shape[0]), x.truth.to_array()].sum())
    return eq.value - truth_pot


def example_subgradient(theta: np.ndarray, x, game_cfg: GameConfig = GameConfig()) -> np.ndarray:
    """Moment-matching subgradient: E_adv[features] - features(truth)."""
    psi = x.features @ theta
    eq = double_oracle_equilibrium(psi, game_cfg)
    return _subgradient_from_marginals(eq.adversary_marginals, x)


def _subgradient_from_marginals(adv_marginals: np.ndarray, x) -> np.ndarray:
    n = adv_marginals.shape[0]
    expected = np.einsum("ij,ijk->k", adv_marginals, x.features)
    truth = x.features[np.arange(n), x.truth.to_array()].sum(axis=0)
    return expected - truth


def _positive_support(strategy) -> list:
    return [p for p, pr in zip(strategy.support, strategy.probs) if pr > 1e-12]


def train(data, cfg: TrainConfig, init: Optional[ModelParams] = None,
          telemetry: Optional[TrainTelemetry] = None,
          equilibrium_cache: Optional[dict] = None) -> ModelParams:
    """Stochastic subgradient descent over per-example game values.

    Shuffling, and hence the whole run, is deterministic for a fixed seed
    and data order.  When cfg.cache_equilibria is set, each example's
    equilibrium supports warm-start its next solve; pass a dict as
    ``equilibrium_cache`` to retain the cache across calls.
    """
    data = list(data)
    if not data:
        raise InvalidInputError("training data must be nonempty")
    d = data[0].features.shape[2]
    for x in data:
        if x.features.shape[2] != d:
            raise InvalidInputError("inconsistent feature dimensions in training data")

    theta = np.zeros(d) if init is None else init.theta.copy()
    if init is not None and init.d != d:
        raise InvalidInputError("warm-start model dimension mismatch")
    cache = None
    if cfg.cache_equilibria:
        cache = equilibrium_cache if equilibrium_cache is not None else {}

    rng = substream(cfg.seed, "train-shuffle")
    rows = None
    step = cfg.step_offset
    for _ in range(cfg.epochs):
        order = rng.permutation(len(data))
        epoch_iters = 0
        epoch_obj = 0.0
        for idx in order:
            x = data[int(idx)]
            psi = x.features @ theta
            if rows is None or rows.shape[0] != psi.shape[0]:
                rows = np.arange(psi.shape[0])
            gcfg = cfg.game_cfg
            if cache is not None and x.id in cache:
                gcfg = replace(gcfg, warm_start=cache[x.id])
            try:
                eq = double_oracle_equilibrium(psi, gcfg)
            except AbmatchError as exc:
                exc.args = (f"example {x.id!r}: {exc}",)
                raise
            if cache is not None:
                # full supports, not just positive-probability ones: between
                # epochs theta moves little and the dropped strategies are
                # exactly the ones the next solve tends to regenerate
                cache[x.id] = (eq.predictor.support, eq.adversary.support)
            grad = _subgradient_from_marginals(eq.adversary_marginals, x)
            grad = grad + _reg_gradient(theta, cfg.reg_lambda, cfg.reg_squared)
            lr = cfg.learning_rate / (1.0 + step / cfg.lr_decay_steps)
            theta = theta - lr * grad
            step += 1
            if telemetry is not None:
                epoch_iters += eq.iterations
                truth_pot = float(psi[rows, x.truth.to_array()].sum())
                epoch_obj += eq.value - truth_pot \
                    + _reg_value(theta, cfg.reg_lambda, cfg.reg_squared)
        if telemetry is not None:
            telemetry.record_epoch(epoch_iters, epoch_obj / len(data))

    prior = init.trained_rounds if init is not None else 0
    return ModelParams(theta, cfg.reg_lambda, prior + cfg.epochs, kind="abm")


def predict(m: ModelParams, x, game_cfg: GameConfig = GameConfig()):
    """Decode one instance: Hamming-optimal response to the adversary.

    Returns the predicted permutation together with the full equilibrium,
    which callers reuse for uncertainty scoring.
    """
    if m.kind != "abm":
        raise InvalidInputError(f"predict needs an abm model, got kind={m.kind!r}")
    psi = potentials(m, x).weights
    eq = double_oracle_equilibrium(psi, game_cfg)
    return predictor_best_response(eq.adversary_marginals), eq


# ---------------------------------------------------------------------------
# uncertainty quantities (all in bits)

def node_entropy(p) -> float:
    """Shannon entropy of one node's assignment distribution."""
    q = np.asarray(p, dtype=float)
    if q.ndim != 1 or np.any(q < -1e-12) or not np.all(np.isfinite(q)):
        raise InvalidInputError("not a probability vector")
    if abs(float(q.sum()) - 1.0) > 1e-9:
        raise InvalidInputError(f"probabilities sum to {q.sum()}, not 1")
    pos = q[q > 0]
    return float(-(pos * np.log2(pos)).sum()) + 0.0  # normalizes -0.0


def mutual_information(Q, p_i, p_j) -> float:
    """Mutual information of a discrete joint against its two margins."""
    Q = np.asarray(Q, dtype=float)
    p_i = np.asarray(p_i, dtype=float)
    p_j = np.asarray(p_j, dtype=float)
    if np.abs(Q.sum(axis=1) - p_i).max() > 1e-6 or np.abs(Q.sum(axis=0) - p_j).max() > 1e-6:
        raise InvalidInputError("joint margins disagree with the unary marginals")
    mask = Q > 0
    qm = Q[mask]
    denom = np.outer(p_i, p_j)[mask]
    mi = float((qm * np.log2(qm / denom)).sum())
    if -1e-12 < mi < 0.0:
        return 0.0
    return mi


def value_of_information(eq: Equilibrium, j: int, include_self: bool = True) -> float:
    """Expected total uncertainty reduction from observing node j's partner.

    Sums the mutual information between node j and every node under the
    adversary's equilibrium joint; the self term contributes H(Y_j).
    """
    n = eq.adversary.n
    if not (0 <= j < n):
        raise InvalidInputError(f"node index {j} out of range for n={n}")
    p_j = eq.adversary_marginals[j]
    total = node_entropy(p_j) if include_self else 0.0
    for i in range(n):
        if i == j:
            continue
        Q = pairwise_marginals(eq.adversary, i, j)
        total += mutual_information(Q, eq.adversary_marginals[i], p_j)
    return total


def information_profile(eq: Equilibrium, include_self: bool = True) -> np.ndarray:
    """All V_j at once; vectorized equivalent of value_of_information."""
    support = eq.adversary.support_array()
    probs = eq.adversary.probs
    s, n = support.shape
    onehot = np.zeros((s, n, n))
    onehot[np.arange(s)[:, None], np.arange(n)[None, :], support] = 1.0
    weighted = onehot * probs[:, None, None]
    joint = np.einsum("cia,cjb->ijab", weighted, onehot)
    marg = eq.adversary_marginals
    denom = marg[:, None, :, None] * marg[None, :, None, :]
    mask = joint > 0
    ratio = np.ones_like(joint)  # log2(1) = 0 cancels the masked-out entries
    np.divide(joint, denom, out=ratio, where=mask)
    mi = (joint * np.log2(ratio)).sum(axis=(2, 3))
    profile = mi.sum(axis=0)
    if not include_self:
        profile = profile - np.diag(mi)
    return np.maximum(profile, 0.0)


def sample_information(eq: Equilibrium, include_self: bool = True) -> float:
    """Total solicitation value of an instance: sum of V_j over its nodes."""
    return float(information_profile(eq, include_self).sum())


# ---------------------------------------------------------------------------
# persistence

def save_model(m: ModelParams, path):
    doc = {
        "format_version": FORMAT_VERSION,
        "model_kind": m.kind,
        "d": m.d,
        "theta": [float(v) for v in m.theta],
        "reg_lambda": float(m.reg_lambda),
        "trained_rounds": int(m.trained_rounds),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_model(path) -> ModelParams:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format_version") != FORMAT_VERSION:
        raise InvalidInputError(f"unsupported model format {doc.get('format_version')}")
    theta = np.asarray(doc["theta"], dtype=float)
    if theta.shape[0] != doc["d"]:
        raise InvalidInputError("model file dimension mismatch")
    return ModelParams(theta, float(doc["reg_lambda"]), int(doc["trained_rounds"]),
                       kind=doc["model_kind"])
