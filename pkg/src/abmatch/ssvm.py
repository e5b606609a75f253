"""Structured SVM baseline with Platt-scaled edge probabilities.

Training minimizes the structured hinge with Hamming loss, using
loss-augmented Hungarian inference.  For solicitation scoring, raw edge
potentials are squashed through a fitted sigmoid and each edge is treated
as an independent Bernoulli; node and sample scores are plain sums of
edge entropies, with no bijectivity correction.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from .abm import ModelParams, TrainConfig, TrainTelemetry, potentials
from .errors import DegenerateFitError, InvalidInputError, InvalidStateError, NumericFailureError
from .matching import Permutation, max_weight_matching, matching_weight
from .rng import substream

PARAM_CAP = 50.0


@dataclass(frozen=True)
class PlattParams:
    """Sigmoid calibration p(z) = 1 / (1 + exp(a z + b)).

    With edge potentials oriented so that larger means more likely, a
    fitted ``a`` comes out negative.
    """

    a: float
    b: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)):
            raise InvalidInputError("Platt parameters must be finite")


def _loss_augmented_argmax(psi: np.ndarray, truth: Permutation) -> Permutation:
    n = psi.shape[0]
    augmented = psi + 1.0
    augmented[np.arange(n), truth.to_array()] -= 1.0  # +1 for every wrong edge
    return max_weight_matching(augmented)


def hinge_objective(theta: np.ndarray, x, reg_lambda: float = 0.0,
                    reg_squared: bool = True) -> float:
    """Structured hinge of one example; nonnegative, zero iff margin met."""
    psi = x.features @ theta
    aug = _loss_augmented_argmax(psi, x.truth)
    n = psi.shape[0]
    truth_arr = x.truth.to_array()
    aug_score = matching_weight(psi, aug) + np.count_nonzero(aug.to_array() != truth_arr)
    value = aug_score - float(psi[np.arange(n), truth_arr].sum())
    if reg_lambda > 0:
        norm = float(np.linalg.norm(theta))
        value += reg_lambda * (norm * norm if reg_squared else norm)
    return value


def hinge_subgradient(theta: np.ndarray, x) -> np.ndarray:
    psi = x.features @ theta
    aug = _loss_augmented_argmax(psi, x.truth)
    n = psi.shape[0]
    rows = np.arange(n)
    return (x.features[rows, aug.to_array()] - x.features[rows, x.truth.to_array()]).sum(axis=0)


def ssvm_train(data, cfg: TrainConfig, init: Optional[ModelParams] = None,
               telemetry: Optional[TrainTelemetry] = None) -> ModelParams:
    """Stochastic subgradient descent on the structured hinge."""
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

    rng = substream(cfg.seed, "train-shuffle")
    step = cfg.step_offset
    for _ in range(cfg.epochs):
        order = rng.permutation(len(data))
        epoch_obj = 0.0
        for idx in order:
            x = data[int(idx)]
            grad = hinge_subgradient(theta, x)
            if cfg.reg_lambda > 0:
                if cfg.reg_squared:
                    grad = grad + 2.0 * cfg.reg_lambda * theta
                else:
                    norm = float(np.linalg.norm(theta))
                    if norm > 0:
                        grad = grad + cfg.reg_lambda * theta / norm
            lr = cfg.learning_rate / (1.0 + step / cfg.lr_decay_steps)
            theta = theta - lr * grad
            step += 1
            if telemetry is not None:
                epoch_obj += hinge_objective(theta, x, cfg.reg_lambda, cfg.reg_squared)
        if telemetry is not None:
            telemetry.record_epoch(0, epoch_obj / len(data))

    prior = init.trained_rounds if init is not None else 0
    return ModelParams(theta, cfg.reg_lambda, prior + cfg.epochs, kind="ssvm")


def ssvm_predict(m: ModelParams, x) -> Permutation:
    """Single max-weight matching over the learned potentials."""
    if m.kind != "ssvm":
        raise InvalidInputError(f"ssvm_predict needs an ssvm model, got kind={m.kind!r}")
    return max_weight_matching(potentials(m, x).weights)


# ---------------------------------------------------------------------------
# Platt scaling

def platt_fit(scores, labels) -> PlattParams:
    """Fit the sigmoid by minimizing binary log-loss (convex in a, b)."""
    z = np.asarray(scores, dtype=float)
    y = np.asarray(labels, dtype=float)
    if z.shape != y.shape or z.ndim != 1 or z.size == 0:
        raise InvalidInputError("scores and labels must be equal-length vectors")
    if not np.all(np.isfinite(z)):
        raise InvalidInputError("scores must be finite")
    if y.min() == y.max():
        raise DegenerateFitError("need at least one positive and one negative label")

    def loss_and_grad(params):
        a, b = params
        t = a * z + b
        p = expit(-t)  # P(label = 1)
        eps = 1e-300
        loss = -(y * np.log(p + eps) + (1 - y) * np.log(1 - p + eps)).sum()
        dt = y - p  # dp/dt = -p(1-p) folds into this
        return loss, np.array([(dt * z).sum(), dt.sum()])

    res = minimize(loss_and_grad, x0=np.zeros(2), jac=True, method="L-BFGS-B",
                   bounds=[(-PARAM_CAP, PARAM_CAP)] * 2,
                   options={"maxiter": 1000, "ftol": 1e-18, "gtol": 1e-12})
    params = res.x
    # Newton polish: L-BFGS-B stops short of the tight gradient target
    loss, grad = loss_and_grad(params)
    for _ in range(100):
        at_cap = np.abs(params).max() >= PARAM_CAP - 1e-9
        if np.linalg.norm(grad) <= 1e-10 or at_cap:
            break
        a, b = params
        w = expit(-(a * z + b))
        w = w * (1 - w)
        hess = np.array([[(w * z * z).sum(), (w * z).sum()],
                         [(w * z).sum(), w.sum()]])
        hess[0, 0] += 1e-12
        hess[1, 1] += 1e-12
        step = np.linalg.solve(hess, grad)
        scale = 1.0
        gnorm = np.linalg.norm(grad)
        while scale > 1e-12:
            cand = np.clip(params - scale * step, -PARAM_CAP, PARAM_CAP)
            cand_loss, cand_grad = loss_and_grad(cand)
            # near the optimum float loss stagnates; gradient norm still shrinks
            if cand_loss < loss or (cand_loss <= loss + abs(loss) * 1e-12
                                    and np.linalg.norm(cand_grad) < gnorm):
                params, loss, grad = cand, cand_loss, cand_grad
                break
            scale /= 2
        else:
            break
    a, b = params
    at_cap = max(abs(a), abs(b)) >= PARAM_CAP - 1e-9
    if np.linalg.norm(grad) > 1e-8 and not at_cap:
        raise NumericFailureError("Platt fit did not reach gradient tolerance",
                                  residual=float(np.linalg.norm(grad)))
    return PlattParams(float(a), float(b))


def platt_prob(p: PlattParams, z: float):
    """Probability of an edge from its raw potential."""
    return expit(-(p.a * np.asarray(z, dtype=float) + p.b))


def _bernoulli_entropy_bits(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, 0.0, 1.0)
    out = np.zeros_like(p)
    interior = (p > 0.0) & (p < 1.0)
    q = p[interior]
    out[interior] = -(q * np.log2(q) + (1 - q) * np.log2(1 - q))
    return out


def ssvm_uncertainty(m: ModelParams, platt: Optional[PlattParams], x):
    """Per-node and whole-sample entropy scores from Platt edge probabilities."""
    if platt is None:
        raise InvalidStateError("Platt parameters must be fitted before scoring")
    psi = potentials(m, x).weights
    probs = platt_prob(platt, psi)
    entropy = _bernoulli_entropy_bits(probs)
    node_scores = entropy.sum(axis=1)
    return node_scores, float(node_scores.sum())


def platt_training_edges(model: ModelParams, instances):
    """Calibration data from a labeled pool: every edge's potential with a
    hit/miss label against the ground-truth matching."""
    scores = []
    labels = []
    for x in instances:
        psi = x.features @ model.theta
        truth = x.truth.to_array()
        n = psi.shape[0]
        onehot = np.zeros((n, n))
        onehot[np.arange(n), truth] = 1.0
        scores.append(psi.ravel())
        labels.append(onehot.ravel())
    return np.concatenate(scores), np.concatenate(labels)
