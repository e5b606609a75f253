"""Pool-based active learning loop for matching models.

Each round scores the unlabeled pool, solicits the highest-value
instance, retrains, and evaluates held-out Hamming loss.  The engine is
driven either by the simulated oracle (which answers with ground truth)
or by a live annotator through the serve API; both paths share the same
state machine, so a truth-scripted client reproduces the simulation
exactly.
"""

import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import abm as _abm
from . import ssvm as _ssvm
from .data import Dataset, MatchingInstance, split
from .errors import InvalidInputError, PoolExhausted
from .game import GameConfig
from .matching import Permutation, hamming_distance
from .rng import substream

STRATEGIES = ("abm-mi", "ssvm-entropy", "random")


@dataclass
class PoolState:
    """Bookkeeping for one active-learning run."""

    labeled_ids: list
    unlabeled_ids: list
    history: list = field(default_factory=list)  # (round, chosen id, score)
    rng_seed: int = 0


@dataclass(frozen=True)
class CurveRecord:
    strategy: str
    split_seed: int
    round: int
    n_labeled: int
    hamming_rate: float
    mean_support_size: float


@dataclass(frozen=True)
class LoopConfig:
    fractions: tuple = (0.05, 0.70, 0.25)
    initial_epochs: int = 10
    round_epochs: int = 2
    learning_rate: float = 0.4
    lr_decay_steps: float = 3000.0
    reg_lambda: float = 0.0
    include_self: bool = True
    game_cfg: GameConfig = field(default_factory=GameConfig)


def learner_for(strategy: str) -> str:
    """Model family each strategy trains; random defaults to the abm learner
    so selection strategies are compared on the same model."""
    if strategy == "ssvm-entropy":
        return "ssvm"
    if strategy in ("abm-mi", "random"):
        return "abm"
    raise InvalidInputError(f"unknown strategy {strategy!r}")


def round_seed(split_seed: int, round_no: int) -> int:
    return split_seed * 100000 + round_no


# ---------------------------------------------------------------------------
# spec-level operations

def score_pool(strategy: str, model, pool, seed: int, *, platt=None,
               game_cfg: GameConfig = GameConfig(), cache: Optional[dict] = None,
               include_self: bool = True) -> dict:
    """Solicitation score for every unlabeled instance; higher is better."""
    if strategy not in STRATEGIES:
        raise InvalidInputError(f"unknown strategy {strategy!r}")
    pool = list(pool)
    scores = {}
    if strategy == "random":
        draws = substream(seed, "random-strategy").random(len(pool))
        return {x.id: float(v) for x, v in zip(pool, draws)}
    if strategy == "abm-mi":
        if model.kind != "abm":
            raise InvalidInputError(f"abm-mi scoring needs an abm model, got {model.kind!r}")
        for x in pool:
            gcfg = game_cfg
            if cache is not None and x.id in cache:
                gcfg = replace(game_cfg, warm_start=cache[x.id])
            _, eq = _abm.predict(model, x, gcfg)
            if cache is not None:
                cache[x.id] = (_abm._positive_support(eq.predictor),
                               _abm._positive_support(eq.adversary))
            scores[x.id] = _abm.sample_information(eq, include_self)
        return scores
    # ssvm-entropy
    if model.kind != "ssvm":
        raise InvalidInputError(f"ssvm-entropy scoring needs an ssvm model, got {model.kind!r}")
    for x in pool:
        _, sample_score = _ssvm.ssvm_uncertainty(model, platt, x)
        scores[x.id] = sample_score
    return scores


def select_sample(scores: dict):
    """Highest-scoring id; ties go to the smallest id."""
    if not scores:
        raise PoolExhausted("no unlabeled instances left")
    best = max(sorted(scores), key=lambda k: scores[k])
    return best


def oracle_answer(dataset: Dataset, state: PoolState, instance_id, mode="full-sample",
                  node: Optional[int] = None):
    """Simulated annotator: reads ground truth for the requested instance.

    Full-sample mode returns the whole permutation; single-node mode the
    partner of one node.  (Live annotation goes through the serve API,
    where answers arrive by POST instead.)
    """
    if instance_id in state.labeled_ids:
        raise InvalidInputError(f"instance {instance_id!r} is already labeled")
    truth = dataset.by_id(instance_id).truth
    if mode == "full-sample":
        return truth
    if mode == "single-node":
        if node is None or not (0 <= node < truth.n):
            raise InvalidInputError(f"single-node query needs a node in [0, {truth.n})")
        return truth[node]
    raise InvalidInputError(f"unknown oracle mode {mode!r}")


def evaluate_hamming(model, instances, game_cfg: GameConfig = GameConfig(),
                     cache: Optional[dict] = None) -> float:
    """Mean normalized Hamming distance of predictions against truth."""
    instances = list(instances)
    if not instances:
        raise InvalidInputError("evaluation set must be nonempty")
    total = 0.0
    for x in instances:
        if model.kind == "abm":
            gcfg = game_cfg
            if cache is not None and x.id in cache:
                gcfg = replace(game_cfg, warm_start=cache[x.id])
            perm, eq = _abm.predict(model, x, gcfg)
            if cache is not None:
                cache[x.id] = (_abm._positive_support(eq.predictor),
                               _abm._positive_support(eq.adversary))
        else:
            perm = _ssvm.ssvm_predict(model, x)
        total += hamming_distance(perm, x.truth) / x.n
    return total / len(instances)


# ---------------------------------------------------------------------------
# loop engine

class ActiveLoopEngine:
    """One active-learning session: scoring, solicitation, retraining.

    The training cache is fed only by training solves, so replaying the
    recorded solicitation order through ``replay_training`` reproduces the
    final weights bit for bit.
    """

    def __init__(self, dataset: Dataset, strategy: str, rounds: int,
                 split_seed: int, cfg: LoopConfig = LoopConfig()):
        if strategy not in STRATEGIES:
            raise InvalidInputError(f"unknown strategy {strategy!r}")
        self.dataset = dataset
        self.strategy = strategy
        self.rounds = rounds
        self.split_seed = split_seed
        self.cfg = cfg
        self.learner = learner_for(strategy)

        labeled, pool, test = split(dataset, split_seed, cfg.fractions)
        self.state = PoolState(list(labeled), list(pool), rng_seed=split_seed)
        self.test_ids = list(test)
        self.labels = {i: dataset.by_id(i).truth for i in labeled}

        self._train_cache = {}   # only training solves touch this
        self._pool_cache = {}
        self._eval_cache = {}
        self._steps_done = 0     # learning-rate decay continues across rounds
        self.records = []
        self.truncated = False
        self.oracle_iterations = []  # per training call, for telemetry
        self._pending = None         # (instance_id, score) awaiting a label
        self._platt = None

        self.model = self._train_round(round_no=0, init=None)
        self._evaluate_round(round_no=0)

    # -- internals ---------------------------------------------------------

    def _labeled_instances(self):
        out = []
        for i in self.state.labeled_ids:
            x = self.dataset.by_id(i)
            label = self.labels[i]
            if label.assignment != x.truth.assignment:
                x = MatchingInstance(x.id, x.features, label, dict(x.meta))
            out.append(x)
        return out

    def _train_round(self, round_no: int, init):
        cfg = self.cfg
        epochs = cfg.initial_epochs if round_no == 0 else cfg.round_epochs
        data = self._labeled_instances()
        tc = _abm.TrainConfig(
            epochs=epochs, learning_rate=cfg.learning_rate,
            lr_decay_steps=cfg.lr_decay_steps, reg_lambda=cfg.reg_lambda,
            seed=round_seed(self.split_seed, round_no), game_cfg=cfg.game_cfg,
            cache_equilibria=True, step_offset=self._steps_done)
        tel = _abm.TrainTelemetry()
        if self.learner == "abm":
            model = _abm.train(data, tc, init=init, telemetry=tel,
                               equilibrium_cache=self._train_cache)
        else:
            model = _ssvm.ssvm_train(data, tc, init=init, telemetry=tel)
            scores, labels = _ssvm.platt_training_edges(model, data)
            self._platt = _ssvm.platt_fit(scores, labels)
        self._steps_done += epochs * len(data)
        self.oracle_iterations.append(sum(tel.oracle_iterations))
        return model

    def _evaluate_round(self, round_no: int):
        test = [self.dataset.by_id(i) for i in self.test_ids]
        if self.learner == "abm":
            total, supports = 0.0, []
            for x in test:
                gcfg = self.cfg.game_cfg
                if x.id in self._eval_cache:
                    gcfg = replace(gcfg, warm_start=self._eval_cache[x.id])
                perm, eq = _abm.predict(self.model, x, gcfg)
                self._eval_cache[x.id] = (_abm._positive_support(eq.predictor),
                                          _abm._positive_support(eq.adversary))
                supports.append(eq.support_size)
                total += hamming_distance(perm, x.truth) / x.n
            rate = total / len(test)
            mean_support = float(np.mean(supports))
        else:
            rate = evaluate_hamming(self.model, test)
            mean_support = 1.0
        self.records.append(CurveRecord(self.strategy, self.split_seed, round_no,
                                        len(self.state.labeled_ids), rate, mean_support))

    # -- public stepping ---------------------------------------------------

    @property
    def round(self) -> int:
        return len(self.state.history)

    @property
    def done(self) -> bool:
        return self.round >= self.rounds or (not self.state.unlabeled_ids
                                             and self._pending is None)

    def pending_query(self):
        """Id of the instance solicited this round (computing it on demand)."""
        if self._pending is None:
            if self.done:
                raise PoolExhausted("session finished")
            pool = [self.dataset.by_id(i) for i in self.state.unlabeled_ids]
            if not pool:
                raise PoolExhausted("no unlabeled instances left")
            seed = round_seed(self.split_seed, self.round + 1)
            scores = score_pool(self.strategy, self.model, pool, seed,
                                platt=self._platt, game_cfg=self.cfg.game_cfg,
                                cache=self._pool_cache,
                                include_self=self.cfg.include_self)
            chosen = select_sample(scores)
            self._pending = (chosen, scores[chosen])
        return self._pending[0]

    def submit_label(self, instance_id, permutation):
        """Record an annotator's answer, retrain, evaluate, advance."""
        pending = self.pending_query()
        if instance_id != pending:
            raise InvalidInputError(
                f"label for {instance_id!r} but the pending query is {pending!r}")
        label = permutation if isinstance(permutation, Permutation) \
            else Permutation(tuple(permutation))
        n = self.dataset.by_id(instance_id).n
        if label.n != n:
            raise InvalidInputError(f"label has {label.n} nodes, instance has {n}")
        round_no = self.round + 1
        _, score = self._pending
        self.state.unlabeled_ids.remove(instance_id)
        self.state.labeled_ids.append(instance_id)
        self.labels[instance_id] = label
        self.state.history.append((round_no, instance_id, score))
        self._pending = None
        self._pool_cache.pop(instance_id, None)
        self.model = self._train_round(round_no, init=self.model)
        self._evaluate_round(round_no)

    def run_with_simulated_oracle(self):
        """Drive the loop with ground-truth answers until done."""
        while not self.done:
            try:
                chosen = self.pending_query()
            except PoolExhausted:
                break
            answer = oracle_answer(self.dataset, self.state, chosen)
            self.submit_label(chosen, answer)
        if self.round < self.rounds:
            self.truncated = True
            warnings.warn(f"pool exhausted after {self.round} of {self.rounds} rounds; "
                          "curve truncated", RuntimeWarning)
        return self.records


def run_active_loop(dataset: Dataset, strategy: str, rounds: int, split_seed: int,
                    cfg: LoopConfig = LoopConfig()):
    """Algorithm: train on the labeled seed set, then round by round score
    the pool, solicit, retrain, and evaluate.  Returns rounds+1 records
    (round 0 covers the initial model)."""
    engine = ActiveLoopEngine(dataset, strategy, rounds, split_seed, cfg)
    return engine.run_with_simulated_oracle()


def replay_training(dataset: Dataset, strategy: str, split_seed: int,
                    solicited_ids, cfg: LoopConfig = LoopConfig()):
    """Re-run the loop's training schedule on a known solicitation order.

    No scoring, no pool bookkeeping: just the same train calls on the same
    growing labeled set with the same seeds, which must reproduce the
    loop's final weights exactly.
    """
    labeled, _, _ = split(dataset, split_seed, cfg.fractions)
    learner = learner_for(strategy)
    order = list(labeled)
    cache = {}
    model = None
    platt = None
    steps_done = 0
    for round_no in range(len(solicited_ids) + 1):
        if round_no > 0:
            order.append(solicited_ids[round_no - 1])
        epochs = cfg.initial_epochs if round_no == 0 else cfg.round_epochs
        tc = _abm.TrainConfig(
            epochs=epochs, learning_rate=cfg.learning_rate,
            lr_decay_steps=cfg.lr_decay_steps, reg_lambda=cfg.reg_lambda,
            seed=round_seed(split_seed, round_no), game_cfg=cfg.game_cfg,
            cache_equilibria=True, step_offset=steps_done)
        data = [dataset.by_id(i) for i in order]
        if learner == "abm":
            model = _abm.train(data, tc, init=model, equilibrium_cache=cache)
        else:
            model = _ssvm.ssvm_train(data, tc, init=model)
            scores, labels = _ssvm.platt_training_edges(model, data)
            platt = _ssvm.platt_fit(scores, labels)
        steps_done += epochs * len(data)
    return model, platt


# ---------------------------------------------------------------------------
# multi-split harness

def derive_split_seeds(master_seed: int, splits: int):
    return [master_seed * 1000 + i for i in range(splits)]


def run_curves(dataset: Dataset, strategies, rounds: int, splits: int,
               master_seed: int, cfg: LoopConfig = LoopConfig()):
    """Learning curves for several strategies over randomized splits."""
    records = []
    for strategy in strategies:
        for split_seed in derive_split_seeds(master_seed, splits):
            records.extend(run_active_loop(dataset, strategy, rounds, split_seed, cfg))
    records.sort(key=lambda r: (r.strategy, r.split_seed, r.round))
    return records


def summarize_curves(records):
    """Per-round mean and standard error per strategy, plus area under the
    mean curve (average hamming rate over rounds) for dominance checks."""
    by_key = {}
    for r in records:
        by_key.setdefault((r.strategy, r.round), []).append(r.hamming_rate)
    summary = {}
    for (strategy, round_no), rates in sorted(by_key.items()):
        arr = np.asarray(rates)
        se = float(arr.std(ddof=1) / np.sqrt(len(arr))) if len(arr) > 1 else 0.0
        summary.setdefault(strategy, {})[round_no] = (float(arr.mean()), se)
    auc = {s: float(np.mean([m for m, _ in rounds.values()]))
           for s, rounds in summary.items()}
    return summary, auc


def curve_csv(records) -> str:
    """Canonical CSV: 10 significant digits, (strategy, split_seed, round) order."""
    lines = ["strategy,split_seed,round,n_labeled,hamming_rate,mean_support_size"]
    for r in sorted(records, key=lambda r: (r.strategy, r.split_seed, r.round)):
        lines.append(f"{r.strategy},{r.split_seed},{r.round},{r.n_labeled},"
                     f"{r.hamming_rate:.10g},{r.mean_support_size:.10g}")
    return "\n".join(lines) + "\n"
