"""Acceptance suite: one test per criterion, each printing a pass line.

Run with `pytest tests/test_acceptance.py -v -s`.  Criterion 6 is the
long one (a 30-split, 100-round active-learning benchmark); the whole
module stays within its stated runtime budgets on a desktop-class CPU.
"""

import time
from itertools import permutations

import numpy as np
import pytest
from scipy.optimize import linprog

from abmatch.abm import (
    ModelParams,
    TrainConfig,
    TrainTelemetry,
    example_objective,
    example_subgradient,
    information_profile,
    mutual_information,
    node_entropy,
    predict,
    train,
)
from abmatch.active import (
    ActiveLoopEngine,
    LoopConfig,
    evaluate_hamming,
    replay_training,
    run_curves,
    summarize_curves,
)
from abmatch.data import gen_synthetic, ingest_mot, save_dataset
from abmatch.game import (
    GameConfig,
    adversary_best_response,
    double_oracle_equilibrium,
    pairwise_marginals,
    predictor_best_response,
)
from abmatch.matching import brute_force_matching, matching_weight, max_weight_matching
from abmatch.ssvm import ssvm_train

# configuration shared by criteria 5 and 8: slow early steps keep the
# per-example games mixed through epoch 2, which is what makes equilibrium
# caching measurable, while still recovering the planted model
RECOVERY_TRAIN = dict(learning_rate=0.005, lr_decay_steps=2000.0, seed=0)
RECOVERY_EPOCHS = 40

# criterion 6 benchmark: moderate margins keep the pool informative and
# the equilibria mixed; all other knobs are the package defaults
BENCH = dict(n=8, d=6, count=200, seed=1, noise=0.3, margin=0.3)
BENCH_ROUNDS = 100
BENCH_SPLITS = 30
BENCH_MASTER_SEED = 7


def _report(criterion, detail):
    print(f"\n[PASS] criterion {criterion}: {detail}")


@pytest.fixture(scope="module")
def bench_results():
    """Criterion-6 benchmark run, shared with criterion 7."""
    ds = gen_synthetic(**BENCH)
    cfg = LoopConfig()
    t0 = time.perf_counter()
    records = run_curves(ds, ["abm-mi", "random", "ssvm-entropy"],
                         BENCH_ROUNDS, BENCH_SPLITS, BENCH_MASTER_SEED, cfg)
    elapsed = time.perf_counter() - t0
    return ds, cfg, records, elapsed


def test_criterion_1_matching_oracle_equivalence():
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    for n in range(2, 8):
        for _ in range(500):
            w = rng.normal(size=(n, n)) * rng.uniform(0.5, 5.0)
            fast = max_weight_matching(w)
            slow = brute_force_matching(w)
            assert matching_weight(w, fast) == matching_weight(w, slow)
    elapsed = time.perf_counter() - t0
    assert elapsed < 5.0
    _report(1, f"3000 draws, exact weight agreement, {elapsed:.2f}s < 5s")


def _full_game_value_linprog(psi):
    """Independent oracle: value of the full-enumeration matching game."""
    n = psi.shape[0]
    perms = list(permutations(range(n)))
    M = np.empty((len(perms), len(perms)))
    for r, pr in enumerate(perms):
        for c, pc in enumerate(perms):
            M[r, c] = sum((pr[i] != pc[i]) + psi[i, pc[i]] for i in range(n))
    m, k = M.shape
    c_vec = np.zeros(k + 1)
    c_vec[-1] = -1.0
    A_ub = np.hstack([-M, np.ones((m, 1))])
    A_eq = np.zeros((1, k + 1))
    A_eq[0, :k] = 1.0
    res = linprog(c_vec, A_ub=A_ub, b_ub=np.zeros(m), A_eq=A_eq, b_eq=[1.0],
                  bounds=[(0, None)] * k + [(None, None)], method="highs")
    assert res.status == 0
    return -res.fun


@pytest.fixture(scope="module")
def criterion2_equilibria():
    rng = np.random.default_rng(102)
    cfg = GameConfig()
    cases = []
    t0 = time.perf_counter()
    for i in range(50):
        n = 3 if i % 2 == 0 else 4
        psi = rng.normal(size=(n, n)) * rng.uniform(0.3, 2.0)
        eq = double_oracle_equilibrium(psi, cfg)
        cases.append((psi, eq))
    return cases, time.perf_counter() - t0


def test_criterion_2_double_oracle_correctness(criterion2_equilibria):
    cases, solve_time = criterion2_equilibria
    t0 = time.perf_counter()
    worst = 0.0
    for psi, eq in cases:
        oracle_value = _full_game_value_linprog(psi)
        worst = max(worst, abs(eq.value - oracle_value))
        assert eq.value == pytest.approx(oracle_value, abs=1e-6)
        # best-response-gap certificate
        n = psi.shape[0]
        rows = np.arange(n)
        br = adversary_best_response(eq.predictor_marginals, psi)
        w = (1.0 - eq.predictor_marginals) + psi
        gap_adv = w[rows, br.to_array()].sum() - eq.value
        pbr = predictor_best_response(eq.adversary_marginals)
        pots = np.array([psi[rows, p.to_array()].sum() for p in eq.adversary.support])
        gap_pred = eq.value - ((1.0 - eq.adversary_marginals[rows, pbr.to_array()]).sum()
                               + eq.adversary.probs @ pots)
        assert gap_adv <= 1e-6 and gap_pred <= 1e-6
    elapsed = solve_time + time.perf_counter() - t0
    assert elapsed < 30.0
    _report(2, f"50 games, worst value error {worst:.2e} <= 1e-6, "
               f"certificates hold, {elapsed:.1f}s < 30s")


def test_criterion_3_gradient_check():
    rng = np.random.default_rng(103)
    ds = gen_synthetic(n=4, d=5, count=20, seed=203, noise=0.6, margin=0.8)
    t0 = time.perf_counter()
    h = 1e-5
    worst = 0.0
    for x in ds.instances:
        theta = rng.normal(size=5) * 0.5
        grad = example_subgradient(theta, x)
        for _ in range(2):
            direction = rng.normal(size=5)
            direction /= np.linalg.norm(direction)
            fd = (example_objective(theta + h * direction, x)
                  - example_objective(theta - h * direction, x)) / (2 * h)
            analytic = float(grad @ direction)
            rel = abs(fd - analytic) / max(1e-6, abs(analytic))
            worst = max(worst, rel)
            assert fd == pytest.approx(analytic, rel=1e-3, abs=1e-6)
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0
    _report(3, f"20 instances x 2 directions, worst relative error {worst:.2e} "
               f"<= 1e-3, {elapsed:.1f}s < 60s")


def test_criterion_4_information_identity(criterion2_equilibria):
    cases, _ = criterion2_equilibria
    worst = 0.0
    for _, eq in cases:
        n = eq.adversary.n
        support = [p.assignment for p in eq.adversary.support]
        probs = eq.adversary.probs
        marg = eq.adversary_marginals
        profile = information_profile(eq)
        for j in range(n):
            before = sum(node_entropy(marg[i]) for i in range(n))
            after = 0.0
            for b in range(n):
                mass = sum(p for perm, p in zip(support, probs) if perm[j] == b)
                if mass <= 0:
                    continue
                cond = np.zeros((n, n))
                for perm, p in zip(support, probs):
                    if perm[j] == b:
                        cond[np.arange(n), list(perm)] += p / mass
                after += mass * sum(node_entropy(cond[i]) for i in range(n))
            reduction = before - after
            worst = max(worst, abs(profile[j] - reduction))
            assert profile[j] == pytest.approx(reduction, abs=1e-9)
            # per-pair MI: nonnegative and symmetric
            for i in range(n):
                if i == j:
                    continue
                Q = pairwise_marginals(eq.adversary, i, j)
                mi = mutual_information(Q, marg[i], marg[j])
                mi_t = mutual_information(Q.T, marg[j], marg[i])
                assert mi >= 0.0
                assert mi == pytest.approx(mi_t, abs=1e-12)
    _report(4, f"entropy-reduction identity on 50 equilibria, worst gap {worst:.2e} <= 1e-9")


@pytest.fixture(scope="module")
def recovery_setup():
    ds = gen_synthetic(n=8, d=6, count=200, seed=5, noise=0.0)
    return ds, ds.instances[:150], ds.instances[150:]


def test_criterion_5_planted_model_recovery(recovery_setup):
    _, train_set, test_set = recovery_setup
    t0 = time.perf_counter()
    cfg = TrainConfig(epochs=RECOVERY_EPOCHS, **RECOVERY_TRAIN)
    abm_model = train(train_set, cfg)
    abm_rate = evaluate_hamming(abm_model, test_set)
    ssvm_model = ssvm_train(train_set, cfg)
    ssvm_rate = evaluate_hamming(ssvm_model, test_set)
    elapsed = time.perf_counter() - t0
    assert abm_rate <= 0.01
    assert ssvm_rate <= 0.01
    assert elapsed < 120.0
    _report(5, f"held-out hamming abm={abm_rate:.4f}, ssvm={ssvm_rate:.4f} "
               f"<= 0.01, {elapsed:.0f}s < 2min")


def test_criterion_6_active_learning_dominance(bench_results):
    _, _, records, elapsed = bench_results
    summary, auc = summarize_curves(records)
    abm_curve = [summary["abm-mi"][r][0] for r in range(BENCH_ROUNDS + 1)]
    rnd_curve = [summary["random"][r][0] for r in range(BENCH_ROUNDS + 1)]
    wins = sum(1 for k in range(10, BENCH_ROUNDS + 1)
               if abm_curve[k] <= rnd_curve[k])
    total = BENCH_ROUNDS + 1 - 10
    assert wins / total >= 0.70
    assert auc["abm-mi"] < auc["random"]
    assert auc["abm-mi"] <= auc["ssvm-entropy"] * 1.05
    assert elapsed < 1800.0
    _report(6, f"abm-mi <= random at {wins}/{total} rounds (>= 70%), "
               f"AUC {auc['abm-mi']:.4f} < {auc['random']:.4f} (random), "
               f"<= 1.05 x {auc['ssvm-entropy']:.4f} (ssvm), {elapsed:.0f}s < 30min")


def test_criterion_7_support_size_telemetry(bench_results):
    ds, cfg, records, _ = bench_results
    supports = [r.mean_support_size for r in records if r.strategy == "abm-mi"]
    mean_support = float(np.mean(supports))
    assert 2.0 <= mean_support <= 50.0
    # termination: the benchmark completing proves no solve hit max_iters
    # (that raises); additionally check headroom on a sample of fresh solves
    rng = np.random.default_rng(107)
    cap = cfg.game_cfg.iter_cap(8)
    worst_iters = 0
    for x in [ds.instances[int(i)] for i in rng.choice(len(ds), 40, replace=False)]:
        theta = rng.normal(size=6) * rng.uniform(0.2, 2.0)
        eq = double_oracle_equilibrium(x.features @ theta, cfg.game_cfg)
        worst_iters = max(worst_iters, eq.iterations)
    assert worst_iters < cap
    _report(7, f"mean adversary support {mean_support:.2f} in [2, 50]; "
               f"worst fresh-solve iterations {worst_iters} < cap {cap}")


def test_criterion_8_warm_start_caching(recovery_setup):
    _, train_set, _ = recovery_setup
    iters = {}
    for cached in (True, False):
        tel = TrainTelemetry()
        cfg = TrainConfig(epochs=2, cache_equilibria=cached, **RECOVERY_TRAIN)
        train(train_set, cfg, telemetry=tel)
        iters[cached] = tel.oracle_iterations[1]  # epoch 2
    ratio = iters[False] / iters[True]
    assert ratio >= 2.0
    _report(8, f"epoch-2 double-oracle iterations: cold {iters[False]}, "
               f"warm {iters[True]}, reduction {ratio:.2f}x >= 2x")


def test_criterion_9_batch_vs_loop_equivalence():
    ds = gen_synthetic(n=4, d=4, count=24, seed=9, noise=0.3)
    cfg = LoopConfig(fractions=(0.125, 0.5, 0.375), initial_epochs=3, round_epochs=1)
    engine = ActiveLoopEngine(ds, "random", rounds=12, split_seed=909, cfg=cfg)
    engine.run_with_simulated_oracle()
    assert not engine.state.unlabeled_ids  # pool exhausted
    solicited = [h[1] for h in engine.state.history]
    replayed, _ = replay_training(ds, "random", 909, solicited, cfg=cfg)
    gap = float(np.abs(replayed.theta - engine.model.theta).max())
    assert gap <= 1e-9
    _report(9, f"pool exhausted after {len(solicited)} rounds; "
               f"batch replay max |dtheta| = {gap:.2e} <= 1e-9")


def test_criterion_11_serve_round_trip_secondary(tmp_path):
    """[SECONDARY] scripted client over HTTP reproduces the simulated curve.

    The editor-side bijectivity half of this criterion lives in the
    frontend's vitest suite (frontend/src/editor.test.ts).
    """
    import json
    import threading
    import urllib.request

    from abmatch.cli import main as cli_main
    from abmatch.data import save_dataset
    from abmatch.serve import make_server

    rounds = 20
    master_seed = 97
    ds = gen_synthetic(n=4, d=4, count=60, seed=11, noise=0.3, margin=0.3)
    data_path = tmp_path / "ds.jsonl"
    save_dataset(ds, data_path)
    csv_path = tmp_path / "sim.csv"
    code = cli_main(["active-sim", "--data", str(data_path), "--strategy", "abm-mi",
                     "--rounds", str(rounds), "--splits", "1",
                     "--seed", str(master_seed), "--initial-epochs", "4",
                     "--round-epochs", "1", "--out", str(csv_path)])
    assert code == 0

    cfg = LoopConfig(initial_epochs=4, round_epochs=1)
    server = make_server(ds, "abm-mi", rounds, master_seed * 1000, cfg=cfg)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{server.server_address[1]}"
    try:
        for _ in range(rounds):
            with urllib.request.urlopen(base + "/api/query") as resp:
                query = json.loads(resp.read().decode())
            truth = ds.by_id(query["instance_id"]).truth
            req = urllib.request.Request(
                base + "/api/label",
                data=json.dumps({"instance_id": query["instance_id"],
                                 "permutation": list(truth.assignment)}).encode(),
                headers={"Content-Type": "application/json"}, method="POST")
            with urllib.request.urlopen(req) as resp:
                assert resp.status == 200
        with urllib.request.urlopen(base + "/api/curve") as resp:
            served_csv = resp.read().decode()
    finally:
        server.shutdown()
        server.server_close()
    assert served_csv == csv_path.read_text()
    _report(11, f"{rounds}-round scripted client curve is byte-identical to "
                "cmd_active_sim; editor bijectivity checked in frontend tests")


def test_criterion_10_mot_ingestion(tmp_path):
    gt = tmp_path / "gt.txt"
    rows = []
    for frame, count in ((1, 3), (2, 2), (3, 3)):
        for k in range(count):
            rows.append(f"{frame},{k + 1},{20 * k + frame},{15 * k},14,32,1,-1,-1")
    gt.write_text("\n".join(rows) + "\n")
    ds1 = ingest_mot(gt)
    ds2 = ingest_mot(gt)
    assert len(ds1) == 2
    for x in ds1:
        assert x.n == 6  # 2 * max per-frame count
        assert sorted(x.truth.assignment) == list(range(6))
        assert np.all(np.isfinite(x.features))
    assert ds1 == ds2
    out1, out2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    save_dataset(ds1, out1)
    save_dataset(ds2, out2)
    assert out1.read_bytes() == out2.read_bytes()
    _report(10, "toy counts {3,2,3} -> n=6 instances, bijective truths, "
                "finite features, byte-identical across runs")
