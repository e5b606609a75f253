import json
import threading
import urllib.request

import numpy as np
import pytest

from abmatch.active import ActiveLoopEngine, LoopConfig, curve_csv
from abmatch.data import gen_synthetic
from abmatch.serve import make_server

CFG = LoopConfig(initial_epochs=3, round_epochs=1, learning_rate=0.4,
                 fractions=(0.10, 0.60, 0.30))


@pytest.fixture()
def server():
    ds = gen_synthetic(n=4, d=4, count=30, seed=60, noise=0.3)
    srv = make_server(ds, "abm-mi", rounds=5, seed=17, cfg=CFG)
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{srv.server_address[1]}"
    yield srv, base, ds
    srv.shutdown()
    srv.server_close()


def get(base, path):
    with urllib.request.urlopen(base + path) as resp:
        body = resp.read().decode()
        return resp.status, body


def post(base, path, payload):
    req = urllib.request.Request(base + path, data=json.dumps(payload).encode(),
                                 headers={"Content-Type": "application/json"},
                                 method="POST")
    try:
        with urllib.request.urlopen(req) as resp:
            return resp.status, json.loads(resp.read().decode())
    except urllib.error.HTTPError as exc:
        return exc.code, json.loads(exc.read().decode())


def test_health_and_state(server):
    srv, base, ds = server
    status, body = get(base, "/api/health")
    assert status == 200 and json.loads(body) == {"ok": True}
    status, body = get(base, "/api/state")
    state = json.loads(body)
    assert state["round"] == 0
    assert state["n_labeled"] == 3
    assert len(state["hamming_rate_history"]) == 1


def test_query_before_any_post_is_round_one_selection(server):
    srv, base, ds = server
    status, body = get(base, "/api/query")
    assert status == 200
    query = json.loads(body)
    assert query["n"] == 4
    assert sorted(query["suggested"]) == [0, 1, 2, 3]
    assert len(query["confidence"]) == 4
    assert len(query["value_scores"]) == 4
    # the pending query matches what the engine itself would pick
    sim = ActiveLoopEngine(ds, "abm-mi", rounds=5, split_seed=17, cfg=CFG)
    assert query["instance_id"] == sim.pending_query()


def test_label_moves_pool_and_advances(server):
    srv, base, ds = server
    _, body = get(base, "/api/query")
    query = json.loads(body)
    before = json.loads(get(base, "/api/state")[1])
    truth = ds.by_id(query["instance_id"]).truth
    status, reply = post(base, "/api/label",
                         {"instance_id": query["instance_id"],
                          "permutation": list(truth.assignment)})
    assert status == 200 and reply["accepted"] is True
    after = json.loads(get(base, "/api/state")[1])
    assert after["n_labeled"] == before["n_labeled"] + 1
    assert after["n_pool"] == before["n_pool"] - 1
    assert after["round"] == 1


def test_stale_label_is_409(server):
    srv, base, ds = server
    _, body = get(base, "/api/query")
    query = json.loads(body)
    wrong = next(i for i in (x.id for x in ds)
                 if i != query["instance_id"])
    status, reply = post(base, "/api/label",
                         {"instance_id": wrong, "permutation": [0, 1, 2, 3]})
    assert status == 409


def test_malformed_label_is_400(server):
    srv, base, ds = server
    get(base, "/api/query")
    status, _ = post(base, "/api/label", {"instance_id": "x"})
    assert status == 400


def test_unknown_endpoint_404(server):
    srv, base, ds = server
    try:
        status, _ = get(base, "/api/nope")
    except urllib.error.HTTPError as exc:
        status = exc.code
    assert status == 404


def test_scripted_client_reproduces_simulation(server):
    srv, base, ds = server
    rounds = 5
    for _ in range(rounds):
        _, body = get(base, "/api/query")
        query = json.loads(body)
        truth = ds.by_id(query["instance_id"]).truth
        status, reply = post(base, "/api/label",
                             {"instance_id": query["instance_id"],
                              "permutation": list(truth.assignment)})
        assert status == 200
    _, csv_body = get(base, "/api/curve")
    sim = ActiveLoopEngine(ds, "abm-mi", rounds=rounds, split_seed=17, cfg=CFG)
    sim.run_with_simulated_oracle()
    assert csv_body == curve_csv(sim.records)
    np.testing.assert_array_equal(srv.engine.model.theta, sim.model.theta)
