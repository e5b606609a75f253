"""Live annotation sessions over HTTP.

Wraps one ActiveLoopEngine in a small JSON API.  Queries and labels go
through the same state machine as the simulated loop, so a client that
answers every query with the ground truth reproduces the simulated curve
bit for bit.  A session lock serializes mutations; retraining therefore
blocks queries, while the health endpoint stays responsive.
"""

import json
import threading
from dataclasses import replace
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

from . import abm as _abm
from . import ssvm as _ssvm
from .active import ActiveLoopEngine, LoopConfig, curve_csv
from .errors import AbmatchError, InvalidInputError, PoolExhausted


def query_payload(engine: ActiveLoopEngine) -> dict:
    """The pending query with the model's suggestion and uncertainty.

    Reads the engine's caches without writing, so serving a query leaves
    the session state exactly as the simulated loop would have it.
    """
    instance_id = engine.pending_query()
    x = engine.dataset.by_id(instance_id)
    if engine.learner == "abm":
        gcfg = engine.cfg.game_cfg
        if instance_id in engine._pool_cache:
            gcfg = replace(gcfg, warm_start=engine._pool_cache[instance_id])
        suggested, eq = _abm.predict(engine.model, x, gcfg)
        confidence = eq.adversary_marginals
        value_scores = _abm.information_profile(eq, engine.cfg.include_self)
    else:
        suggested = _ssvm.ssvm_predict(engine.model, x)
        psi = x.features @ engine.model.theta
        confidence = np.asarray(_ssvm.platt_prob(engine._platt, psi))
        value_scores, _ = _ssvm.ssvm_uncertainty(engine.model, engine._platt, x)
    return {
        "instance_id": instance_id,
        "n": x.n,
        "boxes_t": x.meta.get("boxes_t", []),
        "boxes_t1": x.meta.get("boxes_t1", []),
        "suggested": list(suggested.assignment),
        "confidence": confidence.tolist(),
        "value_scores": [float(v) for v in value_scores],
    }


def state_payload(engine: ActiveLoopEngine) -> dict:
    return {
        "round": engine.round,
        "n_labeled": len(engine.state.labeled_ids),
        "n_pool": len(engine.state.unlabeled_ids),
        "hamming_rate_history": [r.hamming_rate for r in engine.records],
        "done": engine.done,
        "strategy": engine.strategy,
    }


class _Handler(BaseHTTPRequestHandler):
    def _reply(self, status: int, body, content_type="application/json"):
        data = body.encode("utf-8") if isinstance(body, str) \
            else json.dumps(body).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(data)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, fmt, *args):  # quiet by default
        if self.server.verbose:
            super().log_message(fmt, *args)

    def do_GET(self):
        path = self.path.split("?")[0]
        if path == "/api/health":
            self._reply(200, {"ok": True})
            return
        engine = self.server.engine
        with self.server.session_lock:
            if path == "/api/state":
                self._reply(200, state_payload(engine))
            elif path == "/api/query":
                if engine.done:
                    self._reply(404, {"error": "session finished"})
                else:
                    self._reply(200, query_payload(engine))
            elif path == "/api/curve":
                self._reply(200, curve_csv(engine.records), content_type="text/csv")
            else:
                self._reply(404, {"error": f"no such endpoint {path}"})

    def do_POST(self):
        path = self.path.split("?")[0]
        if path != "/api/label":
            self._reply(404, {"error": f"no such endpoint {path}"})
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            body = json.loads(self.rfile.read(length) or b"{}")
            instance_id = body["instance_id"]
            permutation = body["permutation"]
        except (ValueError, KeyError) as exc:
            self._reply(400, {"error": f"malformed label body: {exc}"})
            return
        engine = self.server.engine
        with self.server.session_lock:
            try:
                pending = engine.pending_query() if not engine.done else None
                if instance_id != pending:
                    self._reply(409, {"error": "stale label",
                                      "pending": pending})
                    return
                engine.submit_label(instance_id, tuple(permutation))
            except PoolExhausted:
                self._reply(409, {"error": "session finished"})
                return
            except InvalidInputError as exc:
                self._reply(400, {"error": str(exc)})
                return
            except AbmatchError as exc:
                self._reply(500, {"error": str(exc)})
                return
            self._reply(200, {"accepted": True, "next_round": engine.round,
                              "done": engine.done})


def make_server(dataset, strategy: str, rounds: int, seed: int,
                cfg: LoopConfig = LoopConfig(), port: int = 0,
                verbose: bool = False) -> ThreadingHTTPServer:
    """Bind a session server; port 0 picks an ephemeral port (for tests)."""
    engine = ActiveLoopEngine(dataset, strategy, rounds, seed, cfg)
    server = ThreadingHTTPServer(("127.0.0.1", port), _Handler)
    server.engine = engine
    server.session_lock = threading.Lock()
    server.verbose = verbose
    return server


def serve_forever(dataset, strategy: str, rounds: int, seed: int,
                  cfg: LoopConfig = LoopConfig(), port: int = 8008) -> int:
    try:
        server = make_server(dataset, strategy, rounds, seed, cfg, port=port,
                             verbose=True)
    except OSError as exc:
        print(f"error: cannot bind port {port}: {exc}")
        return 1
    host, bound_port = server.server_address
    print(f"serving {strategy} session on http://{host}:{bound_port} "
          f"(rounds={rounds}, seed={seed})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0
