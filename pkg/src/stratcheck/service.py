"""HTTP face of the checker.

Thin adapters over the same core calls the CLI makes; result records
are serialized by the shared serializer, so a verify or bisim response
body is byte-identical to the CLI's stdout line for the same inputs.

Models are addressed by the SHA-256 of their spec text: resubmitting a
spec is a cache hit and ids are stable across restarts. Stored entries
are never mutated; reductions are cached per parameter set. Long
verification runs can be detached (`wait=false`) and polled via
/models/{id}/results/{job}; every run is bounded by a wall-clock
timeout (default 60 s) and reports a distinct "timeout" status when it
trips.
"""

import hashlib
import threading
from pathlib import Path

from fastapi import FastAPI, Form, HTTPException, Request, UploadFile
from fastapi.responses import Response
from fastapi.staticfiles import StaticFiles

from .bisim import check_a_bisimulation, expand_relation
from .cli import dumps_record
from .errors import (
    SpecError,
    StateLimitExceeded,
    StrategySpaceExceeded,
    StratcheckError,
    VerificationTimeout,
)
from .model import build_global_model, graph_payload
from .por import ReductionParams, build_reduced_model, default_params, mark_reduction
from .spec_lang import parse_relation, parse_spec, validate
from .verify import verify_approx, verify_bruteforce, verify_dfs

DEFAULT_TIMEOUT = 60.0

_ENGINES = {
    "bruteforce": verify_bruteforce,
    "approx": verify_approx,
    "dfs": verify_dfs,
}


class _Entry:
    def __init__(self, text, amas, model):
        self.text = text
        self.amas = amas
        self.model = model
        self.reductions = {}  # params -> ReductionResult, immutable values
        self.jobs = {}  # job id -> record/status dict
        self.next_job = 0


class SessionStore:
    """In-memory model cache keyed by spec-text hash."""

    def __init__(self):
        self._lock = threading.Lock()
        self._entries = {}
        self.hits = 0
        self.misses = 0

    def put(self, text):
        digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
        with self._lock:
            entry = self._entries.get(digest)
            if entry is not None:
                self.hits += 1
                return digest, entry, True
            self.misses += 1
        amas = validate(parse_spec(text))  # parse outside the lock
        model = build_global_model(amas)
        with self._lock:
            entry = self._entries.get(digest)
            if entry is None:
                entry = _Entry(text, amas, model)
                self._entries[digest] = entry
        return digest, entry, False

    def get(self, digest):
        with self._lock:
            entry = self._entries.get(digest)
        if entry is None:
            raise HTTPException(status_code=404, detail="unknown model id")
        return entry

    def stats(self):
        with self._lock:
            return {"models": len(self._entries), "hits": self.hits,
                    "misses": self.misses}

    def lock(self):
        return self._lock


def _split_query(value):
    return [x.strip() for x in value.split(",") if x.strip()]


def _record_response(record, status_code=200):
    return Response(content=dumps_record(record), status_code=status_code,
                    media_type="application/json")


def _bad_request(e):
    return HTTPException(status_code=400, detail=str(e))


def _reduction_params(amas, body):
    params = default_params(amas, c3=body.get("c3", "safe"))
    coalition = body.get("coalition")
    if coalition:
        for name in coalition:
            amas.agent_index(name)
        params = ReductionParams(coalition=tuple(coalition),
                                 visible=params.visible, c3=params.c3)
    props = body.get("props")
    if props is not None:
        for p in props:
            if p not in amas.propositions:
                raise SpecError("unknown proposition %r" % p)
        params = ReductionParams(coalition=params.coalition,
                                 visible=frozenset(props) | amas.persistent,
                                 c3=params.c3)
    return params


def _reduce_for(entry, params):
    got = entry.reductions.get(params)
    if got is None:
        got = build_reduced_model(entry.amas, params)
        entry.reductions[params] = got
    return got


def _run_verify(entry, body):
    method = body.get("method", "bruteforce")
    if method not in _ENGINES:
        raise SpecError("unknown method %r" % method)
    coalition = body.get("coalition")
    coal = tuple(coalition) if coalition else None
    timeout = body.get("timeout", DEFAULT_TIMEOUT)
    if body.get("por"):
        model = _reduce_for(entry, _reduction_params(entry.amas, body)).model
    else:
        model = entry.model
    res = _ENGINES[method](model, coalition=coal, timeout=timeout)
    return res.record()


def create_app(store=None):
    store = store if store is not None else SessionStore()
    app = FastAPI(title="stratcheck service")

    @app.exception_handler(SpecError)
    async def _spec_error(request, exc):
        return _record_response({"detail": str(exc)}, status_code=400)

    @app.exception_handler(StratcheckError)
    async def _core_error(request, exc):
        if isinstance(exc, (StateLimitExceeded, StrategySpaceExceeded)):
            return _record_response({"detail": str(exc)}, status_code=422)
        return _record_response({"detail": str(exc)}, status_code=500)

    @app.post("/models")
    async def post_model(request: Request):
        text = (await request.body()).decode("utf-8")
        digest, entry, cached = store.put(text)
        return _record_response({
            "id": digest,
            "states": entry.model.n_states(),
            "edges": entry.model.n_edges(),
            "cached": cached,
        })

    @app.get("/models/{model_id}/graph")
    async def get_graph(model_id: str, reduced: bool = False,
                        c3: str = "aggressive", coalition: str = None,
                        props: str = None):
        entry = store.get(model_id)
        if not reduced:
            return _record_response(graph_payload(entry.model))
        if c3 not in ("safe", "aggressive"):
            raise HTTPException(status_code=400, detail="c3 must be safe or aggressive")
        body = {"c3": c3}
        if coalition is not None:
            body["coalition"] = _split_query(coalition)
        if props is not None:
            body["props"] = _split_query(props)
        params = _reduction_params(entry.amas, body)
        result = _reduce_for(entry, params)
        with store.lock():  # highlight flags live on the shared full model
            mark_reduction(entry.model, result.model)
            payload = graph_payload(entry.model, highlight_reduced=True)
        return _record_response(payload)

    @app.post("/models/{model_id}/reduce")
    async def post_reduce(model_id: str, request: Request):
        entry = store.get(model_id)
        raw = await request.body()
        body = _json_body(raw)
        params = _reduction_params(entry.amas, body)
        result = _reduce_for(entry, params)
        record = {
            "full_states": entry.model.n_states(),
            "full_edges": entry.model.n_edges(),
            "reduced_states": result.model.n_states(),
            "reduced_edges": result.model.n_edges(),
            "ratio": result.model.n_states() / entry.model.n_states(),
            "mode": params.c3,
        }
        return _record_response(record)

    @app.post("/models/{model_id}/verify")
    async def post_verify(model_id: str, request: Request):
        entry = store.get(model_id)
        body = _json_body(await request.body())
        if body.get("wait", True):
            try:
                return _record_response(_run_verify(entry, body))
            except VerificationTimeout:
                return _record_response({"status": "timeout"})
        with store.lock():
            job = str(entry.next_job)
            entry.next_job += 1
            entry.jobs[job] = {"status": "running"}

        def run():
            try:
                record = _run_verify(entry, body)
            except VerificationTimeout:
                record = {"status": "timeout"}
            except StratcheckError as e:
                record = {"status": "error", "detail": str(e)}
            with store.lock():
                entry.jobs[job] = record

        threading.Thread(target=run, daemon=True).start()
        return _record_response({"job": job, "status": "running"})

    @app.get("/models/{model_id}/results/{job}")
    async def get_result(model_id: str, job: str):
        entry = store.get(model_id)
        with store.lock():
            record = entry.jobs.get(job)
        if record is None:
            raise HTTPException(status_code=404, detail="unknown job")
        return _record_response(record)

    @app.post("/bisim")
    async def post_bisim(left: UploadFile, right: UploadFile,
                         relation: UploadFile, coalition: str = Form(None),
                         strict: bool = Form(False)):
        left_amas = validate(parse_spec((await left.read()).decode("utf-8")))
        right_amas = validate(parse_spec((await right.read()).decode("utf-8")))
        coal = None
        if coalition:
            coal = tuple(x.strip() for x in coalition.split(",") if x.strip())
        relspec = parse_relation((await relation.read()).decode("utf-8"),
                                 left_amas, right_amas, coalition=coal)
        lm = build_global_model(left_amas)
        rm = build_global_model(right_amas)
        pairs = expand_relation(lm, rm, relspec)
        verdict = check_a_bisimulation(lm, rm, pairs, relspec.coalition,
                                       strict=strict)
        return _record_response(verdict.record())

    @app.get("/stats")
    async def get_stats():
        return _record_response(store.stats())

    ui_dir = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if ui_dir.is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True),
                  name="ui")

    return app


def _json_body(raw):
    if not raw:
        return {}
    import json

    try:
        body = json.loads(raw.decode("utf-8"))
    except ValueError as e:
        raise HTTPException(status_code=400, detail="bad JSON body: %s" % e)
    if not isinstance(body, dict):
        raise HTTPException(status_code=400, detail="JSON object expected")
    return body
