"""HTTP JSON API hosting live interactive mining sessions."""
from __future__ import annotations

import itertools
import os
import threading
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .data import TransactionDatabase, load_database
from .preference import RankedQuery
from .session import Session, SessionConfig


class CreateSessionRequest(BaseModel):
    dataset: str
    theta: float
    jmax: float = 1.0
    k: int = 10
    ell: int = 1
    eta: float = 0.13
    agg: str = "exponential"
    features: str = "ITLF"
    seed: int = 0
    iterations: int = Field(default=100, ge=1)


class RankingRequest(BaseModel):
    order: list[int]


@dataclass
class LiveSession:
    session: Session
    lock: threading.Lock = field(default_factory=threading.Lock)
    query_ids: dict[int, int] = field(default_factory=dict)  # pattern id -> index
    history: list[dict] = field(default_factory=list)
    _id_counter: "itertools.count" = field(default_factory=itertools.count)


def _pattern_payload(live: LiveSession) -> list[dict]:
    session = live.session
    live.query_ids = {}
    payload = []
    for idx, p in enumerate(session.live_query):
        pid = next(live._id_counter)
        live.query_ids[pid] = idx
        payload.append(
            {
                "id": pid,
                "items": list(p.items),
                "support": p.support,
                "length": len(p.items),
                "quality": session.quality_of(p),
            }
        )
    return payload


def resolve_theta(theta: float, db: TransactionDatabase) -> int:
    """Absolute int threshold, or relative in (0,1) scaled by ceil."""
    if 0 < theta < 1:
        return -int(-theta * db.n_transactions // 1)
    if theta != int(theta) or theta < 1:
        raise ValueError("theta must be a positive integer or a fraction in (0,1)")
    return int(theta)


def create_app(dataset_dir: str | None = None) -> FastAPI:
    dataset_dir = dataset_dir or os.environ.get("DIVMINE_DATA", ".")
    app = FastAPI(title="divmine sessions")
    sessions: dict[int, LiveSession] = {}
    next_sid = itertools.count(1)
    registry_lock = threading.Lock()

    def get_live(sid: int) -> LiveSession:
        live = sessions.get(sid)
        if live is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return live

    @app.post("/sessions")
    def create_session(req: CreateSessionRequest):
        path = os.path.join(dataset_dir, req.dataset)
        if not os.path.exists(path):
            path = req.dataset
        if not os.path.exists(path):
            raise HTTPException(status_code=400, detail=f"dataset {req.dataset!r} not found")
        try:
            db = load_database(path)
            cfg = SessionConfig(
                theta=resolve_theta(req.theta, db),
                jmax=req.jmax,
                k=req.k,
                ell=req.ell,
                eta=req.eta,
                agg_kind=req.agg,
                features=req.features,
                seed=req.seed,
                iterations=req.iterations,
            )
            live = LiveSession(session=Session(db, cfg))
            live.session.next_query()
        except (ValueError, RuntimeError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        with registry_lock:
            sid = next(next_sid)
            sessions[sid] = live
        return {
            "session_id": sid,
            "iteration": live.session.t + 1,
            "query": _pattern_payload(live),
        }

    @app.post("/sessions/{sid}/ranking")
    def submit_ranking(sid: int, req: RankingRequest):
        live = get_live(sid)
        with live.lock:
            session = live.session
            if sorted(req.order) != sorted(live.query_ids):
                raise HTTPException(
                    status_code=409,
                    detail="ranking must be a permutation of the live query ids",
                )
            query = session.live_query
            ranks = [0] * len(query)
            for pos, pid in enumerate(req.order):
                ranks[live.query_ids[pid]] = pos + 1
            iteration = session.t + 1
            query_snapshot = [list(p.items) for p in query]
            session.advance(RankedQuery(patterns=tuple(query), ranks=tuple(ranks)))
            live.history.append(
                {
                    "iteration": iteration,
                    "query": query_snapshot,
                    "ranking": list(req.order),
                }
            )
            if session.done:
                return {"done": True, "iterations": session.cfg.iterations}
            session.next_query()
            return {"iteration": session.t + 1, "query": _pattern_payload(live)}

    @app.get("/sessions/{sid}")
    def get_session(sid: int):
        live = get_live(sid)
        with live.lock:
            session = live.session
            layout = session.layout
            top_items: list[tuple[int, float]] = []
            if layout.items:
                off = layout.items_offset
                weights = session.w[off : off + layout.n_items]
                order = sorted(
                    range(layout.n_items), key=lambda i: -abs(weights[i])
                )[:10]
                top_items = [(i, float(weights[i])) for i in order if weights[i] != 0.0]
            return {
                "iteration": session.t + 1,
                "weights_summary": {"top_items": top_items},
                "history": live.history,
            }

    return app
