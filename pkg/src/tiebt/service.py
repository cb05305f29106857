"""HTTP service hosting comparative-judgement studies.

Judgements are immutable facts, so each study persists as an append-only
newline-delimited JSON event log plus a static definition file; replaying the
log reconstructs judges, counters and exports exactly.  Every write is
flushed and fsynced before the request is acknowledged.
"""

from __future__ import annotations

import json
import os
import secrets
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel, Field

from .gibbs import SamplerConfig, run_gibbs
from .io import OUTCOMES, events_to_dataset
from .model import tie_probability
from .spatial import WardGraph, build_spatial_covariance


class WardDef(BaseModel):
    label: str
    region: str
    geometry: dict | None = None


class StudyCreate(BaseModel):
    name: str
    wards: list[WardDef]
    adjacency: list[tuple[str, str]] = Field(default_factory=list)
    target_comparisons: int = 30
    client_token: str | None = None


class JudgeCreate(BaseModel):
    familiar_regions: list[str]


class JudgementIn(BaseModel):
    ward_i: str
    ward_j: str
    outcome: str
    event_token: str | None = None


class FitRequest(BaseModel):
    n_iterations: int = 5000
    burn_in: int = 100
    seed: int = 0
    learn_alpha2: bool = True
    fixed_delta: float | None = None
    alpha2: float = 1.0


@dataclass
class JudgeState:
    id: str
    familiar_regions: list[str]
    comparisons_made: int = 0


@dataclass
class StudyState:
    id: str
    definition: dict
    judges: dict[str, JudgeState] = field(default_factory=dict)
    events: list[dict] = field(default_factory=list)
    seen_tokens: dict[str, int] = field(default_factory=dict)
    next_seq: int = 0
    fit_running: bool = False
    latest_fit: str | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def labels(self) -> list[str]:
        return [w["label"] for w in self.definition["wards"]]

    @property
    def regions(self) -> dict[str, str]:
        return {w["label"]: w["region"] for w in self.definition["wards"]}

    def familiar_wards(self, judge: JudgeState) -> list[str]:
        regions = set(judge.familiar_regions)
        return [w["label"] for w in self.definition["wards"] if w["region"] in regions]

    def judgement_events(self) -> list[dict]:
        return [e for e in self.events if e["type"] == "judgement"]


class StudyStore:
    """Durable study registry backed by per-study append-only event logs."""

    def __init__(self, data_dir):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._index_path = self.data_dir / "index.json"
        self._index = {"studies": [], "client_tokens": {}}
        if self._index_path.exists():
            self._index = json.loads(self._index_path.read_text())
        self._studies: dict[str, StudyState] = {}
        self._lock = threading.Lock()
        for sid in self._index["studies"]:
            self._studies[sid] = self._load_study(sid)

    # -- persistence -------------------------------------------------------

    def _study_dir(self, sid: str) -> Path:
        return self.data_dir / sid

    def _write_index(self) -> None:
        tmp = self._index_path.with_suffix(".tmp")
        tmp.write_text(json.dumps(self._index, indent=1))
        os.replace(tmp, self._index_path)

    def _load_study(self, sid: str) -> StudyState:
        sdir = self._study_dir(sid)
        definition = json.loads((sdir / "study.json").read_text())
        state = StudyState(id=sid, definition=definition)
        log = sdir / "events.jsonl"
        if log.exists():
            with open(log) as fh:
                for line in fh:
                    if line.strip():
                        self._apply_event(state, json.loads(line))
        fits = sorted((sdir / "fits").glob("*.json")) if (sdir / "fits").exists() else []
        completed = [p.stem for p in fits if self._fit_status(sid, p.stem) == "done"]
        if completed:
            state.latest_fit = completed[-1]
        return state

    @staticmethod
    def _apply_event(state: StudyState, event: dict) -> None:
        state.next_seq = max(state.next_seq, event["seq"] + 1)
        if event["type"] == "judge":
            state.judges[event["judge_id"]] = JudgeState(
                id=event["judge_id"], familiar_regions=event["familiar_regions"]
            )
        elif event["type"] == "judgement":
            state.events.append(event)
            state.judges[event["judge_id"]].comparisons_made += 1
            if event.get("event_token"):
                state.seen_tokens[event["event_token"]] = event["seq"]

    def _append_event(self, state: StudyState, event: dict) -> None:
        # Caller holds the study lock: appends are serialized per study.
        event["seq"] = state.next_seq
        path = self._study_dir(state.id) / "events.jsonl"
        with open(path, "a") as fh:
            fh.write(json.dumps(event) + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        self._apply_event(state, event)

    # -- study lifecycle ---------------------------------------------------

    def create_study(self, payload: StudyCreate) -> StudyState:
        with self._lock:
            if payload.client_token:
                sid = self._index["client_tokens"].get(payload.client_token)
                if sid is not None:
                    return self._studies[sid]
            labels = [w.label for w in payload.wards]
            if not labels:
                raise ValueError("ward table must be non-empty")
            if len(set(labels)) != len(labels):
                raise ValueError("ward labels must be unique")
            known = set(labels)
            for a, b in payload.adjacency:
                if a not in known or b not in known:
                    raise ValueError(f"adjacency edge ({a}, {b}) references unknown ward")
            sid = secrets.token_hex(6)
            sdir = self._study_dir(sid)
            sdir.mkdir(parents=True)
            definition = {
                "name": payload.name,
                "wards": [w.model_dump() for w in payload.wards],
                "adjacency": [list(e) for e in payload.adjacency],
                "target_comparisons": payload.target_comparisons,
                "status": "active",
            }
            (sdir / "study.json").write_text(json.dumps(definition, indent=1))
            state = StudyState(id=sid, definition=definition)
            self._studies[sid] = state
            self._index["studies"].append(sid)
            if payload.client_token:
                self._index["client_tokens"][payload.client_token] = sid
            self._write_index()
            return state

    def get_study(self, sid: str) -> StudyState:
        state = self._studies.get(sid)
        if state is None:
            raise KeyError(sid)
        return state

    def register_judge(self, state: StudyState, familiar_regions: list[str]) -> JudgeState:
        if not familiar_regions:
            raise ValueError("familiarity set must be non-empty")
        known = set(w["region"] for w in state.definition["wards"])
        unknown = set(familiar_regions) - known
        if unknown:
            raise ValueError(f"unknown regions: {sorted(unknown)}")
        with state.lock:
            judge_id = secrets.token_urlsafe(9)
            self._append_event(
                state,
                {
                    "type": "judge",
                    "judge_id": judge_id,
                    "familiar_regions": list(familiar_regions),
                },
            )
            return state.judges[judge_id]

    def record_judgement(
        self, state: StudyState, judge: JudgeState, payload: JudgementIn
    ) -> tuple[int, bool]:
        """Append one judgement; returns (counter, was_duplicate)."""
        if payload.outcome not in OUTCOMES:
            raise ValueError(f"outcome must be one of {OUTCOMES}")
        if payload.ward_i == payload.ward_j:
            raise ValueError("a ward cannot be compared with itself")
        familiar = set(state.familiar_wards(judge))
        for label in (payload.ward_i, payload.ward_j):
            if label not in set(state.labels):
                raise ValueError(f"unknown ward {label!r}")
            if label not in familiar:
                raise ValueError(f"ward {label!r} is outside the judge's familiar regions")
        with state.lock:
            if payload.event_token and payload.event_token in state.seen_tokens:
                return judge.comparisons_made, True
            self._append_event(
                state,
                {
                    "type": "judgement",
                    "judge_id": judge.id,
                    "ward_i": payload.ward_i,
                    "ward_j": payload.ward_j,
                    "outcome": payload.outcome,
                    "timestamp": time.time(),
                    "event_token": payload.event_token,
                },
            )
            return judge.comparisons_made, False

    # -- fits --------------------------------------------------------------

    def _fit_path(self, sid: str, fit_id: str) -> Path:
        return self._study_dir(sid) / "fits" / f"{fit_id}.json"

    def _fit_status(self, sid: str, fit_id: str) -> str:
        path = self._fit_path(sid, fit_id)
        if not path.exists():
            return "missing"
        return json.loads(path.read_text()).get("status", "missing")

    def read_fit(self, sid: str, fit_id: str) -> dict:
        path = self._fit_path(sid, fit_id)
        if not path.exists():
            raise KeyError(fit_id)
        return json.loads(path.read_text())

    def start_fit(self, state: StudyState, request: FitRequest) -> str:
        with state.lock:
            if state.fit_running:
                raise RuntimeError("a fit is already running for this study")
            if not state.judgement_events():
                raise ValueError("study has no judgements to fit")
            if not state.definition["adjacency"]:
                raise ValueError("study has no adjacency information")
            state.fit_running = True
        fit_id = secrets.token_hex(4)
        (self._study_dir(state.id) / "fits").mkdir(exist_ok=True)
        self._fit_path(state.id, fit_id).write_text(json.dumps({"status": "running"}))
        thread = threading.Thread(
            target=self._run_fit, args=(state, fit_id, request), daemon=True
        )
        thread.start()
        return fit_id

    def _run_fit(self, state: StudyState, fit_id: str, request: FitRequest) -> None:
        try:
            result = fit_study(state, request)
            result["status"] = "done"
            result["fit_id"] = fit_id
            self._fit_path(state.id, fit_id).write_text(json.dumps(result))
            with state.lock:
                state.latest_fit = fit_id
        except Exception as exc:  # surfaced through the fit record
            self._fit_path(state.id, fit_id).write_text(
                json.dumps({"status": "failed", "error": str(exc)})
            )
        finally:
            with state.lock:
                state.fit_running = False


def fit_study(state: StudyState, request: FitRequest) -> dict:
    """Fit the tie model to the study's exported dataset; pure given the snapshot."""
    labels = state.labels
    index = {label: k for k, label in enumerate(labels)}
    dataset = events_to_dataset(state.judgement_events(), index)
    adjacency = np.zeros((len(labels), len(labels)))
    for a, b in state.definition["adjacency"]:
        adjacency[index[a], index[b]] = 1.0
        adjacency[index[b], index[a]] = 1.0
    graph = WardGraph(labels=labels, adjacency=adjacency)
    prior = build_spatial_covariance(graph, alpha2=request.alpha2)
    config = SamplerConfig(
        n_iterations=request.n_iterations,
        burn_in=request.burn_in,
        seed=request.seed,
        learn_alpha2=request.learn_alpha2,
        fixed_delta=request.fixed_delta,
    )
    samples = run_gibbs(dataset, prior, config)
    summary = samples.summary()
    delta_med = summary["delta"]["median"]
    diffs = np.linspace(-6, 6, 121)
    curve = [
        [float(d), tie_probability(np.array([d, 0.0]), 0, 1, delta_med)]
        for d in diffs
    ]
    return {
        "seed": request.seed,
        "n_comparisons": dataset.n_comparisons,
        "n_ties": dataset.n_tie_events,
        "wards": [
            {"label": label, **ward}
            for label, ward in zip(labels, summary["wards"])
        ],
        "delta": summary["delta"],
        "alpha2": summary["alpha2"],
        "tie_curve": curve,
    }


def export_payload(state: StudyState) -> dict:
    """Aggregated export with headline tie share; a pure fold over events."""
    labels = state.labels
    index = {label: k for k, label in enumerate(labels)}
    dataset = events_to_dataset(state.judgement_events(), index)
    total = dataset.n_comparisons
    ties = dataset.n_tie_events
    return {
        "labels": labels,
        "wins": dataset.wins.tolist(),
        "ties": dataset.ties.tolist(),
        "skips": dataset.skips,
        "n_comparisons": total,
        "n_ties": ties,
        "tie_percentage": round(100.0 * ties / total, 1) if total else 0.0,
    }


def create_app(data_dir, seed: int | None = None) -> FastAPI:
    store = StudyStore(data_dir)
    rng = np.random.default_rng(seed)
    rng_lock = threading.Lock()
    app = FastAPI(title="tiebt study service")
    app.state.store = store

    def _study(sid: str) -> StudyState:
        try:
            return store.get_study(sid)
        except KeyError:
            raise HTTPException(404, f"unknown study {sid!r}")

    def _judge(state: StudyState, jid: str) -> JudgeState:
        judge = state.judges.get(jid)
        if judge is None:
            raise HTTPException(404, f"unknown judge {jid!r}")
        return judge

    @app.post("/studies", status_code=201)
    def create_study(payload: StudyCreate):
        try:
            state = store.create_study(payload)
        except ValueError as exc:
            raise HTTPException(400, str(exc))
        return {
            "id": state.id,
            "name": state.definition["name"],
            "n_wards": len(state.labels),
            "status": state.definition["status"],
        }

    @app.post("/studies/{sid}/judges", status_code=201)
    def register_judge(sid: str, payload: JudgeCreate):
        state = _study(sid)
        try:
            judge = store.register_judge(state, payload.familiar_regions)
        except ValueError as exc:
            raise HTTPException(400, str(exc))
        return {
            "id": judge.id,
            "familiar_regions": judge.familiar_regions,
            "comparisons_made": judge.comparisons_made,
            "target_comparisons": state.definition["target_comparisons"],
        }

    @app.get("/studies/{sid}/judges/{jid}/next-pair")
    def next_pair(sid: str, jid: str):
        state = _study(sid)
        judge = _judge(state, jid)
        wards = state.familiar_wards(judge)
        if len(wards) < 2:
            raise HTTPException(409, "fewer than two familiar wards; no pair available")
        with rng_lock:
            a_idx, b_idx = rng.choice(len(wards), size=2, replace=False)
            flip = rng.random() < 0.5
        pair = (wards[int(a_idx)], wards[int(b_idx)])
        pair = tuple(sorted(pair))
        left, right = (pair[1], pair[0]) if flip else pair
        return {
            "ward_left": left,
            "ward_right": right,
            "comparisons_made": judge.comparisons_made,
            "target_comparisons": state.definition["target_comparisons"],
        }

    @app.post("/studies/{sid}/judges/{jid}/judgements", status_code=201)
    def record_judgement(sid: str, jid: str, payload: JudgementIn):
        state = _study(sid)
        judge = _judge(state, jid)
        try:
            counter, duplicate = store.record_judgement(state, judge, payload)
        except ValueError as exc:
            raise HTTPException(400, str(exc))
        return {"comparisons_made": counter, "duplicate": duplicate}

    @app.get("/studies/{sid}/export")
    def export(sid: str, format: str = Query("json")):
        state = _study(sid)
        if format == "json":
            return export_payload(state)
        if format == "csv":
            import io as _io

            buf = _io.StringIO()
            events = [
                {
                    "judge_id": e["judge_id"],
                    "ward_i": e["ward_i"],
                    "ward_j": e["ward_j"],
                    "outcome": e["outcome"],
                    "timestamp": e["timestamp"],
                }
                for e in state.judgement_events()
            ]
            _write_csv_to(buf, events)
            return PlainTextResponse(buf.getvalue(), media_type="text/csv")
        raise HTTPException(400, "format must be 'json' or 'csv'")

    @app.post("/studies/{sid}/fits", status_code=202)
    def start_fit(sid: str, request: FitRequest):
        state = _study(sid)
        try:
            fit_id = store.start_fit(state, request)
        except RuntimeError as exc:
            raise HTTPException(409, str(exc))
        except ValueError as exc:
            raise HTTPException(400, str(exc))
        return {"fit_id": fit_id, "status": "running"}

    @app.get("/studies/{sid}/fits/{fit_id}")
    def fit_status(sid: str, fit_id: str):
        _study(sid)
        try:
            record = store.read_fit(sid, fit_id)
        except KeyError:
            raise HTTPException(404, f"unknown fit {fit_id!r}")
        if record.get("status") == "done":
            return {"fit_id": fit_id, "status": "done"}
        return record | {"fit_id": fit_id}

    @app.get("/studies/{sid}/results")
    def results(sid: str):
        state = _study(sid)
        if state.latest_fit is None:
            raise HTTPException(404, "no completed fit for this study")
        return store.read_fit(sid, state.latest_fit)

    @app.get("/studies/{sid}/wards")
    def wards(sid: str):
        state = _study(sid)
        features = [
            {
                "type": "Feature",
                "properties": {"name": w["label"], "region": w["region"]},
                "geometry": w.get("geometry"),
            }
            for w in state.definition["wards"]
        ]
        return {
            "labels": state.labels,
            "regions": [w["region"] for w in state.definition["wards"]],
            "geojson": {"type": "FeatureCollection", "features": features},
        }

    return app


def _write_csv_to(buf, events) -> None:
    import csv

    from .io import COMPARISON_FIELDS

    writer = csv.DictWriter(buf, fieldnames=COMPARISON_FIELDS)
    writer.writeheader()
    for event in events:
        writer.writerow(event)
