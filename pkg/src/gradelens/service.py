"""HTTP surface: dataset upload, model building, predictions, what-if.

Read endpoints operate on an immutable snapshot (matrix value plus loaded
models), so any number run concurrently; uploads and builds take a lock
and swap the snapshot atomically, leaving in-flight reads on the old one.
The what-if endpoint folds a virtual student into a copy of the matrix and
never touches stored state.

Error contract: 400 malformed input, 404 unknown student/course/model/
dataset, 409 model built from a different dataset version, 503 no usable
dataset loaded.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Literal, Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict

from .data import GradeScale, RatingsMatrix, ingest_records
from .errors import (
    DegenerateMatrix,
    FingerprintMismatch,
    GradeLensError,
    UnknownCourse,
    UnknownDataset,
    UnknownModel,
    UnknownStudent,
    UnknownTerm,
)
from .predict import (
    ALGORITHM_KIND,
    NeighborhoodConfig,
    Prediction,
    predict,
    whatif_item_predictions,
    whatif_user_predictions,
)
from .similarity import ITEM_ITEM, SimilarityModel, WeightingParams, build_similarity_model
from .store import Store, StoredModelHandle

KIND_TO_ALGORITHM = {kind: alg for alg, kind in ALGORITHM_KIND.items()}

_NOT_FOUND = (UnknownStudent, UnknownCourse, UnknownModel, UnknownDataset, UnknownTerm)


@dataclass(frozen=True)
class Snapshot:
    """What read endpoints see: one dataset version, nothing mutable."""

    dataset_id: Optional[str]
    matrix: Optional[RatingsMatrix]


# -- request/response bodies ----------------------------------------------


class ScaleBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    mapping: dict[str, float]
    min_points: float
    max_points: float
    aliases: list[str] = []


class DatasetUpload(BaseModel):
    model_config = ConfigDict(extra="forbid")
    records_csv: str
    dataset_id: Optional[str] = None
    scale: Optional[ScaleBody] = None


class WeightingBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    significance_threshold: Optional[int] = None
    amplification_exponent: Optional[float] = None
    min_corated: int = 2


class ModelBuildRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    algorithm: Literal["user_based", "item_based"]
    weighting: Optional[WeightingBody] = None
    model_id: Optional[str] = None


class HistoryEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")
    course_id: str
    grade_points: float


class WhatIfBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    grade_history: list[HistoryEntry]
    candidate_courses: list[str]
    algorithm: Literal["user_based", "item_based"] = "user_based"
    k: int | Literal["all"] = 10
    weighting: Optional[WeightingBody] = None
    model_id: Optional[str] = None
    positive_only: bool = True


def _prediction_out(p: Prediction) -> dict:
    return {
        "course_id": p.course_id,
        "value": p.value,
        "raw_value": p.raw_value,
        "fallback_level": p.fallback_level,
        "neighborhood_size_used": p.neighborhood_size_used,
        "clamped": p.clamped,
    }


def _weighting_params(body: Optional[WeightingBody]) -> WeightingParams:
    if body is None:
        return WeightingParams()
    return WeightingParams(
        significance_threshold=body.significance_threshold,
        amplification_exponent=body.amplification_exponent,
        min_corated=body.min_corated,
    )


def _parse_k(raw: str):
    if raw == "all":
        return "all"
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f'k must be a positive integer or "all", got {raw!r}') from None


def create_app(store: Store | None = None, dataset_id: str | None = None) -> FastAPI:
    """Build the service; optionally preload a stored dataset."""
    store = store if store is not None else Store()
    app = FastAPI(title="gradelens", version="1.0")

    state_lock = threading.Lock()
    model_cache: dict[str, tuple[SimilarityModel, StoredModelHandle]] = {}
    if dataset_id is not None:
        app.state.snapshot = Snapshot(dataset_id, store.load_dataset(dataset_id))
    else:
        app.state.snapshot = Snapshot(None, None)

    # -- error mapping -----------------------------------------------------

    @app.exception_handler(GradeLensError)
    async def _domain_error(request: Request, exc: GradeLensError):
        if isinstance(exc, _NOT_FOUND):
            status = 404
        elif isinstance(exc, FingerprintMismatch):
            status = 409
        elif isinstance(exc, DegenerateMatrix):
            status = 503
        else:
            status = 400
        return JSONResponse({"detail": str(exc)}, status_code=status)

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return JSONResponse({"detail": str(exc)}, status_code=400)

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse({"detail": exc.errors()}, status_code=400)

    # -- helpers -----------------------------------------------------------

    def current_matrix() -> tuple[str, RatingsMatrix]:
        snap: Snapshot = app.state.snapshot
        if snap.matrix is None:
            raise DegenerateMatrix("no dataset loaded; upload one via POST /datasets")
        return snap.dataset_id, snap.matrix

    def resolve_model(model_id: str, matrix: RatingsMatrix):
        cached = model_cache.get(model_id)
        if cached is None:
            cached = store.load_model(model_id)
            model_cache[model_id] = cached
        model, handle = cached
        store.check_model_current(model, matrix)
        return model, handle

    # -- datasets ----------------------------------------------------------

    @app.post("/datasets", status_code=201)
    def upload_dataset(body: DatasetUpload):
        if body.scale is not None:
            scale = GradeScale(
                body.scale.mapping,
                body.scale.min_points,
                body.scale.max_points,
                frozenset(body.scale.aliases),
            )
        else:
            scale = GradeScale.default()
        matrix = ingest_records(body.records_csv.splitlines(), scale)
        with state_lock:
            ds_id = store.save_dataset(matrix, body.dataset_id)
            app.state.snapshot = Snapshot(ds_id, matrix)
        return {
            "dataset_id": ds_id,
            "fingerprint": matrix.fingerprint(),
            "n_students": len(matrix.students),
            "n_courses": len(matrix.courses),
            "n_ratings": matrix.n_ratings,
        }

    @app.get("/datasets")
    def list_datasets():
        snap: Snapshot = app.state.snapshot
        out = []
        for ds_id in store.dataset_ids():
            meta = store.dataset_meta(ds_id)
            out.append(
                {
                    "dataset_id": ds_id,
                    "fingerprint": meta["fingerprint"],
                    "n_students": meta["n_students"],
                    "n_courses": meta["n_courses"],
                    "n_ratings": meta["n_ratings"],
                    "scale": meta["scale"],
                    "current": ds_id == snap.dataset_id,
                }
            )
        return {"datasets": out, "current": snap.dataset_id}

    # -- models ------------------------------------------------------------

    @app.post("/models", status_code=201)
    def build_model(body: ModelBuildRequest):
        with state_lock:
            ds_id, matrix = current_matrix()
            model = build_similarity_model(
                matrix, ALGORITHM_KIND[body.algorithm], _weighting_params(body.weighting)
            )
            handle = store.save_model(model, ds_id, body.model_id)
            model_cache[handle.model_id] = (model, handle)
        return {
            "model_id": handle.model_id,
            "kind": handle.kind,
            "algorithm": KIND_TO_ALGORITHM[handle.kind],
            "dataset_id": handle.dataset_id,
            "created_at": handle.created_at,
            "source_fingerprint": handle.source_fingerprint,
            "params": handle.params,
            "n_pairs": model.n_pairs,
        }

    @app.get("/models/{model_id}")
    def model_info(model_id: str):
        cached = model_cache.get(model_id)
        if cached is None:
            cached = store.load_model(model_id)
            model_cache[model_id] = cached
        model, handle = cached
        snap: Snapshot = app.state.snapshot
        current = (
            snap.matrix is not None
            and model.source_fingerprint == snap.matrix.fingerprint()
        )
        return {
            "model_id": handle.model_id,
            "kind": handle.kind,
            "algorithm": KIND_TO_ALGORITHM[handle.kind],
            "dataset_id": handle.dataset_id,
            "created_at": handle.created_at,
            "source_fingerprint": handle.source_fingerprint,
            "params": handle.params,
            "n_pairs": model.n_pairs,
            "current": current,
        }

    # -- courses -----------------------------------------------------------

    @app.get("/courses")
    def list_courses():
        ds_id, matrix = current_matrix()
        courses = [
            {
                "course_id": cid,
                "term": matrix.course_terms[cid],
                "n_ratings": len(matrix.raters_of(cid)),
                "mean_points": matrix.course_means[cid],
            }
            for cid in sorted(matrix.courses)
        ]
        courses.sort(key=lambda c: (c["term"], c["course_id"]))
        return {"dataset_id": ds_id, "courses": courses}

    # -- predictions over stored students ----------------------------------

    @app.get("/students/{student_id}/predictions")
    def student_predictions(student_id: str, model: str, courses: Optional[str] = None, k: str = "10"):
        ds_id, matrix = current_matrix()
        sim_model, handle = resolve_model(model, matrix)
        if not matrix.has_student(student_id):
            raise UnknownStudent(f"unknown student {student_id!r}")
        if courses:
            wanted = [c.strip() for c in courses.split(",") if c.strip()]
        else:
            rated = set(matrix.ratings_of(student_id))
            wanted = [c for c in sorted(matrix.courses) if c not in rated]
        cfg = NeighborhoodConfig(k=_parse_k(k))
        preds = [
            _prediction_out(predict(matrix, sim_model, student_id, cid, cfg))
            for cid in wanted
        ]
        return {
            "student_id": student_id,
            "dataset_id": ds_id,
            "model_id": handle.model_id,
            "k": cfg.k,
            "predictions": preds,
        }

    @app.get("/students/{student_id}/recommendations")
    def student_recommendations(student_id: str, model: str, n: int = 5, k: str = "10"):
        ds_id, matrix = current_matrix()
        sim_model, handle = resolve_model(model, matrix)
        if not matrix.has_student(student_id):
            raise UnknownStudent(f"unknown student {student_id!r}")
        rated = set(matrix.ratings_of(student_id))
        candidates = [c for c in sorted(matrix.courses) if c not in rated]
        cfg = NeighborhoodConfig(k=_parse_k(k))
        ranked = [
            (cid, predict(matrix, sim_model, student_id, cid, cfg)) for cid in candidates
        ]
        ranked.sort(key=lambda pair: (-pair[1].value, pair[0]))
        return {
            "student_id": student_id,
            "dataset_id": ds_id,
            "model_id": handle.model_id,
            "k": cfg.k,
            "recommendations": [_prediction_out(p) for _, p in ranked[:n]],
        }

    # -- what-if -----------------------------------------------------------

    @app.post("/whatif")
    def whatif(body: WhatIfBody):
        ds_id, matrix = current_matrix()
        history: dict[str, float] = {}
        for entry in body.grade_history:
            if entry.course_id in history:
                raise ValueError(f"course {entry.course_id!r} appears twice in the history")
            history[entry.course_id] = entry.grade_points
        cfg = NeighborhoodConfig(k=body.k, positive_only=body.positive_only)
        if body.algorithm == "user_based":
            if not history:
                raise ValueError("user-based what-if needs a non-empty grade history")
            preds = whatif_user_predictions(
                matrix, history, body.candidate_courses, cfg, _weighting_params(body.weighting)
            )
            model_id = None
        else:
            if body.model_id is None:
                raise ValueError("item-based what-if needs model_id (a prebuilt item model)")
            if body.weighting is not None:
                raise ValueError(
                    "weighting overrides do not apply to a prebuilt item model; retrain instead"
                )
            sim_model, handle = resolve_model(body.model_id, matrix)
            if sim_model.kind != ITEM_ITEM:
                raise ValueError(f"model {body.model_id!r} is not an item model")
            preds = whatif_item_predictions(matrix, history, body.candidate_courses, sim_model, cfg)
            model_id = handle.model_id
        ranked = sorted(preds, key=lambda p: (-p.value, p.course_id))
        return {
            "dataset_id": ds_id,
            "algorithm": body.algorithm,
            "k": body.k,
            "model_id": model_id,
            "predictions": [_prediction_out(p) for p in ranked],
        }

    return app
