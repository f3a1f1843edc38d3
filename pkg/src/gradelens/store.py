"""Filesystem persistence for datasets and trained similarity models.

Layout under one root directory (GRADELENS_DATA_DIR or ~/.gradelens):

    datasets/<dataset_id>/records.csv   pinned ratings CSV
    datasets/<dataset_id>/meta.json     scale, fingerprint, shape
    models/<model_id>.json              handle metadata + exact model payload

Grades round-trip through repr and similarities through float hex, so a
reloaded dataset has the same fingerprint and a reloaded model the same
table, bit for bit. Models stay bound to the dataset version they were
built from; re-uploading a dataset under the same id leaves dependent
models refusing to serve (fingerprint mismatch) rather than lying.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .data import GradeScale, RatingsMatrix, load_ratings_csv, write_records_csv
from .errors import (
    DestinationUnwritable,
    FingerprintMismatch,
    UnknownDataset,
    UnknownModel,
)
from .similarity import SimilarityModel, model_from_payload, model_to_payload

ENV_DATA_DIR = "GRADELENS_DATA_DIR"
META_FORMAT = "gradelens.dataset-meta/1"
MODEL_FILE_FORMAT = "gradelens.stored-model/1"


def default_data_dir() -> Path:
    """Resolve the data directory from the environment at call time."""
    configured = os.environ.get(ENV_DATA_DIR)
    if configured:
        return Path(configured)
    return Path.home() / ".gradelens"


@dataclass(frozen=True)
class StoredModelHandle:
    """Locator plus provenance for one persisted similarity model."""

    model_id: str
    kind: str
    params: dict
    dataset_id: str
    created_at: str
    source_fingerprint: str


def _scale_to_meta(scale: GradeScale) -> dict:
    return {
        "mapping": dict(scale.mapping),
        "min_points": scale.min_points,
        "max_points": scale.max_points,
        "aliases": sorted(scale.aliases),
    }


def _scale_from_meta(meta: dict) -> GradeScale:
    return GradeScale(
        meta["mapping"],
        meta["min_points"],
        meta["max_points"],
        frozenset(meta.get("aliases", ())),
    )


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class Store:
    """One data directory's worth of datasets and models."""

    def __init__(self, root: Path | str | None = None) -> None:
        self._root = Path(root) if root is not None else default_data_dir()

    @property
    def root(self) -> Path:
        return self._root

    def _datasets_dir(self) -> Path:
        return self._root / "datasets"

    def _models_dir(self) -> Path:
        return self._root / "models"

    # -- datasets ----------------------------------------------------------

    def default_dataset_id(self, matrix: RatingsMatrix) -> str:
        return f"ds-{matrix.fingerprint()[:12]}"

    def save_dataset(self, matrix: RatingsMatrix, dataset_id: str | None = None) -> str:
        """Persist a matrix; overwriting an id is how re-upload works."""
        dataset_id = dataset_id or self.default_dataset_id(matrix)
        target = self._datasets_dir() / dataset_id
        meta = {
            "format": META_FORMAT,
            "dataset_id": dataset_id,
            "fingerprint": matrix.fingerprint(),
            "created_at": _now(),
            "n_students": len(matrix.students),
            "n_courses": len(matrix.courses),
            "n_ratings": matrix.n_ratings,
            "scale": _scale_to_meta(matrix.scale),
        }
        try:
            target.mkdir(parents=True, exist_ok=True)
            write_records_csv(matrix.to_records(), target / "records.csv")
            (target / "meta.json").write_text(
                json.dumps(meta, indent=2) + "\n", encoding="utf-8"
            )
        except OSError as exc:
            raise DestinationUnwritable(f"cannot write dataset to {target}: {exc}") from exc
        return dataset_id

    def has_dataset(self, dataset_id: str) -> bool:
        return (self._datasets_dir() / dataset_id / "meta.json").is_file()

    def dataset_meta(self, dataset_id: str) -> dict:
        path = self._datasets_dir() / dataset_id / "meta.json"
        if not path.is_file():
            raise UnknownDataset(f"no stored dataset {dataset_id!r}")
        return json.loads(path.read_text(encoding="utf-8"))

    def load_dataset(self, dataset_id: str) -> RatingsMatrix:
        meta = self.dataset_meta(dataset_id)
        scale = _scale_from_meta(meta["scale"])
        return load_ratings_csv(self._datasets_dir() / dataset_id / "records.csv", scale)

    def dataset_ids(self) -> list[str]:
        base = self._datasets_dir()
        if not base.is_dir():
            return []
        return sorted(p.name for p in base.iterdir() if (p / "meta.json").is_file())

    # -- models ------------------------------------------------------------

    def default_model_id(self, model: SimilarityModel, dataset_id: str) -> str:
        p = model.params
        tag = (
            f"{model.kind}|{dataset_id}|{model.source_fingerprint}|"
            f"{p.significance_threshold}|{p.amplification_exponent}|{p.min_corated}"
        )
        return f"{model.kind}-{hashlib.sha256(tag.encode()).hexdigest()[:10]}"

    def save_model(
        self, model: SimilarityModel, dataset_id: str, model_id: str | None = None
    ) -> StoredModelHandle:
        model_id = model_id or self.default_model_id(model, dataset_id)
        payload = model_to_payload(model)
        handle = StoredModelHandle(
            model_id=model_id,
            kind=model.kind,
            params=dict(payload["params"]),
            dataset_id=dataset_id,
            created_at=_now(),
            source_fingerprint=model.source_fingerprint,
        )
        doc = {
            "format": MODEL_FILE_FORMAT,
            "model_id": handle.model_id,
            "dataset_id": handle.dataset_id,
            "created_at": handle.created_at,
            "payload": payload,
        }
        target = self._models_dir() / f"{model_id}.json"
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(json.dumps(doc) + "\n", encoding="utf-8")
        except OSError as exc:
            raise DestinationUnwritable(f"cannot write model to {target}: {exc}") from exc
        return handle

    def has_model(self, model_id: str) -> bool:
        return (self._models_dir() / f"{model_id}.json").is_file()

    def load_model(self, model_id: str) -> tuple[SimilarityModel, StoredModelHandle]:
        path = self._models_dir() / f"{model_id}.json"
        if not path.is_file():
            raise UnknownModel(f"no stored model {model_id!r}")
        doc = json.loads(path.read_text(encoding="utf-8"))
        if doc.get("format") != MODEL_FILE_FORMAT:
            raise UnknownModel(f"unsupported model file format {doc.get('format')!r}")
        model = model_from_payload(doc["payload"])
        handle = StoredModelHandle(
            model_id=doc["model_id"],
            kind=model.kind,
            params=dict(doc["payload"]["params"]),
            dataset_id=doc["dataset_id"],
            created_at=doc["created_at"],
            source_fingerprint=model.source_fingerprint,
        )
        return model, handle

    def model_ids(self) -> list[str]:
        base = self._models_dir()
        if not base.is_dir():
            return []
        return sorted(p.stem for p in base.glob("*.json"))

    # -- consistency -------------------------------------------------------

    def check_model_current(self, model: SimilarityModel, matrix: RatingsMatrix) -> None:
        """Refuse to pair a model with data it was not built from."""
        if model.source_fingerprint != matrix.fingerprint():
            raise FingerprintMismatch(
                "model was built from a different dataset version; retrain it"
            )
