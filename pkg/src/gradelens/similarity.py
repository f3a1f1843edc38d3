"""Pairwise similarities and the weighting transforms applied to them.

User-user similarity is the Pearson correlation over the co-rated course
set, with each student's mean taken over ALL courses they rated. Item-item
similarity is the adjusted cosine: user-mean-centered ratings over the
co-rating students. Both are computed by one per-pair code path that the
batch build and the on-the-fly what-if route share, so the two routes agree
bit for bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .data import RatingsMatrix
from .errors import (
    DegenerateMatrix,
    SelfSimilarityRequested,
    UnknownCourse,
    UnknownStudent,
)

USER_USER = "user_user"
ITEM_ITEM = "item_item"
KINDS = (USER_USER, ITEM_ITEM)

MODEL_FORMAT = "gradelens.similarity/1"


@dataclass(frozen=True)
class WeightingParams:
    """Knobs applied to raw similarities, in fixed order.

    significance_threshold: co-rated counts below this shrink the similarity
        linearly (None disables). amplification_exponent: emphasis exponent,
        1.0 is a no-op (None disables). min_corated: pairs with fewer common
        ratings score 0 (no evidence).
    """

    significance_threshold: int | None = None
    amplification_exponent: float | None = None
    min_corated: int = 2

    def __post_init__(self) -> None:
        if self.significance_threshold is not None and self.significance_threshold < 1:
            raise ValueError("significance_threshold must be a positive integer")
        if self.amplification_exponent is not None and self.amplification_exponent < 1.0:
            raise ValueError("amplification_exponent must be >= 1")
        if self.min_corated < 1:
            raise ValueError("min_corated must be a positive integer")


def _clamp_unit(x: float) -> float:
    if x > 1.0:
        return 1.0
    if x < -1.0:
        return -1.0
    return x


def _pearson_with_count(
    matrix: RatingsMatrix, u: str, v: str, min_corated: int
) -> tuple[float, int]:
    # Iterates courses in matrix first-seen order: identical arithmetic for
    # (u, v) and (v, u), and stable under identifier renaming.
    ru = matrix.ratings_of(u)
    rv = matrix.ratings_of(v)
    num = du2 = dv2 = 0.0
    n = 0
    mu = mv = 0.0
    started = False
    for c in matrix.courses:
        x = ru.get(c)
        if x is None:
            continue
        y = rv.get(c)
        if y is None:
            continue
        if not started:
            # Means over each student's FULL rated set, not the co-rated subset.
            mu = matrix.student_means[u]
            mv = matrix.student_means[v]
            started = True
        du = x - mu
        dv = y - mv
        num += du * dv
        du2 += du * du
        dv2 += dv * dv
        n += 1
    if n < min_corated or du2 == 0.0 or dv2 == 0.0:
        return 0.0, n
    return _clamp_unit(num / (math.sqrt(du2) * math.sqrt(dv2))), n


def _adjusted_cosine_with_count(
    matrix: RatingsMatrix, i: str, j: str, min_corated: int
) -> tuple[float, int]:
    ri = matrix.raters_of(i)
    rj = matrix.raters_of(j)
    means = matrix.student_means
    num = di2 = dj2 = 0.0
    n = 0
    for u in matrix.students:
        x = ri.get(u)
        if x is None:
            continue
        y = rj.get(u)
        if y is None:
            continue
        mu = means[u]
        di = x - mu
        dj = y - mu
        num += di * dj
        di2 += di * di
        dj2 += dj * dj
        n += 1
    if n < min_corated or di2 == 0.0 or dj2 == 0.0:
        return 0.0, n
    return _clamp_unit(num / (math.sqrt(di2) * math.sqrt(dj2))), n


def pearson_user_similarity(
    matrix: RatingsMatrix, u: str, v: str, min_corated: int = 2
) -> float:
    """Pearson correlation between two students over their co-rated courses.

    Returns 0 when fewer than ``min_corated`` courses are shared or either
    student has zero deviation on the shared set.
    """
    if u == v:
        raise SelfSimilarityRequested(f"student {u!r} against itself")
    if not matrix.has_student(u):
        raise UnknownStudent(f"unknown student {u!r}")
    if not matrix.has_student(v):
        raise UnknownStudent(f"unknown student {v!r}")
    return _pearson_with_count(matrix, u, v, min_corated)[0]


def adjusted_cosine_item_similarity(
    matrix: RatingsMatrix, i: str, j: str, min_corated: int = 2
) -> float:
    """Adjusted cosine between two courses over their co-rating students."""
    if i == j:
        raise SelfSimilarityRequested(f"course {i!r} against itself")
    if not matrix.has_course(i):
        raise UnknownCourse(f"unknown course {i!r}")
    if not matrix.has_course(j):
        raise UnknownCourse(f"unknown course {j!r}")
    return _adjusted_cosine_with_count(matrix, i, j, min_corated)[0]


def apply_significance_weighting(sim: float, n_corated: int, threshold: int) -> float:
    """Shrink a similarity built on few co-rated items: sim * min(n, T) / T."""
    if threshold < 1:
        raise ValueError("threshold must be a positive integer")
    if n_corated < 0:
        raise ValueError("n_corated must be non-negative")
    return sim * (min(n_corated, threshold) / threshold)


def apply_case_amplification(sim: float, exponent: float) -> float:
    """Emphasize strong similarities: sim * |sim|**(exponent - 1), sign kept."""
    if exponent < 1.0:
        raise ValueError("exponent must be >= 1")
    return sim * abs(sim) ** (exponent - 1.0)


def apply_weighting(raw: float, n_corated: int, params: WeightingParams) -> float:
    """Full transform chain: significance weighting, then case amplification."""
    s = raw
    if params.significance_threshold is not None:
        s = apply_significance_weighting(s, n_corated, params.significance_threshold)
    if params.amplification_exponent is not None:
        s = apply_case_amplification(s, params.amplification_exponent)
    return s


@dataclass(frozen=True, eq=False)
class SimilarityModel:
    """Precomputed pairwise similarity table for one entity kind.

    The table stores each unordered pair once (lexicographically smaller id
    first) and already includes the weighting transforms in ``params``.
    """

    kind: str
    ids: tuple
    table: Mapping[tuple, float]
    corated_counts: Mapping[tuple, int]
    params: WeightingParams
    source_fingerprint: str

    @staticmethod
    def pair_key(a: str, b: str) -> tuple:
        return (a, b) if a < b else (b, a)

    def _check_known(self, entity: str) -> None:
        if entity not in self._id_set:
            if self.kind == USER_USER:
                raise UnknownStudent(f"unknown student {entity!r}")
            raise UnknownCourse(f"unknown course {entity!r}")

    @property
    def _id_set(self):
        cached = getattr(self, "_id_set_cache", None)
        if cached is None:
            cached = frozenset(self.ids)
            object.__setattr__(self, "_id_set_cache", cached)
        return cached

    def similarity(self, a: str, b: str) -> float:
        if a == b:
            raise SelfSimilarityRequested(f"{a!r} against itself")
        self._check_known(a)
        self._check_known(b)
        return self.table[self.pair_key(a, b)]

    def corated(self, a: str, b: str) -> int:
        self._check_known(a)
        self._check_known(b)
        return self.corated_counts[self.pair_key(a, b)]

    @property
    def n_pairs(self) -> int:
        return len(self.table)


def build_similarity_model(
    matrix: RatingsMatrix, kind: str, params: WeightingParams | None = None
) -> SimilarityModel:
    """Compute the full pairwise table for one kind over a dense pair loop.

    Pairs are independent, so the result is deterministic regardless of
    execution order; at course-catalog scale the exhaustive loop is cheap.
    """
    if params is None:
        params = WeightingParams()
    if matrix.degenerate:
        raise DegenerateMatrix("cannot build a similarity model from an empty matrix")
    if kind == USER_USER:
        ids = matrix.students
        pair_fn = _pearson_with_count
    elif kind == ITEM_ITEM:
        ids = matrix.courses
        pair_fn = _adjusted_cosine_with_count
    else:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    table: dict[tuple, float] = {}
    counts: dict[tuple, int] = {}
    for ai in range(len(ids)):
        a = ids[ai]
        for bi in range(ai + 1, len(ids)):
            b = ids[bi]
            raw, n = pair_fn(matrix, a, b, params.min_corated)
            key = SimilarityModel.pair_key(a, b)
            table[key] = apply_weighting(raw, n, params)
            counts[key] = n
    return SimilarityModel(kind, tuple(ids), table, counts, params, matrix.fingerprint())


# -- serialization --------------------------------------------------------


def model_to_payload(model: SimilarityModel) -> dict:
    """Versioned dict form of a model; floats as hex for exact round-trips."""
    index = {entity: n for n, entity in enumerate(model.ids)}
    entries = [
        [index[a], index[b], sim.hex(), model.corated_counts[(a, b)]]
        for (a, b), sim in model.table.items()
    ]
    return {
        "format": MODEL_FORMAT,
        "kind": model.kind,
        "params": {
            "significance_threshold": model.params.significance_threshold,
            "amplification_exponent": model.params.amplification_exponent,
            "min_corated": model.params.min_corated,
        },
        "source_fingerprint": model.source_fingerprint,
        "ids": list(model.ids),
        "entries": entries,
    }


def model_from_payload(payload: Mapping) -> SimilarityModel:
    if payload.get("format") != MODEL_FORMAT:
        raise ValueError(f"unsupported model format {payload.get('format')!r}")
    ids = tuple(payload["ids"])
    params = WeightingParams(**payload["params"])
    table: dict[tuple, float] = {}
    counts: dict[tuple, int] = {}
    for ai, bi, sim_hex, n in payload["entries"]:
        key = SimilarityModel.pair_key(ids[ai], ids[bi])
        table[key] = float.fromhex(sim_hex)
        counts[key] = int(n)
    return SimilarityModel(
        payload["kind"], ids, table, counts, params, payload["source_fingerprint"]
    )


def save_model(model: SimilarityModel, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(model_to_payload(model)), encoding="utf-8")
    return path


def load_model(path) -> SimilarityModel:
    return model_from_payload(json.loads(Path(path).read_text(encoding="utf-8")))
