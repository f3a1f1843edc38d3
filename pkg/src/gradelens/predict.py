"""Neighborhood selection, grade prediction, and top-N ranking.

Predictors are pure functions of an immutable matrix, model, and config;
identical inputs give bit-identical outputs. Ties are always broken by
ascending identifier so results do not depend on hash order or threading.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .data import RatingsMatrix
from .errors import DegenerateMatrix, UnknownCourse, UnknownStudent
from .similarity import (
    ITEM_ITEM,
    USER_USER,
    SimilarityModel,
    WeightingParams,
    _pearson_with_count,
    apply_weighting,
)

FALLBACK_NONE = "none"
FALLBACK_USER_MEAN = "user_mean"
FALLBACK_ITEM_MEAN = "item_mean"
FALLBACK_GLOBAL_MEAN = "global_mean"
FALLBACK_LEVELS = (FALLBACK_NONE, FALLBACK_USER_MEAN, FALLBACK_ITEM_MEAN, FALLBACK_GLOBAL_MEAN)

USER_BASED = "user_based"
ITEM_BASED = "item_based"
ALGORITHMS = (USER_BASED, ITEM_BASED)

ALGORITHM_KIND = {USER_BASED: USER_USER, ITEM_BASED: ITEM_ITEM}


@dataclass(frozen=True)
class NeighborhoodConfig:
    """How neighborhoods are formed and what happens when none exists.

    k is a positive integer or "all" (no cardinality cap). With positive_only
    (the default, matching the evaluation protocol) only similarities > 0 are
    admitted; without it, negative similarities participate too. Similarity
    exactly 0 is never admitted: it carries no evidence either way.
    """

    k: int | str = 10
    positive_only: bool = True
    fallback: tuple = (FALLBACK_USER_MEAN, FALLBACK_ITEM_MEAN, FALLBACK_GLOBAL_MEAN)
    clamp_to_scale: bool = True

    def __post_init__(self) -> None:
        if self.k != "all" and (not isinstance(self.k, int) or self.k < 1):
            raise ValueError(f'k must be a positive integer or "all", got {self.k!r}')
        if not self.fallback:
            raise ValueError("fallback cascade must be non-empty")
        for level in self.fallback:
            if level not in (FALLBACK_USER_MEAN, FALLBACK_ITEM_MEAN, FALLBACK_GLOBAL_MEAN):
                raise ValueError(f"invalid fallback level {level!r}")
        if self.fallback[-1] != FALLBACK_GLOBAL_MEAN:
            raise ValueError("fallback cascade must end in global_mean")


@dataclass(frozen=True)
class Prediction:
    """One predicted grade plus how it was produced.

    value is what a caller should show (clamped when configured); raw_value
    is the unclamped Eq-style output. neighbors records the neighborhood
    actually used, for auditing filters and weights.
    """

    student_id: str
    course_id: str
    value: float
    raw_value: float
    neighborhood_size_used: int
    fallback_level: str
    neighbors: tuple = ()

    @property
    def clamped(self) -> bool:
        return self.value != self.raw_value


def _truncate(pairs: list, k) -> list:
    return pairs if k == "all" else pairs[:k]


def _eligible(sim: float, positive_only: bool) -> bool:
    return sim > 0.0 if positive_only else sim != 0.0


def select_user_neighbors(
    model: SimilarityModel,
    u: str,
    i: str,
    matrix: RatingsMatrix,
    cfg: NeighborhoodConfig,
) -> list:
    """Raters of course i ranked by similarity to u; ties by ascending id."""
    if model.kind != USER_USER:
        raise ValueError("user neighbor selection needs a user_user model")
    if not matrix.has_student(u):
        raise UnknownStudent(f"unknown student {u!r}")
    candidates = []
    for v in matrix.raters_of(i):
        if v == u:
            continue
        sim = model.similarity(u, v)
        if _eligible(sim, cfg.positive_only):
            candidates.append((v, sim))
    candidates.sort(key=lambda pair: (-pair[1], pair[0]))
    return _truncate(candidates, cfg.k)


def select_item_neighbors(
    model: SimilarityModel,
    u: str,
    i: str,
    matrix: RatingsMatrix,
    cfg: NeighborhoodConfig,
) -> list:
    """Courses u already rated, ranked by similarity to target course i."""
    if model.kind != ITEM_ITEM:
        raise ValueError("item neighbor selection needs an item_item model")
    if not matrix.has_course(i):
        raise UnknownCourse(f"unknown course {i!r}")
    candidates = []
    for j in matrix.ratings_of(u):
        if j == i:
            continue
        sim = model.similarity(i, j)
        if _eligible(sim, cfg.positive_only):
            candidates.append((j, sim))
    candidates.sort(key=lambda pair: (-pair[1], pair[0]))
    return _truncate(candidates, cfg.k)


def _fallback_value(matrix: RatingsMatrix, u: str, i: str, cascade) -> tuple[float, str]:
    for level in cascade:
        if level == FALLBACK_USER_MEAN:
            mean = matrix.student_means.get(u)
            if mean is not None:
                return mean, level
        elif level == FALLBACK_ITEM_MEAN:
            mean = matrix.course_means.get(i)
            if mean is not None:
                return mean, level
        else:
            return matrix.global_mean, level
    raise AssertionError("cascade validated to end in global_mean")


def _finish(matrix, u, i, raw, neighbors, level, cfg) -> Prediction:
    value = matrix.scale.clamp(raw) if cfg.clamp_to_scale else raw
    return Prediction(u, i, value, raw, len(neighbors), level, tuple(neighbors))


def predict_user_based(
    matrix: RatingsMatrix,
    model: SimilarityModel,
    u: str,
    i: str,
    cfg: NeighborhoodConfig | None = None,
) -> Prediction:
    """Predict u's grade in i from similar students who took i.

    P = mean(u) + sum_v sim(u,v) * (r(v,i) - mean(v)) / sum_v |sim(u,v)|
    over the selected neighbors; the fallback cascade covers the empty case.
    Predicting an already-rated cell is allowed (used by evaluation).
    """
    if cfg is None:
        cfg = NeighborhoodConfig()
    if matrix.degenerate:
        raise DegenerateMatrix("cannot predict against an empty matrix")
    if not matrix.has_student(u):
        raise UnknownStudent(f"unknown student {u!r}")
    if not matrix.has_course(i):
        raise UnknownCourse(f"unknown course {i!r}")
    neighbors = select_user_neighbors(model, u, i, matrix, cfg)
    if not neighbors:
        raw, level = _fallback_value(matrix, u, i, cfg.fallback)
        return _finish(matrix, u, i, raw, neighbors, level, cfg)
    means = matrix.student_means
    raters = matrix.raters_of(i)
    num = den = 0.0
    for v, sim in neighbors:
        num += sim * (raters[v] - means[v])
        den += abs(sim)
    raw = means[u] + num / den
    return _finish(matrix, u, i, raw, neighbors, FALLBACK_NONE, cfg)


def predict_item_based(
    matrix: RatingsMatrix,
    model: SimilarityModel,
    u: str,
    i: str,
    cfg: NeighborhoodConfig | None = None,
) -> Prediction:
    """Predict u's grade in i from u's own grades in the most similar courses.

    P = sum_j sim(i,j) * r(u,j) / sum_j |sim(i,j)| over the selected
    neighbor courses.
    """
    if cfg is None:
        cfg = NeighborhoodConfig()
    if matrix.degenerate:
        raise DegenerateMatrix("cannot predict against an empty matrix")
    if not matrix.has_student(u):
        raise UnknownStudent(f"unknown student {u!r}")
    if not matrix.has_course(i):
        raise UnknownCourse(f"unknown course {i!r}")
    neighbors = select_item_neighbors(model, u, i, matrix, cfg)
    if not neighbors:
        raw, level = _fallback_value(matrix, u, i, cfg.fallback)
        return _finish(matrix, u, i, raw, neighbors, level, cfg)
    ratings = matrix.ratings_of(u)
    num = den = 0.0
    for j, sim in neighbors:
        num += sim * ratings[j]
        den += abs(sim)
    raw = num / den
    return _finish(matrix, u, i, raw, neighbors, FALLBACK_NONE, cfg)


def predict(
    matrix: RatingsMatrix,
    model: SimilarityModel,
    u: str,
    i: str,
    cfg: NeighborhoodConfig | None = None,
) -> Prediction:
    """Dispatch on the model kind."""
    if model.kind == USER_USER:
        return predict_user_based(matrix, model, u, i, cfg)
    return predict_item_based(matrix, model, u, i, cfg)


def recommend_top_n(
    matrix: RatingsMatrix,
    model: SimilarityModel,
    u: str,
    candidates,
    n: int,
    cfg: NeighborhoodConfig | None = None,
) -> list:
    """Rank candidate courses for u by predicted grade, best first.

    Candidates should be courses u has not rated. Ties are ordered by
    ascending course id; fallback annotations ride along on each prediction.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    ranked = [(c, predict(matrix, model, u, c, cfg)) for c in sorted(candidates)]
    ranked.sort(key=lambda pair: (-pair[1].value, pair[0]))
    return ranked[:n]


# -- what-if: a grade history that is not (necessarily) a stored student ---


def _virtual_student_id(matrix: RatingsMatrix) -> str:
    vid = "~whatif"
    while matrix.has_student(vid):
        vid += "~"
    return vid


def _check_whatif_args(matrix, history: Mapping, candidates: Sequence) -> None:
    for cid in history:
        if not matrix.has_course(cid):
            raise UnknownCourse(f"unknown course {cid!r} in grade history")
    for cid in candidates:
        if not matrix.has_course(cid):
            raise UnknownCourse(f"unknown candidate course {cid!r}")
        if cid in history:
            raise ValueError(f"candidate course {cid!r} already appears in the history")


def whatif_user_predictions(
    matrix: RatingsMatrix,
    history: Mapping[str, float],
    candidates: Sequence[str],
    cfg: NeighborhoodConfig | None = None,
    params: WeightingParams | None = None,
) -> list:
    """Predict candidate grades for an ad-hoc history, user-based.

    The history becomes a virtual student folded into a copy of the matrix;
    its similarities against every stored student are computed on the fly
    with the same per-pair function and transform chain the batch build
    uses, so a history identical to a stored student reproduces that
    student's predictions. Stored state is never touched.
    """
    if cfg is None:
        cfg = NeighborhoodConfig()
    if params is None:
        params = WeightingParams()
    if matrix.degenerate:
        raise DegenerateMatrix("cannot run what-if against an empty matrix")
    _check_whatif_args(matrix, history, candidates)
    vid = _virtual_student_id(matrix)
    augmented = matrix.with_student(vid, history)
    table = {}
    counts = {}
    for v in matrix.students:
        raw, n = _pearson_with_count(augmented, vid, v, params.min_corated)
        key = SimilarityModel.pair_key(vid, v)
        table[key] = apply_weighting(raw, n, params)
        counts[key] = n
    virtual_model = SimilarityModel(
        USER_USER, augmented.students, table, counts, params, augmented.fingerprint()
    )
    return [predict_user_based(augmented, virtual_model, vid, c, cfg) for c in candidates]


def whatif_item_predictions(
    matrix: RatingsMatrix,
    history: Mapping[str, float],
    candidates: Sequence[str],
    model: SimilarityModel,
    cfg: NeighborhoodConfig | None = None,
) -> list:
    """Predict candidate grades for an ad-hoc history, item-based.

    Reuses the precomputed item-item table: only the virtual student's own
    ratings enter the weighted average, so no similarity recomputation is
    needed.
    """
    if cfg is None:
        cfg = NeighborhoodConfig()
    if model.kind != ITEM_ITEM:
        raise ValueError("item-based what-if needs an item_item model")
    if matrix.degenerate:
        raise DegenerateMatrix("cannot run what-if against an empty matrix")
    _check_whatif_args(matrix, history, candidates)
    vid = _virtual_student_id(matrix)
    augmented = matrix.with_student(vid, history)
    return [predict_item_based(augmented, model, vid, c, cfg) for c in candidates]
