"""Hold-out splitting, MAE, the experiment grid, and synthetic datasets.

The experiment driver reproduces the offline protocol: withhold the final
term of a random subset of students, predict each withheld grade from the
remaining data, and score the mean absolute error for every combination
of algorithm and neighborhood size. A latent-factor synthesizer supplies
datasets of any shape when real grade data is unavailable.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from .data import GradeRecord, GradeScale, RatingsMatrix
from .errors import (
    DestinationUnwritable,
    EmptyPairList,
    EmptyReport,
    InsufficientStudents,
    UnknownTerm,
)
from .predict import (
    ALGORITHM_KIND,
    ALGORITHMS,
    FALLBACK_LEVELS,
    FALLBACK_NONE,
    NeighborhoodConfig,
    predict,
)
from .similarity import WeightingParams, build_similarity_model

RESULTS_HEADER = (
    "algorithm,k,x,seed,mae,coverage,fallback_none,fallback_user_mean,"
    "fallback_item_mean,fallback_global_mean,clamped,n_pairs"
)

#: Synthetic grades center at min + 0.7 * range (students mostly pass).
#: Difficulty and latent spreads stay small next to ability so the planted
#: structure is recoverable by an uncentered item-based average, not just
#: the mean-centered user-based form.
GRADE_MEAN_OFFSET = 0.7
ABILITY_SD = 0.5
DIFFICULTY_SD = 0.25
FACTOR_SD = 0.25


@dataclass(frozen=True)
class SplitSpec:
    """Which students' final-term grades to withhold, and under what seed.

    The test fraction x is an outcome, not a knob: it is reported as
    test rows / total rows once the split is made.
    """

    held_out_student_count: int
    held_out_term: int
    seed: int

    def __post_init__(self) -> None:
        if self.held_out_student_count < 0:
            raise ValueError("held_out_student_count must be >= 0")
        if self.held_out_term < 1:
            raise ValueError("held_out_term must be a positive term index")


def split_held_out_students(
    matrix: RatingsMatrix, spec: SplitSpec
) -> tuple[RatingsMatrix, list[GradeRecord]]:
    """Withhold every held-out-term rating of randomly chosen students.

    Students are drawn uniformly without replacement from those who have at
    least one rating in the held-out term, by seeded permutation of their
    sorted ids, so the same seed always selects the same students. The
    returned train matrix has its means recomputed from what remains.
    """
    terms = set(matrix.course_terms.values())
    if spec.held_out_term not in terms:
        raise UnknownTerm(f"no course belongs to term {spec.held_out_term}")
    term_courses = {
        cid for cid, term in matrix.course_terms.items() if term == spec.held_out_term
    }
    eligible = sorted(
        sid
        for sid in matrix.students
        if any(cid in term_courses for cid in matrix.ratings_of(sid))
    )
    if spec.held_out_student_count > len(eligible):
        raise InsufficientStudents(
            f"need {spec.held_out_student_count} students with term-"
            f"{spec.held_out_term} ratings, only {len(eligible)} available"
        )
    rng = np.random.default_rng(spec.seed)
    order = rng.permutation(len(eligible))
    chosen = {eligible[int(idx)] for idx in order[: spec.held_out_student_count]}
    train_records, test_records = [], []
    for rec in matrix.to_records():
        if rec.student_id in chosen and rec.course_id in term_courses:
            test_records.append(rec)
        else:
            train_records.append(rec)
    return RatingsMatrix(train_records, matrix.scale), test_records


def mae(pairs: Sequence[tuple[float, float]]) -> float:
    """Mean absolute error over (predicted, actual) pairs."""
    if not pairs:
        raise EmptyPairList("MAE over zero pairs is undefined")
    return sum(abs(p - a) for p, a in pairs) / len(pairs)


def global_mean_baseline(train: RatingsMatrix, test: Sequence[GradeRecord]) -> float:
    """MAE of the no-information predictor: train global mean for every cell."""
    return mae([(train.global_mean, rec.grade_points) for rec in test])


@dataclass(frozen=True)
class ExperimentConfig:
    """The full evaluation grid: algorithms x neighborhood sizes x splits."""

    splits: tuple
    algorithms: tuple = ALGORITHMS
    k_values: tuple = (5, 10, 15, 20, "all")
    weighting: WeightingParams = WeightingParams()
    scale: GradeScale = field(default_factory=GradeScale.default)
    neighborhood: NeighborhoodConfig = NeighborhoodConfig()

    def __post_init__(self) -> None:
        if not self.splits:
            raise ValueError("at least one split is required")
        if not self.algorithms:
            raise ValueError("at least one algorithm is required")
        for alg in self.algorithms:
            if alg not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {alg!r}")
        if not self.k_values:
            raise ValueError("at least one k value is required")
        for k in self.k_values:
            if k != "all" and (not isinstance(k, int) or k < 1):
                raise ValueError(f'k must be a positive integer or "all", got {k!r}')


@dataclass(frozen=True)
class ReportRow:
    """One grid cell: an (algorithm, k, split) evaluation outcome.

    n_pairs counts the test cells actually predicted (student and course
    both present in train); coverage relates it to the full test size.
    mae_genuine excludes fallback-rendered cells and is None when no cell
    had a real neighborhood.
    """

    algorithm: str
    k: int | str
    x: float
    seed: int
    mae: float
    coverage: float
    fallback_histogram: Mapping[str, int]
    clamp_count: int
    n_pairs: int
    mae_genuine: float | None

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "fallback_histogram", MappingProxyType(dict(self.fallback_histogram))
        )


@dataclass(frozen=True)
class EvaluationReport:
    """All grid rows in deterministic (algorithm, k, x, seed) order."""

    rows: tuple

    def __len__(self) -> int:
        return len(self.rows)


def _k_order(k) -> tuple:
    return (1, 0) if k == "all" else (0, k)


def run_experiment(
    records: Sequence[GradeRecord], cfg: ExperimentConfig
) -> EvaluationReport:
    """Evaluate every (split, algorithm, k) grid cell on held-out grades.

    One similarity model is built per (split, algorithm) and shared across
    all k values, which is observationally identical to rebuilding it per
    cell. Cells whose student or course vanished from train are skipped and
    show up as coverage < 1 rather than as errors.
    """
    records = list(records)
    if not records:
        raise EmptyPairList("cannot evaluate an empty dataset")
    full = RatingsMatrix(records, cfg.scale)
    total = len(records)
    rows = []
    for split in cfg.splits:
        train, test = split_held_out_students(full, split)
        x = len(test) / total
        models = {
            alg: build_similarity_model(train, ALGORITHM_KIND[alg], cfg.weighting)
            for alg in cfg.algorithms
        }
        for alg in cfg.algorithms:
            for k in cfg.k_values:
                ncfg = replace(cfg.neighborhood, k=k)
                pairs, genuine = [], []
                histogram = {level: 0 for level in FALLBACK_LEVELS}
                clamp_count = 0
                for rec in test:
                    if not train.has_student(rec.student_id):
                        continue
                    if not train.has_course(rec.course_id):
                        continue
                    pred = predict(train, models[alg], rec.student_id, rec.course_id, ncfg)
                    pairs.append((pred.value, rec.grade_points))
                    histogram[pred.fallback_level] += 1
                    if pred.clamped:
                        clamp_count += 1
                    if pred.fallback_level == FALLBACK_NONE:
                        genuine.append((pred.value, rec.grade_points))
                rows.append(
                    ReportRow(
                        algorithm=alg,
                        k=k,
                        x=x,
                        seed=split.seed,
                        mae=mae(pairs),
                        coverage=len(pairs) / len(test),
                        fallback_histogram=histogram,
                        clamp_count=clamp_count,
                        n_pairs=len(pairs),
                        mae_genuine=mae(genuine) if genuine else None,
                    )
                )
    rows.sort(key=lambda r: (r.algorithm, _k_order(r.k), r.x, r.seed))
    return EvaluationReport(tuple(rows))


def synthesize_dataset(
    students: int,
    courses_per_term: Sequence[int],
    scale: GradeScale | None = None,
    noise_sd: float = 0.3,
    latent_dim: int = 4,
    seed: int = 0,
    quantize: bool = True,
) -> list[GradeRecord]:
    """Generate a full-enrollment grade table with planted neighborhood structure.

    grade(s, c) = mu + ability_s - difficulty_c + <p_s, q_c> + noise, snapped
    to the scale (or merely clamped when quantize is off). The latent inner
    product is what makes some students genuinely predictive of others, so
    collaborative filtering has signal to find; latent_dim = 0 removes it.
    Identical arguments always produce the identical dataset.
    """
    if scale is None:
        scale = GradeScale.default()
    if students < 1:
        raise ValueError("students must be >= 1")
    if not courses_per_term or any(c < 1 for c in courses_per_term):
        raise ValueError("courses_per_term must be non-empty positive counts")
    if noise_sd < 0:
        raise ValueError("noise_sd must be >= 0")
    if latent_dim < 0:
        raise ValueError("latent_dim must be >= 0")
    rng = np.random.default_rng(seed)
    n_courses = sum(courses_per_term)
    sw = max(2, len(str(students)))
    student_ids = [f"S{n:0{sw}d}" for n in range(1, students + 1)]
    course_ids, course_term = [], []
    for t, count in enumerate(courses_per_term, start=1):
        cw = max(2, len(str(count)))
        for m in range(1, count + 1):
            course_ids.append(f"T{t}C{m:0{cw}d}")
            course_term.append(t)
    ability = rng.normal(0.0, ABILITY_SD, students)
    difficulty = rng.normal(0.0, DIFFICULTY_SD, n_courses)
    if latent_dim:
        p = rng.normal(0.0, FACTOR_SD, (students, latent_dim))
        q = rng.normal(0.0, FACTOR_SD, (n_courses, latent_dim))
        affinity = p @ q.T
    else:
        affinity = np.zeros((students, n_courses))
    noise = rng.normal(0.0, noise_sd, (students, n_courses))
    mu = scale.min_points + GRADE_MEAN_OFFSET * (scale.max_points - scale.min_points)
    records = []
    for s in range(students):
        for c in range(n_courses):
            raw = float(mu + ability[s] - difficulty[c] + affinity[s, c] + noise[s, c])
            value = scale.quantize(raw) if quantize else float(scale.clamp(raw))
            records.append(GradeRecord(student_ids[s], course_ids[c], course_term[c], value))
    return records


# -- results emission ------------------------------------------------------


def report_to_csv_lines(report: EvaluationReport) -> list[str]:
    """Pinned results-table rendering; floats via repr so reloads are exact."""
    lines = [RESULTS_HEADER]
    for r in report.rows:
        h = r.fallback_histogram
        lines.append(
            f"{r.algorithm},{r.k},{r.x!r},{r.seed},{r.mae!r},{r.coverage!r},"
            f"{h['none']},{h['user_mean']},{h['item_mean']},{h['global_mean']},"
            f"{r.clamp_count},{r.n_pairs}"
        )
    return lines


def _series_file(path: Path, blocks: list[tuple[str, list[tuple[object, float]]]]) -> None:
    lines = []
    for label, points in blocks:
        lines.append(f"# series: {label}")
        for abscissa, value in points:
            lines.append(f"{abscissa},{value!r}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def emit_report(report: EvaluationReport, destination) -> list[Path]:
    """Write the results table and plot-ready MAE series under destination.

    Produces results.csv always; mae_vs_k_<algorithm>.csv per algorithm
    present (one series per split); mae_vs_x_k10.csv overlaying the
    algorithms at k = 10 when such rows exist. Returns the written paths.
    """
    if not report.rows:
        raise EmptyReport("refusing to emit an empty report")
    dest = Path(destination)
    try:
        dest.mkdir(parents=True, exist_ok=True)
        written = []
        results = dest / "results.csv"
        results.write_text("\n".join(report_to_csv_lines(report)) + "\n", encoding="utf-8")
        written.append(results)
        for alg in sorted({r.algorithm for r in report.rows}):
            blocks = []
            splits = sorted({(r.x, r.seed) for r in report.rows if r.algorithm == alg})
            for x, seed in splits:
                points = [
                    (r.k, r.mae)
                    for r in report.rows
                    if r.algorithm == alg and r.x == x and r.seed == seed
                ]
                blocks.append((f"{alg}, x={x!r}, seed={seed}", points))
            path = dest / f"mae_vs_k_{alg.removesuffix('_based')}.csv"
            _series_file(path, blocks)
            written.append(path)
        k10 = [r for r in report.rows if r.k == 10]
        if k10:
            blocks = []
            for alg in sorted({r.algorithm for r in k10}):
                points = [(repr(r.x), r.mae) for r in k10 if r.algorithm == alg]
                blocks.append((f"{alg}, k=10", points))
            path = dest / "mae_vs_x_k10.csv"
            _series_file(path, blocks)
            written.append(path)
        return written
    except OSError as exc:
        raise DestinationUnwritable(f"cannot write results under {dest}: {exc}") from exc
