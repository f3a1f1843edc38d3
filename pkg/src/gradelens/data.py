"""Grade records, the grade scale, and the sparse ratings matrix.

The matrix is built once from validated records and is immutable afterwards;
derived statistics (per-student means, per-course means, global mean) are
computed at construction so any number of readers can share one instance.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from .errors import (
    DuplicateRecord,
    InconsistentCourseTerm,
    InvalidScale,
    MalformedRow,
    UnknownCourse,
    UnknownGradeSymbol,
    UnknownStudent,
)

CSV_HEADER = "student_id,course_id,term,grade"
SCALE_CSV_HEADER = "symbol,points"

#: Letter grades on a 4.3-point scale; numeric grades inside [0, 4.3] are
#: accepted as-is. Override with a scale file when the institution differs.
DEFAULT_GRADE_POINTS: dict[str, float] = {
    "A+": 4.3,
    "A": 4.0,
    "A-": 3.7,
    "B+": 3.3,
    "B": 3.0,
    "B-": 2.7,
    "C+": 2.3,
    "C": 2.0,
    "D": 1.0,
    "F": 0.0,
}


@dataclass(frozen=True)
class GradeScale:
    """Mapping from grade symbols to grade points, with hard range bounds.

    Two symbols may share a value only when both are listed in ``aliases``.
    """

    mapping: Mapping[str, float]
    min_points: float
    max_points: float
    aliases: frozenset = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "min_points", float(self.min_points))
        object.__setattr__(self, "max_points", float(self.max_points))
        if not self.mapping:
            raise InvalidScale("scale mapping is empty")
        if not self.min_points < self.max_points:
            raise InvalidScale(
                f"min_points ({self.min_points}) must be below max_points ({self.max_points})"
            )
        by_value: dict[float, list[str]] = {}
        for symbol, points in self.mapping.items():
            if not isinstance(points, (int, float)) or not math.isfinite(points):
                raise InvalidScale(f"symbol {symbol!r} maps to non-finite value {points!r}")
            if not self.min_points <= points <= self.max_points:
                raise InvalidScale(
                    f"symbol {symbol!r} maps to {points}, outside "
                    f"[{self.min_points}, {self.max_points}]"
                )
            by_value.setdefault(float(points), []).append(symbol)
        for points, symbols in by_value.items():
            if len(symbols) > 1 and not all(s in self.aliases for s in symbols):
                raise InvalidScale(
                    f"symbols {symbols} share value {points} but are not flagged as aliases"
                )
        object.__setattr__(self, "mapping", dict(self.mapping))
        object.__setattr__(self, "_values", tuple(sorted(set(float(v) for v in self.mapping.values()))))

    @classmethod
    def default(cls) -> "GradeScale":
        return cls(DEFAULT_GRADE_POINTS, 0.0, 4.3)

    @property
    def values(self) -> tuple:
        """Distinct grade points on the scale, ascending."""
        return self._values  # type: ignore[attr-defined]

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.min_points + self.max_points)

    @property
    def steps(self) -> tuple:
        """Gaps between adjacent scale values (empty for a one-value scale)."""
        vals = self.values
        return tuple(b - a for a, b in zip(vals, vals[1:]))

    def to_points(self, token) -> float:
        """Resolve a grade token (symbol or numeral) to grade points.

        Raises UnknownGradeSymbol for symbols outside the mapping and for
        numerals outside [min_points, max_points].
        """
        if isinstance(token, (int, float)):
            value = float(token)
        else:
            text = str(token).strip()
            if text in self.mapping:
                return float(self.mapping[text])
            try:
                value = float(text)
            except ValueError:
                raise UnknownGradeSymbol(f"grade symbol {text!r} is not on the scale") from None
        if not math.isfinite(value) or not self.min_points <= value <= self.max_points:
            raise UnknownGradeSymbol(
                f"numeric grade {value!r} is outside the scale range "
                f"[{self.min_points}, {self.max_points}]"
            )
        return value

    def clamp(self, value: float) -> float:
        return min(max(value, self.min_points), self.max_points)

    def quantize(self, value: float) -> float:
        """Snap a value to the nearest scale value; ties take the lower one."""
        return min(self.values, key=lambda v: (abs(v - value), v))


@dataclass(frozen=True)
class GradeRecord:
    """One observed (student, course, term, grade) cell."""

    student_id: str
    course_id: str
    term: int
    grade_points: float


class RatingsMatrix:
    """Sparse student-by-course grade table with cached means.

    Construction validates every record; a built matrix never mutates.
    ``with_student`` returns a new matrix value instead of editing in place.
    """

    def __init__(
        self,
        records: Sequence[GradeRecord],
        scale: GradeScale,
        extra_students: Sequence[str] = (),
    ) -> None:
        records = list(records)
        by_student: dict[str, dict[str, float]] = {}
        by_course: dict[str, dict[str, float]] = {}
        course_terms: dict[str, int] = {}
        for rec in records:
            if not isinstance(rec.term, int) or rec.term < 1:
                raise MalformedRow(f"term must be a positive integer, got {rec.term!r}")
            if not scale.min_points <= rec.grade_points <= scale.max_points:
                raise UnknownGradeSymbol(
                    f"grade {rec.grade_points} for ({rec.student_id}, {rec.course_id}) "
                    "is outside the scale range"
                )
            known_term = course_terms.get(rec.course_id)
            if known_term is None:
                course_terms[rec.course_id] = rec.term
            elif known_term != rec.term:
                raise InconsistentCourseTerm(
                    f"course {rec.course_id} appears in terms {known_term} and {rec.term}"
                )
            row = by_student.setdefault(rec.student_id, {})
            if rec.course_id in row:
                raise DuplicateRecord(
                    f"duplicate rating for ({rec.student_id}, {rec.course_id})"
                )
            row[rec.course_id] = rec.grade_points
            by_course.setdefault(rec.course_id, {})[rec.student_id] = rec.grade_points
        for sid in extra_students:
            if sid in by_student:
                raise DuplicateRecord(f"extra student {sid!r} already has ratings")
            by_student[sid] = {}

        self._records: tuple = tuple(records)
        self._scale = scale
        self._by_student = by_student
        self._by_course = by_course
        self._course_terms = course_terms
        self._students = tuple(by_student)
        self._courses = tuple(by_course)
        self._student_order = {sid: n for n, sid in enumerate(self._students)}
        self._course_order = {cid: n for n, cid in enumerate(self._courses)}
        self._student_means = {
            sid: sum(row.values()) / len(row) for sid, row in by_student.items() if row
        }
        self._course_means = {
            cid: sum(col.values()) / len(col) for cid, col in by_course.items()
        }
        if records:
            self._global_mean = sum(r.grade_points for r in records) / len(records)
            self._degenerate = False
        else:
            self._global_mean = scale.midpoint
            self._degenerate = True
        self._fingerprint: str | None = None

    # -- identity ---------------------------------------------------------

    @property
    def scale(self) -> GradeScale:
        return self._scale

    @property
    def degenerate(self) -> bool:
        """True when the matrix holds no ratings at all."""
        return self._degenerate

    def fingerprint(self) -> str:
        """Content hash of ratings and scale; stable across record order."""
        if self._fingerprint is None:
            h = hashlib.sha256()
            for sid, cid, term, pts in sorted(
                (r.student_id, r.course_id, r.term, r.grade_points) for r in self._records
            ):
                h.update(f"{sid}\x1f{cid}\x1f{term}\x1f{pts.hex()}\x1e".encode())
            h.update(b"\x1d")
            for symbol in sorted(self._scale.mapping):
                h.update(f"{symbol}\x1f{float(self._scale.mapping[symbol]).hex()}\x1e".encode())
            h.update(f"{self._scale.min_points.hex()}\x1f{self._scale.max_points.hex()}".encode())
            self._fingerprint = h.hexdigest()
        return self._fingerprint

    def __eq__(self, other) -> bool:
        if not isinstance(other, RatingsMatrix):
            return NotImplemented
        return (
            self._by_student == other._by_student
            and self._course_terms == other._course_terms
            and self._scale == other._scale
        )

    __hash__ = None  # type: ignore[assignment]

    def __len__(self) -> int:
        return len(self._records)

    # -- lookups ----------------------------------------------------------

    @property
    def students(self) -> tuple:
        """Student ids in first-seen order."""
        return self._students

    @property
    def courses(self) -> tuple:
        """Course ids in first-seen order."""
        return self._courses

    @property
    def n_ratings(self) -> int:
        return len(self._records)

    def has_student(self, student_id: str) -> bool:
        return student_id in self._by_student

    def has_course(self, course_id: str) -> bool:
        return course_id in self._by_course

    def ratings_of(self, student_id: str) -> Mapping[str, float]:
        try:
            return MappingProxyType(self._by_student[student_id])
        except KeyError:
            raise UnknownStudent(f"unknown student {student_id!r}") from None

    def raters_of(self, course_id: str) -> Mapping[str, float]:
        try:
            return MappingProxyType(self._by_course[course_id])
        except KeyError:
            raise UnknownCourse(f"unknown course {course_id!r}") from None

    def rating(self, student_id: str, course_id: str):
        """The stored grade for a cell, or None when unrated."""
        return self.ratings_of(student_id).get(course_id)

    @property
    def student_means(self) -> Mapping[str, float]:
        """Mean over ALL courses each student rated (students with none are absent)."""
        return MappingProxyType(self._student_means)

    @property
    def course_means(self) -> Mapping[str, float]:
        return MappingProxyType(self._course_means)

    @property
    def global_mean(self) -> float:
        return self._global_mean

    @property
    def course_terms(self) -> Mapping[str, int]:
        return MappingProxyType(self._course_terms)

    @property
    def student_order(self) -> Mapping[str, int]:
        """First-seen position of each student; canonical iteration order."""
        return MappingProxyType(self._student_order)

    @property
    def course_order(self) -> Mapping[str, int]:
        return MappingProxyType(self._course_order)

    # -- set operations ----------------------------------------------------

    def co_rated_items(self, u: str, v: str) -> set:
        """Courses rated by both students; symmetric, and u == v gives u's full set."""
        ru, rv = self.ratings_of(u), self.ratings_of(v)
        return set(ru) & set(rv)

    def co_rating_users(self, i: str, j: str) -> set:
        """Students who rated both courses; symmetric in (i, j)."""
        ri, rj = self.raters_of(i), self.raters_of(j)
        return set(ri) & set(rj)

    # -- derivation --------------------------------------------------------

    def to_records(self) -> list:
        """Records in their original ingest order (round-trips exactly)."""
        return list(self._records)

    def with_student(self, student_id: str, ratings: Mapping[str, float]) -> "RatingsMatrix":
        """A new matrix holding one extra student; existing cells untouched.

        Every course in ``ratings`` must already exist; an empty mapping adds
        a known student with no ratings (used by what-if previews).
        """
        if self.has_student(student_id):
            raise DuplicateRecord(f"student {student_id!r} already present")
        for cid in ratings:
            if cid not in self._by_course:
                raise UnknownCourse(f"unknown course {cid!r}")
        new_records = self.to_records() + [
            GradeRecord(student_id, cid, self._course_terms[cid], float(points))
            for cid, points in ratings.items()
        ]
        extra = () if ratings else (student_id,)
        return RatingsMatrix(new_records, self._scale, extra_students=extra)


# -- ingest and file formats ---------------------------------------------


def ingest_records(rows: Iterable[str], scale: GradeScale) -> RatingsMatrix:
    """Parse raw CSV lines (header optional) into a validated matrix."""
    records = []
    expect_header = True
    for lineno, raw in enumerate(rows, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        if expect_header and line == CSV_HEADER:
            expect_header = False
            continue
        expect_header = False
        parts = line.split(",")
        if len(parts) != 4:
            raise MalformedRow(f"line {lineno}: expected 4 fields, got {len(parts)}")
        student_id, course_id = parts[0].strip(), parts[1].strip()
        if not student_id or not course_id:
            raise MalformedRow(f"line {lineno}: empty student or course id")
        try:
            term = int(parts[2].strip())
        except ValueError:
            raise MalformedRow(f"line {lineno}: unparsable term {parts[2]!r}") from None
        if term < 1:
            raise MalformedRow(f"line {lineno}: term must be >= 1, got {term}")
        records.append(GradeRecord(student_id, course_id, term, scale.to_points(parts[3])))
    return RatingsMatrix(records, scale)


def load_ratings_csv(path, scale: GradeScale) -> RatingsMatrix:
    text = Path(path).read_text(encoding="utf-8")
    return ingest_records(text.splitlines(), scale)


def records_to_csv_lines(records: Sequence[GradeRecord]) -> list:
    lines = [CSV_HEADER]
    lines.extend(
        f"{r.student_id},{r.course_id},{r.term},{r.grade_points!r}" for r in records
    )
    return lines


def write_records_csv(records: Sequence[GradeRecord], path) -> Path:
    path = Path(path)
    path.write_text("\n".join(records_to_csv_lines(records)) + "\n", encoding="utf-8")
    return path


def load_scale_csv(path) -> GradeScale:
    """Read a `symbol,points` scale file; bounds come from the mapped values."""
    mapping: dict[str, float] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or (lineno == 1 and line == SCALE_CSV_HEADER):
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise InvalidScale(f"line {lineno}: expected symbol,points")
        symbol = parts[0].strip()
        if not symbol:
            raise InvalidScale(f"line {lineno}: empty symbol")
        if symbol in mapping:
            raise InvalidScale(f"line {lineno}: duplicate symbol {symbol!r}")
        try:
            mapping[symbol] = float(parts[1])
        except ValueError:
            raise InvalidScale(f"line {lineno}: unparsable points {parts[1]!r}") from None
    if not mapping:
        raise InvalidScale("scale file defines no symbols")
    return GradeScale(mapping, min(mapping.values()), max(mapping.values()))
