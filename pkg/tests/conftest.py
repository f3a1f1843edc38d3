"""Shared fixtures and matrix builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from gradelens import GradeRecord, GradeScale, RatingsMatrix


def make_matrix(rows, scale=None):
    """Build a matrix from (student, course, term, points) tuples."""
    scale = scale or GradeScale.default()
    return RatingsMatrix([GradeRecord(*row) for row in rows], scale)


def random_rows(rng, n_students, n_courses, density=0.6, continuous=False, scale=None):
    """Random sparse grade tuples with ids whose sort order is index order.

    Terms cycle over 1..3 by course index. Quantized mode draws actual
    scale values; continuous mode draws uniformly over the scale range.
    """
    scale = scale or GradeScale.default()
    rows = []
    values = scale.values
    for s in range(n_students):
        for c in range(n_courses):
            if rng.random() >= density:
                continue
            if continuous:
                grade = float(rng.uniform(scale.min_points, scale.max_points))
            else:
                grade = values[int(rng.integers(len(values)))]
            rows.append((f"S{s:03d}", f"C{c:03d}", 1 + c % 3, grade))
    if not rows:
        rows.append(("S000", "C000", 1, values[len(values) // 2]))
    return rows


def rows_of(matrix: RatingsMatrix):
    """Plain-tuple view of a matrix for the dense reference."""
    return [
        (r.student_id, r.course_id, r.term, r.grade_points) for r in matrix.to_records()
    ]


@pytest.fixture
def scale():
    return GradeScale.default()


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)
