"""Verification tests for splitting, MAE, the experiment grid, and reports."""

from __future__ import annotations

import numpy as np
import pytest

from gradelens import (
    DestinationUnwritable,
    EmptyPairList,
    EmptyReport,
    EvaluationReport,
    ExperimentConfig,
    GradeScale,
    InsufficientStudents,
    RatingsMatrix,
    SplitSpec,
    UnknownTerm,
    WeightingParams,
    emit_report,
    global_mean_baseline,
    mae,
    run_experiment,
    split_held_out_students,
    synthesize_dataset,
)
from gradelens.evaluation import RESULTS_HEADER

from conftest import make_matrix, random_rows, rows_of
from reference import experiment_mae_ref, mae_ref, split_ref


def record_tuples(records):
    return [(r.student_id, r.course_id, r.term, r.grade_points) for r in records]


class TestHeldOutSplit:
    def _matrix(self, seed=7, n_students=14, n_courses=9):
        rng = np.random.default_rng(seed)
        return make_matrix(random_rows(rng, n_students, n_courses, density=0.7))

    def test_split_partitions_the_records(self):
        m = self._matrix()
        train, test = split_held_out_students(m, SplitSpec(4, 2, seed=3))
        got = sorted(record_tuples(train.to_records()) + record_tuples(test))
        assert got == sorted(record_tuples(m.to_records()))

    def test_test_side_is_exactly_the_chosen_students_term_grades(self):
        m = self._matrix()
        train, test = split_held_out_students(m, SplitSpec(4, 2, seed=3))
        chosen = {rec.student_id for rec in test}
        assert len(chosen) == 4
        for rec in test:
            assert rec.term == 2
        # No chosen student keeps any term-2 grade on the train side.
        for rec in train.to_records():
            if rec.student_id in chosen:
                assert rec.term != 2

    def test_same_seed_reproduces_the_split(self):
        m = self._matrix()
        for seed in range(8):
            a = split_held_out_students(m, SplitSpec(3, 2, seed))
            b = split_held_out_students(m, SplitSpec(3, 2, seed))
            assert record_tuples(a[1]) == record_tuples(b[1])
            assert a[0].fingerprint() == b[0].fingerprint()

    def test_different_seeds_choose_different_students(self):
        m = self._matrix()
        picks = {
            frozenset(r.student_id for r in split_held_out_students(m, SplitSpec(3, 2, s))[1])
            for s in range(10)
        }
        assert len(picks) > 1

    def test_zero_holdouts_keep_everything(self):
        m = self._matrix()
        train, test = split_held_out_students(m, SplitSpec(0, 2, seed=0))
        assert test == []
        assert train.fingerprint() == m.fingerprint()

    def test_matches_reference_split(self):
        m = self._matrix(seed=11)
        rows = rows_of(m)
        for seed in range(12):
            train, test = split_held_out_students(m, SplitSpec(5, 3, seed))
            ref_train, ref_test = split_ref(rows, 5, 3, seed)
            assert sorted(record_tuples(test)) == sorted(ref_test)
            assert sorted(record_tuples(train.to_records())) == sorted(ref_train)

    def test_train_means_are_recomputed_from_the_remainder(self):
        m = self._matrix()
        train, _ = split_held_out_students(m, SplitSpec(5, 2, seed=1))
        grades = [r.grade_points for r in train.to_records()]
        assert train.global_mean == pytest.approx(float(np.mean(grades)), abs=1e-12)

    def test_requesting_more_students_than_eligible_fails(self):
        m = self._matrix()
        with pytest.raises(InsufficientStudents):
            split_held_out_students(m, SplitSpec(1000, 2, seed=0))

    def test_unknown_term_fails(self):
        m = self._matrix()
        with pytest.raises(UnknownTerm):
            split_held_out_students(m, SplitSpec(2, 9, seed=0))

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            SplitSpec(-1, 2, 0)
        with pytest.raises(ValueError):
            SplitSpec(3, 0, 0)

    def test_full_catalog_shape_yields_175_test_and_6200_train(self):
        """255 fully enrolled students, terms (9, 9, 7), 25 held out."""
        records = synthesize_dataset(255, (9, 9, 7), seed=7)
        assert len(records) == 6375
        m = RatingsMatrix(records, GradeScale.default())
        train, test = split_held_out_students(m, SplitSpec(25, 3, seed=7))
        assert len(test) == 25 * 7 == 175
        assert len(train.to_records()) == 6200


class TestMaeAndBaseline:
    def test_hand_value(self):
        assert mae([(3.0, 3.5), (2.0, 1.0)]) == 0.75

    def test_perfect_predictions_score_zero(self):
        assert mae([(2.0, 2.0), (3.3, 3.3)]) == 0.0

    def test_constant_shift_scores_the_shift(self):
        actual = [1.0, 2.0, 3.0, 4.0]
        assert mae([(a + 0.5, a) for a in actual]) == pytest.approx(0.5)
        assert mae([(a - 0.5, a) for a in actual]) == pytest.approx(0.5)

    def test_pair_order_does_not_matter(self, rng):
        pairs = [(float(p), float(a)) for p, a in rng.uniform(0, 4.3, size=(30, 2))]
        shuffled = [pairs[int(i)] for i in rng.permutation(len(pairs))]
        assert mae(shuffled) == pytest.approx(mae(pairs), abs=1e-12)

    def test_matches_reference(self, rng):
        pairs = [(float(p), float(a)) for p, a in rng.uniform(0, 4.3, size=(25, 2))]
        assert mae(pairs) == mae_ref(pairs)

    def test_empty_pairs_rejected(self):
        with pytest.raises(EmptyPairList):
            mae([])

    def test_global_mean_baseline_is_constant_predictor_error(self):
        m = make_matrix(
            [
                ("S01", "C01", 1, 4.0),
                ("S01", "C02", 1, 2.0),
                ("S02", "C01", 1, 3.0),
            ]
        )
        # Use the full matrix as train and two of its records as the test side.
        records = m.to_records()[:2]
        want = mae([(m.global_mean, r.grade_points) for r in records])
        assert global_mean_baseline(m, records) == want


class TestRunExperiment:
    def _records(self, seed=5, n_students=14, n_courses=8):
        rng = np.random.default_rng(seed)
        rows = random_rows(rng, n_students, n_courses, density=0.75, continuous=True)
        return make_matrix(rows).to_records()

    def test_grid_produces_one_row_per_cell_in_canonical_order(self):
        records = self._records()
        cfg = ExperimentConfig(
            splits=(SplitSpec(3, 2, seed=1),),
            k_values=(20, 5, "all", 10, 15),
        )
        report = run_experiment(records, cfg)
        assert len(report) == 10
        assert [(r.algorithm, r.k) for r in report.rows] == [
            ("item_based", 5),
            ("item_based", 10),
            ("item_based", 15),
            ("item_based", 20),
            ("item_based", "all"),
            ("user_based", 5),
            ("user_based", 10),
            ("user_based", 15),
            ("user_based", 20),
            ("user_based", "all"),
        ]

    def test_rerun_is_bit_identical(self):
        records = self._records()
        cfg = ExperimentConfig(splits=(SplitSpec(4, 2, seed=2), SplitSpec(4, 2, seed=3)))
        a = run_experiment(records, cfg)
        b = run_experiment(records, cfg)
        assert len(a) == len(b) == 20
        for ra, rb in zip(a.rows, b.rows):
            assert ra.mae == rb.mae
            assert ra.coverage == rb.coverage
            assert ra.x == rb.x
            assert dict(ra.fallback_histogram) == dict(rb.fallback_histogram)
            assert ra.mae_genuine == rb.mae_genuine

    def test_bookkeeping_fields_are_consistent(self):
        records = self._records()
        cfg = ExperimentConfig(splits=(SplitSpec(4, 2, seed=9),))
        report = run_experiment(records, cfg)
        total = len(records)
        for row in report.rows:
            assert sum(row.fallback_histogram.values()) == row.n_pairs
            assert 0.0 < row.x < 1.0
            assert row.x == pytest.approx(
                row.n_pairs / (row.coverage * total), abs=1e-9
            )
            assert 0.0 <= row.mae
            assert row.coverage <= 1.0

    def test_small_grid_matches_reference_pipeline(self):
        """End-to-end MAE agrees with the dense reference for every cell."""
        rng = np.random.default_rng(31)
        rows = random_rows(rng, 14, 8, density=0.75, continuous=True)
        m = make_matrix(rows)
        lo, hi = m.scale.min_points, m.scale.max_points
        cfg = ExperimentConfig(
            splits=(SplitSpec(3, 2, seed=4),),
            k_values=(1, 3, "all"),
        )
        report = run_experiment(m.to_records(), cfg)
        assert len(report) == 6
        for row in report.rows:
            want, n_want = experiment_mae_ref(
                rows_of(m), row.algorithm, row.k, 3, 2, 4, lo, hi
            )
            assert row.mae == pytest.approx(want, abs=1e-9)
            assert row.n_pairs == n_want

    def test_weighted_grid_matches_reference_pipeline(self):
        rng = np.random.default_rng(32)
        rows = random_rows(rng, 12, 7, density=0.7, continuous=True)
        m = make_matrix(rows)
        lo, hi = m.scale.min_points, m.scale.max_points
        cfg = ExperimentConfig(
            splits=(SplitSpec(3, 2, seed=8),),
            k_values=(3, "all"),
            weighting=WeightingParams(
                significance_threshold=4, amplification_exponent=2.5
            ),
        )
        report = run_experiment(m.to_records(), cfg)
        for row in report.rows:
            want, n_want = experiment_mae_ref(
                rows_of(m), row.algorithm, row.k, 3, 2, 8, lo, hi,
                threshold=4, rho=2.5,
            )
            assert row.mae == pytest.approx(want, abs=1e-9)
            assert row.n_pairs == n_want

    def test_vanished_student_is_skipped_not_fatal(self):
        """A held-out student with no other grades lowers coverage only.

        S03 exists solely through the held-out term-2 course, so after the
        split there is nothing to anchor a prediction on; their cell is
        dropped while the other cells still evaluate (via fallback here,
        since the one remaining rater carries no similarity signal).
        """
        rows = [
            ("S01", "C01", 1, 4.0),
            ("S01", "C02", 1, 1.0),
            ("S01", "C03", 2, 3.0),
            ("S02", "C01", 1, 1.0),
            ("S02", "C02", 1, 4.0),
            ("S02", "C03", 2, 2.0),
            ("S03", "C03", 2, 4.0),
            ("S04", "C01", 1, 3.0),
            ("S04", "C02", 1, 3.0),
            ("S04", "C03", 2, 3.3),
        ]
        m = make_matrix(rows)
        chosen_seed = None
        for seed in range(100):
            _, test = split_held_out_students(m, SplitSpec(3, 2, seed))
            if {r.student_id for r in test} == {"S01", "S02", "S03"}:
                chosen_seed = seed
                break
        assert chosen_seed is not None
        cfg = ExperimentConfig(
            splits=(SplitSpec(3, 2, chosen_seed),),
            algorithms=("user_based",),
            k_values=(10,),
        )
        row = run_experiment(m.to_records(), cfg).rows[0]
        assert row.n_pairs == 2
        assert row.coverage == pytest.approx(2 / 3)
        assert dict(row.fallback_histogram) == {
            "none": 0, "user_mean": 2, "item_mean": 0, "global_mean": 0,
        }
        assert row.mae == pytest.approx(0.5)
        assert row.mae_genuine is None

    def test_genuine_mae_present_when_real_neighborhoods_exist(self):
        records = self._records()
        cfg = ExperimentConfig(splits=(SplitSpec(3, 2, seed=1),), k_values=(10,))
        for row in run_experiment(records, cfg).rows:
            if row.fallback_histogram["none"] > 0:
                assert row.mae_genuine is not None
                assert row.mae_genuine >= 0.0

    def test_empty_dataset_rejected(self):
        cfg = ExperimentConfig(splits=(SplitSpec(1, 1, 0),))
        with pytest.raises(EmptyPairList):
            run_experiment([], cfg)

    def test_config_validation(self):
        split = SplitSpec(1, 1, 0)
        with pytest.raises(ValueError):
            ExperimentConfig(splits=())
        with pytest.raises(ValueError):
            ExperimentConfig(splits=(split,), algorithms=("matrix_factorization",))
        with pytest.raises(ValueError):
            ExperimentConfig(splits=(split,), k_values=())
        with pytest.raises(ValueError):
            ExperimentConfig(splits=(split,), k_values=(0,))


class TestSynthesizeDataset:
    def test_full_catalog_shape(self):
        records = synthesize_dataset(255, (9, 9, 7), seed=7)
        assert len(records) == 255 * 25
        students = {r.student_id for r in records}
        courses = {r.course_id for r in records}
        assert len(students) == 255
        assert len(courses) == 25
        assert min(students) == "S001" and max(students) == "S255"
        per_term = {}
        for r in records:
            per_term.setdefault(r.term, set()).add(r.course_id)
        assert {t: len(cs) for t, cs in per_term.items()} == {1: 9, 2: 9, 3: 7}
        assert "T1C01" in courses and "T3C07" in courses

    def test_identical_arguments_identical_dataset(self):
        a = synthesize_dataset(40, (4, 3), seed=12)
        b = synthesize_dataset(40, (4, 3), seed=12)
        assert a == b

    def test_seed_changes_the_grades(self):
        a = synthesize_dataset(40, (4, 3), seed=12)
        b = synthesize_dataset(40, (4, 3), seed=13)
        assert a != b

    def test_quantized_grades_sit_on_scale_values(self, scale):
        records = synthesize_dataset(30, (5, 4), seed=3)
        values = set(scale.values)
        assert all(r.grade_points in values for r in records)

    def test_continuous_grades_stay_in_bounds_off_the_lattice(self, scale):
        records = synthesize_dataset(30, (5, 4), seed=3, quantize=False)
        assert all(
            scale.min_points <= r.grade_points <= scale.max_points for r in records
        )
        off_lattice = [r for r in records if r.grade_points not in set(scale.values)]
        assert off_lattice

    def test_noise_free_factor_free_grades_are_additive(self, scale):
        """Without noise or factors, course offsets are the same for everyone."""
        records = synthesize_dataset(
            25, (4, 4), noise_sd=0.0, latent_dim=0, seed=9, quantize=False
        )
        by_student = {}
        for r in records:
            by_student.setdefault(r.student_id, {})[r.course_id] = r.grade_points
        courses = sorted({r.course_id for r in records})
        lo, hi = scale.min_points, scale.max_points
        deltas = []
        for sid, grades in by_student.items():
            a, b = grades[courses[0]], grades[courses[1]]
            if lo < a < hi and lo < b < hi:  # clamping would bend the offset
                deltas.append(a - b)
        assert len(deltas) >= 5
        assert max(deltas) - min(deltas) < 1e-9

    def test_average_grade_sits_near_the_planted_level(self, scale):
        records = synthesize_dataset(120, (6, 6), seed=2, quantize=False)
        mu = scale.min_points + 0.7 * (scale.max_points - scale.min_points)
        got = float(np.mean([r.grade_points for r in records]))
        assert got == pytest.approx(mu, abs=0.2)

    def test_argument_validation(self):
        with pytest.raises(ValueError):
            synthesize_dataset(0, (3,))
        with pytest.raises(ValueError):
            synthesize_dataset(5, ())
        with pytest.raises(ValueError):
            synthesize_dataset(5, (3, 0))
        with pytest.raises(ValueError):
            synthesize_dataset(5, (3,), noise_sd=-0.1)
        with pytest.raises(ValueError):
            synthesize_dataset(5, (3,), latent_dim=-1)


class TestReportEmission:
    def _report(self, k_values=(5, 10, "all")):
        rng = np.random.default_rng(8)
        rows = random_rows(rng, 12, 7, density=0.8, continuous=True)
        cfg = ExperimentConfig(splits=(SplitSpec(3, 2, seed=6),), k_values=k_values)
        return run_experiment(make_matrix(rows).to_records(), cfg)

    def test_results_csv_has_pinned_header_and_one_line_per_row(self, tmp_path):
        report = self._report()
        emit_report(report, tmp_path / "out")
        lines = (tmp_path / "out" / "results.csv").read_text().splitlines()
        assert lines[0] == RESULTS_HEADER
        assert len(lines) == 1 + len(report)
        assert all(len(line.split(",")) == 12 for line in lines[1:])

    def test_results_csv_round_trips_mae_exactly(self, tmp_path):
        report = self._report()
        emit_report(report, tmp_path / "out")
        lines = (tmp_path / "out" / "results.csv").read_text().splitlines()[1:]
        for line, row in zip(lines, report.rows):
            fields = line.split(",")
            assert fields[0] == row.algorithm
            assert fields[1] == str(row.k)
            assert float(fields[4]) == row.mae
            assert float(fields[5]) == row.coverage
            assert int(fields[11]) == row.n_pairs

    def test_series_files_cover_each_algorithm_and_the_k10_overlay(self, tmp_path):
        report = self._report()
        written = emit_report(report, tmp_path / "out")
        names = {p.name for p in written}
        assert names == {
            "results.csv", "mae_vs_k_user.csv", "mae_vs_k_item.csv", "mae_vs_x_k10.csv",
        }
        for p in written:
            assert p.exists()
        user_series = (tmp_path / "out" / "mae_vs_k_user.csv").read_text()
        assert user_series.startswith("# series: user_based")
        data_lines = [
            l for l in user_series.splitlines() if l and not l.startswith("#")
        ]
        assert len(data_lines) == 3  # one point per k for the single split
        overlay = (tmp_path / "out" / "mae_vs_x_k10.csv").read_text()
        assert "# series: user_based, k=10" in overlay
        assert "# series: item_based, k=10" in overlay

    def test_overlay_is_omitted_when_k10_is_not_in_the_grid(self, tmp_path):
        report = self._report(k_values=(3, "all"))
        written = emit_report(report, tmp_path / "out")
        assert not (tmp_path / "out" / "mae_vs_x_k10.csv").exists()
        assert {p.name for p in written} == {
            "results.csv", "mae_vs_k_user.csv", "mae_vs_k_item.csv",
        }

    def test_empty_report_rejected(self, tmp_path):
        with pytest.raises(EmptyReport):
            emit_report(EvaluationReport(()), tmp_path / "out")

    def test_unwritable_destination_reported(self, tmp_path):
        blocker = tmp_path / "blocker"
        blocker.write_text("occupied")
        with pytest.raises(DestinationUnwritable):
            emit_report(self._report(), blocker / "nested")
