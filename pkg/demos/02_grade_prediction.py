"""Predicting the grades a student has not earned yet.

Synthesizes a 120-student cohort, hides one student's final term, then
reconstructs those grades from the k most similar peers. Also shows the
item-based route, elective ranking, the fallback ladder, and an ad-hoc
what-if history that never touches the stored data.
"""

from gradelens import (
    GradeScale,
    NeighborhoodConfig,
    RatingsMatrix,
    build_similarity_model,
    predict_item_based,
    predict_user_based,
    recommend_top_n,
    synthesize_dataset,
    whatif_user_predictions,
)
from gradelens.similarity import ITEM_ITEM, USER_USER

STUDENT = "S042"

records = synthesize_dataset(120, (4, 4, 3), seed=11)
actual = {r.course_id: r.grade_points for r in records if r.student_id == STUDENT and r.term == 3}
visible = [r for r in records if not (r.student_id == STUDENT and r.term == 3)]
matrix = RatingsMatrix(visible, GradeScale.default())

print(f"cohort of {len(matrix.students)} students; {STUDENT}'s term-3 grades are hidden")
print()

user_model = build_similarity_model(matrix, USER_USER)
item_model = build_similarity_model(matrix, ITEM_ITEM)
cfg = NeighborhoodConfig(k=10)

print(f"{'course':8s} {'actual':>7s} {'user-cf':>8s} {'item-cf':>8s}   neighborhood")
for course in sorted(actual):
    pu = predict_user_based(matrix, user_model, STUDENT, course, cfg)
    pi = predict_item_based(matrix, item_model, STUDENT, course, cfg)
    note = f"{pu.neighborhood_size_used} peers"
    if pu.fallback_level != "none":
        note = f"fallback: {pu.fallback_level}"
    print(f"{course:8s} {actual[course]:7.2f} {pu.value:8.3f} {pi.value:8.3f}   {note}")
print()

# Elective ranking: which hidden course should the advisor suggest first?
candidates = sorted(set(matrix.courses) - set(matrix.ratings_of(STUDENT)))
ranked = recommend_top_n(matrix, user_model, STUDENT, candidates, n=3, cfg=cfg)
print("advisor ranking (highest predicted grade first):")
for rank, (course, pred) in enumerate(ranked, start=1):
    print(f"  {rank}. {course}  predicted {pred.value:.3f}")
print()

# The fallback ladder in action: a brand new transfer student shares no
# courses with anyone, so the what-if path walks down to the course mean.
print("what-if for an empty history (new transfer student):")
for p in whatif_user_predictions(matrix, {}, candidates[:2]):
    print(f"  {p.course_id}: {p.value:.3f} via {p.fallback_level}")
print()

# What-if with a real history: raise one grade and watch the ranking move.
history = dict(matrix.ratings_of(STUDENT))
boosted = dict(history)
boosted[sorted(history)[0]] = matrix.scale.max_points
before = whatif_user_predictions(matrix, history, candidates, cfg)
after = whatif_user_predictions(matrix, boosted, candidates, cfg)
print(f"what-if: raising {sorted(history)[0]} to the scale max moves predictions by:")
for b, a in zip(before, after):
    print(f"  {b.course_id}: {b.value:.3f} -> {a.value:.3f} ({a.value - b.value:+.4f})")
