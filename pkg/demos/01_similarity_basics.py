"""Who studies like whom: similarity on a hand-written transcript table.

A tiny cohort of five students and five courses, entered as letter grades,
is enough to see what Pearson correlation and adjusted cosine actually
measure, and what the significance / amplification transforms do to the
raw numbers.
"""

from gradelens import (
    GradeScale,
    WeightingParams,
    adjusted_cosine_item_similarity,
    apply_case_amplification,
    apply_significance_weighting,
    build_similarity_model,
    ingest_records,
    pearson_user_similarity,
)
from gradelens.similarity import ITEM_ITEM, USER_USER

# Alma and Bea agree on everything, Cole is their mirror image, Dana is
# flat, and Eli only shares two courses with anyone.
TRANSCRIPTS = """\
student_id,course_id,term,grade
alma,calc1,1,A
alma,stats,1,B+
alma,prog1,1,A-
alma,lit,2,B
bea,calc1,1,A-
bea,stats,1,B
bea,prog1,1,B+
bea,lit,2,C+
cole,calc1,1,C
cole,stats,1,B
cole,prog1,1,B-
cole,lit,2,A
dana,calc1,1,B
dana,stats,1,B
dana,prog1,1,B
dana,lit,2,B
eli,calc1,1,A
eli,ethics,2,B-
"""


def main():
    scale = GradeScale.default()
    matrix = ingest_records(TRANSCRIPTS.splitlines(), scale)
    print(f"cohort: {len(matrix.students)} students, {len(matrix.courses)} courses")
    print()

    print("pairwise Pearson correlation (computed over shared courses,")
    print("centered on each student's overall mean):")
    for u, v in [("alma", "bea"), ("alma", "cole"), ("alma", "dana"), ("alma", "eli")]:
        sim = pearson_user_similarity(matrix, u, v)
        shared = len(set(matrix.ratings_of(u)) & set(matrix.ratings_of(v)))
        print(f"  {u:5s} vs {v:5s}: {sim:+.4f}  ({shared} shared courses)")
    print()

    # Dana rated everything B. A flat vector has no deviations to correlate,
    # so every similarity involving dana collapses to 0 (no evidence).
    # alma/eli share only calc1; below the default min_corated=2 that is
    # also reported as 0 rather than a meaningless +-1.
    sim_loose = pearson_user_similarity(matrix, "alma", "eli", min_corated=1)
    print(f"alma vs eli with min_corated=1: {sim_loose:+.1f} (a single shared")
    print("course always gives a degenerate +-1, which is why the default floor is 2)")
    print()

    print("course-to-course adjusted cosine (user-mean-centered):")
    for i, j in [("calc1", "stats"), ("calc1", "lit"), ("stats", "prog1")]:
        sim = adjusted_cosine_item_similarity(matrix, i, j)
        print(f"  {i:5s} vs {j:5s}: {sim:+.4f}")
    print()

    # Transforms. Significance weighting shrinks similarities backed by few
    # co-ratings; case amplification pushes weights toward the extremes.
    raw = 0.85
    print(f"a raw similarity of {raw} backed by n co-ratings, threshold 50:")
    for n in (5, 25, 50, 80):
        print(f"  n={n:3d}: {apply_significance_weighting(raw, n, 50):.4f}")
    print(f"case amplification of 0.5 at rho=2.5: {apply_case_amplification(0.5, 2.5):.4f}")
    print(f"the sign survives: -0.5 -> {apply_case_amplification(-0.5, 2.5):.4f}")
    print()

    # The batch model precomputes every pair once. Ask it for the most and
    # least alike pairs in the cohort.
    model = build_similarity_model(matrix, USER_USER)
    pairs = sorted(model.table.items(), key=lambda kv: kv[1], reverse=True)
    print(f"user-user model: {model.n_pairs} pairs")
    for (u, v), sim in pairs[:2] + pairs[-2:]:
        print(f"  {u} / {v}: {sim:+.4f}")

    weighted = build_similarity_model(
        matrix, ITEM_ITEM, WeightingParams(significance_threshold=5)
    )
    print(f"item-item model with significance threshold 5: {weighted.n_pairs} pairs,")
    print("every similarity shrunk by n/5 because no course pair has 5 raters here")


if __name__ == "__main__":
    main()
