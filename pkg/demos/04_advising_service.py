"""Driving the HTTP advising service end to end, no server process needed.

Runs the FastAPI app in-process with a test client: upload a grade CSV,
train a similarity model, fetch predictions and a ranking, then play a
what-if ("what does next term look like if the student aces stats?").
This is exactly the surface a frontend talks to.
"""

import json
import tempfile
import warnings
from pathlib import Path

warnings.filterwarnings("ignore")  # the bundled test client warns on import

from fastapi.testclient import TestClient

from gradelens import Store, synthesize_dataset
from gradelens.data import records_to_csv_lines
from gradelens.service import create_app

store = Store(Path(tempfile.mkdtemp(prefix="gradelens_store_")))
client = TestClient(create_app(store))

# 1. Upload a cohort. One student's final term is withheld so there is
#    something left to predict.
records = synthesize_dataset(60, (4, 4, 3), seed=3)
records = [r for r in records if not (r.student_id == "S07" and r.term == 3)]
csv_text = "\n".join(records_to_csv_lines(records)) + "\n"
resp = client.post("/datasets", json={"dataset_id": "cohort", "records_csv": csv_text})
resp.raise_for_status()
info = resp.json()
print(f"uploaded dataset {info['dataset_id']}: {info['n_students']} students, "
      f"{info['n_courses']} courses, {info['n_ratings']} ratings")

# 2. Train a user-user model server-side.
resp = client.post("/models", json={"model_id": "um", "algorithm": "user_based"})
resp.raise_for_status()
print(f"trained model um: {resp.json()['n_pairs']} similarity pairs")

# 3. Predictions for the withheld term.
resp = client.get("/students/S07/predictions", params={"model": "um", "k": 10})
resp.raise_for_status()
print("\npredicted term-3 grades for S07:")
for p in resp.json()["predictions"]:
    flag = "" if p["fallback_level"] == "none" else f"  [{p['fallback_level']}]"
    print(f"  {p['course_id']}: {p['value']:.3f}{flag}")

# 4. Ranked recommendation, the advisor view.
resp = client.get("/students/S07/recommendations", params={"model": "um", "n": 3})
resp.raise_for_status()
print("\nrecommended order:")
for rank, entry in enumerate(resp.json()["recommendations"], start=1):
    print(f"  {rank}. {entry['course_id']} ({entry['value']:.3f})")

# 5. What-if: take S07's real history, bump one course to the maximum,
#    and re-rank. The stored dataset is never modified.
history_rows = [
    {"course_id": r.course_id, "grade_points": r.grade_points}
    for r in records
    if r.student_id == "S07"
]
bumped = [dict(row) for row in history_rows]
bumped[0]["grade_points"] = 4.3
body = {
    "algorithm": "user_based",
    "grade_history": bumped,
    "candidate_courses": ["T3C01", "T3C02", "T3C03"],
    "k": 10,
}
resp = client.post("/whatif", json=body)
resp.raise_for_status()
print(f"\nwhat-if ranking after raising {bumped[0]['course_id']} to 4.3:")
print(json.dumps(resp.json(), indent=2))
