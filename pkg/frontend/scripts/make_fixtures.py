"""Capture real service responses as JSON fixtures for the UI tests.

Runs the FastAPI app in-process against a throwaway store, uploads a
deterministic synthetic cohort (one student's final term withheld), builds
both model kinds, and records the exact payloads the UI would see. The
consistency test then checks the what-if path against the stored-student
path on these very bytes.

Run from the frontend directory: python3 scripts/make_fixtures.py
"""

import json
import tempfile
import warnings
from pathlib import Path

warnings.filterwarnings("ignore")

from fastapi.testclient import TestClient

from gradelens import Store, synthesize_dataset
from gradelens.data import records_to_csv_lines
from gradelens.service import create_app

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
STUDENT = "S05"


def main():
    records = synthesize_dataset(24, (4, 4, 3), seed=6)
    sparse = [r for r in records if not (r.student_id == STUDENT and r.term == 3)]
    history = [
        {"course_id": r.course_id, "grade_points": r.grade_points}
        for r in sparse
        if r.student_id == STUDENT
    ]
    candidates = sorted({r.course_id for r in records if r.term == 3})

    client = TestClient(create_app(Store(Path(tempfile.mkdtemp()))))
    csv_text = "\n".join(records_to_csv_lines(sparse)) + "\n"
    assert client.post(
        "/datasets", json={"dataset_id": "advisor-demo", "records_csv": csv_text}
    ).status_code == 201
    assert client.post(
        "/models", json={"model_id": "um", "algorithm": "user_based"}
    ).status_code == 201
    assert client.post(
        "/models", json={"model_id": "im", "algorithm": "item_based"}
    ).status_code == 201

    fixtures = {}
    fixtures["datasets.json"] = client.get("/datasets").json()
    fixtures["courses.json"] = client.get("/courses").json()

    # The stored path and the what-if path for the identical history; the
    # consistency test holds these to 1e-9 of each other.
    for algo, model in (("user", "um"), ("item", "im")):
        resp = client.get(
            f"/students/{STUDENT}/predictions", params={"model": model, "k": 10}
        )
        resp.raise_for_status()
        fixtures[f"stored_predictions_{algo}.json"] = resp.json()
    body = {
        "algorithm": "user_based",
        "grade_history": history,
        "candidate_courses": candidates,
        "k": 10,
    }
    resp = client.post("/whatif", json=body)
    resp.raise_for_status()
    fixtures["whatif_user.json"] = resp.json()
    resp = client.post(
        "/whatif", json={**body, "algorithm": "item_based", "model_id": "im"}
    )
    resp.raise_for_status()
    fixtures["whatif_item.json"] = resp.json()

    # A single-course history co-rates at most one course with anyone, so
    # under min_corated=2 every similarity is 0 and predictions fall back.
    resp = client.post(
        "/whatif",
        json={
            "algorithm": "user_based",
            "grade_history": history[:1],
            "candidate_courses": candidates,
            "k": 10,
        },
    )
    resp.raise_for_status()
    fixtures["whatif_fallback.json"] = resp.json()

    # One error payload, for the client's error-surface test.
    resp = client.post(
        "/whatif",
        json={
            "algorithm": "user_based",
            "grade_history": history,
            "candidate_courses": ["NOPE101"],
            "k": 10,
        },
    )
    fixtures["error_unknown_course.json"] = {
        "status": resp.status_code,
        "body": resp.json(),
    }

    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    for name, payload in fixtures.items():
        path = FIXTURE_DIR / name
        path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        print(f"wrote {path.relative_to(FIXTURE_DIR.parent.parent)}")


if __name__ == "__main__":
    main()
