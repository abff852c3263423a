import pytest
from fastapi.testclient import TestClient

from emoannot.errors import (
    DecisionConflictError,
    MissingRefinementError,
    ScoreOutOfRangeError,
    UnknownSampleError,
)
from emoannot.review import (
    CRITERIA,
    DECISION_ACCEPTED,
    DECISION_PENDING,
    DECISION_REJECTED,
    ReviewService,
    make_ballot,
)
from emoannot.review_api import create_app
from emoannot.store import read_records

from .test_store import make_record

SCORES = (4.0, 4.0, 5.0, 3.0, 4.0)


def refined(sample_id="s1"):
    return make_record(sample_id, fine=f"candidate refinement for {sample_id}")


def vote(service, sample_id, reviewer, verdict, scores=SCORES):
    return service.submit_vote(make_ballot(sample_id, reviewer, scores, verdict))


# --- service-level ---

def test_enqueue_requires_refinement():
    service = ReviewService()
    with pytest.raises(MissingRefinementError):
        service.enqueue(make_record("s1"))


def test_enqueue_is_idempotent():
    service = ReviewService()
    first = service.enqueue(refined("s1"))
    assert first >= 0
    assert service.enqueue(refined("s1")) == first
    assert service.enqueue(refined("s2")) == first + 1


def test_vote_unknown_sample():
    service = ReviewService()
    with pytest.raises(UnknownSampleError):
        vote(service, "ghost", "r1", "accept")


def test_vote_score_out_of_range():
    service = ReviewService()
    service.enqueue(refined())
    with pytest.raises(ScoreOutOfRangeError):
        vote(service, "s1", "r1", "accept", scores=(6.0, 4, 4, 4, 4))
    with pytest.raises(ScoreOutOfRangeError):
        vote(service, "s1", "r1", "accept", scores=(4, 4, 4, 4))
    with pytest.raises(ScoreOutOfRangeError):
        vote(service, "s1", "r1", "maybe")


def test_quorum_majority_accepts():
    service = ReviewService(quorum=3)
    service.enqueue(refined())
    assert vote(service, "s1", "r1", "accept").decision == DECISION_PENDING
    assert vote(service, "s1", "r2", "accept").decision == DECISION_PENDING
    assert vote(service, "s1", "r3", "reject").decision == DECISION_ACCEPTED


def test_quorum_tie_rejects():
    service = ReviewService(quorum=4)
    service.enqueue(refined())
    vote(service, "s1", "r1", "accept")
    vote(service, "s1", "r2", "accept")
    vote(service, "s1", "r3", "reject")
    tally = vote(service, "s1", "r4", "reject")
    assert tally.decision == DECISION_REJECTED


def test_vote_replacement_keeps_one_ballot():
    service = ReviewService(quorum=4)
    service.enqueue(refined())
    for _ in range(3):
        tally = vote(service, "s1", "r1", "accept")
    assert len(tally.ballots) == 1
    assert tally.decision == DECISION_PENDING


def test_decided_sample_conflicts_without_reopen():
    service = ReviewService(quorum=2)
    service.enqueue(refined())
    vote(service, "s1", "r1", "accept")
    vote(service, "s1", "r2", "accept")
    with pytest.raises(DecisionConflictError):
        vote(service, "s1", "r3", "reject")


def test_reopen_allows_recount():
    service = ReviewService(quorum=2, reopen=True)
    service.enqueue(refined())
    vote(service, "s1", "r1", "accept")
    assert vote(service, "s1", "r2", "accept").decision == DECISION_ACCEPTED
    # two more rejects flip the majority
    vote(service, "s1", "r3", "reject")
    tally = vote(service, "s1", "r4", "reject")
    assert tally.decision == DECISION_REJECTED


def test_mean_score():
    service = ReviewService(quorum=4)
    service.enqueue(refined())
    vote(service, "s1", "r1", "accept", scores=(5, 5, 5, 5, 5))
    tally = vote(service, "s1", "r2", "accept", scores=(3, 3, 3, 3, 3))
    assert tally.mean_score == pytest.approx(4.0)


def test_next_for_review_skips_voted_and_decided():
    service = ReviewService(quorum=1)
    service.enqueue(refined("s1"))
    service.enqueue(refined("s2"))
    assert service.next_for_review("r1").sample_id == "s1"
    vote(service, "s1", "r1", "accept")  # decided at quorum 1
    assert service.next_for_review("r1").sample_id == "s2"
    assert service.next_for_review("r2").sample_id == "s2"


def test_export_promotes_accepted_only(tmp_path):
    service = ReviewService(quorum=1)
    for i in range(3):
        service.enqueue(refined(f"s{i}"))
    vote(service, "s0", "r1", "accept")
    vote(service, "s1", "r1", "reject")
    sink = tmp_path / "fine.jsonl"
    assert service.export_selected(sink) == 1
    exported = read_records(sink)
    assert [r.sample_id for r in exported] == ["s0"]
    assert exported[0].granularity.value == "fine"
    # rejected sample keeps coarse granularity in the store
    assert service.get_record("s1").granularity.value == "coarse"


def test_export_is_idempotent(tmp_path):
    service = ReviewService(quorum=1)
    service.enqueue(refined("s1"))
    vote(service, "s1", "r1", "accept")
    first = tmp_path / "a.jsonl"
    second = tmp_path / "b.jsonl"
    service.export_selected(first)
    service.export_selected(second)
    assert first.read_bytes() == second.read_bytes()


def test_export_nothing_decided(tmp_path):
    service = ReviewService()
    service.enqueue(refined("s1"))
    assert service.export_selected(tmp_path / "none.jsonl") == 0


def test_event_log_replay_reproduces_tallies(tmp_path):
    log = tmp_path / "events.jsonl"
    service = ReviewService(quorum=3, log_path=log)
    for i in range(3):
        service.enqueue(refined(f"s{i}"))
    vote(service, "s0", "r1", "accept")
    vote(service, "s0", "r2", "accept")
    vote(service, "s0", "r3", "reject")
    vote(service, "s1", "r1", "reject")

    rebuilt = ReviewService(quorum=3, log_path=log)
    for sample_id in ("s0", "s1", "s2"):
        original = service.tally(sample_id)
        replayed = rebuilt.tally(sample_id)
        assert replayed.decision == original.decision
        assert replayed.ballots == original.ballots
        assert replayed.mean_score == original.mean_score


# --- HTTP integration ---

@pytest.fixture
def client():
    service = ReviewService(quorum=4)
    for i in range(2):
        service.enqueue(refined(f"s{i}"))
    return TestClient(create_app(service))


def ballot_body(reviewer, verdict, scores=SCORES):
    return {"reviewer_id": reviewer, "criteria_scores": list(scores),
            "verdict": verdict}


def test_http_queue_next_and_view(client):
    response = client.get("/queue/next", params={"reviewer": "r1"})
    assert response.status_code == 200
    view = response.json()
    assert view["sample_id"] == "s0"
    assert view["candidate_fine_description"].startswith("candidate")
    assert set(view) >= {"subtitle", "audio_tone", "visual_expression",
                         "visual_objective", "coarse_description",
                         "pseudo_label", "tally"}


def test_http_unknown_sample_404(client):
    assert client.get("/samples/ghost").status_code == 404
    assert client.get("/samples/ghost/tally").status_code == 404


def test_http_vote_and_tally(client):
    response = client.post("/samples/s0/votes", json=ballot_body("r1", "accept"))
    assert response.status_code == 200
    tally = response.json()
    assert tally["decision"] == "pending"
    assert len(tally["ballots"]) == 1
    assert client.get("/samples/s0/tally").json()["decision"] == "pending"


def test_http_score_out_of_range_422(client):
    body = ballot_body("r1", "accept", scores=(6, 4, 4, 4, 4))
    assert client.post("/samples/s0/votes", json=body).status_code == 422


def test_http_enqueue_missing_refinement_422(client):
    record = make_record("nofine").to_json_dict()
    assert client.post("/samples", json=record).status_code == 422


def test_http_quorum_scenario_accepts(client):
    for reviewer, verdict in [("r1", "accept"), ("r2", "accept"),
                              ("r3", "accept"), ("r4", "reject")]:
        response = client.post("/samples/s0/votes",
                               json=ballot_body(reviewer, verdict))
        assert response.status_code == 200
    assert client.get("/samples/s0/tally").json()["decision"] == "accepted"


def test_http_conflict_after_decision_409(client):
    for reviewer in ("r1", "r2", "r3", "r4"):
        client.post("/samples/s0/votes", json=ballot_body(reviewer, "accept"))
    response = client.post("/samples/s0/votes", json=ballot_body("r5", "reject"))
    assert response.status_code == 409


def test_http_queue_empty_404(client):
    for sample in ("s0", "s1"):
        client.post(f"/samples/{sample}/votes", json=ballot_body("r9", "accept"))
    response = client.get("/queue/next", params={"reviewer": "r9"})
    assert response.status_code == 404
    assert response.json()["code"] == "QueueEmpty"


def test_http_export(client, tmp_path):
    for reviewer in ("r1", "r2", "r3", "r4"):
        client.post("/samples/s0/votes", json=ballot_body(reviewer, "accept"))
    out = tmp_path / "accepted.jsonl"
    response = client.post("/export", json={"path": str(out)})
    assert response.status_code == 200
    assert response.json()["accepted"] == 1
    assert len(read_records(out)) == 1
