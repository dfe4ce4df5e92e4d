"""Acceptance suite: one test per release criterion, strictest reading.

Each test prints a PASS line on success so a `-s` run doubles as the
acceptance report.  Criteria 1-4 pin the case-study structure, 5-6 are
randomized equivalence/determinism sweeps, 7 is the invariant suite, and 8
is the service round-trip with its latency budget.
"""

import json
import random
import time

import pytest
from fastapi.testclient import TestClient

from icnflow import (
    Session,
    SessionConfig,
    canonical_dumps,
    data_path,
    replay,
)
from icnflow.cli import main as cli_main
from icnflow.service import create_app
from icnflow.session import SessionEvent

from helpers import check_invariants, random_lexicon, random_transcript


def ok(line: str) -> None:
    print(f"ACCEPTANCE PASS: {line}")


def members_by_utterance(icn):
    return sorted({m.source_utterance for m in icn.members})


def icns_holding(session, utterance_id):
    return {
        icn.id
        for icn in session.graph.icns.values()
        if any(m.source_utterance == utterance_id for m in icn.members)
    }


def icn_holding(session, utterance_id):
    hits = icns_holding(session, utterance_id)
    assert len(hits) == 1, f"utterance {utterance_id} split across {hits}"
    return next(iter(hits))


def test_criterion_1_case_study_clustering(golden_session):
    """I_2, I_3, I_4, I_5 share one ICN; no foreign idea intrudes; < 1 s."""
    started = time.perf_counter()
    cluster_id = icn_holding(golden_session, 2)
    for utterance_id in (3, 4, 5):
        assert icns_holding(golden_session, utterance_id) == {cluster_id}
    cluster = golden_session.graph.icns[cluster_id]
    # every triple of 2..5 is in, and none of the other structural ideas are
    intruders = set(members_by_utterance(cluster)) - {2, 3, 4, 5, 15, 19}
    assert not intruders, f"foreign utterances in cluster: {intruders}"
    for utterance_id in (1, *range(6, 15), 16, 17, 18):
        assert cluster_id not in icns_holding(golden_session, utterance_id)

    # < 1 s budget for a fresh full run
    lexicon = golden_session.lexicon
    fresh = Session(SessionConfig(), lexicon, golden_session.problem_statement)
    from icnflow import load_transcript

    for utterance in load_transcript(data_path("case_study.trace.jsonl")):
        fresh.process_utterance(utterance)
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0, f"took {elapsed:.2f}s"
    ok(f"criterion 1: I_2..I_5 co-clustered in {cluster_id} ({elapsed*1000:.0f} ms)")


def test_criterion_2_case_study_detailing(golden_session):
    """I_6, I_7, I_10 form a detailing ICN with payload {entire, length}."""
    detail_id = icn_holding(golden_session, 6)
    assert icn_holding(golden_session, 7) == detail_id
    assert icn_holding(golden_session, 10) == detail_id
    detail = golden_session.graph.icns[detail_id]
    assert members_by_utterance(detail) == [6, 7, 10]
    cluster_id = icn_holding(golden_session, 2)
    edges = [
        e
        for e in golden_session.graph.edges
        if e.kind.value == "detailing" and e.dst == detail_id
    ]
    assert len(edges) == 1
    assert edges[0].src == cluster_id
    assert edges[0].payload_dict()["elements"] == ["entire", "length"]
    assert detail.detail_payload == frozenset({"entire", "length"})
    ok(f"criterion 2: detailing ICN {detail_id} payload {{entire, length}} under {cluster_id}")


def test_criterion_3_case_study_exploration(golden_session):
    """Exactly 3 exploration siblings under ICN(I_1), incl. I_16 and I_18."""
    context_id = next(iter(icns_holding(golden_session, 1)))
    exploration = [
        e for e in golden_session.graph.edges if e.kind.value == "exploration"
    ]
    assert len(exploration) == 3
    assert all(e.src == context_id for e in exploration)
    siblings = {e.dst for e in exploration}
    assert icns_holding(golden_session, 16) & siblings  # ICN(I_16) is an alternative
    assert icns_holding(golden_session, 18) <= siblings  # ICN(I_18) is an alternative
    assert icn_holding(golden_session, 2) in siblings  # the add-up cluster is the third
    assert golden_session.last_report.exploration["alternative_count"] == 3
    ok(f"criterion 3: 3 exploration alternatives under {context_id}")


def test_criterion_4_case_study_image_tags(golden_session):
    """The four worked image tags come out exactly."""
    expected = {
        12: "expected_behavior",
        8: "needed_problem_changes",
        9: "needed_problem_changes",
        11: "needed_solution_changes",
        13: "expected_behavior",
    }
    for utterance_id, image in expected.items():
        icn = golden_session.graph.icns[icn_holding(golden_session, utterance_id)]
        assert icn.image == image, f"I_{utterance_id}: {icn.image} != {image}"
    ok("criterion 4: image tags I_8/I_9/I_11/I_12/I_13 all exact (4/4 groups)")


def test_criterion_5_online_batch_equivalence():
    """200 random transcripts: online decisions == from-scratch oracle, < 30 s."""
    rng = random.Random(987654)
    cfg = SessionConfig()
    started = time.perf_counter()
    checked = 0
    for _ in range(200):
        lexicon = random_lexicon(rng, lemmas=30)
        utterances = random_transcript(rng, lexicon, max_ideas=12)
        online = Session(cfg, lexicon, "")
        for k, utterance in enumerate(utterances, start=1):
            online.process_utterance(utterance)
            oracle = Session(cfg, lexicon, "")
            for prefix_utterance in utterances[:k]:
                oracle.process_utterance(prefix_utterance)
            assert [
                (h.idea_key, h.decision, h.icn_id) for h in oracle.history
            ] == [(h.idea_key, h.decision, h.icn_id) for h in online.history]
            checked += 1
    elapsed = time.perf_counter() - started
    assert elapsed < 30.0, f"took {elapsed:.1f}s"
    ok(f"criterion 5: online==batch at {checked} steps over 200 transcripts ({elapsed:.1f}s)")


def test_criterion_6_replay_determinism(golden_session, golden_lexicon, golden_problem):
    """Golden + 50 random logs replay byte-identically."""
    reproduced = replay(
        golden_session.events, SessionConfig(), golden_lexicon, golden_problem, session_id="golden"
    )
    assert canonical_dumps(reproduced) == canonical_dumps(golden_session.snapshot())

    rng = random.Random(13)
    cfg = SessionConfig()
    for _ in range(50):
        lexicon = random_lexicon(rng, lemmas=24)
        utterances = random_transcript(rng, lexicon, max_ideas=10)
        live = Session(cfg, lexicon, "")
        for utterance in utterances:
            live.process_utterance(utterance)
        again = replay(live.events, cfg, lexicon, "")
        assert canonical_dumps(again) == canonical_dumps(live.snapshot())
    ok("criterion 6: replay byte-identical on golden + 50 random logs")


def test_criterion_7_invariant_suite(golden_lexicon, golden_problem):
    """Invariants hold after every utterance of golden + random transcripts."""
    from icnflow import load_transcript

    session = Session(SessionConfig(), golden_lexicon, golden_problem, session_id="golden")
    for utterance in load_transcript(data_path("case_study.trace.jsonl")):
        session.process_utterance(utterance)
        check_invariants(session)

    rng = random.Random(4242)
    for _ in range(25):
        lexicon = random_lexicon(rng, lemmas=26)
        fuzz = Session(SessionConfig(), lexicon, "")
        for utterance in random_transcript(rng, lexicon, max_ideas=12):
            fuzz.process_utterance(utterance)
            check_invariants(fuzz)
    ok("criterion 7: invariant suite green after every utterance (golden + 25 random)")


def test_criterion_8_service_round_trip(
    tmp_path, golden_lexicon, golden_trace, golden_problem, golden_session
):
    """API == cmd_analyze outputs; stream reconstructs the snapshot; < 50 ms/POST."""
    out_dir = tmp_path / "cli"
    code = cli_main(
        [
            "analyze",
            "--transcript",
            str(data_path("case_study.trace.jsonl")),
            "--lexicon",
            str(data_path("case_study.lex")),
            "--problem",
            str(data_path("case_study.problem.txt")),
            "--out-dir",
            str(out_dir),
            "--session-id",
            "golden",
            "--no-figures",
        ]
    )
    assert code == 0
    cli_snapshot = json.loads((out_dir / "snapshot.json").read_text())
    cli_metrics = json.loads((out_dir / "metrics.json").read_text())

    app = create_app(lexicons={"case_study": golden_lexicon})
    worst = 0.0
    with TestClient(app) as client:
        response = client.post(
            "/sessions",
            json={
                "lexicon": "case_study",
                "problem_statement": golden_problem,
                "session_id": "golden",
            },
        )
        assert response.status_code == 201
        for utterance in golden_trace:
            started = time.perf_counter()
            posted = client.post("/sessions/golden/utterances", json=utterance.to_dict())
            worst = max(worst, time.perf_counter() - started)
            assert posted.status_code == 200
        api_snapshot = client.get("/sessions/golden/snapshot").json()
        api_metrics = client.get("/sessions/golden/metrics").json()
        api_dot = client.get("/sessions/golden/snapshot", params={"format": "dot"}).text

        collected = []
        with client.stream(
            "GET", "/sessions/golden/events", params={"from": 1, "follow": 0}
        ) as stream:
            for line in stream.iter_lines():
                if line:
                    collected.append(json.loads(line))

    assert canonical_dumps(api_snapshot) == canonical_dumps(cli_snapshot)
    assert api_metrics == cli_metrics
    assert api_metrics == golden_session.last_report.to_dict()

    events = [SessionEvent.from_dict(record) for record in collected]
    reconstructed = replay(
        events, SessionConfig(), golden_lexicon, golden_problem, session_id="golden"
    )
    assert canonical_dumps(reconstructed) == canonical_dumps(api_snapshot)

    # CLI export equals the endpoint's DOT (interface equivalence)
    import io
    from contextlib import redirect_stdout

    buffer = io.StringIO()
    with redirect_stdout(buffer):
        assert cli_main(["export", "--snapshot", str(out_dir / "snapshot.json")]) == 0
    assert buffer.getvalue() == api_dot

    assert worst < 0.050, f"worst POST latency {worst*1000:.1f} ms"
    ok(f"criterion 8: API==CLI round trip, stream reconstructs snapshot ({worst*1000:.1f} ms worst POST)")
