import pytest

from icnflow import MetricsReport, Session, SessionConfig, compute, delta_report
from icnflow.graph import ProcessGraph


def report_at(session, utterance_id):
    for event in session.events:
        if event.kind == "metrics_updated" and event.payload["utterance"] == utterance_id:
            return MetricsReport.from_dict(event.payload["report"])
    raise AssertionError(f"no report at utterance {utterance_id}")


def test_empty_graph_all_zero(golden_lexicon, golden_problem):
    session = Session(SessionConfig(), golden_lexicon, golden_problem)
    report = compute(ProcessGraph(), session.ctx, (), at_utterance=0)
    assert report.fulfilled_requirements["count"] == 0
    assert report.fulfilled_requirements["ratio"] == 0.0
    assert report.exploration["alternative_count"] == 0
    assert report.substantiated_decisions["ratio"] == 0.0
    assert report.backtracking["count"] == 0
    assert report.contradictions["count"] == 0
    assert report.repetitions["count"] == 0
    assert report.unconsidered_needs["count"] == len(session.ctx.problem_elements)


def test_golden_exploration_alternatives(golden_session):
    assert golden_session.last_report.exploration["alternative_count"] == 3


def test_golden_unexplored_includes_truth_table_icn(golden_session, golden_icn_of):
    (truth_table_icn,) = golden_icn_of(18)
    unexplored = golden_session.last_report.unexplored_items["icn_ids"]
    assert truth_table_icn in unexplored
    # the detailed cluster is explored
    (cluster,) = golden_icn_of(3)
    assert cluster not in unexplored


def test_partition_identity_every_step(golden_session):
    problem_size = len(golden_session.ctx.problem_elements)
    for event in golden_session.events:
        if event.kind != "metrics_updated":
            continue
        report = event.payload["report"]
        assert (
            report["fulfilled_requirements"]["count"] + report["unconsidered_needs"]["count"]
            == problem_size
        )


def test_evidence_names_live_objects(golden_session):
    report = golden_session.last_report
    for item in report.fulfilled_requirements["evidence"]:
        assert item["icn_id"] in golden_session.graph.icns
    for icn_id in report.unexplored_items["icn_ids"]:
        assert icn_id in golden_session.graph.icns


def test_golden_repetition_bump_at_restatement(golden_session):
    before = report_at(golden_session, 14)
    after = report_at(golden_session, 15)
    delta = delta_report(before, after)
    assert delta.changes["repetitions"]["count"] == 1


def test_golden_backtracking_counts(golden_session):
    report = golden_session.last_report
    assert report.backtracking["count"] >= 1
    assert 0 <= report.backtracking["resolved_count"] <= report.backtracking["count"]


def test_golden_substantiated_ratio_band(golden_session):
    report = golden_session.last_report
    joins = sum(1 for h in golden_session.history if h.decision in ("join", "new_detailing"))
    assert report.substantiated_decisions["ratio"] == pytest.approx(
        joins / len(golden_session.history), abs=1e-6
    )
    assert report.substantiated_decisions["orphan_count"] == len(golden_session.history) - joins


def test_contradictions_antonyms_across_images(golden_lexicon, golden_session):
    # golden trace has no gap/contiguous talk: no conflicts
    assert golden_session.last_report.contradictions["count"] == 0


def test_delta_identity_is_zero(golden_session):
    report = golden_session.last_report
    delta = delta_report(report, report)
    assert all(not v for v in delta.changes.values())
    assert delta.new_evidence == {}


def test_delta_reports_new_exploration_evidence(golden_session):
    before = report_at(golden_session, 15)
    after = report_at(golden_session, 16)
    delta = delta_report(before, after)
    assert delta.changes["exploration"]["alternative_count"] == 1
    assert "exploration" in delta.new_evidence


def test_delta_rejects_reversed_order(golden_session):
    before = report_at(golden_session, 5)
    after = report_at(golden_session, 6)
    with pytest.raises(ValueError, match="out of order"):
        delta_report(after, before)


def test_ratios_bounded(golden_session):
    for event in golden_session.events:
        if event.kind != "metrics_updated":
            continue
        report = event.payload["report"]
        assert 0.0 <= report["fulfilled_requirements"]["ratio"] <= 1.0
        assert 0.0 <= report["substantiated_decisions"]["ratio"] <= 1.0
        for family in MetricsReport.FAMILIES:
            for key, value in report[family].items():
                if key.endswith("count"):
                    assert value >= 0
