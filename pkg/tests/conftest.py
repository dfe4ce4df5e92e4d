from __future__ import annotations

import pytest

from icnflow import Session, SessionConfig, data_path, load_lexicon, load_transcript


@pytest.fixture(scope="session")
def golden_lexicon():
    return load_lexicon(data_path("case_study.lex"))


@pytest.fixture(scope="session")
def golden_trace():
    return load_transcript(data_path("case_study.trace.jsonl"))


@pytest.fixture(scope="session")
def golden_problem():
    return data_path("case_study.problem.txt").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def golden_session(golden_lexicon, golden_trace, golden_problem):
    """The fully processed case-study session (read-only in tests)."""
    session = Session(SessionConfig(), golden_lexicon, golden_problem, session_id="golden")
    for utterance in golden_trace:
        session.process_utterance(utterance)
    return session


@pytest.fixture(scope="session")
def golden_icn_of(golden_session):
    """Map utterance id -> set of ICN ids holding that utterance's triples."""

    def lookup(utterance_id: int) -> set[str]:
        out = set()
        for icn in golden_session.graph.icns.values():
            for member in icn.members:
                if member.source_utterance == utterance_id:
                    out.add(icn.id)
        return out

    return lookup
