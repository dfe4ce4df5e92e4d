"""icnflow: idea-cluster graphs and solving metrics from discussion streams."""

from importlib import resources

from .canonical import canonical_dumps, canonical_hash
from .context import (
    ConceptActivation,
    ContextState,
    RelationSet,
    activate_concepts,
    activate_relations,
    adjust_work_context,
    advance,
)
from .graph import (
    EdgeKind,
    ImageDelta,
    MentalImageKind,
    ProcessGraph,
    SpaceMap,
    compare_images,
    converged,
    solution_space_map,
    tag_image,
)
from .icn import ICN, Assignment, MatchResult, Thresholds, assign, match, similarity, update_te_ev
from .ingest import (
    IdeaTriple,
    NatureLabel,
    Utterance,
    classify_nature,
    extract_ideas,
    load_transcript,
    parse_transcript,
)
from .lexicon import Lexicon, LexiconError, LexiconValidationError, load_lexicon, parse_lexicon
from .metrics import HistoryEntry, MetricsDelta, MetricsReport, compute, delta_report
from .session import (
    Session,
    SessionConfig,
    SessionEvent,
    load_event_log,
    open_session,
    replay,
)

__version__ = "0.1.0"


def data_path(name: str):
    """Path to a shipped data file (golden lexicon, trace, problem statement)."""
    return resources.files("icnflow.data") / name


__all__ = [
    "Assignment",
    "ConceptActivation",
    "ContextState",
    "EdgeKind",
    "HistoryEntry",
    "ICN",
    "IdeaTriple",
    "ImageDelta",
    "Lexicon",
    "LexiconError",
    "LexiconValidationError",
    "MatchResult",
    "MentalImageKind",
    "MetricsDelta",
    "MetricsReport",
    "NatureLabel",
    "ProcessGraph",
    "RelationSet",
    "Session",
    "SessionConfig",
    "SessionEvent",
    "SpaceMap",
    "Thresholds",
    "Utterance",
    "activate_concepts",
    "activate_relations",
    "adjust_work_context",
    "advance",
    "assign",
    "canonical_dumps",
    "canonical_hash",
    "classify_nature",
    "compare_images",
    "compute",
    "converged",
    "data_path",
    "delta_report",
    "extract_ideas",
    "load_event_log",
    "load_lexicon",
    "load_transcript",
    "match",
    "open_session",
    "parse_lexicon",
    "parse_transcript",
    "replay",
    "similarity",
    "solution_space_map",
    "tag_image",
    "update_te_ev",
]
