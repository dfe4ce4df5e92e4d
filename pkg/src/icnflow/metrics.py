"""The eight metric families computed after every utterance.

Each family is the simplest graph-expressible statistic faithful to its
category:

1. fulfilled_requirements — problem-image elements matched by any
   solution-image cluster ("correctly and fully addressed").
2. exploration — exploration-edge count plus root switches in idea order
   ("capacity to switch between ideas").
3. substantiated_decisions — fraction of ideas that joined or detailed an
   existing cluster ("motivated by the previous decisions").
4. backtracking — rejoins of a cluster last touched >= gap ideas earlier
   ("identify the cause of errors"), resolved when a needed-changes tag
   follows shortly.
5. contradictions — antonym pairs across image element sets ("nature and
   number of conflicts").
6. repetitions — near-identical rejoins adding nothing new ("ideas that are
   repeated"), productive when new detailing follows.
7. unconsidered_needs — problem-image elements never matched ("unaddressed
   problem requirements").
8. unexplored_items — solution clusters never detailed ("possibilities that
   were not analyzed").
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .context import ContextState
from .graph import MentalImageKind, ProcessGraph
from .lexicon import Lexicon

SOLUTION_TAGS = (MentalImageKind.DESIRED_SOLUTION.value, MentalImageKind.EXISTING_SOLUTION.value)
NEEDED_CHANGE_TAGS = (
    MentalImageKind.NEEDED_SOLUTION_CHANGES.value,
    MentalImageKind.NEEDED_PROBLEM_CHANGES.value,
)


@dataclass(frozen=True)
class MetricsConfig:
    backtrack_gap: int = 3
    repetition_similarity: float = 0.9
    productivity_window: int = 2


@dataclass(frozen=True)
class HistoryEntry:
    """One idea's assignment outcome, in idea order."""

    idx: int                 # 1-based position in the idea sequence
    utterance_id: int
    idea_key: str
    decision: str            # join | new_detailing | new_exploration | new_root
    icn_id: str
    image: str | None
    score: float
    added_new_elements: bool

    def to_dict(self) -> dict:
        return {
            "idx": self.idx,
            "utterance_id": self.utterance_id,
            "idea_key": self.idea_key,
            "decision": self.decision,
            "icn_id": self.icn_id,
            "image": self.image,
            "score": round(self.score, 6),
            "added_new_elements": self.added_new_elements,
        }


@dataclass(frozen=True)
class MetricsReport:
    fulfilled_requirements: dict
    exploration: dict
    substantiated_decisions: dict
    backtracking: dict
    contradictions: dict
    repetitions: dict
    unconsidered_needs: dict
    unexplored_items: dict
    at_utterance: int

    FAMILIES = (
        "fulfilled_requirements",
        "exploration",
        "substantiated_decisions",
        "backtracking",
        "contradictions",
        "repetitions",
        "unconsidered_needs",
        "unexplored_items",
    )

    def to_dict(self) -> dict:
        return {
            "fulfilled_requirements": self.fulfilled_requirements,
            "exploration": self.exploration,
            "substantiated_decisions": self.substantiated_decisions,
            "backtracking": self.backtracking,
            "contradictions": self.contradictions,
            "repetitions": self.repetitions,
            "unconsidered_needs": self.unconsidered_needs,
            "unexplored_items": self.unexplored_items,
            "at_utterance": self.at_utterance,
        }

    @classmethod
    def from_dict(cls, record: dict) -> "MetricsReport":
        return cls(**{k: record[k] for k in (*cls.FAMILIES, "at_utterance")})


def compute(
    g: ProcessGraph,
    ctx: ContextState,
    history: tuple[HistoryEntry, ...],
    cfg: MetricsConfig = MetricsConfig(),
    at_utterance: int = 0,
) -> MetricsReport:
    lex = ctx.long_term
    problem = frozenset(ctx.problem_elements) | g.image_elements(MentalImageKind.PROBLEM.value)
    solution: set[str] = set()
    for tag in SOLUTION_TAGS:
        solution.update(g.image_elements(tag))
    solution_classes = {lex.canonical(e) for e in solution}

    # (1) + (7): partition of the problem-image element set
    fulfilled = sorted(e for e in problem if lex.canonical(e) in solution_classes)
    unconsidered = sorted(e for e in problem if lex.canonical(e) not in solution_classes)
    evidence = []
    for element in fulfilled:
        cls = lex.canonical(element)
        for icn in sorted(g.icns.values(), key=lambda i: i.seq):
            if icn.image in SOLUTION_TAGS and cls in (icn.te | icn.ev):
                evidence.append({"element": element, "icn_id": icn.id})
                break

    # (2) exploration edges + root switches in idea order
    exploration_edges = [e for e in g.edges if e.kind.value == "exploration"]
    root_of = _root_index(g)
    switches = 0
    prev_root: str | None = None
    for entry in history:
        root = root_of.get(entry.icn_id, entry.icn_id)
        if prev_root is not None and root != prev_root:
            switches += 1
        prev_root = root

    # (3) joins and detailings are substantiated; the rest are orphans
    substantiated = sum(1 for e in history if e.decision in ("join", "new_detailing"))
    orphans = len(history) - substantiated

    # (4) backtracking rejoins
    last_touch: dict[str, int] = {}
    backtracks: list[HistoryEntry] = []
    for entry in history:
        prev = last_touch.get(entry.icn_id)
        if entry.decision == "join" and prev is not None and entry.idx - prev >= cfg.backtrack_gap:
            backtracks.append(entry)
        last_touch[entry.icn_id] = entry.idx
    resolved = 0
    for entry in backtracks:
        follow = [h for h in history if entry.idx < h.idx <= entry.idx + cfg.backtrack_gap]
        if any(h.image in NEEDED_CHANGE_TAGS for h in follow):
            resolved += 1

    # (5) antonym conflicts across image element sets
    pairs = []
    images = sorted({icn.image for icn in g.icns.values() if icn.image})
    for i, img_a in enumerate(images):
        elements_a = g.image_elements(img_a) | (problem if img_a == MentalImageKind.PROBLEM.value else frozenset())
        for img_b in images[i + 1 :]:
            for ea in sorted(elements_a):
                for eb in sorted(g.image_elements(img_b)):
                    if lex.are_antonyms(ea, eb) or lex.are_antonyms(lex.canonical(ea), lex.canonical(eb)):
                        pairs.append({"a": ea, "b": eb, "image_a": img_a, "image_b": img_b})

    # (6) repetitions: high-similarity rejoins that add nothing
    repetitions = [
        e
        for e in history
        if e.decision == "join"
        and e.score >= cfg.repetition_similarity
        and not e.added_new_elements
    ]
    productive = 0
    for entry in repetitions:
        follow = [h for h in history if entry.idx < h.idx <= entry.idx + cfg.productivity_window]
        if any(h.decision == "new_detailing" for h in follow):
            productive += 1

    # (8) solution clusters never detailed
    unexplored = [
        icn.id
        for icn in sorted(g.icns.values(), key=lambda i: i.seq)
        if icn.image == MentalImageKind.DESIRED_SOLUTION.value and not g.detailing_children(icn.id)
    ]

    n_problem = len(problem)
    return MetricsReport(
        fulfilled_requirements={
            "count": len(fulfilled),
            "ratio": round(len(fulfilled) / n_problem, 6) if n_problem else 0.0,
            "evidence": evidence,
        },
        exploration={
            "alternative_count": len(exploration_edges),
            "switch_count": switches,
            "evidence": [e.to_dict() for e in exploration_edges],
        },
        substantiated_decisions={
            "ratio": round(substantiated / len(history), 6) if history else 0.0,
            "orphan_count": orphans,
        },
        backtracking={"count": len(backtracks), "resolved_count": resolved},
        contradictions={"count": len(pairs), "pairs": pairs},
        repetitions={"count": len(repetitions), "productive_count": productive},
        unconsidered_needs={"count": len(unconsidered), "elements": unconsidered},
        unexplored_items={"count": len(unexplored), "icn_ids": unexplored},
        at_utterance=at_utterance,
    )


def _root_index(g: ProcessGraph) -> dict[str, str]:
    parent: dict[str, str] = {}
    for e in g.edges:
        if e.kind.value in ("detailing", "exploration"):
            parent.setdefault(e.dst, e.src)
    roots: dict[str, str] = {}
    for icn_id in g.icns:
        node = icn_id
        seen = {node}
        while node in parent and parent[node] not in seen:
            node = parent[node]
            seen.add(node)
        roots[icn_id] = node
    return roots


# -- per-utterance change feed ------------------------------------------------


@dataclass(frozen=True)
class MetricsDelta:
    changes: dict                  # family -> {field: signed difference}
    new_evidence: dict             # family -> [evidence items new in cur]
    from_utterance: int
    to_utterance: int

    def to_dict(self) -> dict:
        return {
            "changes": self.changes,
            "new_evidence": self.new_evidence,
            "from_utterance": self.from_utterance,
            "to_utterance": self.to_utterance,
        }


_NUMERIC_FIELDS = {
    "fulfilled_requirements": ("count", "ratio"),
    "exploration": ("alternative_count", "switch_count"),
    "substantiated_decisions": ("ratio", "orphan_count"),
    "backtracking": ("count", "resolved_count"),
    "contradictions": ("count",),
    "repetitions": ("count", "productive_count"),
    "unconsidered_needs": ("count",),
    "unexplored_items": ("count",),
}

_EVIDENCE_FIELDS = {
    "fulfilled_requirements": "evidence",
    "exploration": "evidence",
    "contradictions": "pairs",
    "unconsidered_needs": "elements",
    "unexplored_items": "icn_ids",
}


def delta_report(prev: MetricsReport, cur: MetricsReport) -> MetricsDelta:
    """Signed per-family differences plus evidence items new in `cur`."""
    if prev.at_utterance > cur.at_utterance:
        raise ValueError(
            f"delta_report: reports out of order ({prev.at_utterance} > {cur.at_utterance})"
        )
    changes: dict = {}
    new_evidence: dict = {}
    for family in MetricsReport.FAMILIES:
        a, b = getattr(prev, family), getattr(cur, family)
        diff = {}
        for fieldname in _NUMERIC_FIELDS[family]:
            d = round(b[fieldname] - a[fieldname], 6)
            if d:
                diff[fieldname] = d
        changes[family] = diff
        ev_field = _EVIDENCE_FIELDS.get(family)
        if ev_field:
            old = a.get(ev_field, [])
            fresh = [item for item in b.get(ev_field, []) if item not in old]
            if fresh:
                new_evidence[family] = fresh
    return MetricsDelta(
        changes=changes,
        new_evidence=new_evidence,
        from_utterance=prev.at_utterance,
        to_utterance=cur.at_utterance,
    )
