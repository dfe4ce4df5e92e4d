"""Process graph: typed edges over ICNs, image tags, image deltas.

The graph holds every cluster node, the detailing / exploration / causality
/ generalization edges between them, and the mental-image tag each node
carries.  Image-level comparison produces a difference set plus a meaning
label; convergence of the top-down and bottom-up differences toward zero is
the completion signal for a discussion.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .context import ContextState
from .icn import ICN, match, similarity
from .ingest import IdeaTriple
from .lexicon import Lexicon


class MentalImageKind(str, Enum):
    PROBLEM = "problem"
    DESIRED_SOLUTION = "desired_solution"
    EXISTING_SOLUTION = "existing_solution"
    EXPECTED_BEHAVIOR = "expected_behavior"
    OBSERVED_BEHAVIOR = "observed_behavior"
    CAUSALITY_OF_DIFFERENCES = "causality_of_differences"
    NEEDED_SOLUTION_CHANGES = "needed_solution_changes"
    NEEDED_PROBLEM_CHANGES = "needed_problem_changes"


IMAGE_KINDS = frozenset(k.value for k in MentalImageKind)


class EdgeKind(str, Enum):
    DETAILING = "detailing"
    EXPLORATION = "exploration"
    CAUSALITY = "causality"
    GENERALIZATION = "generalization"


_EDGE_STYLE = {
    EdgeKind.DETAILING: "solid",
    EdgeKind.EXPLORATION: "dashed",
    EdgeKind.CAUSALITY: "dotted",
    EdgeKind.GENERALIZATION: "bold",
}


class GraphInvariantError(RuntimeError):
    pass


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str
    kind: EdgeKind
    payload: tuple[tuple[str, object], ...] = ()

    def payload_dict(self) -> dict:
        return {k: v for k, v in self.payload}

    def to_dict(self) -> dict:
        return {
            "src": self.src,
            "dst": self.dst,
            "kind": self.kind.value,
            "payload": self.payload_dict(),
        }


@dataclass(frozen=True)
class ImageDelta:
    delta: tuple[str, ...]
    meaning: str        # missing_processing | missing_requirement | wrong_output | surplus | none
    direction: str      # top_down | bottom_up

    def to_dict(self) -> dict:
        return {"delta": list(self.delta), "meaning": self.meaning, "direction": self.direction}


class ProcessGraph:
    """Mutable graph owned by a single session writer."""

    def __init__(self) -> None:
        self.icns: dict[str, ICN] = {}
        self.edges: list[Edge] = []
        self._next_seq = 0

    # -- construction -----------------------------------------------------

    def next_id(self) -> tuple[str, int]:
        seq = self._next_seq
        self._next_seq += 1
        return f"icn-{seq:03d}", seq

    def add_icn(self, icn: ICN) -> None:
        if icn.id in self.icns:
            raise GraphInvariantError(f"duplicate ICN id {icn.id}")
        self.icns[icn.id] = icn

    def replace_icn(self, icn: ICN) -> None:
        if icn.id not in self.icns:
            raise GraphInvariantError(f"unknown ICN id {icn.id}")
        self.icns[icn.id] = icn

    def remove_icn(self, icn_id: str) -> None:
        self.icns.pop(icn_id, None)
        self.edges = [e for e in self.edges if icn_id not in (e.src, e.dst)]

    def add_edge(self, src: str, dst: str, kind: EdgeKind, payload: dict | None = None) -> Edge:
        if src not in self.icns or dst not in self.icns:
            raise GraphInvariantError(f"edge endpoints unknown: {src} -> {dst}")
        if kind is EdgeKind.DETAILING and self._detail_reaches(dst, src):
            raise GraphInvariantError(f"detailing edge {src} -> {dst} would close a cycle")
        items = tuple(sorted((payload or {}).items()))
        edge = Edge(src=src, dst=dst, kind=kind, payload=items)
        self.edges.append(edge)
        return edge

    def _detail_reaches(self, start: str, goal: str) -> bool:
        frontier = [start]
        seen = set()
        while frontier:
            node = frontier.pop()
            if node == goal:
                return True
            if node in seen:
                continue
            seen.add(node)
            frontier.extend(e.dst for e in self.edges if e.kind is EdgeKind.DETAILING and e.src == node)
        return False

    # -- queries ----------------------------------------------------------

    def roots(self) -> list[str]:
        targeted = {
            e.dst for e in self.edges if e.kind in (EdgeKind.DETAILING, EdgeKind.EXPLORATION)
        }
        return [icn.id for icn in sorted(self.icns.values(), key=lambda i: i.seq) if icn.id not in targeted]

    def find_detailing(self, parent_id: str, payload: frozenset[str]) -> ICN | None:
        for icn in sorted(self.icns.values(), key=lambda i: i.seq):
            if icn.parent_id == parent_id and icn.detail_payload == payload:
                return icn
        return None

    def detailing_children(self, icn_id: str) -> list[str]:
        return [e.dst for e in self.edges if e.kind is EdgeKind.DETAILING and e.src == icn_id]

    def exploration_targets(self) -> list[str]:
        return [e.dst for e in self.edges if e.kind is EdgeKind.EXPLORATION]

    def icn_of_member(self, key: str) -> str | None:
        for icn in self.icns.values():
            if key in icn.member_keys():
                return icn.id
        return None

    def image_elements(self, kind: str) -> frozenset[str]:
        out: set[str] = set()
        for icn in self.icns.values():
            if icn.image == kind:
                out.update(icn.te | icn.ev)
        return frozenset(out)

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "icns": {icn_id: icn.to_dict() for icn_id, icn in sorted(self.icns.items())},
            "edges": [e.to_dict() for e in self.edges],
            "roots": self.roots(),
        }

    def to_dot(self) -> str:
        return dot_from_snapshot(self.to_dict())


def dot_from_snapshot(graph_dict: dict) -> str:
    """Render a serialized graph as DOT: detailing solid, exploration dashed,
    causality dotted, generalization bold."""
    style_of = {k.value: v for k, v in _EDGE_STYLE.items()}
    lines = ["digraph icnflow {", "  rankdir=TB;", '  node [shape=box, fontname="Helvetica"];']
    for icn_id in sorted(graph_dict.get("icns", {})):
        icn = graph_dict["icns"][icn_id]
        label = f"ICN#{icn_id} [{icn.get('image') or 'untagged'}]"
        lines.append(f'  "{icn_id}" [label="{label}"];')
    for e in graph_dict.get("edges", ()):
        style = style_of.get(e["kind"], "solid")
        attr = f'style={style}, label="{e["kind"]}"'
        if e["kind"] == "detailing" and e.get("payload", {}).get("elements"):
            attr = f'style={style}, label="{", ".join(e["payload"]["elements"])}"'
        lines.append(f'  "{e["src"]}" -> "{e["dst"]}" [{attr}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- image tagging -----------------------------------------------------------


def tag_image(icn: ICN, lex: Lexicon, ctx: ContextState) -> MentalImageKind:
    """Rule cascade over the founding idea: problem-statement overlap wins,
    then explicit image cues, then the desired-solution default."""
    founder = icn.members[0]
    content = [lex.canonical(l) for l in founder.content_lemmas()]
    if content and ctx.problem_elements:
        problem_classes = {lex.canonical(p) for p in ctx.problem_elements}
        overlap = sum(1 for c in content if c in problem_classes) / len(content)
        if overlap >= 0.6:
            return MentalImageKind.PROBLEM
    for cue in founder.cues:
        if cue in IMAGE_KINDS:
            return MentalImageKind(cue)
    return MentalImageKind.DESIRED_SOLUTION


# -- image comparison ----------------------------------------------------------


def compare_images(
    a: frozenset[str] | set[str],
    b: frozenset[str] | set[str],
    lex: Lexicon,
    direction: str,
) -> ImageDelta:
    """Difference of two image element sets under synonym closure.

    The delta holds the elements of `a` with no counterpart in `b`; the
    meaning label is derived from what kind of elements dominate the delta.
    """
    b_classes = {lex.canonical(e) for e in b}
    delta = tuple(sorted(e for e in a if lex.canonical(e) not in b_classes))
    if not delta:
        return ImageDelta(delta=(), meaning="none", direction=direction)
    if not b:
        return ImageDelta(delta=delta, meaning="missing_processing", direction=direction)
    verbs = sum(1 for e in delta if lex.is_verb(e))
    outputs = sum(1 for e in delta if _is_template_output(e, lex))
    if direction == "top_down":
        meaning = "missing_processing" if verbs * 2 >= len(delta) else "missing_requirement"
    else:
        meaning = "wrong_output" if outputs * 2 >= len(delta) else "surplus"
    return ImageDelta(delta=delta, meaning=meaning, direction=direction)


def _is_template_output(lemma: str, lex: Lexicon) -> bool:
    cls = lex.canonical(lemma)
    for templates in lex.verb_relations.values():
        for t in templates:
            if t.output and lex.canonical(t.output) == cls:
                return True
    return False


def converged(td: ImageDelta, bu: ImageDelta, eps: int) -> bool:
    return len(td.delta) <= eps and len(bu.delta) <= eps


# -- solution space map ----------------------------------------------------------


@dataclass(frozen=True)
class SpaceMapPair:
    a: str
    b: str
    score: float
    unmatched_a: tuple[str, ...]
    unmatched_b: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "score": round(self.score, 6),
            "unmatched_a": list(self.unmatched_a),
            "unmatched_b": list(self.unmatched_b),
        }


@dataclass(frozen=True)
class SpaceMap:
    entries: tuple[str, ...]
    pairs: tuple[SpaceMapPair, ...]

    def to_dict(self) -> dict:
        return {"entries": list(self.entries), "pairs": [p.to_dict() for p in self.pairs]}


def solution_space_map(g: ProcessGraph, lex: Lexicon) -> SpaceMap:
    """All high-level solution descriptions with pairwise overlap.

    Entries are the solution-tagged ICNs at root level or reached by an
    exploration edge; each pair carries its similarity and the fragments
    left unmatched on either side.
    """
    solution_tags = {MentalImageKind.DESIRED_SOLUTION.value, MentalImageKind.EXISTING_SOLUTION.value}
    eligible = set(g.roots()) | set(g.exploration_targets())
    entries = [
        icn
        for icn in sorted(g.icns.values(), key=lambda i: i.seq)
        if icn.id in eligible and icn.image in solution_tags
    ]
    pairs: list[SpaceMapPair] = []
    for i, a in enumerate(entries):
        for b in entries[i + 1 :]:
            m = match(a.channel_classes(lex), b.channel_classes(lex), lex)
            pairs.append(
                SpaceMapPair(
                    a=a.id,
                    b=b.id,
                    score=similarity(m),
                    unmatched_a=m.unmatched_a,
                    unmatched_b=m.unmatched_b,
                )
            )
    return SpaceMap(entries=tuple(icn.id for icn in entries), pairs=tuple(pairs))
