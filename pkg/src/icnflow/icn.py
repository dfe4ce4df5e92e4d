"""Idea Cluster Nodes: matching, similarity, assignment, TE/EV upkeep.

An ICN groups similar ideas and summarizes them as typical elements (TE,
lemma classes carried by at least half of the members) plus expected
variation (EV, everything else).  Matching is channel-respecting (verb /
target / output / modifier) with synonym-set equality; similarity is a
weighted matched fraction over the channels populated on both sides, with
an antonym penalty.

Assignment follows a deterministic cascade per idea: join the best-matching
candidate above the join threshold, else branch out as an exploration
alternative when the idea shares the active goal but matches no verbs, else
attach as a detailing node when the matched elements concentrate on a
proper subset of a candidate and the idea brings more-concrete vocabulary.
Ideas that fall through are resolved by the session (utterance anchoring,
recency, or a fresh root).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Mapping, Sequence

from .context import ContextState, RelationSet
from .ingest import IdeaTriple
from .lexicon import Lexicon

if TYPE_CHECKING:  # pragma: no cover
    from .graph import ProcessGraph

CHANNEL_WEIGHTS = {"verb": 0.4, "target": 0.4, "output": 0.2, "modifier": 0.2}
DEFAULT_CHANNEL_WEIGHT = 0.4
OPPOSITE_PENALTY = 0.2

Bundle = Mapping[str, Sequence[str]]


@dataclass(frozen=True)
class Thresholds:
    theta_join: float = 0.5
    theta_detail: float = 0.3
    candidates: int = 8


@dataclass(frozen=True)
class MatchResult:
    matched_pairs: tuple[tuple[str, str, str], ...] = ()  # (elem_a, elem_b, channel)
    unmatched_a: tuple[str, ...] = ()
    unmatched_b: tuple[str, ...] = ()
    opposites: tuple[tuple[str, str], ...] = ()
    channel_counts: tuple[tuple[str, int, int, int], ...] = ()  # (channel, |a|, |b|, matched)

    def matched_classes(self, lex: Lexicon) -> frozenset[str]:
        return frozenset(lex.canonical(a) for a, _, _ in self.matched_pairs)

    def signature_payload(self) -> dict:
        return {"pairs": [list(p) for p in self.matched_pairs]}


@dataclass(frozen=True)
class Assignment:
    decision: str                      # join | new_detailing | new_exploration | new_root
    score: float = 0.0
    icn_id: str | None = None          # join target
    parent_id: str | None = None       # detailing parent
    detailed_elements: frozenset[str] = frozenset()
    context_id: str | None = None      # exploration context
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "decision": self.decision,
            "score": round(self.score, 6),
            "icn_id": self.icn_id,
            "parent_id": self.parent_id,
            "detailed_elements": sorted(self.detailed_elements),
            "context_id": self.context_id,
            "reason": self.reason,
        }


@dataclass(frozen=True)
class ICN:
    id: str
    members: tuple[IdeaTriple, ...]
    te: frozenset[str] = frozenset()
    ev: frozenset[str] = frozenset()
    image: str | None = None
    created_at: int = 0               # utterance id of the founding idea
    seq: int = 0                      # creation order, for deterministic ties
    parent_id: str | None = None      # detailing parent, if any
    detail_payload: frozenset[str] = frozenset()
    context_id: str | None = None     # exploration context, if any

    def channel_classes(self, lex: Lexicon) -> dict[str, tuple[str, ...]]:
        out: dict[str, tuple[str, ...]] = {}
        for name in ("verb", "target", "output", "modifier"):
            classes: dict[str, None] = {}
            for member in self.members:
                for lemma in member.channels()[name]:
                    classes.setdefault(lex.canonical(lemma), None)
            out[name] = tuple(sorted(classes))
        return out

    def element_classes(self, lex: Lexicon) -> frozenset[str]:
        return frozenset(self.te | self.ev)

    def goals(self, lex: Lexicon) -> frozenset[str]:
        return frozenset(lex.canonical(g) for m in self.members for g in m.goals)

    def member_keys(self) -> tuple[str, ...]:
        return tuple(m.key() for m in self.members)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "members": [m.to_dict() for m in self.members],
            "te": sorted(self.te),
            "ev": sorted(self.ev),
            "image": self.image,
            "created_at": self.created_at,
            "parent_id": self.parent_id,
            "detail_payload": sorted(self.detail_payload),
            "context_id": self.context_id,
        }


# -- matching and similarity ------------------------------------------------


def _as_bundle(operand) -> Bundle:
    if isinstance(operand, IdeaTriple):
        return operand.channels()
    if isinstance(operand, (set, frozenset, list, tuple)):
        return {"element": tuple(sorted(set(operand)))}
    return operand


def match(a, b, lex: Lexicon) -> MatchResult:
    """Maximum channel-respecting matching between two element bundles.

    Elements match iff they share a lemma or a synonym set.  Pairing within
    a class is lexicographic, so equal inputs give byte-equal results.
    Antonym pairs among the leftovers are recorded as opposites.
    """
    bundle_a, bundle_b = _as_bundle(a), _as_bundle(b)
    channels = list(dict.fromkeys([*bundle_a.keys(), *bundle_b.keys()]))
    order = {"verb": 0, "target": 1, "output": 2, "modifier": 3}
    channels.sort(key=lambda c: (order.get(c, 99), c))

    pairs: list[tuple[str, str, str]] = []
    unmatched_a: list[str] = []
    unmatched_b: list[str] = []
    counts: list[tuple[str, int, int, int]] = []
    for channel in channels:
        elems_a = list(bundle_a.get(channel, ()))
        elems_b = list(bundle_b.get(channel, ()))
        by_class_a: dict[str, list[str]] = {}
        by_class_b: dict[str, list[str]] = {}
        for e in sorted(elems_a):
            by_class_a.setdefault(lex.canonical(e), []).append(e)
        for e in sorted(elems_b):
            by_class_b.setdefault(lex.canonical(e), []).append(e)
        matched_here = 0
        for cls in sorted(set(by_class_a) | set(by_class_b)):
            in_a = by_class_a.get(cls, [])
            in_b = by_class_b.get(cls, [])
            k = min(len(in_a), len(in_b))
            matched_here += k
            pairs.extend((in_a[i], in_b[i], channel) for i in range(k))
            unmatched_a.extend(in_a[k:])
            unmatched_b.extend(in_b[k:])
        counts.append((channel, len(elems_a), len(elems_b), matched_here))

    opposites: list[tuple[str, str]] = []
    used_a: set[str] = set()
    used_b: set[str] = set()
    for ea in sorted(set(unmatched_a)):
        if ea in used_a:
            continue
        for eb in sorted(set(unmatched_b)):
            if eb in used_b:
                continue
            if lex.are_antonyms(ea, eb) or lex.are_antonyms(lex.canonical(ea), lex.canonical(eb)):
                opposites.append((ea, eb))
                used_a.add(ea)
                used_b.add(eb)
                break

    return MatchResult(
        matched_pairs=tuple(pairs),
        unmatched_a=tuple(sorted(unmatched_a)),
        unmatched_b=tuple(sorted(unmatched_b)),
        opposites=tuple(opposites),
        channel_counts=tuple(counts),
    )


def similarity(m: MatchResult) -> float:
    """Weighted matched fraction in [0, 1].

    Channels empty on either side carry no evidence (elided subjects,
    verbless assertions, missing outputs act as wildcards) and are left out
    of the denominator.  Each antonym pair subtracts a fixed penalty.
    """
    num = 0.0
    den = 0.0
    for channel, na, nb, matched in m.channel_counts:
        if na == 0 or nb == 0:
            continue
        weight = CHANNEL_WEIGHTS.get(channel, DEFAULT_CHANNEL_WEIGHT)
        num += weight * matched
        den += weight * max(na, nb)
    score = num / den if den > 0 else 0.0
    score -= OPPOSITE_PENALTY * len(m.opposites)
    return max(0.0, min(1.0, score))


def member_similarity(idea: IdeaTriple, icn: ICN, lex: Lexicon) -> tuple[float, MatchResult]:
    """Single-linkage similarity: the best match over the ICN's members."""
    best_score = 0.0
    best = match(idea, icn.members[0], lex)
    for member in icn.members:
        m = match(idea, member, lex)
        s = similarity(m)
        if s > best_score:
            best_score, best = s, m
    return best_score, best


# -- TE / EV maintenance -----------------------------------------------------


def compute_te_ev(members: Sequence[IdeaTriple], lex: Lexicon) -> tuple[frozenset[str], frozenset[str]]:
    counts: dict[str, int] = {}
    for member in members:
        for cls in {lex.canonical(l) for l in member.elements()}:
            counts[cls] = counts.get(cls, 0) + 1
    threshold = math.ceil(len(members) / 2)
    te = frozenset(cls for cls, n in counts.items() if n >= threshold)
    ev = frozenset(counts) - te
    return te, ev


def update_te_ev(icn: ICN, idea: IdeaTriple, lex: Lexicon) -> ICN:
    """Append a joining idea and recompute the typical/variable split."""
    members = icn.members + (idea,)
    te, ev = compute_te_ev(members, lex)
    return replace(icn, members=members, te=te, ev=ev)


def new_icn(
    idea: IdeaTriple,
    icn_id: str,
    seq: int,
    lex: Lexicon,
    parent_id: str | None = None,
    detail_payload: frozenset[str] = frozenset(),
    context_id: str | None = None,
) -> ICN:
    te, ev = compute_te_ev((idea,), lex)
    return ICN(
        id=icn_id,
        members=(idea,),
        te=te,
        ev=ev,
        created_at=idea.source_utterance,
        seq=seq,
        parent_id=parent_id,
        detail_payload=detail_payload,
        context_id=context_id,
    )


# -- assignment ---------------------------------------------------------------

#: image kinds that pin an idea to its own image's ICNs when cued
_NON_SOLUTION_IMAGES = frozenset(
    {
        "problem",
        "existing_solution",
        "expected_behavior",
        "observed_behavior",
        "causality_of_differences",
        "needed_solution_changes",
        "needed_problem_changes",
    }
)


def image_cue_of(idea: IdeaTriple) -> str | None:
    for cue in idea.cues:
        if cue in _NON_SOLUTION_IMAGES or cue == "desired_solution":
            return cue
    return None


def candidate_icns(graph: "ProcessGraph", ctx: ContextState, cfg: Thresholds) -> list[ICN]:
    """Immediate-window ICNs plus the top-K medium tier, in creation order."""
    ids: dict[str, None] = {}
    for icn_id in ctx.immediate_icn_ids():
        if icn_id in graph.icns:
            ids.setdefault(icn_id, None)
    for entry in ctx.medium[: cfg.candidates]:
        if entry.icn_id in graph.icns:
            ids.setdefault(entry.icn_id, None)
    return sorted((graph.icns[i] for i in ids), key=lambda icn: icn.seq)


def assign(
    idea: IdeaTriple,
    graph: "ProcessGraph",
    ctx: ContextState,
    cfg: Thresholds,
    rels: RelationSet | None = None,
) -> Assignment | None:
    """Run the assignment cascade; None means the idea fell through and the
    session must resolve it (utterance anchor, recency, or new root)."""
    lex = ctx.long_term
    cue = image_cue_of(idea)
    candidates = candidate_icns(graph, ctx, cfg)
    if cue is not None and cue in _NON_SOLUTION_IMAGES:
        candidates = [c for c in candidates if c.image == cue]

    scored: list[tuple[float, ICN, MatchResult]] = []
    for icn in candidates:
        score, m = member_similarity(idea, icn, lex)
        scored.append((score, icn, m))

    # 1. join the best candidate at or above the join threshold
    best: tuple[float, ICN, MatchResult] | None = None
    for score, icn, m in scored:
        if best is None or score > best[0]:
            best = (score, icn, m)
    if best is not None and best[0] >= cfg.theta_join:
        return Assignment(
            decision="join", score=best[0], icn_id=best[1].id, reason="similarity"
        )

    # 2. exploration: a solution idea sharing the active goal without any
    #    verb-channel match branches out under the goal-setting context
    if cue is None or cue == "desired_solution":
        verb_matched = any(
            ch == "verb" for _, icn, m in scored for _, _, ch in m.matched_pairs
        )
        goal_classes = frozenset(lex.canonical(g) for g in idea.goals)
        if not verb_matched and goal_classes:
            context_icn = _goal_context(graph, goal_classes, lex)
            if context_icn is not None:
                sibling = _sibling_exploration(graph, context_icn.id, idea.source_utterance)
                best_score = best[0] if best is not None else 0.0
                if sibling is not None:
                    return Assignment(
                        decision="join",
                        score=best_score,
                        icn_id=sibling.id,
                        reason="exploration_sibling",
                    )
                return Assignment(
                    decision="new_exploration",
                    score=best_score,
                    context_id=context_icn.id,
                    reason="shared_goal",
                )

    # 3. detailing: matched elements concentrate on a proper subset of a
    #    candidate and the idea introduces more-concrete vocabulary
    idea_classes = frozenset(lex.canonical(l) for l in idea.elements())
    eligible: list[tuple[float, ICN, frozenset[str]]] = []
    for score, icn, _ in scored:
        payload = _detail_payload(idea, icn, lex, rels)
        if payload is None:
            continue
        if idea_classes and len(payload) / len(idea_classes) < cfg.theta_detail:
            continue
        eligible.append((score, icn, payload))
    if eligible:
        score, icn, payload = max(eligible, key=lambda e: (e[0], -e[1].seq))
        existing = graph.find_detailing(icn.id, payload)
        if existing is not None:
            return Assignment(
                decision="join", score=score, icn_id=existing.id, reason="detail_continuation"
            )
        return Assignment(
            decision="new_detailing",
            score=score,
            parent_id=icn.id,
            detailed_elements=payload,
            reason="subset_focus",
        )

    return None  # weak: resolved by the session


def _goal_context(graph: "ProcessGraph", goal_classes: frozenset[str], lex: Lexicon) -> ICN | None:
    for icn in sorted(graph.icns.values(), key=lambda i: i.seq):
        if icn.image == "desired_solution" and icn.goals(lex) & goal_classes:
            return icn
    return None


def _sibling_exploration(graph: "ProcessGraph", context_id: str, utterance_id: int) -> ICN | None:
    for icn in sorted(graph.icns.values(), key=lambda i: i.seq):
        if icn.context_id == context_id and icn.created_at == utterance_id:
            return icn
    return None


def _detail_payload(
    idea: IdeaTriple, icn: ICN, lex: Lexicon, rels: RelationSet | None
) -> frozenset[str] | None:
    m = match(idea, icn.channel_classes(lex), lex)
    matched = m.matched_classes(lex)
    parent_classes = icn.element_classes(lex)
    if not matched or not matched < parent_classes:
        return None
    matched_rank = max(lex.rank(a) for a, _, _ in m.matched_pairs)
    new_lemmas = [l for l in idea.elements() if lex.canonical(l) not in parent_classes]
    if not any(lex.rank(l) > matched_rank for l in new_lemmas):
        return None
    payload = set(matched)
    if rels is not None:
        for template in rels.relations:
            for obj in template.objects:
                if lex.canonical(obj) in parent_classes:
                    payload.add(lex.canonical(obj))
    return frozenset(payload)
