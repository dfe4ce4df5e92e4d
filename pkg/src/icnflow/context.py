"""Three-tier work context: immediate window, medium fragments, long-term lexicon.

The immediate tier is a decaying window over the most recent ideas; the
medium tier mirrors the typical-element sets of all live cluster nodes; the
long-term tier is the immutable lexicon.  Concept activation spreads from a
trigger lemma over synonym sets and relation-template co-occurrence.

All operations are pure: they take a state and return a new one.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .ingest import IdeaTriple
from .lexicon import Lexicon, RelationTemplate

WEIGHT_TRIGGER = 1.0
WEIGHT_SYNONYM = 0.8
WEIGHT_RELATED = 0.4


@dataclass(frozen=True)
class ConceptActivation:
    source: str
    activated: dict[str, float] = field(default_factory=dict)

    def classes(self, lex: Lexicon) -> frozenset[str]:
        return frozenset(lex.canonical(l) for l in self.activated)

    def to_dict(self) -> dict:
        return {"source": self.source, "activated": dict(sorted(self.activated.items()))}


@dataclass(frozen=True)
class RelationSet:
    relations: tuple[RelationTemplate, ...] = ()

    def outputs(self) -> tuple[str, ...]:
        return tuple(sorted({t.output for t in self.relations if t.output}))

    def goals(self) -> tuple[str, ...]:
        return tuple(sorted({t.goal for t in self.relations if t.goal}))


@dataclass(frozen=True)
class ImmediateEntry:
    key: str                      # triple key "utterance.ordinal"
    elements: frozenset[str]      # canonical lemma classes
    weight: float
    icn_id: str | None = None

    def to_dict(self) -> dict:
        return {
            "key": self.key,
            "elements": sorted(self.elements),
            "weight": round(self.weight, 6),
            "icn_id": self.icn_id,
        }


@dataclass(frozen=True)
class MediumEntry:
    icn_id: str
    te: frozenset[str]            # canonical typical-element classes (the summary)
    elements: frozenset[str] = frozenset()  # all member classes, for overlap ranking
    overlap: int = 0

    def to_dict(self) -> dict:
        return {"icn_id": self.icn_id, "te": sorted(self.te), "overlap": self.overlap}


@dataclass(frozen=True)
class ContextState:
    long_term: Lexicon
    immediate: tuple[ImmediateEntry, ...] = ()
    medium: tuple[MediumEntry, ...] = ()
    activation: ConceptActivation | None = None
    problem_elements: frozenset[str] = frozenset()
    window: int = 5
    decay: float = 0.7
    evict_threshold: float = 0.1

    def immediate_elements(self) -> frozenset[str]:
        out: set[str] = set()
        for entry in self.immediate:
            out.update(entry.elements)
        return frozenset(out)

    def immediate_icn_ids(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for entry in reversed(self.immediate):
            if entry.icn_id is not None:
                seen.setdefault(entry.icn_id, None)
        return tuple(seen)

    def to_dict(self) -> dict:
        return {
            "immediate": [e.to_dict() for e in self.immediate],
            "medium": [e.to_dict() for e in self.medium],
            "activation": self.activation.to_dict() if self.activation else None,
            "problem_elements": sorted(self.problem_elements),
            "window": self.window,
            "decay": self.decay,
            "evict_threshold": self.evict_threshold,
        }


# -- operations -----------------------------------------------------------


def activate_concepts(trigger: str, lex: Lexicon) -> ConceptActivation:
    """Spread activation from a trigger lemma.

    Trigger at 1.0, synonym-set members at 0.8, lemmas sharing a relation
    template's object class with the trigger at 0.4.  Out-of-lexicon
    triggers activate only themselves.
    """
    weights: dict[str, float] = {trigger: WEIGHT_TRIGGER}
    for lemma in lex.synonyms_of(trigger):
        weights.setdefault(lemma, WEIGHT_SYNONYM)
    trigger_class = lex.canonical(trigger)
    for templates in lex.verb_relations.values():
        for template in templates:
            if any(lex.canonical(obj) == trigger_class for obj in template.objects):
                for obj in template.objects:
                    weights.setdefault(obj, WEIGHT_RELATED)
    return ConceptActivation(source=trigger, activated=weights)


def adjust_work_context(
    act: ConceptActivation, ctx: ContextState, decay_step: bool = True
) -> ContextState:
    """Decay the immediate window, boost activation-overlapping entries,
    evict the faded, and re-rank the medium tier by activation overlap.

    `decay_step=False` re-adjusts without advancing time (the in-idea
    adjustment loop re-ranks and boosts but decays only once per idea).
    """
    lex = ctx.long_term
    act_classes = act.classes(lex)
    adjusted: list[ImmediateEntry] = []
    for entry in ctx.immediate:
        if entry.elements & act_classes:
            weight = 1.0
        else:
            weight = entry.weight * (ctx.decay if decay_step else 1.0)
        if weight >= ctx.evict_threshold:
            adjusted.append(replace(entry, weight=weight))

    ranked = sorted(
        (replace(m, overlap=len((m.elements or m.te) & act_classes)) for m in ctx.medium),
        key=lambda m: (-m.overlap, m.icn_id),
    )
    return replace(ctx, immediate=tuple(adjusted), medium=tuple(ranked), activation=act)


def activate_relations(verb: str | None, ctx: ContextState, lex: Lexicon) -> RelationSet:
    """Relation templates for a verb, narrowed to the activated context.

    Filtering that would empty the set falls back to the full set; unknown
    verbs yield an empty set (a novel action).
    """
    if verb is None or verb not in lex.verb_relations:
        return RelationSet()
    templates = lex.verb_relations[verb]
    act_classes = (
        ctx.activation.classes(lex) if ctx.activation is not None else frozenset()
    )
    filtered = tuple(
        t for t in templates if any(lex.canonical(o) in act_classes for o in t.objects)
    )
    return RelationSet(relations=filtered if filtered else templates)


def select_templates(idea: IdeaTriple, rels: RelationSet, lex: Lexicon) -> RelationSet:
    """Narrow an activated relation set by the idea's object nouns.

    Mirrors the input principle: the object noun picks the current relation
    out of the verb's activated set.  No object overlap keeps the full set.
    """
    if not rels.relations:
        return rels
    noun_classes = {lex.canonical(n) for n in (idea.noun1, *idea.noun2) if n}
    if not noun_classes:
        return rels
    narrowed = tuple(
        t
        for t in rels.relations
        if any(lex.canonical(o) in noun_classes for o in t.objects)
    )
    return RelationSet(relations=narrowed if narrowed else rels.relations)


def advance(ctx: ContextState, idea: IdeaTriple, icn_id: str | None = None) -> ContextState:
    """Append a processed idea to the immediate window (FIFO-bounded)."""
    lex = ctx.long_term
    entry = ImmediateEntry(
        key=idea.key(),
        elements=frozenset(lex.canonical(l) for l in idea.elements()),
        weight=1.0,
        icn_id=icn_id,
    )
    window = ctx.immediate + (entry,)
    if len(window) > ctx.window:
        window = window[len(window) - ctx.window :]
    return replace(ctx, immediate=window)


def refresh_medium(
    ctx: ContextState, entries: list[tuple[str, frozenset[str], frozenset[str]]]
) -> ContextState:
    """Rebuild the medium tier from live ICNs: (id, te summary, all elements)."""
    lex = ctx.long_term
    act_classes = (
        ctx.activation.classes(lex) if ctx.activation is not None else frozenset()
    )
    ranked = sorted(
        (
            MediumEntry(
                icn_id=icn_id,
                te=te,
                elements=elements,
                overlap=len((elements or te) & act_classes),
            )
            for icn_id, te, elements in entries
        ),
        key=lambda m: (-m.overlap, m.icn_id),
    )
    return replace(ctx, medium=tuple(ranked))
