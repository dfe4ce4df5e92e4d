"""Shared invariant checks and random-corpus generation for tests."""

from __future__ import annotations

import math
import random

from icnflow import Session, converged
from icnflow.graph import EdgeKind, ImageDelta
from icnflow.ingest import IdeaTriple, Utterance
from icnflow.lexicon import Lexicon, RelationTemplate


def check_invariants(session: Session) -> None:
    """Structural invariants that must hold after every utterance."""
    graph = session.graph
    lex = session.lexicon

    # partition: every processed idea belongs to exactly one ICN
    seen: dict[str, str] = {}
    for icn in graph.icns.values():
        for key in icn.member_keys():
            assert key not in seen, f"idea {key} in both {seen[key]} and {icn.id}"
            seen[key] = icn.id
    assert len(seen) == len(session.history)
    for entry in session.history:
        assert seen.get(entry.idea_key) == entry.icn_id

    # te/ev are disjoint, covered by member elements, and te is majority
    for icn in graph.icns.values():
        assert not (icn.te & icn.ev)
        member_classes = [
            {lex.canonical(l) for l in member.elements()} for member in icn.members
        ]
        union = set().union(*member_classes) if member_classes else set()
        assert icn.te <= union and icn.ev <= union
        threshold = math.ceil(len(icn.members) / 2)
        for cls in icn.te:
            count = sum(1 for classes in member_classes if cls in classes)
            assert count >= threshold, f"{icn.id}: te element {cls} below majority"

    # detailing edges form a DAG
    children: dict[str, list[str]] = {}
    for edge in graph.edges:
        if edge.kind is EdgeKind.DETAILING:
            children.setdefault(edge.src, []).append(edge.dst)
    state: dict[str, int] = {}

    def visit(node: str) -> None:
        assert state.get(node) != 1, "detailing cycle"
        if state.get(node) == 2:
            return
        state[node] = 1
        for child in children.get(node, ()):
            visit(child)
        state[node] = 2

    for node in graph.icns:
        visit(node)

    # every non-root reachable from a root via detailing/exploration
    roots = set(graph.roots())
    reachable = set(roots)
    frontier = list(roots)
    while frontier:
        node = frontier.pop()
        for edge in graph.edges:
            if edge.src == node and edge.kind in (EdgeKind.DETAILING, EdgeKind.EXPLORATION):
                if edge.dst not in reachable:
                    reachable.add(edge.dst)
                    frontier.append(edge.dst)
    assert reachable == set(graph.icns), "unreachable ICN"

    # fulfilled + unconsidered partition the problem-image element set
    report = session.last_report.to_dict()
    problem = set(session.ctx.problem_elements) | graph.image_elements("problem")
    assert (
        report["fulfilled_requirements"]["count"] + report["unconsidered_needs"]["count"]
        == len(problem)
    )
    if problem:
        total = (
            report["fulfilled_requirements"]["ratio"]
            + report["unconsidered_needs"]["count"] / len(problem)
        )
        assert abs(total - 1.0) < 1e-6

    # converged is monotone in eps on the current deltas
    deltas = [e for e in session.events if e.kind == "delta_computed"]
    if deltas:
        payload = deltas[-1].payload
        td = ImageDelta(tuple(payload["top_down"]["delta"]), payload["top_down"]["meaning"], "top_down")
        bu = ImageDelta(tuple(payload["bottom_up"]["delta"]), payload["bottom_up"]["meaning"], "bottom_up")
        previous = False
        for eps in range(0, max(len(td.delta), len(bu.delta)) + 2):
            now = converged(td, bu, eps)
            assert now or not previous, "converged not monotone in eps"
            previous = now

    # adjustment loop bounded per idea
    per_idea: dict[str, int] = {}
    for event in session.events:
        if event.kind == "adjustment_iteration":
            key = event.payload["idea"]
            per_idea[key] = max(per_idea.get(key, 0), event.payload["iteration"])
    for key, iterations in per_idea.items():
        assert iterations <= session.cfg.adjustment_cap, f"{key}: loop ran {iterations}"

    # immediate window bounded
    assert len(session.ctx.immediate) <= session.cfg.window

    # event seqs dense from 1
    assert [e.seq for e in session.events] == list(range(1, len(session.events) + 1))


# -- random corpus ------------------------------------------------------------


def random_lexicon(rng: random.Random, lemmas: int = 30) -> Lexicon:
    nouns = [f"n{i:02d}" for i in range(lemmas // 2)]
    verbs = [f"v{i}" for i in range(lemmas // 3)]
    mods = [f"m{i}" for i in range(lemmas - len(nouns) - len(verbs))]
    everything = nouns + verbs + mods

    pool = [l for l in everything if rng.random() < 0.4]
    synonym_sets = []
    while len(pool) >= 2:
        size = min(len(pool), rng.choice((2, 2, 3)))
        group, pool = pool[:size], pool[size:]
        synonym_sets.append(frozenset(group))
    antonyms = tuple()
    if len(nouns) >= 2 and rng.random() < 0.5:
        a, b = rng.sample(nouns, 2)
        if not any(a in s and b in s for s in synonym_sets):
            antonyms = ((a, b),)

    relations = {}
    for verb in verbs:
        templates = []
        for _ in range(rng.choice((1, 1, 2))):
            objects = frozenset(rng.sample(nouns, rng.randint(1, 3)))
            output = rng.choice(nouns) if rng.random() < 0.7 else None
            goal = rng.choice(nouns) if rng.random() < 0.5 else None
            templates.append(
                RelationTemplate(verb=verb, objects=objects, output=output, goal=goal)
            )
        relations[verb] = tuple(templates)

    return Lexicon(
        lemmas={},
        synonym_sets=tuple(synonym_sets),
        antonym_pairs=antonyms,
        stopwords=frozenset(),
        abstraction_rank={l: rng.randint(0, 3) for l in everything},
        verb_relations=relations,
    )


def random_transcript(rng: random.Random, lex: Lexicon, max_ideas: int = 12) -> list[Utterance]:
    nouns = sorted({l for t in lex.verb_relations.values() for tpl in t for l in tpl.objects})
    verbs = sorted(lex.verb_relations)
    mods = sorted(set(lex.abstraction_rank) - set(nouns) - set(verbs))

    utterances = []
    ideas = 0
    uid = 0
    while ideas < max_ideas:
        uid += 1
        n_triples = min(rng.choice((1, 1, 1, 2)), max_ideas - ideas)
        triples = []
        for ordinal in range(n_triples):
            verb = rng.choice(verbs) if rng.random() < 0.8 else None
            noun2 = tuple(rng.sample(nouns, rng.randint(0, 2)))
            modifiers = tuple(rng.sample(mods, rng.randint(0, 2))) if mods else ()
            if verb is None and not noun2 and not modifiers:
                noun2 = (rng.choice(nouns),)
            triples.append(
                IdeaTriple(
                    verb=verb,
                    noun2=noun2,
                    modifiers=modifiers,
                    assertion_only=verb is None,
                    ordinal=ordinal,
                )
            )
        utterances.append(
            Utterance(
                id=uid,
                speaker=rng.choice("ABC"),
                t=uid * 1000,
                text=f"synthetic {uid}",
                pre_annotation=tuple(triples),
            )
        )
        ideas += n_triples
        if rng.random() < 0.15:
            break
    return utterances
