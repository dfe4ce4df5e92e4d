"""Session orchestration: the per-utterance pipeline and the event log.

One session owns one discussion.  Each utterance runs through: idea
extraction, concept activation, work-context adjustment, relation
activation, matching and meaning synthesis with a bounded adjustment loop,
cluster assignment, image tagging, edge maintenance, image-delta
computation, and metrics.  Everything observable is emitted as an ordered
event batch appended atomically to an append-only log; replaying the
utterance events of a log through a fresh session reproduces the exact
snapshot, byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from .canonical import canonical_dumps, canonical_hash
from .context import (
    ConceptActivation,
    ContextState,
    RelationSet,
    activate_concepts,
    activate_relations,
    adjust_work_context,
    advance,
    refresh_medium,
    select_templates,
)
from .graph import EdgeKind, MentalImageKind, ProcessGraph, compare_images, converged, tag_image
from .icn import (
    Assignment,
    Thresholds,
    assign,
    image_cue_of,
    match,
    member_similarity,
    new_icn,
    update_te_ev,
)
from .ingest import ExtractionError, IdeaTriple, Utterance, classify_nature, extract_ideas
from .lexicon import Lexicon
from .metrics import SOLUTION_TAGS, HistoryEntry, MetricsConfig, MetricsReport, compute

EVENT_KINDS = (
    "utterance_received",
    "ideas_extracted",
    "context_adjusted",
    "adjustment_iteration",
    "icn_created",
    "icn_joined",
    "edge_added",
    "image_tagged",
    "delta_computed",
    "metrics_updated",
    "error",
)


class ConfigError(ValueError):
    pass


class ReplayError(ValueError):
    pass


@dataclass(frozen=True)
class SessionConfig:
    window: int = 5
    decay: float = 0.7
    evict_threshold: float = 0.1
    theta_join: float = 0.5
    theta_detail: float = 0.3
    candidates: int = 8
    adjustment_cap: int = 3
    eps: int = 0
    backtrack_gap: int = 3
    repetition_similarity: float = 0.9
    productivity_window: int = 2

    _SECTIONS = {
        "context": {"window": int, "decay": float, "evict_threshold": float},
        "icn": {"theta_join": float, "theta_detail": float, "candidates": int},
        "session": {"adjustment_cap": int, "eps": int},
        "metrics": {
            "backtrack_gap": int,
            "repetition_similarity": float,
            "productivity_window": int,
        },
    }

    def validate(self) -> "SessionConfig":
        if self.adjustment_cap < 1:
            raise ConfigError("session.adjustment_cap must be >= 1")
        if self.window < 1:
            raise ConfigError("context.window must be >= 1")
        if not 0.0 < self.decay <= 1.0:
            raise ConfigError("context.decay must be in (0, 1]")
        if not 0.0 <= self.theta_join <= 1.0 or not 0.0 <= self.theta_detail <= 1.0:
            raise ConfigError("icn thresholds must be in [0, 1]")
        if self.candidates < 1:
            raise ConfigError("icn.candidates must be >= 1")
        if self.eps < 0:
            raise ConfigError("session.eps must be >= 0")
        return self

    def thresholds(self) -> Thresholds:
        return Thresholds(
            theta_join=self.theta_join, theta_detail=self.theta_detail, candidates=self.candidates
        )

    def metrics_config(self) -> MetricsConfig:
        return MetricsConfig(
            backtrack_gap=self.backtrack_gap,
            repetition_similarity=self.repetition_similarity,
            productivity_window=self.productivity_window,
        )

    def to_dict(self) -> dict:
        out = {}
        for section, keys in self._SECTIONS.items():
            for key in keys:
                out[f"{section}.{key}"] = getattr(self, key)
        return out

    @classmethod
    def from_dict(cls, overrides: dict) -> "SessionConfig":
        kwargs = {}
        flat = {f"{s}.{k}": (k, t) for s, keys in cls._SECTIONS.items() for k, t in keys.items()}
        for key, value in overrides.items():
            key = key.strip()
            target = flat.get(key)
            if target is None and key in {k for k, _ in flat.values()}:
                target = next((k, t) for (k, t) in flat.values() if k == key)
            if target is None:
                raise ConfigError(f"unknown config key {key!r}")
            name, caster = target
            try:
                kwargs[name] = caster(value)
            except (TypeError, ValueError):
                raise ConfigError(f"bad value for {key!r}: {value!r}") from None
        return cls(**kwargs).validate()

    @classmethod
    def from_file(cls, path) -> "SessionConfig":
        overrides: dict[str, object] = {}
        section = None
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if line.startswith("[") and line.endswith("]"):
                    section = line[1:-1].strip().lower()
                    if section not in cls._SECTIONS:
                        raise ConfigError(f"{path}:{lineno}: unknown section [{section}]")
                    continue
                if section is None or "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value' inside a section")
                key, value = (part.strip() for part in line.split("=", 1))
                overrides[f"{section}.{key}"] = value
        return cls.from_dict(overrides)


@dataclass(frozen=True)
class SessionEvent:
    seq: int
    kind: str
    payload: dict

    def to_dict(self) -> dict:
        return {"seq": self.seq, "kind": self.kind, "payload": self.payload}

    @classmethod
    def from_dict(cls, record: dict) -> "SessionEvent":
        return cls(seq=int(record["seq"]), kind=str(record["kind"]), payload=record["payload"])


@dataclass(frozen=True)
class SynthesizedMeaning:
    out: tuple[str, ...]
    goal: tuple[str, ...]
    match_signature: str

    def to_dict(self) -> dict:
        return {"out": list(self.out), "goal": list(self.goal), "signature": self.match_signature}


class Session:
    """Single-writer session; readers consume snapshots and the event list."""

    def __init__(
        self,
        cfg: SessionConfig,
        lexicon: Lexicon,
        problem_statement: str = "",
        session_id: str = "",
        log_path=None,
    ) -> None:
        cfg.validate()
        self.cfg = cfg
        self.lexicon = lexicon
        self.session_id = session_id
        self.problem_statement = problem_statement
        self.log_path = log_path
        self.graph = ProcessGraph()
        self.events: list[SessionEvent] = []
        self.history: list[HistoryEntry] = []
        self._last_utterance_id: int | None = None
        self._last_touched: str | None = None
        self._prev_idea_icn: str | None = None
        self._idea_count = 0

        problem_elements: set[str] = set()
        if problem_statement.strip():
            seed = Utterance(id=0, speaker="", t=0, text=problem_statement, session=session_id)
            for triple in extract_ideas(seed, lexicon):
                problem_elements.update(triple.elements())
        self.ctx = ContextState(
            long_term=lexicon,
            problem_elements=frozenset(problem_elements),
            window=cfg.window,
            decay=cfg.decay,
            evict_threshold=cfg.evict_threshold,
        )
        self._report = compute(self.graph, self.ctx, (), cfg.metrics_config(), at_utterance=0)

    # -- public API ---------------------------------------------------------

    @property
    def last_report(self) -> MetricsReport:
        return self._report

    def process_utterance(self, u: Utterance) -> list[SessionEvent]:
        batch: list[SessionEvent] = []

        def emit(kind: str, payload: dict) -> None:
            batch.append(SessionEvent(seq=len(self.events) + len(batch) + 1, kind=kind, payload=payload))

        if self._last_utterance_id is not None and u.id <= self._last_utterance_id:
            emit("error", {"reason": "stale_utterance", "utterance": u.id})
            self._commit(batch)
            return batch

        try:
            ideas = extract_ideas(u, self.lexicon)
        except ExtractionError as exc:
            emit("utterance_received", u.to_dict())
            emit("error", {"reason": "extraction_failed", "utterance": u.id, "detail": str(exc)})
            self._last_utterance_id = u.id
            self._commit(batch)
            return batch

        emit("utterance_received", u.to_dict())
        emit(
            "ideas_extracted",
            {"utterance": u.id, "triples": [t.to_dict() for t in ideas]},
        )

        applied: list[tuple[int, Assignment, str]] = []  # (ordinal, assignment, icn_id)
        deferred: list[IdeaTriple] = []
        for idea in ideas:
            idea, rels, meaning = self._understand(idea, emit)
            assignment = assign(idea, self.graph, self.ctx, self.cfg.thresholds(), rels)
            if assignment is None:
                deferred.append(idea)
                continue
            icn_id = self._apply(idea, assignment, emit)
            applied.append((idea.ordinal, assignment, icn_id))

        for idea in deferred:
            assignment = self._resolve_weak(idea, applied)
            icn_id = self._apply(idea, assignment, emit)
            applied.append((idea.ordinal, assignment, icn_id))

        self._emit_deltas(u.id, emit)
        self._report = compute(
            self.graph, self.ctx, tuple(self.history), self.cfg.metrics_config(), at_utterance=u.id
        )
        emit("metrics_updated", {"utterance": u.id, "report": self._report.to_dict()})
        self._last_utterance_id = u.id
        self._commit(batch)
        return batch

    def snapshot(self) -> dict:
        """Deep, immutable view of the current state (plain data only)."""
        return {
            "session": self.session_id,
            "at_seq": len(self.events),
            "config": self.cfg.to_dict(),
            "problem_elements": sorted(self.ctx.problem_elements),
            "graph": self.graph.to_dict(),
            "context": self.ctx.to_dict(),
            "metrics": self._report.to_dict(),
            "history": [h.to_dict() for h in self.history],
        }

    # -- pipeline steps -------------------------------------------------------

    def _understand(self, idea: IdeaTriple, emit) -> tuple[IdeaTriple, RelationSet, SynthesizedMeaning]:
        lex = self.lexicon
        trigger = idea.noun1 or (idea.noun2[0] if idea.noun2 else None)
        if trigger is None:
            trigger = idea.modifiers[0] if idea.modifiers else idea.verb
        act = (
            activate_concepts(trigger, lex)
            if trigger
            else ConceptActivation(source="", activated={})
        )
        self.ctx = adjust_work_context(act, self.ctx)
        self._refresh_medium()
        emit(
            "context_adjusted",
            {
                "idea": idea.key(),
                "trigger": trigger,
                "immediate": [e.to_dict() for e in self.ctx.immediate],
                "medium": [m.icn_id for m in self.ctx.medium],
            },
        )

        rels = activate_relations(idea.verb, self.ctx, lex)
        narrowed = select_templates(idea, rels, lex)
        idea = replace(idea, expected_outputs=narrowed.outputs(), goals=narrowed.goals())
        meaning = self._synthesize(idea)

        signature = meaning.match_signature
        for iteration in range(1, self.cfg.adjustment_cap + 1):
            extended = dict(act.activated)
            for lemma in idea.expected_outputs + idea.goals:
                extended.setdefault(lemma, 0.4)
            act = ConceptActivation(source=act.source, activated=extended)
            self.ctx = adjust_work_context(act, self.ctx, decay_step=False)
            self._refresh_medium()
            rels = activate_relations(idea.verb, self.ctx, lex)
            narrowed = select_templates(idea, rels, lex)
            idea = replace(idea, expected_outputs=narrowed.outputs(), goals=narrowed.goals())
            meaning = self._synthesize(idea)
            emit(
                "adjustment_iteration",
                {"idea": idea.key(), "iteration": iteration, "meaning": meaning.to_dict()},
            )
            if meaning.match_signature == signature:
                break
            signature = meaning.match_signature
        return idea, narrowed, meaning

    def _synthesize(self, idea: IdeaTriple) -> SynthesizedMeaning:
        target: frozenset[str] | None = None
        if self.ctx.immediate:
            best = max(self.ctx.immediate, key=lambda e: e.weight)
            target = best.elements
        elif self.ctx.medium:
            target = self.ctx.medium[0].te
        if target is None:
            signature = canonical_hash([])
        else:
            m = match(frozenset(idea.elements()), target, self.lexicon)
            signature = canonical_hash(m.signature_payload())
        return SynthesizedMeaning(
            out=idea.expected_outputs, goal=idea.goals, match_signature=signature
        )

    def _resolve_weak(self, idea: IdeaTriple, applied: list[tuple[int, Assignment, str]]) -> Assignment:
        cued = image_cue_of(idea) is not None
        if not cued and applied:
            ordinal, _, icn_id = max(applied, key=lambda a: (a[1].score, -a[0]))
            score, _ = member_similarity(idea, self.graph.icns[icn_id], self.lexicon)
            return Assignment(decision="join", score=score, icn_id=icn_id, reason="utterance_anchor")
        if not cued and idea.assertion_only and self._last_touched in self.graph.icns:
            icn = self.graph.icns[self._last_touched]
            score, _ = member_similarity(idea, icn, self.lexicon)
            return Assignment(decision="join", score=score, icn_id=icn.id, reason="recency")
        return Assignment(decision="new_root", score=0.0, reason="fallback")

    def _apply(self, idea: IdeaTriple, assignment: Assignment, emit) -> str:
        lex = self.lexicon
        nature = classify_nature(idea, self.ctx).value
        self._idea_count += 1
        idx = self._idea_count

        if assignment.decision == "join":
            target = self.graph.icns[assignment.icn_id]
            added_new = bool(
                {lex.canonical(l) for l in idea.elements()} - target.element_classes(lex)
            )
            self.graph.replace_icn(update_te_ev(target, idea, lex))
            icn_id = target.id
            emit(
                "icn_joined",
                {
                    "icn_id": icn_id,
                    "idea": idea.to_dict(),
                    "score": round(assignment.score, 6),
                    "reason": assignment.reason,
                    "nature": nature,
                },
            )
            self._maybe_causality(idea, icn_id, idx, emit)
        else:
            icn_id, seq = self.graph.next_id()
            icn = new_icn(
                idea,
                icn_id,
                seq,
                lex,
                parent_id=assignment.parent_id,
                detail_payload=assignment.detailed_elements,
                context_id=assignment.context_id,
            )
            icn = replace(icn, image=tag_image(icn, lex, self.ctx).value)
            self.graph.add_icn(icn)
            emit(
                "icn_created",
                {
                    "icn_id": icn_id,
                    "decision": assignment.decision,
                    "idea": idea.to_dict(),
                    "score": round(assignment.score, 6),
                    "reason": assignment.reason,
                    "nature": nature,
                },
            )
            emit("image_tagged", {"icn_id": icn_id, "image": icn.image})
            if assignment.decision == "new_detailing":
                edge = self.graph.add_edge(
                    assignment.parent_id,
                    icn_id,
                    EdgeKind.DETAILING,
                    {"elements": sorted(assignment.detailed_elements)},
                )
                emit("edge_added", edge.to_dict())
            elif assignment.decision == "new_exploration":
                edge = self.graph.add_edge(
                    assignment.context_id, icn_id, EdgeKind.EXPLORATION, {"context": assignment.context_id}
                )
                emit("edge_added", edge.to_dict())
            self._maybe_generalization(icn_id, emit)

        image = self.graph.icns[icn_id].image
        self.history.append(
            HistoryEntry(
                idx=idx,
                utterance_id=idea.source_utterance,
                idea_key=idea.key(),
                decision=assignment.decision,
                icn_id=icn_id,
                image=image,
                score=assignment.score,
                added_new_elements=assignment.decision != "join" or added_new,
            )
        )
        self._last_touched = icn_id
        self.ctx = advance(self.ctx, idea, icn_id)
        self._refresh_medium()
        self._prev_idea_icn = icn_id
        return icn_id

    def _maybe_causality(self, idea: IdeaTriple, icn_id: str, idx: int, emit) -> None:
        prev = self._prev_idea_icn
        if prev is None or prev == icn_id or prev not in self.graph.icns:
            return
        explicit = "causality_of_differences" in idea.cues
        last = max((h.idx for h in self.history if h.icn_id == icn_id), default=None)
        backtrack = last is not None and idx - last >= self.cfg.backtrack_gap
        if not explicit and not backtrack:
            return
        if any(
            e.src == prev and e.dst == icn_id and e.kind is EdgeKind.CAUSALITY
            for e in self.graph.edges
        ):
            return
        edge = self.graph.add_edge(prev, icn_id, EdgeKind.CAUSALITY, {"trigger": idea.key()})
        emit("edge_added", edge.to_dict())

    def _maybe_generalization(self, icn_id: str, emit) -> None:
        icn = self.graph.icns[icn_id]
        if not icn.te:
            return
        for earlier in sorted(self.graph.icns.values(), key=lambda i: i.seq):
            if earlier.seq >= icn.seq:
                break
            if icn.te < earlier.te:
                edge = self.graph.add_edge(
                    icn_id, earlier.id, EdgeKind.GENERALIZATION, {"elements": sorted(icn.te)}
                )
                emit("edge_added", edge.to_dict())
                return

    def _emit_deltas(self, utterance_id: int, emit) -> None:
        problem = self.ctx.problem_elements | self.graph.image_elements(MentalImageKind.PROBLEM.value)
        solution: set[str] = set()
        for tag in SOLUTION_TAGS:
            solution.update(self.graph.image_elements(tag))
        td = compare_images(problem, solution, self.lexicon, "top_down")
        bu = compare_images(frozenset(solution), problem, self.lexicon, "bottom_up")
        emit(
            "delta_computed",
            {
                "utterance": utterance_id,
                "top_down": td.to_dict(),
                "bottom_up": bu.to_dict(),
                "converged": converged(td, bu, self.cfg.eps),
            },
        )

    def _refresh_medium(self) -> None:
        entries = [
            (icn.id, frozenset(icn.te), frozenset(icn.te | icn.ev))
            for icn in sorted(self.graph.icns.values(), key=lambda i: i.seq)
        ]
        self.ctx = refresh_medium(self.ctx, entries)

    def _commit(self, batch: list[SessionEvent]) -> None:
        self.events.extend(batch)
        if self.log_path is not None:
            with open(self.log_path, "a", encoding="utf-8") as fh:
                for event in batch:
                    fh.write(canonical_dumps(event.to_dict()) + "\n")


def open_session(
    cfg: SessionConfig,
    lexicon: Lexicon,
    problem_statement: str = "",
    session_id: str = "",
    log_path=None,
) -> Session:
    return Session(cfg, lexicon, problem_statement, session_id=session_id, log_path=log_path)


# -- replay ---------------------------------------------------------------------


def replay(
    events,
    cfg: SessionConfig,
    lexicon: Lexicon,
    problem_statement: str = "",
    session_id: str = "",
) -> dict:
    """Re-run the utterance events of a log; returns the reproduced snapshot."""
    events = list(events)
    for position, event in enumerate(events, start=1):
        if event.seq != position:
            raise ReplayError(f"event log gap: expected seq {position}, found {event.seq}")
    session = Session(cfg, lexicon, problem_statement, session_id=session_id)
    for event in events:
        if event.kind != "utterance_received":
            continue
        payload = event.payload
        pre = None
        if "triples" in payload:
            pre = tuple(IdeaTriple.from_dict(r) for r in payload["triples"])
        session.process_utterance(
            Utterance(
                id=int(payload["id"]),
                speaker=str(payload.get("speaker", "")),
                t=int(payload.get("t_ms", 0)),
                text=str(payload.get("text", "")),
                session=session_id,
                pre_annotation=pre,
            )
        )
    return session.snapshot()


# -- event log IO -----------------------------------------------------------------


def load_event_log(path) -> list[SessionEvent]:
    events: list[SessionEvent] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                events.append(SessionEvent.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise ReplayError(f"{path}:{lineno}: bad event record: {exc}") from None
    return events
