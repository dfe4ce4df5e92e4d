"""Transcript parsing: utterances -> normalized idea triples.

The extractor is deliberately naive and table-driven: clause splitting on
punctuation/conjunctions, verb lookup in the lexicon's relation table,
surface-to-lemma mapping with no morphology.  Transcripts may carry
pre-annotated triples (the `triples` field) which bypass extraction and are
only lemma-normalized; the shipped case-study trace is fully pre-annotated
so downstream behavior never depends on extractor quality.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, TYPE_CHECKING

from .lexicon import Lexicon

if TYPE_CHECKING:  # pragma: no cover
    from .context import ContextState


class NatureLabel(str, Enum):
    PROBLEM_UNDERSTANDING = "problem_understanding"
    SOLVING_HIGHLEVEL = "solving_highlevel"
    SOLVING_DETAILING = "solving_detailing"
    COMPARISON = "comparison"
    PRO_CON_ANALYSIS = "pro_con_analysis"
    MISSING_FRAGMENT = "missing_fragment"
    LOCALIZATION = "localization"
    REQUIRED_CHANGE = "required_change"
    COMBINATION = "combination"


#: cue label attached by evaluation patterns ("might work", "would work")
PRO_CON_CUE = "pro_con"

_NATURE_VALUES = {label.value for label in NatureLabel}

_CLAUSE_BREAK_TOKENS = frozenset({"and", "then"})
_TOKEN_RE = re.compile(r"[a-z0-9][a-z0-9-]*")


@dataclass(frozen=True)
class IdeaTriple:
    """One extracted idea: verb acting on nouns, in channel form.

    `expected_outputs` and `goals` are empty at extraction time; the session
    pipeline fills them from the relation templates before assignment.
    """

    verb: str | None
    noun1: str | None = None
    noun2: tuple[str, ...] = ()
    modifiers: tuple[str, ...] = ()
    source_utterance: int = 0
    ordinal: int = 0
    speaker: str = ""
    assertion_only: bool = False
    out_of_lexicon: frozenset[str] = frozenset()
    cues: tuple[str, ...] = ()
    expected_outputs: tuple[str, ...] = ()
    goals: tuple[str, ...] = ()

    def channels(self) -> dict[str, tuple[str, ...]]:
        targets = ((self.noun1,) if self.noun1 else ()) + self.noun2
        return {
            "verb": (self.verb,) if self.verb else (),
            "target": targets,
            "output": self.expected_outputs,
            "modifier": self.modifiers,
        }

    def elements(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for lemmas in self.channels().values():
            for lemma in lemmas:
                seen.setdefault(lemma, None)
        return tuple(seen)

    def content_lemmas(self) -> tuple[str, ...]:
        """Elements minus synthesized outputs (what the speaker actually said)."""
        seen: dict[str, None] = {}
        for name in ("verb", "target", "modifier"):
            for lemma in self.channels()[name]:
                seen.setdefault(lemma, None)
        return tuple(seen)

    def key(self) -> str:
        return f"{self.source_utterance}.{self.ordinal}"

    def to_dict(self) -> dict:
        record = {
            "verb": self.verb,
            "noun1": self.noun1,
            "noun2": list(self.noun2),
            "modifiers": list(self.modifiers),
            "source_utterance": self.source_utterance,
            "ordinal": self.ordinal,
            "assertion_only": self.assertion_only,
        }
        if self.speaker:
            record["speaker"] = self.speaker
        if self.out_of_lexicon:
            record["out_of_lexicon"] = sorted(self.out_of_lexicon)
        if self.cues:
            record["cues"] = list(self.cues)
        if self.expected_outputs:
            record["expected_outputs"] = list(self.expected_outputs)
        if self.goals:
            record["goals"] = list(self.goals)
        return record

    @classmethod
    def from_dict(cls, record: dict) -> "IdeaTriple":
        return cls(
            verb=record.get("verb"),
            noun1=record.get("noun1"),
            noun2=tuple(record.get("noun2", ())),
            modifiers=tuple(record.get("modifiers", ())),
            source_utterance=record.get("source_utterance", 0),
            ordinal=record.get("ordinal", 0),
            speaker=record.get("speaker", ""),
            assertion_only=bool(record.get("assertion_only", False)),
            out_of_lexicon=frozenset(record.get("out_of_lexicon", ())),
            cues=tuple(record.get("cues", ())),
            expected_outputs=tuple(record.get("expected_outputs", ())),
            goals=tuple(record.get("goals", ())),
        )


@dataclass(frozen=True)
class Utterance:
    id: int
    speaker: str
    t: int
    text: str
    session: str = ""
    pre_annotation: tuple[IdeaTriple, ...] | None = None

    def to_dict(self) -> dict:
        record = {"id": self.id, "speaker": self.speaker, "t_ms": self.t, "text": self.text}
        if self.pre_annotation is not None:
            record["triples"] = [t.to_dict() for t in self.pre_annotation]
        return record


class ExtractionError(ValueError):
    pass


# -- extraction ----------------------------------------------------------


def extract_ideas(u: Utterance, lex: Lexicon) -> list[IdeaTriple]:
    """Extract one IdeaTriple per verb clause from an utterance.

    Pre-annotated utterances are returned verbatim after lemma
    normalization.  Verbless clauses fold their content into the next verb
    clause as modifiers; trailing verbless content becomes an
    `assertion_only` triple carrying the content nouns.
    """
    cues = detect_cues(u.text, lex)
    if u.pre_annotation is not None:
        return [
            _normalize_triple(t, u, i, cues, lex) for i, t in enumerate(u.pre_annotation)
        ]
    if not u.text.strip():
        raise ExtractionError(f"utterance {u.id}: empty text and no pre-annotation")

    clauses = _split_clauses(u.text, lex)
    triples: list[IdeaTriple] = []
    pending: list[str] = []  # content folded forward from verbless clauses
    oov: set[str] = set()

    for clause in clauses:
        verb_idx = next((i for i, (lemma, _) in enumerate(clause) if lex.is_verb(lemma)), None)
        content = [(lemma, known) for lemma, known in clause if not lex.is_stopword(lemma)]
        if verb_idx is None:
            pending.extend(lemma for lemma, _ in content)
            oov.update(lemma for lemma, known in content if not known)
            continue
        verb = clause[verb_idx][0]
        pre = [lemma for i, (lemma, _) in enumerate(clause) if i < verb_idx and not lex.is_stopword(lemma)]
        post = [lemma for i, (lemma, _) in enumerate(clause) if i > verb_idx and not lex.is_stopword(lemma)]
        noun2 = (post[-1],) if post else ()
        modifiers = tuple(pending) + tuple(pre) + tuple(post[:-1])
        oov.update(lemma for lemma, known in clause if not known and not lex.is_stopword(lemma))
        triples.append(
            IdeaTriple(
                verb=verb,
                noun2=noun2,
                modifiers=modifiers,
                source_utterance=u.id,
                ordinal=len(triples),
                speaker=u.speaker,
                out_of_lexicon=frozenset(oov),
                cues=cues,
            )
        )
        pending = []
        oov = set()

    if pending or not triples:
        noun2 = (pending[-1],) if pending else ()
        triples.append(
            IdeaTriple(
                verb=None,
                noun2=noun2,
                modifiers=tuple(pending[:-1]),
                source_utterance=u.id,
                ordinal=len(triples),
                speaker=u.speaker,
                assertion_only=True,
                out_of_lexicon=frozenset(oov),
                cues=cues,
            )
        )
    return triples


def detect_cues(text: str, lex: Lexicon) -> tuple[str, ...]:
    """Cue labels whose lexicon pattern occurs in the raw text."""
    lowered = " " + re.sub(r"[^a-z0-9-]+", " ", text.lower()).strip() + " "
    labels: dict[str, None] = {}
    for pattern in sorted(lex.image_cues):
        if f" {pattern} " in lowered:
            labels.setdefault(lex.image_cues[pattern], None)
    return tuple(labels)


def _split_clauses(text: str, lex: Lexicon) -> list[list[tuple[str, bool]]]:
    lowered = text.lower()
    for surface in sorted((s for s in lex.lemmas if " " in s), key=len, reverse=True):
        lowered = lowered.replace(surface, lex.lemmas[surface])

    clauses: list[list[tuple[str, bool]]] = []
    current: list[tuple[str, bool]] = []
    for part in re.split(r"[,.;:!?]", lowered):
        for token in _TOKEN_RE.findall(part):
            if token in _CLAUSE_BREAK_TOKENS:
                if current:
                    clauses.append(current)
                current = []
                continue
            lemma, known = lex.normalize(token)
            if lex.is_verb(lemma) and any(lex.is_verb(l) for l, _ in current):
                clauses.append(current)
                current = []
            current.append((lemma, known))
        if current:
            clauses.append(current)
        current = []
    return clauses


def _normalize_triple(
    t: IdeaTriple, u: Utterance, ordinal: int, cues: tuple[str, ...], lex: Lexicon
) -> IdeaTriple:
    oov: set[str] = set()

    def norm(token: str | None) -> str | None:
        if token is None:
            return None
        lemma, known = lex.normalize(token)
        if not known:
            oov.add(lemma)
        return lemma

    verb = norm(t.verb)
    noun1 = norm(t.noun1)
    noun2 = tuple(norm(n) for n in t.noun2)
    modifiers = tuple(norm(m) for m in t.modifiers)
    return replace(
        t,
        verb=verb,
        noun1=noun1,
        noun2=noun2,  # type: ignore[arg-type]
        modifiers=modifiers,  # type: ignore[arg-type]
        source_utterance=u.id,
        ordinal=ordinal,
        speaker=u.speaker or t.speaker,
        assertion_only=t.assertion_only or verb is None,
        out_of_lexicon=frozenset(oov),
        cues=tuple(dict.fromkeys(t.cues + cues)),
    )


# -- nature classification ------------------------------------------------


def classify_nature(idea: IdeaTriple, ctx: "ContextState") -> NatureLabel:
    """Deterministic rule cascade; falls back to solving_highlevel."""
    lex = ctx.long_term
    content = [lex.canonical(l) for l in idea.content_lemmas()]
    if content and ctx.problem_elements:
        problem_classes = {lex.canonical(p) for p in ctx.problem_elements}
        overlap = sum(1 for c in content if c in problem_classes) / len(content)
        if overlap >= 0.6:
            return NatureLabel.PROBLEM_UNDERSTANDING

    cues = set(idea.cues)
    for label in NatureLabel:
        if label.value in cues:
            return label
    if "needed_problem_changes" in cues or "needed_solution_changes" in cues:
        return NatureLabel.REQUIRED_CHANGE
    if "expected_behavior" in cues and idea.verb is not None:
        immediate = ctx.immediate_elements()
        if any(lex.canonical(l) in immediate for l in idea.content_lemmas()):
            return NatureLabel.SOLVING_DETAILING
    if PRO_CON_CUE in cues:
        return NatureLabel.PRO_CON_ANALYSIS
    return NatureLabel.SOLVING_HIGHLEVEL


# -- transcript IO ---------------------------------------------------------


class TranscriptError(ValueError):
    pass


def parse_transcript(lines: Iterable[str], session: str = "") -> list[Utterance]:
    utterances: list[Utterance] = []
    last_id: int | None = None
    last_t: int | None = None
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TranscriptError(f"line {lineno}: invalid JSON: {exc}") from None
        try:
            uid = int(record["id"])
            t = int(record.get("t_ms", 0))
            text = str(record.get("text", ""))
        except (KeyError, TypeError, ValueError) as exc:
            raise TranscriptError(f"line {lineno}: bad utterance record: {exc}") from None
        pre = None
        if "triples" in record:
            pre = tuple(IdeaTriple.from_dict(r) for r in record["triples"])
        if last_id is not None and uid <= last_id:
            raise TranscriptError(f"line {lineno}: utterance id {uid} not increasing")
        if last_t is not None and t < last_t:
            raise TranscriptError(f"line {lineno}: timestamp {t} decreasing")
        if not text.strip() and pre is None:
            raise TranscriptError(f"line {lineno}: empty text without pre-annotation")
        utterances.append(
            Utterance(
                id=uid,
                speaker=str(record.get("speaker", "")),
                t=t,
                text=text,
                session=session,
                pre_annotation=pre,
            )
        )
        last_id, last_t = uid, t
    return utterances


def load_transcript(path, session: str = "") -> list[Utterance]:
    with open(path, encoding="utf-8") as fh:
        return parse_transcript(fh, session=session)
