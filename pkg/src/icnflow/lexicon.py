"""Lexicon: the long-term knowledge store behind every other module.

A lexicon is loaded once per session from a sectioned key-value text file
and is immutable afterwards.  It provides:

- surface-form -> lemma normalization (table-driven, no morphology)
- synonym sets (interchangeable lemmas) and antonym pairs
- stopwords
- abstraction ranks (0 = most abstract, larger = more concrete)
- relation templates per verb (expected object classes, output, goal)
- cue patterns mapping text fragments to image / nature hints

File format::

    # comment
    [lemmas]
    numbers = numbers        # surface = lemma; surface may be multi-word
    [synonyms]
    add, add-up, sum         # one set per line
    [antonyms]
    gap, contiguous          # one pair per line
    [stopwords]
    the, a, an
    [abstraction]
    sum = 1
    [verb_relations]
    add = objects: numbers|combinations; output: sum; goal: largest
    [image_cues]
    check how many = needed_problem_changes
"""

from __future__ import annotations

from dataclasses import dataclass, field

SECTIONS = (
    "lemmas",
    "synonyms",
    "antonyms",
    "stopwords",
    "abstraction",
    "verb_relations",
    "image_cues",
)


class LexiconError(ValueError):
    """Malformed lexicon file; message carries the offending line number."""


class LexiconValidationError(ValueError):
    """Structurally parsed lexicon violates an invariant; names the lemma."""


@dataclass(frozen=True)
class RelationTemplate:
    """One meaning of a verb: what it acts on and what it yields."""

    verb: str
    objects: frozenset[str] = frozenset()
    output: str | None = None
    goal: str | None = None


@dataclass(frozen=True)
class Lexicon:
    lemmas: dict[str, str] = field(default_factory=dict)
    synonym_sets: tuple[frozenset[str], ...] = ()
    antonym_pairs: tuple[tuple[str, str], ...] = ()
    stopwords: frozenset[str] = frozenset()
    abstraction_rank: dict[str, int] = field(default_factory=dict)
    verb_relations: dict[str, tuple[RelationTemplate, ...]] = field(default_factory=dict)
    image_cues: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        class_of: dict[str, str] = {}
        for group in self.synonym_sets:
            rep = min(group)
            for lemma in group:
                if lemma in class_of:
                    raise LexiconValidationError(
                        f"lemma {lemma!r} belongs to more than one synonym set"
                    )
                class_of[lemma] = rep
        object.__setattr__(self, "_class_of", class_of)

        antonyms: set[frozenset[str]] = set()
        for a, b in self.antonym_pairs:
            if a == b:
                raise LexiconValidationError(f"lemma {a!r} is marked antonym of itself")
            antonyms.add(frozenset((a, b)))
        object.__setattr__(self, "_antonyms", antonyms)

        for verb, templates in self.verb_relations.items():
            for lemma in _template_lemmas(verb, templates):
                if lemma not in self.abstraction_rank:
                    raise LexiconValidationError(
                        f"lemma {lemma!r} appears in verb_relations but has no abstraction rank"
                    )

        known = set(self.lemmas.values())
        known.update(class_of)
        known.update(self.abstraction_rank)
        known.update(self.stopwords)
        for verb, templates in self.verb_relations.items():
            known.update(_template_lemmas(verb, templates))
        for a, b in self.antonym_pairs:
            known.update((a, b))
        object.__setattr__(self, "_known", frozenset(known))

    # -- lookups ------------------------------------------------------

    def normalize(self, token: str) -> tuple[str, bool]:
        """Map a surface token to (lemma, in_lexicon)."""
        token = token.lower()
        if token in self.lemmas:
            return self.lemmas[token], True
        return token, token in self._known  # type: ignore[attr-defined]

    def is_stopword(self, token: str) -> bool:
        return token.lower() in self.stopwords

    def canonical(self, lemma: str) -> str:
        """Synonym-class representative (smallest member), or the lemma itself."""
        return self._class_of.get(lemma, lemma)  # type: ignore[attr-defined]

    def same_class(self, a: str, b: str) -> bool:
        return self.canonical(a) == self.canonical(b)

    def are_antonyms(self, a: str, b: str) -> bool:
        return frozenset((a, b)) in self._antonyms  # type: ignore[attr-defined]

    def synonyms_of(self, lemma: str) -> frozenset[str]:
        rep = self._class_of.get(lemma)  # type: ignore[attr-defined]
        if rep is None:
            return frozenset((lemma,))
        for group in self.synonym_sets:
            if lemma in group:
                return group
        return frozenset((lemma,))

    def rank(self, lemma: str) -> int:
        return self.abstraction_rank.get(lemma, 0)

    def is_verb(self, lemma: str) -> bool:
        return lemma in self.verb_relations


def _template_lemmas(verb: str, templates: tuple[RelationTemplate, ...]):
    yield verb
    for t in templates:
        yield from t.objects
        if t.output:
            yield t.output
        if t.goal:
            yield t.goal


# -- parsing ------------------------------------------------------------


def parse_lexicon(text: str, source: str = "<string>") -> Lexicon:
    lemmas: dict[str, str] = {}
    synonym_sets: list[frozenset[str]] = []
    antonym_pairs: list[tuple[str, str]] = []
    stopwords: set[str] = set()
    abstraction: dict[str, int] = {}
    relations: dict[str, list[RelationTemplate]] = {}
    cues: dict[str, str] = {}

    section: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip().lower()
            if name not in SECTIONS:
                raise LexiconError(f"{source}:{lineno}: unknown section [{name}]")
            section = name
            continue
        if section is None:
            raise LexiconError(f"{source}:{lineno}: content before any section header")

        if section == "lemmas":
            surface, lemma = _split_kv(line, source, lineno)
            lemmas[surface.lower()] = lemma.lower()
        elif section == "synonyms":
            group = frozenset(_split_list(line))
            if len(group) < 2:
                raise LexiconError(f"{source}:{lineno}: synonym set needs >= 2 lemmas")
            synonym_sets.append(group)
        elif section == "antonyms":
            pair = _split_list(line)
            if len(pair) != 2:
                raise LexiconError(f"{source}:{lineno}: antonym line needs exactly 2 lemmas")
            antonym_pairs.append((pair[0], pair[1]))
        elif section == "stopwords":
            stopwords.update(_split_list(line))
        elif section == "abstraction":
            lemma, value = _split_kv(line, source, lineno)
            try:
                rank = int(value)
            except ValueError:
                raise LexiconError(f"{source}:{lineno}: rank must be an integer") from None
            if rank < 0:
                raise LexiconError(f"{source}:{lineno}: rank must be >= 0")
            abstraction[lemma.lower()] = rank
        elif section == "verb_relations":
            verb, spec_text = _split_kv(line, source, lineno)
            template = _parse_template(verb.lower(), spec_text, source, lineno)
            relations.setdefault(verb.lower(), []).append(template)
        elif section == "image_cues":
            pattern, label = _split_kv(line, source, lineno)
            cues[pattern.lower()] = label.lower()

    return Lexicon(
        lemmas=lemmas,
        synonym_sets=tuple(synonym_sets),
        antonym_pairs=tuple(antonym_pairs),
        stopwords=frozenset(stopwords),
        abstraction_rank=abstraction,
        verb_relations={v: tuple(ts) for v, ts in relations.items()},
        image_cues=cues,
    )


def load_lexicon(path) -> Lexicon:
    """Load and validate a lexicon file."""
    with open(path, encoding="utf-8") as fh:
        return parse_lexicon(fh.read(), source=str(path))


def _split_kv(line: str, source: str, lineno: int) -> tuple[str, str]:
    if "=" not in line:
        raise LexiconError(f"{source}:{lineno}: expected 'key = value'")
    key, value = line.split("=", 1)
    key, value = key.strip(), value.strip()
    if not key or not value:
        raise LexiconError(f"{source}:{lineno}: empty key or value")
    return key, value


def _split_list(line: str) -> list[str]:
    return [part.strip().lower() for part in line.split(",") if part.strip()]


def _parse_template(verb: str, text: str, source: str, lineno: int) -> RelationTemplate:
    objects: frozenset[str] = frozenset()
    output: str | None = None
    goal: str | None = None
    for clause in text.split(";"):
        clause = clause.strip()
        if not clause:
            continue
        if ":" not in clause:
            raise LexiconError(f"{source}:{lineno}: template clause needs 'field: value'")
        name, value = clause.split(":", 1)
        name, value = name.strip().lower(), value.strip().lower()
        if name == "objects":
            objects = frozenset(v.strip() for v in value.split("|") if v.strip())
        elif name == "output":
            output = value
        elif name == "goal":
            goal = value
        else:
            raise LexiconError(f"{source}:{lineno}: unknown template field {name!r}")
    return RelationTemplate(verb=verb, objects=objects, output=output, goal=goal)
