"""Sentence normalisation applied before pattern matching.

Five steps run in a fixed order: compound sentences are split at coordinators
joining independent clauses; an active verb with a noun-phrase object and a
selected-preposition complement is rewritten into passive voice; modals,
perfect "have" and adverbs next to verbs or adjectives are dropped (negation
stays); lemmas are already carried by every token; finally content lemmas are
annotated with their synonym-set id so literal matching can generalise.

Rewrites never touch character provenance: synthesised tokens point at the
span of the token that motivated them, so extraction spans can always be
reported against the original text.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

from .core import (
    Document,
    Lexicon,
    Sentence,
    Token,
    WordClass,
    data_path,
    default_lexicon,
    participle_of,
)
from .grammar import Grammar, Matcher, load_grammar


@dataclass(frozen=True)
class SynonymTable:
    """Lemma -> synonym-set id; every lemma belongs to at most one set."""

    entries: dict[str, str]

    @classmethod
    def load(cls, path: Path | None = None) -> "SynonymTable":
        path = path or data_path() / "lexicon" / "synonyms.tsv"
        entries: dict[str, str] = {}
        for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            set_id, members = line.split("\t")
            for lemma in members.split(","):
                lemma = lemma.strip()
                if lemma in entries:
                    raise ValueError(
                        f"{path}:{lineno}: lemma {lemma!r} already in set {entries[lemma]!r}"
                    )
                entries[lemma] = set_id
        return cls(entries=entries)

    def set_of(self, lemma: str) -> str | None:
        return self.entries.get(lemma)


@dataclass(frozen=True)
class PreprocessTrace:
    step: str  # split | passivize | strip-modality | lemmatize | synonym-map
    before: Sentence
    after: tuple[Sentence, ...]


def _rebuild(s: Sentence, tokens: list[Token]) -> Sentence:
    toks = tuple(replace(t, index=i) for i, t in enumerate(tokens))
    return Sentence(
        tokens=toks,
        doc_id=s.doc_id,
        sentence_index=s.sentence_index,
        original_text=s.original_text,
    )


_ADVERBS = {WordClass.NON_NEGATIVE_ADVERB, WordClass.NEGATIVE_ADVERB}
_VERB_OR_ADJ = {
    WordClass.SIMPLE_VERB,
    WordClass.AUXILIARY,
    WordClass.MODAL,
    WordClass.PAST_PARTICIPLE,
    WordClass.PRESENT_PARTICIPLE,
    WordClass.ADJECTIVE,
}

# verbs the passive rewrite applies to, with the prepositions that complete
# their identifier once the object moves in front
_PASSIVIZE_FAMILIES: tuple[tuple[tuple[str, ...], tuple[str, ...]], ...] = (
    (("add", "supplement", "group", "combine"), ("in", "to", "into", "between", "among")),
    (
        ("decompose", "split", "break", "divide", "separate", "categorize", "classify"),
        ("in", "to", "into", "between", "among"),
    ),
    (
        ("include", "contain", "involve", "comprise", "encompass", "consist"),
        ("in", "to", "into"),
    ),
)

_PASSIVIZE_PREPS = {v: set(preps) for verbs, preps in _PASSIVIZE_FAMILIES for v in verbs}


class Preprocessor:
    """Bundles the grammar, lexicon and synonym table the steps need."""

    def __init__(
        self,
        grammar: Grammar | None = None,
        lexicon: Lexicon | None = None,
        synonyms: SynonymTable | None = None,
        budget: int = 1_000_000,
    ):
        self.grammar = grammar or load_grammar(data_path() / "patterns" / "syntax.bnf")
        self.lexicon = lexicon or default_lexicon()
        self.synonyms = synonyms or SynonymTable.load()
        self.budget = budget

    def _matcher(self, tokens) -> Matcher:
        return Matcher(self.grammar, tokens, self.synonyms.entries, self.budget)

    # -- step 1: compound splitting

    def _full_cover(self, tokens: tuple[Token, ...], rule: str) -> bool:
        end = len(tokens)
        while end > 0 and tokens[end - 1].is_punct:
            end -= 1
        if end == 0:
            return False
        m = self._matcher(tokens)
        return end in m.rule_ends(rule, 0)

    def _coordinator_spans(self, tokens) -> list[tuple[int, int]]:
        single = {"and", "or", "but", "yet"}
        spans = []
        lemmas = [t.lemma for t in tokens]
        i = 0
        while i < len(tokens):
            if lemmas[i : i + 3] == ["as", "well", "as"]:
                spans.append((i, i + 3))
                i += 3
                continue
            if lemmas[i] in single and i > 0:
                spans.append((i, i + 1))
            i += 1
        return spans

    def _subject_of(self, tokens: tuple[Token, ...]) -> tuple[Token, ...] | None:
        m = self._matcher(tokens)
        ends = [e for e in m.rule_ends("np list", 0) if e > 0]
        if ends:
            return tokens[: max(ends)]
        ends = [e for e in m.rule_ends("person", 0) if e > 0]
        if ends:
            return tokens[: max(ends)]
        return None

    def split_compound(self, s: Sentence) -> list[Sentence]:
        """Split at a coordinator when both sides stand as clauses.

        The right conjunct must either start with an auxiliary or modal and be
        a complete verb phrase (the shared subject is then copied in), or be a
        complete main clause whose subject opens with a determiner, pronoun,
        symbol or numeral.  Bare-noun right conjuncts stay attached: they are
        almost always phrase-level coordination.
        """
        tokens = s.tokens
        for c_start, c_end in self._coordinator_spans(tokens):
            left = list(tokens[:c_start])
            while left and left[-1].is_punct:
                left.pop()
            right = list(tokens[c_end:])
            while right and right[0].is_punct:
                right.pop(0)
            if not left or not right:
                continue
            left_t = tuple(left)
            if not self._full_cover(left_t, "main clause"):
                continue
            right_t = tuple(right)
            first = right_t[0]
            out: list[Sentence] | None = None
            if first.pos in (WordClass.AUXILIARY, WordClass.MODAL) and self._full_cover(
                right_t, "verb phrase"
            ):
                subject = self._subject_of(left_t)
                if subject is None:
                    continue
                copied = [replace(t, synthetic=True) for t in subject]
                out = [
                    _rebuild(s, left),
                    _rebuild(s, copied + right),
                ]
            elif first.pos in (
                WordClass.DETERMINER,
                WordClass.PRONOUN,
                WordClass.PERSONAL_PRONOUN,
                WordClass.SYMBOL,
                WordClass.NUMERAL,
            ) and self._full_cover(right_t, "main clause"):
                out = [_rebuild(s, left), _rebuild(s, right)]
            if out is not None:
                parts: list[Sentence] = []
                for part in out:
                    parts.extend(self.split_compound(part))
                return parts
        return [s]

    # -- step 2: active -> passive

    def passivize(self, s: Sentence) -> Sentence:
        """Rewrite ``V NP P ...`` to ``NP be V-ppart P ...`` for rewrite verbs.

        Applies only when the object between the verb and the preposition is a
        plain noun phrase and the preposition introduces a noun complement, so
        infinitive purpose clauses never trigger the rewrite.
        """
        tokens = s.tokens
        m = self._matcher(tokens)
        for v in range(len(tokens)):
            tok = tokens[v]
            if tok.pos is not WordClass.SIMPLE_VERB:
                continue
            k = v - 1
            while k >= 0 and tokens[k].pos in _ADVERBS:
                k -= 1
            if k >= 0 and (
                tokens[k].pos is WordClass.AUXILIARY or tokens[k].lemma == "to"
            ):
                continue
            preps = _PASSIVIZE_PREPS.get(tok.lemma)
            if preps is None:
                continue
            for j in range(v + 1, len(tokens)):
                if tokens[j].lemma not in preps or tokens[j].pos is not WordClass.PREPOSITION:
                    continue
                if j == v + 1:
                    break  # identifier already contiguous
                if j not in m.rule_ends("plain noun phrase", v + 1):
                    break
                if not any(e > j + 1 for e in m.rule_ends("np list", j + 1)):
                    break
                be_tok = Token("be", "be", WordClass.AUXILIARY, 0, tok.origin, synthetic=True)
                pp = participle_of(tok.lemma, self.lexicon)
                pp_tok = Token(pp, tok.lemma, WordClass.PAST_PARTICIPLE, 0, tok.origin, synthetic=True)
                new = list(tokens[v + 1 : j]) + [be_tok, pp_tok] + list(tokens[j:])
                return _rebuild(s, new)
            break
        return s

    # -- step 3: modality stripping

    def strip_modality(self, s: Sentence) -> Sentence:
        """Drop modals, perfect "have" and adverbs adjacent to verbs or
        adjectives.  Negative adverbs are always kept.  Runs to fixpoint so the
        result is stable under re-application."""
        tokens = list(s.tokens)
        changed = True
        while changed:
            changed = False
            drop: set[int] = set()
            for i, t in enumerate(tokens):
                if t.pos is WordClass.MODAL:
                    drop.add(i)
                elif t.lemma == "have" and t.pos is WordClass.AUXILIARY:
                    j = i + 1
                    while j < len(tokens) and tokens[j].pos in _ADVERBS:
                        j += 1
                    if j < len(tokens) and tokens[j].pos is WordClass.PAST_PARTICIPLE:
                        drop.add(i)
                elif t.pos is WordClass.NON_NEGATIVE_ADVERB:
                    before = tokens[i - 1].pos if i > 0 else None
                    after = tokens[i + 1].pos if i + 1 < len(tokens) else None
                    if before in _VERB_OR_ADJ or after in _VERB_OR_ADJ:
                        drop.add(i)
            if drop:
                tokens = [t for i, t in enumerate(tokens) if i not in drop]
                changed = True
        if len(tokens) == len(s.tokens):
            return s
        return _rebuild(s, tokens)

    # -- step 5: synonym annotation

    def canonicalize_synonyms(self, s: Sentence) -> Sentence:
        """Annotate each lemma that belongs to a synonym set with its set id.
        Surfaces and lemmas stay untouched; only matching consults the id."""
        new = []
        changed = False
        for t in s.tokens:
            set_id = self.synonyms.set_of(t.lemma)
            if set_id is not None and t.synset != set_id:
                new.append(replace(t, synset=set_id))
                changed = True
            else:
                new.append(t)
        return _rebuild(s, new) if changed else s

    # -- pipeline

    def preprocess_sentence(self, s: Sentence) -> tuple[list[Sentence], list[PreprocessTrace]]:
        traces: list[PreprocessTrace] = []
        parts = self.split_compound(s)
        if len(parts) > 1:
            traces.append(PreprocessTrace("split", s, tuple(parts)))
        out = []
        for part in parts:
            p2 = self.passivize(part)
            if p2 is not part:
                traces.append(PreprocessTrace("passivize", part, (p2,)))
            p3 = self.strip_modality(p2)
            if p3 is not p2:
                traces.append(PreprocessTrace("strip-modality", p2, (p3,)))
            # step 4 (lemmatize) is carried by Token.lemma since ingestion
            p5 = self.canonicalize_synonyms(p3)
            if p5 is not p3:
                traces.append(PreprocessTrace("synonym-map", p3, (p5,)))
            out.append(p5)
        return out, traces

    def preprocess_document(self, doc: Document) -> tuple[Document, list[PreprocessTrace]]:
        sentences: list[Sentence] = []
        traces: list[PreprocessTrace] = []
        for s in doc.sentences:
            parts, tr = self.preprocess_sentence(s)
            traces.extend(tr)
            sentences.extend(parts)
        renumbered = tuple(
            Sentence(s.tokens, s.doc_id, i, s.original_text) for i, s in enumerate(sentences)
        )
        return Document(doc.doc_id, doc.raw_text, renumbered), traces
