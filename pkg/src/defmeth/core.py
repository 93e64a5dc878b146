"""Text ingestion: sentence segmentation, tokenisation, tagging and lemmas.

The tagger is deterministic and self-contained: closed word classes come from
the literal lists in the bundled syntax pattern file, open classes from a small
dictionary plus suffix heuristics, lemmas from an exception table plus suffix
stripping.  Every token keeps a character range into the original document so
downstream spans can always be reported against the raw text.

All types are immutable after construction; the functions here are pure and a
shared ``Lexicon`` can be used from multiple threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path


class WordClass(Enum):
    NOUN = "noun"
    SIMPLE_VERB = "simple-verb"
    COMPOUND_VERB = "compound-verb"
    AUXILIARY = "auxiliary"
    MODAL = "modal"
    PAST_PARTICIPLE = "past-participle"
    PRESENT_PARTICIPLE = "present-participle"
    ADJECTIVE = "adjective"
    NON_NEGATIVE_ADVERB = "non-negative-adverb"
    NEGATIVE_ADVERB = "negative-adverb"
    PREPOSITION = "preposition"
    DETERMINER = "determiner"
    PRONOUN = "pronoun"
    PERSONAL_PRONOUN = "personal-pronoun"
    REFLEXIVE_PRONOUN = "reflexive-pronoun"
    RECIPROCAL_PRONOUN = "reciprocal-pronoun"
    INDEFINITE_PRONOUN = "indefinite-pronoun"
    NUMERAL = "numeral"
    SYMBOL = "symbol"
    COORDINATOR = "coordinator"
    EXISTENTIAL_THERE = "existential-there"
    SUBORDINATOR_ADVERBIAL = "subordinator-adverbial"
    SUBORDINATOR_NOMINAL = "subordinator-nominal"
    SUBORDINATOR_RELATIVE = "subordinator-relative"
    OTHER = "other"


VERBISH = {
    WordClass.SIMPLE_VERB,
    WordClass.AUXILIARY,
    WordClass.MODAL,
    WordClass.PAST_PARTICIPLE,
    WordClass.PRESENT_PARTICIPLE,
}

#: tokens the matcher may step over inside a phrase (parenthetical wrappers)
SKIPPABLE_SURFACES = {"(", ")", "<", ">", '"', "'", "`", "“", "”"}


@dataclass(frozen=True)
class Token:
    surface: str
    lemma: str
    pos: WordClass
    index: int
    origin: tuple[int, int]  # character range in the original document text
    synset: str | None = None
    synthetic: bool = False

    @property
    def is_punct(self) -> bool:
        return self.pos is WordClass.OTHER and not self.surface[:1].isalnum()

    @property
    def is_skippable(self) -> bool:
        return self.surface in SKIPPABLE_SURFACES


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]
    doc_id: str
    sentence_index: int
    original_text: str

    def lemmas(self) -> tuple[str, ...]:
        return tuple(t.lemma for t in self.tokens)

    def surfaces(self) -> tuple[str, ...]:
        return tuple(t.surface for t in self.tokens)

    def content_surfaces(self) -> tuple[str, ...]:
        return tuple(t.surface for t in self.tokens if not t.is_punct)

    def content_lemmas(self) -> tuple[str, ...]:
        return tuple(t.lemma for t in self.tokens if not t.is_punct)


@dataclass(frozen=True)
class Document:
    doc_id: str
    raw_text: str
    sentences: tuple[Sentence, ...]


def data_path() -> Path:
    """Directory holding the bundled pattern and lexicon files."""
    return Path(__file__).parent / "data"


# ---------------------------------------------------------------------------
# sentence segmentation


def _load_abbreviations(path: Path | None = None) -> set[str]:
    path = path or data_path() / "lexicon" / "abbreviations.txt"
    out = set()
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.add(line)
    return out


_ABBREVIATIONS: set[str] | None = None


def abbreviations() -> set[str]:
    global _ABBREVIATIONS
    if _ABBREVIATIONS is None:
        _ABBREVIATIONS = _load_abbreviations()
    return _ABBREVIATIONS


_BOUNDARY_RE = re.compile(r"[.!?]+(?=\s|$)")


def segment_sentences(raw_text: str) -> list[tuple[str, int, int]]:
    """Split raw prose into sentences, returning (text, start, end) spans.

    Splits at sentence-final punctuation followed by whitespace, unless the
    preceding word is a known abbreviation or a single capital letter.  Blank
    lines always separate sentences.  Empty input yields an empty list.
    """
    spans: list[tuple[int, int]] = []
    abbr = abbreviations()
    for block_m in re.finditer(r"[^\n]+(?:\n(?!\s*\n)[^\n]+)*", raw_text):
        start = block_m.start()
        block = block_m.group()
        cursor = 0
        for m in _BOUNDARY_RE.finditer(block):
            prev = block[cursor : m.end()]
            words = prev.split()
            last = words[-1] if words else ""
            if last in abbr or re.fullmatch(r"[A-Z]\.", last):
                continue
            nxt = block[m.end() :].lstrip()
            if nxt and not (nxt[0].isupper() or nxt[0].isdigit() or nxt[0] in "\"'(["):
                continue
            spans.append((start + cursor, start + m.end()))
            cursor = m.end()
        if block[cursor:].strip():
            spans.append((start + cursor, start + len(block)))
    out = []
    for s, e in spans:
        text = raw_text[s:e]
        lead = len(text) - len(text.lstrip())
        trail = len(text) - len(text.rstrip())
        s, e = s + lead, e - trail
        if s < e:
            out.append((raw_text[s:e], s, e))
    return out


# ---------------------------------------------------------------------------
# tokenisation

_ABBR_TOKEN = r"(?:e\.g\.|i\.e\.|etc\.|cf\.|vs\.|al\.|[A-Z]\.(?![A-Za-z]))"
_WORD = r"[A-Za-z0-9][A-Za-z0-9%]*(?:[-–—'/’][A-Za-z0-9%]+)*"
_TOKEN_RE = re.compile(rf"{_ABBR_TOKEN}|{_WORD}|\S")


def tokenize(raw_sentence: str, offset: int = 0) -> list[Token]:
    """Split a sentence into tokens; punctuation becomes separate tokens.

    Hyphenated and slash-joined words stay whole; known abbreviations keep
    their trailing period.  ``lemma`` and ``pos`` are left unset here.
    """
    tokens = []
    for i, m in enumerate(_TOKEN_RE.finditer(raw_sentence)):
        tokens.append(
            Token(
                surface=m.group(),
                lemma="",
                pos=WordClass.OTHER,
                index=i,
                origin=(offset + m.start(), offset + m.end()),
            )
        )
    return tokens


# ---------------------------------------------------------------------------
# lexicon

# closed classes read from the literal lists of these syntax rules
_CLOSED_RULES = {
    "negative adverb": WordClass.NEGATIVE_ADVERB,
    "modal": WordClass.MODAL,
    "auxiliary": WordClass.AUXILIARY,
    "coordinator": WordClass.COORDINATOR,
    "determiner": WordClass.DETERMINER,
    "existential there": WordClass.EXISTENTIAL_THERE,
    "personal pronoun": WordClass.PERSONAL_PRONOUN,
    "reflexive pronoun": WordClass.REFLEXIVE_PRONOUN,
    "reciprocal pronoun": WordClass.RECIPROCAL_PRONOUN,
    "indefinite pronoun": WordClass.INDEFINITE_PRONOUN,
    "pronoun": WordClass.PRONOUN,
    "preposition": WordClass.PREPOSITION,
    "adverbial subordinator": WordClass.SUBORDINATOR_ADVERBIAL,
    "nominal subordinator": WordClass.SUBORDINATOR_NOMINAL,
    "relative subordinator": WordClass.SUBORDINATOR_RELATIVE,
}

# tag priority when a surface form sits in several closed lists
_CLOSED_PRIORITY = [
    WordClass.NEGATIVE_ADVERB,
    WordClass.MODAL,
    WordClass.AUXILIARY,
    WordClass.COORDINATOR,
    WordClass.DETERMINER,
    WordClass.EXISTENTIAL_THERE,
    WordClass.PERSONAL_PRONOUN,
    WordClass.REFLEXIVE_PRONOUN,
    WordClass.RECIPROCAL_PRONOUN,
    WordClass.INDEFINITE_PRONOUN,
    WordClass.PRONOUN,
    WordClass.PREPOSITION,
    WordClass.SUBORDINATOR_ADVERBIAL,
    WordClass.SUBORDINATOR_NOMINAL,
    WordClass.SUBORDINATOR_RELATIVE,
]

_RULE_HEAD_RE = re.compile(r"^<([^>]+)>\s*::=", re.MULTILINE)
_LITERAL_RE = re.compile(r'"([^"]+)"')

_CLASS_BY_TAG = {c.value: c for c in WordClass}


def extract_rule_literals(bnf_text: str) -> dict[str, list[str]]:
    """Map rule name -> quoted literals of its body (order preserved)."""
    heads = list(_RULE_HEAD_RE.finditer(bnf_text))
    out: dict[str, list[str]] = {}
    for i, m in enumerate(heads):
        body_end = heads[i + 1].start() if i + 1 < len(heads) else len(bnf_text)
        body = bnf_text[m.end() : body_end]
        body = re.sub(r"#[^\n]*", "", body)
        out[m.group(1)] = _LITERAL_RE.findall(body)
    return out


@dataclass
class Lexicon:
    """Closed-class surface lists, open-class dictionary and lemma tables."""

    closed: dict[WordClass, set[str]] = field(default_factory=dict)
    multiword_coordinators: list[tuple[str, ...]] = field(default_factory=list)
    open_dict: dict[str, WordClass] = field(default_factory=dict)
    exceptions: dict[str, tuple[str, WordClass | None]] = field(default_factory=dict)
    irregular_participle: dict[str, str] = field(default_factory=dict)

    @classmethod
    def load(cls, directory: Path | None = None) -> "Lexicon":
        directory = directory or data_path()
        lex = cls()
        syntax = (directory / "patterns" / "syntax.bnf").read_text(encoding="utf-8")
        literals = extract_rule_literals(syntax)
        for rule, wc in _CLOSED_RULES.items():
            entries = literals.get(rule, [])
            lex.closed.setdefault(wc, set())
            for entry in entries:
                if " " in entry:
                    if wc is WordClass.COORDINATOR:
                        lex.multiword_coordinators.append(tuple(entry.split()))
                    continue
                lex.closed[wc].add(entry)
        for line in (directory / "lexicon" / "open_dict.tsv").read_text(
            encoding="utf-8"
        ).splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            surface, tag = line.split("\t")
            lex.open_dict[surface] = _CLASS_BY_TAG[tag]
        for line in (directory / "lexicon" / "lemma_exceptions.tsv").read_text(
            encoding="utf-8"
        ).splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            surface, lemma = parts[0], parts[1]
            tag = _CLASS_BY_TAG[parts[2]] if len(parts) > 2 and parts[2] else None
            lex.exceptions[surface] = (lemma, tag)
            if tag is WordClass.PAST_PARTICIPLE:
                lex.irregular_participle.setdefault(lemma, surface)
        return lex

    def closed_class_of(self, surface: str) -> WordClass | None:
        s = surface.lower()
        for wc in _CLOSED_PRIORITY:
            if s in self.closed.get(wc, ()):
                return wc
        return None


_DEFAULT_LEXICON: Lexicon | None = None


def default_lexicon() -> Lexicon:
    global _DEFAULT_LEXICON
    if _DEFAULT_LEXICON is None:
        _DEFAULT_LEXICON = Lexicon.load()
    return _DEFAULT_LEXICON


# ---------------------------------------------------------------------------
# lemmatisation

_VOWELS = set("aeiou")


def _strip_ing(w: str, lex: Lexicon) -> str:
    base = w[:-3]
    if not base:
        return w
    if base in lex.open_dict:
        return base
    if base + "e" in lex.open_dict:
        return base + "e"
    if len(base) > 2 and base[-1] == base[-2] and base[-1] not in _VOWELS:
        if base[:-1] in lex.open_dict:
            return base[:-1]
    return base


def _strip_ed(w: str, lex: Lexicon) -> str:
    if w.endswith("ied") and len(w) > 4:
        return w[:-3] + "y"
    base = w[:-2]
    if not base:
        return w
    if base in lex.open_dict:
        return base
    if base + "e" in lex.open_dict:
        return base + "e"
    if len(base) > 2 and base[-1] == base[-2] and base[-1] not in _VOWELS:
        if base[:-1] in lex.open_dict:
            return base[:-1]
    return base


def _strip_s(w: str, lex: "Lexicon") -> str:
    if w[:-1] in lex.open_dict:
        return w[:-1]
    if w.endswith("es") and w[:-2] in lex.open_dict:
        return w[:-2]
    if w.endswith("ies") and len(w) > 4:
        return w[:-3] + "y"
    if w.endswith(("sses", "xes", "ches", "shes")) and len(w) > 4:
        return w[:-2]
    if w.endswith("ss") or len(w) < 3:
        return w
    return w[:-1]


def lemmatize_word(surface: str, lexicon: Lexicon | None = None) -> str:
    """Lowercased base form via exception table, then suffix stripping."""
    lex = lexicon or default_lexicon()
    if surface in lex.exceptions:
        return lex.exceptions[surface][0]
    w = surface.lower()
    if w in lex.exceptions:
        return lex.exceptions[w][0]
    if w in lex.open_dict or lex.closed_class_of(w) is not None:
        return w
    if w.endswith("ing") and len(w) > 4:
        base = _strip_ing(w, lex)
        if len(base) >= 2:
            return base
    if w.endswith("ed") and len(w) > 3:
        base = _strip_ed(w, lex)
        if len(base) >= 2:
            return base
    if w.endswith("s") and not w.endswith("ss") and len(w) > 3:
        return _strip_s(w, lex)
    return w


def participle_of(lemma: str, lexicon: Lexicon | None = None) -> str:
    """Past participle surface for a verb lemma (used when synthesising)."""
    lex = lexicon or default_lexicon()
    if lemma in lex.irregular_participle:
        return lex.irregular_participle[lemma]
    if lemma.endswith("e"):
        return lemma + "d"
    if lemma.endswith("y") and len(lemma) > 2 and lemma[-2] not in _VOWELS:
        return lemma[:-1] + "ied"
    return lemma + "ed"


# ---------------------------------------------------------------------------
# tagging

_NUMERAL_RE = re.compile(r"\d[\d,.]*%?[A-Za-z]*$")


def _classify(surface: str, lemma: str, lex: Lexicon) -> WordClass:
    w = surface.lower()
    if not surface[:1].isalnum():
        return WordClass.OTHER
    if _NUMERAL_RE.fullmatch(surface):
        return WordClass.NUMERAL
    if w in lex.open_dict:
        return lex.open_dict[w]
    if surface.isupper() and len(surface) > 1:
        return WordClass.NOUN  # acronyms never read as closed-class words
    closed = lex.closed_class_of(w)
    if closed is not None:
        return closed
    if len(surface) == 1 and surface.isalpha():
        return WordClass.SYMBOL
    if re.fullmatch(r"[a-z]\d*", w) and len(w) <= 2:
        return WordClass.SYMBOL
    if w.endswith("ing") and (
        len(w) > 5 or lex.open_dict.get(lemma) is WordClass.SIMPLE_VERB
    ):
        return WordClass.PRESENT_PARTICIPLE
    if w.endswith("ed") and len(w) > 3 and (
        len(w) > 4 or lex.open_dict.get(lemma) is WordClass.SIMPLE_VERB
    ):
        return WordClass.PAST_PARTICIPLE
    if w.endswith("ly") and len(w) > 4:
        return WordClass.NON_NEGATIVE_ADVERB
    if w.endswith("s") and not w.endswith("ss") and len(w) > 3:
        base = lemma
        if base in lex.open_dict:
            return lex.open_dict[base]
    return WordClass.NOUN


def tag_and_lemmatize(tokens: list[Token], lexicon: Lexicon | None = None) -> list[Token]:
    """Fill in ``pos`` and ``lemma`` for raw tokens."""
    lex = lexicon or default_lexicon()
    out = []
    for t in tokens:
        if t.surface in lex.exceptions:
            lemma, tag = lex.exceptions[t.surface]
        elif t.surface.lower() in lex.exceptions:
            lemma, tag = lex.exceptions[t.surface.lower()]
        else:
            lemma, tag = lemmatize_word(t.surface, lex), None
        if tag is None:
            tag = _classify(t.surface, lemma, lex)
        out.append(replace(t, lemma=lemma or t.surface.lower(), pos=tag))
    return out


# ---------------------------------------------------------------------------
# document ingestion

def ingest(raw_text: str, doc_id: str = "doc", lexicon: Lexicon | None = None) -> Document:
    """Segment, tokenise and tag a raw text into a Document."""
    lex = lexicon or default_lexicon()
    sentences = []
    for i, (text, start, _end) in enumerate(segment_sentences(raw_text)):
        toks = tag_and_lemmatize(tokenize(text, offset=start), lex)
        sentences.append(
            Sentence(tokens=tuple(toks), doc_id=doc_id, sentence_index=i, original_text=text)
        )
    return Document(doc_id=doc_id, raw_text=raw_text, sentences=tuple(sentences))


def ingest_sentence(text: str, doc_id: str = "doc", index: int = 0,
                    lexicon: Lexicon | None = None) -> Sentence:
    toks = tag_and_lemmatize(tokenize(text), lexicon or default_lexicon())
    return Sentence(tokens=tuple(toks), doc_id=doc_id, sentence_index=index, original_text=text)


def read_pretagged(text: str, doc_id: str = "doc") -> Document:
    """Parse the pre-tagged format: ``surface<TAB>lemma<TAB>class`` per token,
    blank line between sentences.  Bypasses the internal tagger."""
    sentences = []
    cur: list[Token] = []
    offset = 0
    parts_text: list[str] = []

    def flush() -> None:
        nonlocal cur, parts_text
        if cur:
            sentences.append(
                Sentence(
                    tokens=tuple(cur),
                    doc_id=doc_id,
                    sentence_index=len(sentences),
                    original_text=" ".join(parts_text),
                )
            )
        cur, parts_text = [], []

    for line in text.splitlines():
        if not line.strip():
            flush()
            continue
        surface, lemma, tag = line.split("\t")
        start = offset if not parts_text else offset + 1
        if parts_text:
            offset += 1
        cur.append(
            Token(
                surface=surface,
                lemma=lemma,
                pos=_CLASS_BY_TAG[tag],
                index=len(cur),
                origin=(start, start + len(surface)),
            )
        )
        parts_text.append(surface)
        offset = start + len(surface)
    flush()
    raw = "\n".join(s.original_text for s in sentences)
    return Document(doc_id=doc_id, raw_text=raw, sentences=tuple(sentences))


def words_of(text: str) -> list[str]:
    """Lowercased word sequence of a text, ignoring punctuation.

    This is the comparison form used by golden tests: spans are matched on
    their word sequences, never on exact character offsets.
    """
    return [m.group().lower() for m in re.finditer(_WORD, text)]
