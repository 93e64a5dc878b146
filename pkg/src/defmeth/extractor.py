"""Sentence classification and extraction of definition/method pairs.

Extraction anchors on identifier hits: for each surviving hit the phrases
adjacent to it must satisfy the categories its manifest row allows.  Medial
identifiers take the longest suffix phrase on the left and the longest
anchored phrase on the right; identifier-initial patterns capture two phrases
after the identifier instead.

Spans are reported against the original text by cut points, so words removed
during preprocessing still show up inside the spans they fall between.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import Document, Sentence, Token, words_of
from .grammar import Matcher
from .patterns import (
    DEFINITION_KINDS,
    IdentifierHit,
    IdentifierKind,
    Libraries,
    ManifestRow,
    PatternLibrary,
    default_libraries,
    find_identifiers,
)


@dataclass(frozen=True)
class RoleSpan:
    role: str  # definiendum | definiens | measure | purpose
    category: str  # grammar rule that matched
    start: int  # token range in the preprocessed sentence
    end: int
    text: str  # original-text slice (cut-point based)

    def words(self) -> list[str]:
        return words_of(self.text)


@dataclass(frozen=True)
class Extraction:
    kind: str  # "definition" | "method"
    rule: str
    identifier_kind: IdentifierKind
    identifier_text: str
    identifier_span: tuple[int, int]  # character range in the original text
    hit: IdentifierHit
    roles: dict[str, RoleSpan]
    doc_id: str
    sentence_index: int
    sentence: Sentence

    def role(self, name: str) -> RoleSpan | None:
        return self.roles.get(name)

    def identifier_words(self) -> list[str]:
        return words_of(self.identifier_text)

    def to_record(self) -> dict:
        rec = {
            "docId": self.doc_id,
            "sentenceIndex": self.sentence_index,
            "kind": self.kind,
            "identifierKind": self.identifier_kind.value,
            "identifier": {
                "text": self.identifier_text,
                "span": list(self.identifier_span),
            },
            "rule": self.rule,
            "roles": {},
        }
        for name, rs in sorted(self.roles.items()):
            rec["roles"][name] = {
                "text": rs.text,
                "category": rs.category,
                "tokens": [rs.start, rs.end],
            }
        return rec


@dataclass(frozen=True)
class Classification:
    is_definition: bool
    is_method: bool


def _origin_span(tokens: tuple[Token, ...], start: int, end: int) -> tuple[int, int]:
    span_toks = [t for t in tokens[start:end]]
    return (min(t.origin[0] for t in span_toks), max(t.origin[1] for t in span_toks))


def _trim_chars(text: str, lo: int, hi: int) -> tuple[int, int]:
    while lo < hi and not text[lo].isalnum():
        lo += 1
    while hi > lo and not text[hi - 1].isalnum():
        hi -= 1
    return lo, hi


class _SentenceContext:
    """Matchers and document text shared by all hits of one sentence."""

    def __init__(self, sentence: Sentence, library: PatternLibrary, libs: Libraries,
                 doc_text: str | None = None):
        self.sentence = sentence
        self.matcher = libs.matcher(library, sentence)
        self.doc_text = doc_text if doc_text is not None else sentence.original_text
        self.synthetic = any(t.synthetic for t in sentence.tokens)

    def span_text(self, start: int, end: int) -> str:
        toks = self.sentence.tokens
        if self.synthetic:
            return " ".join(
                t.surface for t in toks[start:end] if not t.is_punct
            )
        lo, hi = _origin_span(toks, start, end)
        lo, hi = _trim_chars(self.doc_text, lo, hi)
        return self.doc_text[lo:hi]

    def char_range(self, left_char: int, right_char: int, fallback: str) -> tuple[str, tuple[int, int]]:
        if self.synthetic or right_char < left_char:
            return fallback, (left_char, max(left_char, right_char))
        lo, hi = _trim_chars(self.doc_text, left_char, right_char)
        if hi > lo:
            return self.doc_text[lo:hi], (lo, hi)
        return fallback, (left_char, right_char)

    def char_after(self, token_end: int) -> int:
        """First original character after the span ending at ``token_end``,
        extending over words preprocessing removed up to the next surviving
        token."""
        toks = self.sentence.tokens
        if token_end < len(toks):
            return toks[token_end].origin[0]
        hi = max(t.origin[1] for t in toks)
        sent_end = hi
        return sent_end


def _left_suffix(ctx: _SentenceContext, cats: tuple[str, ...], hit_start: int):
    """Longest phrase of an allowed category ending right before the hit."""
    toks = ctx.sentence.tokens
    target = hit_start
    while target > 0 and toks[target - 1].is_punct:
        target -= 1
    if target == 0:
        return None
    for start in range(0, target):
        if toks[start].is_punct:
            continue
        for cat in cats:
            if target in ctx.matcher.rule_ends(cat, start):
                return (cat, start, target)
    return None


def _right_anchor(ctx: _SentenceContext, cats: tuple[str, ...], pos: int):
    """Longest phrase of an allowed category starting at ``pos``."""
    toks = ctx.sentence.tokens
    while pos < len(toks) and toks[pos].is_punct:
        pos += 1
    if pos >= len(toks):
        return None
    best = None
    for cat in cats:
        ends = [e for e in ctx.matcher.rule_ends(cat, pos) if e > pos]
        if ends:
            e = max(ends)
            if best is None or e > best[2]:
                best = (cat, pos, e)
    return best


def _build_medial(ctx, row: ManifestRow, hit: IdentifierHit):
    left = _left_suffix(ctx, row.left_cats, hit.start)
    if left is None:
        return None
    right = _right_anchor(ctx, row.right_cats, hit.end)
    if right is None:
        return None
    toks = ctx.sentence.tokens
    lcat, lstart, lend = left
    rcat, rstart, rend = right
    left_chars = _origin_span(toks, lstart, lend)
    right_chars = _origin_span(toks, rstart, rend)
    hit_chars = _origin_span(toks, hit.start, hit.end)
    hit_text = " ".join(
        t.surface for t in toks[hit.start : hit.end] if not t.is_punct
    )
    # cut points: removed words between the left phrase and the identifier
    # belong to the identifier text; removed words after it open the right role
    id_text, id_span = ctx.char_range(left_chars[1], hit_chars[1], hit_text)
    right_hi = max(right_chars[1], ctx.char_after(rend)) if not ctx.synthetic else right_chars[1]
    right_text, _ = ctx.char_range(hit_chars[1], right_hi, "")
    if not right_text:
        right_text = ctx.span_text(rstart, rend)
    roles = {
        row.left_role: RoleSpan(row.left_role, lcat, lstart, lend, ctx.span_text(lstart, lend)),
        row.right_role: RoleSpan(row.right_role, rcat, rstart, rend, right_text),
    }
    return roles, id_text, id_span


def _c2_opens_well(tok: Token) -> bool:
    from .core import WordClass

    return tok.pos in (
        WordClass.DETERMINER,
        WordClass.PRONOUN,
        WordClass.PERSONAL_PRONOUN,
        WordClass.SUBORDINATOR_RELATIVE,
    ) or tok.lemma in ("which", "that", "who", "whom", "whose")


def _build_initial(ctx, row: ManifestRow, hit: IdentifierHit):
    toks = ctx.sentence.tokens
    pos = hit.end
    while pos < len(toks) and toks[pos].is_punct:
        pos += 1
    if pos >= len(toks):
        return None
    # enumerate first-capture ends, then pick the split whose second capture
    # opens like an independent phrase (determiner/relative word), preferring
    # the longest first capture within that
    c1_options: list[tuple[str, int]] = []
    for cat in row.left_cats:
        for e in ctx.matcher.rule_ends(cat, pos):
            if e > pos:
                c1_options.append((cat, e))
    combos = []
    for c1_cat, c1_end in c1_options:
        p2 = c1_end
        while p2 < len(toks) and toks[p2].is_punct:
            p2 += 1
        second = _right_anchor(ctx, row.right_cats, p2)
        if second is None:
            continue
        opens_well = p2 < len(toks) and _c2_opens_well(toks[p2])
        combos.append((not opens_well, -c1_end, (c1_cat, c1_end), second))
    combos.sort(key=lambda c: (c[0], c[1]))
    for _, _, (c1_cat, c1_end), second in combos[:1]:
        c2_cat, c2_start, c2_end = second
        c1_chars = _origin_span(toks, pos, c1_end)
        hit_chars = _origin_span(toks, hit.start, hit.end)
        hit_text = " ".join(
            t.surface for t in toks[hit.start : hit.end] if not t.is_punct
        )
        id_text, id_span = ctx.char_range(hit_chars[0], hit_chars[1], hit_text)
        c1_text, _ = ctx.char_range(hit_chars[1], c1_chars[1], "")
        if not c1_text:
            c1_text = ctx.span_text(pos, c1_end)
        roles = {
            row.left_role: RoleSpan(row.left_role, c1_cat, pos, c1_end, c1_text),
            row.right_role: RoleSpan(
                row.right_role, c2_cat, c2_start, c2_end, ctx.span_text(c2_start, c2_end)
            ),
        }
        return roles, id_text, id_span
    return None


def _prune_across(hits_a: list[IdentifierHit], hits_b: list[IdentifierHit]):
    """Drop hits strictly contained in a hit of the other list."""

    def keep(h: IdentifierHit, others: list[IdentifierHit]) -> bool:
        return not any(
            o.start <= h.start and h.end <= o.end and (o.start, o.end) != (h.start, h.end)
            for o in others
        )

    return (
        [h for h in hits_a if keep(h, hits_b)],
        [h for h in hits_b if keep(h, hits_a)],
    )


def _extract_with(
    sentence: Sentence,
    library: PatternLibrary,
    libs: Libraries,
    kind_filter: set[IdentifierKind],
    kind_label: str,
    hits: list[IdentifierHit] | None = None,
    doc_text: str | None = None,
) -> list[Extraction]:
    ctx = _SentenceContext(sentence, library, libs, doc_text)
    if hits is None:
        hits = find_identifiers(sentence, library, libs, matcher=ctx.matcher)
    out: list[Extraction] = []
    seen: set[tuple] = set()
    for hit in hits:
        if hit.kind not in kind_filter:
            continue
        for rule in (hit.rule, *hit.alternates):
            built_any = False
            for row in library.rows_for(rule):
                if row.form == "initial" and hit.start != 0:
                    continue
                if row.form == "medial":
                    built = _build_medial(ctx, row, hit)
                else:
                    built = _build_initial(ctx, row, hit)
                if built is None:
                    continue
                roles, id_text, id_span = built
                key = (
                    kind_label,
                    tuple(sorted((r.role, r.start, r.end) for r in roles.values())),
                    (hit.start, hit.end),
                )
                if key in seen:
                    continue
                seen.add(key)
                out.append(
                    Extraction(
                        kind=kind_label,
                        rule=rule,
                        identifier_kind=row.kind,
                        identifier_text=id_text,
                        identifier_span=id_span,
                        hit=hit,
                        roles=roles,
                        doc_id=sentence.doc_id,
                        sentence_index=sentence.sentence_index,
                        sentence=sentence,
                    )
                )
                built_any = True
            if built_any:
                break
    return out


def sentence_hits(sentence: Sentence, libs: Libraries | None = None):
    """Definition and method identifier hits after cross-library pruning."""
    libs = libs or default_libraries()
    dh = find_identifiers(sentence, libs.definition, libs)
    mh = find_identifiers(sentence, libs.method, libs)
    return _prune_across(dh, mh)


def extract_definitions(
    sentence: Sentence, libs: Libraries | None = None, doc_text: str | None = None
) -> list[Extraction]:
    libs = libs or default_libraries()
    dh, _ = sentence_hits(sentence, libs)
    return _extract_with(
        sentence, libs.definition, libs, DEFINITION_KINDS, "definition", dh, doc_text
    )


def extract_methods(
    sentence: Sentence, libs: Libraries | None = None, doc_text: str | None = None
) -> list[Extraction]:
    libs = libs or default_libraries()
    _, mh = sentence_hits(sentence, libs)
    from .patterns import METHOD_KINDS

    return _extract_with(sentence, libs.method, libs, METHOD_KINDS, "method", mh, doc_text)


def extract_baseline(
    sentence: Sentence, libs: Libraries | None = None, doc_text: str | None = None
) -> list[Extraction]:
    """Definition extraction with the merged identifiers of earlier systems."""
    libs = libs or default_libraries()
    hits = find_identifiers(sentence, libs.baseline, libs)
    return _extract_with(
        sentence, libs.baseline, libs, DEFINITION_KINDS, "definition", hits, doc_text
    )


def classify_sentence(sentence: Sentence, libs: Libraries | None = None) -> Classification:
    libs = libs or default_libraries()
    return Classification(
        is_definition=bool(extract_definitions(sentence, libs)),
        is_method=bool(extract_methods(sentence, libs)),
    )


def extract_document(
    doc: Document, libs: Libraries | None = None, kinds: str = "both",
    baseline: bool = False,
) -> list[Extraction]:
    """Extractions over a preprocessed document, ordered by sentence then
    identifier position."""
    libs = libs or default_libraries()
    out: list[Extraction] = []
    for s in doc.sentences:
        if baseline:
            out.extend(extract_baseline(s, libs, doc.raw_text))
            continue
        if kinds in ("definition", "both"):
            out.extend(extract_definitions(s, libs, doc.raw_text))
        if kinds in ("method", "both"):
            out.extend(extract_methods(s, libs, doc.raw_text))
    out.sort(key=lambda e: (e.sentence_index, e.hit.start, e.kind))
    return out
