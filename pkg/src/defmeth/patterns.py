"""Pattern libraries and identifier detection.

Loads the bundled definition/method/baseline grammars together with the
manifest that tells the extractor, per identifier rule, which roles sit on
which side and which phrase categories are acceptable there.

``find_identifiers`` returns every maximal identifier match; overlapping hits
are pruned so only the longest survives, with ties between kinds broken by a
fixed priority that favours the more specific relation.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .core import Lexicon, Sentence, data_path, default_lexicon
from .grammar import Grammar, Matcher, load_grammar
from .preprocess import SynonymTable


class IdentifierKind(Enum):
    BE = "be"
    HAVE = "have"
    SUBCLASS = "subclass"
    PART_WHOLE = "part-whole"
    SYNONYMY = "synonymy"
    PURPOSE_SUBORDINATOR = "purpose-subordinator"
    PURPOSE_OTHER = "purpose-other"
    MEASURE_SUBORDINATOR = "measure-subordinator"
    MEASURE_OTHER = "measure-other"


DEFINITION_KINDS = {
    IdentifierKind.BE,
    IdentifierKind.HAVE,
    IdentifierKind.SUBCLASS,
    IdentifierKind.PART_WHOLE,
    IdentifierKind.SYNONYMY,
}

METHOD_KINDS = {
    IdentifierKind.PURPOSE_SUBORDINATOR,
    IdentifierKind.PURPOSE_OTHER,
    IdentifierKind.MEASURE_SUBORDINATOR,
    IdentifierKind.MEASURE_OTHER,
}

# more specific relations win length ties
KIND_PRIORITY = [
    IdentifierKind.SUBCLASS,
    IdentifierKind.PART_WHOLE,
    IdentifierKind.SYNONYMY,
    IdentifierKind.HAVE,
    IdentifierKind.BE,
    IdentifierKind.PURPOSE_SUBORDINATOR,
    IdentifierKind.MEASURE_SUBORDINATOR,
    IdentifierKind.PURPOSE_OTHER,
    IdentifierKind.MEASURE_OTHER,
]

_PRIORITY_INDEX = {k: i for i, k in enumerate(KIND_PRIORITY)}


@dataclass(frozen=True)
class ManifestRow:
    rule: str
    kind: IdentifierKind
    form: str  # medial | initial | initial-anywhere
    left_role: str
    right_role: str
    left_cats: tuple[str, ...]
    right_cats: tuple[str, ...]


@dataclass(frozen=True)
class IdentifierHit:
    start: int
    end: int
    kind: IdentifierKind
    rule: str
    alternates: tuple[str, ...] = ()  # other rules matching the same span


def load_manifest(path: Path) -> list[ManifestRow]:
    rows = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 7:
            raise ValueError(f"{path}:{lineno}: expected 7 tab-separated fields")
        rule, kind, form, lrole, rrole, lcats, rcats = parts
        rows.append(
            ManifestRow(
                rule=rule,
                kind=IdentifierKind(kind),
                form=form,
                left_role=lrole,
                right_role=rrole,
                left_cats=tuple(lcats.split("|")),
                right_cats=tuple(rcats.split("|")),
            )
        )
    return rows


@dataclass
class PatternLibrary:
    """One grammar (syntax rules merged in) plus its manifest."""

    grammar: Grammar
    manifest: list[ManifestRow]
    use_synonyms: bool = True

    def rows_for(self, rule: str) -> list[ManifestRow]:
        return [r for r in self.manifest if r.rule == rule]

    @property
    def identifier_rules(self) -> list[str]:
        seen: list[str] = []
        for r in self.manifest:
            if r.rule not in seen:
                seen.append(r.rule)
        return seen


@dataclass
class Libraries:
    """Everything the pipeline needs, loaded once and shared read-only."""

    syntax: Grammar
    definition: PatternLibrary
    method: PatternLibrary
    baseline: PatternLibrary
    lexicon: Lexicon
    synonyms: SynonymTable
    budget: int = 1_000_000

    def matcher(self, library: PatternLibrary, sentence: Sentence) -> Matcher:
        sets = self.synonyms.entries if library.use_synonyms else {}
        return Matcher(library.grammar, sentence.tokens, sets, self.budget)


def pattern_dir() -> Path:
    override = os.environ.get("DEFMETH_PATTERN_DIR")
    return Path(override) if override else data_path() / "patterns"


def load_libraries(
    directory: Path | None = None,
    lexicon: Lexicon | None = None,
    budget: int = 1_000_000,
) -> Libraries:
    """Load and validate the bundled grammars; any error aborts with file+line."""
    pdir = directory or pattern_dir()
    syntax = load_grammar(pdir / "syntax.bnf")
    definition = load_grammar(pdir / "syntax.bnf", pdir / "definition.bnf")
    method = load_grammar(pdir / "syntax.bnf", pdir / "method.bnf")
    baseline = load_grammar(pdir / "syntax.bnf", pdir / "baseline.bnf")
    manifest = load_manifest(pdir / "manifest.tsv")
    base_manifest = load_manifest(pdir / "baseline_manifest.tsv")
    def_rules = set(definition.rules)
    meth_rules = set(method.rules)
    def_manifest = [r for r in manifest if r.rule in def_rules and r.kind in DEFINITION_KINDS]
    meth_manifest = [r for r in manifest if r.rule in meth_rules and r.kind in METHOD_KINDS]
    covered = {r.rule for r in def_manifest} | {r.rule for r in meth_manifest}
    for row in manifest:
        if row.rule not in covered:
            raise ValueError(f"manifest rule <{row.rule}> not defined in any grammar")
    return Libraries(
        syntax=syntax,
        definition=PatternLibrary(definition, def_manifest),
        method=PatternLibrary(method, meth_manifest),
        baseline=PatternLibrary(baseline, base_manifest, use_synonyms=False),
        lexicon=lexicon or default_lexicon(),
        synonyms=SynonymTable.load(),
        budget=budget,
    )


_DEFAULT_LIBRARIES: Libraries | None = None


def default_libraries() -> Libraries:
    global _DEFAULT_LIBRARIES
    if _DEFAULT_LIBRARIES is None:
        _DEFAULT_LIBRARIES = load_libraries()
    return _DEFAULT_LIBRARIES


def find_identifiers(
    sentence: Sentence,
    library: PatternLibrary,
    libs: Libraries,
    matcher: Matcher | None = None,
) -> list[IdentifierHit]:
    """All maximal identifier matches, pruned to the longest at overlap.

    A hit strictly contained in another is dropped; equal spans of different
    kinds keep the higher-priority kind and remember the other rules as
    alternates so the extractor can still try their patterns.
    """
    m = matcher or libs.matcher(library, sentence)
    toks = sentence.tokens
    candidates: dict[tuple[int, int], list[tuple[int, int, str, IdentifierKind]]] = {}
    for order, rule in enumerate(library.identifier_rules):
        kind = library.rows_for(rule)[0].kind
        for pos in range(len(toks)):
            end = m.longest_at(rule, pos)
            if end is None:
                continue
            start = pos
            while start < end and toks[start].is_skippable:
                start += 1
            key = (start, end)
            candidates.setdefault(key, []).append(
                (_PRIORITY_INDEX[kind], order, rule, kind)
            )
    spans = sorted(candidates, key=lambda se: (se[0], -(se[1] - se[0])))
    survivors: list[tuple[int, int]] = []
    for s, e in spans:
        if any(bs <= s and e <= be and (bs, be) != (s, e) for bs, be in survivors):
            continue
        survivors.append((s, e))
    hits = []
    for s, e in survivors:
        ranked = sorted(candidates[(s, e)])
        _, _, rule, kind = ranked[0]
        hits.append(
            IdentifierHit(
                start=s,
                end=e,
                kind=kind,
                rule=rule,
                alternates=tuple(r for _, _, r, _ in ranked[1:]),
            )
        )
    hits.sort(key=lambda h: (h.start, h.end))
    return hits
