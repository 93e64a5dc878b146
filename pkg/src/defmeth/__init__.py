"""defmeth: rule-based extraction and integration of definitions and methods
from scientific text."""

from .core import (
    Document,
    Lexicon,
    Sentence,
    Token,
    WordClass,
    ingest,
    ingest_sentence,
    segment_sentences,
    tag_and_lemmatize,
    tokenize,
)
from .grammar import Grammar, GrammarError, Match, MatchBudgetExceeded, Matcher, chunk, parse_pattern_source

__all__ = [
    "Document",
    "Grammar",
    "GrammarError",
    "Lexicon",
    "Match",
    "MatchBudgetExceeded",
    "Matcher",
    "Sentence",
    "Token",
    "WordClass",
    "chunk",
    "ingest",
    "ingest_sentence",
    "parse_pattern_source",
    "segment_sentences",
    "tag_and_lemmatize",
    "tokenize",
]

__version__ = "0.1.0"
