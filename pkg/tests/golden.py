"""Shared helpers for running the annotated example fixtures."""

from __future__ import annotations

import json
from pathlib import Path

from defmeth.core import ingest, words_of
from defmeth.extractor import extract_definitions, extract_methods
from defmeth.patterns import default_libraries
from defmeth.preprocess import Preprocessor

DATA = Path(__file__).parent / "data"


def load_golden() -> list[dict]:
    out = []
    for line in (DATA / "golden_examples.jsonl").read_text(encoding="utf-8").splitlines():
        if line.strip():
            out.append(json.loads(line))
    return out


_PREPROCESSOR = None


def preprocessor():
    global _PREPROCESSOR
    if _PREPROCESSOR is None:
        libs = default_libraries()
        _PREPROCESSOR = Preprocessor(
            grammar=libs.syntax, lexicon=libs.lexicon, synonyms=libs.synonyms
        )
    return _PREPROCESSOR


def pipeline(text: str, doc_id: str = "doc"):
    """ingest -> preprocess, returning the preprocessed document."""
    doc = ingest(text, doc_id)
    doc2, _ = preprocessor().preprocess_document(doc)
    return doc2


def run_example(example: dict):
    """Extract from one fixture; return (matched_extraction | None, all)."""
    libs = default_libraries()
    doc = pipeline(example["text"])
    extract = extract_definitions if example["kind"] == "definition" else extract_methods
    all_extractions = []
    for s in doc.sentences:
        all_extractions.extend(extract(s, libs, doc.raw_text))
    want_roles = {k: words_of(v) for k, v in example["roles"].items()}
    want_id = words_of(example["identifier"])
    for e in all_extractions:
        got_roles = {name: rs.words() for name, rs in e.roles.items()}
        if got_roles == want_roles and e.identifier_words() == want_id:
            return e, all_extractions
    return None, all_extractions
