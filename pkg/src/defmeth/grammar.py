"""Pattern grammars over tagged tokens.

``parse_pattern_source`` compiles a BNF-style pattern DSL into an AST; the
``Matcher`` runs rules against token sequences with backtracking.  Matching
policy is fixed so results are reproducible: alternatives are tried in source
order, repetition is greedy with backtracking, and ``match_all`` returns the
leftmost-longest cover of a sentence.

A literal matches a token when the lemmas are equal, or when both carry the
same synonym-set id.  Parenthetical wrapper tokens (brackets, quotes) may be
stepped over when matching any atom; they never end a match.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .core import Token, WordClass

RESERVED_CLASSES = {
    "noun": WordClass.NOUN,
    "numerals": WordClass.NUMERAL,
    "symbol": WordClass.SYMBOL,
    "simple verb": WordClass.SIMPLE_VERB,
    "past participle": WordClass.PAST_PARTICIPLE,
    "present participle": WordClass.PRESENT_PARTICIPLE,
    "adjective": WordClass.ADJECTIVE,
    "non negative adverb": WordClass.NON_NEGATIVE_ADVERB,
}


class GrammarError(Exception):
    """Malformed pattern source, dangling reference or unsafe recursion."""


class MatchBudgetExceeded(Exception):
    """The matcher exceeded its node-visit budget on one sentence."""


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class Literal(Expr):
    word: str


@dataclass(frozen=True)
class ClassAtom(Expr):
    word_class: WordClass


@dataclass(frozen=True)
class NonTerminal(Expr):
    name: str


@dataclass(frozen=True)
class Seq(Expr):
    children: tuple[Expr, ...]


@dataclass(frozen=True)
class Alt(Expr):
    children: tuple[Expr, ...]


@dataclass(frozen=True)
class Opt(Expr):
    child: Expr


@dataclass(frozen=True)
class Star(Expr):
    child: Expr


@dataclass(frozen=True)
class Capture(Expr):
    role: str
    child: Expr


@dataclass
class Grammar:
    rules: dict[str, Expr] = field(default_factory=dict)
    rule_order: list[str] = field(default_factory=list)
    capture_roles: dict[str, list[str]] = field(default_factory=dict)

    def merged_with(self, other: "Grammar") -> "Grammar":
        g = Grammar(dict(self.rules), list(self.rule_order), dict(self.capture_roles))
        for name in other.rule_order:
            if name in g.rules:
                raise GrammarError(f"duplicate rule <{name}> when merging grammars")
            g.rules[name] = other.rules[name]
            g.rule_order.append(name)
        g.capture_roles.update(other.capture_roles)
        return g


# ---------------------------------------------------------------------------
# DSL parsing

_DSL_TOKEN = re.compile(
    r"""
    (?P<nt><[^>\n]+>)
  | (?P<lit>"[^"\n]*"|“[^”\n]*”)
  | (?P<def>::=)
  | (?P<at>@[A-Za-z_][A-Za-z0-9_-]*\()
  | (?P<op>[|\[\]{}()])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int


def _lex_dsl(text: str, filename: str) -> list[_Tok]:
    toks = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0]
        pos = 0
        for m in _DSL_TOKEN.finditer(body):
            between = body[pos : m.start()].strip()
            if between:
                raise GrammarError(f"{filename}:{lineno}: unexpected text {between!r}")
            pos = m.end()
            toks.append(_Tok(m.lastgroup, m.group(), lineno))
        if body[pos:].strip():
            raise GrammarError(f"{filename}:{lineno}: unexpected text {body[pos:].strip()!r}")
    return toks


def _strip_quotes(s: str) -> str:
    return s[1:-1]


class _Parser:
    def __init__(self, toks: list[_Tok], filename: str):
        self.toks = toks
        self.i = 0
        self.filename = filename

    def error(self, msg: str) -> GrammarError:
        line = self.toks[self.i].line if self.i < len(self.toks) else "eof"
        return GrammarError(f"{self.filename}:{line}: {msg}")

    def peek(self) -> _Tok | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self) -> _Tok:
        t = self.peek()
        if t is None:
            raise self.error("unexpected end of input")
        self.i += 1
        return t

    def parse_grammar(self) -> Grammar:
        g = Grammar()
        while self.peek() is not None:
            head = self.next()
            if head.kind != "nt":
                raise self.error(f"expected rule head, got {head.text!r}")
            name = head.text[1:-1].strip()
            eq = self.next()
            if eq.kind != "def":
                raise self.error(f"expected '::=' after <{name}>")
            body = self.parse_alt(stop_at_rule_head=True)
            if name in g.rules:
                raise GrammarError(f"{self.filename}: duplicate rule <{name}>")
            g.rules[name] = body
            g.rule_order.append(name)
            g.capture_roles[name] = sorted(_collect_roles(body))
        return g

    def _at_rule_head(self) -> bool:
        t = self.peek()
        if t is None or t.kind != "nt":
            return False
        nxt = self.toks[self.i + 1] if self.i + 1 < len(self.toks) else None
        return nxt is not None and nxt.kind == "def"

    def parse_alt(self, stop_at_rule_head: bool = False) -> Expr:
        branches = [self.parse_seq(stop_at_rule_head)]
        while self.peek() is not None and self.peek().kind == "op" and self.peek().text == "|":
            self.next()
            branches.append(self.parse_seq(stop_at_rule_head))
        return branches[0] if len(branches) == 1 else Alt(tuple(branches))

    def parse_seq(self, stop_at_rule_head: bool = False) -> Expr:
        items: list[Expr] = []
        while True:
            t = self.peek()
            if t is None:
                break
            if stop_at_rule_head and self._at_rule_head():
                break
            if t.kind == "op" and t.text in ")]}|":
                break
            items.append(self.parse_item(stop_at_rule_head))
        if not items:
            raise self.error("empty sequence")
        return items[0] if len(items) == 1 else Seq(tuple(items))

    def parse_item(self, stop_at_rule_head: bool) -> Expr:
        t = self.next()
        if t.kind == "lit":
            words = _strip_quotes(t.text).split()
            if not words:
                raise self.error("empty literal")
            lits = [Literal(w.lower()) for w in words]
            return lits[0] if len(lits) == 1 else Seq(tuple(lits))
        if t.kind == "nt":
            name = t.text[1:-1].strip()
            if name in RESERVED_CLASSES:
                return ClassAtom(RESERVED_CLASSES[name])
            return NonTerminal(name)
        if t.kind == "at":
            role = t.text[1:-1]
            inner = self.parse_alt()
            close = self.next()
            if not (close.kind == "op" and close.text == ")"):
                raise self.error(f"expected ')' to close @{role}(...)")
            return Capture(role, inner)
        if t.kind == "op" and t.text == "(":
            inner = self.parse_alt()
            close = self.next()
            if not (close.kind == "op" and close.text == ")"):
                raise self.error("expected ')'")
            return inner
        if t.kind == "op" and t.text == "[":
            inner = self.parse_alt()
            close = self.next()
            if not (close.kind == "op" and close.text == "]"):
                raise self.error("expected ']'")
            return Opt(inner)
        if t.kind == "op" and t.text == "{":
            inner = self.parse_alt()
            close = self.next()
            if not (close.kind == "op" and close.text == "}"):
                raise self.error("expected '}'")
            return Star(inner)
        raise self.error(f"unexpected {t.text!r}")


def _collect_roles(expr: Expr) -> set[str]:
    if isinstance(expr, Capture):
        return {expr.role} | _collect_roles(expr.child)
    if isinstance(expr, (Seq, Alt)):
        out: set[str] = set()
        for c in expr.children:
            out |= _collect_roles(c)
        return out
    if isinstance(expr, (Opt, Star)):
        return _collect_roles(expr.child)
    return set()


def _referenced(expr: Expr) -> set[str]:
    if isinstance(expr, NonTerminal):
        return {expr.name}
    if isinstance(expr, (Seq, Alt)):
        out: set[str] = set()
        for c in expr.children:
            out |= _referenced(c)
        return out
    if isinstance(expr, (Opt, Star, Capture)):
        child = expr.child
        return _referenced(child)
    return set()


def _nullable_map(g: Grammar) -> dict[str, bool]:
    nullable = {name: False for name in g.rules}

    def expr_nullable(e: Expr) -> bool:
        if isinstance(e, (Literal, ClassAtom)):
            return False
        if isinstance(e, (Opt, Star)):
            return True
        if isinstance(e, Capture):
            return expr_nullable(e.child)
        if isinstance(e, Seq):
            return all(expr_nullable(c) for c in e.children)
        if isinstance(e, Alt):
            return any(expr_nullable(c) for c in e.children)
        if isinstance(e, NonTerminal):
            return nullable.get(e.name, False)
        raise TypeError(e)

    changed = True
    while changed:
        changed = False
        for name, body in g.rules.items():
            v = expr_nullable(body)
            if v and not nullable[name]:
                nullable[name] = True
                changed = True
    return nullable


def _first_nonterminals(e: Expr, nullable: dict[str, bool]) -> set[str]:
    """Rules reachable from ``e`` before any token is consumed."""
    if isinstance(e, (Literal, ClassAtom)):
        return set()
    if isinstance(e, NonTerminal):
        return {e.name}
    if isinstance(e, (Opt, Star, Capture)):
        return _first_nonterminals(e.child, nullable)
    if isinstance(e, Alt):
        out: set[str] = set()
        for c in e.children:
            out |= _first_nonterminals(c, nullable)
        return out
    if isinstance(e, Seq):
        out = set()
        for c in e.children:
            out |= _first_nonterminals(c, nullable)
            if not _expr_nullable_static(c, nullable):
                break
        return out
    raise TypeError(e)


def _expr_nullable_static(e: Expr, nullable: dict[str, bool]) -> bool:
    if isinstance(e, (Literal, ClassAtom)):
        return False
    if isinstance(e, (Opt, Star)):
        return True
    if isinstance(e, Capture):
        return _expr_nullable_static(e.child, nullable)
    if isinstance(e, Seq):
        return all(_expr_nullable_static(c, nullable) for c in e.children)
    if isinstance(e, Alt):
        return any(_expr_nullable_static(c, nullable) for c in e.children)
    if isinstance(e, NonTerminal):
        return nullable.get(e.name, False)
    raise TypeError(e)


def validate_grammar(g: Grammar, filename: str = "<grammar>") -> None:
    """Check that references resolve and recursion always consumes tokens."""
    for name, body in g.rules.items():
        for ref in _referenced(body):
            if ref not in g.rules:
                raise GrammarError(f"{filename}: rule <{name}> references undefined <{ref}>")
    nullable = _nullable_map(g)
    graph = {name: _first_nonterminals(body, nullable) for name, body in g.rules.items()}
    state: dict[str, int] = {}

    def visit(node: str, stack: list[str]) -> None:
        state[node] = 1
        for nxt in sorted(graph[node]):
            if state.get(nxt) == 1:
                cycle = " -> ".join(stack + [node, nxt])
                raise GrammarError(
                    f"{filename}: token-free recursion cycle: {cycle}"
                )
            if state.get(nxt, 0) == 0:
                visit(nxt, stack + [node])
        state[node] = 2

    for name in g.rules:
        if state.get(name, 0) == 0:
            visit(name, [])


def parse_pattern_source(text: str, filename: str = "<string>", validate: bool = True) -> Grammar:
    """Compile DSL source into a Grammar; errors carry file and line."""
    g = _Parser(_lex_dsl(text, filename), filename).parse_grammar()
    if validate:
        validate_grammar(g, filename)
    return g


def load_grammar(*paths: Path) -> Grammar:
    """Parse and merge one or more pattern files, then validate the result."""
    g = Grammar()
    for p in paths:
        g = g.merged_with(parse_pattern_source(p.read_text(encoding="utf-8"), str(p), validate=False))
    validate_grammar(g, ", ".join(str(p) for p in paths))
    return g


# ---------------------------------------------------------------------------
# matching


@dataclass(frozen=True)
class Match:
    rule: str
    start: int
    end: int
    captures: dict[str, tuple[int, int]]
    tree: tuple | None = None


class Matcher:
    """Matches grammar rules against one token sequence.

    End positions per (expression, position) are memoised, so repeated
    queries against the same sentence are cheap.  ``budget`` bounds the
    number of memo cells and backtracking steps per sentence.
    """

    def __init__(
        self,
        grammar: Grammar,
        tokens: tuple[Token, ...] | list[Token],
        literal_sets: dict[str, str] | None = None,
        budget: int = 1_000_000,
    ):
        self.grammar = grammar
        self.tokens = tuple(tokens)
        self.literal_sets = literal_sets or {}
        self.budget = budget
        self._visits = 0
        self._memo: dict[tuple[int, int], frozenset[int]] = {}
        self._exprs: dict[int, Expr] = {}

    # -- atoms

    def _skip(self, pos: int) -> int:
        toks = self.tokens
        while pos < len(toks) and toks[pos].is_skippable:
            pos += 1
        return pos

    def _match_literal(self, lit: Literal, pos: int) -> bool:
        tok = self.tokens[pos]
        if tok.lemma == lit.word:
            return True
        lit_set = self.literal_sets.get(lit.word)
        return lit_set is not None and tok.synset == lit_set

    def _match_class(self, atom: ClassAtom, pos: int) -> bool:
        return self.tokens[pos].pos is atom.word_class

    # -- end sets

    def _spend(self) -> None:
        self._visits += 1
        if self._visits > self.budget:
            raise MatchBudgetExceeded(
                f"match budget of {self.budget} node visits exceeded"
            )

    def ends(self, expr: Expr, pos: int) -> frozenset[int]:
        key = (id(expr), pos)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        self._spend()
        self._exprs[id(expr)] = expr
        # mark in-progress to fail safely on (validated-away) cycles
        self._memo[key] = frozenset()
        result = self._ends_uncached(expr, pos)
        self._memo[key] = result
        return result

    def _ends_uncached(self, expr: Expr, pos: int) -> frozenset[int]:
        toks = self.tokens
        if isinstance(expr, Literal):
            p = self._skip(pos)
            if p < len(toks) and self._match_literal(expr, p):
                return frozenset((p + 1,))
            return frozenset()
        if isinstance(expr, ClassAtom):
            p = self._skip(pos)
            if p < len(toks) and self._match_class(expr, p):
                return frozenset((p + 1,))
            return frozenset()
        if isinstance(expr, NonTerminal):
            return self.ends(self.grammar.rules[expr.name], pos)
        if isinstance(expr, Capture):
            return self.ends(expr.child, pos)
        if isinstance(expr, Opt):
            return self.ends(expr.child, pos) | {pos}
        if isinstance(expr, Alt):
            out: set[int] = set()
            for c in expr.children:
                out |= self.ends(c, pos)
            return frozenset(out)
        if isinstance(expr, Seq):
            fronts = {pos}
            for c in expr.children:
                nxt: set[int] = set()
                for p in fronts:
                    nxt |= self.ends(c, p)
                if not nxt:
                    return frozenset()
                fronts = nxt
            return frozenset(fronts)
        if isinstance(expr, Star):
            seen: set[int] = set()
            frontier = {pos}
            while frontier:
                self._spend()
                seen |= frontier
                nxt: set[int] = set()
                for p in frontier:
                    for q in self.ends(expr.child, p):
                        if q > p and q not in seen:
                            nxt.add(q)
                frontier = nxt
            return frozenset(seen)
        raise TypeError(expr)

    # -- public queries

    def rule_ends(self, rule: str, pos: int) -> frozenset[int]:
        if rule not in self.grammar.rules:
            raise GrammarError(f"unknown rule <{rule}>")
        return self.ends(self.grammar.rules[rule], pos)

    def longest_at(self, rule: str, pos: int) -> int | None:
        es = [e for e in self.rule_ends(rule, pos) if e > pos]
        return max(es) if es else None

    def match_all(self, rule: str) -> list[Match]:
        """Leftmost-longest cover: scan left to right, emit the longest match
        at each position not already inside an emitted match."""
        out = []
        pos = 0
        n = len(self.tokens)
        while pos < n:
            end = self.longest_at(rule, pos)
            if end is None:
                pos += 1
                continue
            out.append(self.derive(rule, pos, end))
            pos = end
        return out

    # -- derivation with fixed policy (captures + debug tree)

    def derive(self, rule: str, pos: int, end: int) -> Match:
        captures: dict[str, tuple[int, int]] = {}
        tree = self._derive_expr(NonTerminal(rule), pos, end, captures)
        if tree is None:
            raise GrammarError(f"internal: no derivation for <{rule}> at {pos}..{end}")
        return Match(rule=rule, start=pos, end=end, captures=captures, tree=tree)

    def _derive_expr(self, expr, pos, end, captures):
        self._spend()
        if isinstance(expr, Literal):
            p = self._skip(pos)
            if p < len(self.tokens) and p + 1 == end and self._match_literal(expr, p):
                return (f'"{expr.word}"', pos, end, ())
            return None
        if isinstance(expr, ClassAtom):
            p = self._skip(pos)
            if p < len(self.tokens) and p + 1 == end and self._match_class(expr, p):
                return (f"<{expr.word_class.value}>", pos, end, ())
            return None
        if isinstance(expr, NonTerminal):
            if end not in self.ends(expr, pos):
                return None
            sub = self._derive_expr(self.grammar.rules[expr.name], pos, end, captures)
            if sub is None:
                return None
            return (f"<{expr.name}>", pos, end, (sub,))
        if isinstance(expr, Capture):
            sub = self._derive_expr(expr.child, pos, end, captures)
            if sub is None:
                return None
            if expr.role not in captures:
                captures[expr.role] = (pos, end)
            return (f"@{expr.role}", pos, end, (sub,))
        if isinstance(expr, Opt):
            if end == pos:
                # prefer consuming; but an Opt reaching its own start means empty
                sub = self._derive_expr(expr.child, pos, end, captures)
                if sub is not None:
                    return ("[..]", pos, end, (sub,))
                return ("[..]", pos, end, ())
            sub = self._derive_expr(expr.child, pos, end, captures)
            if sub is None:
                return None
            return ("[..]", pos, end, (sub,))
        if isinstance(expr, Alt):
            for c in expr.children:
                if end in self.ends(c, pos):
                    sub = self._derive_expr(c, pos, end, captures)
                    if sub is not None:
                        return ("(|)", pos, end, (sub,))
            return None
        if isinstance(expr, Seq):
            children = expr.children
            assign = self._derive_seq(children, pos, end, captures)
            if assign is None:
                return None
            return ("(...)", pos, end, tuple(assign))
        if isinstance(expr, Star):
            parts = self._derive_star(expr, pos, end, captures)
            if parts is None:
                return None
            return ("{..}", pos, end, tuple(parts))
        raise TypeError(expr)

    def _derive_seq(self, children, pos, end, captures):
        if not children:
            return [] if pos == end else None
        head, rest = children[0], children[1:]
        # greedy: try longer head matches first
        head_ends = sorted((e for e in self.ends(head, pos) if e <= end), reverse=True)
        for he in head_ends:
            saved = dict(captures)
            sub = self._derive_expr(head, pos, he, captures)
            if sub is None:
                captures.clear()
                captures.update(saved)
                continue
            tail = self._derive_seq(rest, he, end, captures)
            if tail is not None:
                return [sub] + tail
            captures.clear()
            captures.update(saved)
        return None

    def _derive_star(self, star, pos, end, captures):
        if pos == end:
            return []
        child_ends = sorted(
            (e for e in self.ends(star.child, pos) if pos < e <= end), reverse=True
        )
        for ce in child_ends:
            saved = dict(captures)
            sub = self._derive_expr(star.child, pos, ce, captures)
            if sub is None:
                captures.clear()
                captures.update(saved)
                continue
            rest = self._derive_star(star, ce, end, captures)
            if rest is not None:
                return [sub] + rest
            captures.clear()
            captures.update(saved)
        return None


def format_tree(tree: tuple, tokens: tuple[Token, ...], indent: int = 0) -> str:
    """Readable derivation tree for the debug-match command."""
    label, start, end, children = tree
    text = " ".join(t.surface for t in tokens[start:end])
    lines = [f"{'  ' * indent}{label} [{start}:{end}] {text!r}"]
    for c in children:
        lines.append(format_tree(c, tokens, indent + 1))
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# chunking


@dataclass(frozen=True)
class Chunk:
    category: str  # rule name, or "free"
    start: int
    end: int


CHUNK_CATEGORIES = (
    "noun phrase",
    "participle phrase",
    "prepositional phrase",
    "verb phrase",
)


def chunk(
    matcher: Matcher,
    categories: tuple[str, ...] = CHUNK_CATEGORIES,
    masked_spans: tuple[tuple[int, int], ...] = (),
    start: int = 0,
    end: int | None = None,
) -> list[Chunk]:
    """Greedy left-to-right cover by maximal phrase matches.

    Tokens inside ``masked_spans`` (e.g. identifier words) and tokens no rule
    covers come back as ``free`` chunks, so the result partitions the range.
    """
    n = len(matcher.tokens) if end is None else end
    masked = set()
    for s, e in masked_spans:
        masked.update(range(s, e))
    out: list[Chunk] = []
    pos = start
    while pos < n:
        if pos in masked or matcher.tokens[pos].is_punct:
            out.append(Chunk("free", pos, pos + 1))
            pos += 1
            continue
        best_end, best_cat = None, None
        for cat in categories:
            es = [
                e
                for e in matcher.rule_ends(cat, pos)
                if e > pos and e <= n and not masked.intersection(range(pos, e))
            ]
            if es:
                e = max(es)
                if best_end is None or e > best_end:
                    best_end, best_cat = e, cat
        if best_end is None:
            out.append(Chunk("free", pos, pos + 1))
            pos += 1
        else:
            out.append(Chunk(best_cat, pos, best_end))
            pos = best_end
    return out
