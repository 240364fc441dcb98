"""Three-tier rule table converting classified source lines to pseudocode.

Rules live in a plain-text table, one per line::

    TIER | pattern | template

Tiers escalate in pattern complexity: BASIC rules are token-level
rewrites, PREFIX rules key on the leading keyword of structural lines,
ADVANCED rules capture multi-token idioms. Matching priority is
ADVANCED, then PREFIX, then BASIC; within a tier, table order decides.
A line no rule matches falls back to ``EXECUTE: <raw>`` so conversion
is total; fallback use is counted, not hidden.

The pattern mini-language is documented in docs/rule-format.md. In
short: a pattern names a line kind (or ``expr`` for sub-expression
rewrites) followed by ``::`` and space-separated elements — literal
token texts and ``{name}`` captures. ``{name!tok}`` forbids ``tok``
from appearing at top bracket level inside the capture. Literal
elements match only at top bracket level. The only template filter is
``{name|minus1}``: subtract one from an integer literal, otherwise
append ``-1`` symbolically.

Block structure: a converted line ending in ``:`` opens a block; the
dedent that closes it emits ``END FUNCTION`` / ``END IF`` / ``END FOR``
/ ``END WHILE`` / ``END BLOCK`` according to the opener. ``elif`` and
``else`` continue the block opened by their ``if``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence

from .lexer import LineKind, LineNode, Token, TokenKind, parse_program


class RuleError(ValueError):
    """Bad rule table: unknown tier, unbound placeholder, duplicates."""


class Tier(Enum):
    BASIC = 0
    PREFIX = 1
    ADVANCED = 2


# Matching priority, highest first.
TIER_ORDER = (Tier.ADVANCED, Tier.PREFIX, Tier.BASIC)

EXPR_KIND = "expr"

END_KEYWORDS = {
    LineKind.FUNC_DEF: "FUNCTION",
    LineKind.IF: "IF",
    LineKind.ELIF: "IF",
    LineKind.ELSE: "IF",
    LineKind.FOR: "FOR",
    LineKind.WHILE: "WHILE",
}

FALLBACK_PREFIX = "EXECUTE: "

_LINE_KIND_NAMES = {k.name for k in LineKind}

_CAPTURE_RE = re.compile(r"^\{(\w+)(?:!(\S+))?\}$")
_SLOT_RE = re.compile(r"\{(\w+)(?:\|(\w+))?\}")

_TEMPLATE_FILTERS = ("minus1",)

_MAX_RENDER_DEPTH = 4


@dataclass(frozen=True)
class Capture:
    name: str
    forbid: str | None = None  # token text banned at top level inside the capture


@dataclass(frozen=True)
class Rule:
    tier: Tier
    kind: str  # LineKind name, or "expr" for sub-expression rewrites
    pattern: tuple  # literal strs and Capture elements
    template: str
    source: str  # original table line, for error messages

    def capture_names(self) -> set[str]:
        return {e.name for e in self.pattern if isinstance(e, Capture)}


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[Rule, ...]  # ordered ADVANCED, PREFIX, BASIC
    version: str

    @property
    def line_rules(self) -> tuple[Rule, ...]:
        return tuple(r for r in self.rules if r.kind != EXPR_KIND)

    @property
    def expr_rules(self) -> tuple[Rule, ...]:
        return tuple(r for r in self.rules if r.kind == EXPR_KIND)


@dataclass(frozen=True)
class PseudoDoc:
    """Converted document: (depth, text) lines plus conversion counters."""

    lines: tuple[tuple[int, str], ...]
    source_lines: int
    fallback_count: int = 0

    def to_text(self) -> str:
        return "".join(f"{' ' * (4 * d)}{t}\n" for d, t in self.lines)


# The built-in table. BASIC: token-level rewrites. PREFIX: structural
# rules on the leading keyword. ADVANCED: multi-token idioms, plus the
# expression-level rewrites applied inside captured slots.
DEFAULT_TABLE = """
ADVANCED | FOR :: for {var} in {iter!range} : | FOR EACH {var} IN {iter} DO
ADVANCED | expr :: len ( {x} ) | LENGTH OF {x}
PREFIX | FUNC_DEF :: def {name} ( ) : | FUNCTION {name}
PREFIX | FUNC_DEF :: def {name} ( {params} ) : | FUNCTION {name} WITH PARAMETERS {params}
PREFIX | IF :: if {cond} : | IF {cond} THEN
PREFIX | ELIF :: elif {cond} : | ELSE IF {cond} THEN
PREFIX | ELSE :: else : | ELSE
PREFIX | WHILE :: while {cond} : | WHILE {cond} DO
PREFIX | FOR :: for {var} in range ( {stop!,} ) : | FOR {var} FROM 0 TO {stop|minus1} DO
PREFIX | FOR :: for {var} in range ( {start!,} , {stop!,} ) : | FOR {var} FROM {start} TO {stop|minus1} DO
BASIC | ASSIGN :: {lhs} = {rhs} | SET {lhs} TO {rhs}
BASIC | AUG_ASSIGN :: {lhs} += {rhs} | INCREASE {lhs} BY {rhs}
BASIC | AUG_ASSIGN :: {lhs} -= {rhs} | DECREASE {lhs} BY {rhs}
BASIC | AUG_ASSIGN :: {lhs} *= {rhs} | MULTIPLY {lhs} BY {rhs}
BASIC | AUG_ASSIGN :: {lhs} /= {rhs} | DIVIDE {lhs} BY {rhs}
BASIC | RETURN :: return | RETURN
BASIC | RETURN :: return {expr} | RETURN {expr}
BASIC | PRINT :: print ( ) | DISPLAY
BASIC | PRINT :: print ( {args} ) | DISPLAY {args}
BASIC | CALL :: {callee} ( ) | CALL {callee}
BASIC | CALL :: {callee} ( {args} ) | CALL {callee} WITH {args}
BASIC | IMPORT :: import {mods} | IMPORT {mods}
BASIC | IMPORT :: from {mod} import {names} | FROM {mod} IMPORT {names}
BASIC | expr :: == | IS EQUAL TO
BASIC | expr :: != | IS NOT EQUAL TO
BASIC | expr :: <= | IS LESS THAN OR EQUAL TO
BASIC | expr :: >= | IS GREATER THAN OR EQUAL TO
BASIC | expr :: < | IS LESS THAN
BASIC | expr :: > | IS GREATER THAN
"""

MANDATORY_KINDS = frozenset(
    {"FUNC_DEF", "IF", "FOR", "WHILE", "RETURN", "ASSIGN", "PRINT"}
)


def _parse_pattern(text: str, source: str) -> tuple[str, tuple]:
    if "::" in text:
        kind_part, _, elems_part = text.partition("::")
    else:
        kind_part, elems_part = text, ""
    kind = kind_part.strip()
    if kind != EXPR_KIND and kind not in _LINE_KIND_NAMES:
        raise RuleError(f"unknown line kind '{kind}' in rule: {source}")
    elements: list = []
    for elem in elems_part.split():
        m = _CAPTURE_RE.match(elem)
        if m:
            elements.append(Capture(name=m.group(1), forbid=m.group(2)))
        elif elem.startswith("{") or elem.endswith("}"):
            raise RuleError(f"malformed capture '{elem}' in rule: {source}")
        else:
            elements.append(elem)
    if kind == EXPR_KIND and not elements:
        raise RuleError(f"expression rule needs a pattern: {source}")
    if kind == EXPR_KIND and isinstance(elements[0], Capture):
        raise RuleError(f"expression rule must start with a literal: {source}")
    return kind, tuple(elements)


def _validate_template(rule: Rule) -> None:
    captured = rule.capture_names()
    for m in _SLOT_RE.finditer(rule.template):
        name, filt = m.group(1), m.group(2)
        if name not in captured:
            raise RuleError(
                f"template placeholder '{{{name}}}' is not captured by the "
                f"pattern in rule: {rule.source}"
            )
        if filt is not None and filt not in _TEMPLATE_FILTERS:
            raise RuleError(f"unknown template filter '{filt}' in rule: {rule.source}")


def parse_rule_table(text: str, version: str) -> RuleSet:
    """Parse and validate a rule table from its text form."""
    rules: list[Rule] = []
    seen: set[tuple] = set()
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split("|", 2)]
        if len(parts) != 3:
            raise RuleError(f"expected 'TIER | pattern | template': {line}")
        tier_tag, pattern_text, template = parts
        try:
            tier = Tier[tier_tag.upper()]
        except KeyError:
            raise RuleError(f"unknown tier tag '{tier_tag}' in rule: {line}") from None
        kind, pattern = _parse_pattern(pattern_text, line)
        key = (tier, kind, pattern)
        if key in seen:
            raise RuleError(f"ambiguous rule: duplicate pattern in tier {tier.name}: {line}")
        seen.add(key)
        rule = Rule(tier=tier, kind=kind, pattern=pattern, template=template, source=line)
        _validate_template(rule)
        rules.append(rule)
    if not rules:
        raise RuleError("empty rule table")
    covered = {r.kind for r in rules if r.kind != EXPR_KIND}
    missing = MANDATORY_KINDS - covered
    if missing:
        raise RuleError(f"rule table lacks rules for: {', '.join(sorted(missing))}")
    ordered = [r for tier in TIER_ORDER for r in rules if r.tier is tier]
    return RuleSet(rules=tuple(ordered), version=version)


def load_ruleset(path: str | Path | None = None) -> RuleSet:
    """Load a rule table file, or the built-in table when path is None."""
    if path is None:
        return parse_rule_table(DEFAULT_TABLE, version="builtin-1")
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"ruleset not found: {path}")
    return parse_rule_table(path.read_text(encoding="utf-8"), version=path.name)


# --- pattern matching ------------------------------------------------------

_OPEN = {"(", "[", "{"}
_CLOSE = {")", "]", "}"}


def _bracket_depths(tokens: Sequence[Token]) -> list[int]:
    # Openers carry the depth before them, closers the depth after, so
    # the outermost pair of a balanced run sits at depth 0.
    depths = []
    d = 0
    for t in tokens:
        if t.kind is TokenKind.DELIMITER and t.text in _OPEN:
            depths.append(d)
            d += 1
        elif t.kind is TokenKind.DELIMITER and t.text in _CLOSE:
            d -= 1
            depths.append(d)
        else:
            depths.append(d)
    return depths


def _contains_at_top(tokens: Sequence[Token], text: str) -> bool:
    depths = _bracket_depths(tokens)
    return any(t.text == text and d <= 0 for t, d in zip(tokens, depths))


def _expected_depths(pattern: Sequence) -> list[int]:
    # Bracket depth each element is expected to match at, derived from
    # the pattern's own brackets: in `range ( {start} , {stop} )` the
    # comma sits at depth 1, the parens at depth 0.
    expected = []
    depth = 0
    for elem in pattern:
        if isinstance(elem, Capture):
            expected.append(depth)
        elif elem in _OPEN:
            expected.append(depth)
            depth += 1
        elif elem in _CLOSE:
            depth -= 1
            expected.append(depth)
        else:
            expected.append(depth)
    return expected


def _match_tokens(
    tokens: Sequence[Token],
    depths: Sequence[int],
    pattern: Sequence,
    anchored_end: bool,
) -> tuple[dict[str, tuple[Token, ...]], int] | None:
    """Match ``pattern`` at the start of ``tokens``.

    Every literal must match a token of equal text sitting at the
    bracket depth the pattern implies for it. Captures are lazy, at
    least one token wide, and may carry a forbidden top-level token.
    Returns (bindings, tokens consumed) or None.
    """
    expected = _expected_depths(pattern)

    def rec(ti: int, pi: int, binds: dict) -> tuple[dict, int] | None:
        if pi == len(pattern):
            if anchored_end and ti != len(tokens):
                return None
            return binds, ti
        elem = pattern[pi]
        if isinstance(elem, Capture):
            # every later element consumes at least one token
            max_take = len(tokens) - ti - (len(pattern) - pi - 1)
            for take in range(1, max_take + 1):
                chunk = tuple(tokens[ti : ti + take])
                if elem.forbid is not None and _contains_at_top(chunk, elem.forbid):
                    # Growing the capture can only add more top-level
                    # content, never remove the offending token.
                    return None
                res = rec(ti + take, pi + 1, {**binds, elem.name: chunk})
                if res is not None:
                    return res
            return None
        if ti >= len(tokens) or tokens[ti].text != elem:
            return None
        if depths[ti] != expected[pi]:
            return None
        return rec(ti + 1, pi + 1, binds)

    return rec(0, 0, {})


def _match_line_rule(rule: Rule, tokens: Sequence[Token]) -> dict | None:
    depths = _bracket_depths(tokens)
    res = _match_tokens(tokens, depths, rule.pattern, anchored_end=True)
    return res[0] if res else None


# --- expression rendering --------------------------------------------------


@dataclass
class _Piece:
    text: str
    column: int | None = None  # set only for untouched source tokens
    width: int = 0


def _join_pieces(pieces: Sequence[_Piece]) -> str:
    out: list[str] = []
    prev: _Piece | None = None
    for piece in pieces:
        if prev is not None:
            adjacent = (
                prev.column is not None
                and piece.column is not None
                and piece.column == prev.column + prev.width
            )
            out.append("" if adjacent else " ")
        out.append(piece.text)
        prev = piece
    return "".join(out)


def _matching_bracket(tokens: Sequence[Token], idx: int) -> int | None:
    # tokens[idx] is an opener; return index of its closer.
    depth = 0
    for j in range(idx, len(tokens)):
        t = tokens[j]
        if t.kind is TokenKind.DELIMITER and t.text in _OPEN:
            depth += 1
        elif t.kind is TokenKind.DELIMITER and t.text in _CLOSE:
            depth -= 1
            if depth == 0:
                return j
    return None


def _matching_open(tokens: Sequence[Token], idx: int) -> int | None:
    # tokens[idx] is a closer; return index of its opener.
    depth = 0
    for j in range(idx, -1, -1):
        t = tokens[j]
        if t.kind is TokenKind.DELIMITER and t.text in _CLOSE:
            depth += 1
        elif t.kind is TokenKind.DELIMITER and t.text in _OPEN:
            depth -= 1
            if depth == 0:
                return j
    return None


def _atom_start(tokens: Sequence[Token], open_idx: int) -> int | None:
    """Walk left from a subscript ``[`` to the start of its primary.

    Accepts dotted identifier chains, call or index results, and string
    literals (``a[0]``, ``obj.attr[i]``, ``f(x)[0]``, ``m[0][1]``).
    Returns None when the bracket starts an expression of its own (a
    list literal), which is not a subscript.
    """
    j = open_idx
    while j > 0:
        prev = tokens[j - 1]
        if prev.kind in (TokenKind.IDENT, TokenKind.STRING):
            j -= 1
        elif prev.kind is TokenKind.DELIMITER and prev.text in (")", "]"):
            opener = _matching_open(tokens, j - 1)
            if opener is None:
                return None
            j = opener
        elif (
            j < open_idx
            and prev.kind is TokenKind.DELIMITER
            and prev.text == "."
            and j >= 2
            and tokens[j - 2].kind is TokenKind.IDENT
        ):
            j -= 2
        else:
            break
    return j if j < open_idx else None


def _find_subscripts(tokens: Sequence[Token]) -> dict[int, tuple[int, int, int]]:
    """Map atom-start index -> (open_idx, close_idx) of the widest subscript."""
    found: dict[int, tuple[int, int, int]] = {}
    for i, t in enumerate(tokens):
        if t.kind is not TokenKind.DELIMITER or t.text != "[":
            continue
        start = _atom_start(tokens, i)
        if start is None:
            continue
        close = _matching_bracket(tokens, i)
        if close is None:
            continue
        prev = found.get(start)
        if prev is None or close > prev[2]:
            found[start] = (start, i, close)
    return found


def _split_top_level(tokens: Sequence[Token], sep: str) -> list[list[Token]]:
    depths = _bracket_depths(tokens)
    parts: list[list[Token]] = [[]]
    for t, d in zip(tokens, depths):
        if t.text == sep and d == 0:
            parts.append([])
        else:
            parts[-1].append(t)
    return parts


def render_expr(tokens: Sequence[Token], ruleset: RuleSet, depth: int = 0) -> str:
    """Render a captured token run as pseudocode text.

    Untouched token runs keep their original spacing (reconstructed from
    columns). Subscript/index runs are verbalized (ITEM/ITEMS ... OF),
    then expression rules rewrite windows in tier order. Nested slots
    render recursively up to a fixed depth.
    """
    tokens = [t for t in tokens if t.kind is not TokenKind.COMMENT]
    if not tokens:
        return ""
    raw_pieces = [_Piece(t.text, t.column, len(t.text)) for t in tokens]
    if depth >= _MAX_RENDER_DEPTH:
        return _join_pieces(raw_pieces)

    subscripts = _find_subscripts(tokens)
    depths = _bracket_depths(tokens)
    pieces: list[_Piece] = []
    i = 0
    while i < len(tokens):
        sub = subscripts.get(i)
        if sub is not None:
            text = _render_subscript(tokens, sub, ruleset, depth)
            if text is not None:
                pieces.append(_Piece(text))
                i = sub[2] + 1
                continue
        matched = False
        for rule in ruleset.expr_rules:
            res = _match_tokens(
                tokens[i:],
                [d - depths[i] for d in depths[i:]],
                rule.pattern,
                anchored_end=False,
            )
            if res is not None:
                binds, consumed = res
                pieces.append(_Piece(_render_template(rule, binds, ruleset, depth + 1)))
                i += consumed
                matched = True
                break
        if not matched:
            pieces.append(raw_pieces[i])
            i += 1
    return _join_pieces(pieces)


def _render_subscript(
    tokens: Sequence[Token],
    span: tuple[int, int, int],
    ruleset: RuleSet,
    depth: int,
) -> str | None:
    start, open_idx, close_idx = span
    seq = tokens[start:open_idx]
    inner = tokens[open_idx + 1 : close_idx]
    if not inner:
        return None
    parts = _split_top_level(inner, ":")
    seq_text = render_expr(seq, ruleset, depth + 1)
    if len(parts) == 1:
        idx_text = render_expr(parts[0], ruleset, depth + 1)
        return f"ITEM {idx_text} OF {seq_text}"
    if len(parts) == 2 and parts[0] and parts[1]:
        lo = render_expr(parts[0], ruleset, depth + 1)
        hi = render_expr(parts[1], ruleset, depth + 1)
        return f"ITEMS {lo} TO {hi} OF {seq_text}"
    return None  # open-ended or stepped slices stay literal


def _apply_minus1(tokens: Sequence[Token], ruleset: RuleSet, depth: int) -> str:
    if len(tokens) == 1 and tokens[0].kind is TokenKind.NUMBER:
        text = tokens[0].text
        if text.isdigit():
            return str(int(text) - 1)
    if len(tokens) == 1:
        return f"{tokens[0].text}-1"
    return f"({render_expr(tokens, ruleset, depth)})-1"


def _render_template(
    rule: Rule, binds: dict[str, tuple[Token, ...]], ruleset: RuleSet, depth: int
) -> str:
    def substitute(m: re.Match) -> str:
        name, filt = m.group(1), m.group(2)
        chunk = binds[name]
        if filt == "minus1":
            return _apply_minus1(chunk, ruleset, depth)
        return render_expr(chunk, ruleset, depth)

    return _SLOT_RE.sub(substitute, rule.template)


# --- line conversion -------------------------------------------------------


def _code_tokens(node: LineNode) -> list[Token]:
    return [t for t in node.tokens if t.kind is not TokenKind.COMMENT]


def _apply(node: LineNode, ruleset: RuleSet) -> tuple[str, bool]:
    tokens = _code_tokens(node)
    for rule in ruleset.rules:
        if rule.kind == EXPR_KIND or rule.kind != node.kind.name:
            continue
        binds = _match_line_rule(rule, tokens)
        if binds is not None:
            return _render_template(rule, binds, ruleset, depth=1), False
    return FALLBACK_PREFIX + node.raw.strip(), True


def apply_rules(node: LineNode, ruleset: RuleSet) -> str:
    """Convert one classified line; the EXECUTE fallback makes this total."""
    if node.kind in (LineKind.BLANK, LineKind.COMMENT):
        raise ValueError("blank and comment lines carry no pseudocode")
    return _apply(node, ruleset)[0]


def _opens_block(node: LineNode) -> bool:
    tokens = _code_tokens(node)
    return bool(tokens) and tokens[-1].kind is TokenKind.DELIMITER and tokens[-1].text == ":"


def convert_program(source: str, ruleset: RuleSet | None = None) -> PseudoDoc:
    """Convert a whole program line by line into a PseudoDoc.

    Blank and comment lines are dropped. Every dedent emits the END
    line(s) of the blocks it closes; remaining blocks close at the end
    of the document. elif/else at the depth of an open block continue
    that block instead of closing it.
    """
    if ruleset is None:
        ruleset = load_ruleset()
    nodes = parse_program(source)
    lines: list[tuple[int, str]] = []
    stack: list[tuple[int, str]] = []  # (depth, end keyword)
    fallback_count = 0
    source_lines = 0
    for node in nodes:
        if node.kind in (LineKind.BLANK, LineKind.COMMENT):
            continue
        is_continuation = node.kind in (LineKind.ELIF, LineKind.ELSE)
        while stack and stack[-1][0] >= node.depth:
            if is_continuation and stack[-1][0] == node.depth:
                break
            d, kw = stack.pop()
            lines.append((d, f"END {kw}"))
        text, fell_back = _apply(node, ruleset)
        if fell_back:
            fallback_count += 1
        lines.append((node.depth, text))
        source_lines += 1
        if _opens_block(node):
            continues_existing = (
                is_continuation and stack and stack[-1][0] == node.depth
            )
            if not continues_existing:
                stack.append((node.depth, END_KEYWORDS.get(node.kind, "BLOCK")))
    while stack:
        d, kw = stack.pop()
        lines.append((d, f"END {kw}"))
    return PseudoDoc(
        lines=tuple(lines), source_lines=source_lines, fallback_count=fallback_count
    )


def emit_txt(doc: PseudoDoc, path: str | Path) -> None:
    """Write the document as UTF-8 text, 4 spaces per depth, LF endings."""
    Path(path).write_text(doc.to_text(), encoding="utf-8", newline="\n")
