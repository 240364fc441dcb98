"""Stage 1 text-to-code: tag the query, retrieve the nearest task, fix syntax.

The generator is a TF-IDF retrieval engine over the task corpus: each
description becomes a tag-boosted, L2-normalized sparse vector, queries
are ranked by cosine similarity, and the winning sample's code is run
through a light syntax corrector. Retrieval output is labeled
``engine: retrieval`` wherever it is reported.

Part-of-speech tagging is deliberately heuristic: a small fixed lexicon
plus suffix rules. The tags only feed the term-weight boosts, so the
tagger needs to be deterministic and cheap, not linguistically deep.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .corpus import TaskSample


class RetrievalError(ValueError):
    """Unusable query or unindexable document."""


_WORD_RE = re.compile(r"[a-z0-9]+")

# Code verbs mapped straight to FUNC regardless of the lexicon.
FUNC_WORDS = frozenset({"return", "print", "sort", "find", "compute"})

# Closed-class words, down-weighted (x0.3) but kept for tie-breaking on
# tiny corpora. Exactly 50 entries.
STOPWORDS = frozenset(
    """
    the a an of in to and or for with is are be by on at from as that
    this it its into given each all any if then else not no than which
    when where how can will should must also both between only same
    other some using use
    """.split()
)

# Fixed word -> tag lexicon for common task-description vocabulary.
LEXICON: dict[str, str] = {}
LEXICON.update(dict.fromkeys(STOPWORDS, "OTHER"))
LEXICON.update(
    dict.fromkeys(
        """
        number numbers list lists string strings array arrays element
        elements value values maximum minimum sum product average length
        character characters word words sentence digit digits factorial
        sequence tuple dictionary item items index matrix integer
        integers float set sublist substring letter letters vowel vowels
        divisor divisors remainder quotient difference square cube root
        triangle area perimeter volume prime palindrome duplicate
        duplicates occurrence occurrences frequency position pair pairs
        range order key keys
        """.split(),
        "NOUN",
    )
)
LEXICON.update(
    dict.fromkeys(
        """
        reverse remove check convert count calculate swap merge split
        replace concatenate add subtract multiply divide determine
        extract generate insert delete join repeat toggle interchange
        locate validate get take accept write create make filter
        """.split(),
        "VERB",
    )
)
LEXICON.update(
    dict.fromkeys(
        """
        common unique equal even odd largest smallest positive negative
        ascending descending alphabetical numeric empty nested
        consecutive first last second nth
        """.split(),
        "ADJ",
    )
)

# Suffix heuristics for words the lexicon does not know.
_SUFFIX_TAGS = (
    ("ing", "VERB"),
    ("ed", "VERB"),
    ("ize", "VERB"),
    ("tion", "NOUN"),
    ("ness", "NOUN"),
    ("ment", "NOUN"),
    ("est", "ADJ"),
    ("ous", "ADJ"),
    ("ive", "ADJ"),
)

# Term-weight boost per tag; overridable per index build.
TAG_BOOST = {"FUNC": 2.0, "NOUN": 1.5, "VERB": 1.5, "ADJ": 1.0, "NUM": 1.0, "OTHER": 1.0}

STOPWORD_WEIGHT = 0.3

INDEX_FORMAT_VERSION = 1


@dataclass(frozen=True)
class TaggedToken:
    text: str
    tag: str


@dataclass(frozen=True)
class CodeCandidate:
    code: str
    similarity: float
    source_id: int
    syntax_fixes: tuple[str, ...]


@dataclass
class TfIdfIndex:
    vocabulary: dict[str, int]
    idf: dict[str, float]
    doc_vectors: list[dict[int, float]]  # unit L2 norm, keyed by dimension
    samples: list[TaskSample]
    tag_boost: dict[str, float] = field(default_factory=lambda: dict(TAG_BOOST))


def _tag_word(word: str) -> str:
    if word.isdigit():
        return "NUM"
    if word in FUNC_WORDS:
        return "FUNC"
    tag = LEXICON.get(word)
    if tag is not None:
        return tag
    for suffix, stag in _SUFFIX_TAGS:
        if len(word) > len(suffix) + 1 and word.endswith(suffix):
            return stag
    return "OTHER"


def preprocess_text(text: str) -> list[TaggedToken]:
    """Lowercase, split on whitespace/punctuation, and POS-tag each token."""
    words = _WORD_RE.findall(text.lower())
    if not words:
        raise RetrievalError("empty after cleaning")
    return [TaggedToken(text=w, tag=_tag_word(w)) for w in words]


def _term_weights(tagged: Sequence[TaggedToken], idf, boost) -> dict[str, float]:
    counts = Counter(t.text for t in tagged)
    tags = {t.text: t.tag for t in tagged}
    weights = {}
    for term, tf in counts.items():
        if term not in idf:
            continue  # unseen query term: no dimension for it
        w = tf * idf[term] * boost.get(tags[term], 1.0)
        if term in STOPWORDS:
            w *= STOPWORD_WEIGHT
        weights[term] = w
    return weights


def _normalize(vec: dict) -> dict:
    norm = math.sqrt(sum(w * w for w in vec.values()))
    if norm == 0.0:
        raise RetrievalError("no indexable terms")
    return {k: w / norm for k, w in vec.items()}


def build_index(
    corpus: Sequence[TaskSample], tag_boost: dict[str, float] | None = None
) -> TfIdfIndex:
    """Build the TF-IDF index over task descriptions.

    idf(t) = ln((1+D)/(1+df)) + 1, weights are tf x idf x tag boost
    (stopwords additionally x0.3), each document vector L2-normalized.
    Vocabulary dimensions are assigned in first-seen order, so rebuilds
    are bit-identically reproducible.
    """
    if not corpus:
        raise RetrievalError("empty corpus")
    boost = dict(TAG_BOOST) if tag_boost is None else dict(tag_boost)

    tagged_docs = []
    for sample in corpus:
        try:
            tagged_docs.append(preprocess_text(sample.description))
        except RetrievalError as exc:
            raise RetrievalError(f"sample {sample.id}: {exc}") from None

    doc_count = len(corpus)
    df = Counter()
    for tagged in tagged_docs:
        df.update({t.text for t in tagged})
    idf = {
        term: math.log((1 + doc_count) / (1 + n)) + 1.0 for term, n in df.items()
    }

    vocabulary: dict[str, int] = {}
    for tagged in tagged_docs:
        for t in tagged:
            if t.text not in vocabulary:
                vocabulary[t.text] = len(vocabulary)

    doc_vectors = []
    for sample, tagged in zip(corpus, tagged_docs):
        weights = _term_weights(tagged, idf, boost)
        try:
            unit = _normalize(weights)
        except RetrievalError as exc:
            raise RetrievalError(f"sample {sample.id}: {exc}") from None
        doc_vectors.append({vocabulary[t]: w for t, w in unit.items()})

    return TfIdfIndex(
        vocabulary=vocabulary,
        idf=idf,
        doc_vectors=doc_vectors,
        samples=list(corpus),
        tag_boost=boost,
    )


def query_vector(query: str, index: TfIdfIndex) -> dict[int, float]:
    """Vectorize a query against the index vocabulary (may be empty)."""
    tagged = preprocess_text(query)
    weights = _term_weights(tagged, index.idf, index.tag_boost)
    if not weights:
        return {}
    unit = _normalize(weights)
    return {index.vocabulary[t]: w for t, w in unit.items()}


def generate_code(query: str, index: TfIdfIndex, k: int = 1) -> list[CodeCandidate]:
    """Return the top-k nearest samples' code, syntax-corrected.

    Ranking is by cosine similarity, ties broken by lower sample id.
    All weights are non-negative, so similarities lie in [0, 1].
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    qvec = query_vector(query, index)
    scored = []
    for sample, dvec in zip(index.samples, index.doc_vectors):
        if len(qvec) < len(dvec):
            sim = sum(w * dvec.get(dim, 0.0) for dim, w in qvec.items())
        else:
            sim = sum(w * qvec.get(dim, 0.0) for dim, w in dvec.items())
        scored.append((sim, sample))
    scored.sort(key=lambda pair: (-pair[0], pair[1].id))
    candidates = []
    for sim, sample in scored[:k]:
        fixed, fixes = correct_syntax(sample.code)
        candidates.append(
            CodeCandidate(
                code=fixed,
                similarity=sim,
                source_id=sample.id,
                syntax_fixes=tuple(fixes),
            )
        )
    return candidates


# --- syntax correction -----------------------------------------------------

BLOCK_KEYWORDS = frozenset(
    {"def", "if", "elif", "else", "for", "while", "class", "try", "except",
     "finally", "with"}
)

_FIRST_WORD_RE = re.compile(r"^\s*([A-Za-z_]\w*)")


def _balance_report(code: str) -> list[str]:
    """Report unbalanced brackets, skipping strings and comments."""
    fixes = []
    stack: list[str] = []
    pairs = {")": "(", "]": "[", "}": "{"}
    quote = None
    escaped = False
    in_comment = False
    for ch in code:
        if ch == "\n":
            quote = None
            in_comment = False
            escaped = False
            continue
        if in_comment:
            continue
        if quote is not None:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == quote:
                quote = None
            continue
        if ch in "\"'":
            quote = ch
        elif ch == "#":
            in_comment = True
        elif ch in "([{":
            stack.append(ch)
        elif ch in ")]}":
            if stack and stack[-1] == pairs[ch]:
                stack.pop()
            else:
                fixes.append(f'unbalanced "{ch}"')
                return fixes
    if stack:
        fixes.append(f'unbalanced "{stack[-1]}"')
    return fixes


def correct_syntax(code: str) -> tuple[str, list[str]]:
    """Apply the fixed postprocessing passes, idempotently.

    In order: bracket-balance check (report-only), missing-colon repair
    on block-keyword lines, indentation renormalization to the 4-space
    unit, trailing-whitespace strip. Token content is never altered.
    """
    fixes = _balance_report(code)

    had_newline = code.endswith("\n")
    lines = code.split("\n")
    if had_newline:
        lines = lines[:-1]

    out_lines = []
    indent_stack = [0]
    for line_no, original in enumerate(lines, start=1):
        line = original.expandtabs(4)
        stripped = line.strip()
        if not stripped:
            if original != "":
                fixes.append(f"strip@{line_no}")
            out_lines.append("")
            continue

        m = _FIRST_WORD_RE.match(line)
        if m and m.group(1) in BLOCK_KEYWORDS and not line.rstrip().endswith(":"):
            line = line.rstrip() + ":"
            fixes.append(f"colon@{line_no}")

        if not stripped.startswith("#"):
            width = len(line) - len(line.lstrip(" "))
            while len(indent_stack) > 1 and indent_stack[-1] > width:
                indent_stack.pop()
            if width > indent_stack[-1]:
                indent_stack.append(width)
            level = len(indent_stack) - 1
            new_indent = " " * (4 * level)
            body = line.lstrip(" ")
            if line[: len(line) - len(body)] != new_indent:
                fixes.append(f"indent@{line_no}")
            line = new_indent + body

        if line != line.rstrip():
            fixes.append(f"strip@{line_no}")
            line = line.rstrip()
        out_lines.append(line)

    fixed = "\n".join(out_lines)
    if had_newline:
        fixed += "\n"
    return fixed, fixes


# --- index persistence -----------------------------------------------------


def corpus_fingerprint(samples: Sequence[TaskSample]) -> str:
    """Stable content hash used to invalidate persisted indexes."""
    h = hashlib.sha256()
    for s in samples:
        h.update(json.dumps([s.id, s.description, s.code]).encode("utf-8"))
    return h.hexdigest()


def save_index(index: TfIdfIndex, path: str | Path) -> None:
    """Persist the index as a versioned JSON cache (floats round-trip exactly)."""
    payload = {
        "format_version": INDEX_FORMAT_VERSION,
        "corpus_sha256": corpus_fingerprint(index.samples),
        "tag_boost": index.tag_boost,
        "vocabulary": index.vocabulary,
        "idf": index.idf,
        "doc_vectors": [sorted(v.items()) for v in index.doc_vectors],
    }
    Path(path).write_text(json.dumps(payload), encoding="utf-8")


def load_index(path: str | Path, corpus: Sequence[TaskSample]) -> TfIdfIndex | None:
    """Load a persisted index; None when missing, stale, or incompatible."""
    path = Path(path)
    if not path.exists():
        return None
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError):
        return None
    if payload.get("format_version") != INDEX_FORMAT_VERSION:
        return None
    if payload.get("corpus_sha256") != corpus_fingerprint(corpus):
        return None
    return TfIdfIndex(
        vocabulary=payload["vocabulary"],
        idf=payload["idf"],
        doc_vectors=[{int(d): w for d, w in vec} for vec in payload["doc_vectors"]],
        samples=list(corpus),
        tag_boost=payload["tag_boost"],
    )
