"""Variant-character discovery and checker-gated transcript rewriting.

Two stages: pair discovery filters all character combinations of the
lexicon through pronunciation, glyph-code and embedding-similarity
gates; replacement rewrites lower-frequency variants to their
higher-frequency form, keeping a rewrite only when a semantic checker
scores it above threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimMismatch,
    EmptySentence,
    EmptyString,
    MalformedLine,
    MissingEmbedding,
    ZeroVector,
)
from .lexicon import GlyphCodeTable, Lexicon


@dataclass(frozen=True)
class UWConfig:
    """Thresholds for discovery and replacement."""

    jyutping_max_distance: float = 0.0
    glyph_max_distance: float = 0.25
    cosine_min: float = 0.5
    checker_min: float = 0.9
    # None means every method where both characters have codes must pass.
    min_methods: int | None = None

    def __post_init__(self):
        for name in ("jyutping_max_distance", "glyph_max_distance"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value} outside [0, 1]")
        # similarity thresholds may exceed 1 to act as unreachable filters
        for name in ("cosine_min", "checker_min"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0")
        if self.min_methods is not None and self.min_methods < 1:
            raise ValueError("min_methods must be >= 1 when set")


@dataclass(frozen=True)
class EmbeddingTable:
    dim: int
    vectors: dict[str, np.ndarray]


@dataclass(frozen=True)
class UnifiedPair:
    """A surviving (variant, canonical) pair with its filter scores.

    At discovery time the orientation is the tie-break one (canonical is
    the code-point-smaller character); apply_unified_writing re-orients
    by corpus frequency.
    """

    variant: str
    canonical: str
    jyutping_distance: float
    glyph_distances: tuple[tuple[str, float], ...]
    cosine: float


@dataclass(frozen=True)
class FrequencyTable:
    counts: dict[str, int]

    def count(self, char: str) -> int:
        return self.counts.get(char, 0)


@dataclass(frozen=True)
class RewriteRecord:
    sentence_index: int
    variant: str
    canonical: str
    score: float
    kept: bool


def _levenshtein(a: str, b: str) -> int:
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        row = [i]
        for j, cb in enumerate(b, start=1):
            row.append(min(prev[j] + 1, row[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = row
    return prev[-1]


def normalized_edit_distance(a: str, b: str) -> float:
    """Levenshtein distance divided by the longer string's length."""
    if not a or not b:
        raise EmptyString()
    return _levenshtein(a, b) / max(len(a), len(b))


def cosine_similarity(u: np.ndarray, v: np.ndarray) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DimMismatch(u.shape[0], v.shape[0])
    nu = math.sqrt(float(u @ u))
    nv = math.sqrt(float(v @ v))
    if nu == 0.0 or nv == 0.0:
        raise ZeroVector()
    return float(u @ v) / (nu * nv)


def load_embeddings(path: str) -> EmbeddingTable:
    """Load a text embedding table: "<count> <dim>" header, then
    "<char> <f1> ... <fdim>" lines."""
    vectors: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2 or not all(f.isdigit() for f in header):
            raise MalformedLine(1, "expected '<count> <dim>' header", path)
        count, dim = int(header[0]), int(header[1])
        for line_no, raw in enumerate(fh, start=2):
            line = raw.rstrip("\n")
            if not line:
                continue
            fields = line.split(" ")
            if len(fields) != dim + 1:
                raise MalformedLine(line_no, f"expected {dim} components, got {len(fields) - 1}", path)
            char = fields[0]
            try:
                vec = np.array([float(f) for f in fields[1:]], dtype=np.float64)
            except ValueError as exc:
                raise MalformedLine(line_no, "bad float component", path) from exc
            if not np.any(vec):
                raise MalformedLine(line_no, f"zero vector for {char!r}", path)
            vectors[char] = vec
    if len(vectors) != count:
        raise MalformedLine(1, f"header declared {count} vectors, found {len(vectors)}", path)
    return EmbeddingTable(dim=dim, vectors=vectors)


def load_frequency_table(path: str) -> FrequencyTable:
    """Load "<char>\\t<count>" TSV."""
    counts: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 2 or not fields[1].isdigit():
                raise MalformedLine(line_no, "expected '<char>\\t<count>'", path)
            counts[fields[0]] = int(fields[1])
    return FrequencyTable(counts)


def count_frequencies(corpus: list[str]) -> FrequencyTable:
    counts: dict[str, int] = {}
    for sentence in corpus:
        for char in sentence:
            counts[char] = counts.get(char, 0) + 1
    return FrequencyTable(counts)


def _char_codes(lex: Lexicon) -> dict[str, tuple[str, ...]]:
    collected: dict[str, list[str]] = {}
    for char, code in lex.entries:
        collected.setdefault(char, []).append(code.text)
    return {c: tuple(v) for c, v in collected.items()}


def _evaluate_pair(
    x: str,
    y: str,
    codes: dict[str, tuple[str, ...]],
    glyphs: list[GlyphCodeTable],
    emb: EmbeddingTable,
    config: UWConfig,
) -> UnifiedPair | None:
    """Run one unordered character pair through all three filters."""
    jd = min(
        normalized_edit_distance(cx, cy)
        for cx in codes[x]
        for cy in codes[y]
    )
    if jd > config.jyutping_max_distance:
        return None

    glyph_distances: list[tuple[str, float]] = []
    passed = 0
    for table in glyphs:
        gx = table.codes.get(x)
        gy = table.codes.get(y)
        if not gx or not gy:
            continue
        d = min(normalized_edit_distance(cx, cy) for cx in gx for cy in gy)
        glyph_distances.append((table.method_name, d))
        if d <= config.glyph_max_distance:
            passed += 1
    if not glyph_distances:
        return None
    need = config.min_methods if config.min_methods is not None else len(glyph_distances)
    if passed < need:
        return None

    vx = emb.vectors.get(x)
    vy = emb.vectors.get(y)
    if vx is None or vy is None:
        return None
    cos = cosine_similarity(vx, vy)
    if cos < config.cosine_min:
        return None

    canonical, variant = sorted((x, y))
    return UnifiedPair(
        variant=variant,
        canonical=canonical,
        jyutping_distance=jd,
        glyph_distances=tuple(glyph_distances),
        cosine=cos,
    )


def discover_pairs(
    lex: Lexicon,
    glyphs: list[GlyphCodeTable],
    emb: EmbeddingTable,
    config: UWConfig,
) -> list[UnifiedPair]:
    """Find all variant pairs surviving the three similarity filters.

    At the default pronunciation threshold of 0 only characters sharing
    a code can pass, so candidates are bucketed by Jyutping code instead
    of walking the full L*(L-1) combination space; a positive threshold
    falls back to the exhaustive walk.
    """
    codes = _char_codes(lex)
    if config.jyutping_max_distance == 0.0:
        buckets: dict[str, set[str]] = {}
        for char, code in lex.entries:
            buckets.setdefault(code.text, set()).add(char)
        candidates: set[tuple[str, str]] = set()
        for chars in buckets.values():
            ordered = sorted(chars)
            for i, x in enumerate(ordered):
                for y in ordered[i + 1 :]:
                    candidates.add((x, y))
        pairs = [
            _evaluate_pair(x, y, codes, glyphs, emb, config)
            for x, y in sorted(candidates)
        ]
        return sorted(
            (p for p in pairs if p is not None),
            key=lambda p: (p.variant, p.canonical),
        )
    return discover_pairs_naive(lex, glyphs, emb, config)


def discover_pairs_naive(
    lex: Lexicon,
    glyphs: list[GlyphCodeTable],
    emb: EmbeddingTable,
    config: UWConfig,
) -> list[UnifiedPair]:
    """Exhaustive double loop over all character combinations."""
    codes = _char_codes(lex)
    chars = sorted(codes)
    pairs: list[UnifiedPair] = []
    for i, x in enumerate(chars):
        for y in chars[i + 1 :]:
            pair = _evaluate_pair(x, y, codes, glyphs, emb, config)
            if pair is not None:
                pairs.append(pair)
    return sorted(pairs, key=lambda p: (p.variant, p.canonical))


def save_pairs(pairs: list[UnifiedPair], path: str) -> None:
    """Write pairs TSV: variant, canonical, jyutping distance, cosine,
    per-method glyph distances as "method=value;..."."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for p in pairs:
            glyphs = ";".join(f"{m}={d!r}" for m, d in p.glyph_distances)
            fh.write(f"{p.variant}\t{p.canonical}\t{p.jyutping_distance!r}\t{p.cosine!r}\t{glyphs}\n")


def load_pairs(path: str) -> list[UnifiedPair]:
    pairs: list[UnifiedPair] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 5:
                raise MalformedLine(line_no, "expected 5 tab-separated fields", path)
            try:
                glyph_distances = tuple(
                    (part.split("=", 1)[0], float(part.split("=", 1)[1]))
                    for part in fields[4].split(";")
                    if part
                )
                pairs.append(
                    UnifiedPair(
                        variant=fields[0],
                        canonical=fields[1],
                        jyutping_distance=float(fields[2]),
                        glyph_distances=glyph_distances,
                        cosine=float(fields[3]),
                    )
                )
            except (ValueError, IndexError) as exc:
                raise MalformedLine(line_no, "bad pair record", path) from exc
    return pairs


def rewrite_checker_score(original: str, rewritten: str, emb: EmbeddingTable) -> float:
    """Greedy-match embedding F-score between two sentences.

    Precision is the mean, over rewritten characters, of the best cosine
    against any original character (clamped to [0, 1]); recall is the
    symmetric quantity; the result is their harmonic mean.
    """
    if not original or not rewritten:
        raise EmptySentence()
    for char in original + rewritten:
        if char not in emb.vectors:
            raise MissingEmbedding(char)

    def best_match(char: str, others: str) -> float:
        vec = emb.vectors[char]
        best = 0.0
        for other in others:
            cos = cosine_similarity(vec, emb.vectors[other])
            if cos > best:
                best = min(1.0, cos)
        return best

    precision = sum(best_match(c, original) for c in rewritten) / len(rewritten)
    recall = sum(best_match(c, rewritten) for c in original) / len(original)
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _orient(pair: UnifiedPair, freq: FrequencyTable) -> tuple[str, str]:
    """Pick direction variant -> canonical by frequency; ties keep the
    code-point-smaller character as canonical."""
    a, b = pair.variant, pair.canonical
    if freq.count(a) > freq.count(b):
        return b, a
    if freq.count(a) < freq.count(b):
        return a, b
    return (max(a, b), min(a, b))


def apply_unified_writing(
    corpus: list[str],
    pairs: list[UnifiedPair],
    freq: FrequencyTable,
    emb: EmbeddingTable,
    config: UWConfig,
) -> tuple[list[str], list[RewriteRecord]]:
    """Rewrite variants to their higher-frequency form, checker-gated.

    Each sentence is swept over all pairs until stable, so chained pairs
    (a's canonical being another pair's variant) settle in one call and
    a second call is a no-op.  A rewrite failing the checker (or hitting
    a character without an embedding, scored 0) leaves the sentence
    unchanged.  Returns the rewritten corpus and the audit log.
    """
    oriented = sorted({_orient(p, freq) for p in pairs})
    out: list[str] = []
    audit: list[RewriteRecord] = []
    for idx, sentence in enumerate(corpus):
        current = sentence
        records: dict[tuple[str, str], RewriteRecord] = {}
        while True:
            changed = False
            for variant, canonical in oriented:
                if variant not in current:
                    continue
                rewritten = current.replace(variant, canonical)
                try:
                    score = rewrite_checker_score(current, rewritten, emb)
                except MissingEmbedding:
                    score = 0.0
                kept = score >= config.checker_min
                records[(variant, canonical)] = RewriteRecord(idx, variant, canonical, score, kept)
                if kept:
                    current = rewritten
                    changed = True
            if not changed:
                break
        audit.extend(records[key] for key in records)
        out.append(current)
    return out, audit
