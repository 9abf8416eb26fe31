"""CTC prefix beam search with n-gram shallow fusion, homophone
extension, and final n-best LM rescoring.

The search tracks, per collapsed prefix, the natural-log probability of
ending in blank and in non-blank.  Pruning ranks prefixes by the fused
score

    logsumexp(p_blank, p_nonblank) + alpha * ln(10) * lm_score + beta * |prefix|

where lm_score is the accumulated log10 language-model score.  All
tie-breaks use transcript code-point order so repeated decodes are
bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .emissions import EmissionMatrix, Vocabulary
from .errors import EmptyEmissions, InvalidProbability
from .lexicon import HomophoneIndex
from .ngram_lm import NGramModel, score_increment, score_sequence

NEG_INF = float("-inf")
LN10 = math.log(10.0)


def _logaddexp(a: float, b: float) -> float:
    """Numerically stable log(exp(a) + exp(b))."""
    if a == NEG_INF:
        return b
    if b == NEG_INF:
        return a
    if a < b:
        a, b = b, a
    return a + math.log1p(math.exp(b - a))


@dataclass
class DecoderConfig:
    """Beam search knobs.

    char_topk preselects that many highest-probability characters per
    frame before extension (0 considers the whole vocabulary).  It keeps
    a 32k-character vocabulary decodable in a hot pure-Python loop; any
    input with V <= char_topk is searched exactly.
    """

    beam_size: int = 20
    alpha: float = 0.45
    beta: float = 1.55
    gamma: float = 0.5
    he_enabled: bool = True
    nbest: int = 10
    rescore_enabled: bool = True
    char_topk: int = 64

    def __post_init__(self):
        if self.beam_size < 1:
            raise ValueError("beam_size must be >= 1")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must be in [0, 1]")
        if self.alpha < 0.0:
            raise ValueError("alpha must be >= 0")
        if self.nbest < 1:
            raise ValueError("nbest must be >= 1")


@dataclass
class BeamHypothesis:
    """One decoding prefix. Probabilities are natural-log; lm_score log10.

    The ext_* fields are step-scoped bookkeeping: when a frame's
    character extensions append token ext_index, ext_mass holds the
    natural-log mass that multiplied its emission and ext_lm_inc the LM
    increment it received.  Homophone injection reads them to build
    sibling hypotheses; they are reset by the next step.
    """

    prefix: tuple[int, ...]
    p_blank: float
    p_nonblank: float
    lm_score: float = 0.0
    fused_score: float = 0.0
    ext_index: int | None = None
    ext_mass: float = NEG_INF
    ext_lm_inc: float = 0.0

    def acoustic_score(self) -> float:
        return _logaddexp(self.p_blank, self.p_nonblank)

    def text(self, vocab: Vocabulary) -> str:
        return "".join(vocab.tokens[i] for i in self.prefix)


@dataclass(frozen=True)
class HEInjection:
    """Audit record: at step, source char's homophone was injected with prob."""

    step: int
    source: str
    injected: str
    prob: float


@dataclass(frozen=True)
class NBestEntry:
    transcript: str
    fused_score: float
    acoustic_score: float
    lm_score: float


@dataclass(frozen=True)
class DecodeResult:
    nbest: tuple[NBestEntry, ...]
    he_injections: tuple[HEInjection, ...]

    @property
    def best(self) -> str:
        return self.nbest[0].transcript if self.nbest else ""


def homophone_adjusted_prob(a_p: float, q: float, n_pron: int, gamma: float) -> float:
    """Re-estimated probability for an injected homophone.

    Mixes the source character's acoustic probability a_p with the
    homophone's own emission q, discounted by how many pronunciations
    the homophone has (max(0, 1 - log10 N)), then floors the result at
    a_p so injection never scores below the original.
    """
    if not 0.0 <= a_p <= 1.0:
        raise InvalidProbability("a_p", a_p)
    if not 0.0 <= q <= 1.0:
        raise InvalidProbability("q", q)
    if n_pron < 1:
        raise ValueError(f"pronunciation count must be >= 1, got {n_pron}")
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must be in [0, 1], got {gamma}")
    discount = max(0.0, 1.0 - math.log10(n_pron))
    return max(a_p, (1.0 - gamma) * a_p + gamma * q * discount)


def _fused(hyp: BeamHypothesis, config: DecoderConfig) -> float:
    return (
        hyp.acoustic_score()
        + config.alpha * LN10 * hyp.lm_score
        + config.beta * len(hyp.prefix)
    )


def _prune(hyps: list[BeamHypothesis], vocab: Vocabulary, config: DecoderConfig) -> list[BeamHypothesis]:
    for hyp in hyps:
        hyp.fused_score = _fused(hyp, config)
    hyps.sort(key=lambda h: (-h.fused_score, h.text(vocab)))
    return hyps[: config.beam_size]


def _frame_candidates(lp: np.ndarray, blank_index: int, topk: int) -> list[int]:
    """Non-blank candidate indices, most probable first, ties by index."""
    order = np.argsort(-lp, kind="stable")
    cands: list[int] = []
    for idx in order:
        i = int(idx)
        if i == blank_index:
            continue
        if lp[i] == NEG_INF:
            break
        cands.append(i)
        if topk and len(cands) >= topk:
            break
    return cands


def _lm_increment(lm: NGramModel | None, vocab: Vocabulary, prefix: tuple[int, ...], token: str) -> float:
    if lm is None:
        return 0.0
    span = lm.order - 1
    ctx_ids = prefix[-span:] if span > 0 else ()
    return score_increment(lm, [vocab.tokens[i] for i in ctx_ids], token)


def ctc_step(
    hyps: list[BeamHypothesis],
    frame: np.ndarray,
    vocab: Vocabulary,
    config: DecoderConfig,
    lm: NGramModel | None = None,
    prune: bool = True,
) -> list[BeamHypothesis]:
    """One prefix beam search step over a single emission frame.

    Blank extends p_blank of the same prefix; a repeated character
    merges into p_nonblank of the same prefix; any character extends the
    prefix with an incremental LM score.  With prune=False the full
    expanded set is returned so homophone injection can compete in the
    same step's prune.
    """
    lp = np.asarray(frame, dtype=np.float64)
    blank = vocab.blank_index
    lp_blank = float(lp[blank])
    cands = _frame_candidates(lp, blank, config.char_topk)
    next_recs: dict[tuple[int, ...], BeamHypothesis] = {}

    for hyp in hyps:
        p_tot = _logaddexp(hyp.p_blank, hyp.p_nonblank)
        if p_tot == NEG_INF:
            continue
        last = hyp.prefix[-1] if hyp.prefix else None

        if lp_blank != NEG_INF:
            rec = next_recs.get(hyp.prefix)
            if rec is None:
                rec = BeamHypothesis(hyp.prefix, NEG_INF, NEG_INF, lm_score=hyp.lm_score)
                next_recs[hyp.prefix] = rec
            rec.p_blank = _logaddexp(rec.p_blank, p_tot + lp_blank)

        for c in cands:
            lp_c = float(lp[c])
            if c == last:
                if hyp.p_nonblank != NEG_INF:
                    rec = next_recs.get(hyp.prefix)
                    if rec is None:
                        rec = BeamHypothesis(hyp.prefix, NEG_INF, NEG_INF, lm_score=hyp.lm_score)
                        next_recs[hyp.prefix] = rec
                    rec.p_nonblank = _logaddexp(rec.p_nonblank, hyp.p_nonblank + lp_c)
                mass = hyp.p_blank
            else:
                mass = p_tot
            if mass == NEG_INF:
                continue
            new_prefix = hyp.prefix + (c,)
            rec = next_recs.get(new_prefix)
            if rec is None:
                inc = _lm_increment(lm, vocab, hyp.prefix, vocab.tokens[c])
                rec = BeamHypothesis(new_prefix, NEG_INF, NEG_INF, lm_score=hyp.lm_score + inc)
                next_recs[new_prefix] = rec
            elif rec.ext_index is None:
                # rec was seeded by the surviving prefix's blank/repeat
                # path; record the extension increment for injection
                inc = _lm_increment(lm, vocab, hyp.prefix, vocab.tokens[c])
            else:
                inc = rec.ext_lm_inc
            rec.ext_lm_inc = inc
            rec.p_nonblank = _logaddexp(rec.p_nonblank, mass + lp_c)
            rec.ext_index = c
            rec.ext_mass = _logaddexp(rec.ext_mass, mass)

    out = list(next_recs.values())
    if prune:
        return _prune(out, vocab, config)
    for rec in out:
        rec.fused_score = _fused(rec, config)
    return out


def extend_homophones(
    hyps: list[BeamHypothesis],
    frame: np.ndarray,
    index: HomophoneIndex,
    vocab: Vocabulary,
    config: DecoderConfig,
    lm: NGramModel | None = None,
    step: int = 0,
    audit: list[HEInjection] | None = None,
) -> list[BeamHypothesis]:
    """Inject homophone siblings for this step's character extensions.

    For every hypothesis extended by character c this step and every
    homophone h of c present in the vocabulary, a sibling hypothesis
    replaces c with h; its non-blank mass uses the adjusted probability
    from homophone_adjusted_prob and its LM increment is recomputed for
    h.  Injected and organic hypotheses then compete in one prune.
    Expects the unpruned output of ctc_step(prune=False).
    """
    if not config.he_enabled:
        return _prune(list(hyps), vocab, config)
    lp = np.asarray(frame, dtype=np.float64)
    by_prefix = {h.prefix: h for h in hyps}
    extended = [h for h in hyps if h.ext_index is not None]

    for hyp in extended:
        c_idx = hyp.ext_index
        source = vocab.tokens[c_idx]
        homophones = index.homophones_of(source)
        if not homophones:
            continue
        a_p = min(1.0, math.exp(float(lp[c_idx])))
        parent = hyp.prefix[:-1]
        for h_char in homophones:
            h_idx = vocab.index_of(h_char)
            if h_idx is None:
                continue
            q = min(1.0, math.exp(float(lp[h_idx])))
            p = homophone_adjusted_prob(a_p, q, index.pron_count[h_char], config.gamma)
            if p <= 0.0:
                continue
            if audit is not None:
                audit.append(HEInjection(step, source, h_char, p))
            contrib = hyp.ext_mass + math.log(p)
            sibling = parent + (h_idx,)
            existing = by_prefix.get(sibling)
            if existing is not None:
                existing.p_nonblank = max(existing.p_nonblank, contrib)
            else:
                inc = _lm_increment(lm, vocab, parent, h_char)
                rec = BeamHypothesis(
                    sibling,
                    NEG_INF,
                    contrib,
                    lm_score=hyp.lm_score - hyp.ext_lm_inc + inc,
                )
                rec.ext_lm_inc = inc
                by_prefix[sibling] = rec

    return _prune(list(by_prefix.values()), vocab, config)


def decode(
    emissions: EmissionMatrix,
    vocab: Vocabulary,
    index: HomophoneIndex | None,
    lm: NGramModel | None,
    config: DecoderConfig,
) -> DecodeResult:
    """Run the full pipeline over all frames and return the n-best list.

    With rescore_enabled the final top-nbest transcripts are re-scored
    from scratch (acoustic logsumexp + alpha * ln10 * full LM score +
    beta * length) and re-sorted; with shallow fusion active this
    reproduces the search-time fused score exactly, and with alpha
    fusion disabled it acts as a classic second-pass LM reranker.
    """
    if emissions.frames == 0:
        raise EmptyEmissions()
    he_on = config.he_enabled and index is not None
    audit: list[HEInjection] = []
    log_probs = emissions.log_probs.astype(np.float64)

    beam = [BeamHypothesis((), 0.0, NEG_INF)]
    for t in range(emissions.frames):
        row = log_probs[t]
        if he_on:
            expanded = ctc_step(beam, row, vocab, config, lm, prune=False)
            beam = extend_homophones(expanded, row, index, vocab, config, lm, step=t, audit=audit)
        else:
            beam = ctc_step(beam, row, vocab, config, lm, prune=True)

    top = sorted(beam, key=lambda h: (-h.fused_score, h.text(vocab)))[: config.nbest]
    entries: list[NBestEntry] = []
    for hyp in top:
        transcript = hyp.text(vocab)
        acoustic = hyp.acoustic_score()
        lm_sc = hyp.lm_score
        if config.rescore_enabled and lm is not None:
            lm_sc = score_sequence(lm, [vocab.tokens[i] for i in hyp.prefix])
            final = acoustic + config.alpha * LN10 * lm_sc + config.beta * len(hyp.prefix)
        else:
            final = hyp.fused_score
        entries.append(NBestEntry(transcript, final, acoustic, lm_sc))
    if config.rescore_enabled:
        entries.sort(key=lambda e: (-e.fused_score, e.transcript))
    return DecodeResult(tuple(entries), tuple(audit))
