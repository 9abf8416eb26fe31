"""Character error rate and the method-comparison harness.

CER is computed on raw character sequences, micro-averaged: total edit
operations over total reference length.  The harness decodes a manifest
of utterances under a ladder of method variants (baseline / +lm / +HE /
+UW / +HE+UW) and tabulates aggregate CER per variant.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

from .decoder import DecoderConfig, decode
from .emissions import Vocabulary, load_emissions
from .errors import EmptyReference, HomodecodeError
from .lexicon import HomophoneIndex
from .ngram_lm import NGramModel
from .unified_writing import (
    EmbeddingTable,
    FrequencyTable,
    UnifiedPair,
    UWConfig,
    apply_unified_writing,
)

VARIANTS = ("baseline", "lm", "lm_he", "lm_uw", "lm_he_uw")


class UtteranceError(HomodecodeError):
    """Wraps a decode/load failure with the owning utterance id."""

    def __init__(self, utt_id: str, message: str):
        self.utt_id = utt_id
        super().__init__(f"utterance {utt_id!r}: {message}")


@dataclass(frozen=True)
class UtteranceScore:
    utt_id: str
    reference: str
    hypothesis: str
    edits: int
    ref_len: int
    cer: float


@dataclass(frozen=True)
class EvalReport:
    per_utterance: tuple[UtteranceScore, ...]
    total_edits: int
    total_ref_len: int

    @property
    def aggregate_cer(self) -> float:
        return self.total_edits / self.total_ref_len if self.total_ref_len else 0.0


def character_edit_distance(ref: str, hyp: str) -> int:
    """Levenshtein distance over Unicode scalars with unit edit costs."""
    if ref == hyp:
        return 0
    if len(ref) < len(hyp):
        ref, hyp = hyp, ref
    prev = list(range(len(hyp) + 1))
    for i, ca in enumerate(ref, start=1):
        row = [i]
        for j, cb in enumerate(hyp, start=1):
            row.append(min(prev[j] + 1, row[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = row
    return prev[-1]


def evaluate(pairs: list[tuple[str, str, str]]) -> EvalReport:
    """Score (id, reference, hypothesis) triples; micro-averaged CER."""
    scored: list[UtteranceScore] = []
    total_edits = 0
    total_len = 0
    for utt_id, ref, hyp in sorted(pairs, key=lambda p: p[0]):
        if not ref:
            raise EmptyReference(utt_id)
        edits = character_edit_distance(ref, hyp)
        total_edits += edits
        total_len += len(ref)
        scored.append(UtteranceScore(utt_id, ref, hyp, edits, len(ref), edits / len(ref)))
    return EvalReport(tuple(scored), total_edits, total_len)


@dataclass(frozen=True)
class ManifestEntry:
    utt_id: str
    emissions_path: str
    reference: str


def load_manifest(path: str) -> list[ManifestEntry]:
    """JSON-lines manifest: {"id": ..., "emissions_path": ..., "reference": ...}."""
    from .errors import MalformedLine

    entries: list[ManifestEntry] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                entries.append(ManifestEntry(str(obj["id"]), obj["emissions_path"], obj["reference"]))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise MalformedLine(line_no, f"bad manifest entry: {exc}", path) from exc
    if not entries:
        raise MalformedLine(0, "empty manifest", path)
    return entries


@dataclass
class ComparisonAssets:
    """Everything a comparison run needs besides the manifest."""

    vocab: Vocabulary
    index: HomophoneIndex | None
    lm: NGramModel | None
    decoder_config: DecoderConfig
    uw_pairs: list[UnifiedPair] | None = None
    uw_freq: FrequencyTable | None = None
    uw_emb: EmbeddingTable | None = None
    uw_config: UWConfig | None = None
    uw_on_references: bool = False


@dataclass(frozen=True)
class VariantResult:
    variant: str
    report: EvalReport
    he_injections: int
    he_in_best: int


def variant_config(base: DecoderConfig, variant: str) -> DecoderConfig:
    """Derive per-variant decoder settings from the configured defaults."""
    if variant == "baseline":
        return replace(base, alpha=0.0, beta=0.0, he_enabled=False, rescore_enabled=False)
    if variant in ("lm", "lm_uw"):
        return replace(base, he_enabled=False)
    if variant in ("lm_he", "lm_he_uw"):
        return replace(base, he_enabled=True)
    raise ValueError(f"unknown variant {variant!r}")


def _rewrite(texts: list[str], assets: ComparisonAssets) -> list[str]:
    if not assets.uw_pairs:
        return texts
    rewritten, _ = apply_unified_writing(
        texts, assets.uw_pairs, assets.uw_freq, assets.uw_emb, assets.uw_config or UWConfig()
    )
    return rewritten


def run_comparison(
    manifest: list[ManifestEntry],
    assets: ComparisonAssets,
    variants: tuple[str, ...] = VARIANTS,
    max_workers: int = 1,
) -> list[VariantResult]:
    """Decode every utterance under every variant and tabulate CER.

    Utterances may decode on a small thread pool; results are merged in
    manifest order so output is independent of completion order.
    """
    for variant in variants:
        variant_config(assets.decoder_config, variant)  # validate names upfront

    def load_one(entry: ManifestEntry):
        try:
            return load_emissions(entry.emissions_path, assets.vocab)
        except Exception as exc:
            raise UtteranceError(entry.utt_id, str(exc)) from exc

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            matrices = list(pool.map(load_one, manifest))
    else:
        matrices = [load_one(entry) for entry in manifest]

    references = [entry.reference for entry in manifest]
    if assets.uw_on_references:
        references = _rewrite(references, assets)

    results: list[VariantResult] = []
    for variant in variants:
        config = variant_config(assets.decoder_config, variant)

        def decode_one(item):
            entry, matrix = item
            try:
                return decode(matrix, assets.vocab, assets.index, assets.lm, config)
            except Exception as exc:
                raise UtteranceError(entry.utt_id, str(exc)) from exc

        items = list(zip(manifest, matrices))
        if max_workers > 1:
            with ThreadPoolExecutor(max_workers=max_workers) as pool:
                decoded = list(pool.map(decode_one, items))
        else:
            decoded = [decode_one(item) for item in items]

        hyps = [result.best for result in decoded]
        if variant in ("lm_uw", "lm_he_uw"):
            hyps = _rewrite(hyps, assets)

        injections = sum(len(result.he_injections) for result in decoded)
        in_best = sum(
            sum(1 for rec in result.he_injections if rec.injected in result.best)
            for result in decoded
        )
        report = evaluate(
            [(entry.utt_id, ref, hyp) for entry, ref, hyp in zip(manifest, references, hyps)]
        )
        results.append(VariantResult(variant, report, injections, in_best))
    return results


def comparison_table(results: list[VariantResult]) -> str:
    """Render the ladder as a TSV table with a header row."""
    lines = ["variant\tcer\tedits\tref_len\the_injections\the_in_best"]
    for res in results:
        lines.append(
            f"{res.variant}\t{res.report.aggregate_cer:.6f}\t{res.report.total_edits}"
            f"\t{res.report.total_ref_len}\t{res.he_injections}\t{res.he_in_best}"
        )
    return "\n".join(lines) + "\n"


def save_report_tsv(report: EvalReport, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("id\tedits\tref_len\tcer\treference\thypothesis\n")
        for u in report.per_utterance:
            fh.write(f"{u.utt_id}\t{u.edits}\t{u.ref_len}\t{u.cer:.6f}\t{u.reference}\t{u.hypothesis}\n")
        fh.write(f"#aggregate\t{report.total_edits}\t{report.total_ref_len}\t{report.aggregate_cer:.6f}\t\t\n")


def save_report_jsonl(report: EvalReport, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for u in report.per_utterance:
            fh.write(
                json.dumps(
                    {
                        "id": u.utt_id,
                        "reference": u.reference,
                        "hypothesis": u.hypothesis,
                        "edits": u.edits,
                        "ref_len": u.ref_len,
                        "cer": u.cer,
                    },
                    ensure_ascii=False,
                    sort_keys=True,
                )
                + "\n"
            )
