"""Command-line entry point: decode / uw discover / uw apply / eval / compare.

Every command is reproducible: the same inputs and flags produce
byte-identical outputs.  Malformed input files exit with status 2 and a
message naming the file (and line where known); internal errors exit 1.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field

from .decoder import DecoderConfig, decode
from .emissions import load_emissions, load_vocab
from .errors import FormatError, HomodecodeError
from .evaluation import (
    VARIANTS,
    ComparisonAssets,
    UtteranceError,
    comparison_table,
    load_manifest,
    run_comparison,
    save_report_jsonl,
    save_report_tsv,
)
from .lexicon import build_homophone_index, load_cin_table, load_lexicon
from .ngram_lm import load_arpa
from .unified_writing import (
    UWConfig,
    apply_unified_writing,
    count_frequencies,
    discover_pairs,
    load_embeddings,
    load_frequency_table,
    load_pairs,
    save_pairs,
)


def _thread_count() -> int:
    raw = os.environ.get("HOMODECODE_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise FormatError(f"HOMODECODE_THREADS={raw!r} is not an integer")
    return os.cpu_count() or 1


@dataclass
class ToolConfig:
    """Paths plus decoder/UW settings, loaded from a JSON config file."""

    vocab: str
    lexicon: str | None = None
    lm: str | None = None
    embeddings: str | None = None
    frequency: str | None = None
    pairs: str | None = None
    cin_dir: str | None = None
    output_dir: str = "."
    decoder: DecoderConfig = field(default_factory=DecoderConfig)
    uw: UWConfig = field(default_factory=UWConfig)
    variants: tuple[str, ...] = VARIANTS
    uw_on_references: bool = False

    @classmethod
    def from_json(cls, path: str) -> "ToolConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: {exc}") from exc
        try:
            config = cls(
                vocab=obj["vocab"],
                lexicon=obj.get("lexicon"),
                lm=obj.get("lm"),
                embeddings=obj.get("embeddings"),
                frequency=obj.get("frequency"),
                pairs=obj.get("pairs"),
                cin_dir=obj.get("cin_dir"),
                output_dir=obj.get("output_dir", "."),
                decoder=DecoderConfig(**obj.get("decoder", {})),
                uw=UWConfig(**obj.get("uw", {})),
                variants=tuple(obj.get("variants", VARIANTS)),
                uw_on_references=bool(obj.get("uw_on_references", False)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"{path}: bad config: {exc}") from exc
        for name in ("vocab", "lexicon", "lm", "embeddings", "frequency", "pairs", "cin_dir"):
            value = getattr(config, name)
            if value is not None and not os.path.exists(value):
                raise FormatError(f"{path}: {name} path {value!r} does not exist")
        return config


def _write_jsonl(path: str, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")


def cmd_decode(args) -> int:
    vocab = load_vocab(args.vocab)
    lexicon = load_lexicon(args.lexicon)
    index = build_homophone_index(lexicon)
    lm = load_arpa(args.lm)
    emissions = load_emissions(args.emissions, vocab)
    config = DecoderConfig(
        beam_size=args.beam,
        alpha=args.alpha,
        beta=args.beta,
        gamma=args.gamma,
        he_enabled=args.he,
        nbest=args.nbest,
        rescore_enabled=args.rescore,
    )
    result = decode(emissions, vocab, index, lm, config)
    print(result.best)
    if args.nbest_out:
        _write_jsonl(
            args.nbest_out,
            (
                {
                    "transcript": e.transcript,
                    "fused_score": e.fused_score,
                    "acoustic_score": e.acoustic_score,
                    "lm_score": e.lm_score,
                }
                for e in result.nbest
            ),
        )
    if args.audit:
        _write_jsonl(
            args.audit,
            (
                {"step": r.step, "source": r.source, "injected": r.injected, "prob": r.prob}
                for r in result.he_injections
            ),
        )
    return 0


def _load_cin_dir(path: str):
    names = sorted(n for n in os.listdir(path) if n.endswith(".cin"))
    if not names:
        raise FormatError(f"no .cin files in {path!r}")
    return [load_cin_table(os.path.join(path, name)) for name in names]


def cmd_uw_discover(args) -> int:
    lexicon = load_lexicon(args.lexicon)
    glyphs = _load_cin_dir(args.cin_dir)
    emb = load_embeddings(args.embeddings)
    config = UWConfig(
        jyutping_max_distance=args.jyutping_max,
        glyph_max_distance=args.glyph_max,
        cosine_min=args.cosine_min,
        checker_min=args.checker_min,
        min_methods=args.min_methods,
    )
    pairs = discover_pairs(lexicon, glyphs, emb, config)
    save_pairs(pairs, args.out)
    print(len(pairs))
    return 0


def cmd_uw_apply(args) -> int:
    pairs = load_pairs(args.pairs)
    emb = load_embeddings(args.embeddings)
    with open(args.corpus, encoding="utf-8") as fh:
        corpus = fh.read().splitlines()
    freq = load_frequency_table(args.freq) if args.freq else count_frequencies(corpus)
    config = UWConfig(checker_min=args.checker_min)
    rewritten, audit = apply_unified_writing(corpus, pairs, freq, emb, config)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        for sentence in rewritten:
            fh.write(sentence + "\n")
    if args.audit:
        _write_jsonl(
            args.audit,
            (
                {
                    "sentence_index": r.sentence_index,
                    "variant": r.variant,
                    "canonical": r.canonical,
                    "score": r.score,
                    "kept": r.kept,
                }
                for r in audit
            ),
        )
    return 0


def cmd_compare(args) -> int:
    config = ToolConfig.from_json(args.config)
    manifest = load_manifest(args.manifest)
    vocab = load_vocab(config.vocab)
    index = build_homophone_index(load_lexicon(config.lexicon)) if config.lexicon else None
    lm = load_arpa(config.lm) if config.lm else None
    variants = tuple(args.variants.split(",")) if args.variants else config.variants
    for variant in variants:
        if variant not in VARIANTS:
            raise FormatError(f"unknown variant {variant!r}; pick from {', '.join(VARIANTS)}")

    uw_needed = any(v.endswith("uw") for v in variants) or config.uw_on_references
    uw_pairs = uw_freq = uw_emb = None
    if uw_needed:
        if not (config.pairs and config.embeddings):
            raise FormatError("UW variants need 'pairs' and 'embeddings' in the config")
        uw_pairs = load_pairs(config.pairs)
        uw_emb = load_embeddings(config.embeddings)
        if config.frequency:
            uw_freq = load_frequency_table(config.frequency)
        else:
            uw_freq = count_frequencies([entry.reference for entry in manifest])

    assets = ComparisonAssets(
        vocab=vocab,
        index=index,
        lm=lm,
        decoder_config=config.decoder,
        uw_pairs=uw_pairs,
        uw_freq=uw_freq,
        uw_emb=uw_emb,
        uw_config=config.uw,
        uw_on_references=config.uw_on_references,
    )
    results = run_comparison(manifest, assets, variants, max_workers=_thread_count())
    table = comparison_table(results)
    sys.stdout.write(table)
    os.makedirs(config.output_dir, exist_ok=True)
    with open(os.path.join(config.output_dir, "comparison.tsv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(table)
    for res in results:
        save_report_jsonl(res.report, os.path.join(config.output_dir, f"report_{res.variant}.jsonl"))
        save_report_tsv(res.report, os.path.join(config.output_dir, f"report_{res.variant}.tsv"))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="homodecode",
        description="Homophone-extension CTC beam search decoding and unified-writing normalization",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "decode",
        help="decode one emission matrix to text",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p.add_argument("--emissions", required=True, help="EMAT emission matrix file")
    p.add_argument("--vocab", required=True, help="vocabulary file")
    p.add_argument("--lexicon", required=True, help="Jyutping lexicon TSV")
    p.add_argument("--lm", required=True, help="ARPA language model")
    p.add_argument("--alpha", type=float, default=0.45, help="LM shallow fusion weight")
    p.add_argument("--beta", type=float, default=1.55, help="length bonus weight")
    p.add_argument("--beam", type=int, default=20, help="beam size")
    p.add_argument("--gamma", type=float, default=0.5, help="homophone extension mixing weight")
    p.add_argument("--he", action=argparse.BooleanOptionalAction, default=True,
                   help="homophone extension")
    p.add_argument("--nbest", type=int, default=10, help="n-best list size")
    p.add_argument("--rescore", action=argparse.BooleanOptionalAction, default=True,
                   help="final n-best LM rescoring")
    p.add_argument("--nbest-out", help="write the n-best list as JSON-lines")
    p.add_argument("--audit", help="write homophone injection audit as JSON-lines")
    p.set_defaults(func=cmd_decode)

    uw = sub.add_parser("uw", help="unified writing tools")
    uw_sub = uw.add_subparsers(dest="uw_command", required=True)

    p = uw_sub.add_parser(
        "discover",
        help="discover variant character pairs",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p.add_argument("--lexicon", required=True, help="Jyutping lexicon TSV")
    p.add_argument("--cin-dir", required=True, help="directory of .cin glyph tables")
    p.add_argument("--embeddings", required=True, help="character embedding table")
    p.add_argument("--out", required=True, help="output pairs TSV")
    p.add_argument("--jyutping-max", type=float, default=0.0,
                   help="max normalized Jyutping edit distance")
    p.add_argument("--glyph-max", type=float, default=0.25,
                   help="max normalized glyph-code edit distance")
    p.add_argument("--cosine-min", type=float, default=0.5, help="min embedding cosine")
    p.add_argument("--checker-min", type=float, default=0.9, help="min checker score")
    p.add_argument("--min-methods", type=int, default=None,
                   help="glyph methods that must pass (default: all shared)")
    p.set_defaults(func=cmd_uw_discover)

    p = uw_sub.add_parser(
        "apply",
        help="rewrite a corpus with discovered pairs",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p.add_argument("--pairs", required=True, help="pairs TSV from 'uw discover'")
    p.add_argument("--corpus", required=True, help="input corpus, one sentence per line")
    p.add_argument("--embeddings", required=True, help="character embedding table")
    p.add_argument("--out", required=True, help="rewritten corpus output")
    p.add_argument("--freq", help="frequency TSV (default: counted from the corpus)")
    p.add_argument("--checker-min", type=float, default=0.9, help="min checker score")
    p.add_argument("--audit", help="write rewrite audit as JSON-lines")
    p.set_defaults(func=cmd_uw_apply)

    for name, help_text in (
        ("eval", "decode a manifest and report CER per method variant"),
        ("compare", "compare method variants over a manifest"),
    ):
        p = sub.add_parser(name, help=help_text, formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        p.add_argument("--manifest", required=True, help="JSON-lines utterance manifest")
        p.add_argument("--config", required=True, help="tool config JSON")
        p.add_argument("--variants", default=None,
                       help="comma-separated variant list (default: from config)")
        p.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UtteranceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2 if isinstance(exc.__cause__, (FormatError, OSError)) else 1
    except (FormatError, HomodecodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
