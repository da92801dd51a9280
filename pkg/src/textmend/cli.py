"""Command-line front end: dataset generation, restoration runs, evaluation
reports, manifest-driven experiment sweeps, and resource building.

Verbs: attack, restore, eval, experiment, train-ngram, build-vistable.
Exit codes: 0 success, 2 configuration error, 3 scoring service required
but unavailable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import resources as bundled
from .attacks import (
    AttackConfigError,
    AttackSpec,
    attack_corpus,
)
from .lexicon import LexiconError, load_lexicon
from .metrics import edit_distance, ppr, semantic_similarity, similarity_metric_name
from .ngram import NGramError, train_ngram
from .pipeline import (
    ConfigError,
    PipelineConfig,
    RestorationPipeline,
    ScorerUnavailableError,
    VARIANTS,
    restore_with_baseline,
)
from .visualsim import BASE_CHARS, VisualTableError, build_table, save_table

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NO_SCORER = 3

_CONFIG_ERRORS = (
    ConfigError,
    AttackConfigError,
    LexiconError,
    NGramError,
    VisualTableError,
)


def _read_lines(path):
    if not os.path.exists(path):
        raise ConfigError(f"input file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh if line.strip()]


def _read_jsonl(path):
    if not os.path.exists(path):
        raise ConfigError(f"input file not found: {path}")
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}:{lineno}: bad JSON record: {exc}") from exc
    return records


def _write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, sort_keys=True, ensure_ascii=False) + "\n")


def _build_config(args) -> PipelineConfig:
    config = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    config.apply_overrides(args.set or [])
    return config


# ---------------------------------------------------------------------------
# Verbs
# ---------------------------------------------------------------------------


def cmd_attack(args) -> int:
    spec = AttackSpec.parse(args.spec, seed=args.seed)
    resources = bundled.default_attack_resources()
    sentences = _read_lines(args.corpus)
    attacked = attack_corpus(sentences, spec, resources)
    records = [
        {"id": i, "original": orig, "attacked": att, "scenario": spec.label}
        for i, (orig, att) in enumerate(zip(sentences, attacked))
    ]
    _write_jsonl(args.out, records)
    print(f"attacked {len(records)} sentences with {spec.label} -> {args.out}")
    return EXIT_OK


def _restore_records(records, variant, config):
    if variant == "baseline":
        lexicon = load_lexicon(
            config.lexicon_path, config.min_frequency, config.continuation_marker
        )
        engine = lambda s: restore_with_baseline(s, lexicon)  # noqa: E731
    else:
        config.cost_mode = variant
        pipeline = RestorationPipeline.from_config(config)
        engine = pipeline.restore_sentence
    out = []
    for record in records:
        report = engine(record["attacked"])
        merged = dict(record)
        merged["restored"] = report.restored
        merged["variant"] = variant
        merged["diagnostics"] = {
            "hypothesis_count": report.hypothesis_count,
            **{
                k: v
                for k, v in report.diagnostics.items()
                if k in ("segmentation_priors", "lm_scores", "final_probs",
                         "winner_index", "lm_fallback", "refinement_failed",
                         "hypothesis_losses", "empty_input")
            },
        }
        out.append(merged)
    return out


def _restore_chunk(config_dict, variant, records):
    return _restore_records(records, variant, PipelineConfig(**config_dict))


def _restore_dataset(records, variant, config, workers: int = 1):
    """Restore a dataset, optionally across a bounded pool of worker
    processes (each loads its own pipeline; chunks stay in input order, so
    the output is byte-identical to the sequential run).  Service-backed
    scorers keep a single multiplexed connection and run sequentially."""
    pooled = (
        workers > 1
        and variant != "baseline"
        and "service" not in (config.masked_scorer, config.sequence_scorer)
    )
    if not pooled:
        return _restore_records(records, variant, config)
    # validate up front so config errors surface before any fork
    PipelineConfig(**config.to_dict()).validate()
    from concurrent.futures import ProcessPoolExecutor

    bounds = [
        (len(records) * i // workers, len(records) * (i + 1) // workers)
        for i in range(workers)
    ]
    chunks = [records[lo:hi] for lo, hi in bounds if hi > lo]
    out = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(_restore_chunk, [config.to_dict()] * len(chunks),
                             [variant] * len(chunks), chunks):
            out.extend(part)
    return out


def cmd_restore(args) -> int:
    if args.variant not in VARIANTS:
        raise ConfigError(f"variant must be one of {', '.join(VARIANTS)}")
    config = _build_config(args)
    records = _read_jsonl(args.infile)
    restored = _restore_dataset(records, args.variant, config, args.workers)
    _write_jsonl(args.out, restored)
    print(f"restored {len(restored)} sentences ({args.variant}) -> {args.out}")
    return EXIT_OK


def _evaluate_pairs(records, scorer=None):
    pairs = [(r["restored"], r["original"]) for r in records]
    return {
        "n": len(pairs),
        "ppr": round(ppr(pairs), 4),
        "mean_edit_distance": round(
            sum(edit_distance(a, b) for a, b in pairs) / len(pairs), 4
        ),
        "similarity": round(
            sum(semantic_similarity(a, b, scorer) for a, b in pairs) / len(pairs), 4
        ),
        "similarity_metric": similarity_metric_name(scorer),
    }


def _similarity_scorer(endpoint):
    """Service client for MoverScore, or None for the token-F1 proxy."""
    if not endpoint:
        return None
    from .wire import ServiceClient, ServiceUnavailableError

    try:
        client = ServiceClient(endpoint)
        client.ping()
    except (ServiceUnavailableError, OSError) as exc:
        raise ScorerUnavailableError(str(exc)) from exc
    return client


def cmd_eval(args) -> int:
    records = _read_jsonl(args.restored)
    if not records:
        raise ConfigError("no records to evaluate")
    scorer = _similarity_scorer(args.service)
    by_key = {}
    for record in records:
        key = (record.get("scenario", "?"), record.get("variant", "?"))
        by_key.setdefault(key, []).append(record)
    rows = []
    for (scenario, variant), group in sorted(by_key.items()):
        row = {"scenario": scenario, "variant": variant}
        row.update(_evaluate_pairs(group, scorer))
        rows.append(row)
    report = {"rows": rows}
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for row in rows:
        print(
            f"{row['scenario']:>16} {row['variant']:>16}  ppr={row['ppr']:6.2f}  "
            f"editdist={row['mean_edit_distance']:6.3f}  "
            f"{row['similarity_metric']}={row['similarity']:.3f}"
        )
    return EXIT_OK


def cmd_experiment(args) -> int:
    with open(args.manifest, encoding="utf-8") as fh:
        try:
            manifest = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad manifest: {exc}") from exc
    if not manifest:
        raise ConfigError("empty manifest")
    for key in ("corpus", "scenarios", "variants"):
        if not manifest.get(key):
            raise ConfigError(f"manifest is missing {key!r}")
    seed = int(manifest.get("seed", 0))
    workers = int(manifest.get("workers", 1))
    os.makedirs(args.outdir, exist_ok=True)

    base_config = PipelineConfig()
    base_config.apply_overrides(
        [f"{k}={v}" for k, v in manifest.get("config", {}).items()]
    )
    scorer = _similarity_scorer(manifest.get("similarity_service"))
    resources = bundled.default_attack_resources()
    sentences = _read_lines(manifest["corpus"])

    rows = []
    for scenario in manifest["scenarios"]:
        spec = AttackSpec.parse(scenario, seed=seed)
        attacked = attack_corpus(sentences, spec, resources)
        records = [
            {"id": i, "original": orig, "attacked": att, "scenario": spec.label}
            for i, (orig, att) in enumerate(zip(sentences, attacked))
        ]
        slug = spec.label.replace(":", "").replace(",", "_").replace(".", "")
        _write_jsonl(os.path.join(args.outdir, f"attacked_{slug}.jsonl"), records)
        for variant in manifest["variants"]:
            if variant not in VARIANTS:
                raise ConfigError(f"manifest variant {variant!r} unknown")
            config = PipelineConfig(**base_config.to_dict())
            restored = _restore_dataset(records, variant, config, workers)
            _write_jsonl(
                os.path.join(args.outdir, f"restored_{slug}_{variant}.jsonl"), restored
            )
            row = {"scenario": spec.label, "variant": variant}
            row.update(_evaluate_pairs(restored, scorer))
            rows.append(row)
            print(
                f"{row['scenario']:>16} {row['variant']:>16}  ppr={row['ppr']:6.2f}  "
                f"editdist={row['mean_edit_distance']:6.3f}  "
                f"{row['similarity_metric']}={row['similarity']:.3f}"
            )

    report = {"manifest": manifest, "rows": rows}
    report_path = os.path.join(args.outdir, "report.json")
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")

    # summary table: one row per scenario, one column group per variant
    variants = list(manifest["variants"])
    by_cell = {(r["scenario"], r["variant"]): r for r in rows}
    header = f"{'scenario':>16}"
    for variant in variants:
        header += f" | {variant:^28}"
    lines = [header, f"{'':>16}" + f" | {'sim':>8} {'editdist':>9} {'ppr':>7}" * len(variants)]
    for scenario in manifest["scenarios"]:
        label = AttackSpec.parse(scenario, seed=seed).label
        line = f"{label:>16}"
        for variant in variants:
            cell = by_cell[(label, variant)]
            line += (
                f" | {cell['similarity']:8.3f} {cell['mean_edit_distance']:9.3f} "
                f"{cell['ppr']:7.2f}"
            )
        lines.append(line)
    summary_path = os.path.join(args.outdir, "summary.txt")
    with open(summary_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"report -> {report_path}")
    return EXIT_OK


def cmd_train_ngram(args) -> int:
    lexicon = load_lexicon(args.lexicon, args.min_frequency)
    model = train_ngram(args.corpus, lexicon, order=args.order, discount=args.discount)
    model.save(args.out)
    print(
        f"trained order-{args.order} model on {args.corpus} "
        f"({model.skipped_words} words skipped) -> {args.out}"
    )
    return EXIT_OK


def cmd_build_vistable(args) -> int:
    from .attacks import load_confusables

    codepoints = {ord(c) for c in BASE_CHARS}
    confusables = load_confusables(args.confusables)
    for lookalikes in confusables.values():
        for char in lookalikes:
            codepoints.add(ord(char))
    table = build_table(sorted(codepoints), args.font)
    for warning in table.build_warnings:
        print(f"warning: {warning}", file=sys.stderr)
    save_table(table, args.out)
    print(f"built similarity table with {len(table)} entries -> {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="textmend",
        description="Character-level attack generation and sentence restoration.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("attack", help="attack a plain-text corpus")
    p.add_argument("--corpus", required=True, help="input, one sentence per line")
    p.add_argument("--spec", required=True, help='attack spec, e.g. "dv:0.3" or "rd:0.3,rd:0.3"')
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output JSONL")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("restore", help="restore an attacked JSONL dataset")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--variant", default="domain_specific", help=", ".join(VARIANTS))
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_restore)

    p = sub.add_parser("eval", help="score restored output against originals")
    p.add_argument("--restored", required=True, help="JSONL with restored+original")
    p.add_argument("--out", required=True, help="report JSON")
    p.add_argument("--service", help="scoring service endpoint for MoverScore")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("experiment", help="manifest-driven scenario x variant sweep")
    p.add_argument("--manifest", required=True)
    p.add_argument("--outdir", required=True)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("train-ngram", help="train the built-in n-gram scorer")
    p.add_argument("--corpus", required=True)
    p.add_argument("--lexicon", default=bundled.data_path("lexicon.txt"))
    p.add_argument("--min-frequency", type=int, default=0)
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--discount", type=float, default=0.4)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train_ngram)

    p = sub.add_parser("build-vistable", help="rasterize a visual-similarity table")
    p.add_argument("--confusables", default=bundled.data_path("confusables.txt"))
    p.add_argument("--font", action="append", required=True, help="TTF path (repeatable)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_vistable)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScorerUnavailableError as exc:
        print(f"error: scoring service unavailable: {exc}", file=sys.stderr)
        return EXIT_NO_SCORER
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def entrypoint():
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
