"""Command-line entry points.

Every subcommand reads files named on the command line, writes a report to
stdout or ``--out``, and exits 0 on success, 1 when a verification command
found violations, 2 on input or validation problems, and 3 when numerical
optimization failed. Reports never embed timestamps, so identical inputs
produce byte-identical output; wall-clock metadata goes to the separate
``--manifest`` file on request.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .corpus import (
    Dataset,
    MirrorPairing,
    infer_mirror_pairing,
    infer_self_pairing,
    load_dataset,
    subsample_pairs,
)
from .cues import (
    GuidelineThresholds,
    compute_cue_stats,
    guideline_check,
    verify_balance,
    RANKING_KEYS,
)
from .errors import CuecheckError, TrainingDivergedError
from .frozen import evaluate_frozen, load_embeddings, train_frozen
from .pmi import (
    DEFAULT_SMOOTHING,
    DEFAULT_WINDOW,
    build_cooccurrence,
    default_stopwords,
    load_stopwords,
    load_table,
    pmi_solve,
    save_table,
)
from .scorer import (
    SENSITIVITY_TARGETS,
    ScorerHyper,
    SensitivityDelta,
    cue_sensitivity,
    load_model,
    save_model,
    sensitivity_delta,
    train_scorer,
)
from .solvers import (
    EasyHardSplit,
    ObliviousHyper,
    PredictionSet,
    easy_hard_split,
    merge_prediction_sets,
    predict_dataset,
    train_oblivious,
)
from .stats import (
    AccuracyReport,
    RatingsMatrix,
    approx_randomization_test,
    fleiss_kappa,
)
from .tokenizer import TokenizerConfig

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_INPUT = 2
EXIT_NUMERICAL = 3


def _add_tokenizer_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("tokenizer")
    group.add_argument("--cased", action="store_true", help="keep letter case")
    group.add_argument(
        "--keep-punctuation", action="store_true", help="leave punctuation inside tokens"
    )
    group.add_argument(
        "--punctuation-tokens",
        action="store_true",
        help="split punctuation runs into tokens of their own",
    )


def _tokenizer(args: argparse.Namespace) -> TokenizerConfig:
    return TokenizerConfig(
        lowercase=not args.cased,
        strip_punctuation=not (args.keep_punctuation or args.punctuation_tokens),
        punctuation_as_tokens=args.punctuation_tokens,
    )


def _add_manifest_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--manifest",
        metavar="PATH",
        help="write run metadata (argv, input hashes, timestamp) as JSON",
    )


def _add_out_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _write_manifest(args: argparse.Namespace, command: str, inputs: Sequence[str]) -> None:
    if not getattr(args, "manifest", None):
        return
    payload = {
        "command": command,
        "argv": sys.argv[1:],
        "version": __version__,
        "inputs": {str(p): _sha256(Path(p)) for p in inputs},
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    Path(args.manifest).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _emit(text: str, args: argparse.Namespace) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if getattr(args, "out", None):
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load(path: str) -> Dataset:
    return load_dataset(path)


def _pairing_for(args: argparse.Namespace, dataset: Dataset) -> tuple[Dataset, MirrorPairing]:
    """Combined dataset plus pairing, from one self-mirrored file or an
    original/mirrored file pair."""
    if getattr(args, "mirrored", None):
        mirrored = _load(args.mirrored)
        pairing = infer_mirror_pairing(dataset, mirrored)
        combined = Dataset(
            name=f"{dataset.name}+{mirrored.name}",
            instances=tuple(dataset.instances) + tuple(mirrored.instances),
        )
        return combined, pairing
    return dataset, infer_self_pairing(dataset)


def _parse_subsample(spec: str) -> tuple[str, float]:
    kind, _, raw = spec.partition(":")
    if kind not in ("pairs", "instances") or not raw:
        raise CuecheckError(
            f"--subsample must look like pairs:<fraction> or instances:<fraction>, got {spec!r}"
        )
    try:
        fraction = float(raw)
    except ValueError:
        raise CuecheckError(f"--subsample fraction {raw!r} is not a number") from None
    if not 0.0 < fraction <= 1.0:
        raise CuecheckError(f"--subsample fraction must be in (0, 1], got {fraction}")
    return kind, fraction


def _apply_subsample(dataset: Dataset, args: argparse.Namespace) -> Dataset:
    if not getattr(args, "subsample", None):
        return dataset
    kind, fraction = _parse_subsample(args.subsample)
    seed = getattr(args, "subsample_seed", 0)
    if kind == "pairs":
        pairing = infer_self_pairing(dataset)
        return subsample_pairs(dataset, pairing, fraction, seed)
    ids = sorted(dataset.ids())
    n_keep = int(round(len(ids) * fraction))
    rng = np.random.default_rng(seed)
    keep = {ids[i] for i in rng.permutation(len(ids))[:n_keep]}
    return dataset.restrict(keep, name=f"{dataset.name}[instances:{fraction}]")


def _seed_list(raw: str) -> list[int]:
    try:
        seeds = [int(part) for part in raw.split(",") if part.strip() != ""]
    except ValueError:
        raise CuecheckError(f"--seeds must be comma-separated integers, got {raw!r}") from None
    if not seeds:
        raise CuecheckError("--seeds is empty")
    if len(set(seeds)) != len(seeds):
        raise CuecheckError("--seeds contains duplicates")
    return seeds


# --- audit -----------------------------------------------------------------


def _cmd_audit(args: argparse.Namespace) -> int:
    config = _tokenizer(args)
    dataset = _apply_subsample(_load(args.dataset), args)
    report = compute_cue_stats(dataset, config, ranking_key=args.rank_by)
    if args.format == "json":
        _emit(report.to_json(top=args.top), args)
    else:
        _emit(report.to_markdown(top=args.top), args)
    _write_manifest(args, "audit", [args.dataset])
    return EXIT_OK


# --- balance-check ---------------------------------------------------------


def _cmd_balance_check(args: argparse.Namespace) -> int:
    config = _tokenizer(args)
    dataset = _load(args.dataset)
    combined, pairing = _pairing_for(args, dataset)
    unmatched = tuple(pairing.unmatched_original) + tuple(pairing.unmatched_mirrored)
    if unmatched:
        sys.stderr.write(
            f"error: {len(unmatched)} instances have no mirror partner: "
            f"{sorted(unmatched)[:10]}\n"
        )
        return EXIT_INPUT
    report = verify_balance(combined, pairing, config)
    if args.format == "json":
        payload = {
            "dataset": combined.name,
            "n": report.n,
            "n_pairs": report.n_pairs,
            "balanced": report.ok,
            "token_violations": [
                {
                    "token": v.token,
                    "applicability": v.applicability,
                    "gold_side_count": v.gold_side_count,
                    "productivity": v.productivity,
                }
                for v in report.token_violations
            ],
            "alternative_imbalances": [
                {"text": a.text, "correct": a.correct_count, "wrong": a.wrong_count}
                for a in report.alternative_imbalances
            ],
        }
        _emit(json.dumps(payload, indent=2, sort_keys=True), args)
    else:
        lines = [
            f"instances: {report.n}",
            f"pairs: {report.n_pairs}",
            f"balanced: {'yes' if report.ok else 'no'}",
        ]
        for v in report.token_violations:
            lines.append(
                f"token violation: {v.token!r} applicability={v.applicability} "
                f"productivity={v.productivity:.3f}"
            )
        for a in report.alternative_imbalances:
            lines.append(
                f"alternative imbalance: {a.text!r} correct={a.correct_count} "
                f"wrong={a.wrong_count}"
            )
        _emit("\n".join(lines), args)
    inputs = [args.dataset] + ([args.mirrored] if args.mirrored else [])
    _write_manifest(args, "balance-check", inputs)
    return EXIT_OK if report.ok else EXIT_VIOLATIONS


# --- guidelines ------------------------------------------------------------


def _cmd_guidelines(args: argparse.Namespace) -> int:
    config = _tokenizer(args)
    dataset = _load(args.dataset)
    thresholds = GuidelineThresholds(
        min_premise_overlap=args.min_premise_overlap,
        max_premise_alt_overlap=args.max_premise_alt_overlap,
        min_length_ratio=args.min_length_ratio,
        max_length_ratio=args.max_length_ratio,
    )
    if args.mirrored:
        mirrored = _load(args.mirrored)
        pairing = infer_mirror_pairing(dataset, mirrored)
        report = guideline_check(pairing, dataset, mirrored, thresholds, config)
    else:
        pairing = infer_self_pairing(dataset)
        report = guideline_check(pairing, dataset, dataset, thresholds, config)
    if args.format == "json":
        payload = {
            "ok": report.ok,
            "pairs": [
                {
                    "original_id": r.original_id,
                    "mirrored_id": r.mirrored_id,
                    "premise_overlap": r.premise_overlap,
                    "premise_alt_overlap": r.premise_alt_overlap,
                    "length_ratio": r.length_ratio,
                    "violations": list(r.violations),
                }
                for r in report.records
            ],
        }
        _emit(json.dumps(payload, indent=2, sort_keys=True), args)
    else:
        lines = [f"pairs checked: {len(report.records)}", f"ok: {'yes' if report.ok else 'no'}"]
        for r in report.records:
            if r.violations:
                lines.append(
                    f"pair {r.original_id}->{r.mirrored_id}: {', '.join(r.violations)} "
                    f"(premise-overlap={r.premise_overlap:.3f} "
                    f"premise-alt-overlap={r.premise_alt_overlap:.3f} "
                    f"length-ratio={r.length_ratio:.3f})"
                )
        _emit("\n".join(lines), args)
    inputs = [args.dataset] + ([args.mirrored] if args.mirrored else [])
    _write_manifest(args, "guidelines", inputs)
    return EXIT_OK if report.ok else EXIT_VIOLATIONS


# --- ablate ----------------------------------------------------------------


def _cmd_ablate(args: argparse.Namespace) -> int:
    config = _tokenizer(args)
    train = _apply_subsample(_load(args.train), args)
    test = _load(args.test)
    seeds = _seed_list(args.seeds)
    hyper = ObliviousHyper(epochs=args.epochs, learning_rate=args.learning_rate, l2=args.l2)
    runs = []
    accuracies = []
    for seed in seeds:
        model = train_oblivious(train, config, hyper, seed)
        predictions = predict_dataset(model, test, seed=seed)
        correct = predictions.correctness(test)[seed]
        accuracies.append((seed, sum(correct.values()) / len(correct)))
        runs.append(predictions)
    merged = merge_prediction_sets(runs, model_tag="premise-oblivious")
    if args.predictions:
        Path(args.predictions).write_text(merged.to_csv(), encoding="utf-8")
    report = AccuracyReport("premise-oblivious", tuple(accuracies))
    if args.format == "json":
        payload = {
            "model": report.model_tag,
            "train": train.name,
            "test": test.name,
            "per_seed": {str(s): a for s, a in report.per_seed},
            "mean": report.mean,
            "std": report.std,
            "formatted": report.formatted(),
        }
        _emit(json.dumps(payload, indent=2, sort_keys=True), args)
    else:
        lines = ["| Model | Accuracy |", "|---|---|", report.markdown_row()]
        for seed, acc in report.per_seed:
            lines.append(f"| seed {seed} | {100 * acc:.1f} |")
        _emit("\n".join(lines), args)
    _write_manifest(args, "ablate", [args.train, args.test])
    return EXIT_OK


# --- split -----------------------------------------------------------------


def _cmd_split(args: argparse.Namespace) -> int:
    test = _load(args.test)
    predictions = PredictionSet.from_csv(Path(args.predictions).read_text(encoding="utf-8"))
    split = easy_hard_split(test, predictions)
    _emit(split.to_json(), args)
    _write_manifest(args, "split", [args.test, args.predictions])
    return EXIT_OK


# --- solve -----------------------------------------------------------------


def _cmd_solve(args: argparse.Namespace) -> int:
    config = _tokenizer(args)
    dataset = _load(args.dataset)
    if bool(args.corpus) == bool(args.table):
        raise CuecheckError("pass exactly one of --corpus or --table")
    if args.corpus:
        table = build_cooccurrence(
            Path(args.corpus), window=args.window, config=config, directional=args.directional
        )
    else:
        table = load_table(args.table)
    if args.save_table:
        save_table(table, args.save_table)
    if args.stopwords == "none":
        stopwords = frozenset()
    elif args.stopwords == "default":
        stopwords = default_stopwords()
    else:
        stopwords = load_stopwords(args.stopwords)
    correct = 0
    ties = 0
    floored = 0
    for instance in dataset:
        decision = pmi_solve(instance, table, stopwords, config, smoothing=args.smoothing)
        correct += 1 if decision.choice == instance.gold else 0
        ties += 1 if decision.tie else 0
        floored += 1 if decision.empty_alternatives else 0
    payload = {
        "dataset": dataset.name,
        "n": len(dataset),
        "accuracy": correct / len(dataset),
        "ties": ties,
        "floored_instances": floored,
        "window": table.window,
        "directional": table.directional,
        "smoothing": args.smoothing,
        "corpus_fingerprint": table.fingerprint,
        "corpus_windows": table.total_windows,
    }
    if args.format == "json":
        _emit(json.dumps(payload, indent=2, sort_keys=True), args)
    else:
        _emit(
            "\n".join(
                [
                    f"dataset: {payload['dataset']} (n={payload['n']})",
                    f"accuracy: {100 * payload['accuracy']:.1f}",
                    f"ties: {ties}",
                    f"floored instances: {floored}",
                    f"corpus: {table.total_windows} windows, fingerprint {table.fingerprint}",
                ]
            ),
            args,
        )
    inputs = [args.dataset] + ([args.corpus] if args.corpus else [args.table])
    if args.stopwords not in ("none", "default"):
        inputs.append(args.stopwords)
    _write_manifest(args, "solve", inputs)
    return EXIT_OK


# --- sensitivity -----------------------------------------------------------


def _cmd_sensitivity(args: argparse.Namespace) -> int:
    config = _tokenizer(args)
    if bool(args.train) == bool(args.model):
        raise CuecheckError("pass exactly one of --train or --model")
    inputs = []
    if args.model:
        model = load_model(args.model)
        inputs.append(args.model)
    else:
        train = _load(args.train)
        inputs.append(args.train)
        valid = None
        if args.valid:
            valid = _load(args.valid)
            inputs.append(args.valid)
        hyper = ScorerHyper(
            dim=args.dim,
            epochs=args.epochs,
            learning_rate=args.learning_rate,
        )
        model, _ = train_scorer(train, valid, config, hyper, seed=args.seed)
    if args.save_model:
        save_model(model, args.save_model)
    dataset = _load(args.dataset)
    inputs.append(args.dataset)
    if args.mirrored:
        mirrored = _load(args.mirrored)
        inputs.append(args.mirrored)
        delta = sensitivity_delta(model, dataset, mirrored, target=args.target)
        shown = delta.top(args.top) if args.top else delta.rows
        if args.format == "csv":
            _emit(SensitivityDelta(delta.target, shown).to_csv(), args)
        elif args.format == "json":
            _emit(SensitivityDelta(delta.target, shown).to_json(), args)
        else:
            lines = ["| Token | Original | Mirrored | Delta |", "|---|---|---|---|"]
            for row in shown:
                lines.append(
                    f"| {row.token} | {row.original:.4f} | {row.mirrored:.4f} "
                    f"| {row.delta:+.4f} |"
                )
            _emit("\n".join(lines), args)
    else:
        table = cue_sensitivity(model, dataset, target=args.target)
        rows = sorted(table.values(), key=lambda t: (-t.mean_all, t.token))
        if args.top:
            rows = rows[: args.top]
        if args.format == "csv":
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(["token", "mean_all", "mean_present", "n_present"])
            for r in rows:
                writer.writerow(
                    [r.token, f"{r.mean_all:.6f}", f"{r.mean_present:.6f}", r.n_present]
                )
            _emit(buf.getvalue(), args)
        elif args.format == "json":
            payload = {
                "target": args.target,
                "rows": [
                    {
                        "token": r.token,
                        "mean_all": r.mean_all,
                        "mean_present": r.mean_present,
                        "n_present": r.n_present,
                    }
                    for r in rows
                ],
            }
            _emit(json.dumps(payload, indent=2, sort_keys=True), args)
        else:
            lines = ["| Token | Mean | Mean (present) | Instances |", "|---|---|---|---|"]
            for r in rows:
                lines.append(
                    f"| {r.token} | {r.mean_all:.4f} | {r.mean_present:.4f} | {r.n_present} |"
                )
            _emit("\n".join(lines), args)
    _write_manifest(args, "sensitivity", inputs)
    return EXIT_OK


# --- sigtest ---------------------------------------------------------------


def _cmd_sigtest(args: argparse.Namespace) -> int:
    test = _load(args.test)
    predictions = PredictionSet.from_csv(Path(args.predictions).read_text(encoding="utf-8"))
    split = EasyHardSplit.from_json(Path(args.split).read_text(encoding="utf-8"))
    correctness = predictions.correctness(test)
    seed = args.seed if args.seed is not None else predictions.seeds[0]
    if seed not in correctness:
        raise CuecheckError(f"seed {seed} not present in predictions (have {predictions.seeds})")
    per_id = correctness[seed]
    unassigned = [i for i in per_id if i not in split.easy_ids and i not in split.hard_ids]
    if unassigned:
        raise CuecheckError(f"{len(unassigned)} test ids missing from the split")
    easy = [per_id[i] for i in sorted(split.easy_ids) if i in per_id]
    hard = [per_id[i] for i in sorted(split.hard_ids) if i in per_id]
    if not easy or not hard:
        raise CuecheckError("both split groups must be non-empty on this test set")
    result = approx_randomization_test(easy, hard, rounds=args.rounds, seed=args.rng_seed)
    payload = {
        "seed": seed,
        "easy_n": len(easy),
        "hard_n": len(hard),
        "easy_accuracy": sum(easy) / len(easy),
        "hard_accuracy": sum(hard) / len(hard),
        "statistic": result.statistic,
        "p_value": result.p_value,
        "rounds": result.rounds,
        "count_ge": result.count_ge,
    }
    if args.format == "json":
        _emit(json.dumps(payload, indent=2, sort_keys=True), args)
    else:
        _emit(
            "\n".join(
                [
                    f"easy: {payload['easy_n']} items, accuracy {100 * payload['easy_accuracy']:.1f}",
                    f"hard: {payload['hard_n']} items, accuracy {100 * payload['hard_accuracy']:.1f}",
                    f"|gap|: {100 * result.statistic:.1f}",
                    f"p-value: {result.p_value:.6f} ({result.rounds} rounds)",
                ]
            ),
            args,
        )
    _write_manifest(args, "sigtest", [args.test, args.predictions, args.split])
    return EXIT_OK


# --- kappa -----------------------------------------------------------------


def _cmd_kappa(args: argparse.Namespace) -> int:
    matrix = RatingsMatrix.from_csv(Path(args.ratings).read_text(encoding="utf-8"))
    value = fleiss_kappa(matrix)
    if args.format == "json":
        payload = {
            "kappa": value,
            "items": len(matrix.items),
            "raters": len(matrix.raters),
            "categories": list(matrix.categories),
        }
        _emit(json.dumps(payload, indent=2, sort_keys=True), args)
    else:
        _emit(
            f"kappa: {value:.4f} ({len(matrix.items)} items, "
            f"{len(matrix.raters)} raters, {len(matrix.categories)} categories)",
            args,
        )
    _write_manifest(args, "kappa", [args.ratings])
    return EXIT_OK


# --- frozen ----------------------------------------------------------------


def _cmd_frozen(args: argparse.Namespace) -> int:
    embeddings = load_embeddings(args.embeddings)
    train = _load(args.train)
    valid = _load(args.valid)
    test = _load(args.test)
    split = None
    if args.split:
        split = EasyHardSplit.from_json(Path(args.split).read_text(encoding="utf-8"))
    model, selection = train_frozen(embeddings, train, valid, epochs=args.epochs)
    report = evaluate_frozen(model, embeddings, test, split)
    payload = {
        "encoder": embeddings.encoder,
        "dim": embeddings.dim,
        "c": model.c,
        "validation_accuracy": {format(c, "g"): a for c, a in selection.validation_accuracy.items()},
        "test_accuracy": report.accuracy,
        "tie_rate": report.tie_rate,
        "n": report.n,
    }
    if split is not None:
        payload.update(
            {
                "easy_accuracy": report.easy_accuracy,
                "hard_accuracy": report.hard_accuracy,
                "easy_n": report.easy_n,
                "hard_n": report.hard_n,
            }
        )
    if args.format == "json":
        _emit(json.dumps(payload, indent=2, sort_keys=True), args)
    else:
        lines = [
            f"encoder: {embeddings.encoder} (dim {embeddings.dim})",
            f"selected C: {model.c:g}",
            f"test accuracy: {100 * report.accuracy:.1f} (n={report.n}, ties {report.tie_rate:.3f})",
        ]
        if split is not None and report.easy_accuracy is not None:
            lines.append(f"easy accuracy: {100 * report.easy_accuracy:.1f} (n={report.easy_n})")
        if split is not None and report.hard_accuracy is not None:
            lines.append(f"hard accuracy: {100 * report.hard_accuracy:.1f} (n={report.hard_n})")
        _emit("\n".join(lines), args)
    inputs = [args.embeddings, args.train, args.valid, args.test]
    if args.split:
        inputs.append(args.split)
    _write_manifest(args, "frozen", inputs)
    return EXIT_OK


# --- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cuecheck",
        description="Detect, quantify and neutralize single-token cues in "
        "two-alternative choice datasets.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("audit", help="rank tokens by cue statistics")
    p.add_argument("--dataset", required=True)
    p.add_argument("--rank-by", choices=RANKING_KEYS, default="coverage")
    p.add_argument("--top", type=int, default=20)
    p.add_argument("--format", choices=("json", "md"), default="md")
    p.add_argument("--subsample", metavar="pairs:F|instances:F")
    p.add_argument("--subsample-seed", type=int, default=0)
    _add_tokenizer_flags(p)
    _add_out_flag(p)
    _add_manifest_flag(p)
    p.set_defaults(func=_cmd_audit)

    p = sub.add_parser("balance-check", help="verify mirrored-dataset balance")
    p.add_argument("--dataset", required=True, help="combined file, or originals when --mirrored is given")
    p.add_argument("--mirrored", help="mirrored counterparts in a separate file")
    p.add_argument("--format", choices=("json", "text"), default="text")
    _add_tokenizer_flags(p)
    _add_out_flag(p)
    _add_manifest_flag(p)
    p.set_defaults(func=_cmd_balance_check)

    p = sub.add_parser("guidelines", help="check mirrored premises against authoring rules")
    p.add_argument("--dataset", required=True)
    p.add_argument("--mirrored")
    p.add_argument("--min-premise-overlap", type=float, default=GuidelineThresholds.min_premise_overlap)
    p.add_argument(
        "--max-premise-alt-overlap", type=float, default=GuidelineThresholds.max_premise_alt_overlap
    )
    p.add_argument("--min-length-ratio", type=float, default=GuidelineThresholds.min_length_ratio)
    p.add_argument("--max-length-ratio", type=float, default=GuidelineThresholds.max_length_ratio)
    p.add_argument("--format", choices=("json", "text"), default="text")
    _add_tokenizer_flags(p)
    _add_out_flag(p)
    _add_manifest_flag(p)
    p.set_defaults(func=_cmd_guidelines)

    p = sub.add_parser("ablate", help="train and evaluate the premise-oblivious model")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--seeds", default="0,1,2")
    p.add_argument("--epochs", type=int, default=ObliviousHyper.epochs)
    p.add_argument("--learning-rate", type=float, default=ObliviousHyper.learning_rate)
    p.add_argument("--l2", type=float, default=ObliviousHyper.l2)
    p.add_argument("--predictions", metavar="PATH", help="write per-seed choices as CSV")
    p.add_argument("--format", choices=("json", "md"), default="md")
    p.add_argument("--subsample", metavar="pairs:F|instances:F")
    p.add_argument("--subsample-seed", type=int, default=0)
    _add_tokenizer_flags(p)
    _add_out_flag(p)
    _add_manifest_flag(p)
    p.set_defaults(func=_cmd_ablate)

    p = sub.add_parser("split", help="partition a test set into easy and hard instances")
    p.add_argument("--test", required=True)
    p.add_argument("--predictions", required=True, help="CSV from ablate --predictions")
    _add_out_flag(p)
    _add_manifest_flag(p)
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("solve", help="run the co-occurrence association solver")
    p.add_argument("--dataset", required=True)
    p.add_argument("--corpus", help="background text file to count")
    p.add_argument("--table", help="previously saved co-occurrence table")
    p.add_argument("--save-table", metavar="PATH")
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW)
    p.add_argument("--smoothing", type=float, default=DEFAULT_SMOOTHING)
    p.add_argument("--directional", action="store_true")
    p.add_argument(
        "--stopwords",
        default="default",
        help="stopword file, 'default' for the bundled list, 'none' to disable",
    )
    p.add_argument("--format", choices=("json", "text"), default="text")
    _add_tokenizer_flags(p)
    _add_out_flag(p)
    _add_manifest_flag(p)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("sensitivity", help="token sensitivity of the trained scorer")
    p.add_argument("--train", help="train a scorer on this dataset")
    p.add_argument("--valid", help="validation set for checkpoint selection")
    p.add_argument("--model", help="load a previously saved scorer instead of training")
    p.add_argument("--save-model", metavar="PATH")
    p.add_argument("--dataset", required=True, help="dataset whose sensitivities are reported")
    p.add_argument("--mirrored", help="second dataset; report per-token differences")
    p.add_argument("--target", choices=SENSITIVITY_TARGETS, default="gold")
    p.add_argument("--top", type=int, default=0, help="limit rows (0 = all)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=int, default=ScorerHyper.dim)
    p.add_argument("--epochs", type=int, default=ScorerHyper.epochs)
    p.add_argument("--learning-rate", type=float, default=ScorerHyper.learning_rate)
    p.add_argument("--format", choices=("csv", "json", "md"), default="md")
    _add_tokenizer_flags(p)
    _add_out_flag(p)
    _add_manifest_flag(p)
    p.set_defaults(func=_cmd_sensitivity)

    p = sub.add_parser("sigtest", help="randomization test of the easy/hard accuracy gap")
    p.add_argument("--test", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--split", required=True, help="JSON from the split command")
    p.add_argument("--seed", type=int, help="which prediction seed to test (default: lowest)")
    p.add_argument("--rounds", type=int, default=10_000)
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--format", choices=("json", "text"), default="text")
    _add_out_flag(p)
    _add_manifest_flag(p)
    p.set_defaults(func=_cmd_sigtest)

    p = sub.add_parser("kappa", help="chance-corrected agreement of categorical ratings")
    p.add_argument("--ratings", required=True, help="CSV with header item,rater,label")
    p.add_argument("--format", choices=("json", "text"), default="text")
    _add_out_flag(p)
    _add_manifest_flag(p)
    p.set_defaults(func=_cmd_kappa)

    p = sub.add_parser("frozen", help="linear SVM over frozen embeddings")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--train", required=True)
    p.add_argument("--valid", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--split", help="easy/hard JSON for subset accuracies")
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--format", choices=("json", "text"), default="text")
    _add_out_flag(p)
    _add_manifest_flag(p)
    p.set_defaults(func=_cmd_frozen)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TrainingDivergedError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NUMERICAL
    except CuecheckError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except FileNotFoundError as exc:
        sys.stderr.write(f"error: {exc.filename or exc}: no such file\n")
        return EXIT_INPUT
    except IsADirectoryError as exc:
        sys.stderr.write(f"error: {exc.filename}: is a directory\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
