"""Operator command line: train, align, phonetize, eval-wer, dict-build, serve, stats.

Every subcommand exits 0 on success and 1 with a diagnostic on stderr when a
domain error occurs (bad audio, unknown phonemes, malformed inputs).  The
`serve` store directory can be overridden with the NUTQ_STORE_DIR
environment variable, which takes precedence over the positional argument.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .acoustic import (
    TrainingConfig,
    TrainingUtterance,
    load_model,
    save_model,
    train_acoustic_model,
)
from .audio import compute_mfcc, load_wav
from .decoder import forced_align
from .errors import EmptyInput, NutqError
from .lexicon import INVENTORY, build_dictionary, phonetize, write_dictionary
from .report import learner_class_stats, write_report
from .store import DocumentStore
from .wer import evaluate_transcripts, parse_transcript_file, report_text

__all__ = ["main", "prepare_service"]


def _read_corpus(corpus_dir: Path, config: TrainingConfig) -> list[TrainingUtterance]:
    transcripts_path = corpus_dir / "etc" / "transcripts.txt"
    transcripts = parse_transcript_file(
        transcripts_path.read_text(encoding="utf-8"))
    corpus = []
    for utt_id, transcript in transcripts.items():
        wav_path = corpus_dir / "wav" / f"{utt_id}.wav"
        buffer = load_wav(wav_path.read_bytes())
        features = compute_mfcc(buffer, config.frame_params)
        corpus.append(TrainingUtterance(features=features, transcript=transcript))
    return corpus


def cmd_train(args) -> int:
    config = TrainingConfig(state_count=args.states, mixture_count=args.mixtures,
                            iterations=args.iterations, seed=args.seed)
    corpus = _read_corpus(Path(args.corpus_dir), config)
    model = train_acoustic_model(corpus, config)
    Path(args.out_model).write_text(save_model(model), encoding="utf-8")
    print(f"trained {len(corpus)} utterances over {len(model.hmms)} "
          f"phoneme models -> {args.out_model}")
    return 0


def _transcript_tokens(arg: str) -> tuple[str, ...]:
    """Phoneme sequence from a file path, literal symbols, or Arabic words."""
    path = Path(arg)
    text = path.read_text(encoding="utf-8") if path.is_file() else arg
    tokens = text.split()
    if not tokens:
        raise EmptyInput("transcript is empty")
    if all(token in INVENTORY for token in tokens):
        return tuple(tokens)
    phonemes: list[str] = []
    for token in tokens:
        phonemes.extend(phonetize(token))
    return tuple(phonemes)


def cmd_align(args) -> int:
    model = load_model(Path(args.model).read_text(encoding="utf-8"))
    buffer = load_wav(Path(args.wav).read_bytes())
    features = compute_mfcc(buffer, model.frame_params)
    alignment = forced_align(features, _transcript_tokens(args.transcript), model)
    print(alignment.dump())
    return 0


def cmd_phonetize(args) -> int:
    print(" ".join(phonetize(args.word)))
    return 0


def cmd_eval_wer(args) -> int:
    reference = parse_transcript_file(
        Path(args.reference).read_text(encoding="utf-8"))
    hypothesis = parse_transcript_file(
        Path(args.hypothesis).read_text(encoding="utf-8"))
    report = evaluate_transcripts(reference, hypothesis)
    if args.json:
        print(json.dumps(report.to_dict(), indent=1))
    else:
        print(f"correct={report.percent_correct:.1f} wer={report.wer:.1f}")
        print(report_text(report))
    return 0


def cmd_dict_build(args) -> int:
    lines = Path(args.wordfile).read_text(encoding="utf-8").splitlines()
    words = [line.strip() for line in lines
             if line.strip() and not line.lstrip().startswith("#")]
    print(write_dictionary(build_dictionary(words)), end="")
    return 0


def prepare_service(store_dir, model_path):
    """Build the HTTP app plus its store; registers the model document."""
    model = load_model(Path(model_path).read_text(encoding="utf-8"))
    store = DocumentStore(store_dir)
    store.put("models", "active", {
        "source_path": str(model_path),
        "feature_dim": model.feature_dim,
        "phoneme_count": len(model.hmms),
    })
    from .api import create_app

    return create_app(store, model), store


def cmd_serve(args) -> int:
    store_dir = os.environ.get("NUTQ_STORE_DIR") or args.store_dir
    app, _ = prepare_service(store_dir, args.model)
    import uvicorn

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def cmd_stats(args) -> int:
    store = DocumentStore(args.store_dir)
    rows = learner_class_stats(store, args.learner)
    paths = write_report(rows, args.out_dir)
    csv_path = paths[0]
    print(csv_path.read_text(encoding="utf-8"), end="")
    print(f"wrote {len(paths)} report files to {args.out_dir}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nutq",
        description="Arabic pronunciation training: train, align, score, serve.")
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="train an acoustic model from a corpus")
    train.add_argument("corpus_dir",
                       help="directory with wav/<utt>.wav and etc/transcripts.txt")
    train.add_argument("out_model", help="output model file")
    train.add_argument("--states", type=int, default=3,
                       help="states per phoneme (default 3)")
    train.add_argument("--mixtures", type=int, default=1,
                       help="Gaussians per state (default 1)")
    train.add_argument("--iterations", type=int, default=10,
                       help="EM iterations (default 10)")
    train.add_argument("--seed", type=int, default=0)
    train.set_defaults(func=cmd_train)

    align = sub.add_parser("align", help="force-align a WAV to a transcript")
    align.add_argument("model", help="model file from `train`")
    align.add_argument("wav", help="16 kHz / 16-bit / mono WAV file")
    align.add_argument("transcript",
                       help="transcript file, phoneme symbols, or an Arabic word")
    align.set_defaults(func=cmd_align)

    phon = sub.add_parser("phonetize",
                          help="print the phonemes of a diacritized word")
    phon.add_argument("word")
    phon.set_defaults(func=cmd_phonetize)

    wer = sub.add_parser("eval-wer",
                         help="score a hypothesis transcript file against a reference")
    wer.add_argument("reference")
    wer.add_argument("hypothesis")
    wer.add_argument("--json", action="store_true",
                     help="print the report as JSON")
    wer.set_defaults(func=cmd_eval_wer)

    dict_build = sub.add_parser("dict-build",
                                help="build a pronunciation dictionary from a word file")
    dict_build.add_argument("wordfile", help="one diacritized word per line")
    dict_build.set_defaults(func=cmd_dict_build)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("store_dir",
                       help="document store directory (NUTQ_STORE_DIR overrides)")
    serve.add_argument("model", help="model file from `train`")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8077)
    serve.set_defaults(func=cmd_serve)

    stats = sub.add_parser("stats",
                           help="export per-class statistics as CSV/JSON plus charts")
    stats.add_argument("store_dir", help="document store directory")
    stats.add_argument("out_dir", help="report output directory")
    stats.add_argument("--learner", default=None,
                       help="restrict to one learner id")
    stats.set_defaults(func=cmd_stats)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NutqError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
