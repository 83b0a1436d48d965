"""Command-line interface.

Exit codes: 0 success, 1 bad input (parse/schema/config/validation), 2
upstream client failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import load_config
from .errors import (ClientError, ConfigError, InputError, IoError,
                     ParseError, SchemaError)
from .graph import radgraph_from_document
from .harness import (StyleEvalSet, assemble_style_eval_sets, evaluate,
                      load_dataset, render_style_eval_set, render_table,
                      score_style_eval, split_records, write_outputs)
from .metrics import z_test_proportion
from .prompting import (StylePair, build_prompt, derive_selection_seed,
                        select_examples, wire_messages)
from .serialize import SerializerConfig, serialize

_INPUT_ERRORS = (InputError, SchemaError, ParseError, ConfigError, IoError)


def _cmd_serialize(args: argparse.Namespace) -> int:
    try:
        payload = Path(args.graphs).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {args.graphs}: {exc}") from exc
    try:
        doc = json.loads(payload)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc
    cfg = SerializerConfig(delimiter=args.delimiter,
                           include_headers=not args.no_headers)
    if isinstance(doc, dict) and not _looks_like_graph_document(doc):
        # A sidecar object keyed by study id; serialize every entry.
        for study_id in doc:
            graph = radgraph_from_document(doc[study_id])
            print(f"{study_id}\t{serialize(graph, cfg).rendered}")
    else:
        graph = radgraph_from_document(doc)
        print(serialize(graph, cfg).rendered)
    return 0


def _looks_like_graph_document(doc: dict) -> bool:
    """Graph documents key entity objects (tokens/label/...) directly;
    sidecars key whole graph documents by study id."""
    entries = [value for key, value in doc.items() if key != "text"]
    if not entries:
        return True
    return all(isinstance(v, dict) and "tokens" in v and "label" in v
               for v in entries)


def _cmd_prompt(args: argparse.Namespace) -> int:
    records = load_dataset(args.dataset)
    pool = [r for r in split_records(records, args.pool_split)
            if r.serialization]
    pairs = [StylePair(r.serialization, r.report) for r in pool]
    if args.eval_study:
        matches = [r for r in records if r.study_id == args.eval_study]
        if not matches:
            raise InputError(f"no study {args.eval_study!r} in dataset")
        if not matches[0].serialization:
            raise InputError(
                f"study {args.eval_study!r} has no serialization")
        eval_serialization = matches[0].serialization
        seed = derive_selection_seed(args.seed, args.shots, args.eval_study)
    elif args.eval_serialization is not None:
        eval_serialization = args.eval_serialization
        seed = args.seed
    else:
        raise InputError(
            "one of --eval-study or --eval-serialization is required")
    examples = select_examples(pairs, args.shots, seed)
    chain = build_prompt(examples, eval_serialization)
    print(json.dumps({"k": chain.k, "messages": wire_messages(chain)},
                     indent=2))
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    outcome = evaluate(cfg, args.mode)
    paths = write_outputs(outcome, cfg)
    sys.stdout.write(render_table(outcome.table))
    print(f"scores: {paths['scores']}")
    return 0


def _read_json_file(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: malformed JSON: {exc}") from exc


def _cmd_style_assemble(args: argparse.Namespace) -> int:
    human = _read_json_file(args.human)
    generated = _read_json_file(args.generated)
    for name, doc in (("human", human), ("generated", generated)):
        if not isinstance(doc, dict):
            raise SchemaError(
                f"{name} file must map radiologist id to a report array")
    sets = assemble_style_eval_sets(human, generated, args.sets, args.seed)
    out = {"sets": [s.to_dict() for s in sets]}
    Path(args.out).write_text(json.dumps(out, indent=2), encoding="utf-8")
    if args.render:
        for i, s in enumerate(sets):
            print(f"=== Set {i + 1} ===")
            print(render_style_eval_set(s))
            print()
    print(f"wrote {len(sets)} sets to {args.out}")
    return 0


def _cmd_style_score(args: argparse.Namespace) -> int:
    doc = _read_json_file(args.sets)
    if not isinstance(doc, dict) or not isinstance(doc.get("sets"), list):
        raise SchemaError(f"{args.sets}: expected an object with a "
                          f"'sets' array")
    sets = [StyleEvalSet.from_dict(d) for d in doc["sets"]]
    answers = _read_json_file(args.answers)
    if not isinstance(answers, dict):
        raise SchemaError(f"{args.answers}: expected an object mapping "
                          f"evaluator to answer array")
    score = score_style_eval(answers, sets, p0=args.p0)
    for evaluator, result in score.per_evaluator.items():
        print(f"{evaluator}: {result.successes}/{result.trials} correct, "
              f"phat={result.phat:.4f}, z={result.z:.4f}, "
              f"p={result.p_value:.4f}")
    pooled = score.pooled
    print(f"pooled: {pooled.successes}/{pooled.trials} correct, "
          f"phat={pooled.phat:.4f}, z={pooled.z:.4f}, "
          f"p={pooled.p_value:.4f}")
    return 0


def _cmd_ztest(args: argparse.Namespace) -> int:
    result = z_test_proportion(args.x, args.n, args.p0)
    print(f"x={result.successes} n={result.trials} p0={result.p0} "
          f"phat={result.phat:.6f} z={result.z:.6f} "
          f"p={result.p_value:.6f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="radstyle",
        description="Serialization-based report generation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serialize",
                       help="render graph JSON as serialized key words")
    p.add_argument("graphs", help="graph document or study-keyed sidecar")
    p.add_argument("--delimiter", default=". ")
    p.add_argument("--no-headers", action="store_true")
    p.set_defaults(func=_cmd_serialize)

    p = sub.add_parser("prompt", help="print the k-shot dialogue as JSON")
    p.add_argument("--shots", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dataset", required=True)
    p.add_argument("--pool-split", default="train")
    p.add_argument("--eval-study")
    p.add_argument("--eval-serialization")
    p.set_defaults(func=_cmd_prompt)

    p = sub.add_parser("evaluate", help="run a scored generation experiment")
    p.add_argument("--mode", choices=("ser2rep", "end2end"), required=True)
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("style-eval", help="blinded style discrimination")
    style_sub = p.add_subparsers(dest="style_command", required=True)
    q = style_sub.add_parser("assemble")
    q.add_argument("--human", required=True,
                   help="JSON: radiologist id -> human reports")
    q.add_argument("--generated", required=True,
                   help="JSON: radiologist id -> generated reports")
    q.add_argument("--sets", type=int, required=True)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out", required=True)
    q.add_argument("--render", action="store_true")
    q.set_defaults(func=_cmd_style_assemble)
    q = style_sub.add_parser("score")
    q.add_argument("--sets", required=True)
    q.add_argument("--answers", required=True)
    q.add_argument("--p0", type=float, default=0.25)
    q.set_defaults(func=_cmd_style_score)

    p = sub.add_parser("ztest", help="one-sided proportion z-test")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p0", type=float, default=0.25)
    p.set_defaults(func=_cmd_ztest)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ClientError as exc:
        print(f"client error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
