"""Command-line front end wiring the pipeline end to end.

Subcommands: gen (synthetic corpora and observation logs), ingest
(load/dedupe/sanitize/split), infer (mask model from a log), rank (pre-order
over models), evaluate (counterfactual mask application and metric table),
popeval (popularity-adjusted subsampling), sweep (spoofing-strategy search).

Exit status: 0 success, 1 usage error, 2 data error. Outputs are written
atomically (temp file + rename); diagnostics go to stderr as JSON lines.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, Sequence, TypeVar

from fpeval import data as bundled_data
from fpeval.dataset import (
    dedupe_by_cookie,
    load_dataset,
    render_dataset,
    sanitize,
    split_by_browser,
)
from fpeval.errors import ConfigurationError, FormatError, FpevalError, SampleTooLargeError
from fpeval.hybrid import (
    Policy,
    evaluate_all,
    report_table_csv,
    report_table_json,
)
from fpeval.maskinfer import (
    MaskModel,
    StatParams,
    infer_model,
    load_mask_model,
    load_observation_log,
    rank_preorder,
    render_mask_model,
    render_observation_log,
    variation_coverage,
)
from fpeval.popsample import load_popularity_table, popularity_evaluate
from fpeval.resolution import (
    SpoofStrategy,
    pareto_improvements,
    score_strategy,
    sweep,
)
from fpeval.syngen import (
    PRESETS,
    corpus_spec_from_json_obj,
    generate_corpus,
    generate_log,
    preset_corpus_spec,
)

T = TypeVar("T")
R = TypeVar("R")

_POLICY_FLAGS: dict[str, Policy] = {
    "inconclusive-as-masked": "inconclusive_as_masked",
    "inconclusive-as-unmasked": "inconclusive_as_unmasked",
}


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; this CLI uses 1."""

    def error(self, message: str) -> "None":
        self.print_usage(sys.stderr)
        _diag("usage-error", message)
        raise SystemExit(1)


def _diag(code: str, message: str, **extra: object) -> None:
    payload: dict[str, object] = {"code": code, "message": message}
    payload.update(extra)
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)


def _write_atomic(path: str | Path, text: str) -> None:
    target = Path(path)
    directory = target.parent if str(target.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(dir=str(directory), prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, target)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _parallel_map(fn: Callable[[T], R], items: Sequence[T], threads: int) -> list[R]:
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _parse_dims(text: str, what: str = "dimensions") -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        dims = (int(w), int(h))
    except ValueError:
        raise FormatError(f"cannot parse {what} {text!r}; expected WxH") from None
    if dims[0] < 1 or dims[1] < 1:
        raise FormatError(f"{what} must be positive, got {text!r}")
    return dims


def _parse_dim_list(text: str, what: str) -> list[tuple[int, int]]:
    return [_parse_dims(part, what) for part in text.split(",") if part]


def _parse_quanta_range(text: str) -> tuple[tuple[int, int], tuple[int, int]]:
    try:
        lo_text, hi_text = text.split("..")
    except ValueError:
        raise FormatError(
            f"cannot parse quanta range {text!r}; expected AxB..CxD"
        ) from None
    lo = _parse_dims(lo_text, "quanta")
    hi = _parse_dims(hi_text, "quanta")
    return ((lo[0], hi[0]), (lo[1], hi[1]))


def _parse_strategy(text: str) -> SpoofStrategy:
    try:
        cap_text, quanta_text = text.split(":")
    except ValueError:
        raise FormatError(
            f"cannot parse strategy {text!r}; expected CAPWxCAPH:QWxQH"
        ) from None
    cap = _parse_dims(cap_text, "caps")
    quanta = _parse_dims(quanta_text, "quanta")
    return SpoofStrategy(cap_w=cap[0], cap_h=cap[1], quant_w=quanta[0], quant_h=quanta[1])


def _load_model_arg(value: str) -> MaskModel:
    if value.startswith("builtin:"):
        return bundled_data.load_builtin_model(value[len("builtin:") :])
    return load_mask_model(value)


def _stat_params(args: argparse.Namespace) -> StatParams:
    return StatParams(impact_fraction=args.impact_fraction, alpha=args.alpha)


def _add_params_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--impact-fraction",
        type=float,
        default=0.75,
        metavar="F",
        help="fraction of values a standardization must affect to count (default 0.75)",
    )
    parser.add_argument(
        "--alpha",
        type=float,
        default=0.1,
        metavar="A",
        help="rejection threshold for the standardization test (default 0.1)",
    )


def _add_policy_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--policy",
        choices=sorted(_POLICY_FLAGS),
        default="inconclusive-as-masked",
        help="how inconclusive verdicts are applied (default overestimates masking)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fpeval", description=__doc__)
    parser.add_argument(
        "--threads",
        type=int,
        default=int(os.environ.get("FPEVAL_THREADS", "1")),
        help="worker threads for commands that evaluate several models "
        "(default from FPEVAL_THREADS, else 1)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load, dedupe, sanitize, and optionally split")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=("csv", "jsonl"), required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--out-format", choices=("csv", "jsonl"), default="jsonl")
    p.add_argument("--no-dedupe", action="store_true", help="skip cookie deduplication")
    p.add_argument("--no-sanitize", action="store_true", help="skip sanitization")
    p.add_argument(
        "--browser",
        choices=("chrome", "firefox"),
        help="keep only this browser split after cleaning",
    )

    p = sub.add_parser("infer", help="infer a mask model from an observation log")
    p.add_argument("--log", required=True)
    p.add_argument("--pet", required=True)
    p.add_argument("--browser", help="stamp the model with a browser family")
    p.add_argument("--out", required=True)
    _add_params_flags(p)

    p = sub.add_parser("rank", help="pre-order models by masked-attribute inclusion")
    p.add_argument("--model", action="append", required=True, dest="models")
    p.add_argument("--out", required=True)

    p = sub.add_parser("evaluate", help="apply models counterfactually and tabulate")
    p.add_argument("--data", required=True)
    p.add_argument("--format", choices=("csv", "jsonl"), default="jsonl")
    p.add_argument("--model", action="append", required=True, dest="models")
    p.add_argument("--browser", help="expected browser split of the dataset")
    p.add_argument("--out", required=True, help="ranked csv table")
    p.add_argument("--json", help="also write full reports as json")
    _add_policy_flag(p)

    p = sub.add_parser("popeval", help="popularity-adjusted subsampled evaluation")
    p.add_argument("--data", required=True)
    p.add_argument("--format", choices=("csv", "jsonl"), default="jsonl")
    p.add_argument("--model", action="append", required=True, dest="models")
    p.add_argument("--popularity", required=True, help="csv table: pet,users (NA = unknown)")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_policy_flag(p)

    p = sub.add_parser("sweep", help="exhaustive cap/quanta strategy search")
    p.add_argument("--data", required=True)
    p.add_argument("--format", choices=("csv", "jsonl"), default="jsonl")
    p.add_argument("--model", required=True, help="baseline model (path or builtin:<name>)")
    p.add_argument("--caps", default="1000x1000", help="comma-separated WxH caps")
    p.add_argument("--quanta", default="200x100..200x100", help="range AxB..CxD inclusive")
    p.add_argument("--exclude", default="", help="comma-separated WxH quanta to skip")
    p.add_argument("--pareto-reference", help="strategy CAPWxCAPH:QWxQH to compare against")
    p.add_argument("--pareto-out", help="write strict improvements over the reference here")
    p.add_argument("--out", required=True)
    _add_policy_flag(p)

    p = sub.add_parser("gen", help="generate synthetic inputs")
    gen_sub = p.add_subparsers(dest="gen_kind", required=True)

    g = gen_sub.add_parser("corpus", help="synthetic fingerprint corpus")
    g.add_argument("--preset", choices=PRESETS)
    g.add_argument("--spec", help="corpus spec json (overrides --preset)")
    g.add_argument("--n", type=int, default=None, help="record count (default 1000)")
    g.add_argument("--seed", type=int, default=None, help="generator seed (default 0)")
    g.add_argument("--out", required=True)
    g.add_argument("--out-format", choices=("csv", "jsonl"), default="jsonl")
    g.add_argument("--ground-truth", help="write generator labels here (json)")

    g = gen_sub.add_parser("log", help="observation log with known verdicts")
    g.add_argument("--pet", required=True)
    g.add_argument(
        "--verdicts",
        required=True,
        help="json file mapping attribute -> requested verdict status",
    )
    g.add_argument("--platforms", type=int, default=6)
    g.add_argument("--epochs", type=int, default=5)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--ground-truth", help="write requested verdicts here (json)")
    _add_params_flags(g)

    return parser


# ---------------------------------------------------------------------------
# subcommand bodies


def _cmd_ingest(args: argparse.Namespace) -> int:
    dataset = load_dataset(args.input, args.format)
    counts: dict[str, object] = {"loaded": len(dataset)}
    if not args.no_dedupe:
        dataset = dedupe_by_cookie(dataset)
        counts["after_dedupe"] = len(dataset)
    if not args.no_sanitize:
        dataset, report = sanitize(dataset)
        counts["sanitize_dropped"] = report.dropped
        counts["after_sanitize"] = len(dataset)
    if args.browser:
        chrome, firefox = split_by_browser(dataset)
        dataset = chrome if args.browser == "chrome" else firefox
        counts["after_split"] = len(dataset)
    _write_atomic(args.out, render_dataset(dataset, args.out_format))
    _diag("ingest-summary", f"wrote {len(dataset)} records to {args.out}", **counts)
    return 0


def _cmd_infer(args: argparse.Namespace) -> int:
    log = load_observation_log(args.log)
    skipped = variation_coverage(log)
    if skipped:
        _diag(
            "variation-coverage",
            "some boundary groups have a single epoch; variation testing "
            "was skipped for them",
            skipped=skipped,
        )
    model = infer_model(log, args.pet, _stat_params(args))
    if args.browser:
        model = MaskModel(
            pet=model.pet,
            params=model.params,
            verdicts=model.verdicts,
            transforms=model.transforms,
            browser=args.browser,
        )
    _write_atomic(args.out, render_mask_model(model))
    statuses: dict[str, int] = {}
    for verdict in model.verdicts.values():
        statuses[verdict.status] = statuses.get(verdict.status, 0) + 1
    _diag("infer-summary", f"wrote model for {args.pet} to {args.out}", statuses=statuses)
    return 0


def _cmd_rank(args: argparse.Namespace) -> int:
    models = [_load_model_arg(m) for m in args.models]
    ranking = rank_preorder(models)
    _write_atomic(
        args.out, json.dumps(ranking.to_json_obj(), indent=2, sort_keys=True) + "\n"
    )
    for group in ranking.equivalence_classes:
        count = ranking.masked_counts[group[0]]
        print(f"{count:3d} masked: {', '.join(group)}")
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    dataset = load_dataset(args.data, args.format)
    models = [_load_model_arg(m) for m in args.models]
    rows = evaluate_all(
        dataset, models, policy=_POLICY_FLAGS[args.policy], browser=args.browser
    )
    _write_atomic(args.out, report_table_csv(rows))
    if args.json:
        _write_atomic(args.json, report_table_json(rows))
    print(f"{'pet':40s} {'H':>8s} {'%<=1':>8s} {'%<=10':>8s}")
    for row in rows:
        print(
            f"{row.pet:40s} {row.after.entropy_bits:8.3f} "
            f"{row.after.pct_le_1:8.3f} {row.after.pct_le_10:8.3f}"
        )
    return 0


def _cmd_popeval(args: argparse.Namespace) -> int:
    dataset = load_dataset(args.data, args.format)
    models = [_load_model_arg(m) for m in args.models]
    table = {entry.pet: entry for entry in load_popularity_table(args.popularity)}
    policy = _POLICY_FLAGS[args.policy]

    def evaluate_one(model: MaskModel):
        entry = table.get(model.pet)
        if entry is None:
            return model.pet, None, "no popularity entry"
        if entry.users is None:
            return model.pet, None, "user count unknown"
        try:
            estimate = popularity_evaluate(
                dataset,
                model,
                users=entry.users,
                samples=args.samples,
                seed=args.seed,
                policy=policy,
            )
        except SampleTooLargeError as exc:
            return model.pet, None, str(exc)
        return model.pet, (entry.users, estimate), None

    results = _parallel_map(evaluate_one, models, args.threads)
    lines = [
        "pet,users,entropy_mean,entropy_sem,pct_le_1_mean,pct_le_1_sem,"
        "pct_le_10_mean,pct_le_10_sem"
    ]
    scored = []
    for pet, payload, skip_reason in results:
        if payload is None:
            _diag("popeval-skip", f"{pet}: {skip_reason}")
            continue
        users, estimate = payload
        scored.append((estimate.metrics["entropy"][0], pet, users, estimate))
    scored.sort(key=lambda item: (item[0], item[1]))
    for _, pet, users, estimate in scored:
        h = estimate.metrics["entropy"]
        p1 = estimate.metrics["pct_le_1"]
        p10 = estimate.metrics["pct_le_10"]
        lines.append(
            f"{pet},{users},{h[0]!r},{h[1]!r},{p1[0]!r},{p1[1]!r},{p10[0]!r},{p10[1]!r}"
        )
        print(
            f"{pet:32s} users={users:<9d} H={h[0]:.3f}+/-{h[1]:.3f} "
            f"%<=1={p1[0]:.3f}+/-{p1[1]:.3f} %<=10={p10[0]:.3f}+/-{p10[1]:.3f}"
        )
    _write_atomic(args.out, "\n".join(lines) + "\n")
    return 0


def _sweep_csv(rows: Iterable[tuple[SpoofStrategy, object]]) -> str:
    lines = ["cap_w,cap_h,quant_w,quant_h,entropy,pct_le_1,pct_le_10,abs_loss,pct_loss"]
    for strategy, score in rows:
        lines.append(
            f"{strategy.cap_w},{strategy.cap_h},{strategy.quant_w},{strategy.quant_h},"
            f"{score.entropy_bits!r},{score.pct_le_1!r},{score.pct_le_10!r},"
            f"{score.abs_loss!r},{score.pct_loss!r}"
        )
    return "\n".join(lines) + "\n"


def _cmd_sweep(args: argparse.Namespace) -> int:
    if args.pareto_out and not args.pareto_reference:
        raise ConfigurationError("--pareto-out requires --pareto-reference")
    dataset = load_dataset(args.data, args.format)
    model = _load_model_arg(args.model)
    caps = _parse_dim_list(args.caps, "caps")
    quanta_range = _parse_quanta_range(args.quanta)
    exclude = _parse_dim_list(args.exclude, "quanta") if args.exclude else []
    policy = _POLICY_FLAGS[args.policy]
    results = sweep(
        dataset, model, caps, quanta_range, exclude=exclude, policy=policy
    )
    _write_atomic(args.out, _sweep_csv(results))
    _diag("sweep-summary", f"scored {len(results)} candidate strategies")
    if args.pareto_reference:
        reference_strategy = _parse_strategy(args.pareto_reference)
        reference = score_strategy(dataset, model, reference_strategy, policy)
        improvements = pareto_improvements(results, reference)
        _diag(
            "pareto-summary",
            f"{len(improvements)} candidate(s) strictly improve on the reference",
        )
        if args.pareto_out:
            _write_atomic(args.pareto_out, _sweep_csv(improvements))
    return 0


def _cmd_gen_corpus(args: argparse.Namespace) -> int:
    if args.spec:
        obj = json.loads(Path(args.spec).read_text(encoding="utf-8"))
        if args.n is not None:
            obj["n"] = args.n
        if args.seed is not None:
            obj["seed"] = args.seed
        spec = corpus_spec_from_json_obj(obj, source=args.spec)
    elif args.preset:
        spec = preset_corpus_spec(
            args.preset,
            n=1000 if args.n is None else args.n,
            seed=0 if args.seed is None else args.seed,
        )
    else:
        raise ConfigurationError("gen corpus needs --preset or --spec")
    dataset, truth = generate_corpus(spec)
    _write_atomic(args.out, render_dataset(dataset, args.out_format))
    if args.ground_truth:
        _write_atomic(
            args.ground_truth,
            json.dumps(truth.to_json_obj(), indent=2, sort_keys=True) + "\n",
        )
    _diag("gen-summary", f"wrote {len(dataset)} records to {args.out}")
    return 0


def _cmd_gen_log(args: argparse.Namespace) -> int:
    verdict_map = json.loads(Path(args.verdicts).read_text(encoding="utf-8"))
    if not isinstance(verdict_map, dict) or not all(
        isinstance(v, str) for v in verdict_map.values()
    ):
        raise FormatError(
            f"{args.verdicts}: expected a json object mapping attribute -> status"
        )
    log, truth = generate_log(
        pets=[(args.pet, verdict_map)],
        platforms=args.platforms,
        epochs_per_boundary=args.epochs,
        seed=args.seed,
        params=_stat_params(args),
    )
    _write_atomic(args.out, render_observation_log(log))
    if args.ground_truth:
        _write_atomic(
            args.ground_truth,
            json.dumps(truth.to_json_obj(), indent=2, sort_keys=True) + "\n",
        )
    _diag("gen-summary", f"wrote {len(log)} observations to {args.out}")
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "infer": _cmd_infer,
    "rank": _cmd_rank,
    "evaluate": _cmd_evaluate,
    "popeval": _cmd_popeval,
    "sweep": _cmd_sweep,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse help/usage paths
        return int(exc.code or 0)
    try:
        if args.command == "gen":
            if args.gen_kind == "corpus":
                return _cmd_gen_corpus(args)
            return _cmd_gen_log(args)
        return _COMMANDS[args.command](args)
    except FpevalError as exc:
        _diag("data-error", str(exc), kind=type(exc).__name__)
        return 2
    except json.JSONDecodeError as exc:
        _diag("data-error", f"invalid JSON input: {exc}", kind="JSONDecodeError")
        return 2
    except OSError as exc:
        _diag("io-error", str(exc))
        return 2


if __name__ == "__main__":
    sys.exit(main())
