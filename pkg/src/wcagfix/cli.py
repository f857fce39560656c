"""Command-line front end: check, fix, eval, stats, decode-demo and verify.

Exit status is 0 on success (or a compliant corpus), 1 when violations or
missing assets remain, and 2 on operational errors.
"""
from __future__ import annotations

import argparse
import configparser
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from .corpus import (evaluate_corpus, format_metrics_table, load_manifest, outputs_from_dir,
                     safe_doc_id, verify_assets)
from .dom import parse_html, serialize
from .errors import WcagFixError
from .fix import CommandCaptioner, FixConfig, fix_to_fixed_point
from .guidance import (Condition, GuidanceConfig, assemble_prompt, decode, decode_single,
                       demo_model_path, extract_html_segment, load_toy_model, tokenize_prompt)
from .metrics import CommandEmbedder
from .rules import (THRESHOLD_PROFILES, RuleConfig, check_document, format_json_report,
                    format_text_report, summarize)
from .stats import read_vote_counts, study_summary

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_ERROR = 2

REPORTS, FIXED, METRICS, HISTORY = "reports", "fixed", "metrics", "history"

DEMO_INPUT = '<html><body><main><img src="red-car.png"></main></body></html>'


@dataclass
class RunConfig:
    rules: RuleConfig = field(default_factory=RuleConfig)
    fix: FixConfig = field(default_factory=FixConfig)
    guidance: GuidanceConfig = field(default_factory=GuidanceConfig)
    output_dir: Path = Path("wcagfix-out")
    renderer_command: str | None = None
    captioner_command: str | None = None
    embedder_command: str | None = None
    workers: int = 1


def read_config_file(path) -> dict[str, str]:
    """Plain ``key = value`` lines (``#`` comments); section headers are optional."""
    text = Path(path).read_text(encoding="utf-8")
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"))
    parser.optionxform = str.lower
    parser.read_string("[wcagfix]\n" + text)
    values = {}
    for section in parser.sections():
        values.update(parser[section])
    return values


_INT_KEYS = {"word_threshold", "max_iterations", "max_tokens", "workers"}
_FLOAT_KEYS = {"contrast_target", "gamma"}


def build_run_config(values: dict[str, str]) -> RunConfig:
    v = dict(values)
    for key in _INT_KEYS & v.keys():
        v[key] = int(v[key])
    for key in _FLOAT_KEYS & v.keys():
        v[key] = float(v[key])
    profile = v.get("threshold_profile", "AA")
    if profile not in THRESHOLD_PROFILES:
        raise ValueError(f"unknown threshold profile {profile!r}")
    rules = RuleConfig(threshold_profile=profile, word_threshold=v.get("word_threshold", 60))
    captioner = v.get("captioner_command") or None
    fix = FixConfig(
        default_lang=v.get("default_lang", "en"),
        contrast_target=v.get("contrast_target", 4.5),
        max_iterations=v.get("max_iterations", 5),
        title_strategy=v.get("title_strategy", "heading"),
        caption_provider=CommandCaptioner(captioner) if captioner else None,
        rules=rules,
    )
    guidance = GuidanceConfig(gamma=v.get("gamma", GuidanceConfig().gamma),
                              max_tokens=v.get("max_tokens", GuidanceConfig().max_tokens))
    return RunConfig(rules=rules, fix=fix, guidance=guidance,
                     output_dir=Path(v.get("output_dir", "wcagfix-out")),
                     renderer_command=v.get("renderer_command") or None,
                     captioner_command=captioner,
                     embedder_command=v.get("embedder_command") or None,
                     workers=max(1, v.get("workers", 1)))


def _config_from_args(args) -> RunConfig:
    values: dict = {}
    if getattr(args, "config", None):
        values.update(read_config_file(args.config))
    overrides = {
        "output_dir": getattr(args, "output_dir", None),
        "gamma": getattr(args, "gamma", None),
        "threshold_profile": getattr(args, "threshold_profile", None),
        "max_iterations": getattr(args, "max_iterations", None),
        "workers": getattr(args, "workers", None),
    }
    values.update({k: str(v) for k, v in overrides.items() if v is not None})
    return build_run_config(values)


def _error(msg):
    print(f"error: {msg}", file=sys.stderr)
    return EXIT_ERROR


def _prepare_dir(path: Path):
    """Create ``path`` and prove it is writable (raises OSError otherwise)."""
    path.mkdir(parents=True, exist_ok=True)
    probe = path / ".write-test"
    probe.write_text("")
    probe.unlink()


def collect_inputs(paths) -> list[tuple[str, Path]]:
    """Expand files and directories into ``(doc_id, path)`` pairs with unique ids."""
    files = []
    for raw in paths:
        p = Path(raw)
        if p.is_dir():
            files.extend(sorted(q for q in p.rglob("*") if q.suffix.lower() in (".html", ".htm")))
        elif p.is_file():
            files.append(p)
        else:
            raise FileNotFoundError(f"input not found: {p}")
    out, used = [], set()
    for f in files:
        base = safe_doc_id(f.stem)
        doc_id, n = base, 2
        while doc_id in used:
            doc_id, n = f"{base}-{n}", n + 1
        used.add(doc_id)
        out.append((doc_id, f))
    return out


def _map(fn, jobs, workers):
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, jobs))
    return [fn(job) for job in jobs]


# --------------------------------------------------------------------------
# check


def _check_one(job):
    doc_id, path, rules, out_dir = job
    tree = parse_html(Path(path).read_bytes())
    report = check_document(tree, rules, doc_id)
    (out_dir / f"{doc_id}.txt").write_text(format_text_report(report), encoding="utf-8")
    (out_dir / f"{doc_id}.json").write_text(format_json_report(report), encoding="utf-8")
    return report


def cmd_check(args) -> int:
    try:
        cfg = _config_from_args(args)
        inputs = collect_inputs(args.inputs)
        reports_dir = cfg.output_dir / REPORTS
        _prepare_dir(reports_dir)
    except (OSError, ValueError) as exc:
        return _error(exc)
    try:
        reports = _map(_check_one, [(d, p, cfg.rules, reports_dir) for d, p in inputs],
                       cfg.workers)
    except (OSError, WcagFixError) as exc:
        return _error(exc)
    if reports:
        summary = summarize(reports).to_dict()
        (reports_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n",
                                                  encoding="utf-8")
    total = sum(r.total for r in reports)
    for r in reports:
        print(f"{r.doc_id}: {r.total} violation(s)")
    print(f"total: {total} violation(s) in {len(reports)} document(s)")
    return EXIT_OK if total == 0 else EXIT_FINDINGS


# --------------------------------------------------------------------------
# fix


def _fix_one(job):
    doc_id, path, fix_cfg, fixed_dir, history_dir = job
    if isinstance(fix_cfg.caption_provider, CommandCaptioner):
        # image sources are relative to the page being fixed
        captioner = CommandCaptioner(fix_cfg.caption_provider.argv, base_dir=Path(path).parent)
        fix_cfg = replace(fix_cfg, caption_provider=captioner)
    tree = parse_html(Path(path).read_bytes())
    fixed, rounds = fix_to_fixed_point(tree, fix_cfg, doc_id)
    (fixed_dir / f"{doc_id}.html").write_text(serialize(fixed), encoding="utf-8")
    for r in rounds:
        for action in r.actions:
            if action.sidecar:
                name, content = action.sidecar
                target = fixed_dir / name
                if not target.exists():
                    target.parent.mkdir(parents=True, exist_ok=True)
                    target.write_text(content, encoding="utf-8")
    history = {"schema_version": 1, "doc_id": doc_id, "source": str(path),
               "rounds": [r.to_dict() for r in rounds]}
    (history_dir / f"{doc_id}.json").write_text(json.dumps(history, indent=2) + "\n",
                                                encoding="utf-8")
    return doc_id, rounds[0].report.total if rounds else 0, rounds[-1].report.total if rounds else 0


def cmd_fix(args) -> int:
    try:
        cfg = _config_from_args(args)
        inputs = collect_inputs(args.inputs)
        fixed_dir, history_dir = cfg.output_dir / FIXED, cfg.output_dir / HISTORY
        _prepare_dir(fixed_dir)
        _prepare_dir(history_dir)
    except (OSError, ValueError) as exc:
        return _error(exc)
    jobs = [(d, p, cfg.fix, fixed_dir, history_dir) for d, p in inputs]
    try:
        results = _map(_fix_one, jobs, cfg.workers)
    except (OSError, WcagFixError) as exc:
        return _error(exc)
    residual = 0
    for doc_id, before, after in results:
        print(f"{doc_id}: {before} -> {after} violation(s)")
        residual += after
    return EXIT_OK if residual == 0 else EXIT_FINDINGS


# --------------------------------------------------------------------------
# eval


def cmd_eval(args) -> int:
    try:
        cfg = _config_from_args(args)
        manifest = load_manifest(args.manifest)
        outputs = outputs_from_dir(manifest, args.outputs)
        metrics_dir = cfg.output_dir / METRICS
        _prepare_dir(metrics_dir)
        provider = CommandEmbedder(cfg.embedder_command) if cfg.embedder_command else None
        record = evaluate_corpus(manifest, outputs, provider=provider, rules=cfg.rules,
                                 renderer=cfg.renderer_command, workers=cfg.workers)
    except (OSError, ValueError, WcagFixError) as exc:
        return _error(exc)
    table = format_metrics_table([(args.name, record)])
    (metrics_dir / "metrics.json").write_text(json.dumps(record.to_dict(), indent=2) + "\n",
                                              encoding="utf-8")
    (metrics_dir / "table.txt").write_text(table, encoding="utf-8")
    print(table, end="")
    for flag in record.flags:
        print(f"note: {flag}")
    return EXIT_OK


# --------------------------------------------------------------------------
# stats


def cmd_stats(args) -> int:
    try:
        votes = read_vote_counts(args.votes)
        text = study_summary(votes, alpha=args.alpha)
    except (OSError, ValueError, WcagFixError) as exc:
        return _error(exc)
    print(text, end="")
    if args.output_dir:
        try:
            out = Path(args.output_dir) / METRICS
            _prepare_dir(out)
            (out / "stats.txt").write_text(text, encoding="utf-8")
        except OSError as exc:
            return _error(exc)
    return EXIT_OK


# --------------------------------------------------------------------------
# decode-demo


def run_decode_demo(model_path=None, input_html=DEMO_INPUT, gamma=None, single_pass=False,
                    max_tokens=None):
    """Returns ``(raw_text, extracted_html)``; raises NoHtmlFound / IncompleteTable."""
    model = load_toy_model(model_path or demo_model_path())
    cfg = GuidanceConfig()
    if gamma is not None:
        cfg = replace(cfg, gamma=gamma)
    if max_tokens is not None:
        cfg = replace(cfg, max_tokens=max_tokens)
    prompt = assemble_prompt(input_html, Condition.ZERO_VIOLATIONS)
    tokens = tokenize_prompt(prompt)
    if single_pass:
        out = decode_single(model, tokens, cfg)
    else:
        out = decode(model, tokens, cfg)
    raw = "".join(out)
    return raw, extract_html_segment(raw)


def cmd_decode_demo(args) -> int:
    try:
        html = Path(args.input).read_text(encoding="utf-8") if args.input else DEMO_INPUT
        gamma = args.gamma
        if gamma is None and args.config:
            gamma = build_run_config(read_config_file(args.config)).guidance.gamma
        raw, extracted = run_decode_demo(args.model, html, gamma, args.single_pass,
                                         args.max_tokens)
    except (OSError, ValueError, WcagFixError) as exc:
        return _error(exc)
    print(f"raw: {raw}")
    print(f"extracted: {extracted}")
    return EXIT_OK


# --------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    try:
        manifest = load_manifest(args.manifest)
        report = verify_assets(manifest)
    except (OSError, WcagFixError) as exc:
        return _error(exc)
    if args.output_dir:
        try:
            out = Path(args.output_dir) / REPORTS
            _prepare_dir(out)
            (out / "assets.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n",
                                             encoding="utf-8")
        except OSError as exc:
            return _error(exc)
    for doc_id, missing in report.missing.items():
        for path in missing:
            print(f"{doc_id}: missing {path}")
    print(f"{len(manifest)} entries, {len(report.excludable)} excludable")
    return EXIT_OK if report.ok else EXIT_FINDINGS


# --------------------------------------------------------------------------


def _add_common(p, output=True):
    if output:
        p.add_argument("--output-dir", help="output folder (reports/, fixed/, metrics/, history/)")
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--threshold-profile", choices=sorted(THRESHOLD_PROFILES))
    p.add_argument("--workers", type=int, help="parallel worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wcagfix",
                                     description="WCAG2 checking and repair for HTML pages")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="write violation reports")
    p.add_argument("inputs", nargs="+", help="HTML files or directories")
    _add_common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("fix", help="repair pages to a fixed point")
    p.add_argument("inputs", nargs="+", help="HTML files or directories")
    _add_common(p)
    p.add_argument("--max-iterations", type=int)
    p.set_defaults(func=cmd_fix)

    p = sub.add_parser("eval", help="corpus metrics for generated pages")
    p.add_argument("manifest", help="manifest.jsonl")
    p.add_argument("outputs", help="directory with <doc_id>.html (and optional .png)")
    p.add_argument("--name", default="output", help="row label in the table")
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("stats", help="chi-squared summary of preference votes")
    p.add_argument("votes", help="file of 'method count' rows")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--output-dir")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("decode-demo", help="negative-guidance decoding with a toy model")
    p.add_argument("--model", help="toy model table (default: bundled demo)")
    p.add_argument("--input", help="HTML file placed in the prompt")
    p.add_argument("--gamma", type=float)
    p.add_argument("--max-tokens", type=int)
    p.add_argument("--single-pass", action="store_true",
                   help="plain decoding under the zero-violation condition only")
    p.add_argument("--config")
    p.set_defaults(func=cmd_decode_demo)

    p = sub.add_parser("verify", help="list missing assets per manifest entry")
    p.add_argument("manifest")
    p.add_argument("--output-dir")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
