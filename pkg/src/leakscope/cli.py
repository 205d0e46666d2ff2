"""Command-line entry point: ``leakscope <subcommand> ...``.

Exit codes: 0 success, 1 validation error, 2 I/O error.
"""

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict
from pathlib import Path

from . import analytics, dorkgen, ingest, leakscan, persona, report, rulesets, synth, wrangle
from .errors import LeakscopeError

EXIT_OK, EXIT_VALIDATION, EXIT_IO = 0, 1, 2
PUBLISHED_PARAMS_PATH = Path(__file__).parent / "data" / "published_params.json"


def cmd_dork(args):
    spec = dorkgen.QuerySpec(
        site=args.site, region=args.region, country=args.country, company=args.company,
        employment_types=tuple(args.type or ()),
        extra_groups=tuple(tuple(t.strip() for t in g.split(",")) for g in (args.keywords or ())),
    )
    print(dorkgen.build_dork_query(spec, dorkgen.Style(args.style)))


def cmd_ingest(args):
    salt = Path(args.salt_file).read_bytes()
    selectors = None
    if args.selectors:
        selectors = ingest.SelectorProfile.from_dict(json.loads(Path(args.selectors).read_text()))
    records, skipped = report.read_inputs(args.inputs, args.format, selectors)
    profiles, rejected = ingest.normalize_all(records, salt)
    ingest.write_corpus(args.out, profiles)
    for msg in rejected:
        logging.warning("rejected %s", msg)
    print(f"{len(records)} records read, {skipped} cards skipped, {len(profiles)} profiles written")


def cmd_wrangle(args):
    profiles = ingest.read_corpus(args.inputs)
    unique, rep, result, dropped = wrangle.wrangle(profiles)
    ingest.write_corpus(args.out, unique)
    Path(args.report).write_text(json.dumps({
        "report": rep.to_dict(), "duplicates_dropped": dropped, "unique_count": len(unique),
        "verification": {"passed": result.passed, "failures": result.failures},
    }, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"{len(profiles)} in, {rep.fixed} fixed, {rep.removed} removed, "
          f"{dropped} duplicates dropped, {len(unique)} unique")
    if not result.passed:
        raise LeakscopeError("verification failed: " + "; ".join(result.failures))


def cmd_scan(args):
    profiles = ingest.read_corpus(args.inputs)
    rules = leakscan.load_rules(args.rules)
    findings = leakscan.scan_corpus(profiles, rules)
    leakscan.write_findings(args.out, findings)
    s = leakscan.corpus_risk_summary(profiles, findings)
    print(f"{s.profiles} profiles, {s.events} events, {s.incidents} incidents "
          f"({s.low_share}% low / {s.high_share}% high)")


def cmd_persona(args):
    profiles = ingest.read_corpus(args.inputs)
    lex = persona.load_lexicon(args.lexicon)
    scores, failures = persona.score_corpus(profiles, lex, args.min_tokens)
    persona.write_personas(args.out, scores, failures)
    print(f"{len(scores)} profiles scored, {len(failures)} with insufficient text")


def cmd_analyze(args):
    profiles = ingest.read_corpus(args.corpus)
    findings = leakscan.read_findings(args.findings)
    scores = persona.read_personas(args.persona)
    table = analytics.build_incident_table(profiles, findings, scores)
    summary = leakscan.corpus_risk_summary(profiles, findings)
    raw = len(profiles)
    if args.wrangle_report:
        raw = json.loads(Path(args.wrangle_report).read_text())["report"]["input_count"]
    bundle = report.assemble_bundle(table, raw, len(profiles), summary.low_share, summary.high_share,
                                    args.threshold)
    Path(args.out).write_text(report.render(bundle, "json"), encoding="utf-8")
    print(report.render(bundle, "text"), end="")


def cmd_synth(args):
    params_path = PUBLISHED_PARAMS_PATH if args.published else args.params
    if params_path is None:
        raise LeakscopeError("either --params or --published is required")
    params = synth.SynthParams.from_dict(json.loads(Path(params_path).read_text()))
    if args.seed is not None:
        params.seed = args.seed
    records, manifest = synth.generate_corpus(params)
    paths = synth.write_corpus_dir(args.out, params, records, manifest, html_export=args.html)
    print(f"{len(records)} raw records ({manifest['unique_count']} unique) written to {paths['raw']}")


def cmd_report(args):
    bundle = report.AnalysisBundle.from_dict(json.loads(Path(args.inputs).read_text()))
    if args.chart:
        print(json.dumps(report.chart_series(bundle), indent=2))
    else:
        print(report.render(bundle, args.format), end="")


def cmd_run(args):
    config = args.config or os.environ.get("LEAKSCOPE_CONFIG")
    if not config:
        raise LeakscopeError("no config: pass --config or set LEAKSCOPE_CONFIG")
    bundle = report.run_pipeline(report.PipelineConfig.load(config))
    print(report.render(bundle, args.format), end="")


def cmd_validate(args):
    manifest = rulesets.validate_ruleset(args.file, args.kind)
    d = asdict(manifest)
    d["kind"] = manifest.kind.value
    print(json.dumps(d, indent=2))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="leakscope", description="Offline employer-disclosure and DISC risk analysis.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("dork", help="build a profile search query")
    s.add_argument("--site", required=True)
    s.add_argument("--region", required=True)
    s.add_argument("--country", required=True)
    s.add_argument("--company", required=True)
    s.add_argument("--type", nargs="+", action="extend", metavar="T")
    s.add_argument("--keywords", action="append", metavar="A,B,...", help="extra OR group (repeatable)")
    s.add_argument("--style", choices=[x.value for x in dorkgen.Style], default="verbatim")
    s.set_defaults(func=cmd_dork)

    s = sub.add_parser("ingest", help="parse exports into a pseudonymized corpus")
    s.add_argument("--in", dest="inputs", nargs="+", required=True)
    s.add_argument("--format", choices=["html", "csv", "tsv"], required=True)
    s.add_argument("--salt-file", required=True)
    s.add_argument("--selectors", help="JSON selector profile for HTML exports")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("wrangle", help="inspect, clean, dedupe and verify a corpus")
    s.add_argument("--in", dest="inputs", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--report", required=True)
    s.set_defaults(func=cmd_wrangle)

    s = sub.add_parser("scan", help="detect disclosures")
    s.add_argument("--in", dest="inputs", required=True)
    s.add_argument("--rules", default=str(leakscan.DEFAULT_RULES_PATH))
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_scan)

    s = sub.add_parser("persona", help="estimate DISC scores")
    s.add_argument("--in", dest="inputs", required=True)
    s.add_argument("--lexicon", default=str(persona.DEFAULT_LEXICON_PATH))
    s.add_argument("--min-tokens", type=int, default=persona.DEFAULT_MIN_TOKENS)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_persona)

    s = sub.add_parser("analyze", help="incident table, Pareto and hypotheses")
    s.add_argument("--corpus", required=True)
    s.add_argument("--findings", required=True)
    s.add_argument("--persona", required=True)
    s.add_argument("--threshold", type=float, default=analytics.DEFAULT_THRESHOLD)
    s.add_argument("--wrangle-report", help="wrangle report JSON, for the raw record count")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("synth", help="generate a synthetic raw corpus")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--params")
    g.add_argument("--published", action="store_true", help="use the published study's counts")
    s.add_argument("--seed", type=int)
    s.add_argument("--html", action="store_true", help="also write an HTML export page")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("report", help="render an analysis file")
    s.add_argument("--in", dest="inputs", required=True)
    s.add_argument("--format", choices=["text", "csv", "json"], default="text")
    s.add_argument("--chart", action="store_true", help="emit Pareto chart data series")
    s.set_defaults(func=cmd_report)

    s = sub.add_parser("run", help="run the whole pipeline from a config file")
    s.add_argument("--config", help="defaults to $LEAKSCOPE_CONFIG")
    s.add_argument("--format", choices=["text", "csv", "json"], default="text")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("validate", help="validate a rules or lexicon file")
    s.add_argument("--file", required=True)
    s.add_argument("--kind", choices=[k.value for k in rulesets.FileKind], required=True)
    s.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except report.PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO if isinstance(exc.cause, OSError) else EXIT_VALIDATION
    except LeakscopeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
