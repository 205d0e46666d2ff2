"""Analysis bundle rendering and the end-to-end pipeline."""

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from .analytics import (DEFAULT_THRESHOLD, Expectation, GroupStats, HypothesisOutcome,
                        ParetoReport, Verdict, build_incident_table, evaluate_hypotheses,
                        pareto_analysis, tie_rank)
from .errors import LeakscopeError
from .ingest import (RawRecord, SelectorProfile, ingest_html_export, ingest_table_file, normalize_all,
                     write_corpus)
from .leakscan import DEFAULT_RULES_PATH, corpus_risk_summary, load_rules, scan_corpus, write_findings
from .persona import DEFAULT_LEXICON_PATH, DEFAULT_MIN_TOKENS, load_lexicon, score_corpus, write_personas
from .wrangle import wrangle

log = logging.getLogger(__name__)

GROUP_NAMES = {"D": "Dominance", "I": "Influence", "S": "Steadiness", "C": "Conscientiousness"}
POISONING_CAVEAT = ("Persona scores come from an open lexicon scorer over public text; "
                    "deliberately planted wording can shift them.")


class PipelineError(LeakscopeError):
    """An error raised inside a pipeline stage, labelled with that stage."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")


class ConfigError(LeakscopeError):
    def __init__(self, stage: str, message: str):
        self.stage = stage
        super().__init__(f"[{stage}] configuration error: {message}")


@dataclass
class AnalysisBundle:
    raw_count: int
    unique_count: int
    events: int
    incidents: int
    low_share: int
    high_share: int
    table: List[GroupStats]
    pareto: ParetoReport
    hypotheses: List[HypothesisOutcome]
    caveats: List[str] = field(default_factory=list)

    def __post_init__(self):
        if self.incidents > self.events:
            raise LeakscopeError("bundle has more incidents than events")
        if self.unique_count > self.raw_count:
            raise LeakscopeError("bundle has more unique profiles than raw records")

    def to_dict(self) -> dict:
        return {
            "corpus": {"raw": self.raw_count, "unique": self.unique_count, "events": self.events,
                       "incidents": self.incidents, "low_share_pct": self.low_share,
                       "high_share_pct": self.high_share},
            "table": [{"group": r.group, "events": r.events, "incidents": r.incidents,
                       "incident_share_pct": r.incident_share_pct, "incidence_rate": r.incidence_rate}
                      for r in self.table],
            "pareto": {"ordering": list(self.pareto.ordering), "counts": list(self.pareto.counts),
                       "cumulative_share": list(self.pareto.cumulative_share),
                       "vital_few": list(self.pareto.vital_few), "threshold": self.pareto.threshold,
                       "total_incidents": self.pareto.total_incidents},
            "hypotheses": [{"id": h.id, "group": h.group, "expected": h.expected.value,
                            "observed_rate": h.observed_rate, "corpus_mean_rate": h.corpus_mean_rate,
                            "verdict": h.verdict.value} for h in self.hypotheses],
            "caveats": list(self.caveats),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AnalysisBundle":
        c, p = d["corpus"], d["pareto"]
        return cls(
            raw_count=c["raw"], unique_count=c["unique"], events=c["events"], incidents=c["incidents"],
            low_share=c["low_share_pct"], high_share=c["high_share_pct"],
            table=[GroupStats(**r) for r in d["table"]],
            pareto=ParetoReport(tuple(p["ordering"]), tuple(p["counts"]), tuple(p["cumulative_share"]),
                                tuple(p["vital_few"]), p["threshold"], p["total_incidents"]),
            hypotheses=[HypothesisOutcome(h["id"], h["group"], Expectation(h["expected"]), h["observed_rate"],
                                          h["corpus_mean_rate"], Verdict(h["verdict"])) for h in d["hypotheses"]],
            caveats=list(d.get("caveats", [])),
        )


def assemble_bundle(table: List[GroupStats], raw_count: int, unique_count: int, low_share: int,
                    high_share: int, threshold: float = DEFAULT_THRESHOLD,
                    caveats: Sequence[str] = ()) -> AnalysisBundle:
    return AnalysisBundle(
        raw_count=raw_count, unique_count=unique_count,
        events=sum(r.events for r in table), incidents=sum(r.incidents for r in table),
        low_share=low_share, high_share=high_share, table=table,
        pareto=pareto_analysis(table, threshold), hypotheses=evaluate_hypotheses(table),
        caveats=[POISONING_CAVEAT, *caveats],
    )


def chart_series(bundle: AnalysisBundle) -> Dict[str, list]:
    """Pareto chart data: groups by incidents descending with aligned cumulative share."""
    rows = sorted(bundle.table, key=lambda r: (-r.incidents, tie_rank(r.group)))
    total = sum(r.incidents for r in rows)
    cumulative, running = [], 0
    for r in rows:
        running += r.incidents
        cumulative.append(running / total if total else 0.0)
    return {"groups": [r.group for r in rows], "incidents": [r.incidents for r in rows],
            "cumulative_share": cumulative}


def _pct(x: float) -> str:
    return f"{100 * x:.1f}%"


def _render_text(b: AnalysisBundle) -> str:
    lines = [
        f"Corpus: {b.raw_count} raw records, {b.unique_count} unique profiles, "
        f"{b.events} events, {b.incidents} incidents",
        f"Risk split over events: {b.low_share}% low, {b.high_share}% high",
        "",
        f"{'DISC':<20}{'Events':>8}{'Incidents':>11}{'% Data Disclosed':>18}",
    ]
    share_sum = sum(r.incident_share_pct for r in b.table)
    footnote = b.incidents > 0 and share_sum != 100
    if b.events:
        for r in b.table:
            lines.append(f"{GROUP_NAMES.get(r.group, r.group):<20}{r.events:>8}{r.incidents:>11}"
                         f"{str(r.incident_share_pct) + '%':>18}")
        total_pct = f"{share_sum}%" + ("*" if footnote else "")
        lines.append(f"{'Total':<20}{b.events:>8}{b.incidents:>11}{total_pct:>18}")

    p = b.pareto
    lines += ["", f"Pareto analysis (threshold {_pct(p.threshold)})"]
    if p.ordering:
        lines.append(f"  {'Rank':<6}{'Group':<8}{'Incidents':>10}{'Cumulative':>12}")
        for rank, (g, n, c) in enumerate(zip(p.ordering, p.counts, p.cumulative_share), 1):
            lines.append(f"  {rank:<6}{g:<8}{n:>10}{_pct(c):>12}")
        lines.append(f"Vital few: {', '.join(p.vital_few)} ({_pct(p.vital_share)})")

    if b.hypotheses and b.events:
        lines += ["", "Hypotheses"]
        for h in b.hypotheses:
            lines.append(f"  {h.id}  {h.group}  expected {h.expected.value:<9}"
                         f"rate {h.observed_rate:.3f} vs mean {h.corpus_mean_rate:.3f}  {h.verdict.value}")
    if footnote:
        lines += ["", f"* Group percentages are each rounded half away from zero and sum to {share_sum}%, "
                      "not 100%; prose figures rounded differently may disagree by one point."]
    if b.caveats:
        lines += ["", "Caveats:"] + [f"  - {c}" for c in b.caveats]
    return "\n".join(lines) + "\n"


def render(bundle: AnalysisBundle, format: str = "text") -> str:
    format = format.lower()
    if format == "text":
        return _render_text(bundle)
    if format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["group", "events", "incidents", "incident_share_pct", "incidence_rate"])
        for r in bundle.table:
            w.writerow([r.group, r.events, r.incidents, r.incident_share_pct, repr(r.incidence_rate)])
        return buf.getvalue()
    if format == "json":
        return json.dumps(bundle.to_dict(), indent=2, sort_keys=True) + "\n"
    raise ValueError(f"unknown format {format!r}")


@dataclass
class PipelineConfig:
    inputs: List[str]
    salt_file: str
    workdir: str
    format: str = "csv"
    rules: Optional[str] = None
    lexicon: Optional[str] = None
    min_tokens: int = DEFAULT_MIN_TOKENS
    threshold: float = DEFAULT_THRESHOLD
    selectors: Optional[dict] = None

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        """Read a JSON config; relative paths resolve against the config's directory."""
        path = Path(path)
        data = json.loads(path.read_text(encoding="utf-8"))
        base = path.parent

        def resolve(p):
            return None if p is None else str((base / p) if not Path(p).is_absolute() else Path(p))

        try:
            cfg = cls(**data)
        except TypeError as exc:
            raise ConfigError("config", str(exc)) from None
        cfg.inputs = [resolve(p) for p in cfg.inputs]
        cfg.salt_file, cfg.workdir = resolve(cfg.salt_file), resolve(cfg.workdir)
        cfg.rules, cfg.lexicon = resolve(cfg.rules), resolve(cfg.lexicon)
        return cfg


def _check_config(cfg: PipelineConfig) -> None:
    if cfg.format not in ("html", "csv", "tsv"):
        raise ConfigError("ingest", f"unknown input format {cfg.format!r}")
    for p in cfg.inputs:
        if not Path(p).is_file():
            raise ConfigError("ingest", f"input not found: {p}")
    if not Path(cfg.salt_file).is_file():
        raise ConfigError("ingest", f"salt file not found: {cfg.salt_file}")
    if cfg.rules is not None and not Path(cfg.rules).is_file():
        raise ConfigError("scan", f"ruleset not found: {cfg.rules}")
    if cfg.lexicon is not None and not Path(cfg.lexicon).is_file():
        raise ConfigError("persona", f"lexicon not found: {cfg.lexicon}")


class _Stage:
    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        log.info("stage %s", self.name)
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, PipelineError) and isinstance(exc, (LeakscopeError, OSError, ValueError)):
            raise PipelineError(self.name, exc) from exc
        return False


def read_inputs(paths: Sequence[str], fmt: str, selectors: Optional[SelectorProfile] = None):
    """Read export files in the given order. Returns (records, skipped card count)."""
    records: List[RawRecord] = []
    skipped = 0
    for path in paths:
        data = Path(path).read_bytes()
        if fmt == "html":
            batch = ingest_html_export(data, source_uri=Path(path).name, selectors=selectors)
            skipped += batch.skipped_count
            records.extend(batch)
        else:
            records.extend(ingest_table_file(data, fmt, source_uri=Path(path).name))
    return records, skipped


def run_pipeline(cfg: PipelineConfig) -> AnalysisBundle:
    """ingest -> wrangle -> scan -> persona -> analyze, persisting every intermediate file."""
    _check_config(cfg)
    work = Path(cfg.workdir)
    work.mkdir(parents=True, exist_ok=True)
    caveats = []

    with _Stage("ingest"):
        salt = Path(cfg.salt_file).read_bytes()
        selectors = SelectorProfile.from_dict(cfg.selectors) if cfg.selectors else None
        records, skipped = read_inputs(cfg.inputs, cfg.format, selectors)
        profiles, rejected = normalize_all(records, salt)
        write_corpus(work / "profiles.jsonl", profiles)
        if skipped:
            caveats.append(f"{skipped} unparseable profile cards were skipped at ingestion.")
        if rejected:
            caveats.append(f"{len(rejected)} records lacked required fields and were rejected.")

    with _Stage("wrangle"):
        unique, report, verification, dropped = wrangle(profiles)
        write_corpus(work / "corpus.jsonl", unique)
        (work / "wrangle_report.json").write_text(json.dumps({
            "report": report.to_dict(),
            "duplicates_dropped": dropped,
            "unique_count": len(unique),
            "verification": {"passed": verification.passed, "failures": verification.failures},
        }, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        if not verification.passed:
            caveats.append("Wrangling verification failed: " + "; ".join(verification.failures))

    with _Stage("scan"):
        rules = load_rules(cfg.rules or DEFAULT_RULES_PATH)
        findings = scan_corpus(unique, rules)
        write_findings(work / "findings.jsonl", findings)
        summary = corpus_risk_summary(unique, findings)

    with _Stage("persona"):
        lexicon = load_lexicon(cfg.lexicon or DEFAULT_LEXICON_PATH)
        scores, failures = score_corpus(unique, lexicon, cfg.min_tokens)
        write_personas(work / "persona.jsonl", scores, failures)
        if failures:
            caveats.append(f"{len(failures)} profiles had too little text for a persona estimate.")

    with _Stage("analyze"):
        table = build_incident_table(unique, findings, scores)
        bundle = assemble_bundle(table, len(records), len(unique), summary.low_share, summary.high_share,
                                 cfg.threshold, caveats)
        (work / "analysis.json").write_text(render(bundle, "json"), encoding="utf-8")
    return bundle
