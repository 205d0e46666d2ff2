"""Rule-based detection of employer-information disclosure in profile text."""

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Pattern, Sequence, Tuple

from .errors import LeakscopeError, SchemaError
from .ingest import Profile
from .textnorm import compile_phrase, whole_percent


class DisclosureCategory(str, Enum):
    INTERNAL_SENSITIVE = "InternalSensitive"
    ICT_INFRASTRUCTURE = "IctInfrastructure"
    SENSITIVE_ROLE = "SensitiveRole"
    PERSONAL_JOB_LINKED = "PersonalJobLinked"


class Impact(str, Enum):
    LOW = "Low"
    HIGH = "High"


DEFAULT_IMPACT = {
    DisclosureCategory.INTERNAL_SENSITIVE: Impact.HIGH,
    DisclosureCategory.ICT_INFRASTRUCTURE: Impact.HIGH,
    DisclosureCategory.SENSITIVE_ROLE: Impact.LOW,
    DisclosureCategory.PERSONAL_JOB_LINKED: Impact.LOW,
}

RULE_COLUMNS = ("id", "category", "impact", "pattern", "note")
DEFAULT_RULES_PATH = Path(__file__).parent / "data" / "leak_rules.tsv"


class DuplicateRuleId(LeakscopeError):
    pass


class MixedProfileIds(LeakscopeError):
    pass


@dataclass(frozen=True)
class LeakRule:
    id: str
    category: DisclosureCategory
    pattern: str
    impact: Optional[Impact] = None
    note: str = ""

    def __post_init__(self):
        if not self.id:
            raise ValueError("rule id must be non-empty")
        if not self.pattern.strip():
            raise ValueError(f"rule {self.id}: empty pattern")
        if self.impact is None:
            object.__setattr__(self, "impact", DEFAULT_IMPACT[self.category])

    @property
    def regex(self) -> Pattern:
        return _compiled(self.pattern)


_CACHE: Dict[str, Pattern] = {}


def _compiled(phrase: str) -> Pattern:
    rx = _CACHE.get(phrase)
    if rx is None:
        rx = _CACHE[phrase] = compile_phrase(phrase)
    return rx


@dataclass(frozen=True)
class Evidence:
    field: str
    start: int
    end: int
    text: str


@dataclass(frozen=True)
class DisclosureFinding:
    profile_id: str
    rule_id: str
    category: DisclosureCategory
    impact: Impact
    evidence: Evidence

    def to_dict(self) -> dict:
        return {
            "profile_id": self.profile_id,
            "rule_id": self.rule_id,
            "category": self.category.value,
            "impact": self.impact.value,
            "evidence": {"field": self.evidence.field, "start": self.evidence.start,
                         "end": self.evidence.end, "text": self.evidence.text},
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "DisclosureFinding":
        ev = d["evidence"]
        return cls(d["profile_id"], d["rule_id"], DisclosureCategory(d["category"]), Impact(d["impact"]),
                   Evidence(ev["field"], ev["start"], ev["end"], ev["text"]))


@dataclass(frozen=True)
class RiskLabel:
    value: Impact
    rationale: Tuple[str, ...] = ()


@dataclass(frozen=True)
class RiskSummary:
    profiles: int
    events: int
    incidents: int
    low_share: int
    high_share: int


def parse_rules(text: str) -> Tuple[List[LeakRule], str]:
    """Parse a tab-separated ruleset. Returns (rules, version).

    Blank lines and ``#`` comments are ignored; ``# version: X`` sets the
    version. The first data line must be the column header.
    """
    rules: List[LeakRule] = []
    version = ""
    header: Optional[List[str]] = None
    seen: Dict[str, int] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            body = stripped.lstrip("#").strip()
            if body.lower().startswith("version:"):
                version = body.split(":", 1)[1].strip()
            continue
        cols = [c.strip() for c in line.split("\t")]
        if header is None:
            if tuple(cols) != RULE_COLUMNS:
                raise SchemaError(lineno, f"expected header {' '.join(RULE_COLUMNS)}")
            header = cols
            continue
        if len(cols) != len(RULE_COLUMNS):
            raise SchemaError(lineno, f"expected {len(RULE_COLUMNS)} tab-separated columns, got {len(cols)}")
        rid, cat, impact, pattern, note = cols
        try:
            rule = LeakRule(rid, DisclosureCategory(cat), pattern, Impact(impact) if impact else None, note)
        except ValueError as exc:
            raise SchemaError(lineno, str(exc)) from exc
        if rid in seen:
            raise SchemaError(lineno, f"duplicate rule id {rid!r} (first on line {seen[rid]})")
        seen[rid] = lineno
        rules.append(rule)
    if header is None:
        raise SchemaError(max(1, len(text.splitlines())), "no header line")
    return rules, version


def load_rules(path=DEFAULT_RULES_PATH) -> List[LeakRule]:
    return parse_rules(Path(path).read_text(encoding="utf-8"))[0]


def _check_rules(rules: Sequence[LeakRule]) -> None:
    if not rules:
        raise LeakscopeError("ruleset is empty")
    ids = set()
    for r in rules:
        if r.id in ids:
            raise DuplicateRuleId(r.id)
        ids.add(r.id)


def classify_profile(profile: Profile, rules: Sequence[LeakRule]) -> List[DisclosureFinding]:
    """Scan headline, summary and experience descriptions against every rule.

    One finding per non-overlapping match of each rule, sorted by
    (field scan order, start offset, rule id).
    """
    _check_rules(rules)
    found = []
    for rank, (fname, text) in enumerate(profile.text_fields()):
        if not text:
            continue
        for rule in rules:
            for m in rule.regex.finditer(text):
                found.append((rank, m.start(), rule.id, DisclosureFinding(
                    profile.id, rule.id, rule.category, rule.impact,
                    Evidence(fname, m.start(), m.end(), m.group(0)))))
    found.sort(key=lambda t: t[:3])
    return [t[3] for t in found]


def assign_risk(findings: Sequence[DisclosureFinding]) -> RiskLabel:
    if len({f.profile_id for f in findings}) > 1:
        raise MixedProfileIds(", ".join(sorted({f.profile_id for f in findings})))
    high = []
    for f in findings:
        if f.impact is Impact.HIGH and f.rule_id not in high:
            high.append(f.rule_id)
    return RiskLabel(Impact.HIGH if high else Impact.LOW, tuple(high))


def corpus_risk_summary(profiles: Sequence[Profile],
                        findings: Mapping[str, Sequence[DisclosureFinding]]) -> RiskSummary:
    """Count events (profiles with any finding) and incidents (High label).

    Low/high shares are whole percents of events, each rounded half away
    from zero on its own.
    """
    events = incidents = 0
    for p in sorted(profiles, key=lambda p: p.id):
        fs = findings.get(p.id, ())
        if fs:
            events += 1
            if assign_risk(fs).value is Impact.HIGH:
                incidents += 1
    return RiskSummary(len(profiles), events, incidents,
                       whole_percent(events - incidents, events), whole_percent(incidents, events))


def scan_corpus(profiles: Iterable[Profile], rules: Sequence[LeakRule]) -> Dict[str, List[DisclosureFinding]]:
    return {p.id: classify_profile(p, rules) for p in profiles}


def write_findings(path, findings: Mapping[str, Sequence[DisclosureFinding]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pid in sorted(findings):
            for f in findings[pid]:
                fh.write(json.dumps(f.to_dict(), sort_keys=True, ensure_ascii=False) + "\n")


def read_findings(path) -> Dict[str, List[DisclosureFinding]]:
    out: Dict[str, List[DisclosureFinding]] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                f = DisclosureFinding.from_dict(json.loads(line))
                out.setdefault(f.profile_id, []).append(f)
    return out
