"""Inspection, cleaning, verification and deduplication of normalized profiles."""

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Sequence, Tuple

from .errors import LeakscopeError
from .ingest import EmploymentCategory, Profile, infer_category


class AnomalyKind(str, Enum):
    UNEXPECTED_VALUE = "UnexpectedValue"
    INCORRECT_VALUE = "IncorrectValue"
    INCONSISTENT_VALUE = "InconsistentValue"
    DUPLICATE_CANDIDATE = "DuplicateCandidate"


class Action(str, Enum):
    FIX = "Fix"
    REMOVE = "Remove"
    KEEP = "Keep"


class UnknownProfileId(LeakscopeError):
    pass


@dataclass(frozen=True)
class Anomaly:
    profile_id: str
    kind: AnomalyKind
    field: str
    detail: str
    proposed_action: Action


@dataclass
class WranglingReport:
    input_count: int
    anomalies: List[Anomaly] = field(default_factory=list)
    fixed: int = 0
    removed: int = 0
    output_count: int = 0

    def to_dict(self) -> dict:
        return {
            "input_count": self.input_count,
            "anomalies": [
                {"profile_id": a.profile_id, "kind": a.kind.value, "field": a.field,
                 "detail": a.detail, "proposed_action": a.proposed_action.value}
                for a in self.anomalies
            ],
            "fixed": self.fixed,
            "removed": self.removed,
            "output_count": self.output_count,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WranglingReport":
        return cls(
            input_count=d["input_count"],
            anomalies=[Anomaly(a["profile_id"], AnomalyKind(a["kind"]), a["field"], a["detail"],
                               Action(a["proposed_action"])) for a in d.get("anomalies", [])],
            fixed=d["fixed"], removed=d["removed"], output_count=d["output_count"],
        )


@dataclass
class VerificationResult:
    passed: bool
    failures: List[str] = field(default_factory=list)
    anomalies: List[Anomaly] = field(default_factory=list)


_DATE_FIELD = re.compile(r"^experiences\[(\d+)\]\.date_from$")


def _title_category(profile: Profile) -> EmploymentCategory:
    return infer_category([e.title for e in profile.experiences])


def inspect(profiles: Sequence[Profile]) -> List[Anomaly]:
    """Flag anomalies in a corpus. Pure; output ordered by profile id then rule."""
    out: List[Anomaly] = []
    by_hash: Dict[str, List[Profile]] = {}
    for p in profiles:
        by_hash.setdefault(p.subject_hash, []).append(p)

    for p in sorted(profiles, key=lambda p: p.id):
        if not p.summary and not p.experiences:
            out.append(Anomaly(p.id, AnomalyKind.UNEXPECTED_VALUE, "summary",
                               "empty summary and no experience entries", Action.REMOVE))
        for note in p.notes:
            fld = note.split(":", 1)[0]
            out.append(Anomaly(p.id, AnomalyKind.UNEXPECTED_VALUE, fld, note, Action.KEEP))
        for i, e in enumerate(p.experiences):
            if e.date_from and e.date_to and e.date_from > e.date_to:
                out.append(Anomaly(p.id, AnomalyKind.INCORRECT_VALUE, f"experiences[{i}].date_from",
                                   f"starts {e.date_from} after it ends {e.date_to}", Action.FIX))
        titled = _title_category(p)
        if (p.employment_category is not EmploymentCategory.UNKNOWN
                and titled is not EmploymentCategory.UNKNOWN
                and titled is not p.employment_category):
            out.append(Anomaly(p.id, AnomalyKind.INCONSISTENT_VALUE, "employment_category",
                               f"{p.employment_category.value} but titles suggest {titled.value}",
                               Action.KEEP))
        peers = [q for q in by_hash[p.subject_hash] if q.id != p.id]
        if peers:
            same_headline = any(q.headline.casefold() == p.headline.casefold() for q in peers)
            detail = "shares subject with " + ", ".join(sorted(q.id for q in peers))
            if same_headline:
                detail += " (same headline)"
            out.append(Anomaly(p.id, AnomalyKind.DUPLICATE_CANDIDATE, "subject_hash", detail, Action.KEEP))
    return out


def _swap_dates(profile: Profile, index: int) -> Profile:
    exps = list(profile.experiences)
    e = exps[index]
    exps[index] = replace(e, date_from=e.date_to, date_to=e.date_from)
    return replace(profile, experiences=tuple(exps))


def clean(profiles: Sequence[Profile], anomalies: Sequence[Anomaly]) -> Tuple[List[Profile], WranglingReport]:
    """Apply proposed actions. Only reversed-date swaps are fixable."""
    by_id = {p.id: p for p in profiles}
    for a in anomalies:
        if a.profile_id not in by_id:
            raise UnknownProfileId(a.profile_id)
    doomed = {a.profile_id for a in anomalies if a.proposed_action is Action.REMOVE}
    fixed = 0
    for a in anomalies:
        if a.proposed_action is not Action.FIX or a.profile_id in doomed:
            continue
        m = _DATE_FIELD.match(a.field)
        if a.kind is AnomalyKind.INCORRECT_VALUE and m:
            p = by_id[a.profile_id]
            e = p.experiences[int(m.group(1))]
            if e.date_from and e.date_to and e.date_from > e.date_to:
                by_id[a.profile_id] = _swap_dates(p, int(m.group(1)))
                fixed += 1
    kept = [by_id[p.id] for p in profiles if p.id not in doomed]
    report = WranglingReport(
        input_count=len(profiles),
        anomalies=list(anomalies),
        fixed=fixed,
        removed=len(profiles) - len(kept),
        output_count=len(kept),
    )
    return kept, report


def completeness(p: Profile) -> int:
    n = sum(bool(v) for v in (p.headline, p.summary, p.region))
    n += p.employment_category is not EmploymentCategory.UNKNOWN
    for e in p.experiences:
        n += sum(bool(v) for v in (e.title, e.company, e.location, e.date_from, e.date_to, e.description))
    return n


def dedupe(profiles: Sequence[Profile]) -> List[Profile]:
    """Keep one profile per subject_hash: the most complete, then the lowest id."""
    best: Dict[str, Profile] = {}
    for p in profiles:
        cur = best.get(p.subject_hash)
        if cur is None or (-completeness(p), p.id) < (-completeness(cur), cur.id):
            best[p.subject_hash] = p
    return sorted(best.values(), key=lambda p: p.id)


def verify(before: Sequence[Profile], after: Sequence[Profile], report: WranglingReport) -> VerificationResult:
    failures: List[str] = []
    if report.output_count != report.input_count - report.removed:
        failures.append(f"report: output_count {report.output_count} != "
                        f"input_count {report.input_count} - removed {report.removed}")
    if report.input_count != len(before):
        failures.append(f"report: input_count {report.input_count} != {len(before)} profiles before cleaning")
    if len(after) > report.output_count:
        failures.append(f"{len(after)} profiles after wrangling exceed output_count {report.output_count}")
    found = inspect(after)
    bad = [a for a in found if a.proposed_action is Action.REMOVE]
    for a in bad:
        failures.append(f"{a.profile_id}: {a.kind.value} on {a.field} still present")
    dups = [a for a in found if a.kind is AnomalyKind.DUPLICATE_CANDIDATE]
    if dedupe(after) != list(after):
        failures.append(f"deduplication not at fixpoint ({len(dups)} duplicate candidates)")
    return VerificationResult(not failures, failures, bad + dups)


def wrangle(profiles: Sequence[Profile]) -> Tuple[List[Profile], WranglingReport, VerificationResult, int]:
    """inspect -> clean -> dedupe -> verify. Returns (unique, report, verification, duplicates dropped)."""
    anomalies = inspect(profiles)
    cleaned, report = clean(profiles, anomalies)
    unique = dedupe(cleaned)
    result = verify(profiles, unique, report)
    return unique, report, result, len(cleaned) - len(unique)
