"""Incident tabulation per DISC group, Pareto ranking and hypothesis verdicts."""

import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Mapping, Optional, Sequence, Tuple

from .errors import LeakscopeError
from .ingest import Profile
from .leakscan import DisclosureFinding, Impact, RiskLabel, assign_risk
from .persona import TRAITS, DiscScores
from .textnorm import whole_percent

# Pareto tie-break among equal incident counts; other labels follow alphabetically.
TIE_ORDER = ("C", "D", "I", "S")
DEFAULT_THRESHOLD = 0.80


class MissingPersona(LeakscopeError):
    def __init__(self, profile_id: str):
        self.profile_id = profile_id
        super().__init__(f"no DISC scores for event profile {profile_id}")


class BadThreshold(LeakscopeError):
    pass


class Expectation(str, Enum):
    HIGH_RISK = "HighRisk"
    LOW_RISK = "LowRisk"


class Verdict(str, Enum):
    SUPPORTED = "Supported"
    REFUTED = "Refuted"
    INCONCLUSIVE = "Inconclusive"


HYPOTHESES = (
    ("H1", "D", Expectation.HIGH_RISK),
    ("H2", "I", Expectation.HIGH_RISK),
    ("H3", "S", Expectation.LOW_RISK),
    ("H4", "C", Expectation.LOW_RISK),
)


@dataclass(frozen=True)
class GroupStats:
    group: str
    events: int
    incidents: int
    incident_share_pct: int
    incidence_rate: float


@dataclass(frozen=True)
class ParetoReport:
    ordering: Tuple[str, ...]
    counts: Tuple[int, ...]
    cumulative_share: Tuple[float, ...]
    vital_few: Tuple[str, ...]
    threshold: float
    total_incidents: int

    @property
    def vital_share(self) -> float:
        return self.cumulative_share[len(self.vital_few) - 1] if self.vital_few else 0.0


@dataclass(frozen=True)
class HypothesisOutcome:
    id: str
    group: str
    expected: Expectation
    observed_rate: float
    corpus_mean_rate: float
    verdict: Verdict


def make_table(events: Mapping[str, int], incidents: Mapping[str, int],
               groups: Sequence[str] = TRAITS) -> List[GroupStats]:
    """Build GroupStats rows from per-group counts."""
    total = sum(incidents.get(g, 0) for g in groups)
    rows = []
    for g in groups:
        e, n = events.get(g, 0), incidents.get(g, 0)
        if n > e:
            raise LeakscopeError(f"group {g}: {n} incidents exceed {e} events")
        rows.append(GroupStats(g, e, n, whole_percent(n, total), n / e if e else 0.0))
    return rows


def build_incident_table(profiles: Sequence[Profile],
                         findings: Mapping[str, Sequence[DisclosureFinding]],
                         disc: Mapping[str, DiscScores],
                         labels: Optional[Mapping[str, RiskLabel]] = None) -> List[GroupStats]:
    """Group events and incidents by each profile's dominant DISC trait.

    An event is a profile with at least one finding; an incident is an event
    labelled High. ``labels`` default to :func:`assign_risk` over the findings.
    """
    events = {g: 0 for g in TRAITS}
    incidents = {g: 0 for g in TRAITS}
    for p in sorted(profiles, key=lambda p: p.id):
        fs = findings.get(p.id, ())
        if not fs:
            continue
        if p.id not in disc:
            raise MissingPersona(p.id)
        group = disc[p.id].dominant
        label = labels[p.id] if labels is not None and p.id in labels else assign_risk(fs)
        events[group] += 1
        if label.value is Impact.HIGH:
            incidents[group] += 1
    return make_table(events, incidents)


def tie_rank(group: str) -> Tuple[int, str]:
    return (TIE_ORDER.index(group) if group in TIE_ORDER else len(TIE_ORDER), group)


def pareto_analysis(table: Sequence[GroupStats], threshold: float = DEFAULT_THRESHOLD) -> ParetoReport:
    """Rank groups by incidents and pick the minimal prefix covering ``threshold``.

    Groups with no incidents are left out of the ordering.
    """
    if not (isinstance(threshold, (int, float)) and not math.isnan(threshold) and 0 < threshold <= 1):
        raise BadThreshold(f"threshold must be in (0, 1], got {threshold!r}")
    total = sum(row.incidents for row in table)
    ranked = sorted((row for row in table if row.incidents > 0),
                    key=lambda row: (-row.incidents, tie_rank(row.group)))
    cumulative, running = [], 0
    vital: List[str] = []
    for row in ranked:
        running += row.incidents
        cumulative.append(running / total)
    for row, share in zip(ranked, cumulative):
        vital.append(row.group)
        if share >= threshold:
            break
    return ParetoReport(
        ordering=tuple(row.group for row in ranked),
        counts=tuple(row.incidents for row in ranked),
        cumulative_share=tuple(cumulative),
        vital_few=tuple(vital),
        threshold=float(threshold),
        total_incidents=total,
    )


def evaluate_hypotheses(table: Sequence[GroupStats]) -> List[HypothesisOutcome]:
    """Compare each group's incidence rate against the corpus mean.

    Strict comparison: a rate equal to the mean refutes either expectation.
    """
    rows = {row.group: row for row in table}
    missing = [g for g in TRAITS if g not in rows]
    if missing:
        raise LeakscopeError(f"table lacks groups {', '.join(missing)}")
    total_events = sum(row.events for row in table)
    mean = sum(row.incidents for row in table) / total_events if total_events else 0.0
    out = []
    for hid, group, expected in HYPOTHESES:
        row = rows[group]
        rate = row.incidents / row.events if row.events else 0.0
        if row.events == 0:
            verdict = Verdict.INCONCLUSIVE
        elif expected is Expectation.HIGH_RISK:
            verdict = Verdict.SUPPORTED if rate > mean else Verdict.REFUTED
        else:
            verdict = Verdict.SUPPORTED if rate < mean else Verdict.REFUTED
        out.append(HypothesisOutcome(hid, group, expected, rate, mean, verdict))
    return out
