"""Seeded synthetic corpora with planted duplicates, disclosures and DISC-typed text."""

import csv
import html
import io
import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import LeakscopeError
from .ingest import EXPERIENCE_ATTRS, RawRecord
from .leakscan import Impact, LeakRule, load_rules
from .persona import TRAITS, TraitLexicon, load_lexicon

BASE_TIME = datetime(2019, 3, 1, tzinfo=timezone.utc)
SITE = "website.com"

TITLES = ("Project Manager", "Network Engineer", "Systems Administrator", "Finance Officer",
          "Operations Lead", "Software Developer", "Procurement Officer", "Sales Manager",
          "Data Engineer", "Office Coordinator")
COMPANIES = ("Northwind Holdings", "Contoso Group", "Fabrikam Industries", "Tailspin Logistics",
             "Woodgrove Finance", "Litware Systems")
REGIONS = ("Region Area, Country", "North Region, Country", "Coastal Area, Country")
EMPLOYMENT = ("Consultant", "Contractor", "Full time", "Temporary")
MONTHS = ("Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec")

FILLER = (
    "Works with colleagues across the region.",
    "Has held several roles in the company.",
    "Based in the main office.",
    "Holds a degree in business administration.",
    "Enjoys cycling and reading at weekends.",
    "Studied economics at a public university.",
    "Speaks two languages.",
    "Joined the organisation after graduating.",
    "Volunteers at a local charity.",
    "Interested in history and music.",
)
TRAIT_TEMPLATES = (
    "Known as {0} and {1} in every team.",
    "Often described as {0}, {1} and {2}.",
    "Peers call the working style {0} and {1}.",
)
LEAK_TEMPLATES = (
    "Current work includes {0} topics.",
    "Recent tasks involved {0} items.",
    "Responsibilities cover {0} matters.",
)


class InfeasibleParams(LeakscopeError):
    pass


@dataclass
class SynthParams:
    seed: int = 0
    raw_count: int = 0
    duplicate_count: int = 0
    events_per_group: Dict[str, int] = field(default_factory=lambda: {g: 0 for g in TRAITS})
    incidents_per_group: Dict[str, int] = field(default_factory=lambda: {g: 0 for g in TRAITS})
    reversed_dates: int = 0
    rules_path: Optional[str] = None
    lexicon_path: Optional[str] = None

    @property
    def unique_count(self) -> int:
        return self.raw_count - self.duplicate_count

    def check(self) -> None:
        ev = {g: int(self.events_per_group.get(g, 0)) for g in TRAITS}
        inc = {g: int(self.incidents_per_group.get(g, 0)) for g in TRAITS}
        extra = set(self.events_per_group) | set(self.incidents_per_group)
        if extra - set(TRAITS):
            raise InfeasibleParams(f"unknown groups {sorted(extra - set(TRAITS))}")
        if min(list(ev.values()) + list(inc.values()) + [self.raw_count, self.duplicate_count,
                                                          self.reversed_dates]) < 0:
            raise InfeasibleParams("counts must be non-negative")
        if self.raw_count == 0:
            if any(ev.values()) or any(inc.values()) or self.duplicate_count or self.reversed_dates:
                raise InfeasibleParams("an empty corpus needs all counts zero")
            return
        if self.duplicate_count >= self.raw_count:
            raise InfeasibleParams("duplicate_count must be below raw_count")
        for g in TRAITS:
            if inc[g] > ev[g]:
                raise InfeasibleParams(f"group {g}: incidents {inc[g]} exceed events {ev[g]}")
        if sum(ev.values()) > self.unique_count:
            raise InfeasibleParams(f"{sum(ev.values())} events exceed {self.unique_count} unique profiles")
        if self.reversed_dates > self.unique_count:
            raise InfeasibleParams("more reversed dates than unique profiles")

    @classmethod
    def from_dict(cls, d: dict) -> "SynthParams":
        return cls(**d)


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def _pick(rng: np.random.Generator, seq: Sequence, k: int = 1, replace: bool = False) -> list:
    idx = rng.choice(len(seq), size=k, replace=replace)
    return [seq[int(i)] for i in idx]


def _date_text(rng: np.random.Generator, year: int, month: int) -> str:
    style = int(rng.integers(3))
    if style == 0:
        return f"{year}-{month:02d}"
    if style == 1:
        return f"{MONTHS[month - 1]} {year}"
    return str(year)


class _TextBuilder:
    """Joins sentences with single spaces and remembers where leak phrases land."""

    def __init__(self, field_name: str):
        self.field = field_name
        self.parts: List[str] = []
        self.length = 0
        self.planted: List[dict] = []

    def add(self, sentence: str) -> None:
        if self.parts:
            self.length += 1
        self.parts.append(sentence)
        self.length += len(sentence)

    def add_leak(self, rule: LeakRule, template: str) -> None:
        before, after = template.split("{0}")
        start = self.length + (1 if self.parts else 0) + len(before)
        self.add(before + rule.pattern + after)
        self.planted.append({"rule_id": rule.id, "impact": rule.impact.value, "field": self.field,
                             "start": start, "end": start + len(rule.pattern), "text": rule.pattern})

    def text(self) -> str:
        return " ".join(self.parts)


def _trait_sentence(rng, words: Sequence[str]) -> str:
    template = _pick(rng, TRAIT_TEMPLATES)[0]
    n = template.count("{")
    return template.format(*_pick(rng, words, n))


def _make_profile(seed: int, k: int, role: dict, trait_words: Dict[str, List[str]],
                  high_rules: List[LeakRule], low_rules: List[LeakRule]) -> Tuple[RawRecord, dict]:
    rng = _rng(seed, 0, k)
    trait = role["group"]
    words = trait_words[trait]

    leaks: List[LeakRule] = []
    if role["incident"]:
        leaks += _pick(rng, high_rules)
        if rng.random() < 0.5:
            leaks += _pick(rng, low_rules)
    elif role["event"]:
        leaks += _pick(rng, low_rules, int(rng.integers(1, 3)))

    n_exp = int(rng.integers(1, 4))
    builders = [_TextBuilder("summary")] + [_TextBuilder(f"experiences[{j}].description") for j in range(n_exp)]
    homes = [int(rng.integers(len(builders))) for _ in leaks]

    summary = builders[0]
    for s in _pick(rng, FILLER, 2):
        summary.add(s)
    for _ in range(3):
        summary.add(_trait_sentence(rng, words))
    for b in builders[1:]:
        b.add(_pick(rng, FILLER)[0])
        b.add(_trait_sentence(rng, words))
    for rule, home in zip(leaks, homes):
        builders[home].add_leak(rule, _pick(rng, LEAK_TEMPLATES)[0])

    fields = {
        "name": f"Synthetic Person {k:05d}",
        "region": _pick(rng, REGIONS)[0],
        "employment_type": _pick(rng, EMPLOYMENT)[0],
        "summary": summary.text(),
    }
    title = _pick(rng, TITLES)[0]
    fields["headline"] = f"{title} at {_pick(rng, COMPANIES)[0]}"
    reversed_at = int(rng.integers(n_exp)) if role["reversed"] else -1
    year = 2000 + int(rng.integers(0, 8))
    for j in range(n_exp):
        start = (year, int(rng.integers(1, 13)))
        year = year + int(rng.integers(1, 4))
        end = (year, int(rng.integers(1, 13)))
        if j == reversed_at:
            start, end = end, start
        fields[f"experience.{j}.title"] = title if j == 0 else _pick(rng, TITLES)[0]
        fields[f"experience.{j}.company"] = _pick(rng, COMPANIES)[0]
        fields[f"experience.{j}.location"] = fields["region"]
        fields[f"experience.{j}.date_from"] = _date_text(rng, *start)
        fields[f"experience.{j}.date_to"] = _date_text(rng, *end)
        fields[f"experience.{j}.description"] = builders[j + 1].text()

    uri = f"https://{SITE}/in/synthetic-person-{k:05d}"
    record = RawRecord(uri, BASE_TIME + timedelta(hours=k), fields)
    truth = {
        "name": fields["name"],
        "source_uri": uri,
        "group": trait,
        "event": role["event"],
        "incident": role["incident"],
        "reversed_date": role["reversed"],
        "planted": [p for b in builders for p in b.planted],
    }
    return record, truth


def generate_corpus(params: SynthParams, rules: Optional[Sequence[LeakRule]] = None,
                    lexicon: Optional[TraitLexicon] = None) -> Tuple[List[RawRecord], dict]:
    """Generate raw records plus a manifest of every planted truth.

    Output is a pure function of ``params`` (and the rule/lexicon files).
    """
    params.check()
    if rules is None:
        rules = load_rules(params.rules_path) if params.rules_path else load_rules()
    if lexicon is None:
        lexicon = load_lexicon(params.lexicon_path) if params.lexicon_path else load_lexicon()
    high = [r for r in rules if r.impact is Impact.HIGH]
    low = [r for r in rules if r.impact is Impact.LOW]
    trait_words = {t: sorted(p for p, (tr, _) in lexicon.entries.items() if tr == t) for t in TRAITS}
    if any(len(w) < 3 for w in trait_words.values()) or not high or not low:
        raise InfeasibleParams("lexicon needs 3+ entries per trait and rules need both impact levels")

    n = params.unique_count if params.raw_count else 0
    roles = []
    for g in TRAITS:
        for j in range(int(params.events_per_group.get(g, 0))):
            roles.append({"group": g, "event": True, "incident": j < int(params.incidents_per_group.get(g, 0))})
    layout = _rng(params.seed, 1)
    while len(roles) < n:
        roles.append({"group": TRAITS[int(layout.integers(4))], "event": False, "incident": False})
    roles = [roles[int(i)] for i in layout.permutation(n)] if n else []
    flips = set(int(i) for i in _rng(params.seed, 2).choice(n, size=params.reversed_dates, replace=False)) if n else set()
    for k, role in enumerate(roles):
        role["reversed"] = k in flips

    records, truths = [], []
    for k, role in enumerate(roles):
        rec, truth = _make_profile(params.seed, k, role, trait_words, high, low)
        records.append(rec)
        truths.append(truth)

    dup_rng = _rng(params.seed, 3)
    duplicates = []
    for d in range(params.duplicate_count):
        src = records[int(dup_rng.integers(n))]
        fields = dict(src.fields)
        if dup_rng.random() < 0.5:
            fields.pop("region", None)
        stamp = src.extracted_at + timedelta(days=int(dup_rng.integers(1, 60)), minutes=d)
        duplicates.append(RawRecord(src.source_uri, stamp, fields))
    all_records = records + duplicates
    order = dup_rng.permutation(len(all_records)) if all_records else []
    all_records = [all_records[int(i)] for i in order]

    manifest = {
        "seed": params.seed,
        "raw_count": len(all_records),
        "unique_count": n,
        "duplicate_count": params.duplicate_count,
        "events": {g: sum(t["event"] and t["group"] == g for t in truths) for g in TRAITS},
        "incidents": {g: sum(t["incident"] and t["group"] == g for t in truths) for g in TRAITS},
        "reversed_dates": params.reversed_dates,
        "duplicates_of": [d.source_uri for d in duplicates],
        "profiles": truths,
    }
    return all_records, manifest


CSV_FIXED = ("source_uri", "extracted_at", "name", "headline", "summary", "region", "employment_type")


def records_to_csv(records: Sequence[RawRecord], delimiter: str = ",") -> str:
    max_exp = 0
    for r in records:
        for key in r.fields:
            if key.startswith("experience."):
                max_exp = max(max_exp, int(key.split(".")[1]) + 1)
    header = list(CSV_FIXED) + [f"experience.{j}.{a}" for j in range(max_exp) for a in EXPERIENCE_ATTRS]
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    w.writerow(header)
    for r in records:
        row = dict(r.fields, source_uri=r.source_uri, extracted_at=r.extracted_at.isoformat())
        w.writerow([row.get(h, "") for h in header])
    return buf.getvalue()


def records_to_html(records: Sequence[RawRecord]) -> str:
    """Render records as a profile export page readable by ``ingest_html_export``."""
    esc = html.escape
    out = ["<!DOCTYPE html>", "<html><head><meta charset=\"utf-8\"><title>export</title></head><body>"]
    for r in records:
        f = r.fields
        out.append(f'<div class="profile-card" data-source="{esc(r.source_uri)}" '
                   f'data-extracted-at="{esc(r.extracted_at.isoformat())}">')
        for key, cls, tag in (("name", "name", "h2"), ("headline", "headline", "p"), ("region", "region", "p"),
                              ("employment_type", "employment-type", "p"), ("summary", "summary", "section")):
            if key in f:
                out.append(f'  <{tag} class="{cls}">{esc(f[key])}</{tag}>')
        n = 0
        while any(f"experience.{n}.{a}" in f for a in EXPERIENCE_ATTRS):
            out.append('  <div class="position">')
            for a in EXPERIENCE_ATTRS:
                key = f"experience.{n}.{a}"
                if key in f:
                    out.append(f'    <span class="{a.replace("_", "-")}">{esc(f[key])}</span>')
            out.append("  </div>")
            n += 1
        out.append("</div>")
    out.append("</body></html>")
    return "\n".join(out) + "\n"


def write_corpus_dir(out_dir, params: SynthParams, records: Sequence[RawRecord], manifest: dict,
                     html_export: bool = False) -> Dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"raw": out / "raw.csv", "manifest": out / "manifest.json", "params": out / "params.json"}
    paths["raw"].write_text(records_to_csv(records), encoding="utf-8")
    paths["manifest"].write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    paths["params"].write_text(json.dumps(asdict(params), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    if html_export:
        paths["html"] = out / "raw.html"
        paths["html"].write_text(records_to_html(records), encoding="utf-8")
    return paths


def published_params(seed: int = 2019) -> SynthParams:
    """Counts from the published field study: 866 raw records, 470 unique, 120 events, 49 incidents."""
    return SynthParams(
        seed=seed,
        raw_count=866,
        duplicate_count=396,
        events_per_group={"D": 21, "I": 6, "S": 23, "C": 70},
        incidents_per_group={"D": 9, "I": 3, "S": 6, "C": 31},
        reversed_dates=12,
    )
