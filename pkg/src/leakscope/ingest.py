"""Offline ingestion of exported profile pages and tables into pseudonymized profiles."""

import calendar
import csv
import hashlib
import hmac
import io
import json
import re
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from bs4 import BeautifulSoup

from .errors import LeakscopeError
from .textnorm import canonicalize


class NotMarkup(LeakscopeError):
    pass


class MissingHeader(LeakscopeError):
    pass


class RowArityMismatch(LeakscopeError):
    def __init__(self, row: int, expected: int, got: int):
        self.row = row
        super().__init__(f"row {row}: expected {expected} columns, got {got}")


class MissingField(LeakscopeError):
    def __init__(self, name: str):
        self.field = name
        super().__init__(f"missing field: {name}")


class EmploymentCategory(str, Enum):
    CONTRACTOR = "Contractor"
    CONSULTANT = "Consultant"
    FULL_TIME = "FullTime"
    TEMPORARY = "Temporary"
    UNKNOWN = "Unknown"


# Checked in order; first keyword hit (earliest position) in the first field that hits wins.
CATEGORY_KEYWORDS: Dict[EmploymentCategory, Tuple[str, ...]] = {
    EmploymentCategory.CONTRACTOR: ("contractor", "contract"),
    EmploymentCategory.CONSULTANT: ("consultant", "consulting"),
    EmploymentCategory.FULL_TIME: ("full time", "full-time", "fulltime", "permanent"),
    EmploymentCategory.TEMPORARY: ("temporary", "temp", "fixed-term", "fixed term"),
}
_CATEGORY_RES = [
    (cat, re.compile(r"(?<!\w)(?:" + "|".join(re.escape(k).replace(r"\ ", r"\s+") for k in kws) + r")(?!\w)", re.I))
    for cat, kws in CATEGORY_KEYWORDS.items()
]

REQUIRED_COLUMNS = ("name", "headline", "summary")
EXPERIENCE_ATTRS = ("title", "company", "location", "date_from", "date_to", "description")
_EXP_KEY = re.compile(r"^experience\.(\d+)\.(\w+)$")
REDACTED = "[subject]"


@dataclass
class RawRecord:
    source_uri: str
    extracted_at: datetime
    fields: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.source_uri:
            raise ValueError("source_uri must be non-empty")


@dataclass(frozen=True)
class Experience:
    title: str = ""
    company: str = ""
    location: str = ""
    date_from: Optional[str] = None  # "YYYY-MM"
    date_to: Optional[str] = None
    description: str = ""


@dataclass(frozen=True)
class Profile:
    id: str
    subject_hash: str
    headline: str = ""
    summary: str = ""
    experiences: Tuple[Experience, ...] = ()
    region: str = ""
    employment_category: EmploymentCategory = EmploymentCategory.UNKNOWN
    notes: Tuple[str, ...] = ()

    def text_fields(self) -> List[Tuple[str, str]]:
        """(field name, text) pairs in canonical scan order."""
        out = [("headline", self.headline), ("summary", self.summary)]
        out += [(f"experiences[{i}].description", e.description) for i, e in enumerate(self.experiences)]
        return out


class RecordBatch(list):
    """A list of RawRecord that also remembers how many cards were skipped."""

    def __init__(self, records=(), skipped_count: int = 0):
        super().__init__(records)
        self.skipped_count = skipped_count


@dataclass
class SelectorProfile:
    """CSS selectors locating profile cards and their fields in an export page."""

    card: str = ".profile-card"
    source_attr: str = "data-source"
    extracted_at_attr: str = "data-extracted-at"
    fields: Dict[str, str] = field(default_factory=lambda: {
        "name": ".name",
        "headline": ".headline",
        "summary": ".summary",
        "region": ".region",
        "employment_type": ".employment-type",
    })
    experience: str = ".position"
    experience_fields: Dict[str, str] = field(default_factory=lambda: {
        "title": ".title",
        "company": ".company",
        "location": ".location",
        "date_from": ".date-from",
        "date_to": ".date-to",
        "description": ".description",
    })

    @classmethod
    def from_dict(cls, data: Mapping) -> "SelectorProfile":
        return cls(**dict(data))


def _parse_timestamp(value: Optional[str], default: datetime) -> datetime:
    if not value:
        return default
    ts = datetime.fromisoformat(value.strip().replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def ingest_html_export(document: bytes, source_uri: str = "export.html",
                       selectors: Optional[SelectorProfile] = None,
                       extracted_at: Optional[datetime] = None) -> RecordBatch:
    """Extract one RawRecord per profile card, in document order.

    Cards without a non-empty name, or with an unreadable timestamp, are
    skipped and counted in ``skipped_count``.
    """
    selectors = selectors or SelectorProfile()
    default_ts = extracted_at or datetime.now(timezone.utc)
    if isinstance(document, str):
        text = document
    else:
        try:
            text = document.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise NotMarkup(f"{source_uri}: not UTF-8 text") from exc
    if not text.strip():
        return RecordBatch()
    if "\x00" in text:
        raise NotMarkup(f"{source_uri}: binary content")
    soup = BeautifulSoup(text, "html.parser")
    if soup.find() is None:
        raise NotMarkup(f"{source_uri}: no markup elements found")

    records, skipped = [], 0
    for index, card in enumerate(soup.select(selectors.card)):
        values: Dict[str, str] = {}
        for name, sel in selectors.fields.items():
            node = card.select_one(sel)
            if node is not None:
                values[name] = node.get_text(" ", strip=True)
        for n, pos in enumerate(card.select(selectors.experience)):
            for attr, sel in selectors.experience_fields.items():
                node = pos.select_one(sel)
                if node is not None:
                    values[f"experience.{n}.{attr}"] = node.get_text(" ", strip=True)
        if not values.get("name", "").strip():
            skipped += 1
            continue
        try:
            ts = _parse_timestamp(card.get(selectors.extracted_at_attr), default_ts)
        except ValueError:
            skipped += 1
            continue
        uri = card.get(selectors.source_attr) or f"{source_uri}#card-{index}"
        records.append(RawRecord(uri, ts, values))
    return RecordBatch(records, skipped)


def ingest_table_file(data: bytes, format: str = "csv", source_uri: str = "export.csv",
                      extracted_at: Optional[datetime] = None) -> List[RawRecord]:
    """One RawRecord per data row of a CSV/TSV export.

    Row numbers in errors count the header as row 1. Optional ``source_uri``
    and ``extracted_at`` columns override the defaults per row.
    """
    delimiter = {"csv": ",", "tsv": "\t"}[format]
    default_ts = extracted_at or datetime.now(timezone.utc)
    text = data.decode("utf-8-sig") if isinstance(data, bytes) else data
    reader = csv.reader(io.StringIO(text, newline=""), delimiter=delimiter)
    header = next(reader, None)
    if not header:
        raise MissingHeader(f"{source_uri}: empty file")
    header = [h.strip() for h in header]
    missing = [c for c in REQUIRED_COLUMNS if c not in header]
    if missing:
        raise MissingHeader(f"{source_uri}: header lacks {', '.join(missing)}")

    records = []
    for rownum, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != len(header):
            raise RowArityMismatch(rownum, len(header), len(row))
        values = {k: v for k, v in zip(header, row) if v != ""}
        uri = values.pop("source_uri", None) or f"{source_uri}#row-{rownum}"
        ts = _parse_timestamp(values.pop("extracted_at", None), default_ts)
        records.append(RawRecord(uri, ts, values))
    return records


_MONTH_NAMES = [calendar.month_name[i].casefold() for i in range(1, 13)]
_ONGOING = {"present", "current", "now", "today"}


def _month_number(word: str) -> Optional[int]:
    word = word.casefold().rstrip(".")
    if len(word) < 3:
        return None
    for i, full in enumerate(_MONTH_NAMES, 1):
        if full.startswith(word):
            return i
    return None


def parse_month(text: Optional[str]) -> Tuple[Optional[str], bool]:
    """Parse a month-precision date. Returns (``"YYYY-MM"`` or None, ok).

    Accepted, in order: ``YYYY-MM``, ``Mon YYYY`` (full month names too),
    ``YYYY`` (taken as January). Blank or "Present" is a valid absent date.
    """
    text = canonicalize(text)
    if not text or text.casefold() in _ONGOING:
        return None, True
    m = re.fullmatch(r"(\d{4})-(\d{1,2})", text)
    if m and 1 <= int(m.group(2)) <= 12:
        return f"{m.group(1)}-{int(m.group(2)):02d}", True
    m = re.fullmatch(r"([A-Za-z]+\.?) (\d{4})", text)
    if m and _month_number(m.group(1)):
        return f"{m.group(2)}-{_month_number(m.group(1)):02d}", True
    if re.fullmatch(r"\d{4}", text):
        return f"{text}-01", True
    return None, False


def subject_digest(name: str, source_uri: str, salt: bytes) -> str:
    key = canonicalize(name).casefold()
    return hmac.new(salt, f"{key}\x1f{source_uri}".encode("utf-8"), hashlib.sha256).hexdigest()


def infer_category(values: Sequence[str]) -> EmploymentCategory:
    for text in values:
        best = None
        for cat, rx in _CATEGORY_RES:
            m = rx.search(text)
            if m and (best is None or m.start() < best[0]):
                best = (m.start(), cat)
        if best:
            return best[1]
    return EmploymentCategory.UNKNOWN


def _redact(text: str, name: str) -> str:
    # casefold rather than re.I: folding can change length ("ß" -> "ss")
    key = name.casefold()
    if not key or key not in text.casefold():
        return text
    out, i, n = [], 0, len(text)
    while i < n:
        folded, j = "", i
        while j < n and len(folded) < len(key) and key.startswith(folded):
            folded += text[j].casefold()
            j += 1
        if folded == key:
            out.append(REDACTED)
            i = j
        else:
            out.append(text[i])
            i += 1
    return "".join(out)


def normalize(record: RawRecord, salt: bytes, seq: int = 0) -> Profile:
    """Turn a raw record into a pseudonymized, canonical Profile.

    ``seq`` is the record's position in the corpus and makes ids unique even
    when two subjects share a digest prefix.
    """
    f = record.fields
    name = canonicalize(f.get("name"))
    if not name:
        raise MissingField("name")

    def text(value):
        return _redact(canonicalize(value), name)

    exp_keys: Dict[int, Dict[str, str]] = {}
    for key, value in f.items():
        m = _EXP_KEY.match(key)
        if m and m.group(2) in EXPERIENCE_ATTRS:
            exp_keys.setdefault(int(m.group(1)), {})[m.group(2)] = value
    notes = []
    experiences = []
    for n in sorted(exp_keys):
        raw = exp_keys[n]
        if not any(canonicalize(v) for v in raw.values()):
            continue
        dates = {}
        for attr in ("date_from", "date_to"):
            dates[attr], ok = parse_month(raw.get(attr))
            if not ok:
                notes.append(f"experiences[{len(experiences)}].{attr}: unparsed date {canonicalize(raw.get(attr))!r}")
        experiences.append(Experience(
            title=text(raw.get("title")),
            company=text(raw.get("company")),
            location=text(raw.get("location")),
            description=text(raw.get("description")),
            **dates,
        ))

    summary = text(f.get("summary"))
    if not summary and not experiences:
        raise MissingField("summary")

    headline = text(f.get("headline"))
    category = infer_category(
        [canonicalize(f.get(k)) for k in ("employment_type", "category")]
        + [headline] + [e.title for e in experiences] + [summary])
    digest = subject_digest(name, record.source_uri, salt)
    return Profile(
        id=f"{digest[:12]}-{seq:06d}",
        subject_hash=digest,
        headline=headline,
        summary=summary,
        experiences=tuple(experiences),
        region=text(f.get("region")),
        employment_category=category,
        notes=tuple(notes),
    )


def normalize_all(records: Iterable[RawRecord], salt: bytes) -> Tuple[List[Profile], List[str]]:
    """Normalize a corpus in order; records failing preconditions are reported, not fatal."""
    profiles, rejected = [], []
    for seq, rec in enumerate(records):
        try:
            profiles.append(normalize(rec, salt, seq))
        except MissingField as exc:
            rejected.append(f"{rec.source_uri}: {exc}")
    return profiles, rejected


def profile_to_dict(p: Profile) -> dict:
    d = asdict(p)
    d["employment_category"] = p.employment_category.value
    d["experiences"] = [asdict(e) for e in p.experiences]
    d["notes"] = list(p.notes)
    return d


def profile_from_dict(d: Mapping) -> Profile:
    return Profile(
        id=d["id"],
        subject_hash=d["subject_hash"],
        headline=d.get("headline", ""),
        summary=d.get("summary", ""),
        experiences=tuple(Experience(**e) for e in d.get("experiences", ())),
        region=d.get("region", ""),
        employment_category=EmploymentCategory(d.get("employment_category", "Unknown")),
        notes=tuple(d.get("notes", ())),
    )


def dump_profile(p: Profile) -> str:
    return json.dumps(profile_to_dict(p), sort_keys=True, ensure_ascii=False)


def write_corpus(path, profiles: Iterable[Profile]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in profiles:
            fh.write(dump_profile(p) + "\n")


def read_corpus(path) -> List[Profile]:
    with open(path, encoding="utf-8") as fh:
        return [profile_from_dict(json.loads(line)) for line in fh if line.strip()]


def raw_record_to_dict(r: RawRecord) -> dict:
    return {"source_uri": r.source_uri, "extracted_at": r.extracted_at.isoformat(), "fields": dict(r.fields)}
