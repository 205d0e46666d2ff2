"""Validation of the shipped rule, lexicon and fixture data files."""

import hashlib
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import LeakscopeError, SchemaError
from .ingest import ingest_html_export, ingest_table_file
from .leakscan import DisclosureCategory, parse_rules
from .persona import TRAITS, parse_lexicon
from .textnorm import compile_phrase

DATA_DIR = Path(__file__).parent / "data"
MIN_RULES_PER_CATEGORY = 5
MIN_ENTRIES_PER_TRAIT = 10


class FileKind(str, Enum):
    LEAK_RULES = "rules"
    DISC_LEXICON = "lexicon"
    FIXTURE = "fixture"


class CoverageError(LeakscopeError):
    def __init__(self, target: str, have: int, need: int):
        self.target = target
        super().__init__(f"{target}: {have} entries, need at least {need}")


@dataclass(frozen=True)
class DataFileManifest:
    path: str
    kind: FileKind
    version: str
    entry_count: int
    checksum: str


def _line_of(text: str, prefix: str) -> int:
    for n, line in enumerate(text.splitlines(), 1):
        if line.startswith(prefix):
            return n
    return 1


def _validate_rules(text: str):
    rules, version = parse_rules(text)
    # a pattern nested inside another would double-report the same words
    for a in rules:
        rx = compile_phrase(a.pattern)
        for b in rules:
            if a is not b and rx.search(b.pattern):
                raise SchemaError(_line_of(text, b.id + "\t"),
                                  f"pattern {b.pattern!r} ({b.id}) contains {a.pattern!r} ({a.id})")
    for cat in DisclosureCategory:
        have = sum(r.category is cat for r in rules)
        if have < MIN_RULES_PER_CATEGORY:
            raise CoverageError(cat.value, have, MIN_RULES_PER_CATEGORY)
    return len(rules), version


def _validate_lexicon(text: str):
    lex = parse_lexicon(text)
    for t in TRAITS:
        have = sum(trait == t for trait, _ in lex.entries.values())
        if have < MIN_ENTRIES_PER_TRAIT:
            raise CoverageError(t, have, MIN_ENTRIES_PER_TRAIT)
    return len(lex.entries), lex.version


def validate_ruleset(path, kind) -> DataFileManifest:
    """Check a data file against its schema and coverage floors."""
    path = Path(path)
    kind = FileKind(kind)
    data = path.read_bytes()
    if kind is FileKind.FIXTURE:
        if path.suffix.lower() in (".html", ".htm"):
            count, version = len(ingest_html_export(data, source_uri=path.name)), ""
        else:
            fmt = "tsv" if path.suffix.lower() == ".tsv" else "csv"
            count, version = len(ingest_table_file(data, fmt, source_uri=path.name)), ""
    else:
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError:
            raise SchemaError(1, "file is not UTF-8 text") from None
        validate = _validate_rules if kind is FileKind.LEAK_RULES else _validate_lexicon
        count, version = validate(text)
    return DataFileManifest(str(path), kind, version, count, hashlib.sha256(data).hexdigest())
