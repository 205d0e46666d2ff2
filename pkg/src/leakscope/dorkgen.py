"""Build and parse search-engine dork queries for profile reconnaissance.

A query renders as::

    site:<domain> inurl:in ("<region>, <country>" AND "<company>") & ("a" OR "b") & (intext:"x" OR intext:"y")

The ``&`` joiner is the verbatim form; the normalized form writes ``AND``.
Employment types form the first plain OR group; extra keyword groups use
``intext:`` terms so they stay distinguishable when the employment group is
elided.
"""

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

from .errors import LeakscopeError

STANDARD_EMPLOYMENT_TYPES = ("consultant", "contractor", "full time", "temporary")

# Fixed path fragment for public profile pages.
PROFILE_URL_FRAGMENT = "in"

_LABEL = re.compile(r"^[a-z0-9](?:[a-z0-9-]{0,61}[a-z0-9])?$")


class DorkOperator(str, Enum):
    INTITLE = "intitle:"
    INURL = "inurl:"
    FILETYPE = "filetype:"
    INTEXT = "intext:"
    SITE = "site:"
    OR = "OR"
    AND = "AND"
    EXACT_PHRASE = '""'


class Style(str, Enum):
    VERBATIM = "verbatim"
    NORMALIZED = "normalized"


class QuerySpecError(LeakscopeError):
    pass


class InvalidSite(QuerySpecError):
    pass


class EmptyCompany(QuerySpecError):
    pass


class ParseError(LeakscopeError):
    def __init__(self, offset: int, expected: str):
        self.offset = offset
        self.expected = expected
        super().__init__(f"at byte {offset}: expected {expected}")


@dataclass(frozen=True)
class DorkTerm:
    """One operator occurrence; ``argument`` is empty for OR/AND."""

    kind: DorkOperator
    argument: str = ""

    def __post_init__(self):
        if self.kind in (DorkOperator.OR, DorkOperator.AND):
            if self.argument:
                raise QuerySpecError(f"{self.kind.value} takes no argument")
            return
        if not self.argument.strip():
            raise QuerySpecError(f"{self.kind.name} needs a non-empty argument")
        if '"' in self.argument:
            raise QuerySpecError(f"double quote in argument {self.argument!r}")

    def render(self) -> str:
        if self.kind in (DorkOperator.OR, DorkOperator.AND):
            return self.kind.value
        if self.kind is DorkOperator.EXACT_PHRASE:
            return f'"{self.argument}"'
        return f"{self.kind.value}{self.argument}"


@dataclass(frozen=True)
class QuerySpec:
    site: str
    region: str
    country: str
    company: str
    employment_types: Tuple[str, ...] = ()
    extra_groups: Tuple[Tuple[str, ...], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "employment_types", tuple(self.employment_types))
        object.__setattr__(self, "extra_groups", tuple(tuple(g) for g in self.extra_groups))

    def validate(self) -> None:
        if not is_valid_domain(self.site):
            raise InvalidSite(f"malformed domain: {self.site!r}")
        if not self.company.strip():
            raise EmptyCompany("company must be non-empty")
        for name in ("region", "country", "company"):
            if '"' in getattr(self, name):
                raise QuerySpecError(f"double quote in {name}")
        # the region/country phrase is split on its last ", "
        if "," in self.country:
            raise QuerySpecError("country may not contain a comma")
        seen = set()
        for t in self.employment_types:
            _check_term(t)
            key = t.casefold()
            if key in seen:
                raise QuerySpecError(f"duplicate employment type {t!r}")
            seen.add(key)
        for group in self.extra_groups:
            if not group:
                raise QuerySpecError("empty keyword group")
            for t in group:
                _check_term(t)


def _check_term(term: str) -> None:
    if not term.strip():
        raise QuerySpecError("empty search term")
    if '"' in term:
        raise QuerySpecError(f"double quote in term {term!r}")


def is_valid_domain(site: str) -> bool:
    labels = site.split(".")
    return len(labels) >= 2 and all(_LABEL.match(label) for label in labels)


def build_dork_query(spec: QuerySpec, style: Style = Style.VERBATIM) -> str:
    spec.validate()
    style = Style(style)
    joiner = "&" if style is Style.VERBATIM else DorkOperator.AND.value
    location = DorkTerm(DorkOperator.EXACT_PHRASE, f"{spec.region}, {spec.country}")
    company = DorkTerm(DorkOperator.EXACT_PHRASE, spec.company)
    parts = [
        DorkTerm(DorkOperator.SITE, spec.site).render(),
        DorkTerm(DorkOperator.INURL, PROFILE_URL_FRAGMENT).render(),
        f"({location.render()} AND {company.render()})",
    ]
    groups = []
    if spec.employment_types:
        groups.append([DorkTerm(DorkOperator.EXACT_PHRASE, t).render() for t in spec.employment_types])
    for group in spec.extra_groups:
        groups.append([DorkOperator.INTEXT.value + DorkTerm(DorkOperator.EXACT_PHRASE, t).render() for t in group])
    query = " ".join(parts)
    for g in groups:
        query += f" {joiner} (" + " OR ".join(g) + ")"
    return query


class _Cursor:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def offset(self, pos: Optional[int] = None) -> int:
        pos = self.pos if pos is None else pos
        return len(self.text[:pos].encode("utf-8"))

    def fail(self, expected: str, pos: Optional[int] = None):
        raise ParseError(self.offset(pos), expected)

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def peek(self, literal: str) -> bool:
        return self.text.startswith(literal, self.pos)

    def expect(self, literal: str) -> None:
        self.skip_ws()
        if not self.peek(literal):
            self.fail(repr(literal))
        self.pos += len(literal)

    def word(self) -> str:
        start = self.pos
        while self.pos < len(self.text) and not self.text[self.pos].isspace():
            self.pos += 1
        return self.text[start:self.pos]

    def phrase(self) -> str:
        self.skip_ws()
        if not self.peek('"'):
            self.fail("quoted phrase")
        end = self.text.find('"', self.pos + 1)
        if end < 0:
            self.fail("closing quote", len(self.text))
        value = self.text[self.pos + 1:end]
        self.pos = end + 1
        return value


def parse_dork_query(query: str) -> QuerySpec:
    """Inverse of :func:`build_dork_query`; accepts either joiner style."""
    cur = _Cursor(query)
    cur.expect(DorkOperator.SITE.value)
    site_pos = cur.pos
    site = cur.word()
    if not site:
        cur.fail("domain", site_pos)
    if not is_valid_domain(site):
        raise InvalidSite(f"malformed domain: {site!r} at byte {cur.offset(site_pos)}")
    cur.expect(DorkOperator.INURL.value + PROFILE_URL_FRAGMENT)
    if cur.pos < len(query) and not query[cur.pos].isspace():
        cur.fail("whitespace")

    cur.expect("(")
    loc_pos = cur.pos
    location = cur.phrase()
    if ", " not in location:
        cur.fail('"Region, Country" phrase', loc_pos)
    region, country = location.rsplit(", ", 1)
    cur.expect("AND")
    company = cur.phrase()
    cur.expect(")")

    employment: List[str] = []
    extras: List[Tuple[str, ...]] = []
    group_index = 0
    while not cur.at_end():
        if cur.peek("&"):
            cur.pos += 1
        elif cur.peek("AND"):
            cur.pos += 3
        else:
            cur.fail("'&' or 'AND'")
        cur.expect("(")
        terms, intext = _parse_group(cur)
        if intext:
            extras.append(tuple(terms))
        elif group_index == 0:
            employment = terms
        else:
            cur.fail("intext: term")
        group_index += 1

    spec = QuerySpec(site, region, country, company, tuple(employment), tuple(extras))
    spec.validate()
    return spec


def _parse_group(cur: _Cursor) -> Tuple[List[str], bool]:
    terms: List[str] = []
    kinds = set()
    while True:
        cur.skip_ws()
        intext = cur.peek(DorkOperator.INTEXT.value)
        if intext:
            cur.pos += len(DorkOperator.INTEXT.value)
        if kinds and intext not in kinds:
            cur.fail("terms of one kind within a group")
        kinds.add(intext)
        terms.append(cur.phrase())
        cur.skip_ws()
        if cur.peek(")"):
            cur.pos += 1
            return terms, intext
        cur.expect("OR")


def emitted_operators(query: str) -> List[DorkOperator]:
    """Operators present in a rendered query, in order of appearance."""
    found = []
    for m in re.finditer(r'"[^"]*"|\b(?:site|inurl|intitle|intext|filetype):|\bOR\b|\bAND\b|&', query):
        tok = m.group(0)
        if tok.startswith('"'):
            found.append(DorkOperator.EXACT_PHRASE)
        elif tok == "&":
            found.append(DorkOperator.AND)
        else:
            found.append(DorkOperator(tok))
    return found
