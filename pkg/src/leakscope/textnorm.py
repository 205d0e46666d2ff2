"""Text canonicalization and whole-token phrase matching shared by the scanners."""

import re
import unicodedata
from fractions import Fraction
from typing import Iterator, List, Pattern, Tuple

_WS = re.compile(r"\s+")
TOKEN_RE = re.compile(r"\w+(?:[-'’]\w+)*")


def canonicalize(text) -> str:
    """NFC-compose, collapse whitespace runs to one space, strip the ends."""
    if text is None:
        return ""
    text = unicodedata.normalize("NFC", str(text))
    return _WS.sub(" ", text).strip()


def tokenize(text: str) -> List[str]:
    return TOKEN_RE.findall(text)


def compile_phrase(phrase: str) -> Pattern:
    """Compile a phrase into a case-insensitive whole-token regex.

    Words of the phrase must appear in order separated by whitespace; the
    match may not start or end inside a word. No stemming.
    """
    words = phrase.split()
    if not words:
        raise ValueError("empty phrase")
    body = r"\s+".join(re.escape(w) for w in words)
    return re.compile(r"(?<!\w)" + body + r"(?!\w)", re.IGNORECASE)


def iter_matches(pattern: Pattern, text: str) -> Iterator[Tuple[int, int]]:
    for m in pattern.finditer(text):
        yield m.start(), m.end()


def whole_percent(numerator: int, denominator: int) -> int:
    """Integer percent, rounded half away from zero; 0 when denominator is 0."""
    if denominator == 0:
        return 0
    value = Fraction(100 * numerator, denominator)
    sign = -1 if value < 0 else 1
    return sign * int(abs(value) + Fraction(1, 2))
