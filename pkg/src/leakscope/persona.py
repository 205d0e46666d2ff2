"""Open lexicon-and-style DISC scorer, plus the Big-Five to DISC mapping."""

import json
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .errors import LeakscopeError, SchemaError
from .ingest import Profile
from .textnorm import TOKEN_RE, compile_phrase

TRAITS = ("D", "I", "S", "C")  # also the tie-break priority
DEFAULT_LEXICON_PATH = Path(__file__).parent / "data" / "disc_lexicon.tsv"
DEFAULT_MIN_TOKENS = 30

FIRST_PERSON_SINGULAR = frozenset({"i", "me", "my", "mine", "myself", "i'm", "i've", "i'd", "i'll"})
HEDGE_WORDS = frozenset({"maybe", "perhaps", "possibly", "might", "somewhat", "probably", "fairly",
                         "rather", "quite", "seems", "seem", "arguably", "likely", "hopefully", "guess"})
IMPERATIVE_VERBS = frozenset({"let", "lets", "let's", "join", "contact", "call", "reach", "ask", "check",
                              "follow", "connect", "see", "get", "take", "make", "send", "visit", "email",
                              "message", "find", "read", "try", "start", "come"})
_SENTENCE_END = re.compile(r"[.!?]+(?=\s|$)")


class InsufficientText(LeakscopeError):
    pass


class OutOfRange(LeakscopeError):
    pass


class RiskTier(str, Enum):
    HIGH_RISK_TAKING = "HighRiskTaking"
    LOW_RISK_TAKING = "LowRiskTaking"


def _style_mean_sentence_length(s: "_TextStats") -> float:
    return min(s.tokens / s.sentences / 30.0, 1.0) if s.sentences else 0.0


STYLE_FEATURES = {
    "mean_sentence_length": _style_mean_sentence_length,
    "exclamation_rate": lambda s: s.exclaimed / s.sentences if s.sentences else 0.0,
    "first_person_singular_rate": lambda s: s.first_person / s.tokens if s.tokens else 0.0,
    "imperative_rate": lambda s: s.imperative / s.sentences if s.sentences else 0.0,
    "hedge_word_rate": lambda s: s.hedges / s.tokens if s.tokens else 0.0,
}


@dataclass(frozen=True)
class DiscScores:
    d: float
    i: float
    s: float
    c: float
    dominant: str
    risk_tier: RiskTier
    evidence_tokens: int = 0

    def as_dict(self) -> Dict[str, float]:
        return {"D": self.d, "I": self.i, "S": self.s, "C": self.c}

    def to_dict(self) -> dict:
        return {"d": self.d, "i": self.i, "s": self.s, "c": self.c, "dominant": self.dominant,
                "risk_tier": self.risk_tier.value, "evidence_tokens": self.evidence_tokens}

    @classmethod
    def from_dict(cls, d: Mapping) -> "DiscScores":
        return cls(d["d"], d["i"], d["s"], d["c"], d["dominant"], RiskTier(d["risk_tier"]),
                   d.get("evidence_tokens", 0))


@dataclass(frozen=True)
class BigFiveScores:
    openness: float
    conscientiousness: float
    extraversion: float
    agreeableness: float
    neuroticism: float


@dataclass
class TraitLexicon:
    entries: Dict[str, Tuple[str, float]]
    style_features: List[Tuple[str, str, float]] = field(default_factory=list)
    version: str = ""

    def __post_init__(self):
        self._compiled = [(phrase, compile_phrase(phrase), trait, w) for phrase, (trait, w) in self.entries.items()]


@dataclass
class _TextStats:
    tokens: int = 0
    sentences: int = 0
    exclaimed: int = 0
    first_person: int = 0
    imperative: int = 0
    hedges: int = 0


def parse_lexicon(text: str) -> TraitLexicon:
    """Parse the sectioned lexicon format (``[entries]`` then ``[features]``)."""
    entries: Dict[str, Tuple[str, float]] = {}
    features: List[Tuple[str, str, float]] = []
    section = None
    version = ""
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            body = stripped.lstrip("#").strip()
            if body.lower().startswith("version:"):
                version = body.split(":", 1)[1].strip()
            continue
        if stripped in ("[entries]", "[features]"):
            section = stripped[1:-1]
            continue
        if section is None:
            raise SchemaError(lineno, "entry outside of a [entries]/[features] section")
        cols = [c.strip() for c in line.split("\t")]
        if len(cols) != 3:
            raise SchemaError(lineno, f"expected 3 tab-separated columns, got {len(cols)}")
        name, trait, weight = cols
        if trait not in TRAITS:
            raise SchemaError(lineno, f"unknown trait {trait!r}")
        try:
            w = float(weight)
        except ValueError:
            raise SchemaError(lineno, f"weight {weight!r} is not a number") from None
        if not (w > 0 and math.isfinite(w)):
            raise SchemaError(lineno, "weight must be positive")
        if not name:
            raise SchemaError(lineno, "empty phrase")
        if section == "entries":
            key = " ".join(name.casefold().split())
            if key in entries:
                raise SchemaError(lineno, f"phrase {name!r} already mapped")
            entries[key] = (trait, w)
        else:
            if name not in STYLE_FEATURES:
                raise SchemaError(lineno, f"unknown style feature {name!r}")
            features.append((name, trait, w))
    if not entries and not features:
        raise SchemaError(max(1, len(text.splitlines())), "no lexicon entries")
    return TraitLexicon(entries, features, version)


def load_lexicon(path=DEFAULT_LEXICON_PATH) -> TraitLexicon:
    return parse_lexicon(Path(path).read_text(encoding="utf-8"))


def _sentences(text: str) -> List[Tuple[str, str]]:
    """Split into (sentence, terminator) pairs; empty sentences dropped."""
    out, start = [], 0
    for m in _SENTENCE_END.finditer(text):
        out.append((text[start:m.start()], m.group(0)))
        start = m.end()
    out.append((text[start:], ""))
    return [(s, end) for s, end in out if TOKEN_RE.search(s)]


def _stats(texts: Sequence[str]) -> _TextStats:
    st = _TextStats()
    for text in texts:
        for sentence, end in _sentences(text):
            toks = [t.casefold() for t in TOKEN_RE.findall(sentence)]
            st.tokens += len(toks)
            st.sentences += 1
            st.exclaimed += "!" in end
            st.imperative += toks[0] in IMPERATIVE_VERBS
            st.first_person += sum(t in FIRST_PERSON_SINGULAR for t in toks)
            st.hedges += sum(t in HEDGE_WORDS for t in toks)
    return st


def raw_trait_scores(texts: Sequence[str], lexicon: TraitLexicon,
                     min_tokens: int = DEFAULT_MIN_TOKENS) -> Tuple[Dict[str, float], int]:
    """Unnormalized per-trait scores and the number of distinct lexicon entries hit.

    Lexicon hits are counted as integers and divided by the token count, so
    repeating the corpus leaves every score unchanged.
    """
    st = _stats(texts)
    if st.tokens < max(min_tokens, 1):
        raise InsufficientText(f"{st.tokens} tokens, need at least {max(min_tokens, 1)}")
    hits = {t: 0.0 for t in TRAITS}
    distinct = 0
    for phrase, rx, trait, weight in lexicon._compiled:
        n = sum(len(rx.findall(text)) for text in texts)
        if n:
            distinct += 1
            hits[trait] += n * weight
    raw = {t: hits[t] / st.tokens for t in TRAITS}
    for name, trait, weight in lexicon.style_features:
        raw[trait] += weight * STYLE_FEATURES[name](st)
    return raw, distinct


def dominant_trait(raw: Mapping[str, float]) -> str:
    best = TRAITS[0]
    for t in TRAITS[1:]:
        if raw[t] > raw[best]:
            best = t
    return best


def risk_tier(scores) -> RiskTier:
    """HighRiskTaking for D or I dominance, LowRiskTaking for S or C.

    This is the a-priori hypothesis tier; analytics tests it against data.
    """
    dominant = scores if isinstance(scores, str) else scores.dominant
    return RiskTier.HIGH_RISK_TAKING if dominant in ("D", "I") else RiskTier.LOW_RISK_TAKING


def scores_from_raw(raw: Mapping[str, float], evidence_tokens: int = 0) -> DiscScores:
    total = sum(raw[t] for t in TRAITS)
    if total > 0:
        norm = {t: raw[t] / total for t in TRAITS}
    else:
        norm = {t: 0.25 for t in TRAITS}
    dominant = dominant_trait(raw if total > 0 else norm)
    return DiscScores(norm["D"], norm["I"], norm["S"], norm["C"], dominant, risk_tier(dominant), evidence_tokens)


def estimate_disc(texts: Sequence[str], lexicon: TraitLexicon,
                  min_tokens: int = DEFAULT_MIN_TOKENS) -> DiscScores:
    raw, distinct = raw_trait_scores(texts, lexicon, min_tokens)
    return scores_from_raw(raw, distinct)


def map_bigfive_to_disc(b: BigFiveScores) -> DiscScores:
    values = (b.openness, b.conscientiousness, b.extraversion, b.agreeableness, b.neuroticism)
    for v in values:
        if not (isinstance(v, (int, float)) and 0.0 <= v <= 1.0):
            raise OutOfRange(f"Big-Five component {v!r} outside [0, 1]")
    raw = {
        "D": (b.openness + b.neuroticism) / 2,
        "I": b.extraversion,
        "S": b.agreeableness,
        "C": b.conscientiousness,
    }
    return scores_from_raw(raw)


def profile_texts(profile: Profile) -> List[str]:
    return [text for _, text in profile.text_fields() if text]


def score_corpus(profiles: Sequence[Profile], lexicon: TraitLexicon,
                 min_tokens: int = DEFAULT_MIN_TOKENS) -> Tuple[Dict[str, DiscScores], Dict[str, str]]:
    """Score every profile. Returns (scores by id, failure reason by id)."""
    scores, failures = {}, {}
    for p in profiles:
        try:
            scores[p.id] = estimate_disc(profile_texts(p), lexicon, min_tokens)
        except InsufficientText as exc:
            failures[p.id] = str(exc)
    return scores, failures


def write_personas(path, scores: Mapping[str, DiscScores], failures: Optional[Mapping[str, str]] = None) -> None:
    failures = failures or {}
    with open(path, "w", encoding="utf-8") as fh:
        for pid in sorted(set(scores) | set(failures)):
            rec = {"profile_id": pid}
            if pid in scores:
                rec["scores"] = scores[pid].to_dict()
            else:
                rec["error"] = failures[pid]
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def read_personas(path) -> Dict[str, DiscScores]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                if "scores" in rec:
                    out[rec["profile_id"]] = DiscScores.from_dict(rec["scores"])
    return out
