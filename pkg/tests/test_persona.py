import pytest
from hypothesis import given, settings, strategies as st

from leakscope.errors import SchemaError
from leakscope.ingest import Profile
from leakscope.persona import (
    TRAITS,
    BigFiveScores,
    DiscScores,
    InsufficientText,
    OutOfRange,
    RiskTier,
    estimate_disc,
    load_lexicon,
    map_bigfive_to_disc,
    parse_lexicon,
    raw_trait_scores,
    read_personas,
    risk_tier,
    score_corpus,
    scores_from_raw,
    write_personas,
)

LEX = load_lexicon()
C_TEXT = ["precise, analytical, procedure, standard, protocol. " * 8]


def tier_of(dominant):
    return risk_tier(scores_from_raw({t: float(t == dominant) for t in TRAITS}))


def test_empty_texts():
    with pytest.raises(InsufficientText):
        estimate_disc([], LEX)


def test_short_text():
    with pytest.raises(InsufficientText):
        estimate_disc(["only a few words here"], LEX)


def test_c_terms_give_c():
    s = estimate_disc(C_TEXT, LEX)
    assert s.dominant == "C" and s.c == max(s.as_dict().values())
    assert s.risk_tier is RiskTier.LOW_RISK_TAKING
    assert s.evidence_tokens == 5


def test_hand_counted_raw_scores():
    lex = parse_lexicon("[entries]\nbold\tD\t2\ncalm\tS\t1\n")
    text = "bold calm calm plan. " * 10  # 40 tokens
    raw, distinct = raw_trait_scores([text], lex)
    assert raw == pytest.approx({"D": 10 * 2 / 40, "I": 0.0, "S": 20 / 40, "C": 0.0})
    assert distinct == 2


def test_duplicated_texts_identical():
    texts = ["I am bold and decisive! Maybe we should check the protocol.", "Patient, calm and tactful. " * 6]
    assert estimate_disc(texts + texts, LEX) == estimate_disc(texts, LEX)


def test_text_order_irrelevant():
    texts = ["Bold and direct. " * 5, "patient and calm listener. " * 4, "precise standards!"]
    assert estimate_disc(texts, LEX) == estimate_disc(texts[::-1], LEX)


def test_no_signal_is_uniform():
    lex = parse_lexicon("[entries]\nzebra\tI\t1\n")
    s = estimate_disc(["plain words " * 20], lex)
    assert (s.d, s.i, s.s, s.c, s.dominant) == (0.25, 0.25, 0.25, 0.25, "D")


@pytest.mark.parametrize("dominant,tier", [
    ("D", RiskTier.HIGH_RISK_TAKING), ("I", RiskTier.HIGH_RISK_TAKING),
    ("S", RiskTier.LOW_RISK_TAKING), ("C", RiskTier.LOW_RISK_TAKING),
])
def test_risk_tier(dominant, tier):
    assert tier_of(dominant) is tier


def test_bigfive_conscientious():
    assert map_bigfive_to_disc(BigFiveScores(0, 1, 0, 0, 0)).dominant == "C"


def test_bigfive_all_equal_ties_to_d():
    s = map_bigfive_to_disc(BigFiveScores(0.5, 0.5, 0.5, 0.5, 0.5))
    assert s.dominant == "D" and s.d == pytest.approx(0.25)


def test_bigfive_open_neurotic():
    s = map_bigfive_to_disc(BigFiveScores(0.9, 0.2, 0.2, 0.2, 0.7))
    assert s.dominant == "D" and s.risk_tier is RiskTier.HIGH_RISK_TAKING
    assert s.d == pytest.approx(0.8 / 1.4)


@pytest.mark.parametrize("bad", [-0.1, 1.5, float("nan")])
def test_bigfive_out_of_range(bad):
    with pytest.raises(OutOfRange):
        map_bigfive_to_disc(BigFiveScores(bad, 0.5, 0.5, 0.5, 0.5))


def test_tie_break_priority():
    assert scores_from_raw({"D": 0, "I": 1, "S": 1, "C": 1}).dominant == "I"
    assert scores_from_raw({"D": 0, "I": 0, "S": 2, "C": 2}).dominant == "S"


@pytest.mark.parametrize("text,line", [
    ("", 1),
    ("bold\tD\t1\n", 1),
    ("[entries]\nbold\tX\t1\n", 2),
    ("[entries]\nbold\tD\t0\n", 2),
    ("[entries]\nbold\tD\t1\nBold\tI\t1\n", 3),
    ("[features]\nshouting\tD\t1\n", 2),
])
def test_lexicon_schema(text, line):
    with pytest.raises(SchemaError) as info:
        parse_lexicon(text)
    assert info.value.line == line


def test_persona_file_round_trip(tmp_path):
    profiles = [Profile("a", "ha", summary=C_TEXT[0]), Profile("b", "hb", summary="too short")]
    scores, failures = score_corpus(profiles, LEX)
    assert set(scores) == {"a"} and set(failures) == {"b"}
    write_personas(tmp_path / "p.jsonl", scores, failures)
    assert read_personas(tmp_path / "p.jsonl") == scores
    assert DiscScores.from_dict(scores["a"].to_dict()) == scores["a"]


raws = st.fixed_dictionaries({t: st.one_of(st.just(0.0), st.floats(1e-3, 100)) for t in TRAITS})


def separated(raw):
    # scaling can round two values within an ulp into a tie; keep them apart or exactly equal
    vals = sorted(raw.values())
    return all(a == b or b - a > 1e-9 * b for a, b in zip(vals, vals[1:]))


@settings(max_examples=300, deadline=None)
@given(raws.filter(separated), st.floats(1e-6, 1e6))
def test_scaling_keeps_dominant(raw, lam):
    a = scores_from_raw(raw)
    b = scores_from_raw({t: v * lam for t, v in raw.items()})
    if sum(raw.values()) > 0:
        assert a.dominant == b.dominant and a.risk_tier == b.risk_tier
    assert abs(a.d + a.i + a.s + a.c - 1) <= 1e-9
    assert a.risk_tier is tier_of(a.dominant)
