import json

import pytest
from hypothesis import given, settings, strategies as st

from leakscope import synth
from leakscope.analytics import build_incident_table
from leakscope.cli import PUBLISHED_PARAMS_PATH
from leakscope.ingest import ingest_html_export, ingest_table_file, normalize_all
from leakscope.leakscan import corpus_risk_summary, load_rules, scan_corpus
from leakscope.persona import TRAITS, load_lexicon, score_corpus
from leakscope.synth import InfeasibleParams, SynthParams, generate_corpus, write_corpus_dir
from leakscope.textnorm import compile_phrase
from leakscope.wrangle import wrangle

RULES = load_rules()
LEX = load_lexicon()


def small(seed=7, **kw):
    base = dict(seed=seed, raw_count=60, duplicate_count=20,
                events_per_group={"D": 3, "I": 2, "S": 4, "C": 6},
                incidents_per_group={"D": 1, "I": 2, "S": 0, "C": 3}, reversed_dates=3)
    base.update(kw)
    return SynthParams(**base)


def recover(records):
    profiles, rejected = normalize_all(records, b"salt")
    assert rejected == []
    unique, report, verification, _ = wrangle(profiles)
    assert verification.passed, verification.failures
    findings = scan_corpus(unique, RULES)
    scores, failures = score_corpus(unique, LEX)
    assert failures == {}
    table = build_incident_table(unique, findings, scores)
    return unique, report, corpus_risk_summary(unique, findings), table


def test_empty_corpus():
    records, manifest = generate_corpus(SynthParams(seed=1))
    assert records == [] and manifest["unique_count"] == 0 and manifest["profiles"] == []


@pytest.mark.parametrize("params", [
    SynthParams(raw_count=0, duplicate_count=0, events_per_group={"D": 1}),
    SynthParams(raw_count=10, duplicate_count=10),
    SynthParams(raw_count=10, duplicate_count=2, events_per_group={"C": 9}),
    SynthParams(raw_count=10, events_per_group={"S": 1}, incidents_per_group={"S": 2}),
    SynthParams(raw_count=10, events_per_group={"X": 1}),
    SynthParams(raw_count=10, reversed_dates=11),
    SynthParams(raw_count=-1),
])
def test_infeasible(params):
    with pytest.raises(InfeasibleParams):
        generate_corpus(params)


def test_byte_identical_output(tmp_path):
    for out in ("a", "b"):
        params = small()
        records, manifest = generate_corpus(params)
        write_corpus_dir(tmp_path / out, params, records, manifest, html_export=True)
    for name in ("raw.csv", "manifest.json", "params.json", "raw.html"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_seed_changes_text_not_statistics():
    a_records, _ = generate_corpus(small(seed=1))
    b_records, _ = generate_corpus(small(seed=2))
    assert [r.fields for r in a_records] != [r.fields for r in b_records]
    _, _, sa, ta = recover(a_records)
    _, _, sb, tb = recover(b_records)
    assert sa == sb and ta == tb


def test_manifest_matches_params():
    params = small()
    records, manifest = generate_corpus(params)
    assert len(records) == manifest["raw_count"] == 60
    assert manifest["unique_count"] == 40 and len(manifest["duplicates_of"]) == 20
    assert manifest["events"] == params.events_per_group
    assert manifest["incidents"] == params.incidents_per_group
    assert sum(p["reversed_date"] for p in manifest["profiles"]) == 3
    for p in manifest["profiles"]:
        impacts = {x["impact"] for x in p["planted"]}
        if p["incident"]:
            assert "High" in impacts
        elif p["event"]:
            assert impacts == {"Low"}
        else:
            assert impacts == set()


def test_html_export_matches_csv():
    records, _ = generate_corpus(small())
    from_html = ingest_html_export(synth.records_to_html(records).encode())
    from_csv = ingest_table_file(synth.records_to_csv(records).encode())
    assert [r.fields for r in from_html] == [r.fields for r in from_csv] == [r.fields for r in records]
    assert [r.extracted_at for r in from_html] == [r.extracted_at for r in records]


def _hits(text):
    rule_hits = [r.id for r in RULES if r.regex.search(text)]
    lex_hits = [p for p in LEX.entries if compile_phrase(p).search(text)]
    return rule_hits, lex_hits


def test_neutral_text_is_neutral():
    neutral = list(synth.FILLER) + list(synth.TITLES) + list(synth.COMPANIES) + list(synth.REGIONS)
    neutral += [t.replace("{0}", "").replace("{1}", "").replace("{2}", "") for t in
                synth.TRAIT_TEMPLATES + synth.LEAK_TEMPLATES]
    neutral += ["Synthetic Person", "at", "[subject]"]
    for text in neutral:
        assert _hits(text) == ([], []), text


def test_lexicon_and_rules_disjoint():
    for phrase in LEX.entries:
        assert _hits(phrase)[0] == [], phrase
    for r in RULES:
        assert _hits(r.pattern)[1] == [], r.pattern


group_counts = st.fixed_dictionaries({g: st.integers(0, 4) for g in TRAITS})


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**63 - 1), group_counts, st.data())
def test_pipeline_recovers_manifest(seed, events, data):
    incidents = {g: data.draw(st.integers(0, events[g])) for g in TRAITS}
    unique_n = sum(events.values()) + data.draw(st.integers(1, 6))
    dups = data.draw(st.integers(0, 8))
    params = SynthParams(seed=seed, raw_count=unique_n + dups, duplicate_count=dups,
                         events_per_group=events, incidents_per_group=incidents,
                         reversed_dates=data.draw(st.integers(0, unique_n)))
    records, manifest = generate_corpus(params)
    unique, report, summary, table = recover(records)
    assert len(unique) == unique_n
    assert summary.events == sum(events.values()) and summary.incidents == sum(incidents.values())
    assert {r.group: r.events for r in table} == events
    assert {r.group: r.incidents for r in table} == incidents
    assert report.fixed >= params.reversed_dates


def test_published_params_file_matches_function():
    assert SynthParams.from_dict(json.loads(PUBLISHED_PARAMS_PATH.read_text())) == synth.published_params()
