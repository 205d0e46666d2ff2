import json
import unicodedata
from datetime import datetime, timezone

import pytest
from hypothesis import given, settings, strategies as st

from leakscope.ingest import (
    EmploymentCategory,
    MissingField,
    MissingHeader,
    NotMarkup,
    RawRecord,
    RowArityMismatch,
    SelectorProfile,
    dump_profile,
    ingest_html_export,
    ingest_table_file,
    normalize,
    normalize_all,
    parse_month,
    profile_from_dict,
    profile_to_dict,
    read_corpus,
    write_corpus,
)

TS = datetime(2019, 3, 1, tzinfo=timezone.utc)
SALT = b"unit-test-salt"


def record(**fields):
    return RawRecord("https://website.com/in/someone", TS, fields)


# HTML exports

def test_empty_document():
    batch = ingest_html_export(b"")
    assert batch == [] and batch.skipped_count == 0


def test_three_card_fixture(fixtures_dir):
    batch = ingest_html_export((fixtures_dir / "three_cards.html").read_bytes())
    assert len(batch) == 3 and batch.skipped_count == 0
    for r in batch:
        assert r.fields["name"] and r.fields["headline"] and r.fields["summary"]
    assert [r.fields["name"] for r in batch] == ["Ada Fixture", "Ben Fixture", "Cleo Fixture"]
    assert batch[0].fields["experience.0.date_to"] == "Present"
    assert batch[0].extracted_at == datetime(2019, 3, 4, 10, 0, tzinfo=timezone.utc)


def test_malformed_card_is_skipped(fixtures_dir):
    batch = ingest_html_export((fixtures_dir / "one_valid_one_malformed.html").read_bytes())
    assert len(batch) == 1 and batch.skipped_count == 1


def test_bad_timestamp_skips_card():
    doc = b'<div class="profile-card" data-extracted-at="yesterday"><p class="name">X Y</p></div>'
    batch = ingest_html_export(doc)
    assert len(batch) == 0 and batch.skipped_count == 1


@pytest.mark.parametrize("doc", [b"\xff\xfe\x00binary", b"just some words, no tags"])
def test_not_markup(doc):
    with pytest.raises(NotMarkup):
        ingest_html_export(doc)


def test_custom_selectors():
    doc = b'<ul><li class="p"><b>Zed Q</b><i>Bio text</i></li></ul>'
    sel = SelectorProfile.from_dict({"card": "li.p", "fields": {"name": "b", "summary": "i"}})
    batch = ingest_html_export(doc, selectors=sel, extracted_at=TS)
    assert batch[0].fields == {"name": "Zed Q", "summary": "Bio text"}


@settings(max_examples=50, deadline=None)
@given(st.lists(st.booleans(), max_size=8))
def test_records_plus_skipped_equals_cards(named):
    cards = "".join(
        f'<div class="profile-card"><span class="name">{"Person " + str(i) if ok else ""}</span></div>'
        for i, ok in enumerate(named))
    batch = ingest_html_export(f"<html><body>{cards}</body></html>".encode(), extracted_at=TS)
    assert len(batch) + batch.skipped_count == len(named)


# Table exports

def test_header_only(fixtures_dir):
    assert ingest_table_file((fixtures_dir / "header_only.csv").read_bytes(), "csv") == []


def test_five_rows(fixtures_dir):
    rows = ingest_table_file((fixtures_dir / "five_rows.csv").read_bytes(), "csv")
    assert len(rows) == 5
    assert rows[2].fields["experience.0.date_from"] == "Jan 2014"


def test_bad_arity_reports_row_two(fixtures_dir):
    with pytest.raises(RowArityMismatch) as info:
        ingest_table_file((fixtures_dir / "bad_arity.csv").read_bytes(), "csv")
    assert info.value.row == 2


def test_missing_header_columns():
    with pytest.raises(MissingHeader):
        ingest_table_file(b"name,headline\nA,B\n", "csv")
    with pytest.raises(MissingHeader):
        ingest_table_file(b"", "csv")


def test_column_order_irrelevant():
    a = ingest_table_file(b"name,headline,summary\nA B,h,s\n", "csv", extracted_at=TS)
    b = ingest_table_file(b"summary\theadline\tname\ns\th\tA B\n", "tsv", extracted_at=TS)
    assert a[0].fields == b[0].fields


# normalize

def test_missing_name():
    with pytest.raises(MissingField) as info:
        normalize(record(summary="text"), SALT)
    assert info.value.field == "name"


def test_missing_summary_and_experience():
    with pytest.raises(MissingField):
        normalize(record(name="A B", headline="h"), SALT)


def test_full_time_category():
    p = normalize(record(name="A B", summary="s", employment_type="Full time"), SALT)
    assert p.employment_category is EmploymentCategory.FULL_TIME


@pytest.mark.parametrize("value,cat", [
    ("Contractor", EmploymentCategory.CONTRACTOR),
    ("independent CONSULTANT", EmploymentCategory.CONSULTANT),
    ("temporary", EmploymentCategory.TEMPORARY),
    ("volunteer", EmploymentCategory.UNKNOWN),
])
def test_category_keywords(value, cat):
    assert normalize(record(name="A B", summary="s", employment_type=value), SALT).employment_category is cat


def test_deterministic():
    r = record(name="A B", summary="s  with   gaps", headline="h")
    assert normalize(r, SALT) == normalize(r, SALT)
    assert normalize(r, SALT).summary == "s with gaps"
    assert normalize(r, b"other salt").subject_hash != normalize(r, SALT).subject_hash


def test_canonical_composition():
    p = normalize(record(name="A B", summary="café"), SALT)
    assert p.summary == "café" == unicodedata.normalize("NFC", p.summary)


def test_experience_dates_and_notes():
    p = normalize(record(**{
        "name": "A B", "summary": "s",
        "experience.0.title": "Engineer", "experience.0.date_from": "Mar 2015",
        "experience.0.date_to": "Present",
        "experience.1.title": "Intern", "experience.1.date_from": "summer",
    }), SALT)
    assert p.experiences[0].date_from == "2015-03" and p.experiences[0].date_to is None
    assert p.experiences[1].date_from is None
    assert p.notes == ("experiences[1].date_from: unparsed date 'summer'",)


@pytest.mark.parametrize("text,expected", [
    ("2019-05", ("2019-05", True)),
    ("2019-5", ("2019-05", True)),
    ("Sep 2018", ("2018-09", True)),
    ("September 2018", ("2018-09", True)),
    ("2017", ("2017-01", True)),
    ("", (None, True)),
    ("Present", (None, True)),
    ("2019-13", (None, False)),
    ("soon", (None, False)),
])
def test_parse_month(text, expected):
    assert parse_month(text) == expected


def test_ids_unique_under_identical_subjects():
    r = record(name="A B", summary="s")
    profiles, rejected = normalize_all([r, r, record(headline="no name")], SALT)
    assert len({p.id for p in profiles}) == 2 and len(rejected) == 1
    assert profiles[0].subject_hash == profiles[1].subject_hash


names = st.tuples(
    st.text(st.characters(whitelist_categories=("Lu", "Ll")), min_size=2, max_size=10),
    st.text(st.characters(whitelist_categories=("Lu", "Ll")), min_size=2, max_size=10),
).map(" ".join)


@settings(max_examples=200, deadline=None)
@given(names, st.text(max_size=40), st.text(max_size=40))
def test_name_never_serialized(name, before, after):
    r = record(name=name, headline=f"{name} at work", summary=f"{before} {name} {after}",
               **{"experience.0.description": f"{name.upper()} did things"})
    p = normalize(r, SALT)
    canon = unicodedata.normalize("NFC", " ".join(name.split()))
    blob = dump_profile(p)
    assert canon.casefold() not in blob.casefold()
    assert p.subject_hash != name


def test_corpus_file_round_trip(tmp_path, fixtures_dir):
    batch = ingest_html_export((fixtures_dir / "three_cards.html").read_bytes())
    profiles, _ = normalize_all(batch, SALT)
    path = tmp_path / "corpus.jsonl"
    write_corpus(path, profiles)
    assert read_corpus(path) == profiles
    for line in path.read_text().splitlines():
        d = json.loads(line)
        assert set(d) == {"id", "subject_hash", "headline", "summary", "experiences", "region",
                          "employment_category", "notes"}
    assert profile_from_dict(profile_to_dict(profiles[0])) == profiles[0]
