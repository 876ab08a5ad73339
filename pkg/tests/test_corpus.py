import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gwbowv import corpus
from gwbowv import taxonomy as tx
from gwbowv.corpus import RawRecord, compose_text, compute_idf, ingest, tokenize
from gwbowv.errors import ToolkitError


def test_compose_text_repeats_title():
    text = compose_text("beeman of orn", "harpercollins continues", 3)
    assert text.endswith("beeman of orn beeman of orn beeman of orn")
    assert text.startswith("harpercollins continues")


def test_compose_text_weight_one_and_empty_parts():
    assert compose_text("t", "d", 1) == "d t"
    assert compose_text("", "d", 3) == "d"
    assert compose_text("t", "", 2) == "t t"


def test_compose_text_rejects_zero_weight():
    with pytest.raises(ToolkitError):
        compose_text("t", "d", 0)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("Hard Disk, 2TB!", ["hard", "disk", "2tb"]),
        ("", []),
        ("A a A", ["a", "a", "a"]),
        ("snake_case and-dash", ["snake", "case", "and", "dash"]),
    ],
)
def test_tokenize(text, expected):
    assert tokenize(text) == expected


def test_tokenize_stop_words_and_min_length():
    assert tokenize("the big hard disk", stop_words=["the"], min_length=4) == ["hard", "disk"]


@given(st.text())
def test_tokens_lowercase_nonempty(text):
    for tok in tokenize(text):
        assert tok and tok == tok.lower()


def _rec(i, path, title="hard disk", desc="fast storage"):
    return {"id": f"r{i}", "title": title, "description": desc, "path": path}


def test_ingest_well_formed_builds_tree():
    res = ingest([_rec(0, ["comp", "disk"])])
    assert len(res.documents) == 1 and not res.rejections
    doc = res.documents[0]
    assert res.taxonomy.path_names(doc.path_label) == ["comp", "disk"]
    assert doc.tokens[:2] == ("fast", "storage")
    assert doc.tokens.count("hard") == 3


def test_ingest_rejects_ambiguous_leaf():
    res = ingest([_rec(0, ["books-tree", "general"]), _rec(1, ["books-tree", "fiction"])])
    assert [r.to_dict() for r in res.rejections] == [{"id": "r0", "reason": "ambiguous_label"}]
    assert len(res.documents) == 1


def test_ingest_unknown_path_against_frozen_tree():
    tree = tx.build([["a", "b"]])
    res = ingest([_rec(0, ["a", "c"])], taxonomy=tree)
    assert res.rejections[0].reason == "unknown_path"


def test_ingest_malformed_lines_do_not_abort():
    lines = ["{not json", json.dumps({"id": "x", "path": []}), json.dumps(_rec(3, ["a"])), json.dumps(_rec(4, ["a"], "", ""))]
    res = ingest(lines)
    reasons = [r.reason for r in res.rejections]
    assert reasons == ["malformed", "malformed", "empty_tokens"]
    assert res.rejections[1].id == "x"
    assert len(res.documents) == 1


def test_ingest_duplicate_ids():
    res = ingest([_rec(0, ["a"]), _rec(0, ["a"])])
    assert [r.reason for r in res.rejections] == ["duplicate_id"]


@given(st.lists(st.tuples(st.sampled_from(["a", "b", "general", "c"]), st.text(max_size=8)), max_size=20))
def test_ingest_preserves_record_count(items):
    records = [RawRecord(f"id{i}", t, "", ("root", leaf)) for i, (leaf, t) in enumerate(items)]
    try:
        res = ingest(records)
    except ToolkitError as exc:
        assert exc.code == "empty_corpus"
        return
    assert len(res.documents) + len(res.rejections) == len(records)


def test_idf_values():
    _, idf = compute_idf([["w", "x"], ["w"]])
    assert idf["w"] == 1.0
    _, idf = compute_idf([["w"], ["x"], ["y"]])
    assert idf["w"] == pytest.approx(math.log(4 / 2) + 1, abs=1e-12)
    assert idf["w"] == pytest.approx(1.6931, abs=1e-4)


def test_df_counts_documents_not_terms():
    vocab, _ = compute_idf([["w"] * 5, ["x"]])
    assert vocab.df["w"] == 1 and vocab.n_docs == 2


def test_idf_empty_corpus():
    with pytest.raises(ToolkitError) as exc:
        compute_idf([])
    assert exc.value.code == "empty_corpus"


@given(st.lists(st.lists(st.sampled_from("abcdefg"), max_size=6), min_size=1, max_size=15))
def test_idf_properties(docs):
    if not any(docs):
        return
    vocab, idf = compute_idf(docs)
    assert sorted(vocab.index.values()) == list(range(len(vocab)))
    assert sum(vocab.df.values()) >= len(vocab)
    for w in vocab.index:
        assert 1 <= vocab.df[w] <= vocab.n_docs
        assert idf[w] > 0
    by_df = sorted(vocab.index, key=lambda w: vocab.df[w])
    for a, b in zip(by_df, by_df[1:]):
        assert idf[a] >= idf[b]


def test_idf_serialization_is_deterministic(tmp_path):
    docs = [["b", "a"], ["c", "a"]]
    for name in ("one.json", "two.json"):
        corpus.save_idf(tmp_path / name, *compute_idf(docs))
    assert (tmp_path / "one.json").read_bytes() == (tmp_path / "two.json").read_bytes()
    vocab, idf = corpus.load_idf(tmp_path / "one.json")
    assert idf == compute_idf(docs)[1] and vocab.n_docs == 2
