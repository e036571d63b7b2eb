"""Interchange file round-trips and byte-level determinism."""

import json

import numpy as np
import pytest

from coexpand import formats
from coexpand.engine import EntitySet, ExpandedMember, ExpansionState
from coexpand.errors import DataError
from coexpand.evaluation import EvalReport
from coexpand.indexer import OccurrenceRecord
from coexpand.store import CorpusEmbedding


def test_occurrence_rows_are_compact_with_fixed_key_order(tmp_path):
    path = tmp_path / "occ.jsonl"
    record = OccurrenceRecord(entity_id=7, sentence_id="doc42#3", start=12, end=25, sentence="x y")
    formats.write_occurrences(path, [record])
    assert path.read_text(encoding="utf-8") == (
        '{"entity_id":7,"sentence_id":"doc42#3","start":12,"end":25,"sentence":"x y"}\n'
    )


def test_occurrences_roundtrip(tmp_path):
    path = tmp_path / "occ.jsonl"
    records = [
        OccurrenceRecord(0, "a#0", 0, 5, "héllo there"),
        OccurrenceRecord(3, "a#1", 2, 4, "oh no"),
    ]
    formats.write_occurrences(path, records)
    assert list(formats.read_occurrences(path)) == records


def test_bad_occurrence_line_reports_position(tmp_path):
    path = tmp_path / "occ.jsonl"
    path.write_text('{"entity_id":1,"sentence_id":"a#0","start":0,"end":1,"sentence":"x"}\n{broken\n')
    with pytest.raises(DataError, match="2"):
        list(formats.read_occurrences(path))


def test_summary_sorted_numerically(tmp_path):
    path = tmp_path / "s.json"
    formats.write_summary(path, {10: 1, 2: 5, 0: 0})
    assert json.loads(path.read_text()) == {"0": 0, "2": 5, "10": 1}
    assert list(json.loads(path.read_text())) == ["0", "2", "10"]


def test_occurrence_embeddings_roundtrip(tmp_path):
    path = tmp_path / "emb.jsonl"
    rows = [
        formats.OccurrenceEmbeddingRow(0, "a#0", np.float32([0.1, 0.2]), np.float32([0.3, 0.4])),
        formats.OccurrenceEmbeddingRow(1, "a#1", np.float32([1, 2]), np.float32([3, 4])),
    ]
    formats.write_occurrence_embeddings(path, 2, "toy-model", rows)
    header, got = formats.read_occurrence_embeddings(path)
    assert header["dim"] == 2 and header["model"] == "toy-model"
    assert [(r.entity_id, r.sentence_id) for r in got] == [(0, "a#0"), (1, "a#1")]
    for want, have in zip(rows, got):
        assert want.content.tobytes() == have.content.tobytes()
        assert want.context.tobytes() == have.context.tobytes()


def test_embedding_row_with_wrong_dim_rejected(tmp_path):
    path = tmp_path / "emb.jsonl"
    path.write_text(
        '{"dim":3,"model":"m"}\n'
        '{"entity_id":0,"sentence_id":"a#0","content":[1.0,2.0],"context":[1.0,2.0,3.0]}\n'
    )
    with pytest.raises(DataError, match="2"):
        formats.read_occurrence_embeddings(path)


def test_non_finite_vector_rejected(tmp_path):
    path = tmp_path / "emb.jsonl"
    path.write_text(
        '{"dim":2,"model":"m"}\n'
        '{"entity_id":0,"sentence_id":"a#0","content":[1.0,NaN],"context":[1.0,2.0]}\n'
    )
    with pytest.raises(DataError):
        formats.read_occurrence_embeddings(path)


def test_aggregated_roundtrip_and_row_order(tmp_path):
    path = tmp_path / "agg.jsonl"
    entries = [
        CorpusEmbedding(5, np.float32([0.5, 0.25]), np.float32([1, 0]), 3),
        CorpusEmbedding(1, np.float32([0.1, 0.9]), np.float32([0, 1]), 12),
    ]
    formats.write_aggregated(path, 2, entries)
    lines = path.read_text().splitlines()
    assert json.loads(lines[0]) == {"dim": 2}
    assert [json.loads(l)["entity_id"] for l in lines[1:]] == [1, 5]

    dim, rows = formats.read_aggregated(path)
    assert dim == 2
    assert [(eid, count) for eid, count, _, _ in rows] == [(1, 12), (5, 3)]


def test_aggregated_zero_count_rejected(tmp_path):
    path = tmp_path / "agg.jsonl"
    path.write_text('{"dim":1}\n{"entity_id":0,"count":0,"content":[1.0],"context":[1.0]}\n')
    with pytest.raises(DataError):
        formats.read_aggregated(path)


def test_float32_serialization_roundtrips_exactly(tmp_path):
    # 0.1 is not representable; the file must carry the float32 value, not 0.1
    path = tmp_path / "agg.jsonl"
    entries = [CorpusEmbedding(0, np.float32([0.1]), np.float32([0.3]), 1)]
    formats.write_aggregated(path, 1, entries)
    _, rows = formats.read_aggregated(path)
    assert rows[0][2].tobytes() == np.float32([0.1]).tobytes()
    raw = json.loads(path.read_text().splitlines()[1])
    assert raw["content"][0] == float(np.float32(0.1))


def result_state():
    sets = [
        EntitySet("lang", (10, 11), [ExpandedMember(0, 0.98765449, 1, 1)]),
        EntitySet("os", (12,), []),
    ]
    state = ExpansionState(sets=sets, variant="context", k=2, t=5, iterations=1)
    state.underfilled = ["os"]
    return state


def test_result_file_shape(tmp_path):
    path = tmp_path / "result.json"
    names = {0: "python", 10: "java", 11: "c++", 12: "linux"}
    formats.write_result(path, result_state(), names.__getitem__)
    doc = json.loads(path.read_text())
    assert doc["variant"] == "context" and doc["k"] == 2 and doc["t"] == 5
    assert doc["sets"][0] == {
        "name": "lang",
        "seeds": ["java", "c++"],
        "expanded": [{"entity": "python", "rank": 1, "score": 0.987654, "iteration": 1}],
    }
    assert doc["sets"][1]["underfilled"] is True
    assert doc["sets"][1]["expanded"] == []


def test_read_result_rejects_non_result_json(tmp_path):
    path = tmp_path / "r.json"
    path.write_text("[1,2,3]")
    with pytest.raises(DataError):
        formats.read_result(path)


def test_report_file_shape(tmp_path):
    path = tmp_path / "report.json"
    report = EvalReport(
        per_type={"a": {"P@2": 1.0}},
        macro={"P@2": 1.0},
        unknown_entities=3,
        truncated={},
    )
    formats.write_report(path, report)
    doc = json.loads(path.read_text())
    assert doc == {"per_type": {"a": {"P@2": 1.0}}, "macro": {"P@2": 1.0}, "unknown_entities": 3}

    report.truncated = {"a": ["P@2"]}
    formats.write_report(path, report)
    assert json.loads(path.read_text())["truncated"] == {"a": ["P@2"]}


def test_writers_are_byte_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    formats.write_result(a, result_state(), {0: "python", 10: "java", 11: "c++", 12: "linux"}.__getitem__)
    formats.write_result(b, result_state(), {0: "python", 10: "java", 11: "c++", 12: "linux"}.__getitem__)
    assert a.read_bytes() == b.read_bytes()
