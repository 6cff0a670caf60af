import json
import pathlib

import pytest

import quizforge as qf

FIXTURES = pathlib.Path(__file__).resolve().parents[2] / "tests" / "fixtures"


def mcq_set():
    raw = json.dumps(
        {
            "questions": [
                {"question": "Başkent neresidir?", "options": ["Ankara", "İzmir", "Bursa"], "answer": "A"},
                {"question": "En uzun nehir hangisidir?", "options": ["Kızılırmak", "Sakarya", "Fırat"], "answer": "A"},
            ]
        },
        ensure_ascii=False,
    )
    return qf.parse_quiz(raw, "mcq", "doc-1")


def test_version():
    assert qf.__version__ == "0.3.0"


def test_turkish_casing():
    assert qf.normalize_tr("İstanbul") == ["istanbul"]
    assert qf.normalize_tr("ISPARTA") == ["ısparta"]


def test_rouge_scores():
    report = qf.rouge("kedi evde uyur", "kedi bahçede uyur")
    assert report["rouge1"]["f1"] == pytest.approx(2 / 3, abs=1e-12)
    assert report["rougeL"]["f1"] == pytest.approx(2 / 3, abs=1e-12)
    assert qf.rouge_n(["a", "b"], ["a", "b"], 2)["f1"] == 1.0
    assert qf.rouge_l(["a"], ["b"])["f1"] == 0.0


def test_parse_format_round_trip():
    quiz = mcq_set()
    assert [item["item_id"] for item in quiz["items"]] == ["doc-1#0", "doc-1#1"]
    for layout in ("json", "lettered"):
        again = qf.parse_quiz(qf.format_quiz(quiz, layout), "mcq", "doc-1")
        assert again["items"] == quiz["items"]
    with pytest.raises(qf.ValidationError):
        qf.parse_quiz("hiçbir soru yok", "mcq", "doc-1")


def test_mcq_to_saq():
    saq = qf.mcq_to_saq(mcq_set())
    assert saq["format"] == "saq"
    assert [item["answer_text"] for item in saq["items"]] == ["Ankara", "Kızılırmak"]
    assert "İzmir" not in json.dumps(saq, ensure_ascii=False)


def test_quality_gate():
    doc = {
        "id": "doc-1",
        "subject": "geography",
        "title": "Türkiye",
        "body": "Türkiye'nin başkenti Ankara'dır. En uzun nehir Kızılırmak'tır.",
        "source_url": None,
        "token_count": 8,
    }
    loose = qf.quality_gate(mcq_set(), doc, min_rouge_l=0.0)
    strict = qf.quality_gate(mcq_set(), doc, min_rouge_l=0.99)
    assert loose["set_passed"] and not strict["set_passed"]
    assert len(loose["items"]) == 2


def test_split():
    records = [
        {
            "instruction": "Soru hazırla",
            "input": f"metin {d}",
            "output": "1. S?\nCevap: c",
            "meta": {"doc_id": f"d{d}", "subject": "history", "format": fmt},
        }
        for d in range(10)
        for fmt in ("mcq", "saq")
    ]
    a = qf.split(records, 6, 3, 7)
    b = qf.split(records, 6, 3, 7)
    assert a == b
    train = {r["meta"]["doc_id"] for r in a["train"]}
    held = {r["meta"]["doc_id"] for r in a["eval"]}
    assert len(train) == 6 and len(held) == 3 and not train & held
    with pytest.raises(qf.ValidationError):
        qf.split(records, 8, 3, 7)


def test_finetune_config():
    gpt = qf.finetune_config("gpt-3.5-turbo")
    assert (gpt["batch_size"], gpt["learning_rate"], gpt["epochs"]) == (16, 0.001, 3)
    llama = qf.finetune_config("llama-2-7b-chat")
    assert (llama["peft_r"], llama["peft_alpha"], llama["batch_size"]) == (16, 32, 64)


def test_aggregate_ratings():
    log = [
        {"item_id": f"i{i}", "annotator_id": "j", "rating": "A" if i < 28 else "C", "timestamp": "2024-01-01T00:00:00Z"}
        for i in range(30)
    ]
    dist = qf.aggregate_ratings(log)
    assert dist["total"] == 30
    assert dist["percentages"]["A"] == 93.3


def test_cli(tmp_path):
    out = tmp_path / "docs.jsonl"
    code, stdout, _ = qf.run_cli(["corpus", "clean", "--in", str(FIXTURES / "raw_corpus.jsonl"), "--out", str(out)])
    assert code == 0
    assert len(out.read_text(encoding="utf-8").splitlines()) == 10
    code, _, _ = qf.run_cli(["corpus", "clean", "--in", str(tmp_path / "missing.jsonl"), "--out", str(out)])
    assert code == 1
