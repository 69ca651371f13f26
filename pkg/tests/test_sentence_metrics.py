import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gecmetrics.sentence_metrics import (
    ExternalScoreError,
    HttpPerplexity,
    JudgeResponseError,
    LlmJudgeConfig,
    PerplexityError,
    TablePerplexity,
    build_prompt,
    levenshtein_ratio,
    llm_judge,
    load_external_scores,
    parse_judgement,
    render_edits,
    scribendi,
    select_targets,
    token_sort_ratio,
)
from mockserver import MockChat, targets_in
from oracles import full_matrix_levenshtein

LONG_S = "the cat sat on the mat today"
LONG_H = "the cat sat on the rug today"


def test_ratio_by_hand():
    assert full_matrix_levenshtein(LONG_S, LONG_H) == 3
    assert levenshtein_ratio(LONG_S, LONG_H) == pytest.approx(25 / 28, abs=1e-15)
    assert levenshtein_ratio("", "") == 1.0


@given(st.lists(st.sampled_from(["a", "bb", "c", "dd"]), min_size=1, max_size=6), st.randoms())
def test_token_sort_ratio_permutation_invariant(toks, rnd):
    shuffled = list(toks)
    rnd.shuffle(shuffled)
    ref = ["a", "c", "bb"]
    assert token_sort_ratio(ref, toks) == token_sort_ratio(ref, shuffled)


def test_scribendi_cases():
    ppl = TablePerplexity({LONG_S: 100.0, LONG_H: 50.0, "a b": 50.0, "a c": 100.0, "x y z": 80.0, "q": 10.0})
    res = scribendi([LONG_S, "a b", "a b", "x y z"], [LONG_H, "a c", "a b", "q"], ppl)
    # improved and close: +1; worse perplexity: -1; unchanged: 0; improved but far: -1
    assert res.sentence_scores == [1, -1, 0, -1]
    assert res.corpus_score == -1.0


def test_scribendi_equal_perplexity_is_negative():
    ppl = TablePerplexity({LONG_S: 50.0, LONG_H: 50.0})
    assert scribendi([LONG_S], [LONG_H], ppl).sentence_scores == [-1]


def test_scribendi_threshold_is_inclusive():
    ppl = TablePerplexity({LONG_S: 100.0, LONG_H: 50.0})
    assert scribendi([LONG_S], [LONG_H], ppl, threshold=25 / 28).sentence_scores == [1]


def test_scribendi_names_failing_sentence():
    ppl = TablePerplexity({"a": 1.0})
    with pytest.raises(PerplexityError) as info:
        scribendi(["a", "a"], ["a", "b"], ppl)
    assert info.value.index == 1


def test_perplexity_file(tmp_path):
    p = tmp_path / "ppl.tsv"
    p.write_text("a b\t12.5\nc\t3\n", encoding="utf-8")
    t = TablePerplexity.from_file(p)
    assert t.perplexity("a  b") == 12.5
    p.write_text("a b\t-1\n", encoding="utf-8")
    with pytest.raises(ValueError, match=":1:"):
        TablePerplexity.from_file(p)


def test_http_perplexity():
    import httpx

    seen = []

    def handler(request):
        body = json.loads(request.content)
        seen.append(body["sentences"])
        return httpx.Response(200, json={"perplexities": [float(len(s)) for s in body["sentences"]]})

    client = httpx.Client(transport=httpx.MockTransport(handler))
    prov = HttpPerplexity("http://ppl.local/score", client=client, batch_size=2)
    assert prov.batch(["aaa", "b", "aaa", "cc"]) == [3.0, 1.0, 3.0, 2.0]
    assert seen == [["aaa", "b"], ["cc"]]


# External scores


def test_external_scores(tmp_path):
    p = tmp_path / "s.tsv"
    p.write_text("sysA\t0\t0.91\nsysA\t1\t0.5\nsysA\t1\t0.7\n", encoding="utf-8")
    t = load_external_scores(p)
    assert t.lookup("sysA", 0) == 0.91
    assert t.lookup("sysA", 1) == 0.7
    assert t.duplicates == 1
    with pytest.raises(ExternalScoreError, match="sysB"):
        t.lookup("sysB", 0)
    assert t.result("sysA", 2).corpus_score == pytest.approx(0.805)


def test_external_scores_empty_and_malformed(tmp_path):
    p = tmp_path / "s.tsv"
    p.write_text("", encoding="utf-8")
    t = load_external_scores(p)
    assert len(t) == 0
    with pytest.raises(ExternalScoreError):
        t.lookup("x", 0)
    p.write_text("sysA\t0\t0.1\nsysA\tzero\t0.3\n", encoding="utf-8")
    with pytest.raises(ValueError, match=":2:"):
        load_external_scores(p)


# LLM judge: pure helpers


FREQ = {
    "s1": "h three", "s2": "h three", "s3": "h three",
    "s4": "h two b", "s5": "h two b",
    "s6": "h two a", "s7": "h two a",
    "s8": "z one", "s9": "c one", "s10": "a one", "s11": "m one",
}


def test_selection_by_frequency_then_text():
    selected, producers = select_targets(FREQ)
    assert selected == ["h three", "h two a", "h two b", "a one", "c one"]
    assert producers["h three"] == ["s1", "s2", "s3"]


def test_prompt_layout():
    prompt = build_prompt("He go .", ["He goes .", "He went ."])
    assert "# source\n\nHe go .\n\n# targets\n\n0. He goes .\n1. He went ." in prompt
    assert "a minimum of 1 point" in prompt


def test_edit_mode_rendering():
    assert render_edits("He go to the school .", "He goes to school .") == "[go → goes]; [the → ]"
    assert render_edits("a b", "a b") == "no edits"
    prompt = build_prompt("a b", ["a b", "a c"], mode="edit")
    assert targets_in(prompt) == {0: "no edits", 1: "[b → c]"}


def test_parse_judgement():
    assert parse_judgement('{"0": 4, "1": 2}', 2) == {0: 4, 1: 2}
    assert parse_judgement('{"scores": {"0": 5}}', 1) == {0: 5}
    for bad in ('{"0": 9}', '{"0": 0}', '{"0": "4"}', "[4]", '{"1": 3}', "not json"):
        with pytest.raises(ValueError):
            parse_judgement(bad, 1)


# LLM judge against a local endpoint


def _cfg(url, **kw):
    return LlmJudgeConfig(endpoint=url, api_key_env="GECMETRICS_TEST_KEY", **kw)


def test_llm_judge_expands_duplicates():
    with MockChat(lambda prompt: json.dumps({"0": 4})) as mock:
        out = llm_judge(["He go ."], {"a": ["He goes ."], "b": ["He goes ."], "c": ["He goes ."]}, _cfg(mock.url))
    assert {s: r.sentence_scores for s, r in out.items()} == {"a": [4], "b": [4], "c": [4]}
    assert len(mock.requests) == 1


def test_llm_judge_selection_and_missing_marker():
    def reply(prompt):
        return json.dumps({str(i): 5 - i for i in targets_in(prompt)})

    hyps = {s: [h] for s, h in FREQ.items()}
    with MockChat(reply) as mock:
        out = llm_judge(["src"], hyps, _cfg(mock.url))
    sent = targets_in(mock.requests[0]["body"]["messages"][0]["content"])
    assert sent == {0: "h three", 1: "h two a", 2: "h two b", 3: "a one", 4: "c one"}
    scores = {s: r.sentence_scores[0] for s, r in out.items()}
    assert scores == {
        "s1": 5, "s2": 5, "s3": 5, "s6": 4, "s7": 4, "s4": 3, "s5": 3,
        "s10": 2, "s9": 1, "s8": None, "s11": None,
    }
    assert out["s8"].corpus_score is None and out["s8"].metadata["missing"] == 1


def test_llm_judge_out_of_range_retries_then_fails():
    with MockChat(lambda prompt: json.dumps({"0": 9})) as mock:
        with pytest.raises(JudgeResponseError) as info:
            llm_judge(["a", "b"], {"x": ["a", "c"]}, _cfg(mock.url, retries=2))
    assert info.value.source_index in (0, 1)
    # one source hit the bad response three times (first try + 2 retries)
    assert len(mock.requests) >= 3


def test_llm_judge_recovers_after_bad_response():
    calls = []

    def reply(prompt):
        calls.append(prompt)
        return "garbage" if len(calls) == 1 else json.dumps({"0": 3})

    with MockChat(reply) as mock:
        out = llm_judge(["a"], {"x": ["b"]}, _cfg(mock.url, retries=1))
    assert out["x"].sentence_scores == [3]
    assert mock.requests[0]["body"]["messages"][0]["content"] == mock.requests[1]["body"]["messages"][0]["content"]


def test_llm_judge_is_deterministic_and_sends_key(monkeypatch):
    monkeypatch.setenv("GECMETRICS_TEST_KEY", "sk-test")

    def reply(prompt):
        return json.dumps({str(i): 1 + len(t) % 5 for i, t in targets_in(prompt).items()})

    srcs = ["a b c", "d e f", "g h"]
    hyps = {"p": ["a b c", "d x f", "g"], "q": ["a c", "d x f", "g h i"], "r": ["a b d", "d e", "g"]}
    with MockChat(reply) as mock:
        first = llm_judge(srcs, hyps, _cfg(mock.url, max_in_flight=3))
        second = llm_judge(srcs, hyps, _cfg(mock.url, max_in_flight=1))
    assert {s: r.sentence_scores for s, r in first.items()} == {s: r.sentence_scores for s, r in second.items()}
    assert all(r["auth"] == "Bearer sk-test" for r in mock.requests)


def test_llm_judge_edit_mode_sends_edit_sequences():
    with MockChat(lambda prompt: json.dumps({str(i): 2 for i in targets_in(prompt)})) as mock:
        llm_judge(["a b"], {"x": ["a b"], "y": ["a c"]}, _cfg(mock.url, mode="edit"))
    sent = targets_in(mock.requests[0]["body"]["messages"][0]["content"])
    assert sorted(sent.values()) == ["[b → c]", "no edits"]
