import json
import threading
from datetime import date

import pytest
from hypothesis import given
from hypothesis import strategies as st

from newspred.classify import (
    BUILTIN_PROMPTS,
    LabelCache,
    Lexicon,
    PromptTemplate,
    RemoteEndpointConfig,
    lexicon_classify,
    llm_classify,
    porter_stem,
    term_frequency_report,
    tokenize,
)
from newspred.corpus import HeadlineRecord, Label, aggregate
from newspred.errors import TransportError


def head(i, text):
    return HeadlineRecord(f"h{i}", date(1996, 1, 1 + i % 28), text)


LEX = Lexicon(
    positive_terms=frozenset({"improve", "prospers", "rally", "gain"}),
    negative_terms=frozenset({"losses", "fraud", "slump", "drop"}),
)


class TestLexicon:
    def test_positive_majority(self):
        rec = lexicon_classify(head(1, "Profits improve, outlook prospers"), LEX)
        assert rec.label is Label.UP

    def test_negative_majority(self):
        rec = lexicon_classify(head(2, "Losses deepen amid fraud"), LEX)
        assert rec.label is Label.DOWN

    def test_no_hits_unknown(self):
        rec = lexicon_classify(head(3, "Fed meets Tuesday"), LEX)
        assert rec.label is Label.UNKNOWN

    def test_tie_unknown(self):
        rec = lexicon_classify(head(4, "Rally fades into slump"), LEX)
        assert rec.label is Label.UNKNOWN

    def test_case_and_order_invariance(self):
        a = lexicon_classify(head(5, "GAIN beats DROP drop"), LEX)
        b = lexicon_classify(head(5, "drop gain DROP beats"), LEX)
        assert a.label is b.label

    def test_overlapping_sets_rejected(self):
        with pytest.raises(ValueError):
            Lexicon(frozenset({"x"}), frozenset({"x"}))

    def test_swap_antisymmetry(self):
        swapped = Lexicon(LEX.negative_terms, LEX.positive_terms)
        for text in ("Profits improve", "Losses deepen amid fraud", "Fed meets"):
            orig = lexicon_classify(head(6, text), LEX).label
            flip = lexicon_classify(head(6, text), swapped).label
            expected = {Label.UP: Label.DOWN, Label.DOWN: Label.UP, Label.UNKNOWN: Label.UNKNOWN}
            assert flip is expected[orig]

    @given(st.lists(st.sampled_from(["gain", "drop", "widget", "rally", "slump"]), min_size=0, max_size=12))
    def test_token_order_invariance(self, toks):
        base = " ".join(toks)
        rev = " ".join(reversed(toks))
        if not base:
            return
        assert (
            lexicon_classify(head(7, base or "x"), LEX).label
            is lexicon_classify(head(7, rev or "x"), LEX).label
        )


class TestTokenize:
    def test_strips_digits_and_punct(self):
        assert tokenize("S&P 500 up 3.2%, tech leads!") == ["p", "up", "tech", "leads"]

    def test_stopwords_dropped_but_direction_words_kept(self):
        toks = tokenize("the market is up and down")
        assert "the" not in toks and "up" in toks and "down" in toks


class TestPromptTemplate:
    def test_placeholder_required(self):
        with pytest.raises(ValueError):
            PromptTemplate("x", "no placeholder", {"A": Label.UP, "B": Label.DOWN})

    def test_exact_match_parsing(self):
        t = BUILTIN_PROMPTS["direction-v1"]
        assert t.parse("GOING UP") is Label.UP
        assert t.parse(" going up \n") is Label.UP
        assert t.parse("It is going up, likely.") is Label.UNKNOWN
        assert t.parse("GOING DOWN") is Label.DOWN

    def test_render(self):
        t = BUILTIN_PROMPTS["direction-v1"]
        assert "Fed cuts rates" in t.render("Fed cuts rates")

    def test_variant_prompts_cover_all_token_sets(self):
        for pid, tokens in [
            ("optimism-v1", ("OPTIMISTIC", "PESSIMISTIC")),
            ("positivity-v1", ("POSITIVE", "NEGATIVE")),
            ("goodness-v1", ("GOOD", "BAD")),
        ]:
            t = BUILTIN_PROMPTS[pid]
            assert t.parse(tokens[0]) is Label.UP and t.parse(tokens[1]) is Label.DOWN


def scripted_transport(script):
    """Return a transport answering by headline text lookup; counts calls."""
    calls = []

    def send(payload):
        content = payload["messages"][0]["content"]
        calls.append(content)
        for key, answer in script.items():
            if key in content:
                if isinstance(answer, Exception):
                    raise answer
                return answer
        return "UNKNOWN"

    send.calls = calls
    return send


ENDPOINT = RemoteEndpointConfig(
    base_url="http://gateway.invalid/v1", model_name="test-model", backoff_base=0.0
)


class TestLlmClassify:
    def test_exact_match_and_strict_parsing(self):
        heads = [head(1, "Profits surge"), head(2, "Some vague story")]
        transport = scripted_transport({"Profits surge": "GOING UP", "vague": "It is going up, likely."})
        out = llm_classify(heads, BUILTIN_PROMPTS["direction-v1"], ENDPOINT, LabelCache(), transport=transport)
        assert [r.label for r in out] == [Label.UP, Label.UNKNOWN]
        assert [r.headline_id for r in out] == ["h1", "h2"]

    def test_raw_response_preserved_in_cache(self, tmp_path):
        cache = LabelCache(tmp_path / "cache.jsonl")
        transport = scripted_transport({"vague": "no idea, sorry"})
        llm_classify([head(2, "Some vague story")], BUILTIN_PROMPTS["direction-v1"], ENDPOINT, cache, transport=transport)
        entry = cache.get("test-model", "direction-v1", "h2")
        assert entry.raw_response == "no idea, sorry" and entry.label is Label.UNKNOWN

    def test_cache_replay_issues_no_calls(self, tmp_path):
        heads = [head(i, f"story {i} rally") for i in range(6)]
        path = tmp_path / "cache.jsonl"
        transport = scripted_transport({"rally": "GOING UP"})
        first = llm_classify(heads, BUILTIN_PROMPTS["direction-v1"], ENDPOINT, LabelCache(path), transport=transport)
        assert len(transport.calls) == 6
        transport2 = scripted_transport({"rally": "GOING DOWN"})  # would flip labels if called
        second = llm_classify(heads, BUILTIN_PROMPTS["direction-v1"], ENDPOINT, LabelCache(path), transport=transport2)
        assert len(transport2.calls) == 0
        assert first == second

    def test_retry_then_transport_error_names_headline(self):
        attempts = []

        def failing(payload):
            attempts.append(1)
            raise OSError("connection reset")

        with pytest.raises(TransportError, match="h1"):
            llm_classify(
                [head(1, "whatever")],
                BUILTIN_PROMPTS["direction-v1"],
                ENDPOINT,
                LabelCache(),
                transport=failing,
                sleeper=lambda s: None,
            )
        assert len(attempts) == ENDPOINT.retries + 1

    def test_transient_failure_recovers(self):
        state = {"n": 0}

        def flaky(payload):
            state["n"] += 1
            if state["n"] < 3:
                raise OSError("flaky")
            return "GOING DOWN"

        out = llm_classify(
            [head(1, "x")], BUILTIN_PROMPTS["direction-v1"], ENDPOINT, LabelCache(),
            transport=flaky, sleeper=lambda s: None,
        )
        assert out[0].label is Label.DOWN

    def test_output_order_independent_of_completion_order(self):
        import time as _time

        heads = [head(i, f"story number {i} rally") for i in range(12)]
        lock = threading.Lock()

        def slow_for_even(payload):
            content = payload["messages"][0]["content"]
            idx = int(content.split("story number ")[1].split(" ")[0])
            _time.sleep(0.02 if idx % 2 == 0 else 0.0)
            return "GOING UP" if idx < 6 else "GOING DOWN"

        ep = RemoteEndpointConfig(base_url="http://x.invalid", model_name="m", max_in_flight=6)
        out = llm_classify(heads, BUILTIN_PROMPTS["direction-v1"], ep, LabelCache(), transport=slow_for_even)
        assert [r.headline_id for r in out] == [f"h{i}" for i in range(12)]
        assert [r.label for r in out] == [Label.UP] * 6 + [Label.DOWN] * 6

    def test_batch_size_and_concurrency_do_not_change_labels(self):
        heads = [head(i, f"tale {i} slump") for i in range(9)]
        results = []
        for workers in (1, 4, 8):
            ep = RemoteEndpointConfig(base_url="http://x.invalid", model_name="m", max_in_flight=workers)
            transport = scripted_transport({"slump": "GOING DOWN"})
            results.append(
                [r.label for r in llm_classify(heads, BUILTIN_PROMPTS["direction-v1"], ep, LabelCache(), transport=transport)]
            )
        assert results[0] == results[1] == results[2]

    def test_against_local_http_server(self, tmp_path):
        from http.server import BaseHTTPRequestHandler, HTTPServer

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
                text = body["messages"][0]["content"]
                answer = "GOING UP" if "rally" in text else "UNKNOWN"
                payload = json.dumps(
                    {"choices": [{"message": {"role": "assistant", "content": answer}}]}
                ).encode()
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(payload)))
                self.end_headers()
                self.wfile.write(payload)

            def log_message(self, *args):
                pass

        server = HTTPServer(("127.0.0.1", 0), Handler)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        try:
            ep = RemoteEndpointConfig(
                base_url=f"http://127.0.0.1:{server.server_port}", model_name="local-test"
            )
            heads = [head(1, "markets rally hard"), head(2, "weather was mild")]
            out = llm_classify(heads, BUILTIN_PROMPTS["direction-v1"], ep, LabelCache(tmp_path / "c.jsonl"))
            assert [r.label for r in out] == [Label.UP, Label.UNKNOWN]
        finally:
            server.shutdown()


class TestTermFrequency:
    def test_counting_before_cutoff(self):
        report = term_frequency_report({Label.UP: ["up up down"]}, min_count=1, stem=False)
        rows = {r.term: r for r in report[Label.UP]}
        assert rows["up"].frequency == pytest.approx(2 / 3)
        assert rows["down"].frequency == pytest.approx(1 / 3)

    def test_min_count_cutoff(self):
        report = term_frequency_report({Label.UP: ["up up down"]}, min_count=2, stem=False)
        assert [r.term for r in report[Label.UP]] == ["up"]

    def test_all_stopwords_empty(self):
        report = term_frequency_report({Label.DOWN: ["the of and is"]}, min_count=1)
        assert report[Label.DOWN] == []

    def test_empty_class_empty_table(self):
        report = term_frequency_report({Label.UP: []}, min_count=1)
        assert report[Label.UP] == []

    def test_deterministic(self):
        texts = {Label.UP: ["growth spurts", "growth returns"], Label.DOWN: ["deep slump"]}
        assert term_frequency_report(texts) == term_frequency_report(texts)

    def test_stemming_merges_forms(self):
        report = term_frequency_report(
            {Label.UP: ["boosting boosted boosts"]}, min_count=1, stem=True
        )
        assert len(report[Label.UP]) == 1 and report[Label.UP][0].count == 3


class TestPorterStem:
    @pytest.mark.parametrize(
        "word,stem",
        [
            ("caresses", "caress"),
            ("ponies", "poni"),
            ("cats", "cat"),
            ("feed", "feed"),
            ("agreed", "agre"),
            ("plastered", "plaster"),
            ("motoring", "motor"),
            ("hopping", "hop"),
            ("relational", "relat"),
            ("rally", "ralli"),
            ("up", "up"),
            ("down", "down"),
        ],
    )
    def test_known_stems(self, word, stem):
        assert porter_stem(word) == stem


class TestCrossModuleConsistency:
    def test_labels_feed_aggregate_exactly(self):
        # 20-headline fixture: counts must reproduce the p/n/tie decisions
        texts = (
            ["Profits improve again"] * 7
            + ["Losses deepen amid fraud"] * 5
            + ["Fed meets Tuesday"] * 8
        )
        heads = [head(i, t) for i, t in enumerate(texts)]
        labels = [lexicon_classify(hd, LEX) for hd in heads]
        counts = aggregate(heads, labels)
        assert (counts[0].n_up, counts[0].n_down, counts[0].n_unknown) == (7, 5, 8)
