from __future__ import annotations

import base64
import json
import logging
import sys
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import numpy as np
import pytest

from hardsynth import wav
from hardsynth.clients import (
    ClientConfig,
    HttpTransport,
    MockAsr,
    MockLlm,
    MockScorer,
    MockTts,
    RemoteAsr,
    RemoteLlm,
    RemoteScorer,
    RemoteTts,
    SubprocessTransport,
    make_asr,
    make_llm,
    make_scorer,
    make_tts,
    with_retry,
)
from hardsynth.clients.asr import corrupt, seeded_rng
from hardsynth.ctc import greedy_decode, load_posteriors
from hardsynth.errors import BackendError, InvalidRequest, TransportError
from hardsynth.evaluation import cosine_similarity
from hardsynth.metrics import cer
from hardsynth.rewrite import build_prompt
from helpers import mock_wav

# -- mock ASR ---------------------------------------------------------------


def test_mock_asr_zero_difficulty_is_exact(tmp_path):
    p = mock_wav(tmp_path / "u1.wav", "Hello there, world.", difficulty=0.0)
    assert MockAsr("weak").transcribe(p).resolve() == "Hello there, world."


def test_mock_asr_full_difficulty_golden():
    ref = "she walked slowly across the quiet garden before evening"
    hyp = MockAsr("weak", seed=0).hypothesis(ref, 1.0, "u7")
    assert hyp == "gw atda sglpny yrpoasnxzqrroeutrgardkag xehdtrxhpreevfntl"
    assert cer(ref, hyp) >= 0.5


def test_mock_asr_depends_on_key_not_call_order():
    a = MockAsr("weak", seed=3)
    first = [a.hypothesis("some text here", 0.5, k) for k in ("x", "y")]
    second = [a.hypothesis("some text here", 0.5, k) for k in ("y", "x")][::-1]
    assert first == second


def test_strong_is_less_sensitive_than_weak():
    ref = "the quick brown fox jumps over the lazy dog " * 3
    weak = [cer(ref, MockAsr("weak").hypothesis(ref, 0.6, f"k{i}")) for i in range(20)]
    strong = [cer(ref, MockAsr("strong").hypothesis(ref, 0.6, f"k{i}")) for i in range(20)]
    assert sum(strong) < sum(weak)


def test_corrupt_probability_extremes():
    assert corrupt("abc", 0.0, seeded_rng(0, "k")) == "abc"
    assert corrupt("abcdefgh", 1.0, seeded_rng(0, "k")) != "abcdefgh"


def test_mock_asr_missing_metadata(tmp_path):
    p = tmp_path / "plain.wav"
    wav.write(p, np.zeros(10, dtype=np.int16))
    with pytest.raises(BackendError):
        MockAsr().transcribe(p)


def test_mock_asr_posterior_output(tmp_path):
    p = mock_wav(tmp_path / "u1.wav", "aab ba", difficulty=0.0)
    t = MockAsr(posterior_dir=tmp_path / "post").transcribe(p)
    assert t.text is None and t.posterior_path.endswith("u1.ctcl")
    assert greedy_decode(load_posteriors(t.posterior_path), validate=True) == "aab ba"
    assert t.resolve() == "aab ba"


def test_role_validation():
    with pytest.raises(ValueError):
        MockAsr("medium")


# -- mock LLM ---------------------------------------------------------------


def test_mock_llm_identity():
    assert MockLlm("identity").complete(build_prompt("the girl hesitated a moment")) == "the girl hesitated a moment"


def test_mock_llm_paraphrase_golden():
    prompt = build_prompt("the girl hesitated a moment")
    assert MockLlm("paraphrase", seed=0).complete(prompt) == "The maiden paused a instant."
    assert MockLlm("paraphrase", seed=2).complete(prompt) == "The young woman faltered a while."


def test_mock_llm_empty_prompt():
    with pytest.raises(InvalidRequest):
        MockLlm().complete("  ")


# -- mock TTS ---------------------------------------------------------------


def test_mock_tts_duration_formula(tmp_path):
    prompt = mock_wav(tmp_path / "p.wav", "one two three four five six", duration=3.0)
    out = MockTts().synthesize(prompt, "one two three four five six", "a b c d", tmp_path / "o.wav")
    assert wav.duration_s(out) == 2.0


def test_mock_tts_loop_closure(tmp_path):
    prompt = mock_wav(tmp_path / "p.wav", "one two three four five six", difficulty=0.0, duration=3.0)
    out = MockTts().synthesize(prompt, "one two three four five six", "Target words, here.", tmp_path / "o.wav")
    assert MockAsr("strong").transcribe(out).resolve() == "Target words, here."


def test_mock_tts_hard_prompt_golden(tmp_path):
    prompt = mock_wav(tmp_path / "p.wav", "one two three four five six", difficulty=0.8, duration=3.0)
    target = "the quick brown fox jumps over the lazy dog"
    out = MockTts().synthesize(prompt, "one two three four five six", target, tmp_path / "o.wav")
    hyp = MockAsr("strong", seed=0).transcribe(out).resolve()
    assert hyp == "xh qvick brown fox umps over the lazy dog"
    assert cer(target, hyp) > 0


def test_mock_tts_rejects_short_prompt_and_empty_target(tmp_path):
    prompt = mock_wav(tmp_path / "p.wav", "one two", duration=2.0)
    with pytest.raises(InvalidRequest, match="minimum"):
        MockTts(min_prompt_s=3.0).synthesize(prompt, "one two", "x", tmp_path / "o.wav")
    with pytest.raises(InvalidRequest):
        MockTts(min_prompt_s=0).synthesize(prompt, "one two", " ", tmp_path / "o.wav")


# -- mock scorer -------------------------------------------------------------


def test_mock_scorer(tmp_path):
    a = mock_wav(tmp_path / "a.wav", "first file")
    b = mock_wav(tmp_path / "b.wav", "second file")
    s = MockScorer()
    assert np.array_equal(s.embed(a), s.embed(a))
    assert s.mos(a) == 3.0
    assert cosine_similarity(s.embed(a), s.embed(b)) == pytest.approx(-0.07811620155696526, abs=1e-12)


# -- retry -------------------------------------------------------------------


def test_retry_backs_off_then_succeeds():
    sleeps, calls = [], []

    def flaky():
        calls.append(1)
        if len(calls) < 3:
            raise TransportError("down")
        return "ok"

    assert with_retry(flaky, 3, 0.5, sleep=sleeps.append) == "ok"
    assert sleeps == [0.5, 1.0]


def test_retry_gives_up_with_attempt_count():
    def down():
        raise TransportError("connection refused")

    with pytest.raises(TransportError) as exc:
        with_retry(down, 3, 0.1, sleep=lambda s: None)
    assert exc.value.attempts == 3
    assert "3 attempt" in str(exc.value)


def test_backend_errors_are_not_retried():
    calls = []

    def bad():
        calls.append(1)
        raise BackendError("500", payload={"error": "x"})

    with pytest.raises(BackendError):
        with_retry(bad, 3, 0.0, sleep=lambda s: None)
    assert len(calls) == 1


# -- wire transports ---------------------------------------------------------


class _Handler(BaseHTTPRequestHandler):
    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        op = body.get("op")
        if op == "transcribe":
            self.server.seen.append(body["id"])
            resp, code = {"text": "remote words"}, 200
        elif op == "complete":
            resp, code = {"text": "Rewritten sentence: fine"}, 200
        elif op == "synthesize":
            prompt = base64.b64decode(body["prompt_audio_b64"])
            resp, code = {"audio_b64": base64.b64encode(prompt).decode()}, 200
        elif op == "embed":
            resp, code = {"vector": [1.0, 0.0, 0.0]}, 200
        elif op == "mos":
            resp, code = {"score": 4.25}, 200
        else:
            resp, code = {"error": f"unknown op {op}"}, 500
        data = json.dumps(resp).encode()
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


@pytest.fixture
def server():
    srv = HTTPServer(("127.0.0.1", 0), _Handler)
    srv.seen = []
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    yield srv
    srv.shutdown()
    srv.server_close()


def test_http_clients_round_trip(server, tmp_path, caplog):
    t = HttpTransport(f"http://127.0.0.1:{server.server_address[1]}/", timeout_s=5)
    audio = mock_wav(tmp_path / "u9.wav", "x", duration=3.5)
    with caplog.at_level(logging.INFO, logger="hardsynth.clients"):
        assert RemoteAsr("strong", t).transcribe(audio, key="u9").resolve() == "remote words"
    assert server.seen == ["u9"]
    call = [r for r in caplog.records if getattr(r, "event", None) == "client_call"][0]
    assert call.utt_id == "u9" and call.status == "ok" and call.latency_ms >= 0 and len(call.input_digest) == 16
    assert RemoteLlm(t).complete("prompt") == "Rewritten sentence: fine"
    out = RemoteTts(t, min_prompt_s=3.0).synthesize(audio, "x", "y", tmp_path / "o.wav")
    assert out.read_bytes() == audio.read_bytes()
    s = RemoteScorer(t)
    assert list(s.embed(audio)) == [1.0, 0.0, 0.0]
    assert s.mos(audio) == 4.25


def test_http_error_status_is_backend_error(server):
    t = HttpTransport(f"http://127.0.0.1:{server.server_address[1]}/")
    with pytest.raises(BackendError) as exc:
        t.request({"op": "nope"})
    assert "unknown op" in exc.value.payload


def test_unreachable_endpoint_retries_then_fails(tmp_path):
    audio = mock_wav(tmp_path / "u.wav", "x")
    client = RemoteAsr("weak", HttpTransport("http://127.0.0.1:9/", timeout_s=1), retries=2, base_delay_s=0.0)
    with pytest.raises(TransportError) as exc:
        client.transcribe(audio)
    assert exc.value.attempts == 2


def test_subprocess_transport(tmp_path):
    script = tmp_path / "backend.py"
    script.write_text(
        "import json, sys\n"
        "req = json.load(sys.stdin)\n"
        "if req['op'] == 'fail':\n"
        "    print('boom'); sys.exit(4)\n"
        "json.dump({'text': req['prompt'].upper()}, sys.stdout)\n"
    )
    t = SubprocessTransport([sys.executable, str(script)], timeout_s=30)
    assert RemoteLlm(t).complete("abc") == "ABC"
    with pytest.raises(BackendError, match="status 4") as exc:
        t.request({"op": "fail"})
    assert "boom" in exc.value.payload


def test_subprocess_missing_binary():
    with pytest.raises(TransportError):
        SubprocessTransport(["/nonexistent/backend"]).request({})


def test_malformed_responses(tmp_path):
    script = tmp_path / "b.py"
    script.write_text("print('[1, 2]')\n")
    with pytest.raises(BackendError, match="not a JSON object"):
        SubprocessTransport([sys.executable, str(script)]).request({})
    script.write_text("print('{\"other\": 1}')\n")
    with pytest.raises(BackendError, match="missing 'text'"):
        RemoteLlm(SubprocessTransport([sys.executable, str(script)])).complete("x")


# -- factories --------------------------------------------------------------


def test_factories_build_mocks_and_remotes():
    mock = ClientConfig()
    assert isinstance(make_asr(mock, "weak"), MockAsr)
    assert isinstance(make_llm(ClientConfig(options={"mode": "identity"})), MockLlm)
    assert isinstance(make_tts(mock, 3.0), MockTts)
    assert isinstance(make_scorer(mock), MockScorer)
    http = ClientConfig(transport="http", endpoint="http://localhost:1/")
    assert isinstance(make_asr(http, "strong"), RemoteAsr)
    with pytest.raises(ValueError):
        make_llm(ClientConfig(transport="http"))
