import json
import socket
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import httpx
import pytest

from emoannot.backend import (
    AuditLog,
    StubBackend,
    TextGenBackend,
    backend_from_url,
    refine_annotation,
)
from emoannot.errors import BackendUnavailableError, EmptyCompletionError


class _Handler(BaseHTTPRequestHandler):
    fail_first = 0  # class attr set per test

    def do_POST(self):
        length = int(self.headers["Content-Length"])
        payload = json.loads(self.rfile.read(length))
        if type(self).fail_first > 0:
            type(self).fail_first -= 1
            self.send_response(503)
            self.end_headers()
            return
        body = json.dumps({"text": f"echo: {payload['prompt']}"}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture
def http_server():
    server = HTTPServer(("127.0.0.1", 0), _Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}/generate"
    server.shutdown()


def _free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def test_http_backend_round_trip(http_server):
    _Handler.fail_first = 0
    backend = TextGenBackend(http_server, timeout=2.0)
    assert backend.generate("sys", "hello") == "echo: hello"


def test_http_backend_retries_transient_errors(http_server):
    _Handler.fail_first = 2
    backend = TextGenBackend(http_server, timeout=2.0, max_retries=2,
                             retry_wait=0.0)
    assert backend.generate("sys", "hi") == "echo: hi"


def test_http_backend_unreachable_after_retries():
    url = f"http://127.0.0.1:{_free_port()}/generate"
    attempts = []

    class CountingTransport(httpx.BaseTransport):
        def handle_request(self, request):
            attempts.append(1)
            raise httpx.ConnectError("refused", request=request)

    backend = TextGenBackend(url, max_retries=2, retry_wait=0.0,
                             transport=CountingTransport())
    with pytest.raises(BackendUnavailableError):
        backend.generate("sys", "hi")
    assert len(attempts) == 3  # first try + 2 retries


def test_stub_echo():
    backend = StubBackend(default="ANSWER: X")
    assert backend.generate("sys", "anything") == "ANSWER: X"


def test_stub_scripted_fixture_reply():
    script = {"question one": "recorded answer one"}
    backend = StubBackend(script=script)
    assert backend.generate("sys", "question one") == "recorded answer one"


def test_stub_default_is_deterministic():
    a = StubBackend().generate("s", "prompt text")
    b = StubBackend().generate("s", "prompt text")
    assert a == b


def test_recorded_fixture_answer_returned_byte_exact():
    # a refinement question answered from a recorded request/response pair
    from emoannot.au import EmotionLabel
    from emoannot.synthesis import build_refinement_prompt

    coarse = ("The woman in the video is reacting to sudden news. The woman's "
              "expression and actions include eyes widened, and she raises "
              "her voice. Saying: No way!")
    system, question = build_refinement_prompt(coarse, EmotionLabel.SURPRISE)
    recorded = ("In the video, a woman reacts to sudden news. Her widened "
                "eyes and raised  voice clearly show surprise. Exact "
                "bytes, doubled spaces included, must survive.")
    backend = StubBackend(script={question: recorded})
    assert refine_annotation(backend, (system, question)) == recorded


def test_refine_annotation_returns_answer_and_audits():
    audit = AuditLog()
    backend = StubBackend(default="ANSWER: X")
    answer = refine_annotation(backend, ("sys", "question"), audit=audit)
    assert answer == "ANSWER: X"
    assert len(audit.entries) == 1
    entry = audit.entries[0]
    assert entry["prompt"] == "question"
    assert entry["response"] == "ANSWER: X"


def test_refine_annotation_blank_answer():
    backend = StubBackend(default="   ")
    with pytest.raises(EmptyCompletionError):
        refine_annotation(backend, ("sys", "q"))


def test_refine_annotation_audits_failures_once():
    audit = AuditLog()

    class Broken:
        def generate(self, system, prompt, max_tokens=512):
            raise BackendUnavailableError("down")

    with pytest.raises(BackendUnavailableError):
        refine_annotation(Broken(), ("s", "q"), audit=audit)
    assert len(audit.entries) == 1
    assert "error" in audit.entries[0]


def test_audit_log_appends_one_entry_per_call():
    audit = AuditLog()
    backend = StubBackend(default="ok")
    for i in range(5):
        refine_annotation(backend, ("s", f"q{i}"), audit=audit)
    assert [e["id"] for e in audit.entries] == [0, 1, 2, 3, 4]
    assert [e["prompt"] for e in audit.entries] == [f"q{i}" for i in range(5)]


def test_audit_log_file_sink(tmp_path):
    path = tmp_path / "audit.jsonl"
    audit = AuditLog(path)
    refine_annotation(StubBackend(default="ok"), ("s", "q"), audit=audit)
    lines = path.read_text().splitlines()
    assert len(lines) == 1
    assert json.loads(lines[0])["response"] == "ok"


def test_backend_from_url_selects_stub():
    assert isinstance(backend_from_url("stub:"), StubBackend)
    assert isinstance(backend_from_url("http://example.test/gen"), TextGenBackend)
