import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import pytest

from pdial import _http
from pdial.embedding import EmbeddingBackendConfig
from pdial.metric import TrainConfig, train
from pdial.persistence import load_dataset, load_matrix

FIXTURES = Path(__file__).parent / "fixtures"

# The acceptance recipe: contrastive, margin 1.0, 50 epochs, lr 0.05, seed 7,
# hashed backend at dimension 64.
FIXTURE_BACKEND = EmbeddingBackendConfig(kind="hashed", dimension=64)
FIXTURE_TRAIN_CFG = TrainConfig(
    loss_kind="contrastive",
    margin_m=1.0,
    learning_rate=0.05,
    epochs=50,
    seed=7,
)


@pytest.fixture(scope="session")
def fixture_train_docs():
    return load_dataset(FIXTURES / "train.jsonl")


@pytest.fixture(scope="session")
def fixture_test_docs():
    return load_dataset(FIXTURES / "test.jsonl")


@pytest.fixture(scope="session")
def fixture_matrix():
    return load_matrix(FIXTURES / "matrix.json")


@pytest.fixture(scope="session")
def fixture_model(fixture_train_docs, fixture_matrix):
    model, log = train(
        fixture_train_docs, fixture_matrix, FIXTURE_BACKEND, FIXTURE_TRAIN_CFG
    )
    return model


@pytest.fixture(autouse=True)
def _default_fan_out():
    yield
    _http.set_fan_out(_http.DEFAULT_FAN_OUT)


class _StubHandler(BaseHTTPRequestHandler):
    def do_POST(self):  # noqa: N802 (http.server API)
        length = int(self.headers.get("Content-Length", 0))
        body = json.loads(self.rfile.read(length)) if length else {}
        record = {
            "path": self.path,
            "body": body,
            "headers": {k.lower(): v for k, v in self.headers.items()},
        }
        with self.server.lock:
            self.server.requests.append(record)
            status, payload = self.server.handler_fn(record)
        data = json.dumps(payload).encode() if not isinstance(payload, bytes) else payload
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


@pytest.fixture
def stub_server():
    """Local HTTP server whose behavior each test installs via
    ``server.handler_fn(record) -> (status, payload)``."""
    server = ThreadingHTTPServer(("127.0.0.1", 0), _StubHandler)
    server.requests = []
    server.lock = threading.Lock()
    server.handler_fn = lambda record: (404, {"error": "no handler installed"})
    server.url = f"http://127.0.0.1:{server.server_address[1]}"
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield server
    server.shutdown()
    thread.join(timeout=5)


def no_sleep(_seconds: float) -> None:
    """Injectable sleep for retry tests."""
