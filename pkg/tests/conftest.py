import json
import threading
import urllib.parse
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest

from tickerlab.market_data import fixture_dir, filter_payload


class _ChartHandler(BaseHTTPRequestHandler):
    """Serves the bundled chart recordings the way the live endpoint does:
    ranged by period1/period2, 404 for unknown symbols."""

    def do_GET(self):
        url = urllib.parse.urlparse(self.path)
        prefix = "/v8/finance/chart/"
        if not url.path.startswith(prefix):
            self.send_error(404)
            return
        symbol = urllib.parse.unquote(url.path[len(prefix):])
        if symbol == "BROKEN":
            self._reply(200, b"{not json")
            return
        path = fixture_dir() / "chart" / "v8" / "finance" / "chart" / f"{symbol}.json"
        if not path.exists():
            body = {"chart": {"result": None, "error": {
                "code": "Not Found", "description": "No data found, symbol may be delisted"}}}
            self._reply(404, json.dumps(body).encode())
            return
        query = urllib.parse.parse_qs(url.query)
        payload = filter_payload(json.loads(path.read_text()), int(query["period1"][0]),
                                 int(query["period2"][0]))
        self.server.requests.append(self.path)
        self._reply(200, json.dumps(payload).encode())

    def _reply(self, code, body):
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture(scope="session")
def chart_server():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _ChartHandler)
    server.requests = []
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield server, f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def fixture_runs():
    """Default-configuration comparison per bundled symbol, run once per session.

    Maps symbol -> (ComparisonReport, wall seconds).
    """
    import time

    from tickerlab.experiments import ExperimentConfig, run_comparison
    runs = {}
    for symbol in ("MSFT", "TSLA"):
        start = time.perf_counter()
        report = run_comparison(ExperimentConfig(symbols=(symbol,), offline=True))
        runs[symbol] = (report, time.perf_counter() - start)
    return runs


# -- acceptance summary: one line per criterion at the end of the run ---------

_CRITERIA = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        detail = dict(item.user_properties).get("detail", "")
        _CRITERIA.append((marker.args[0], "PASS" if rep.passed else "FAIL", detail))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, verdict, detail in _CRITERIA:
        terminalreporter.write_line(f"{verdict}  {label}" + (f"  [{detail}]" if detail else ""))
