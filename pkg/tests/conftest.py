import json
import time

import numpy as np
import pytest

from flowgate import synth
from flowgate.cli import main
from flowgate.dataio import write_flow_csv

_CRITERIA: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


def pytest_runtest_logreport(report):
    marker = getattr(report, "_criterion", None)
    if marker is None:
        return
    number, title = marker
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        outcome = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        _CRITERIA[number] = (title, outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        outcome.get_result()._criterion = marker.args


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, outcome = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:>2}: {outcome}  {title}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def write_synth(spec, path):
    table, labels, informative = synth.generate(spec)
    write_flow_csv(table, path)
    return path


@pytest.fixture(scope="session")
def benchmark_csv(tmp_path_factory):
    return write_synth(synth.BENCHMARK, tmp_path_factory.mktemp("bench") / "benchmark.csv")


def run_compare_cli(data, out, *extra):
    start = time.perf_counter()
    code = main(["compare", "--data", str(data), "--seed", "1", "--out", str(out), *extra])
    elapsed = time.perf_counter() - start
    assert code == 0
    return json.loads((out / "report.json").read_text()), elapsed


@pytest.fixture(scope="session")
def benchmark_run(benchmark_csv, tmp_path_factory):
    """Full seven-algorithm compare on the benchmark, shared by every test that needs it."""
    out = tmp_path_factory.mktemp("bench_run")
    report, elapsed = run_compare_cli(benchmark_csv, out)
    return out, report, elapsed
