import json
import time
from pathlib import Path

import pytest

from leakscope import synth
from leakscope.report import PipelineConfig, run_pipeline

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "leakscope" / "data" / "fixtures"

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(cid, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    cid, title = mark.args
    entry = _criteria.setdefault(cid, {"title": title, "ok": True, "tests": 0})
    if rep.when == "call":
        entry["tests"] += 1
    if rep.failed or (rep.when == "call" and rep.skipped):
        entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_criteria, key=lambda c: int(c[2:])):
        e = _criteria[cid]
        status = "PASS" if e["ok"] and e["tests"] else "FAIL"
        terminalreporter.write_line(f"{cid} {status}  {e['title']} ({e['tests']} checks)")


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def published_run(tmp_path_factory):
    """Synthetic corpus at the published counts, pushed through the whole pipeline once."""
    root = tmp_path_factory.mktemp("published")
    params = synth.published_params()
    start = time.perf_counter()
    records, manifest = synth.generate_corpus(params)
    paths = synth.write_corpus_dir(root / "corpus", params, records, manifest)
    (root / "salt").write_bytes(b"fixed test salt")
    cfg_path = root / "config.json"
    cfg_path.write_text(json.dumps({
        "inputs": [str(paths["raw"])],
        "format": "csv",
        "salt_file": "salt",
        "workdir": "work",
    }))
    bundle = run_pipeline(PipelineConfig.load(cfg_path))
    elapsed = time.perf_counter() - start
    return {"root": root, "params": params, "records": records, "manifest": manifest,
            "bundle": bundle, "elapsed": elapsed, "work": root / "work", "config": cfg_path}
