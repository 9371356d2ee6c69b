import os

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@pytest.fixture(autouse=True, scope="session")
def _calibration_cache(tmp_path_factory):
    """Keep calibrations out of the user's cache directory."""
    path = tmp_path_factory.mktemp("cache") / "calibration.json"
    old = os.environ.get("POLYAPPROX_CACHE")
    os.environ["POLYAPPROX_CACHE"] = str(path)
    yield path
    if old is None:
        os.environ.pop("POLYAPPROX_CACHE", None)
    else:
        os.environ["POLYAPPROX_CACHE"] = old


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_unit(rng, n, d):
    v = rng.standard_normal((n, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


ACCEPTANCE_LINES: list = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line for an acceptance criterion."""
    def _report(number: int, ok: bool, detail: str):
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
