import os
import subprocess
import sys

import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def run_python(code: str, backend: str = "numba", threads: int | None = None, timeout: float = 600):
    """Run a snippet in a fresh interpreter with the requested kernel backend."""
    env = dict(os.environ, DFTLAB_BACKEND=backend)
    if threads is not None:
        env["NUMBA_NUM_THREADS"] = str(threads)
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True, timeout=timeout, cwd=ROOT
    )
    if out.returncode != 0:
        raise AssertionError(f"subprocess failed:\n{out.stderr}")
    return out.stdout


@pytest.fixture
def py():
    return run_python


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
