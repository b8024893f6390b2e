"""
End-to-end runs of the command-line entry point in a subprocess.

These tests start ``python -m gems_select.main`` the way a user would and check:

1. Reports written by ``run`` do not depend on the number of workers.
2. Errors reach stderr as a JSON object with exit code 1.
3. The log file lands in ``GEMS_SELECT_LOG_DIR``.
"""

import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

pytestmark = pytest.mark.integration

SRC = Path(__file__).resolve().parents[2] / "src"

HARD = ["--instance", "hard", "--instance-param", "d_star=2", "--instance-param", "eps=0.25"]


@pytest.fixture
def env(tmp_path):
    env = dict(os.environ)
    env["PYTHONPATH"] = os.pathsep.join(filter(None, [str(SRC), env.get("PYTHONPATH")]))
    env["GEMS_SELECT_LOG_DIR"] = str(tmp_path / "logs")
    env.pop("GEMS_SELECT_DEBUG", None)
    return env


def gems_select(env, *args):
    return subprocess.run(
        [sys.executable, "-m", "gems_select.main", *args],
        capture_output=True,
        text=True,
        env=env,
        timeout=600,
    )


def test_run_is_independent_of_workers(env, tmp_path):
    reports = []
    for workers in ("1", "4"):
        out = tmp_path / f"w{workers}"
        proc = gems_select(
            env,
            "run",
            *HARD,
            "--algo",
            "master_fc",
            "--max-ell",
            "4",
            "--trials",
            "8",
            "--seed",
            "11",
            "--workers",
            workers,
            "--out",
            str(out),
        )
        assert proc.returncode == 0, proc.stderr
        reports.append((out / "report.json").read_text())
    assert reports[0] == reports[1]


def test_error_object_on_stderr(env, tmp_path):
    proc = gems_select(env, "complexity", "--instance", "nope", "--out", str(tmp_path))
    assert proc.returncode == 1
    error = json.loads(proc.stderr[proc.stderr.index("{") :])
    assert error["error"] == "ConfigError"
    assert "nope" in error["message"]


def test_log_file_location(env, tmp_path):
    proc = gems_select(env, "complexity", *HARD, "--out", str(tmp_path / "out"))
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "logs" / "gems_select.log").exists()
