import shutil
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

import cgpl
from cgpl.cli import main

HERE = Path(__file__).parent
FIXTURES = HERE / "fixtures"
GOLDEN = HERE / "golden"
CORPUS = Path(cgpl.__file__).parent / "corpus" / "factory"

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def copy_tree(src: Path, dst: Path) -> Path:
    shutil.copytree(src, dst)
    return dst


@pytest.fixture
def corpus(tmp_path) -> Path:
    """Writable copy of the bundled factory example."""
    return copy_tree(CORPUS, tmp_path / "factory")


@pytest.fixture
def fixture_root(tmp_path):
    def make(name: str) -> Path:
        return copy_tree(FIXTURES / name, tmp_path / name)
    return make


@pytest.fixture
def cli(capsys, monkeypatch):
    """Run ``cgpl`` in-process; returns (exit code, stdout, stderr)."""
    monkeypatch.setenv("CGPL_COLOR", "never")

    def run(*argv, cwd=None):
        if cwd is not None:
            monkeypatch.chdir(cwd)
        code = main([str(a) for a in argv])
        out, err = capsys.readouterr()
        return code, out, err
    return run


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS, key=lambda l: int(l.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
