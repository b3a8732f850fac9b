from pathlib import Path

import pytest

from proofnet.corpus import load_corpus

CORPUS_DIR = Path(__file__).resolve().parent.parent / "corpus"


@pytest.fixture(scope="session")
def corpus():
    return load_corpus(CORPUS_DIR)


@pytest.fixture(scope="session")
def fixtures(corpus):
    return {f.name: f for f in corpus}


@pytest.fixture(scope="session")
def strong(corpus):
    """Oracle outcome of every corpus net, by fixture name."""
    from proofnet import strong_length

    return {f.name: strong_length(f.net) for f in corpus if f.net_text}


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("tests.test_acceptance")
    if mod and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(mod.RESULTS):
            terminalreporter.write_line(mod.RESULTS[n])
