import pathlib

import pytest

from stratcheck import spec_lang
from stratcheck.model import build_global_model

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


def fixture_text(name):
    return (FIXTURES / name).read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def tgc_text():
    return fixture_text("tgc.stv")


@pytest.fixture(scope="session")
def tgc_doc(tgc_text):
    return spec_lang.parse_spec(tgc_text)


@pytest.fixture(scope="session")
def tgc_amas(tgc_doc):
    return spec_lang.validate(tgc_doc)


@pytest.fixture(scope="session")
def tgc_model(tgc_amas):
    return build_global_model(tgc_amas)


@pytest.fixture(scope="session")
def fuzz_entries():
    """The whole fuzz corpus as (text, amas, model) triples, built once."""
    import fuzz_corpus

    return [fuzz_corpus.instance(i) for i in range(fuzz_corpus.CORPUS_SIZE)]


def fixture_specs():
    """All bundled spec files, for corpus-plus-fixtures sweeps."""
    return sorted(FIXTURES.glob("*.stv"))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Repeat the acceptance lines where capture cannot hide them."""
    try:
        from test_acceptance import LINES
    except ImportError:
        return
    if LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
