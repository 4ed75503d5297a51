import os
from importlib import resources

import pytest

from taxenrich.concept_kb import ConceptKB
from taxenrich.taxonomy import build_taxonomy

TOY_DIR = str(resources.files("taxenrich.data").joinpath("toy"))
GOLDEN_DIR = os.path.join(os.path.dirname(__file__), "golden")


@pytest.fixture
def toy_dir():
    return TOY_DIR


@pytest.fixture
def write(tmp_path):
    """Write ``text`` to ``tmp_path/name`` and return the path as a string."""

    def _write(name, text):
        p = tmp_path / name
        p.write_text(text, encoding="utf-8")
        return str(p)

    return _write


@pytest.fixture
def phone_kb():
    return ConceptKB({
        ("phone", "galaxy nexus"): 10,
        ("phone", "iphone"): 5,
        ("cellular phone", "galaxy nexus"): 2,
        ("smartphone", "iphone"): 8,
        ("planet", "mars"): 4,
    })


@pytest.fixture
def chain_tax():
    return build_taxonomy(["/A", "/A/B", "/A/B/C"], [("d1", "/A/B/C", "phone phone")])


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Context manager recording one PASS/FAIL line per acceptance criterion."""
    import contextlib
    import time

    @contextlib.contextmanager
    def _criterion(number, title):
        start = time.perf_counter()
        try:
            yield
        except BaseException:
            ACCEPTANCE_LINES.append(f"criterion {number} [{title}]: FAIL ({time.perf_counter() - start:.2f}s)")
            raise
        ACCEPTANCE_LINES.append(f"criterion {number} [{title}]: PASS ({time.perf_counter() - start:.2f}s)")

    return _criterion


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
