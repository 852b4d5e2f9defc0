import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conetree import get_base, parse_structure  # noqa: E402

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
BASE_NAMES = ("equality", "graph", "eq2")

# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE = {}


@pytest.fixture(params=BASE_NAMES)
def base(request):
    return get_base(request.param)


@pytest.fixture
def corpus():
    return CORPUS


def load(name):
    return parse_structure((CORPUS / name).read_text())


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])


os.environ.pop("CONETREE_SEED", None)
