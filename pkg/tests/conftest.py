import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from plancog import frontend, kb
from plancog.cli import corpus


@pytest.fixture(scope="session")
def corpus_sources():
    return dict(corpus())


@pytest.fixture(scope="session")
def grey_src(corpus_sources):
    return corpus_sources["grey.mp"]


@pytest.fixture(scope="session")
def orange_src(corpus_sources):
    return corpus_sources["orange.mp"]


@pytest.fixture(scope="session")
def search_src(corpus_sources):
    return corpus_sources["search.mp"]


@pytest.fixture(scope="session")
def flag_src(corpus_sources):
    return corpus_sources["flag.mp"]


@pytest.fixture()
def grey(grey_src):
    return frontend.parse(grey_src)


@pytest.fixture()
def orange(orange_src):
    return frontend.parse(orange_src)


@pytest.fixture()
def search(search_src):
    return frontend.parse(search_src)


@pytest.fixture()
def flag(flag_src):
    return frontend.parse(flag_src)


@pytest.fixture(scope="session")
def builtin():
    return kb.builtin_kb()
