from pathlib import Path

import pytest

from modules.core.families import cycle, disjoint_union, path, star, with_pendants
from modules.core.graph_core import Graph


@pytest.fixture
def p2() -> Graph:
    return path(2)


@pytest.fixture
def p3() -> Graph:
    return path(3)


@pytest.fixture
def p4() -> Graph:
    return path(4)


@pytest.fixture
def star3() -> Graph:
    return star(3)


@pytest.fixture
def c3() -> Graph:
    return cycle(3)


@pytest.fixture
def c4() -> Graph:
    return cycle(4)


@pytest.fixture
def c5() -> Graph:
    return cycle(5)


@pytest.fixture
def c6() -> Graph:
    return cycle(6)


@pytest.fixture
def triangle_pendant() -> Graph:
    return with_pendants(cycle(3), [0], name="triangle_pendant")


@pytest.fixture
def c4_pendant() -> Graph:
    return with_pendants(cycle(4), [0], name="c4_pendant")


@pytest.fixture
def c6_pendant() -> Graph:
    return with_pendants(cycle(6), [0], name="c6_pendant")


@pytest.fixture
def c5_p2() -> Graph:
    return disjoint_union(cycle(5), path(2), name="c5_p2")


DATA_DIR = Path(__file__).resolve().parent.parent / "data" / "graphs"


@pytest.fixture
def graph_file():
    def resolve(name: str) -> str:
        return str(DATA_DIR / name)
    return resolve
