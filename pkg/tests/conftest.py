import os
import sys
import tempfile
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_CACHE = tempfile.mkdtemp(prefix="latticeval-test-cache-")
os.environ["LATTICEVAL_CACHE"] = _CACHE


@pytest.fixture(scope="session")
def f2():
    from latticeval.field import equichar

    return equichar(2)


@pytest.fixture(scope="session")
def f3():
    from latticeval.field import equichar

    return equichar(3)


@pytest.fixture(scope="session")
def p5():
    from latticeval.field import mixedchar

    return mixedchar(5)
