"""One test per acceptance criterion; each prints a pass/fail line and the
terminal summary repeats the full table."""
import time

import pytest

from tentlab.acceptance import CRITERIA

from conftest import ACCEPTANCE_LINES


@pytest.mark.parametrize("criterion", CRITERIA, ids=lambda f: f.__name__)
def test_criterion(criterion):
    t0 = time.perf_counter()
    c = criterion()
    line = f"{c.line()}  ({time.perf_counter() - t0:.1f}s)"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert c.passed, c.measured
