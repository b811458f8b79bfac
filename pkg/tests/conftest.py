import json
from pathlib import Path

import numpy as np
import pytest

FIXTURES = Path(__file__).parent / "fixtures"

# criterion number -> (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def reference():
    return json.loads((FIXTURES / "pyscf_reference.json").read_text())


@pytest.fixture(scope="session")
def h4_ts_point():
    from dissipath.path import H4Rectangle, compute_point, transition_state_s

    kind = H4Rectangle()
    s = transition_state_s(kind)
    return compute_point(kind.geometry(s), s, kind.n_electrons)


@pytest.fixture(scope="session")
def h4_small_mesh():
    """Six aligned geometries from s = 0 to the square; cheap enough for unit tests."""
    from dissipath.path import H4Rectangle, build_mesh, transition_state_s

    kind = H4Rectangle()
    return kind, build_mesh(kind, np.linspace(0.0, transition_state_s(kind), 6), with_profile=False)
