import os
import tempfile

# searches archive what they find; keep that out of the user's cache
os.environ["COVDEX_CERT_DIR"] = tempfile.mkdtemp(prefix="covdex-test-certs-")
for _k in [k for k in os.environ if k.startswith("COVDEX_") and k != "COVDEX_CERT_DIR"]:
    del os.environ[_k]

import numpy as np
import pytest

from covdex.bodies import canonical


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(params=["disk", "square", "triangle", "hexagon"])
def planar(request):
    return canonical(request.param)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is not None and mod.LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.LINES):
            terminalreporter.write_line(line)
