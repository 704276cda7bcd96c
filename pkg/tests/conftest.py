import numpy as np
import pytest

from hesynth.quill import ProgramBuilder, RingParams

# acceptance outcomes, printed in the terminal summary
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, desc, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {desc}  [{detail}]")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def ring8():
    return RingParams(8, 65537)


def gx_separable_program(spec):
    """The separable Gx kernel: vertical [1 2 1] smoothing, then a horizontal difference."""
    b = ProgramBuilder(spec.params, spec.ct_inputs, dict(spec.pt_consts))
    c1 = b.add(b.ref("img", -5), "img")
    c2 = b.add(b.ref(c1, 5), c1)
    b.sub(b.ref(c2, 1), b.ref(c2, -1))
    return b.build()
