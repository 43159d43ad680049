import numpy as np
import pytest

from qotph.qotp import KeyMap


def random_keymap(n, rng):
    bits = rng.integers(0, 2, size=(n, 2))
    return KeyMap(tuple(map(tuple, bits)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line; PASS only if the test body finishes and ``ok`` holds."""
    number = request.node.get_closest_marker("criterion").args[0]
    state = {"ok": False, "detail": ""}

    def record(ok: bool, detail: str = ""):
        state["ok"], state["detail"] = bool(ok), detail
        return bool(ok)

    yield record
    _ACCEPTANCE[number] = (state["ok"], state["detail"])


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
