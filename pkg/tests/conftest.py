import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def gf_mul_slow(a: int, b: int) -> int:
    """Schoolbook GF(2^8) product modulo x^8 + x^4 + x^3 + x + 1."""
    p = 0
    while b:
        if b & 1:
            p ^= a
        a <<= 1
        if a & 0x100:
            a ^= 0x11B
        b >>= 1
    return p


@pytest.fixture(scope="session")
def gf_table():
    return np.array([[gf_mul_slow(a, b) for b in range(256)] for a in range(256)], dtype=np.int64)


# one verdict line per acceptance criterion, repeated in the terminal summary
_VERDICTS: dict[int, str] = {}


@pytest.fixture
def verdict(request):
    seen = []

    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} | {detail}"
        _VERDICTS[number] = line
        seen.append(number)
        print(line)
        return ok

    yield record
    number = request.node.get_closest_marker("criterion")
    if number is not None and number.args[0] not in seen:
        _VERDICTS[number.args[0]] = f"criterion {number.args[0]}: FAIL | raised before a verdict was reached"


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_VERDICTS):
            terminalreporter.write_line(_VERDICTS[number])
