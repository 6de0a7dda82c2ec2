import numpy as np
import pytest

from heavycs.htdist import RandomStream


class ScriptedStream(RandomStream):
    """Stream that hands out pre-set values, for forcing specific draws."""

    def __init__(self, uniforms=(), normals=(), signs=()):
        super().__init__(0)
        self._u = list(uniforms)
        self._n = list(normals)
        self._s = list(signs)

    @staticmethod
    def _take(queue, size):
        if size is None:
            return queue.pop(0)
        return np.array([queue.pop(0) for _ in range(int(np.prod(size)))]).reshape(size)

    def uniform(self, size=None):
        return self._take(self._u, size)

    def normal(self, size=None):
        return self._take(self._n, size)

    def sign(self, size=None):
        return self._take(self._s, size)


@pytest.fixture
def scripted():
    return ScriptedStream


_ACCEPTANCE = []


@pytest.fixture
def verdict():
    """Record one acceptance line: ``verdict(number, ok, detail)``; the test still asserts."""

    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
