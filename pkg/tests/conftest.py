import pytest

from weakgauss import kernels

BACKENDS = ["python"] + (["cython"] if kernels.compiled_simulate_block is not None else [])


@pytest.fixture(params=BACKENDS)
def kernel(request):
    return kernels.get_kernel(request.param)[1]


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not (mod.RESULTS or mod.INFO):
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
    for line in mod.INFO:
        terminalreporter.write_line(line)
