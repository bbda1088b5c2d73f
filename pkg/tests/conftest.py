import pytest


@pytest.fixture
def report(capsys):
    """Print a line that bypasses pytest's capture (acceptance pass/fail)."""

    def _report(line: str) -> None:
        with capsys.disabled():
            print(line, flush=True)

    return _report
