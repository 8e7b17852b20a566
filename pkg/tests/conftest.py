import pytest

from cheegeropt.geometry import Disk, Rectangle, make_grid, rasterize

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def unit_disk_128():
    grid = make_grid(128, 128, (2.2, 2.2))
    return rasterize(Disk((1.1, 1.1), 1.0), grid), grid


@pytest.fixture(scope="session")
def unit_square_64():
    grid = make_grid(64, 64, (1.0, 1.0))
    return rasterize(Rectangle((0.0, 0.0), 1.0, 1.0), grid), grid


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
