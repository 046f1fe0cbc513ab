import numpy as np
import pytest

from qvolume.basis import FAMILY_NAMES, make_family

# Acceptance tests append their PASS/FAIL lines here; the terminal
# summary hook replays them after the run, outside output capture.
ACCEPTANCE_REPORT = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_REPORT:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_REPORT:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def families():
    """All ten state families, constructed once."""
    return {name: make_family(name) for name in FAMILY_NAMES}


@pytest.fixture(scope="session")
def bell_diagonal(families):
    return families["bell_diagonal"]


@pytest.fixture(scope="session")
def two_qubit(families):
    return families["two_qubit"]


def random_states_in_ball(family, count, rng):
    """Coordinate samples of valid states via a short hit-and-run chain
    (ball rejection is hopeless for the high-dimensional families)."""
    from qvolume.samplers import iterate_chain_coords

    seed = int(rng.integers(2 ** 31))
    return np.concatenate(
        [c for _, c in iterate_chain_coords(family, count, seed)])[:count]
