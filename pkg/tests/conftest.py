from dataclasses import replace

import pytest

from safecorridor.voxel_grid import MapGenParams, generate_random_map


@pytest.fixture(scope="session")
def random_maps():
    """Seeded maps with the default generator parameters, built once."""
    cache = {}

    def get(seed):
        if seed not in cache:
            cache[seed] = generate_random_map(replace(MapGenParams(), rng_seed=seed))
        return cache[seed]

    return get


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
