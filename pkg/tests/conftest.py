import copy

import pytest

from proxsim.scenario import parse_scenario


def room_rows(width_cells=40, height_cells=30):
    """Walled empty room as ascii rows (first row is the top)."""
    wall = "#" * width_cells
    inner = "#" + "." * (width_cells - 2) + "#"
    return [wall] + [inner] * (height_cells - 2) + [wall]


BASE = {
    "scenario_version": 1,
    "name": "test",
    "map": {"resolution": 0.05, "ascii_cell": 0.2, "ascii_rows": room_rows()},
    "robot": {"start": [1.5, 3.0, 0.0]},
    "persons": [
        {"id": "p1", "activity": "standing", "script": {"waypoints": [[5.0, 3.0]], "orientation_mode": "fixed", "heading": 3.14159}}
    ],
    "actions": [{"kind": "approach", "target": "p1"}],
    "iterations": 2,
    "seed": 7,
    "modes": ["social"],
}


def scenario_dict(**changes):
    data = copy.deepcopy(BASE)
    for key, value in changes.items():
        if value is None:
            data.pop(key, None)
        else:
            data[key] = value
    return data


@pytest.fixture
def make_config():
    def make(**changes):
        return parse_scenario(scenario_dict(**changes))

    return make


_VERDICTS = []


@pytest.fixture
def verdict():
    """Print an acceptance PASS/FAIL line and keep it for the terminal summary."""

    def record(cid, ok, detail):
        line = f"{cid} {'PASS' if ok else 'FAIL'}: {detail}"
        print(line)
        _VERDICTS.append(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_VERDICTS, key=lambda s: int(s.split()[0][1:])):
            terminalreporter.write_line(line)
