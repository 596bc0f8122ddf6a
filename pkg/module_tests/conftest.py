import os

import pytest

from src.netlist_core import read_bench

FIXTURE_FOLDER = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "input")

NETLIST_FIXTURES = [
    "buf.bench",
    "dff_feedback.bench",
    "dff_observed.bench",
    "dff_unobservable.bench",
    "and_mask.bench",
    "xor_path.bench",
    "dead_cone.bench",
    "s27.bench",
]


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURE_FOLDER, name)


@pytest.fixture
def load_netlist():
    def _load(name: str):
        return read_bench(fixture_path(name))

    return _load


@pytest.fixture
def out_dir(tmp_path):
    path = tmp_path / "results"
    path.mkdir()
    return str(path)
