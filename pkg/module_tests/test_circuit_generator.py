import networkx as nx
import numpy as np
import pytest

from src.circuit_generator import default_input_count, generate_circuit, write_circuit
from src.helpers.enums import GateKind
from src.helpers.errors import ConfigError
from src.netlist_core import build_graph, output_cell_name, parse_bench, read_bench


def test_smallest_circuit_parses():
    netlist = parse_bench(generate_circuit(1, 1, seed=0))
    assert netlist.flip_flops == ("ff0",)
    assert netlist.primary_outputs == ("g0",)


def test_generation_is_byte_identical_per_seed():
    assert generate_circuit(100, 500, seed=7) == generate_circuit(100, 500, seed=7)
    assert generate_circuit(100, 500, seed=7) != generate_circuit(100, 500, seed=8)


def test_requested_sizes():
    netlist = parse_bench(generate_circuit(30, 120, seed=2))
    assert len(netlist.flip_flops) == 30
    assert len(netlist.primary_inputs) == default_input_count(30) == 6
    assert sum(1 for cell in netlist.cells if cell.name.startswith("g")) == 120


def test_many_seeds_parse():
    rng = np.random.default_rng(0)
    for seed in range(300):
        n_ffs = int(rng.integers(0, 12))
        n_gates = n_ffs + int(rng.integers(1, 30))
        netlist = parse_bench(generate_circuit(n_ffs, n_gates, seed))
        assert len(netlist.flip_flops) == n_ffs


@pytest.mark.parametrize("seed", range(10))
def test_every_flip_flop_is_observable_and_every_gate_reachable(seed):
    netlist = parse_bench(generate_circuit(20, 80, seed, n_inputs=3))
    graph = build_graph(netlist).to_networkx()
    outputs = {output_cell_name(net) for net in netlist.primary_outputs}
    for ff in netlist.flip_flops:
        assert nx.descendants(graph, ff) & outputs
    inputs = set(netlist.primary_inputs)
    for cell in netlist.cells:
        if cell.kind not in (GateKind.INPUT, GateKind.DFF, GateKind.OUTPUT):
            assert nx.ancestors(graph, cell.name) & inputs


@pytest.mark.parametrize("n_ffs, n_gates, n_inputs", [(5, 3, None), (1, 0, None), (-1, 4, None), (2, 4, 1)])
def test_invalid_sizes(n_ffs, n_gates, n_inputs):
    with pytest.raises(ConfigError):
        generate_circuit(n_ffs, n_gates, seed=0, n_inputs=n_inputs)


def test_written_circuit_reads_back(tmp_path):
    text = generate_circuit(4, 10, seed=3)
    path = str(tmp_path / "generated.bench")
    write_circuit(text, path)
    assert read_bench(path).flip_flops == parse_bench(text).flip_flops
    with open(path) as f:
        assert f.readline().startswith("# generated: 4 flip-flops, 10 gates")
