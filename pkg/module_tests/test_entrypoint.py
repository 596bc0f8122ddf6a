import json
import os

import numpy as np
import pytest

from conftest import fixture_path
from src import entrypoint
from src.graphsage import embed_forward, load_embedder, read_embeddings_csv
from src.helpers.errors import MetricsError
from src.netlist_core import build_graph, node_features, read_bench


def read(path):
    with open(path) as f:
        return f.read()


def test_help_exits_cleanly():
    assert entrypoint.main(["--help"]) == 0


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["explode"],
        ["gen", "--ffs", "3"],
        ["campaign", "--cycles", "many"],
        ["campaign", "--netlist", fixture_path("s27.bench"), "--seed", "-1"],
        ["pipeline", "--netlist", fixture_path("s27.bench"), "--seed", "seven"],
    ],
)
def test_usage_errors(argv):
    assert entrypoint.main(argv) == 1


def test_missing_netlist_is_a_usage_error(out_dir):
    assert entrypoint.main(["parse", "--out-dir", out_dir]) == 1


def test_malformed_netlist_is_a_data_error(tmp_path, out_dir):
    bench = tmp_path / "broken.bench"
    bench.write_text("INPUT(a)\nz = FROB(a)\n")
    assert entrypoint.main(["parse", "--netlist", str(bench), "--out-dir", out_dir]) == 2


def test_unknown_override_is_a_data_error(out_dir):
    argv = ["parse", "--netlist", fixture_path("buf.bench"), "--out-dir", out_dir, "--set", "train.nope=1"]
    assert entrypoint.main(argv) == 2


def test_numeric_failures_exit_with_three(monkeypatch):
    def failing_run(argv):
        raise MetricsError("R^2 is undefined for targets without variance")

    monkeypatch.setattr(entrypoint, "run", failing_run)
    assert entrypoint.main(["predict"]) == 3


def test_parse_command(out_dir):
    assert entrypoint.main(["parse", "--netlist", fixture_path("buf.bench"), "--out-dir", out_dir]) == 0
    assert read(os.path.join(out_dir, "circuit.gml")) == read(fixture_path("buf.gml"))
    assert read(os.path.join(out_dir, "features.csv")).startswith("node_name,")


def test_campaign_command(out_dir):
    argv = ["campaign", "--netlist", fixture_path("dff_observed.bench"), "--cycles", "8", "--jobs", "1",
            "--out-dir", out_dir]
    assert entrypoint.main(argv) == 0
    assert read(os.path.join(out_dir, "campaign.csv")).splitlines() == [
        "ff_name,failure_count,cycles,fit,ffr",
        "q,8,8,1.0,1.0",
        "TOTAL,8,8,,1.0",
    ]
    assert os.path.exists(os.path.join(out_dir, "stimulus.json"))


def test_campaign_command_with_stimulus_and_derating(out_dir):
    argv = ["campaign", "--netlist", fixture_path("dff_feedback.bench"),
            "--stimulus", fixture_path("dff_feedback_stimulus.json"), "--jobs", "1", "--out-dir", out_dir,
            "--set", "campaign.logical_derating=true"]
    assert entrypoint.main(argv) == 0
    assert read(os.path.join(out_dir, "campaign.csv")).splitlines()[1].split(",")[2] == "4"
    assert read(os.path.join(out_dir, "logical_derating.csv")).splitlines()[0] == "ff_name,ldr"


def test_gen_command(tmp_path):
    output = str(tmp_path / "circuits" / "small.bench")
    assert entrypoint.main(["gen", "--ffs", "5", "--gates", "20", "--seed", "3", "--output", output,
                            "--out-dir", str(tmp_path)]) == 0
    assert len(read_bench(output).flip_flops) == 5


def test_gen_rejects_impossible_sizes(out_dir):
    assert entrypoint.main(["gen", "--ffs", "5", "--gates", "2", "--out-dir", out_dir]) == 2


@pytest.mark.parametrize(
    "setting",
    [
        "sampler.fanouts=abc",
        'sampler.fanouts=[10, "x"]',
        "sampler.fanouts=10",
        "train.seed=-4",
        "campaign.seed=1.5",
    ],
)
def test_malformed_settings_are_data_errors(setting, out_dir):
    argv = ["campaign", "--netlist", fixture_path("s27.bench"), "--out-dir", out_dir, "--set", setting]
    assert entrypoint.main(argv) == 2


def test_malformed_initial_state_is_a_data_error(tmp_path, out_dir):
    stimulus = tmp_path / "stimulus.json"
    stimulus.write_text(json.dumps({"inputs": ["a"], "vectors": ["1", "0"], "initial_state": {"q": "high"}}))
    argv = ["campaign", "--netlist", fixture_path("dff_feedback.bench"), "--stimulus", str(stimulus),
            "--jobs", "1", "--out-dir", out_dir]
    assert entrypoint.main(argv) == 2


LEAN_EMBEDDING = ["--set", "embed_train.epochs=1", "--set", "embed_train.batches_per_epoch=3",
                  "--set", "embed_train.d_pool=8", "--set", "embed_train.d_emb=8"]


def test_embed_reuses_a_saved_embedder_on_another_circuit(tmp_path):
    trained_dir, reused_dir = str(tmp_path / "trained"), str(tmp_path / "reused")
    assert entrypoint.main(["embed", "--netlist", fixture_path("s27.bench"), "--out-dir", trained_dir,
                            *LEAN_EMBEDDING]) == 0
    saved = os.path.join(trained_dir, "embedder_params.json")

    argv = ["embed", "--netlist", fixture_path("xor_path.bench"), "--params", saved, "--out-dir", reused_dir,
            "--set", "embed_nodes=all"]
    assert entrypoint.main(argv) == 0
    assert read(os.path.join(reused_dir, "embedder_params.json")) == read(saved)

    params, sampler = load_embedder(saved)
    graph = build_graph(read_bench(fixture_path("xor_path.bench")))
    expected = embed_forward(graph, node_features(graph), params, sampler)
    embeddings = read_embeddings_csv(os.path.join(reused_dir, "embeddings.csv"))
    assert embeddings.names == expected.names
    assert embeddings.values.shape == (graph.num_nodes, 8)
    assert np.array_equal(embeddings.values, expected.values)


def test_embed_with_a_missing_embedder_is_a_data_error(tmp_path, out_dir):
    argv = ["embed", "--netlist", fixture_path("xor_path.bench"), "--params", str(tmp_path / "nope.json"),
            "--out-dir", out_dir]
    assert entrypoint.main(argv) == 2
