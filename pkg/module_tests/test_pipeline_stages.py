import os

import numpy as np
import pytest

from conftest import fixture_path
from src import dnn
from src.circuit_generator import generate_circuit, write_circuit
from src.helpers.config_helpers import load_pipeline_config
from src.helpers.enums import Fold
from src.metrics_report import r_squared
from src.pipeline_stages import (
    CampaignStage,
    EmbedStage,
    FullPipeline,
    ParseStage,
    PredictStage,
    TrainPredictStage,
    TrainStage,
)

LEAN_EMBEDDING = [
    "embed_train.epochs=2",
    "embed_train.batches_per_epoch=5",
    "embed_train.batch_size=32",
    "embed_train.d_pool=16",
    "embed_train.d_emb=16",
]

ARTIFACTS = [
    "circuit.gml",
    "features.csv",
    "stimulus.json",
    "campaign.csv",
    "embedder_params.json",
    "embeddings.csv",
    "dataset.csv",
    "model.json",
    "predictions.csv",
    "plot_data.csv",
    "metrics.csv",
]


def s27_config(out_dir):
    values = {"netlist": fixture_path("s27.bench"), "out_dir": out_dir, "jobs": 1, "train.epochs": 30}
    return load_pipeline_config(values=values, overrides=LEAN_EMBEDDING)


def read_bytes(path):
    with open(path, "rb") as f:
        return f.read()


def test_pipeline_writes_every_artifact(tmp_path):
    out_dir = str(tmp_path / "run")
    wallclock = FullPipeline(s27_config(out_dir)).run()
    for name in ARTIFACTS + ["timing.csv"]:
        assert os.path.exists(os.path.join(out_dir, name)), name
    assert {"parse", "campaign", "embed", "train", "predict", "pipeline"} <= set(wallclock)


def test_pipeline_is_reproducible(tmp_path):
    first, again = str(tmp_path / "first"), str(tmp_path / "again")
    FullPipeline(s27_config(first)).run()
    FullPipeline(s27_config(again)).run()
    for name in ARTIFACTS:
        assert read_bytes(os.path.join(first, name)) == read_bytes(os.path.join(again, name)), name


def test_stages_run_one_by_one_match_the_pipeline(tmp_path):
    whole, stepwise = str(tmp_path / "whole"), str(tmp_path / "stepwise")
    FullPipeline(s27_config(whole)).run()
    config = s27_config(stepwise)
    for stage in (ParseStage, CampaignStage, EmbedStage, TrainStage, PredictStage):
        stage(config).run()
    for name in ARTIFACTS:
        assert read_bytes(os.path.join(whole, name)) == read_bytes(os.path.join(stepwise, name)), name


def test_train_predict_command_matches_the_pipeline(tmp_path):
    whole, chained = str(tmp_path / "whole"), str(tmp_path / "chained")
    FullPipeline(s27_config(whole)).run()
    config = s27_config(chained)
    for stage in (ParseStage, CampaignStage, EmbedStage):
        stage(config).run()
    wallclock = TrainPredictStage(config).run()
    assert {"train", "predict", "train_predict"} <= set(wallclock)
    for name in ("model.json", "predictions.csv", "metrics.csv"):
        assert read_bytes(os.path.join(whole, name)) == read_bytes(os.path.join(chained, name)), name


def test_embedding_every_node(tmp_path):
    out_dir = str(tmp_path / "all")
    config = load_pipeline_config(
        values={"netlist": fixture_path("s27.bench"), "out_dir": out_dir, "embed_nodes": "all"},
        overrides=LEAN_EMBEDDING,
    )
    EmbedStage(config).run()
    with open(os.path.join(out_dir, "embeddings.csv")) as f:
        assert len(f.read().splitlines()) == 1 + 18


NA_LIKE_NAMES = """\
INPUT(x)
INPUT(y)
OUTPUT(z)
NA = DFF(x)
null = DFF(y)
q = DFF(d)
d = AND(NA, null)
z = XOR(q, NA)
"""


def test_flip_flop_names_that_look_like_missing_values_survive(tmp_path):
    netlist = tmp_path / "na.bench"
    netlist.write_text(NA_LIKE_NAMES)
    out_dir = str(tmp_path / "na")
    config = load_pipeline_config(
        values={"netlist": str(netlist), "out_dir": out_dir, "jobs": 1, "train.epochs": 5},
        overrides=LEAN_EMBEDDING,
    )
    FullPipeline(config).run()

    dataset = dnn.read_dataset_csv(os.path.join(out_dir, "dataset.csv"))
    assert sorted(dataset.names) == ["NA", "null", "q"]
    with open(os.path.join(out_dir, "predictions.csv")) as f:
        names = [line.split(",")[0] for line in f.read().splitlines()[1:]]
    assert sorted(names) == ["NA", "null", "q"]


@pytest.mark.slow
def test_prediction_is_fast_and_fits_a_large_circuit(tmp_path):
    netlist = str(tmp_path / "large.bench")
    write_circuit(generate_circuit(200, 2400, seed=11), netlist)
    out_dir = str(tmp_path / "large")
    config = load_pipeline_config(
        values={"netlist": netlist, "out_dir": out_dir, "jobs": 1, "campaign.cycles": 512},
        overrides=["embed_train.epochs=2", "embed_train.batches_per_epoch=5"],
        seed=11,
    )
    wallclock = FullPipeline(config).run()
    assert wallclock["embed"] + wallclock["train"] + wallclock["predict"] < 0.1 * wallclock["campaign"]

    dataset = dnn.read_dataset_csv(os.path.join(out_dir, "dataset.csv"))
    assert len(dataset.fold_rows(Fold.train)) == 80
    history = dnn.train(dataset, config.train).loss_history
    assert len(history) == 201
    assert history[-1] <= 0.1 * history[0]

    params, _ = dnn.load_model(os.path.join(out_dir, "model.json"))
    train_rows = dataset.fold_rows(Fold.train)
    predicted = dnn.forward(params, dataset.features[train_rows])
    assert r_squared(dataset.targets[train_rows], predicted) >= 0.9
    assert np.all(np.isfinite(predicted))
