"""
The commands of the pipeline. Stages exchange data through files in the
output directory, so each command can run on its own:

parse     netlist  -> circuit.gml, features.csv
campaign  netlist  -> stimulus.json, campaign.csv [, logical_derating.csv]
embed     netlist [+ saved embedder_params.json] -> embedder_params.json, embeddings.csv
train     campaign.csv + embeddings.csv -> dataset.csv, model.json
predict   dataset.csv + model.json      -> predictions.csv, plot_data.csv, metrics.csv, timing.csv
train_predict  train then predict
pipeline  all of the above in order
gen       -> a synthetic .bench circuit
"""

import logging
import os
import time
from typing import Dict, Optional

from src import circuit_generator, dnn, fault_sim, graphsage, metrics_report
from src.helpers.config_helpers import PipelineConfig
from src.helpers.constants import (
    CAMPAIGN_FILE,
    DATASET_FILE,
    EMBEDDER_PARAMS_FILE,
    EMBEDDINGS_FILE,
    FEATURES_FILE,
    GENERATED_BENCH_FILE,
    GML_FILE,
    LOGICAL_DERATING_FILE,
    MODEL_FILE,
    STIMULUS_FILE,
)
from src.helpers.enums import PipelineStage
from src.helpers.errors import UsageError
from src.helpers.stage_helper import TimedStage
from src.netlist_core import Netlist, build_graph, node_features, read_bench, write_features_csv, write_gml

logger = logging.getLogger(__name__)


class NetlistStage(TimedStage):
    def load_netlist(self) -> Netlist:
        if not self.config.netlist:
            raise UsageError(f"{self.stage.value} needs a netlist (--netlist or the 'netlist' config key)")
        return read_bench(self.config.netlist)


class ParseStage(NetlistStage):
    stage = PipelineStage.parse

    def execute(self):
        graph = build_graph(self.load_netlist())
        write_gml(graph, self.path(GML_FILE))
        write_features_csv(node_features(graph), self.path(FEATURES_FILE))


class CampaignStage(NetlistStage):
    stage = PipelineStage.campaign

    def execute(self):
        netlist = self.load_netlist()
        settings = self.config.campaign
        if self.config.stimulus:
            stimulus = fault_sim.load_stimulus(self.config.stimulus)
        else:
            stimulus = fault_sim.random_stimulus(netlist, settings.cycles, settings.seed)
        fault_sim.save_stimulus(stimulus, self.path(STIMULUS_FILE))

        result = fault_sim.run_campaign(netlist, stimulus, fit=settings.fit, jobs=self.config.jobs)
        fault_sim.write_campaign_csv(result, self.path(CAMPAIGN_FILE))
        logger.info(f"Aggregate FFR {result.aggregate!r} over {len(result.rows)} flip-flops")

        if settings.logical_derating:
            table = fault_sim.logical_derating_table(netlist, stimulus.observe)
            self.save_results(
                LOGICAL_DERATING_FILE, ["ff_name", "ldr"], [[name, "" if ldr is None else repr(ldr)] for name, ldr in table]
            )


class EmbedStage(NetlistStage):
    stage = PipelineStage.embed

    def execute(self):
        netlist = self.load_netlist()
        graph = build_graph(netlist)
        features = node_features(graph)
        target = self.path(EMBEDDER_PARAMS_FILE)
        if self.config.embedder_params:
            params, sampler = graphsage.load_embedder(self.config.embedder_params)
            logger.info(f"Embedding {self.config.netlist} with the saved embedder {self.config.embedder_params}")
            if os.path.abspath(self.config.embedder_params) != os.path.abspath(target):
                graphsage.save_embedder(params, sampler, target)
        else:
            sampler = self.config.sampler
            params = graphsage.unsupervised_train(graph, features, sampler, self.config.embed_train).params
            graphsage.save_embedder(params, sampler, target)

        if self.config.embed_nodes == "flip_flops":
            nodes = [netlist.index[name] for name in netlist.flip_flops]
        else:
            nodes = None
        embeddings = graphsage.embed_forward(graph, features, params, sampler, nodes)
        graphsage.write_embeddings_csv(embeddings, self.path(EMBEDDINGS_FILE))


class TrainStage(TimedStage):
    stage = PipelineStage.train

    def execute(self):
        campaign = fault_sim.read_campaign_csv(self.path(CAMPAIGN_FILE))
        embeddings = graphsage.read_embeddings_csv(self.path(EMBEDDINGS_FILE))
        targets = dict(zip(campaign["ff_name"], campaign["ffr"].astype(float)))
        dataset = dnn.build_dataset(targets, embeddings)
        settings = self.config.train
        dataset = dnn.split_dataset(dataset, settings.train_fraction, settings.seed)
        dnn.write_dataset_csv(dataset, self.path(DATASET_FILE))

        trained = dnn.train(dataset, settings)
        dnn.save_model(trained.params, settings, self.path(MODEL_FILE))


class PredictStage(TimedStage):
    stage = PipelineStage.predict

    def execute(self):
        t0 = time.perf_counter()
        params, _ = dnn.load_model(self.path(MODEL_FILE))
        dataset = dnn.read_dataset_csv(self.path(DATASET_FILE))
        predictions = dnn.predict(params, dataset)
        self.wallclock[self.stage.value] = time.perf_counter() - t0
        report = metrics_report.build_report(predictions, self.config.report.fold, self.wallclock)
        metrics_report.emit_report(report, self.out_dir)


class ChainedStage(TimedStage):
    steps: tuple = ()

    def execute(self):
        for step in self.steps:
            step(self.config, self.wallclock).run()


class TrainPredictStage(ChainedStage):
    stage = PipelineStage.train_predict
    steps = (TrainStage, PredictStage)


class FullPipeline(ChainedStage):
    stage = PipelineStage.pipeline
    steps = (ParseStage, CampaignStage, EmbedStage, TrainStage, PredictStage)


class GenerateStage(TimedStage):
    stage = PipelineStage.gen

    def __init__(
        self,
        config: PipelineConfig,
        n_ffs: int,
        n_gates: int,
        n_inputs: Optional[int] = None,
        output: Optional[str] = None,
        wallclock: Optional[Dict[str, float]] = None,
    ):
        super().__init__(config, wallclock)
        self.n_ffs = n_ffs
        self.n_gates = n_gates
        self.n_inputs = n_inputs
        self.output = output or self.path(GENERATED_BENCH_FILE)

    def execute(self):
        text = circuit_generator.generate_circuit(self.n_ffs, self.n_gates, self.config.campaign.seed, self.n_inputs)
        directory = os.path.dirname(self.output)
        if directory:
            os.makedirs(directory, exist_ok=True)
        circuit_generator.write_circuit(text, self.output)


STAGES = {
    PipelineStage.parse: ParseStage,
    PipelineStage.campaign: CampaignStage,
    PipelineStage.embed: EmbedStage,
    PipelineStage.train: TrainStage,
    PipelineStage.predict: PredictStage,
    PipelineStage.train_predict: TrainPredictStage,
    PipelineStage.pipeline: FullPipeline,
}
