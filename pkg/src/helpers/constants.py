import os

BASE_PATH = os.path.abspath(os.getcwd())
CONFIG_FOLDER_PATH = os.path.join(BASE_PATH, "configuration")
CONFIGURATION_FILE_PATH = os.path.join(CONFIG_FOLDER_PATH, "pipeline_config.json")
RESULTS_FOLDER = os.path.join(BASE_PATH, "results")
INPUT_FOLDER = os.path.join(BASE_PATH, "input")

# exit codes reported by the command line
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

DEFAULT_SEED = 42
DEFAULT_CYCLES = 64
DEFAULT_FIT = 1.0

# exhaustive logical-derating enumeration bound (independent cone inputs)
MAX_CONE_INPUTS = 20

# artifact file names inside the output directory
GML_FILE = "circuit.gml"
FEATURES_FILE = "features.csv"
STIMULUS_FILE = "stimulus.json"
CAMPAIGN_FILE = "campaign.csv"
LOGICAL_DERATING_FILE = "logical_derating.csv"
EMBEDDINGS_FILE = "embeddings.csv"
EMBEDDER_PARAMS_FILE = "embedder_params.json"
MODEL_FILE = "model.json"
DATASET_FILE = "dataset.csv"
PREDICTIONS_FILE = "predictions.csv"
PLOT_DATA_FILE = "plot_data.csv"
METRICS_FILE = "metrics.csv"
TIMING_FILE = "timing.csv"
GENERATED_BENCH_FILE = "generated.bench"

# persistence format version of the JSON parameter files
FORMAT_VERSION = 1
