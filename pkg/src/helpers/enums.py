from enum import Enum


class GateKind(str, Enum):
    """Cell kinds of the netlist; the declaration order is the one-hot column order."""

    INPUT = "INPUT"
    OUTPUT = "OUTPUT"
    AND = "AND"
    NAND = "NAND"
    OR = "OR"
    NOR = "NOR"
    XOR = "XOR"
    XNOR = "XNOR"
    NOT = "NOT"
    BUF = "BUF"
    DFF = "DFF"

    @property
    def is_sequential(self) -> bool:
        return self is GateKind.DFF

    @property
    def is_source(self) -> bool:
        # values that are known at the start of a cycle without evaluation
        return self in (GateKind.INPUT, GateKind.DFF)


# kinds that may appear on the right-hand side of `name = KIND(...)`
GATE_KIND_ALIASES = {
    "AND": GateKind.AND,
    "NAND": GateKind.NAND,
    "OR": GateKind.OR,
    "NOR": GateKind.NOR,
    "XOR": GateKind.XOR,
    "XNOR": GateKind.XNOR,
    "NOT": GateKind.NOT,
    "BUF": GateKind.BUF,
    "BUFF": GateKind.BUF,
    "DFF": GateKind.DFF,
}

SINGLE_INPUT_KINDS = frozenset({GateKind.NOT, GateKind.BUF, GateKind.DFF, GateKind.OUTPUT})


class PipelineStage(str, Enum):
    parse = "parse"
    campaign = "campaign"
    embed = "embed"
    train = "train"
    predict = "predict"
    train_predict = "train_predict"
    pipeline = "pipeline"
    gen = "gen"


class Fold(str, Enum):
    train = "train"
    test = "test"


class Outcome(str, Enum):
    masked = "masked"
    failure = "failure"
