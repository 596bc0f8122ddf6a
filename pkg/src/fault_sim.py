"""
Cycle-accurate two-valued simulation and exhaustive SEU fault injection.

Cycle semantics: flip-flop outputs present the stored state, combinational
cells settle in topological order, primary outputs are sampled at the end
of the cycle and flip-flops load their data input at the boundary. An SEU
inverts the stored bit right after the boundary that enters its cycle.

Two engines live here. `simulate_golden` / `simulate_with_seu` are a plain
scalar reference. `run_campaign` packs one faulty machine per (ff, cycle)
injection into the bits of uint64 words and advances all of them together,
optionally split into chunks over a worker pool.

FFR_i = FIT_i * TDR * LDR * FDR, with TDR = 1 for state flips and the
measured LDR*FDR product = failures_i / T. FFR = sum over flip-flops.
"""

import csv
import json
import logging
import math
import multiprocessing
import os
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np
import pandas as pd

from src.helpers.constants import DEFAULT_FIT, MAX_CONE_INPUTS
from src.helpers.enums import GateKind, Outcome
from src.helpers.errors import (
    CampaignError,
    ConeTooLargeError,
    DataError,
    DimensionError,
    InjectionError,
    StimulusError,
)
from src.netlist_core import Netlist, output_cell_name

logger = logging.getLogger(__name__)

WORD_BITS = 64
ALL_ONES = np.uint64(0xFFFFFFFFFFFFFFFF)
ZERO = np.uint64(0)
MIN_CHUNK_WORDS = 16


@dataclass(frozen=True, eq=False)
class Stimulus:
    inputs: Tuple[str, ...]
    vectors: np.ndarray  # (T, len(inputs)) of 0/1
    initial_state: Dict[str, int] = field(default_factory=dict)
    observe: Optional[Tuple[str, ...]] = None

    @property
    def cycles(self) -> int:
        return int(self.vectors.shape[0])

    def to_json_dict(self) -> dict:
        data = {
            "inputs": list(self.inputs),
            "vectors": ["".join(str(int(bit)) for bit in row) for row in self.vectors],
            "initial_state": {name: int(bit) for name, bit in self.initial_state.items()},
        }
        if self.observe is not None:
            data["observe"] = list(self.observe)
        return data


def stimulus_from_json_dict(data: dict) -> Stimulus:
    try:
        inputs = tuple(str(name) for name in data["inputs"])
        rows = [str(row) for row in data["vectors"]]
    except (KeyError, TypeError) as err:
        raise StimulusError(f"stimulus needs 'inputs' and 'vectors': {err}") from err
    if not rows:
        raise StimulusError("stimulus has no cycles")
    for t, row in enumerate(rows):
        if len(row) != len(inputs):
            raise StimulusError(f"vector {t} has {len(row)} bits for {len(inputs)} inputs")
        if set(row) - {"0", "1"}:
            raise StimulusError(f"vector {t} is not a bit-string: {row!r}")
    vectors = np.array([[int(ch) for ch in row] for row in rows], dtype=np.uint8).reshape(len(rows), len(inputs))
    try:
        initial_state = {str(k): int(v) for k, v in dict(data.get("initial_state", {})).items()}
    except (TypeError, ValueError) as err:
        raise StimulusError(f"initial_state must map flip-flop names to 0 or 1: {err}") from err
    observe = data.get("observe")
    return Stimulus(inputs, vectors, initial_state, tuple(observe) if observe is not None else None)


def load_stimulus(path: str) -> Stimulus:
    try:
        with open(path, mode="r", encoding="utf-8") as stimulus_buffer:
            data = json.load(stimulus_buffer)
    except OSError as err:
        raise DataError(f"cannot read stimulus {path}: {err.strerror}") from err
    except json.JSONDecodeError as err:
        raise StimulusError(f"{path} is not valid JSON: {err}") from err
    return stimulus_from_json_dict(data)


def save_stimulus(stimulus: Stimulus, path: str):
    with open(path, mode="w", encoding="utf-8", newline="\n") as stimulus_buffer:
        json.dump(stimulus.to_json_dict(), stimulus_buffer, indent=2)
        stimulus_buffer.write("\n")
    logger.info(f"Results written to {path}")


def random_stimulus(netlist: Netlist, cycles: int, seed: int) -> Stimulus:
    if cycles < 1:
        raise StimulusError("a stimulus needs at least one cycle")
    rng = np.random.default_rng(seed)
    vectors = rng.integers(0, 2, size=(cycles, len(netlist.primary_inputs)), dtype=np.uint8)
    return Stimulus(netlist.primary_inputs, vectors, {name: 0 for name in netlist.flip_flops})


@dataclass(frozen=True)
class BoundStimulus:
    """Stimulus aligned to the netlist: PI columns in declaration order."""

    pi_values: np.ndarray  # (T, n_pi) uint8
    initial_state: np.ndarray  # (n_ff,) uint8, netlist.flip_flops order
    observed: Tuple[str, ...]

    @property
    def cycles(self) -> int:
        return int(self.pi_values.shape[0])


def bind_stimulus(netlist: Netlist, stimulus: Stimulus) -> BoundStimulus:
    if stimulus.cycles < 1:
        raise StimulusError("a stimulus needs at least one cycle")
    if stimulus.vectors.ndim != 2 or stimulus.vectors.shape[1] != len(stimulus.inputs):
        raise StimulusError("stimulus vectors do not match its input list")
    if sorted(stimulus.inputs) != sorted(netlist.primary_inputs) or len(set(stimulus.inputs)) != len(stimulus.inputs):
        raise StimulusError(
            f"stimulus drives {len(stimulus.inputs)} inputs, netlist has {len(netlist.primary_inputs)} "
            f"({sorted(set(stimulus.inputs) ^ set(netlist.primary_inputs))[:5]} differ)"
        )
    column = {name: i for i, name in enumerate(stimulus.inputs)}
    order = [column[name] for name in netlist.primary_inputs]
    pi_values = np.ascontiguousarray(stimulus.vectors[:, order], dtype=np.uint8)

    unknown = set(stimulus.initial_state) - set(netlist.flip_flops)
    if unknown:
        raise StimulusError(f"initial_state names non-flip-flops: {sorted(unknown)}")
    if any(bit not in (0, 1) for bit in stimulus.initial_state.values()):
        raise StimulusError("initial_state bits must be 0 or 1")
    initial = np.array([stimulus.initial_state.get(name, 0) for name in netlist.flip_flops], dtype=np.uint8)

    observed = netlist.primary_outputs if stimulus.observe is None else stimulus.observe
    missing = set(observed) - set(netlist.primary_outputs)
    if missing:
        raise StimulusError(f"observe lists unknown primary outputs: {sorted(missing)}")
    return BoundStimulus(pi_values, initial, tuple(observed))


@dataclass(frozen=True, eq=False)
class GoldenTrace:
    outputs: Tuple[str, ...]
    values: np.ndarray  # (T, len(outputs)) uint8

    @property
    def cycles(self) -> int:
        return int(self.values.shape[0])

    @property
    def width(self) -> int:
        return int(self.values.shape[1])


@dataclass(frozen=True)
class InjectionSpec:
    ff: int  # node id of a DFF cell
    cycle: int


@dataclass(frozen=True)
class DeratingFactors:
    tdr: float
    ldr: float
    fdr: float

    def __post_init__(self):
        for name in ("tdr", "ldr", "fdr"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise DataError(f"{name} = {value} is not a probability")

    @property
    def product(self) -> float:
        return self.tdr * self.ldr * self.fdr


@dataclass(frozen=True)
class FlipFlopResult:
    name: str
    node_id: int
    failure_count: int
    injection_count: int
    fit: float
    derating: DeratingFactors
    ffr: float


@dataclass(frozen=True)
class CampaignResult:
    rows: Tuple[FlipFlopResult, ...]
    cycles: int

    @property
    def aggregate(self) -> float:
        return aggregate_ffr(self)

    def by_name(self) -> Dict[str, FlipFlopResult]:
        return {row.name: row for row in self.rows}


def evaluation_order(netlist: Netlist) -> List[int]:
    """Indices of the non-source cells in a combinational topological order."""
    comb = nx.DiGraph()
    comb.add_nodes_from(range(len(netlist.cells)))
    index = netlist.index
    for reader, cell in enumerate(netlist.cells):
        for driver in cell.fanin:
            if netlist.cells[index[driver]].kind is not GateKind.DFF:
                comb.add_edge(index[driver], reader)
    return [i for i in nx.topological_sort(comb) if not netlist.cells[i].kind.is_source]


# ---------------------------------------------------------------------------
# scalar reference simulator


def _scalar_gate(kind: GateKind, bits: List[int]) -> int:
    if kind is GateKind.AND:
        return int(all(bits))
    if kind is GateKind.NAND:
        return int(not all(bits))
    if kind is GateKind.OR:
        return int(any(bits))
    if kind is GateKind.NOR:
        return int(not any(bits))
    if kind is GateKind.XOR:
        return sum(bits) % 2
    if kind is GateKind.XNOR:
        return 1 - sum(bits) % 2
    if kind is GateKind.NOT:
        return 1 - bits[0]
    return bits[0]  # BUF, OUTPUT


def _scalar_run(netlist: Netlist, bound: BoundStimulus, injection: Optional[InjectionSpec]) -> GoldenTrace:
    order = [netlist.cells[i] for i in evaluation_order(netlist)]
    flip_flops = [netlist.cell(name) for name in netlist.flip_flops]
    state = {ff.name: int(bit) for ff, bit in zip(flip_flops, bound.initial_state)}
    sampled = [output_cell_name(net) for net in bound.observed]
    flipped = netlist.cells[injection.ff].name if injection is not None else None

    rows = []
    for t in range(bound.cycles):
        if flipped is not None and t == injection.cycle:
            state[flipped] ^= 1
        values = dict(zip(netlist.primary_inputs, (int(bit) for bit in bound.pi_values[t])))
        values.update(state)
        for cell in order:
            values[cell.name] = _scalar_gate(cell.kind, [values[name] for name in cell.fanin])
        rows.append([values[name] for name in sampled])
        state = {ff.name: values[ff.fanin[0]] for ff in flip_flops}
    return GoldenTrace(bound.observed, np.array(rows, dtype=np.uint8).reshape(bound.cycles, len(sampled)))


def simulate_golden(netlist: Netlist, stimulus: Stimulus) -> GoldenTrace:
    return _scalar_run(netlist, bind_stimulus(netlist, stimulus), None)


def _check_injection(netlist: Netlist, injection: InjectionSpec, cycles: int):
    if not 0 <= injection.ff < len(netlist.cells) or netlist.cells[injection.ff].kind is not GateKind.DFF:
        raise InjectionError(f"node {injection.ff} is not a flip-flop")
    if not 0 <= injection.cycle < cycles:
        raise InjectionError(f"cycle {injection.cycle} is outside [0, {cycles})")


def simulate_with_seu(netlist: Netlist, stimulus: Stimulus, injection: InjectionSpec) -> GoldenTrace:
    bound = bind_stimulus(netlist, stimulus)
    _check_injection(netlist, injection, bound.cycles)
    return _scalar_run(netlist, bound, injection)


def classify_outcome(golden: GoldenTrace, faulty: GoldenTrace) -> Outcome:
    if golden.values.shape != faulty.values.shape:
        raise DimensionError(f"trace shapes differ: {golden.values.shape} vs {faulty.values.shape}")
    return Outcome.failure if np.any(golden.values != faulty.values) else Outcome.masked


# ---------------------------------------------------------------------------
# bit-parallel engine


class GateOp(NamedTuple):
    reducer: Optional[np.ufunc]  # None for single-input cells
    invert: bool
    out: int
    ins: Tuple[int, ...]


_REDUCERS = {
    GateKind.AND: (np.bitwise_and, False),
    GateKind.NAND: (np.bitwise_and, True),
    GateKind.OR: (np.bitwise_or, False),
    GateKind.NOR: (np.bitwise_or, True),
    GateKind.XOR: (np.bitwise_xor, False),
    GateKind.XNOR: (np.bitwise_xor, True),
    GateKind.NOT: (None, True),
    GateKind.BUF: (None, False),
    GateKind.OUTPUT: (None, False),
}


@dataclass(frozen=True, eq=False)
class CompiledCircuit:
    num_cells: int
    ops: Tuple[GateOp, ...]
    pi_rows: np.ndarray
    dff_rows: np.ndarray
    dff_data_rows: np.ndarray
    po_rows: np.ndarray


def compile_circuit(netlist: Netlist, observed: Sequence[str]) -> CompiledCircuit:
    index = netlist.index
    ops = []
    for i in evaluation_order(netlist):
        cell = netlist.cells[i]
        reducer, invert = _REDUCERS[cell.kind]
        ops.append(GateOp(reducer, invert, i, tuple(index[name] for name in cell.fanin)))
    as_rows = lambda names: np.array([index[name] for name in names], dtype=np.int64)
    return CompiledCircuit(
        num_cells=len(netlist.cells),
        ops=tuple(ops),
        pi_rows=as_rows(netlist.primary_inputs),
        dff_rows=as_rows(netlist.flip_flops),
        dff_data_rows=as_rows([netlist.cell(name).fanin[0] for name in netlist.flip_flops]),
        po_rows=as_rows([output_cell_name(net) for net in observed]),
    )


def _evaluate(ops: Sequence[GateOp], values: np.ndarray):
    for reducer, invert, out, ins in ops:
        target = values[out]
        if reducer is None:
            np.copyto(target, values[ins[0]])
        else:
            reducer(values[ins[0]], values[ins[1]], out=target)
            for extra in ins[2:]:
                reducer(target, values[extra], out=target)
        if invert:
            np.invert(target, out=target)


def _broadcast_bits(bits: np.ndarray) -> np.ndarray:
    return np.where(bits.astype(bool), ALL_ONES, ZERO)[:, None]


def _packed_golden(circuit: CompiledCircuit, bound: BoundStimulus) -> np.ndarray:
    values = np.zeros((circuit.num_cells, 1), dtype=np.uint64)
    state = _broadcast_bits(bound.initial_state)
    outputs = np.zeros((bound.cycles, len(circuit.po_rows)), dtype=np.uint8)
    for t in range(bound.cycles):
        values[circuit.pi_rows] = _broadcast_bits(bound.pi_values[t])
        values[circuit.dff_rows] = state
        _evaluate(circuit.ops, values)
        outputs[t] = values[circuit.po_rows, 0] & np.uint64(1)
        state = values[circuit.dff_data_rows]
    return outputs


def _unpack_machines(words: np.ndarray, count: int) -> np.ndarray:
    return np.unpackbits(words.astype("<u8").view(np.uint8), bitorder="little")[:count].astype(bool)


def _campaign_chunk(task) -> np.ndarray:
    """Simulate one chunk of faulty machines; returns the per-machine failure flags."""
    circuit, bound, golden, ff_pos, cycles = task
    machines = len(ff_pos)
    words = -(-machines // WORD_BITS)
    machine = np.arange(machines, dtype=np.int64)
    word = machine // WORD_BITS
    bit = np.left_shift(np.uint64(1), (machine % WORD_BITS).astype(np.uint64))

    order = np.argsort(cycles, kind="stable")
    starts = np.searchsorted(cycles[order], np.arange(bound.cycles + 1))

    values = np.zeros((circuit.num_cells, words), dtype=np.uint64)
    state = np.repeat(_broadcast_bits(bound.initial_state), words, axis=1)
    failed = np.zeros(words, dtype=np.uint64)
    for t in range(bound.cycles):
        hit = order[starts[t]:starts[t + 1]]
        if len(hit):
            np.bitwise_xor.at(state, (ff_pos[hit], word[hit]), bit[hit])
        values[circuit.pi_rows] = _broadcast_bits(bound.pi_values[t])
        values[circuit.dff_rows] = state
        _evaluate(circuit.ops, values)
        if len(circuit.po_rows):
            diff = values[circuit.po_rows] ^ _broadcast_bits(golden[t])
            failed |= np.bitwise_or.reduce(diff, axis=0)
        state = values[circuit.dff_data_rows]
    return _unpack_machines(failed, machines)


def enumerate_injections(netlist: Netlist, stimulus: Stimulus) -> List[InjectionSpec]:
    """The exhaustive FF x [0, T) injection set, flip-flop major."""
    index = netlist.index
    return [
        InjectionSpec(index[name], cycle) for name in netlist.flip_flops for cycle in range(stimulus.cycles)
    ]


def _resolve_fit(netlist: Netlist, fit: Union[None, float, Mapping[str, float]]) -> Dict[str, float]:
    if fit is None or isinstance(fit, (int, float)):
        rate = DEFAULT_FIT if fit is None else float(fit)
        rates = {name: rate for name in netlist.flip_flops}
    else:
        unknown = set(fit) - set(netlist.flip_flops)
        if unknown:
            raise CampaignError(f"FIT rates given for non-flip-flops: {sorted(unknown)}")
        rates = {name: float(fit.get(name, DEFAULT_FIT)) for name in netlist.flip_flops}
    for name, rate in rates.items():
        if not math.isfinite(rate) or rate < 0:
            raise CampaignError(f"FIT rate of {name} must be a non-negative number, got {rate}")
    return rates


def _chunk_bounds(machines: int, jobs: int) -> List[Tuple[int, int]]:
    chunk_words = max(MIN_CHUNK_WORDS, -(-machines // (WORD_BITS * max(1, jobs) * 4)))
    step = chunk_words * WORD_BITS
    return [(start, min(start + step, machines)) for start in range(0, machines, step)]


def run_campaign(
    netlist: Netlist,
    stimulus: Stimulus,
    fit: Union[None, float, Mapping[str, float]] = None,
    injections: Optional[Sequence[InjectionSpec]] = None,
    jobs: Optional[int] = 1,
) -> CampaignResult:
    """
    Inject one SEU per (flip-flop, cycle) pair and count, per flip-flop, the
    runs whose observed outputs differ from the golden run at any cycle.

    `injections` may reorder the exhaustive set; it must cover it exactly.
    `jobs` > 1 simulates machine chunks in a process pool; None uses every CPU.
    """
    if not netlist.flip_flops:
        raise CampaignError("circuit has no flip-flops to inject")
    bound = bind_stimulus(netlist, stimulus)
    rates = _resolve_fit(netlist, fit)
    full = enumerate_injections(netlist, stimulus)
    if injections is None:
        injections = full
    elif len(injections) != len(full) or set(injections) != set(full):
        raise CampaignError("injection list is not a permutation of the exhaustive FF x cycle set")

    circuit = compile_circuit(netlist, bound.observed)
    golden = _packed_golden(circuit, bound)
    ff_position = {netlist.index[name]: i for i, name in enumerate(netlist.flip_flops)}
    ff_pos = np.array([ff_position[inj.ff] for inj in injections], dtype=np.int64)
    cycles = np.array([inj.cycle for inj in injections], dtype=np.int64)

    jobs = (os.cpu_count() or 1) if jobs is None else max(1, jobs)
    bounds = _chunk_bounds(len(injections), jobs)
    tasks = [(circuit, bound, golden, ff_pos[a:b], cycles[a:b]) for a, b in bounds]
    logger.info(
        f"Simulating {len(injections)} injections ({len(netlist.flip_flops)} flip-flops x {bound.cycles} cycles) "
        f"in {len(tasks)} chunks on {min(jobs, len(tasks))} workers"
    )
    if jobs > 1 and len(tasks) > 1:
        with multiprocessing.Pool(processes=min(jobs, len(tasks))) as pool:
            parts = pool.map(_campaign_chunk, tasks)
    else:
        parts = [_campaign_chunk(task) for task in tasks]
    failed = np.concatenate(parts) if parts else np.zeros(0, dtype=bool)

    counts = np.bincount(ff_pos[failed], minlength=len(netlist.flip_flops))
    rows = []
    for i, name in enumerate(netlist.flip_flops):
        failures = int(counts[i])
        derating = DeratingFactors(tdr=1.0, ldr=1.0, fdr=failures / bound.cycles)
        rows.append(
            FlipFlopResult(
                name=name,
                node_id=netlist.index[name],
                failure_count=failures,
                injection_count=bound.cycles,
                fit=rates[name],
                derating=derating,
                ffr=rates[name] * derating.product,
            )
        )
    return CampaignResult(tuple(rows), bound.cycles)


def aggregate_ffr(result: CampaignResult) -> float:
    return math.fsum(row.ffr for row in result.rows)


# ---------------------------------------------------------------------------
# logical derating oracle


def _enumeration_words(bit: int, words: int) -> np.ndarray:
    machine = np.arange(words * WORD_BITS, dtype=np.uint64)
    pattern = ((machine >> np.uint64(bit)) & np.uint64(1)).astype(np.uint8)
    return np.packbits(pattern, bitorder="little").view("<u8").astype(np.uint64)


def logical_derating_bruteforce(
    netlist: Netlist,
    ff: int,
    observe: Optional[Sequence[str]] = None,
    max_inputs: int = MAX_CONE_INPUTS,
) -> float:
    """
    Fraction of assignments to the other inputs of ff's output cone for
    which inverting ff changes at least one primary output within a single
    combinational evaluation. Exact, by enumerating every assignment.
    """
    if not 0 <= ff < len(netlist.cells) or netlist.cells[ff].kind is not GateKind.DFF:
        raise InjectionError(f"node {ff} is not a flip-flop")
    observed = tuple(netlist.primary_outputs if observe is None else observe)
    circuit = compile_circuit(netlist, observed)
    index = netlist.index
    readers: List[List[int]] = [[] for _ in netlist.cells]
    for reader, cell in enumerate(netlist.cells):
        for driver in cell.fanin:
            readers[index[driver]].append(reader)

    forward, stack = set(), [ff]
    while stack:
        for reader in readers[stack.pop()]:
            if reader not in forward and netlist.cells[reader].kind is not GateKind.DFF:
                forward.add(reader)
                stack.append(reader)
    reached = [row for row in circuit.po_rows.tolist() if row in forward]
    if not reached:
        return 0.0

    cone, support, stack = set(), set(), list(reached)
    while stack:
        row = stack.pop()
        if netlist.cells[row].kind.is_source:
            support.add(row)
        elif row not in cone:
            cone.add(row)
            stack.extend(index[name] for name in netlist.cells[row].fanin)
    support.discard(ff)
    if len(support) > max_inputs:
        raise ConeTooLargeError(netlist.cells[ff].name, len(support), max_inputs)

    assignments = 1 << len(support)
    words = -(-assignments // WORD_BITS)
    values = np.zeros((circuit.num_cells, words), dtype=np.uint64)
    for bit, row in enumerate(sorted(support)):
        values[row] = _enumeration_words(bit, words)
    ops = [op for op in circuit.ops if op.out in cone]

    values[ff] = ZERO
    _evaluate(ops, values)
    low = values[reached].copy()
    values[ff] = ALL_ONES
    _evaluate(ops, values)
    diff = np.bitwise_or.reduce(low ^ values[reached], axis=0)
    propagated = int(_unpack_machines(diff, assignments).sum())
    return propagated / assignments


# ---------------------------------------------------------------------------
# campaign files

CAMPAIGN_HEADER = ["ff_name", "failure_count", "cycles", "fit", "ffr"]


def write_campaign_csv(result: CampaignResult, path: str):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(CAMPAIGN_HEADER)
        for row in result.rows:
            w.writerow([row.name, row.failure_count, row.injection_count, repr(row.fit), repr(row.ffr)])
        w.writerow(["TOTAL", sum(row.failure_count for row in result.rows), result.cycles, "", repr(result.aggregate)])
    logger.info(f"Results written to {path}")


def read_campaign_csv(path: str) -> pd.DataFrame:
    """Per-flip-flop rows of a campaign file (the TOTAL row is dropped)."""
    try:
        # only the TOTAL row's fit cell is blank; flip-flops may be named NA or null
        frame = pd.read_csv(
            path,
            dtype={"ff_name": str},
            keep_default_na=False,
            na_values={"fit": [""]},
            float_precision="round_trip",
        )
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as err:
        raise DataError(f"cannot read campaign file {path}: {err}") from err
    if list(frame.columns) != CAMPAIGN_HEADER:
        raise DataError(f"{path} does not have the campaign columns {CAMPAIGN_HEADER}")
    if len(frame) and frame["ff_name"].iloc[-1] == "TOTAL":
        frame = frame.iloc[:-1]
    return frame.reset_index(drop=True)


def logical_derating_table(netlist: Netlist, observe: Optional[Sequence[str]] = None) -> List[Tuple[str, Optional[float]]]:
    """(ff name, LDR) per flip-flop; None where the cone exceeds the enumeration bound."""
    table = []
    for name in netlist.flip_flops:
        try:
            table.append((name, logical_derating_bruteforce(netlist, netlist.index[name], observe)))
        except ConeTooLargeError as err:
            logger.warning(str(err))
            table.append((name, None))
    return table
