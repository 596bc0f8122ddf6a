"""
Seeded generator of synthetic sequential `.bench` circuits.

Construction keeps three structural properties:
  * gates only read primary inputs, flip-flop outputs and earlier gates, so
    there is no combinational cycle;
  * the first fan-in of every gate is a primary input or an earlier gate, so
    every gate is reachable from a primary input;
  * every flip-flop output is read by a gate and every gate without a gate
    reader becomes a primary output, so every flip-flop is structurally
    observable.
"""

import logging
import math
from typing import List, Optional

import numpy as np

from src.helpers.enums import GateKind
from src.helpers.errors import ConfigError

logger = logging.getLogger(__name__)

TWO_INPUT_KINDS = (GateKind.AND, GateKind.NAND, GateKind.OR, GateKind.NOR, GateKind.XOR, GateKind.XNOR)
SINGLE_INPUT_KINDS = (GateKind.NOT, GateKind.BUF)
SINGLE_INPUT_PROBABILITY = 0.1


def default_input_count(n_ffs: int) -> int:
    return max(2, math.ceil(math.sqrt(n_ffs)))


def generate_circuit(n_ffs: int, n_gates: int, seed: int, n_inputs: Optional[int] = None) -> str:
    if n_ffs < 0 or n_gates < 1:
        raise ConfigError("gen needs --ffs >= 0 and --gates >= 1")
    if n_gates < n_ffs:
        raise ConfigError(f"{n_gates} gates cannot read all {n_ffs} flip-flop outputs")
    n_inputs = default_input_count(n_ffs) if n_inputs is None else n_inputs
    if n_inputs < 2:
        raise ConfigError("gen needs at least two primary inputs")

    rng = np.random.default_rng(seed)
    inputs = [f"pi{i}" for i in range(n_inputs)]
    flip_flops = [f"ff{i}" for i in range(n_ffs)]
    unread = [flip_flops[i] for i in rng.permutation(n_ffs)]
    reachable: List[str] = list(inputs)
    gate_lines, has_gate_reader, gates = [], set(), []

    for i in range(n_gates):
        name = f"g{i}"
        first = reachable[rng.integers(len(reachable))]
        if unread:
            kind = TWO_INPUT_KINDS[rng.integers(len(TWO_INPUT_KINDS))]
            fanin = [first, unread.pop()]
        elif rng.random() < SINGLE_INPUT_PROBABILITY:
            kind = SINGLE_INPUT_KINDS[rng.integers(len(SINGLE_INPUT_KINDS))]
            fanin = [first]
        else:
            kind = TWO_INPUT_KINDS[rng.integers(len(TWO_INPUT_KINDS))]
            sources = reachable + flip_flops
            second = first
            while second == first:
                second = sources[rng.integers(len(sources))]
            fanin = [first, second]
        has_gate_reader.update(driver for driver in fanin if driver.startswith("g"))
        gate_lines.append(f"{name} = {kind.value}({', '.join(fanin)})")
        gates.append(name)
        reachable.append(name)

    outputs = [name for name in gates if name not in has_gate_reader]
    lines = [f"# generated: {n_ffs} flip-flops, {n_gates} gates, {n_inputs} inputs, seed {seed}"]
    lines += [f"INPUT({name})" for name in inputs]
    lines += [f"OUTPUT({name})" for name in outputs]
    lines += [f"{ff} = DFF({gates[rng.integers(n_gates)]})" for ff in flip_flops]
    lines += gate_lines
    logger.info(f"Generated {n_ffs} flip-flops, {n_gates} gates, {n_inputs} inputs, {len(outputs)} outputs")
    return "\n".join(lines) + "\n"


def write_circuit(text: str, path: str):
    with open(path, mode="w", encoding="utf-8", newline="\n") as bench_buffer:
        bench_buffer.write(text)
    logger.info(f"Results written to {path}")
