"""
Netlist model, circuit graph and structural node features.

A `.bench` netlist is parsed into a `Netlist` (ordered cells), turned into a
directed `CircuitGraph` whose edges run driver -> reader, and summarised per
node by a `FeatureMatrix`: one-hot gate kind, in/out degree, normalised
topological level and a sequential flag.

OUTPUT statements become cells of their own, named `OUTPUT(<net>)`, reading
the declared net.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Sequence, Tuple, Union

import networkx as nx
import numpy as np
import pandas as pd

from src.helpers.bench_parser import BenchStatement, parse_bench_statements
from src.helpers.enums import GATE_KIND_ALIASES, SINGLE_INPUT_KINDS, GateKind
from src.helpers.errors import DataError, GmlError, NetlistParseError, ParseErrorKind

logger = logging.getLogger(__name__)

FEATURE_COLUMNS: Tuple[str, ...] = tuple(f"is_{kind.value.lower()}" for kind in GateKind) + (
    "in_degree",
    "out_degree",
    "topo_level",
    "is_sequential",
)


def output_cell_name(net: str) -> str:
    return f"OUTPUT({net})"


@dataclass(frozen=True)
class Cell:
    name: str
    kind: GateKind
    fanin: Tuple[str, ...] = ()


@dataclass(frozen=True)
class Netlist:
    cells: Tuple[Cell, ...]
    primary_inputs: Tuple[str, ...]
    primary_outputs: Tuple[str, ...]

    @cached_property
    def index(self) -> Dict[str, int]:
        return {cell.name: i for i, cell in enumerate(self.cells)}

    def cell(self, name: str) -> Cell:
        return self.cells[self.index[name]]

    @cached_property
    def flip_flops(self) -> Tuple[str, ...]:
        return tuple(cell.name for cell in self.cells if cell.kind is GateKind.DFF)

    @cached_property
    def output_cells(self) -> Tuple[str, ...]:
        return tuple(output_cell_name(net) for net in self.primary_outputs)

    def __len__(self):
        return len(self.cells)


def _declare(seen: Dict[str, BenchStatement], name: str, statement: BenchStatement):
    if name in seen:
        first = seen[name]
        raise NetlistParseError(
            ParseErrorKind.duplicate_name,
            f"{name!r} already declared on line {first.line}",
            statement.line,
            statement.target_column,
        )
    seen[name] = statement


def _gate_cell(statement: BenchStatement) -> Cell:
    kind = GATE_KIND_ALIASES.get(statement.keyword.upper())
    if kind is None:
        raise NetlistParseError(
            ParseErrorKind.unknown_kind, repr(statement.keyword), statement.line, statement.keyword_column
        )
    arity = len(statement.args)
    if kind in SINGLE_INPUT_KINDS and arity != 1:
        raise NetlistParseError(
            ParseErrorKind.arity,
            f"{kind.value} takes exactly 1 fan-in, got {arity}",
            statement.line,
            statement.keyword_column,
        )
    if kind not in SINGLE_INPUT_KINDS and arity < 2:
        raise NetlistParseError(
            ParseErrorKind.arity,
            f"{kind.value} takes at least 2 fan-ins, got {arity}",
            statement.line,
            statement.keyword_column,
        )
    seen_args = set()
    for arg, column in zip(statement.args, statement.arg_columns):
        if arg in seen_args:
            raise NetlistParseError(ParseErrorKind.repeated_fanin, repr(arg), statement.line, column)
        seen_args.add(arg)
    return Cell(statement.target, kind, statement.args)


def _check_combinational_cycles(cells: List[Cell], origin: Dict[str, BenchStatement]):
    kinds = {cell.name: cell.kind for cell in cells}
    comb = nx.DiGraph()
    comb.add_nodes_from(kinds)
    for cell in cells:
        for driver in cell.fanin:
            # edges leaving a flip-flop's stored value are sequential
            if driver in kinds and kinds[driver] is not GateKind.DFF:
                comb.add_edge(driver, cell.name)
    try:
        cycle = nx.find_cycle(comb)
    except nx.NetworkXNoCycle:
        return
    members = [u for u, _ in cycle]
    order = {cell.name: i for i, cell in enumerate(cells)}
    first = min(members, key=order.__getitem__)
    statement = origin[first]
    path = " -> ".join(members + [members[0]])
    raise NetlistParseError(
        ParseErrorKind.combinational_cycle, path, statement.line, statement.target_column
    )


def parse_bench(text: Union[str, bytes]) -> Netlist:
    """
    Parse `.bench` text into a validated Netlist.

    Every malformed input raises NetlistParseError with its line and column.
    Line-local problems are reported in file order, then combinational
    cycles, then references to undeclared cells.
    """
    if isinstance(text, (bytes, bytearray)):
        text = bytes(text).decode("utf-8", errors="replace")
    statements = parse_bench_statements(text)

    cells: List[Cell] = []
    origin: Dict[str, BenchStatement] = {}
    primary_inputs, primary_outputs = [], []
    for statement in statements:
        if statement.is_declaration and statement.keyword == "INPUT":
            _declare(origin, statement.target, statement)
            cells.append(Cell(statement.target, GateKind.INPUT))
            primary_inputs.append(statement.target)
        elif statement.is_declaration:
            name = output_cell_name(statement.target)
            _declare(origin, name, statement)
            cells.append(Cell(name, GateKind.OUTPUT, (statement.target,)))
            primary_outputs.append(statement.target)
        else:
            cell = _gate_cell(statement)
            _declare(origin, cell.name, statement)
            cells.append(cell)

    _check_combinational_cycles(cells, origin)

    for cell in cells:
        statement = origin[cell.name]
        columns = statement.arg_columns if statement.arg_columns else (statement.target_column,)
        for driver, column in zip(cell.fanin, columns):
            if driver not in origin:
                raise NetlistParseError(
                    ParseErrorKind.unresolved_fanin, f"{driver!r} is never declared", statement.line, column
                )

    return Netlist(tuple(cells), tuple(primary_inputs), tuple(primary_outputs))


def read_bench(path: str) -> Netlist:
    try:
        with open(path, mode="rb") as bench_buffer:
            raw = bench_buffer.read()
    except OSError as err:
        raise DataError(f"cannot read netlist {path}: {err.strerror}") from err
    netlist = parse_bench(raw)
    logger.info(f"Parsed {len(netlist)} cells ({len(netlist.flip_flops)} flip-flops) from {path}")
    return netlist


def _csr(num_nodes: int, lists: Sequence[Sequence[int]]) -> Tuple[np.ndarray, np.ndarray]:
    offsets = np.zeros(num_nodes + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([len(items) for items in lists])
    flat = np.fromiter((v for items in lists for v in items), dtype=np.int64, count=int(offsets[-1]))
    return offsets, flat


@dataclass(frozen=True)
class CircuitGraph:
    """
    Directed graph G = (nodes, edges) over the cells of a netlist.
    Node ids are positions in `names`; edges are (driver, reader) pairs.
    """

    names: Tuple[str, ...]
    kinds: Tuple[GateKind, ...]
    edges: Tuple[Tuple[int, int], ...] = field(default=())

    def __post_init__(self):
        if len(self.names) != len(self.kinds):
            raise DataError("node names and kinds differ in length")
        n = len(self.names)
        for u, v in self.edges:
            if not (0 <= u < n and 0 <= v < n):
                raise DataError(f"edge ({u}, {v}) leaves the node range 0..{n - 1}")

    @property
    def num_nodes(self) -> int:
        return len(self.names)

    @property
    def nodes(self) -> Tuple[Tuple[str, GateKind], ...]:
        return tuple(zip(self.names, self.kinds))

    @cached_property
    def node_index(self) -> Dict[str, int]:
        return {name: i for i, name in enumerate(self.names)}

    @cached_property
    def fanin(self) -> Tuple[Tuple[int, ...], ...]:
        lists = [[] for _ in self.names]
        for u, v in self.edges:
            lists[v].append(u)
        return tuple(tuple(items) for items in lists)

    @cached_property
    def fanout(self) -> Tuple[Tuple[int, ...], ...]:
        lists = [[] for _ in self.names]
        for u, v in self.edges:
            lists[u].append(v)
        return tuple(tuple(items) for items in lists)

    @cached_property
    def _undirected_csr(self) -> Tuple[np.ndarray, np.ndarray]:
        lists = [sorted(set(ins) | set(outs)) for ins, outs in zip(self.fanin, self.fanout)]
        return _csr(self.num_nodes, lists)

    @cached_property
    def _fanin_csr(self) -> Tuple[np.ndarray, np.ndarray]:
        return _csr(self.num_nodes, [sorted(set(ins)) for ins in self.fanin])

    def neighbor_csr(self, direction: str = "undirected") -> Tuple[np.ndarray, np.ndarray]:
        """(offsets, flat) arrays; neighbours of v are flat[offsets[v]:offsets[v + 1]]."""
        if direction == "undirected":
            return self._undirected_csr
        if direction == "fanin":
            return self._fanin_csr
        raise DataError(f"unknown neighbourhood direction {direction!r}")

    def to_networkx(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from((name, {"kind": kind.value}) for name, kind in self.nodes)
        graph.add_edges_from((self.names[u], self.names[v]) for u, v in self.edges)
        return graph


def build_graph(netlist: Netlist) -> CircuitGraph:
    index = netlist.index
    edges = tuple(
        (index[driver], reader) for reader, cell in enumerate(netlist.cells) for driver in cell.fanin
    )
    return CircuitGraph(
        tuple(cell.name for cell in netlist.cells), tuple(cell.kind for cell in netlist.cells), edges
    )


@dataclass(frozen=True)
class FeatureMatrix:
    names: Tuple[str, ...]
    values: np.ndarray
    columns: Tuple[str, ...] = FEATURE_COLUMNS

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.values, columns=list(self.columns))
        frame.insert(0, "node_name", list(self.names))
        return frame


def topological_levels(graph: CircuitGraph) -> np.ndarray:
    """
    Longest combinational distance of every node from a primary input or a
    flip-flop output. Flip-flops themselves sit at level 0.
    """
    comb = nx.DiGraph()
    comb.add_nodes_from(range(graph.num_nodes))
    comb.add_edges_from((u, v) for u, v in graph.edges if graph.kinds[v] is not GateKind.DFF)
    levels = np.zeros(graph.num_nodes, dtype=np.int64)
    try:
        order = list(nx.topological_sort(comb))
    except nx.NetworkXUnfeasible as err:
        raise DataError("graph has a combinational cycle") from err
    for v in order:
        if graph.kinds[v].is_source or not graph.fanin[v]:
            continue
        levels[v] = 1 + max(levels[u] for u in graph.fanin[v])
    return levels


def node_features(graph: CircuitGraph) -> FeatureMatrix:
    n = graph.num_nodes
    kinds = list(GateKind)
    values = np.zeros((n, len(FEATURE_COLUMNS)), dtype=np.float64)
    if n == 0:
        return FeatureMatrix(graph.names, values)
    kind_column = {kind: i for i, kind in enumerate(kinds)}
    values[np.arange(n), [kind_column[kind] for kind in graph.kinds]] = 1.0

    base = len(kinds)
    values[:, base] = [len(items) for items in graph.fanin]
    values[:, base + 1] = [len(items) for items in graph.fanout]
    levels = topological_levels(graph)
    values[:, base + 2] = levels / max(1, int(levels.max()))
    values[:, base + 3] = [1.0 if kind.is_sequential else 0.0 for kind in graph.kinds]
    return FeatureMatrix(graph.names, values)


def write_features_csv(features: FeatureMatrix, path: str):
    features.to_frame().to_csv(path, index=False, lineterminator="\n")
    logger.info(f"Results written to {path}")


def export_gml(graph: CircuitGraph) -> str:
    return "\n".join(nx.generate_gml(graph.to_networkx())) + "\n"


def import_gml(text: str) -> CircuitGraph:
    try:
        parsed = nx.parse_gml(text, label="id")
    except (nx.NetworkXError, ValueError, KeyError, TypeError) as err:
        raise GmlError(f"malformed GML: {err}") from err
    if not parsed.is_directed():
        raise GmlError("missing required key: graph must declare 'directed 1'")

    ids = list(parsed.nodes)
    if any(not isinstance(node_id, int) for node_id in ids):
        raise GmlError("node ids must be integers")
    ids.sort()
    position = {node_id: i for i, node_id in enumerate(ids)}

    names, kinds = [], []
    for node_id in ids:
        attrs = parsed.nodes[node_id]
        for key in ("label", "kind"):
            if key not in attrs:
                raise GmlError(f"missing required key: node {node_id} has no {key!r}")
        try:
            kinds.append(GateKind(str(attrs["kind"]).upper()))
        except ValueError as err:
            raise GmlError(f"node {node_id} has unknown kind {attrs['kind']!r}") from err
        names.append(str(attrs["label"]))
    if len(set(names)) != len(names):
        raise GmlError("node labels are not unique")

    edges = tuple((position[u], position[v]) for u, v in parsed.edges)
    return CircuitGraph(tuple(names), tuple(kinds), edges)


def read_gml(path: str) -> CircuitGraph:
    try:
        with open(path, mode="r", encoding="utf-8") as gml_buffer:
            return import_gml(gml_buffer.read())
    except OSError as err:
        raise DataError(f"cannot read GML {path}: {err.strerror}") from err


def write_gml(graph: CircuitGraph, path: str):
    with open(path, mode="w", encoding="utf-8", newline="\n") as gml_buffer:
        gml_buffer.write(export_gml(graph))
    logger.info(f"Results written to {path}")
