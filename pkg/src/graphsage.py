"""
Inductive node embeddings with a max-pooling aggregator.

For every depth k = 1..K and every node v of the sampled tree:

    AGG_k(v) = max_{u in N_k(v)} relu(W_pool_k h_u^{k-1} + b_k)
    h_v^k    = l2_normalize(relu(W_k [h_v^{k-1} ; AGG_k(v)]))

h^0 are the structural node features. N_k(v) is a fixed-size uniform
sample (with replacement) of the neighbourhood; a node without neighbours
samples the zero sentinel (id -1), whose representation is zero at every
depth.

Trees are stored layer by layer as flat id arrays: the children of entry i
of layer l-1 are entries i*W_l .. (i+1)*W_l - 1 of layer l.
"""

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.helpers.constants import DEFAULT_SEED, FORMAT_VERSION
from src.helpers.errors import ConfigError, DataError, DimensionError, TrainingDivergenceError
from src.netlist_core import CircuitGraph, FeatureMatrix

logger = logging.getLogger(__name__)

SENTINEL = -1
DIRECTIONS = ("undirected", "fanin")
FORWARD_CHUNK = 256


@dataclass(frozen=True)
class SamplerConfig:
    depth: int = 2
    fanouts: Tuple[int, ...] = (10, 5)
    seed: int = DEFAULT_SEED
    direction: str = "undirected"
    full_neighborhood: bool = False

    def __post_init__(self):
        if isinstance(self.fanouts, (str, int)):
            raise ConfigError(f"sampler fanouts must be a list of integers, got {self.fanouts!r}")
        object.__setattr__(self, "fanouts", tuple(int(s) for s in self.fanouts))
        if self.depth < 1:
            raise ConfigError(f"sampler depth must be at least 1, got {self.depth}")
        if len(self.fanouts) != self.depth:
            raise ConfigError(f"{len(self.fanouts)} fanouts given for depth {self.depth}")
        if any(s < 1 for s in self.fanouts):
            raise ConfigError(f"fanouts must be positive, got {list(self.fanouts)}")
        if self.direction not in DIRECTIONS:
            raise ConfigError(f"direction must be one of {DIRECTIONS}, got {self.direction!r}")


@dataclass(frozen=True)
class EmbedTrainConfig:
    epochs: int = 5
    batches_per_epoch: int = 20
    batch_size: int = 64
    learning_rate: float = 0.01
    walk_length: int = 5
    walks_per_node: int = 10
    window: int = 2
    negatives: int = 5
    d_pool: int = 64
    d_emb: int = 64
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        for name in ("epochs", "batches_per_epoch", "batch_size", "walk_length", "walks_per_node",
                     "window", "negatives", "d_pool", "d_emb"):
            if getattr(self, name) < 1:
                raise ConfigError(f"embed_train.{name} must be positive")
        if not self.learning_rate > 0:
            raise ConfigError("embed_train.learning_rate must be positive")


@dataclass(frozen=True, eq=False)
class DepthParams:
    w_pool: np.ndarray  # (d_pool, d_in)
    b_pool: np.ndarray  # (d_pool,)
    w_combine: np.ndarray  # (d_out, d_in + d_pool)


@dataclass(frozen=True, eq=False)
class AggregatorParams:
    depths: Tuple[DepthParams, ...]

    def __post_init__(self):
        if not self.depths:
            raise DimensionError("aggregator needs at least one depth")
        d_in = self.depths[0].w_pool.shape[1]
        for k, p in enumerate(self.depths, start=1):
            d_pool = p.w_pool.shape[0]
            if p.w_pool.shape[1] != d_in or p.b_pool.shape != (d_pool,) or p.w_combine.shape[1] != d_in + d_pool:
                raise DimensionError(f"aggregator weights of depth {k} do not chain")
            if not all(np.all(np.isfinite(a)) for a in (p.w_pool, p.b_pool, p.w_combine)):
                raise DimensionError(f"aggregator weights of depth {k} are not finite")
            d_in = p.w_combine.shape[0]

    @property
    def depth(self) -> int:
        return len(self.depths)

    @property
    def d_in(self) -> int:
        return int(self.depths[0].w_pool.shape[1])

    @property
    def d_emb(self) -> int:
        return int(self.depths[-1].w_combine.shape[0])

    def arrays(self) -> List[np.ndarray]:
        return [a for p in self.depths for a in (p.w_pool, p.b_pool, p.w_combine)]

    def copy(self) -> "AggregatorParams":
        return AggregatorParams.from_arrays([a.copy() for a in self.arrays()])

    @staticmethod
    def from_arrays(arrays: Sequence[np.ndarray]) -> "AggregatorParams":
        return AggregatorParams(tuple(DepthParams(*arrays[i:i + 3]) for i in range(0, len(arrays), 3)))


def init_aggregator(d_in: int, depth: int, d_pool: int, d_emb: int, seed: int) -> AggregatorParams:
    """He-normal weights, zero pooling biases."""
    rng = np.random.default_rng(seed)
    depths = []
    for _ in range(depth):
        depths.append(
            DepthParams(
                w_pool=rng.normal(0.0, math.sqrt(2.0 / d_in), size=(d_pool, d_in)),
                b_pool=np.zeros(d_pool),
                w_combine=rng.normal(0.0, math.sqrt(2.0 / (d_in + d_pool)), size=(d_emb, d_in + d_pool)),
            )
        )
        d_in = d_emb
    return AggregatorParams(tuple(depths))


# ---------------------------------------------------------------------------
# sampling


@dataclass(frozen=True, eq=False)
class SampleTree:
    layers: Tuple[np.ndarray, ...]  # layers[0] are the targets
    widths: Tuple[int, ...]  # children per entry, one per depth


def _children(offsets: np.ndarray, flat: np.ndarray, parents: np.ndarray, pick: np.ndarray) -> np.ndarray:
    """Neighbour number `pick[i, j]` of parents[i]; sentinel where the parent has none."""
    valid = parents >= 0
    start = offsets[np.where(valid, parents, 0)]
    degree = np.where(valid, offsets[np.where(valid, parents, 0) + 1] - start, 0)
    ids = np.full(pick.shape, SENTINEL, dtype=np.int64)
    has = np.broadcast_to((degree > 0)[:, None], pick.shape)
    ids[has] = flat[(start[:, None] + pick)[has]]
    return ids


def _degrees(offsets: np.ndarray, parents: np.ndarray) -> np.ndarray:
    clipped = np.where(parents >= 0, parents, 0)
    return np.where(parents >= 0, offsets[clipped + 1] - offsets[clipped], 0)


def sample_neighborhood(graph: CircuitGraph, v: int, cfg: SamplerConfig, stream: int = 0) -> List[np.ndarray]:
    """
    Uniform with-replacement sample of the K-hop neighbourhood of v.
    The draws come from a generator seeded by (seed, stream, v), so the
    result depends only on those three numbers.
    """
    if not 0 <= v < graph.num_nodes:
        raise DataError(f"node {v} is not in the graph")
    offsets, flat = graph.neighbor_csr(cfg.direction)
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, stream, v]))
    layers = [np.array([v], dtype=np.int64)]
    for fanout in cfg.fanouts:
        parents = layers[-1]
        degree = _degrees(offsets, parents)
        pick = np.floor(rng.random((len(parents), fanout)) * degree[:, None]).astype(np.int64)
        layers.append(_children(offsets, flat, parents, pick).reshape(-1))
    return layers


def sample_tree(graph: CircuitGraph, nodes: Sequence[int], cfg: SamplerConfig, stream: int = 0) -> SampleTree:
    targets = np.asarray(nodes, dtype=np.int64)
    if cfg.full_neighborhood:
        # every neighbour; short rows are padded with their first neighbour, which leaves the max unchanged
        offsets, flat = graph.neighbor_csr(cfg.direction)
        layers, widths = [targets], []
        for _ in range(cfg.depth):
            parents = layers[-1]
            degree = _degrees(offsets, parents)
            width = max(1, int(degree.max(initial=0)))
            column = np.arange(width)[None, :]
            pick = np.where(column < degree[:, None], column, 0)
            layers.append(_children(offsets, flat, parents, pick).reshape(-1))
            widths.append(width)
        return SampleTree(tuple(layers), tuple(widths))

    per_node = [sample_neighborhood(graph, int(v), cfg, stream) for v in targets]
    layers = [targets] + [
        np.concatenate([sample[l] for sample in per_node]) if per_node else np.zeros(0, dtype=np.int64)
        for l in range(1, cfg.depth + 1)
    ]
    return SampleTree(tuple(layers), cfg.fanouts)


# ---------------------------------------------------------------------------
# forward / backward


def aggregate_pool(neighbor_vecs: np.ndarray, params: AggregatorParams, k: int) -> np.ndarray:
    if not 1 <= k <= params.depth:
        raise DimensionError(f"depth {k} outside 1..{params.depth}")
    p = params.depths[k - 1]
    vecs = np.asarray(neighbor_vecs, dtype=np.float64)
    if vecs.ndim != 2 or len(vecs) == 0 or vecs.shape[1] != p.w_pool.shape[1]:
        raise DimensionError(f"expected a non-empty list of {p.w_pool.shape[1]}-vectors, got shape {vecs.shape}")
    return np.maximum(vecs @ p.w_pool.T + p.b_pool, 0.0).max(axis=0)


@dataclass(eq=False)
class _Step:
    self_h: np.ndarray
    child_h: np.ndarray  # (n, width, d)
    pre_pool: np.ndarray  # (n, width, d_pool)
    argmax: np.ndarray  # (n, d_pool)
    concat: np.ndarray
    pre_combine: np.ndarray
    norm: np.ndarray
    out: np.ndarray
    valid: np.ndarray


@dataclass(eq=False)
class ForwardCache:
    steps: Dict[Tuple[int, int], _Step] = field(default_factory=dict)

    def activation_pattern(self) -> List[np.ndarray]:
        """ReLU masks and max-pool winners; equal patterns mean no kink lies between two points."""
        pattern = []
        for key in sorted(self.steps):
            step = self.steps[key]
            pattern.extend([step.pre_pool > 0, step.argmax, step.pre_combine > 0, step.norm > 0])
        return pattern


def _tree_forward(params: AggregatorParams, features: np.ndarray, tree: SampleTree) -> Tuple[np.ndarray, ForwardCache]:
    padded = np.vstack([features, np.zeros((1, features.shape[1]))])
    h = [padded[tree.layers[l]] for l in range(len(tree.layers))]
    cache = ForwardCache()
    for k, p in enumerate(params.depths, start=1):
        nxt = []
        for l in range(params.depth - k + 1):
            width = tree.widths[l]
            child = h[l + 1].reshape(len(h[l]), width, -1)
            pre_pool = child @ p.w_pool.T + p.b_pool
            pooled = np.maximum(pre_pool, 0.0)
            argmax = pooled.argmax(axis=1)
            concat = np.concatenate([h[l], pooled.max(axis=1)], axis=1)
            pre_combine = concat @ p.w_combine.T
            act = np.maximum(pre_combine, 0.0)
            norm = np.linalg.norm(act, axis=1)
            valid = (tree.layers[l] >= 0).astype(np.float64)[:, None]
            out = np.divide(act, norm[:, None], out=np.zeros_like(act), where=norm[:, None] > 0) * valid
            cache.steps[(k, l)] = _Step(h[l], child, pre_pool, argmax, concat, pre_combine, norm, out, valid)
            nxt.append(out)
        h = nxt
    return h[0], cache


def _tree_backward(params: AggregatorParams, cache: ForwardCache, grad_out: np.ndarray) -> AggregatorParams:
    grads = [np.zeros_like(a) for a in params.arrays()]
    upstream = {0: grad_out}
    for k in range(params.depth, 0, -1):
        p = params.depths[k - 1]
        gw_pool, gb_pool, gw_combine = grads[3 * (k - 1): 3 * k]
        below: Dict[int, np.ndarray] = {}
        for l in range(params.depth - k + 1):
            step = cache.steps[(k, l)]
            g = upstream[l] * step.valid
            safe = np.where(step.norm > 0, step.norm, 1.0)[:, None]
            g_act = (g - step.out * np.sum(g * step.out, axis=1, keepdims=True)) / safe
            g_pre = g_act * (step.pre_combine > 0)
            gw_combine += g_pre.T @ step.concat
            g_concat = g_pre @ p.w_combine
            d_self = step.self_h.shape[1]
            g_pooled = np.zeros_like(step.pre_pool)
            np.put_along_axis(g_pooled, step.argmax[:, None, :], g_concat[:, None, d_self:], axis=1)
            g_pre_pool = g_pooled * (step.pre_pool > 0)
            flat_pre = g_pre_pool.reshape(-1, g_pre_pool.shape[2])
            gw_pool += flat_pre.T @ step.child_h.reshape(-1, step.child_h.shape[2])
            gb_pool += flat_pre.sum(axis=0)
            if k > 1:
                below[l] = below.get(l, 0) + g_concat[:, :d_self]
                below[l + 1] = below.get(l + 1, 0) + (g_pre_pool @ p.w_pool).reshape(-1, d_self)
        upstream = below
    return AggregatorParams.from_arrays(grads)


def _check_features(graph: CircuitGraph, features: np.ndarray, params: AggregatorParams):
    if features.shape != (graph.num_nodes, params.d_in):
        raise DimensionError(
            f"feature matrix is {features.shape}, expected ({graph.num_nodes}, {params.d_in})"
        )


@dataclass(frozen=True, eq=False)
class EmbeddingMatrix:
    names: Tuple[str, ...]
    values: np.ndarray  # (len(names), d_emb)

    def as_dict(self) -> Dict[str, np.ndarray]:
        return dict(zip(self.names, self.values))

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.values, columns=[f"e{i}" for i in range(self.values.shape[1])])
        frame.insert(0, "node_name", list(self.names))
        return frame


def embed_forward(
    graph: CircuitGraph,
    features: FeatureMatrix,
    params: AggregatorParams,
    cfg: SamplerConfig,
    nodes: Optional[Sequence[int]] = None,
) -> EmbeddingMatrix:
    """One L2-normalised embedding row per requested node (every node by default)."""
    values = np.asarray(features.values, dtype=np.float64)
    _check_features(graph, values, params)
    if params.depth != cfg.depth:
        raise DimensionError(f"parameters have {params.depth} depths, sampler uses {cfg.depth}")
    nodes = list(range(graph.num_nodes)) if nodes is None else [int(v) for v in nodes]
    rows = []
    for start in range(0, len(nodes), FORWARD_CHUNK):
        tree = sample_tree(graph, nodes[start:start + FORWARD_CHUNK], cfg)
        rows.append(_tree_forward(params, values, tree)[0])
    out = np.vstack(rows) if rows else np.zeros((0, params.d_emb))
    return EmbeddingMatrix(tuple(graph.names[v] for v in nodes), out)


# ---------------------------------------------------------------------------
# unsupervised training


def random_walk_pairs(graph: CircuitGraph, cfg: SamplerConfig, train_cfg: EmbedTrainConfig) -> np.ndarray:
    """(v, u) co-occurrence pairs within `window` steps on uniform random walks."""
    offsets, flat = graph.neighbor_csr(cfg.direction)
    rng = np.random.default_rng(np.random.SeedSequence([train_cfg.seed, 1]))
    walk = np.repeat(np.arange(graph.num_nodes, dtype=np.int64), train_cfg.walks_per_node)
    walks = [walk]
    for _ in range(train_cfg.walk_length - 1):
        degree = offsets[walk + 1] - offsets[walk]
        pick = np.floor(rng.random(len(walk)) * degree).astype(np.int64)
        stay = degree == 0
        walk = np.where(stay, walk, flat[np.where(stay, 0, offsets[walk] + pick)] if len(flat) else walk)
        walks.append(walk)
    walks = np.stack(walks, axis=1)

    pairs = []
    for i in range(train_cfg.walk_length):
        for j in range(max(0, i - train_cfg.window), min(train_cfg.walk_length, i + train_cfg.window + 1)):
            if i != j:
                pairs.append(walks[:, [i, j]])
    pairs = np.concatenate(pairs)
    return pairs[pairs[:, 0] != pairs[:, 1]]


@dataclass(frozen=True, eq=False)
class EmbedBatch:
    positives: np.ndarray  # (P, 2)
    negatives: np.ndarray  # (P, Q)
    tree: SampleTree  # targets: v's, then u's, then negatives row-major


def make_batch(
    graph: CircuitGraph, positives: np.ndarray, negatives: np.ndarray, cfg: SamplerConfig, stream: int = 0
) -> EmbedBatch:
    targets = np.concatenate([positives[:, 0], positives[:, 1], negatives.reshape(-1)])
    return EmbedBatch(positives, negatives, sample_tree(graph, targets, cfg, stream))


def _log_sigmoid(x: np.ndarray) -> np.ndarray:
    return -np.logaddexp(0.0, -x)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return np.exp(_log_sigmoid(x))


def unsupervised_loss_and_grads(
    params: AggregatorParams, features: np.ndarray, batch: EmbedBatch
) -> Tuple[float, AggregatorParams, ForwardCache]:
    """
    Mean over positive pairs of -log s(z_v.z_u) - sum_q log s(-z_v.z_q),
    with its gradient w.r.t. every aggregator weight.
    """
    z, cache = _tree_forward(params, features, batch.tree)
    count, q = batch.negatives.shape
    z_v, z_u = z[:count], z[count:2 * count]
    z_n = z[2 * count:].reshape(count, q, -1)

    pos = np.sum(z_v * z_u, axis=1)
    neg = np.einsum("pd,pqd->pq", z_v, z_n)
    loss = float(-(np.sum(_log_sigmoid(pos)) + np.sum(_log_sigmoid(-neg))) / count)

    g_pos = (_sigmoid(pos) - 1.0) / count
    g_neg = _sigmoid(neg) / count
    grad = np.zeros_like(z)
    grad[:count] = g_pos[:, None] * z_u + np.einsum("pq,pqd->pd", g_neg, z_n)
    grad[count:2 * count] = g_pos[:, None] * z_v
    grad[2 * count:] = (g_neg[:, :, None] * z_v[:, None, :]).reshape(count * q, -1)
    return loss, _tree_backward(params, cache, grad), cache


class _Adam:
    def __init__(self, params: AggregatorParams, lr: float, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(a) for a in params.arrays()]
        self.v = [np.zeros_like(a) for a in params.arrays()]
        self.t = 0

    def step(self, params: AggregatorParams, grads: AggregatorParams):
        self.t += 1
        for a, g, m, v in zip(params.arrays(), grads.arrays(), self.m, self.v):
            m *= self.beta1
            m += (1 - self.beta1) * g
            v *= self.beta2
            v += (1 - self.beta2) * g * g
            m_hat = m / (1 - self.beta1 ** self.t)
            v_hat = v / (1 - self.beta2 ** self.t)
            a -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


@dataclass(frozen=True, eq=False)
class EmbedTrainResult:
    params: AggregatorParams
    loss_history: Tuple[float, ...]  # [0] before training, then one entry per epoch


def unsupervised_train(
    graph: CircuitGraph, features: FeatureMatrix, cfg: SamplerConfig, train_cfg: EmbedTrainConfig
) -> EmbedTrainResult:
    """
    Fit the aggregator with the random-walk negative-sampling loss and Adam.
    The loss history is measured on one fixed monitor batch so entries are
    comparable across epochs.
    """
    if graph.num_nodes < 2:
        raise DataError("embedding training needs at least two nodes")
    values = np.asarray(features.values, dtype=np.float64)
    params = init_aggregator(values.shape[1], cfg.depth, train_cfg.d_pool, train_cfg.d_emb, train_cfg.seed)
    _check_features(graph, values, params)
    pairs = random_walk_pairs(graph, cfg, train_cfg)
    if len(pairs) == 0:
        raise DataError("graph has no edges to draw co-occurrence pairs from")
    logger.info(f"Training embedder on {len(pairs)} walk pairs over {graph.num_nodes} nodes")

    rng = np.random.default_rng(np.random.SeedSequence([train_cfg.seed, 2]))

    def draw(stream: int) -> EmbedBatch:
        chosen = pairs[rng.integers(0, len(pairs), size=train_cfg.batch_size)]
        negatives = rng.integers(0, graph.num_nodes, size=(train_cfg.batch_size, train_cfg.negatives))
        return make_batch(graph, chosen, negatives, cfg, stream)

    monitor = draw(0)
    history = [unsupervised_loss_and_grads(params, values, monitor)[0]]
    optimiser = _Adam(params, train_cfg.learning_rate)
    stream = 1
    for epoch in range(1, train_cfg.epochs + 1):
        for _ in range(train_cfg.batches_per_epoch):
            loss, grads, _ = unsupervised_loss_and_grads(params, values, draw(stream))
            stream += 1
            if not math.isfinite(loss):
                raise TrainingDivergenceError("embedding", epoch, loss)
            optimiser.step(params, grads)
        monitored = unsupervised_loss_and_grads(params, values, monitor)[0]
        if not math.isfinite(monitored):
            raise TrainingDivergenceError("embedding", epoch, monitored)
        history.append(monitored)
        logger.debug(f"embed epoch {epoch}: loss {monitored:.6f}")
    logger.info(f"Embedder loss {history[0]:.4f} -> {history[-1]:.4f} after {train_cfg.epochs} epochs")
    return EmbedTrainResult(params, tuple(history))


# ---------------------------------------------------------------------------
# persistence


def _encode(array: np.ndarray) -> dict:
    return {"shape": list(array.shape), "data": array.reshape(-1).tolist()}


def _decode(blob: dict) -> np.ndarray:
    try:
        return np.array(blob["data"], dtype=np.float64).reshape(blob["shape"])
    except (KeyError, TypeError, ValueError) as err:
        raise DataError(f"malformed weight array: {err}") from err


def save_embedder(params: AggregatorParams, cfg: SamplerConfig, path: str):
    document = {
        "format_version": FORMAT_VERSION,
        "sampler": {**asdict(cfg), "fanouts": list(cfg.fanouts)},
        "depths": [
            {"w_pool": _encode(p.w_pool), "b_pool": _encode(p.b_pool), "w_combine": _encode(p.w_combine)}
            for p in params.depths
        ],
    }
    with open(path, mode="w", encoding="utf-8", newline="\n") as params_buffer:
        json.dump(document, params_buffer)
        params_buffer.write("\n")
    logger.info(f"Results written to {path}")


def load_embedder(path: str) -> Tuple[AggregatorParams, SamplerConfig]:
    try:
        with open(path, mode="r", encoding="utf-8") as params_buffer:
            document = json.load(params_buffer)
    except OSError as err:
        raise DataError(f"cannot read embedder parameters {path}: {err.strerror}") from err
    except json.JSONDecodeError as err:
        raise DataError(f"{path} is not valid JSON: {err}") from err
    if document.get("format_version") != FORMAT_VERSION:
        raise DataError(f"{path}: unsupported format version {document.get('format_version')!r}")
    try:
        cfg = SamplerConfig(**document["sampler"])
        depths = tuple(
            DepthParams(_decode(d["w_pool"]), _decode(d["b_pool"]), _decode(d["w_combine"]))
            for d in document["depths"]
        )
    except (KeyError, TypeError, ValueError) as err:
        raise DataError(f"{path}: malformed embedder field {err}") from err
    return AggregatorParams(depths), cfg


def write_embeddings_csv(embeddings: EmbeddingMatrix, path: str):
    embeddings.to_frame().to_csv(path, index=False, lineterminator="\n")
    logger.info(f"Results written to {path}")


def read_embeddings_csv(path: str) -> EmbeddingMatrix:
    try:
        frame = pd.read_csv(
            path, dtype={"node_name": str}, keep_default_na=False, float_precision="round_trip"
        )
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as err:
        raise DataError(f"cannot read embeddings {path}: {err}") from err
    if frame.columns[0] != "node_name":
        raise DataError(f"{path}: first column must be node_name")
    return EmbeddingMatrix(tuple(frame["node_name"]), frame.iloc[:, 1:].to_numpy(dtype=np.float64))
