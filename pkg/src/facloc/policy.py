"""Edge-scoring policy: message-passing embeddings, score head, REINFORCE.

The network is small enough that plain numpy with hand-written
backpropagation keeps everything float64 and bit-reproducible. Message
passing runs on the symmetrized k-nearest-neighbor geographic graph, not
the dense swap graph.
"""
from __future__ import annotations

import base64
import json
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .assignment import AssignmentState
from .instances import ProblemInstance
from .swap_search import StepContext

KNN_K = 10
N_FEATURES = 7
CHECKPOINT_VERSION = 1


class CheckpointError(ValueError):
    """Checkpoint file is missing, corrupt, or from an unsupported version."""


@dataclass
class PolicyParams:
    w_in: np.ndarray  # (N_FEATURES, d)
    w_layers: list[np.ndarray]  # L matrices (d, d)
    head_w: np.ndarray  # (2d, d)
    head_v: np.ndarray  # (d,)

    @property
    def d(self) -> int:
        return self.w_in.shape[1]

    @property
    def layers(self) -> int:
        return len(self.w_layers)

    def copy(self) -> "PolicyParams":
        return PolicyParams(
            w_in=self.w_in.copy(),
            w_layers=[w.copy() for w in self.w_layers],
            head_w=self.head_w.copy(),
            head_v=self.head_v.copy(),
        )

    def named_arrays(self) -> dict[str, np.ndarray]:
        out = {"w_in": self.w_in}
        for i, w in enumerate(self.w_layers, start=1):
            out[f"w_layer_{i}"] = w
        out["head_w"] = self.head_w
        out["head_v"] = self.head_v
        return out


def init_params(layers: int = 3, width: int = 64, seed: int = 0) -> PolicyParams:
    """Uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)]."""
    rng = np.random.default_rng(seed)

    def u(shape, fan_in):
        b = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-b, b, size=shape)

    return PolicyParams(
        w_in=u((N_FEATURES, width), N_FEATURES),
        w_layers=[u((width, width), width) for _ in range(layers)],
        head_w=u((2 * width, width), 2 * width),
        head_v=u((width,), width),
    )


def zero_params(layers: int = 3, width: int = 64) -> PolicyParams:
    return PolicyParams(
        w_in=np.zeros((N_FEATURES, width)),
        w_layers=[np.zeros((width, width)) for _ in range(layers)],
        head_w=np.zeros((2 * width, width)),
        head_v=np.zeros(width),
    )


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    episodes_per_batch: int = 8
    baseline_decay: float = 0.99
    entropy_weight: float = 0.01
    max_steps: int = 0  # 0 means 2p per episode
    seed: int = 0
    batches: int = 200

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 <= self.baseline_decay < 1.0:
            raise ValueError("baseline_decay must lie in [0, 1)")


# -- geographic message-passing graph ---------------------------------------


def knn_adjacency(instance: ProblemInstance, k: int = KNN_K) -> sparse.csr_matrix:
    """Symmetrized k-nearest-neighbor adjacency, no self loops."""
    n = instance.n
    k_eff = min(k, n - 1)
    rows, cols = [], []
    if k_eff > 0:
        idx = np.arange(n)
        for start in range(0, n, 256):
            chunk = idx[start : start + 256]
            dmat = instance.pairwise(chunk, idx).copy()
            dmat[np.arange(chunk.shape[0]), chunk] = np.inf
            order = np.argsort(dmat, axis=1, kind="stable")[:, :k_eff]
            rows.append(np.repeat(chunk, k_eff))
            cols.append(order.ravel())
    r = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
    c = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
    a = sparse.csr_matrix((np.ones(r.shape[0]), (r, c)), shape=(n, n))
    a = a.maximum(a.T)
    a.data[:] = 1.0
    return a


@dataclass
class GraphContext:
    """Per-instance constants the policy needs: adjacency, normalized
    coordinates, and the diameter used to scale distances."""

    adjacency: sparse.csr_matrix
    xy_norm: np.ndarray
    diameter: float

    @classmethod
    def for_instance(cls, instance: ProblemInstance, k: int = KNN_K) -> "GraphContext":
        pos = instance.positions
        lo = pos.min(axis=0)
        span = pos.max(axis=0) - lo
        xy = np.where(span > 0, (pos - lo) / np.where(span > 0, span, 1.0), 0.5)
        return cls(
            adjacency=knn_adjacency(instance, k),
            xy_norm=xy,
            diameter=instance.diameter(),
        )


def node_features(
    state: AssignmentState,
    gain: np.ndarray,
    loss: np.ndarray,
    graph: GraphContext,
) -> np.ndarray:
    """Seven per-node inputs: scaled demand, occupancy flag, normalized
    coordinates, scaled service distance, scaled gain and loss."""
    instance = state.instance
    h = instance.demands[state.ftype]
    hmax = float(h.max())
    occ = np.zeros(instance.n)
    occ[state.facilities] = 1.0
    ac = state.ac
    feats = np.empty((instance.n, N_FEATURES))
    feats[:, 0] = h / hmax if hmax > 0 else 0.0
    feats[:, 1] = occ
    feats[:, 2] = graph.xy_norm[:, 0]
    feats[:, 3] = graph.xy_norm[:, 1]
    feats[:, 4] = state.d1 / graph.diameter if graph.diameter > 0 else 0.0
    feats[:, 5] = gain / ac if ac > 0 else 0.0
    feats[:, 6] = np.where(occ > 0, loss / ac if ac > 0 else 0.0, 0.0)
    return feats


# -- forward / backward ------------------------------------------------------


def node_embed(
    features: np.ndarray, adjacency: sparse.csr_matrix, params: PolicyParams
) -> np.ndarray:
    """Residual message passing: h_{l+1} = h_l + tanh((A h_l) W_l)."""
    if features.shape[1] != params.w_in.shape[0]:
        raise ValueError(
            f"feature width {features.shape[1]} does not match "
            f"w_in rows {params.w_in.shape[0]}"
        )
    h = features @ params.w_in
    for w in params.w_layers:
        h = h + np.tanh((adjacency @ h) @ w)
    return h


def edge_embed(embeddings: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Concatenate insert-node and remove-node embeddings, in that order."""
    edges = np.asarray(edges, dtype=np.int64)
    return np.concatenate([embeddings[edges[:, 0]], embeddings[edges[:, 1]]], axis=1)


def _forward(params: PolicyParams, feats, adjacency, edges):
    hs = [feats @ params.w_in]
    msgs, tanhs = [], []
    for w in params.w_layers:
        m = adjacency @ hs[-1]
        t = np.tanh(m @ w)
        msgs.append(m)
        tanhs.append(t)
        hs.append(hs[-1] + t)
    # [h_i || h_j] @ head_w splits into two per-node projections, turning
    # the per-edge cost from O(2d*d) into a gather plus O(d)
    d = params.d
    proj_i = hs[-1] @ params.head_w[:d]
    proj_j = hs[-1] @ params.head_w[d:]
    th = np.tanh(proj_i[edges[:, 0]] + proj_j[edges[:, 1]])
    scores = th @ params.head_v
    return scores, (hs, msgs, tanhs, th)


def _softmax(scores: np.ndarray) -> np.ndarray:
    z = scores - scores.max()
    e = np.exp(z)
    return e / e.sum()


def score_edges(
    params: PolicyParams,
    feats: np.ndarray,
    adjacency: sparse.csr_matrix,
    edges: np.ndarray,
) -> np.ndarray:
    """Selection distribution over the wired candidate edges."""
    if np.asarray(edges).shape[0] == 0:
        raise ValueError("candidate edge list is empty")
    scores, _ = _forward(params, feats, adjacency, edges)
    return _softmax(scores)


def select_action(
    probs: np.ndarray, mode: str, rng: np.random.Generator | None = None
) -> int:
    """Index of the chosen candidate; greedy ties go to the first edge."""
    if mode == "greedy":
        return int(np.argmax(probs))
    if mode == "sample":
        if rng is None:
            raise ValueError("sampling requires an rng")
        return int(rng.choice(probs.shape[0], p=probs / probs.sum()))
    raise ValueError(f"unknown selection mode {mode!r}")


def _backward(params: PolicyParams, adjacency, feats, edges, cache, dscores):
    hs, msgs, tanhs, th = cache
    grads = {
        "head_v": th.T @ dscores,
    }
    dth = np.outer(dscores, params.head_v)
    dzh = dth * (1.0 - th * th)
    d = params.d
    gi = np.zeros_like(hs[-1])
    gj = np.zeros_like(hs[-1])
    np.add.at(gi, edges[:, 0], dzh)
    np.add.at(gj, edges[:, 1], dzh)
    grads["head_w"] = np.concatenate([hs[-1].T @ gi, hs[-1].T @ gj], axis=0)
    dh = gi @ params.head_w[:d].T + gj @ params.head_w[d:].T
    layer_grads = [None] * len(params.w_layers)
    for l in range(len(params.w_layers) - 1, -1, -1):
        dz = dh * (1.0 - tanhs[l] * tanhs[l])
        layer_grads[l] = msgs[l].T @ dz
        dh = dh + adjacency.T @ (dz @ params.w_layers[l].T)
    grads["w_layers"] = layer_grads
    grads["w_in"] = feats.T @ dh
    return grads


# -- trajectories and the policy-gradient update -----------------------------


@dataclass
class TrajectoryStep:
    features: np.ndarray
    edges: np.ndarray
    chosen: int
    reward: float


@dataclass
class Trajectory:
    steps: list[TrajectoryStep]
    adjacency: sparse.csr_matrix
    initial_ac: float


def surrogate_loss_and_grads(
    params: PolicyParams,
    items: list[tuple[np.ndarray, sparse.csr_matrix, np.ndarray, int, float]],
    entropy_weight: float,
    want_grads: bool = True,
):
    """Mean REINFORCE surrogate over (features, adjacency, edges, chosen,
    advantage) items, with an entropy bonus; returns (loss, grads)."""
    total = len(items)
    loss = 0.0
    acc = None
    for feats, adjacency, edges, chosen, adv in items:
        scores, cache = _forward(params, feats, adjacency, edges)
        z = scores - scores.max()
        logsum = np.log(np.exp(z).sum())
        logp = z - logsum
        probs = np.exp(logp)
        entropy = -float(np.dot(probs, logp))
        loss += (-adv * float(logp[chosen]) - entropy_weight * entropy) / total
        if not want_grads:
            continue
        dscores = adv * probs.copy()
        dscores[chosen] -= adv
        dscores += entropy_weight * probs * (logp + entropy)
        dscores /= total
        g = _backward(params, adjacency, feats, edges, cache, dscores)
        if acc is None:
            acc = g
        else:
            acc["w_in"] += g["w_in"]
            acc["head_w"] += g["head_w"]
            acc["head_v"] += g["head_v"]
            for l in range(len(acc["w_layers"])):
                acc["w_layers"][l] += g["w_layers"][l]
    return loss, acc


def reinforce_update(
    trajectories: list[Trajectory],
    params: PolicyParams,
    config: TrainConfig,
    baseline: float | None = None,
) -> dict:
    """One policy-gradient step over a batch of trajectories.

    Reward-to-go is normalized by each episode's initial access cost and
    centered with an exponential-moving-average baseline. Returns stats
    including the updated baseline; a non-finite gradient skips the step.
    """
    items = []
    returns = []
    per_step = []
    for traj in trajectories:
        rewards = np.array([s.reward for s in traj.steps])
        if rewards.shape[0] == 0:
            continue
        togo = np.cumsum(rewards[::-1])[::-1]
        scale = traj.initial_ac if traj.initial_ac > 0 else 1.0
        g = togo / scale
        returns.append(float(g[0]))
        for s, gt in zip(traj.steps, g):
            per_step.append(float(gt))
            items.append((s.features, traj.adjacency, s.edges, s.chosen, gt))
    if not items:
        return {"baseline": baseline, "steps": 0, "skipped": True, "loss": 0.0}
    mean_g = float(np.mean(per_step))
    b = mean_g if baseline is None else baseline
    items = [(f, a, e, c, g - b) for f, a, e, c, g in items]
    loss, grads = surrogate_loss_and_grads(params, items, config.entropy_weight)
    flat = [grads["w_in"], grads["head_w"], grads["head_v"], *grads["w_layers"]]
    if not all(np.all(np.isfinite(g)) for g in flat):
        return {
            "baseline": b,
            "steps": len(items),
            "skipped": True,
            "loss": float(loss),
            "mean_return": float(np.mean(returns)),
        }
    lr = config.learning_rate
    params.w_in -= lr * grads["w_in"]
    params.head_w -= lr * grads["head_w"]
    params.head_v -= lr * grads["head_v"]
    for w, g in zip(params.w_layers, grads["w_layers"]):
        w -= lr * g
    new_baseline = config.baseline_decay * b + (1.0 - config.baseline_decay) * mean_g
    grad_norm = float(np.sqrt(sum(float((g * g).sum()) for g in flat)))
    return {
        "baseline": new_baseline,
        "steps": len(items),
        "skipped": False,
        "loss": float(loss),
        "mean_return": float(np.mean(returns)),
        "grad_norm": grad_norm,
    }


# -- selector bridging the search loop ---------------------------------------


class PolicySelector:
    """Edge selector backed by the scoring network.

    With record=True each chosen step is kept (features, candidates,
    choice, reward) so a trainer can replay it for gradients.
    """

    def __init__(
        self,
        params: PolicyParams,
        mode: str = "greedy",
        record: bool = False,
        graph: GraphContext | None = None,
    ):
        self.params = params
        self.mode = mode
        self.record = record
        self.graph = graph
        self._graph_for: int | None = None
        self._pending: TrajectoryStep | None = None
        self.recorded: list[TrajectoryStep] = []

    def bind(self, instance: ProblemInstance):
        if self.graph is None or self._graph_for != id(instance):
            self.graph = GraphContext.for_instance(instance)
            self._graph_for = id(instance)
        return self

    def choose(self, ctx: StepContext, rng: np.random.Generator) -> int:
        instance = ctx.state.instance
        if self.graph is None or (
            self._graph_for is not None and self._graph_for != id(instance)
        ):
            self.bind(instance)
        feats = node_features(ctx.state, ctx.gain, ctx.loss, self.graph)
        probs = score_edges(self.params, feats, self.graph.adjacency, ctx.edges)
        idx = select_action(probs, self.mode, rng)
        if self.record:
            self._pending = TrajectoryStep(
                features=feats, edges=ctx.edges.copy(), chosen=idx, reward=np.nan
            )
        return idx

    def observe(self, reward: float, state: AssignmentState):
        if self._pending is not None:
            self._pending.reward = float(reward)
            self.recorded.append(self._pending)
            self._pending = None

    def drain(self) -> list[TrajectoryStep]:
        out, self.recorded = self.recorded, []
        self._pending = None
        return out


# -- checkpoints --------------------------------------------------------------


def save_checkpoint(params: PolicyParams, path) -> None:
    payload = {
        "version": CHECKPOINT_VERSION,
        "L": params.layers,
        "d": params.d,
        "feat": N_FEATURES,
        "arrays": {
            name: base64.b64encode(
                np.ascontiguousarray(arr, dtype="<f8").tobytes()
            ).decode("ascii")
            for name, arr in params.named_arrays().items()
        },
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f)
        f.write("\n")


def load_checkpoint(path) -> PolicyParams:
    try:
        with open(path, "r", encoding="utf-8") as f:
            payload = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"cannot read checkpoint: {exc}") from exc
    version = payload.get("version")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"unsupported checkpoint version {version!r}; expected {CHECKPOINT_VERSION}"
        )
    for key in ("L", "d", "feat", "arrays"):
        if key not in payload:
            raise CheckpointError(f"checkpoint missing field {key!r}")
    layers, width, feat = payload["L"], payload["d"], payload["feat"]
    if feat != N_FEATURES:
        raise CheckpointError(f"feat: expected {N_FEATURES}, found {feat}")
    shapes = {"w_in": (feat, width), "head_w": (2 * width, width), "head_v": (width,)}
    for i in range(1, layers + 1):
        shapes[f"w_layer_{i}"] = (width, width)
    arrays = {}
    for name, shape in shapes.items():
        blob = payload["arrays"].get(name)
        if blob is None:
            raise CheckpointError(f"checkpoint missing array {name!r}")
        try:
            raw = base64.b64decode(blob.encode("ascii"), validate=True)
        except Exception as exc:
            raise CheckpointError(f"{name}: corrupt base64 payload") from exc
        expected = int(np.prod(shape)) * 8
        if len(raw) != expected:
            raise CheckpointError(
                f"{name}: expected {expected} bytes for shape {shape}, got {len(raw)}"
            )
        arrays[name] = np.frombuffer(raw, dtype="<f8").reshape(shape).copy()
    return PolicyParams(
        w_in=arrays["w_in"],
        w_layers=[arrays[f"w_layer_{i}"] for i in range(1, layers + 1)],
        head_w=arrays["head_w"],
        head_v=arrays["head_v"],
    )
