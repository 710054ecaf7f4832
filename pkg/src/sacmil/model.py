"""The full bag classifier: reduce, encode, mix, pool, classify.

Also training with Adam at batch size one, evaluation and stratified
k-fold cross-validation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .bagio import InstanceBag
from .encoding import ENCODER_KINDS, positional_table
from .errors import ConfigError, ContractError, UndefinedMetricError
from .numerics import (
    AdamState,
    MetricsReport,
    ParamStore,
    Tensor,
    adam_step,
    auc,
    backward,
    f1_acc,
    gelu,
    linear,
    masked_mean,
    softmax,
    softmax_cross_entropy,
)
from .partition import arrange, partition_bag
from .sac import SacBlockParams, padded_length, region_schedule, sac_block_forward

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModelConfig:
    d_in: int
    dim: int = 512
    k: int = 64
    blocks: int = 3
    lam: float = 512.0
    encoder: str = "prope"
    classes: int = 2
    residual: bool = True

    def validate(self) -> "ModelConfig":
        if self.d_in < 1:
            raise ConfigError(f"d_in must be positive, got {self.d_in}")
        if self.dim < 2 or self.dim % 2:
            raise ConfigError(f"model dimension D={self.dim} must be even")
        if self.k < 2:
            raise ConfigError(f"region base k={self.k} must be >= 2")
        if self.dim % self.k:
            raise ConfigError(f"model dimension D={self.dim} must be divisible by k={self.k}")
        if self.blocks < 1:
            raise ConfigError(f"block count N={self.blocks} must be >= 1")
        if self.lam <= 0:
            raise ConfigError(f"lambda={self.lam} must be positive")
        if self.encoder not in ENCODER_KINDS:
            raise ConfigError(f"encoder {self.encoder!r} not in {ENCODER_KINDS}")
        if self.encoder == "rope2d" and self.dim % 4:
            raise ConfigError(f"rope2d needs D divisible by 4, got {self.dim}")
        if self.classes < 2:
            raise ConfigError(f"need at least 2 classes, got {self.classes}")
        region_schedule(self.k, self.blocks)
        return self

    def expected_param_count(self) -> int:
        D, N = self.dim, self.blocks
        return self.d_in * D + D + N * (2 * D + 2 * (D * D + D)) + D * self.classes + self.classes


@dataclass(frozen=True)
class PreparedBag:
    """A bag in arranged order, padded to a length every layer accepts."""

    features: np.ndarray
    coords: np.ndarray
    real: np.ndarray
    slot_of_instance: np.ndarray
    label: int
    bag_id: str
    positions: object = None


def prepare_bag(bag: InstanceBag, config: ModelConfig, dtype=np.float32) -> PreparedBag:
    k, blocks = config.k, config.blocks
    part = partition_bag(bag.coords, k)
    feats, coords, pad, _ = arrange(bag.features, bag.coords, part)
    L0 = feats.shape[0]
    L = padded_length(L0, k, blocks)
    if L > L0:
        # extra slots cycle through the arranged sequence; masked like pads
        extra = np.arange(L0, L) % L0
        feats = np.concatenate([feats, feats[extra]])
        coords = np.concatenate([coords, coords[extra]])
        pad = np.concatenate([pad, np.ones(L - L0, dtype=bool)])
    table = positional_table(config.encoder, coords, config.dim, config.lam, dtype)
    return PreparedBag(feats, coords, ~pad, part.first_slot(), bag.label, bag.bag_id, table)


class SacMilModel:
    def __init__(self, config: ModelConfig, seed: int = 0, dtype=np.float32):
        self.config = config.validate()
        self.seed = seed
        self.params = ParamStore(dtype)
        rng = np.random.default_rng(seed)
        c = config
        self.reducer_w = self.params.glorot("reducer.w", c.d_in, c.dim, rng)
        self.reducer_b = self.params.zeros("reducer.b", c.dim)
        self.blocks = [
            SacBlockParams.create(self.params, f"block{l}", c.dim, rng, c.residual) for l in range(c.blocks)
        ]
        self.specs = region_schedule(c.k, c.blocks)
        self.head_w = self.params.glorot("head.w", c.dim, c.classes, rng)
        self.head_b = self.params.zeros("head.b", c.classes)

    @property
    def dtype(self):
        return self.params.dtype

    def prepare(self, bag: InstanceBag | PreparedBag) -> PreparedBag:
        if isinstance(bag, PreparedBag):
            return bag
        if bag.d != self.config.d_in:
            raise ContractError(f"bag {bag.bag_id} has feature width {bag.d}, model expects {self.config.d_in}")
        return prepare_bag(bag, self.config, self.dtype)

    def represent(self, prep: PreparedBag) -> Tensor:
        """Final per-slot representation before pooling."""
        x = Tensor(prep.features.astype(self.dtype, copy=False))
        h = gelu(linear(x, self.reducer_w, self.reducer_b))
        h = prep.positions.apply(h)
        for p, spec in zip(self.blocks, self.specs):
            h = sac_block_forward(h, p, spec)
        return h

    def logits_from(self, h: Tensor, prep: PreparedBag) -> Tensor:
        return linear(masked_mean(h, prep.real), self.head_w, self.head_b)

    def __call__(self, bag: InstanceBag | PreparedBag) -> tuple[Tensor, np.ndarray]:
        return forward(self, bag)


def build_model(config: ModelConfig, seed: int = 0, dtype=np.float32) -> SacMilModel:
    return SacMilModel(config, seed, dtype)


def forward(model: SacMilModel, bag: InstanceBag | PreparedBag) -> tuple[Tensor, np.ndarray]:
    """Bag logits and per-instance L2 scores in the bag's original row order."""
    prep = model.prepare(bag)
    h = model.represent(prep)
    logits = model.logits_from(h, prep)
    scores = np.linalg.norm(h.data[prep.slot_of_instance].astype(np.float64), axis=1)
    return logits, scores


def bag_loss(model: SacMilModel, prep: PreparedBag) -> Tensor:
    h = model.represent(prep)
    return softmax_cross_entropy(model.logits_from(h, prep), prep.label)


@dataclass
class TrainHyper:
    lr: float = 1e-4
    epochs: int = 200
    seed: int = 0
    batch_size: int = 1

    def __post_init__(self):
        if self.lr < 0:
            raise ConfigError(f"learning rate must be non-negative, got {self.lr}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be positive, got {self.epochs}")
        if self.batch_size != 1:
            raise ConfigError("only batch size 1 is supported")


@dataclass
class TrainResult:
    model: SacMilModel
    loss_curve: list[float] = field(default_factory=list)


def train(model: SacMilModel, bags, hyper: TrainHyper) -> TrainResult:
    """Per-epoch shuffled pass, one Adam step per bag."""
    bags = list(bags)
    labels = {b.label for b in bags}
    if len(labels) < 2:
        raise ContractError(f"training set must contain at least two classes, got {sorted(labels)}")
    prepared = [model.prepare(b) for b in bags]
    state = AdamState.for_params(model.params, lr=hyper.lr)
    rng = np.random.default_rng(hyper.seed)
    model.params.zero_grad()
    curve = []
    for epoch in range(hyper.epochs):
        total = 0.0
        for i in rng.permutation(len(prepared)):
            loss = bag_loss(model, prepared[i])
            backward(loss)
            adam_step(model.params, state)
            total += float(loss.data)
        curve.append(total / len(prepared))
        log.debug("epoch %d loss %.6f", epoch, curve[-1])
    return TrainResult(model, curve)


def predict(model: SacMilModel, bags) -> tuple[np.ndarray, list[np.ndarray]]:
    """Class probabilities (n_bags, C) and per-instance scores for each bag."""
    probs, scores = [], []
    for b in bags:
        logits, s = forward(model, b)
        probs.append(softmax(logits.data.astype(np.float64)))
        scores.append(s)
    return np.array(probs), scores


def metrics_from_probs(probs: np.ndarray, labels) -> MetricsReport:
    labels = np.asarray(labels, dtype=np.int64)
    pred = probs.argmax(axis=1)
    acc, f1 = f1_acc(pred, labels, num_classes=probs.shape[1])
    try:
        if probs.shape[1] == 2:
            a = auc(probs[:, 1], labels)
        else:
            a = float(np.mean([auc(probs[:, c], (labels == c).astype(int)) for c in range(probs.shape[1])]))
    except UndefinedMetricError:
        log.warning("AUC undefined: evaluation set has a single class")
        a = None
    return MetricsReport(accuracy=acc, auc=a, f1=f1)


def evaluate(model: SacMilModel, bags) -> MetricsReport:
    bags = list(bags)
    if not bags:
        raise ContractError("evaluate needs at least one bag")
    probs, _ = predict(model, bags)
    return metrics_from_probs(probs, [b.label for b in bags])


def kfold_split(labels, folds: int = 5, seed: int = 0) -> list[tuple[np.ndarray, np.ndarray]]:
    """Stratified split; per class, shuffled indices are dealt round-robin."""
    labels = np.asarray(labels)
    if folds < 2:
        raise ContractError(f"need at least 2 folds, got {folds}")
    if labels.size < folds:
        raise ContractError(f"{labels.size} bags cannot fill {folds} folds")
    rng = np.random.default_rng(seed)
    assign = np.empty(labels.size, dtype=np.int64)
    offset = 0
    for c in np.unique(labels):
        idx = rng.permutation(np.flatnonzero(labels == c))
        assign[idx] = (np.arange(idx.size) + offset) % folds
        offset = (offset + idx.size) % folds
    out = []
    for f in range(folds):
        test = np.flatnonzero(assign == f)
        train_idx = np.flatnonzero(assign != f)
        out.append((train_idx, test))
    return out


@dataclass
class CrossValResult:
    report: MetricsReport
    instance_scores: dict[str, np.ndarray]
    loss_curves: list[list[float]]


def cross_validate(
    bags, config: ModelConfig, hyper: TrainHyper, folds: int = 5, seed: int = 0, dtype=np.float32
) -> CrossValResult:
    """Train a fresh model per fold and score the held-out bags."""
    bags = list(bags)
    splits = kfold_split([b.label for b in bags], folds, seed)
    fold_reports, scores, curves = [], {}, []
    for f, (tr, te) in enumerate(splits):
        model = build_model(config, seed=hyper.seed + f, dtype=dtype)
        fold_hyper = TrainHyper(lr=hyper.lr, epochs=hyper.epochs, seed=hyper.seed + f)
        result = train(model, [bags[i] for i in tr], fold_hyper)
        test_bags = [bags[i] for i in te]
        probs, inst = predict(model, test_bags)
        fold_reports.append(metrics_from_probs(probs, [b.label for b in test_bags]))
        for b, s in zip(test_bags, inst):
            scores[b.bag_id] = s
        curves.append(result.loss_curve)
        log.info("fold %d: %s", f, fold_reports[-1])
    return CrossValResult(MetricsReport.aggregate(fold_reports), scores, curves)
