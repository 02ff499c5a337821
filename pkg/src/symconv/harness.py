"""Training harness: optimizers, network assembly, synthetic tasks, metrics.

Networks map a per-position feature sequence to an L x L map of pair
probabilities: the sequence is lifted to its self-Cartesian pair tensor,
pushed through a chain of convolution layers (unconstrained, or the packed
symmetric kinds), and squashed by a final sigmoid.  The loss is the
positive-weighted binary cross-entropy over the upper triangle.

Batch members of different lengths are zero-padded to the longest member.
After the Cartesian lift and after every layer, activations at padded
positions are zeroed; padded positions are likewise excluded from the loss
and the metrics.  This makes padding exactly neutral: the loss and all
gradient contributions from the original entries are identical with and
without padding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .cartesian import as_sequence_features, self_cartesian
from .conv import (
    Conv2dKernel,
    conv2d_backward,
    conv2d_forward,
    relu_backward,
    relu_forward,
    sigmoid_backward,
    sigmoid_forward,
    upper_triangle_mask,
    weighted_bce_upper,
)
from .errors import ConfigError, ShapeError, TrainingError
from .symkernel import (
    SymGenKernel,
    SymPresKernel,
    expand_gen,
    expand_pres,
    init_glorot,
    new_gen_kernel,
    new_pres_kernel,
    sym_layer_backward,
)
from .tensor import Rng, zeros

STANDARD = "standard"
SYM_GENERATING = "sym_generating"
SYM_PRESERVING = "sym_preserving"

_KIND_ALIASES = {
    "standard": STANDARD,
    "std": STANDARD,
    "cnn": STANDARD,
    "sym_generating": SYM_GENERATING,
    "gen": SYM_GENERATING,
    "sym_preserving": SYM_PRESERVING,
    "pres": SYM_PRESERVING,
}

_ACTIVATIONS = ("relu", "sigmoid", "none")

# Guard against sigmoid saturation at extreme logits: probabilities are
# nudged inside (0, 1) before the cross-entropy, which otherwise rejects
# the exact 0.0/1.0 that np.exp underflow produces.
_PROB_EPS = 1e-15


@dataclass(frozen=True)
class LayerSpec:
    kind: str
    size: int
    out_channels: int
    activation: str


@dataclass(frozen=True)
class NetworkConfig:
    layers: tuple
    n: int
    seed: int = 0
    learning_rate: float = 2e-3
    pos_weight: float = 5.0
    weight_decay: float = 1e-5
    optimizer: str = "adam"
    epochs: int = 30
    batch_size: int = 10
    min_sep: int = 1
    decode: str = "threshold"

    def validate(self):
        if not self.layers:
            raise ConfigError("network needs at least one layer")
        if self.n < 1:
            raise ConfigError(f"per-position feature width must be >= 1, got {self.n}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.pos_weight not in (3.0, 5.0):
            raise ConfigError(f"pos_weight must be 3 or 5, got {self.pos_weight}")
        if self.weight_decay < 0:
            raise ConfigError(f"weight_decay must be >= 0, got {self.weight_decay}")
        if self.optimizer not in ("sgd", "adam"):
            raise ConfigError(f"optimizer must be sgd or adam, got {self.optimizer!r}")
        if self.epochs < 0 or self.batch_size < 1:
            raise ConfigError("epochs must be >= 0 and batch_size >= 1")
        if self.min_sep < 0:
            raise ConfigError(f"min_sep must be >= 0, got {self.min_sep}")
        if self.decode not in ("threshold", "greedy"):
            raise ConfigError(f"decode must be threshold or greedy, got {self.decode!r}")

        symmetric_so_far = True
        for pos, layer in enumerate(self.layers):
            if layer.kind not in (STANDARD, SYM_GENERATING, SYM_PRESERVING):
                raise ConfigError(f"unknown layer kind {layer.kind!r}")
            if layer.activation not in _ACTIVATIONS:
                raise ConfigError(f"unknown activation {layer.activation!r}")
            if layer.size < 1 or layer.size % 2 == 0:
                raise ConfigError(f"kernel size must be odd and >= 1, got {layer.size}")
            if layer.out_channels < 1:
                raise ConfigError(f"out_channels must be >= 1, got {layer.out_channels}")
            if layer.kind == SYM_GENERATING and pos != 0:
                raise ConfigError("a generating layer must sit directly on the lift")
            if layer.kind == SYM_PRESERVING:
                if pos == 0:
                    raise ConfigError(
                        "a preserving layer cannot be first: the lift is not symmetric"
                    )
                if not symmetric_so_far:
                    raise ConfigError(
                        f"layer {pos}: preserving layer after an unconstrained one"
                    )
            if layer.kind == STANDARD:
                symmetric_so_far = False
        last = self.layers[-1]
        if last.activation != "sigmoid":
            raise ConfigError("the final layer must use a sigmoid activation")
        if any(layer.activation == "sigmoid" for layer in self.layers[:-1]):
            raise ConfigError("only the final layer may use a sigmoid activation")
        if last.out_channels != 1:
            raise ConfigError("the final layer must emit a single channel")
        return self

    @property
    def is_symmetric(self):
        return self.layers[0].kind == SYM_GENERATING


@dataclass(frozen=True)
class TaskConfig:
    """Synthetic complementary-pairing task parameters."""

    length: int = 30
    alphabet: int = 4
    train_size: int = 200
    val_size: int = 0
    test_size: int = 50
    min_sep: int = 3
    trials: int = 5

    def validate(self):
        if self.length < 2 or self.alphabet < 2:
            raise ConfigError("task needs length >= 2 and alphabet >= 2")
        if min(self.train_size, self.val_size, self.test_size) < 0:
            raise ConfigError("split sizes must be >= 0")
        if self.min_sep < 0 or self.trials < 1:
            raise ConfigError("min_sep must be >= 0 and trials >= 1")
        return self


@dataclass(frozen=True)
class StructureMetrics:
    ppv: float
    sensitivity: float
    accuracy: float
    tp: int
    fp: int
    fn: int
    tn: int

    @classmethod
    def from_counts(cls, tp, fp, fn, tn):
        ppv = float(tp / (tp + fp)) if tp + fp else 0.0
        sen = float(tp / (tp + fn)) if tp + fn else 0.0
        return cls(
            ppv=ppv,
            sensitivity=sen,
            accuracy=(ppv + sen) / 2.0,
            tp=int(tp),
            fp=int(fp),
            fn=int(fn),
            tn=int(tn),
        )


@dataclass(frozen=True)
class Dataset:
    train: tuple
    val: tuple = ()
    test: tuple = ()

    def split(self, name):
        return getattr(self, name)


@dataclass
class TrainResult:
    params: list
    epoch_losses: list
    epoch_metrics: list
    metrics: dict


# ---------------------------------------------------------------------------
# optimizers


def sgd_step(params, grads, learning_rate, weight_decay=0.0):
    """One decoupled-L2 gradient-descent step: p <- p - lr * (g + wd * p)."""
    if learning_rate <= 0:
        raise ConfigError(f"learning_rate must be > 0, got {learning_rate}")
    single = isinstance(params, np.ndarray)
    plist = [params] if single else list(params)
    glist = [grads] if single else list(grads)
    if len(plist) != len(glist):
        raise ShapeError("params and grads differ in length")
    out = []
    for p, g in zip(plist, glist):
        if p.shape != np.shape(g):
            raise ShapeError(f"shape mismatch: {p.shape} vs {np.shape(g)}")
        out.append(p - learning_rate * (g + weight_decay * p))
    return out[0] if single else out


@dataclass
class AdamState:
    first: list = field(default_factory=list)
    second: list = field(default_factory=list)
    step: int = 0


def adam_step(state, params, grads, learning_rate, beta1=0.9, beta2=0.999, eps=1e-8):
    """One Adam step with bias correction; returns (state, new params).

    Any weight decay must already be folded into ``grads`` by the caller.
    """
    if learning_rate <= 0:
        raise ConfigError(f"learning_rate must be > 0, got {learning_rate}")
    single = isinstance(params, np.ndarray)
    plist = [params] if single else list(params)
    glist = [grads] if single else list(grads)
    if state is None:
        state = AdamState()
    if not state.first:
        state.first = [np.zeros_like(p) for p in plist]
        state.second = [np.zeros_like(p) for p in plist]
    state.step += 1
    t = state.step
    out = []
    for idx, (p, g) in enumerate(zip(plist, glist)):
        m = beta1 * state.first[idx] + (1.0 - beta1) * g
        v = beta2 * state.second[idx] + (1.0 - beta2) * g * g
        state.first[idx] = m
        state.second[idx] = v
        m_hat = m / (1.0 - beta1**t)
        v_hat = v / (1.0 - beta2**t)
        out.append(p - learning_rate * m_hat / (np.sqrt(v_hat) + eps))
    return state, (out[0] if single else out)


# ---------------------------------------------------------------------------
# synthetic pairing task


def complement_rule(alphabet):
    """Pairing rule matching token 2k with token 2k+1 (A-U, C-G style)."""
    rule = {}
    for low in range(0, alphabet - 1, 2):
        rule[low] = low + 1
        rule[low + 1] = low
    return rule


def gen_synthetic_pairing(rng, length, alphabet, pairing_rule, min_sep):
    """Random one-hot sequence plus its complementary-pairing label matrix.

    label[i, j] = 1 iff pairing_rule maps token i to token j and the two
    positions are at least ``min_sep`` apart.  The label is symmetric with a
    zero diagonal.
    """
    if length < 2:
        raise ConfigError(f"sequence length must be >= 2, got {length}")
    tokens = np.asarray(rng.integers(0, alphabet, length))
    features = zeros((length, alphabet))
    features[np.arange(length), tokens] = 1.0
    complements = np.array(
        [pairing_rule.get(int(tok), -1) for tok in tokens], dtype=np.int64
    )
    matches = complements[:, None] == tokens[None, :]
    rows, cols = np.indices((length, length))
    label = (matches & (np.abs(rows - cols) >= max(1, min_sep))).astype(np.float64)
    np.fill_diagonal(label, 0.0)
    return features, label


def make_dataset(rng, task):
    """Draw train/val/test splits of the synthetic pairing task."""
    task.validate()
    rule = complement_rule(task.alphabet)

    def draw(count):
        return tuple(
            gen_synthetic_pairing(rng, task.length, task.alphabet, rule, task.min_sep)
            for _ in range(count)
        )

    return Dataset(
        train=draw(task.train_size), val=draw(task.val_size), test=draw(task.test_size)
    )


# ---------------------------------------------------------------------------
# network assembly


def init_network(cfg, rng):
    """Construct per-layer kernels for a validated config."""
    cfg.validate()
    params = []
    in_channels = 2 * cfg.n
    for layer in cfg.layers:
        c, f = layer.size, layer.out_channels
        if layer.kind == SYM_GENERATING:
            if in_channels % 2 != 0:
                raise ConfigError("generating layer needs an even channel count")
            params.append(new_gen_kernel(rng, c, in_channels // 2, f))
        elif layer.kind == SYM_PRESERVING:
            params.append(new_pres_kernel(rng, c, in_channels, f))
        else:
            weights = init_glorot(rng, c * c * in_channels, c * c * f, (c, c, in_channels, f))
            params.append(Conv2dKernel(weights=weights, bias=zeros((f,))))
        in_channels = f
    return params


def count_parameters(params):
    """Trainable scalar counts: stored kernel entries plus biases."""
    kernel = 0
    bias = 0
    for kern in params:
        if isinstance(kern, (SymGenKernel, SymPresKernel)):
            kernel += kern.packed.size
        else:
            kernel += kern.weights.size
        bias += kern.bias.size
    return {"kernel": int(kernel), "bias": int(bias), "total": int(kernel + bias)}


def _expanded(kernel):
    if isinstance(kernel, SymGenKernel):
        return expand_gen(kernel)
    if isinstance(kernel, SymPresKernel):
        return expand_pres(kernel)
    return kernel


def _mask_invalid(t, valid):
    if valid < t.shape[0]:
        t[valid:] = 0.0
        t[:, valid:] = 0.0
    return t


def _forward_cached(cfg, params, x, valid=None):
    x = as_sequence_features(x)
    valid = x.shape[0] if valid is None else int(valid)
    current = _mask_invalid(self_cartesian(x), valid)
    caches = []
    for layer, kernel in zip(cfg.layers, params):
        pre = conv2d_forward(current, _expanded(kernel))
        if layer.activation == "relu":
            post = relu_forward(pre)
        elif layer.activation == "sigmoid":
            post = sigmoid_forward(pre)
        else:
            post = pre.copy()
        caches.append((current, pre))
        current = _mask_invalid(post, valid)
    return current, caches


def _backward(cfg, params, caches, d_out, valid):
    grads = []
    upstream = d_out
    for layer, kernel, (layer_in, pre) in zip(
        reversed(cfg.layers), reversed(params), reversed(caches)
    ):
        if layer.activation == "relu":
            upstream = relu_backward(pre, upstream)
        elif layer.activation == "sigmoid":
            upstream = sigmoid_backward(pre, upstream)
        if isinstance(kernel, (SymGenKernel, SymPresKernel)):
            d_kernel, d_bias, d_input = sym_layer_backward(layer_in, kernel, upstream)
        else:
            conv_grads = conv2d_backward(layer_in, kernel, upstream)
            d_kernel, d_bias, d_input = (
                conv_grads.d_weights,
                conv_grads.d_bias,
                conv_grads.d_input,
            )
        grads.append((d_kernel, d_bias))
        upstream = _mask_invalid(d_input, valid)
    return list(reversed(grads))


def forward_network(cfg, params, x):
    """Pair-probability map of one sequence, shape L x L x 1."""
    out, _ = _forward_cached(cfg, params, x)
    return out


def _loss_with_grad(prob_map, label, valid, pos_weight, min_sep):
    probs = np.clip(prob_map[:valid, :valid, 0], _PROB_EPS, 1.0 - _PROB_EPS)
    loss, d_probs = weighted_bce_upper(probs, label[:valid, :valid], pos_weight, min_sep)
    d_full = zeros(prob_map.shape)
    d_full[:valid, :valid, 0] = d_probs
    return loss, d_full


def network_loss(cfg, params, x, label):
    """Training loss of one full-length sequence, without gradients."""
    prob_map, _ = _forward_cached(cfg, params, x)
    probs = np.clip(prob_map[:, :, 0], _PROB_EPS, 1.0 - _PROB_EPS)
    loss, _ = weighted_bce_upper(probs, label, cfg.pos_weight, cfg.min_sep)
    return loss


# ---------------------------------------------------------------------------
# decoding and metrics


def decode_pairs(prob_map, min_sep, threshold=0.5, greedy=False):
    """Binary pair predictions over the evaluated upper-triangle entries.

    Plain mode thresholds each entry; greedy mode additionally enforces that
    every position joins at most one pair, taking surviving candidates in
    order of decreasing probability (ties broken by row then column).
    """
    prob_map = np.asarray(prob_map, dtype=np.float64)
    if prob_map.ndim == 3:
        prob_map = prob_map[:, :, 0]
    length = prob_map.shape[0]
    mask = upper_triangle_mask(length, min_sep)
    hits = (prob_map > threshold) & mask
    if not greedy:
        return hits
    rows, cols = np.nonzero(hits)
    order = np.lexsort((cols, rows, -prob_map[rows, cols]))
    chosen = np.zeros_like(hits)
    used = np.zeros(length, dtype=bool)
    for idx in order:
        i, j = int(rows[idx]), int(cols[idx])
        if not used[i] and not used[j]:
            chosen[i, j] = True
            used[i] = used[j] = True
    return chosen


def pair_counts(predicted, label, min_sep):
    """tp/fp/fn/tn counts over the evaluated upper-triangle entries."""
    label = np.asarray(label, dtype=np.float64)
    mask = upper_triangle_mask(label.shape[0], min_sep)
    truth = label > 0.5
    pred = np.asarray(predicted, dtype=bool)
    tp = int(np.sum(pred & truth & mask))
    fp = int(np.sum(pred & ~truth & mask))
    fn = int(np.sum(~pred & truth & mask))
    tn = int(np.sum(~pred & ~truth & mask))
    return tp, fp, fn, tn


def evaluate(cfg, params, items):
    """Micro-averaged metrics over a split, each sequence at full length."""
    totals = np.zeros(4, dtype=np.int64)
    for x, label in items:
        prob_map = forward_network(cfg, params, x)
        predicted = decode_pairs(
            prob_map, cfg.min_sep, greedy=(cfg.decode == "greedy")
        )
        totals += np.array(pair_counts(predicted, label, cfg.min_sep))
    return StructureMetrics.from_counts(*totals)


# ---------------------------------------------------------------------------
# training


def _params_arrays(params):
    arrays = []
    for kern in params:
        if isinstance(kern, (SymGenKernel, SymPresKernel)):
            arrays.append(kern.packed)
        else:
            arrays.append(kern.weights)
        arrays.append(kern.bias)
    return arrays


def _rebuild(params, arrays):
    rebuilt = []
    for idx, kern in enumerate(params):
        main, bias = arrays[2 * idx], arrays[2 * idx + 1]
        if isinstance(kern, (SymGenKernel, SymPresKernel)):
            rebuilt.append(kern.with_params(main, bias))
        else:
            rebuilt.append(Conv2dKernel(weights=main, bias=bias))
    return rebuilt


def _pad_item(x, label, padded_len):
    length = x.shape[0]
    if length == padded_len:
        return x, label, length
    xp = zeros((padded_len, x.shape[1]))
    xp[:length] = x
    lp = zeros((padded_len, padded_len))
    lp[:length, :length] = label
    return xp, lp, length


def train(cfg, dataset, log=None):
    """Deterministic mini-batch training on the given dataset.

    Returns a TrainResult with the final parameters, per-epoch mean training
    losses, per-epoch metrics (validation split when present, else training
    split), and final metrics for every nonempty split.
    """
    cfg.validate()
    if not dataset.train:
        raise ConfigError("training split is empty")
    rng = Rng(cfg.seed)
    params = init_network(cfg, rng)
    adam_state = None

    epoch_losses = []
    epoch_metrics = []
    watch_split = "val" if dataset.val else "train"
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(dataset.train))
        loss_sum = 0.0
        for start in range(0, len(order), cfg.batch_size):
            batch = [dataset.train[i] for i in order[start : start + cfg.batch_size]]
            padded_len = max(item[0].shape[0] for item in batch)
            arrays = _params_arrays(params)
            grad_sum = [np.zeros_like(a) for a in arrays]
            for x, label in batch:
                xp, lp, valid = _pad_item(x, label, padded_len)
                prob_map, caches = _forward_cached(cfg, params, xp, valid)
                loss, d_map = _loss_with_grad(
                    prob_map, lp, valid, cfg.pos_weight, cfg.min_sep
                )
                if not math.isfinite(loss):
                    raise TrainingError(f"loss diverged at epoch {epoch}")
                loss_sum += loss
                grads = _backward(cfg, params, caches, d_map, valid)
                for idx, (d_kernel, d_bias) in enumerate(grads):
                    grad_sum[2 * idx] += d_kernel / len(batch)
                    grad_sum[2 * idx + 1] += d_bias / len(batch)
            if cfg.optimizer == "sgd":
                arrays = sgd_step(arrays, grad_sum, cfg.learning_rate, cfg.weight_decay)
            else:
                decayed = [
                    g + cfg.weight_decay * p for g, p in zip(grad_sum, arrays)
                ]
                adam_state, arrays = adam_step(
                    adam_state, arrays, decayed, cfg.learning_rate
                )
            params = _rebuild(params, arrays)
        mean_loss = loss_sum / len(dataset.train)
        if not math.isfinite(mean_loss):
            raise TrainingError(f"loss diverged at epoch {epoch}")
        epoch_losses.append(mean_loss)
        epoch_metrics.append(evaluate(cfg, params, dataset.split(watch_split)))
        if log is not None:
            log(epoch, mean_loss, epoch_metrics[-1])

    metrics = {
        name: evaluate(cfg, params, dataset.split(name))
        for name in ("train", "val", "test")
        if dataset.split(name)
    }
    return TrainResult(
        params=params,
        epoch_losses=epoch_losses,
        epoch_metrics=epoch_metrics,
        metrics=metrics,
    )


# ---------------------------------------------------------------------------
# CNN vs SCNN comparison


def standard_twin(cfg):
    """The hyperparameter-matched all-unconstrained variant of a config."""
    layers = tuple(replace(layer, kind=STANDARD) for layer in cfg.layers)
    return replace(cfg, layers=layers)


def _require_matched(cfg_a, cfg_b):
    if len(cfg_a.layers) != len(cfg_b.layers):
        raise ConfigError("layer counts differ")
    for la, lb in zip(cfg_a.layers, cfg_b.layers):
        if (la.size, la.out_channels, la.activation) != (
            lb.size,
            lb.out_channels,
            lb.activation,
        ):
            raise ConfigError("layer hyperparameters differ beyond the kind")
    if replace(cfg_a, layers=()) != replace(cfg_b, layers=()):
        raise ConfigError("non-layer hyperparameters differ")
    if all(la.kind == lb.kind for la, lb in zip(cfg_a.layers, cfg_b.layers)):
        raise ConfigError("the two configs have identical layer kinds")


@dataclass(frozen=True)
class ComparisonReport:
    seeds: tuple
    cnn_params: dict
    scnn_params: dict
    cnn_trials: tuple
    scnn_trials: tuple
    cnn_mean: dict
    cnn_sd: dict
    scnn_mean: dict
    scnn_sd: dict


def _metric_stats(metrics_list):
    table = {
        "ppv": [m.ppv for m in metrics_list],
        "sen": [m.sensitivity for m in metrics_list],
        "acc": [m.accuracy for m in metrics_list],
    }
    mean = {k: float(np.mean(v)) for k, v in table.items()}
    sd = {k: float(np.std(v)) for k, v in table.items()}
    return mean, sd


def compare_cnn_scnn(cfg_cnn, cfg_scnn, dataset, trials):
    """Train both variants over ``trials`` seeds and summarize test metrics.

    The configs must agree in everything except layer kinds.  Trial k runs
    both models with seed cfg.seed + k on the same dataset.
    """
    _require_matched(cfg_cnn, cfg_scnn)
    if trials < 1:
        raise ConfigError(f"trials must be >= 1, got {trials}")
    eval_split = "test" if dataset.test else "train"

    seeds = tuple(cfg_scnn.seed + k for k in range(trials))
    cnn_trials = []
    scnn_trials = []
    for seed in seeds:
        for cfg, sink in (
            (replace(cfg_cnn, seed=seed), cnn_trials),
            (replace(cfg_scnn, seed=seed), scnn_trials),
        ):
            result = train(cfg, dataset)
            sink.append(result.metrics[eval_split])

    probe = Rng(0)
    cnn_params = count_parameters(init_network(cfg_cnn, probe))
    scnn_params = count_parameters(init_network(cfg_scnn, probe))
    cnn_mean, cnn_sd = _metric_stats(cnn_trials)
    scnn_mean, scnn_sd = _metric_stats(scnn_trials)
    return ComparisonReport(
        seeds=seeds,
        cnn_params=cnn_params,
        scnn_params=scnn_params,
        cnn_trials=tuple(cnn_trials),
        scnn_trials=tuple(scnn_trials),
        cnn_mean=cnn_mean,
        cnn_sd=cnn_sd,
        scnn_mean=scnn_mean,
        scnn_sd=scnn_sd,
    )


# ---------------------------------------------------------------------------
# config files


def parse_layer_list(text):
    layers = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(":")
        if len(parts) != 4:
            raise ConfigError(f"layer spec {chunk!r} is not kind:C:F:activation")
        kind = _KIND_ALIASES.get(parts[0].strip().lower())
        if kind is None:
            raise ConfigError(f"unknown layer kind {parts[0]!r}")
        try:
            size, out_channels = int(parts[1]), int(parts[2])
        except ValueError as exc:
            raise ConfigError(f"bad layer numbers in {chunk!r}") from exc
        layers.append(
            LayerSpec(
                kind=kind,
                size=size,
                out_channels=out_channels,
                activation=parts[3].strip().lower(),
            )
        )
    if not layers:
        raise ConfigError("empty layer list")
    return tuple(layers)


def parse_config_text(text):
    """Flat key=value config text into a raw string mapping."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        values[key.strip()] = value.strip()
    return values


_NETWORK_KEYS = {
    "n": int,
    "seed": int,
    "learning_rate": float,
    "pos_weight": float,
    "weight_decay": float,
    "optimizer": str,
    "epochs": int,
    "batch_size": int,
    "min_sep": int,
    "decode": str,
}

_TASK_KEYS = {
    "task_length": ("length", int),
    "task_alphabet": ("alphabet", int),
    "task_train": ("train_size", int),
    "task_val": ("val_size", int),
    "task_test": ("test_size", int),
    "task_min_sep": ("min_sep", int),
    "trials": ("trials", int),
}


def configs_from_mapping(values):
    """(NetworkConfig, TaskConfig) from a flat key=value mapping."""
    values = dict(values)
    try:
        layers = parse_layer_list(values.pop("layers"))
    except KeyError as exc:
        raise ConfigError("config is missing the 'layers' key") from exc

    net_kwargs = {"layers": layers}
    task_kwargs = {}
    for key, value in values.items():
        if key in _NETWORK_KEYS:
            cast = _NETWORK_KEYS[key]
            try:
                net_kwargs[key] = cast(value)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {value!r}") from exc
        elif key in _TASK_KEYS:
            field_name, cast = _TASK_KEYS[key]
            try:
                task_kwargs[field_name] = cast(value)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {value!r}") from exc
        else:
            raise ConfigError(f"unknown config key {key!r}")
    if "n" not in net_kwargs:
        net_kwargs["n"] = task_kwargs.get("alphabet", TaskConfig.alphabet)
    if "min_sep" not in net_kwargs:
        # keep the loss/metric separation aligned with the task's labels
        net_kwargs["min_sep"] = task_kwargs.get("min_sep", TaskConfig.min_sep)
    net = NetworkConfig(**net_kwargs).validate()
    task = TaskConfig(**task_kwargs).validate()
    return net, task


def load_config(path):
    return configs_from_mapping(parse_config_text(Path(path).read_text()))
