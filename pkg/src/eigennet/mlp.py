"""Multilayer perceptron over eigenface coefficients.

Every layer is an affine map followed by ``tanh``, so outputs live in
``(-1, 1)`` and match the ``+1`` genuine / ``-1`` impostor target coding.
Training is full-batch gradient descent with momentum and an adaptive
learning rate on the regularized objective::

    msereg = gamma * mse + (1 - gamma) * sum(weights**2) / n

where ``n`` counts weights and biases but only weights are penalized.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .eigenfaces import FeatureVector
from .errors import ContractError, DivergenceError

FORMAT_VERSION = 1


@dataclass
class MlpNetwork:
    """Weights are ``(fan_out, fan_in)`` matrices, one per layer transition.

    ``input_shift`` and ``input_scale`` standardize raw inputs before the
    first layer; they default to the identity transform.
    """

    layer_sizes: tuple
    weights: list
    biases: list
    input_shift: np.ndarray = None
    input_scale: np.ndarray = None

    def __post_init__(self):
        self.layer_sizes = tuple(int(s) for s in self.layer_sizes)
        if self.input_shift is None:
            self.input_shift = np.zeros(self.layer_sizes[0])
        if self.input_scale is None:
            self.input_scale = np.ones(self.layer_sizes[0])
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            expected = (self.layer_sizes[k + 1], self.layer_sizes[k])
            if w.shape != expected or b.shape != expected[:1]:
                raise ContractError(
                    f"layer {k}: weights {w.shape} / biases {b.shape} do not match sizes {expected}"
                )

    @property
    def parameter_count(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def copy(self) -> "MlpNetwork":
        return copy.deepcopy(self)


@dataclass(frozen=True)
class EarlyStopping:
    patience: float = math.inf


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 4000
    initial_learning_rate: float = 0.01
    momentum: float = 0.9
    lr_increase: float = 1.05
    lr_decrease: float = 0.7
    max_error_growth: float = 1.04
    gamma: float = 0.9
    seed: int = 0
    multi_starts: int = 5
    early_stopping: Optional[EarlyStopping] = None

    def __post_init__(self):
        if self.epochs < 1 or self.multi_starts < 1:
            raise ContractError("epochs and multi_starts must be at least 1")
        if self.initial_learning_rate <= 0:
            raise ContractError("initial_learning_rate must be positive")
        if not 0 <= self.momentum < 1:
            raise ContractError("momentum must lie in [0, 1)")
        if self.lr_increase <= 1 or not 0 < self.lr_decrease < 1 or self.max_error_growth <= 1:
            raise ContractError("need lr_increase > 1, 0 < lr_decrease < 1, max_error_growth > 1")
        if not 0 <= self.gamma <= 1:
            raise ContractError("gamma must lie in [0, 1]")


@dataclass
class TrainReport:
    """Per-epoch traces; index ``e`` holds the state after epoch ``e + 1``."""

    initial_objective: float
    initial_learning_rate: float
    objective: list = field(default_factory=list)
    best_objective: list = field(default_factory=list)
    learning_rate: list = field(default_factory=list)
    rejected: list = field(default_factory=list)
    validation: Optional[list] = None
    initial_validation: Optional[float] = None
    stop_epoch: int = 0
    best_epoch: Optional[int] = None
    selected_start: int = 0
    start_objectives: list = field(default_factory=list)
    final_objective: float = math.nan


class Batch(NamedTuple):
    inputs: np.ndarray
    targets: np.ndarray


def as_batch(data) -> Batch:
    """Accept a :class:`Batch` or a sequence of ``(input, target)`` pairs."""
    if isinstance(data, Batch):
        inputs, targets = data
    else:
        data = list(data)
        if not data:
            raise ContractError("batch is empty")
        inputs = [x for x, _ in data]
        targets = [t for _, t in data]
    inputs = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    targets = np.atleast_2d(np.asarray(targets, dtype=np.float64))
    if inputs.shape[0] == 0 or inputs.shape[0] != targets.shape[0]:
        raise ContractError(f"batch has {inputs.shape[0]} inputs and {targets.shape[0]} targets")
    return Batch(inputs, targets)


def make_targets(subject_id: int, num_subjects: int) -> np.ndarray:
    if not 1 <= subject_id <= num_subjects:
        raise ContractError(f"subject {subject_id} outside 1..{num_subjects}")
    targets = -np.ones(num_subjects)
    targets[subject_id - 1] = 1.0
    return targets


def make_batch(features, subject_ids, num_subjects: int) -> Batch:
    """Coefficient rows paired with their one-of-``num_subjects`` ±1 targets."""
    targets = np.array([make_targets(int(s), num_subjects) for s in subject_ids])
    return as_batch(Batch(np.asarray(features, dtype=np.float64), targets))


def init_network(layer_sizes: Sequence[int], seed: int) -> MlpNetwork:
    """Weights uniform on ``±1/sqrt(fan_in)``, zero biases."""
    layer_sizes = tuple(int(s) for s in layer_sizes)
    if len(layer_sizes) < 2 or min(layer_sizes) < 1:
        raise ContractError(f"invalid layer sizes {layer_sizes}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        bound = 1.0 / math.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MlpNetwork(layer_sizes, weights, biases)


def with_standardization(net: MlpNetwork, inputs) -> MlpNetwork:
    """Copy of ``net`` that standardizes each input to zero mean, unit variance over ``inputs``."""
    inputs = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    scale = inputs.std(axis=0)
    scale[scale == 0] = 1.0
    out = net.copy()
    out.input_shift = inputs.mean(axis=0)
    out.input_scale = scale
    return out


def _activations(net: MlpNetwork, inputs: np.ndarray) -> list:
    if inputs.shape[-1] != net.layer_sizes[0]:
        raise ContractError(
            f"input of length {inputs.shape[-1]} does not match network input size {net.layer_sizes[0]}"
        )
    a = (inputs - net.input_shift) / net.input_scale
    layers = [a]
    for w, b in zip(net.weights, net.biases):
        a = np.tanh(a @ w.T + b)
        layers.append(a)
    return layers


def forward(net: MlpNetwork, x) -> np.ndarray:
    """Network output for one input vector, or row-wise for a matrix of inputs."""
    x = np.asarray(x, dtype=np.float64)
    return _activations(net, x)[-1]


def mse(targets, outputs) -> float:
    targets = np.asarray(targets, dtype=np.float64)
    outputs = np.asarray(outputs, dtype=np.float64)
    if targets.shape != outputs.shape:
        raise ContractError(f"targets {targets.shape} and outputs {outputs.shape} differ in shape")
    return float(np.mean((targets - outputs) ** 2))


def weight_penalty(net: MlpNetwork) -> float:
    with np.errstate(over="ignore"):
        return sum(float(np.sum(w * w)) for w in net.weights) / net.parameter_count


def msereg(gamma: float, mse_value: float, net: MlpNetwork) -> float:
    if not 0 <= gamma <= 1:
        raise ContractError("gamma must lie in [0, 1]")
    if gamma == 1:
        return mse_value
    return gamma * mse_value + (1 - gamma) * weight_penalty(net)


def objective(net: MlpNetwork, batch, gamma: float) -> float:
    batch = as_batch(batch)
    return msereg(gamma, mse(batch.targets, forward(net, batch.inputs)), net)


def gradients(net: MlpNetwork, batch, gamma: float) -> tuple[list, list]:
    """Exact gradient of the msereg objective: ``(weight_grads, bias_grads)``."""
    batch = as_batch(batch)
    layers = _activations(net, batch.inputs)
    n = net.parameter_count
    delta = gamma * 2.0 * (layers[-1] - batch.targets) / batch.targets.size
    weight_grads, bias_grads = [], []
    for k in range(len(net.weights) - 1, -1, -1):
        delta = delta * (1.0 - layers[k + 1] ** 2)
        weight_grads.append(delta.T @ layers[k] + (1 - gamma) * 2.0 * net.weights[k] / n)
        bias_grads.append(delta.sum(axis=0))
        delta = delta @ net.weights[k]
    return weight_grads[::-1], bias_grads[::-1]


def _step(net: MlpNetwork, velocity: list) -> MlpNetwork:
    out = net.copy()
    k = len(net.weights)
    out.weights = [w + v for w, v in zip(net.weights, velocity[:k])]
    out.biases = [b + v for b, v in zip(net.biases, velocity[k:])]
    return out


def _checked(value: float, epoch: int) -> float:
    if not math.isfinite(value):
        raise DivergenceError(epoch)
    return value


def _descend(net, batch, config, validation=None):
    """Shared loop for :func:`train` and :func:`train_early_stopping`."""
    gamma = config.gamma
    lr = config.initial_learning_rate
    current = net.copy()
    velocity = [np.zeros_like(p) for p in (*current.weights, *current.biases)]
    obj = _checked(objective(current, batch, gamma), 0)
    report = TrainReport(initial_objective=obj, initial_learning_rate=lr)

    patience = config.early_stopping.patience if validation is not None else None
    if validation is not None:
        report.validation = []
        best_val = mse(validation.targets, forward(current, validation.inputs))
        report.initial_validation = best_val
        best_net, report.best_epoch = current.copy(), 0

    best = obj
    for epoch in range(1, config.epochs + 1):
        weight_grads, bias_grads = gradients(current, batch, gamma)
        velocity = [
            config.momentum * v - lr * g
            for v, g in zip(velocity, (*weight_grads, *bias_grads))
        ]
        trial = _step(current, velocity)
        new_obj = _checked(objective(trial, batch, gamma), epoch)
        if new_obj > obj * config.max_error_growth:
            lr *= config.lr_decrease
            velocity = [np.zeros_like(v) for v in velocity]
            report.rejected.append(True)
        else:
            if new_obj < obj:
                lr *= config.lr_increase
            current, obj = trial, new_obj
            report.rejected.append(False)
        best = min(best, obj)
        report.objective.append(obj)
        report.best_objective.append(best)
        report.learning_rate.append(lr)
        report.stop_epoch = epoch

        if validation is not None:
            val = mse(validation.targets, forward(current, validation.inputs))
            report.validation.append(val)
            if val < best_val:
                best_val, best_net, report.best_epoch = val, current.copy(), epoch
            elif epoch - report.best_epoch >= patience:
                break

    result = best_net if validation is not None else current
    report.final_objective = objective(result, batch, gamma)
    return result, report


def train(net: MlpNetwork, train_data, config: TrainConfig) -> tuple[MlpNetwork, TrainReport]:
    """Full-batch momentum descent with adaptive rate for ``config.epochs`` epochs.

    An epoch whose objective grows by more than ``max_error_growth`` is
    rejected: parameters are restored, the velocity is cleared and the rate
    shrinks by ``lr_decrease``. Any decrease multiplies the rate by
    ``lr_increase``.
    """
    return _descend(net, as_batch(train_data), config)


def train_early_stopping(net, train_data, validation_data, config: TrainConfig):
    """As :func:`train`, returning the parameters of the best validation epoch.

    Stops once the validation MSE has not improved for
    ``config.early_stopping.patience`` consecutive epochs.
    """
    if config.early_stopping is None:
        raise ContractError("config.early_stopping must be set")
    return _descend(net, as_batch(train_data), config, as_batch(validation_data))


def train_multistart(layer_sizes, train_data, config: TrainConfig, validation_data=None):
    """Train from seeds ``seed, seed+1, ...`` and keep the lowest final objective.

    Each start's network standardizes inputs with statistics of the training
    batch. Early stopping is used when both ``config.early_stopping`` and
    ``validation_data`` are given.
    """
    batch = as_batch(train_data)
    use_validation = config.early_stopping is not None and validation_data is not None
    best = None
    finals = []
    for start in range(config.multi_starts):
        net = with_standardization(init_network(layer_sizes, config.seed + start), batch.inputs)
        if use_validation:
            trained, report = train_early_stopping(net, batch, validation_data, config)
        else:
            trained, report = train(net, batch, config)
        finals.append(report.final_objective)
        if best is None or report.final_objective < best[1].final_objective:
            report.selected_start = start
            best = (trained, report)
    best[1].start_objectives = finals
    return best


def classify(net: MlpNetwork, probe: FeatureVector) -> tuple[int, np.ndarray]:
    """Subject at the maximal output (lowest index on ties) and the score vector."""
    coefficients = np.asarray(getattr(probe, "coefficients", probe), dtype=np.float64)
    if coefficients.shape != (net.layer_sizes[0],):
        raise ContractError(
            f"probe has {coefficients.size} coefficients, network expects {net.layer_sizes[0]}"
        )
    scores = forward(net, coefficients)
    return int(np.argmax(scores)) + 1, scores


class MlpClassifier:
    label = "mlp"

    def __init__(self, net: MlpNetwork):
        self.net = net

    def identify(self, probe: FeatureVector) -> int:
        return classify(self.net, probe)[0]


def _line(values) -> str:
    return " ".join(format(float(v), ".17g") for v in np.ravel(values))


def save_network(net: MlpNetwork, path, gamma: float = math.nan) -> None:
    """Flat text: header, gamma, standardization, weight rows per layer, then biases."""
    lines = [
        f"mlp {FORMAT_VERSION} " + " ".join(str(s) for s in net.layer_sizes),
        f"gamma {format(float(gamma), '.17g')}",
        _line(net.input_shift),
        _line(net.input_scale),
    ]
    for w in net.weights:
        lines.extend(_line(row) for row in w)
    lines.extend(_line(b) for b in net.biases)
    Path(path).write_text("\n".join(lines) + "\n")


def load_network(path) -> tuple[MlpNetwork, float]:
    """Return the stored network and its gamma."""
    lines = Path(path).read_text().splitlines()
    header = lines[0].split() if lines else []
    if len(header) < 4 or header[0] != "mlp" or int(header[1]) != FORMAT_VERSION:
        raise ContractError(f"{path}: not a version {FORMAT_VERSION} network file")
    sizes = tuple(int(s) for s in header[2:])
    gamma = float(lines[1].split()[1])
    rows = iter(lines[2:])

    def floats(expected):
        values = np.array([float(v) for v in next(rows).split()])
        if values.size != expected:
            raise ContractError(f"{path}: expected {expected} values, found {values.size}")
        return values

    try:
        shift, scale = floats(sizes[0]), floats(sizes[0])
        weights = [
            np.array([floats(fan_in) for _ in range(fan_out)]).reshape(fan_out, fan_in)
            for fan_in, fan_out in zip(sizes[:-1], sizes[1:])
        ]
        biases = [floats(fan_out) for fan_out in sizes[1:]]
    except StopIteration:
        raise ContractError(f"{path}: truncated network file") from None
    return MlpNetwork(sizes, weights, biases, shift, scale), gamma
