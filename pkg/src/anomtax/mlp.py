"""Feedforward network: one tanh hidden layer, tanh outputs, mean squared
error, trained full-batch by scaled conjugate gradient with optional early
stopping on a validation set.

All weights and biases live in one flat genome vector so a genetic
algorithm can evolve initializations.  Canonical ordering: hidden-layer
weights row-major, hidden biases, output-layer weights row-major, output
biases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels

__all__ = [
    "Topology",
    "TrainingConfig",
    "TrainedModel",
    "TrainingDivergedError",
    "init_weights",
    "unpack_weights",
    "pack_weights",
    "forward",
    "forward_batch",
    "mse_and_gradient",
    "train_scg",
    "predict_class",
    "predict_batch",
    "one_hot",
    "save_model",
    "load_model",
]

SCG_CONVERGENCE_TOL = 1e-10


class TrainingDivergedError(RuntimeError):
    """Raised when the training loss stops being finite."""


@dataclass(frozen=True)
class Topology:
    """Layer sizes; the defaults are 2 inputs, 10 hidden, 4 outputs."""

    input_size: int = 2
    hidden_size: int = 10
    output_size: int = 4

    def __post_init__(self):
        if min(self.input_size, self.hidden_size, self.output_size) < 1:
            raise ValueError("all layer sizes must be >= 1")

    @property
    def genome_length(self) -> int:
        return ((self.input_size + 1) * self.hidden_size
                + (self.hidden_size + 1) * self.output_size)


@dataclass(frozen=True)
class TrainingConfig:
    max_epochs: int = 200
    patience: int = 6
    sigma0: float = 5e-5
    lambda0: float = 5e-7
    goal: float = 0.0

    def __post_init__(self):
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if self.sigma0 <= 0 or self.lambda0 <= 0:
            raise ValueError("sigma0 and lambda0 must be > 0")


@dataclass
class TrainedModel:
    topology: Topology
    weights: np.ndarray
    train_mse: list = field(default_factory=list)
    val_mse: list | None = None
    stop_reason: str = "max_epochs"

    @property
    def epochs(self) -> int:
        return len(self.train_mse)


def init_weights(topology: Topology, source) -> np.ndarray:
    """Initial genome: uniform draws in [0, 1] from a Generator, or an
    injected vector returned verbatim."""
    if isinstance(source, np.random.Generator):
        return source.random(topology.genome_length)
    vec = np.array(source, dtype=np.float64)
    if vec.shape != (topology.genome_length,):
        raise ValueError(
            f"injected weights have length {vec.size}, topology needs "
            f"{topology.genome_length}"
        )
    return vec


def unpack_weights(weights: np.ndarray, topology: Topology):
    """Flat genome -> (w1, b1, w2, b2) views in canonical order."""
    n_in, n_hid, n_out = (topology.input_size, topology.hidden_size,
                          topology.output_size)
    if weights.shape != (topology.genome_length,):
        raise ValueError(
            f"genome length {weights.size} != {topology.genome_length}"
        )
    i = 0
    w1 = weights[i:i + n_hid * n_in].reshape(n_hid, n_in)
    i += n_hid * n_in
    b1 = weights[i:i + n_hid]
    i += n_hid
    w2 = weights[i:i + n_out * n_hid].reshape(n_out, n_hid)
    i += n_out * n_hid
    b2 = weights[i:]
    return w1, b1, w2, b2


def pack_weights(w1, b1, w2, b2) -> np.ndarray:
    return np.concatenate([w1.ravel(), b1, w2.ravel(), b2])


def forward(weights: np.ndarray, topology: Topology, x) -> np.ndarray:
    """Network output for one input vector; components always in (-1, 1)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (topology.input_size,):
        raise ValueError(
            f"input has shape {x.shape}, expected ({topology.input_size},)"
        )
    return forward_batch(weights, topology, x[None, :])[0]


def forward_batch(weights: np.ndarray, topology: Topology, x) -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != topology.input_size:
        raise ValueError(
            f"batch has shape {x.shape}, expected (n, {topology.input_size})"
        )
    w1, b1, w2, b2 = unpack_weights(np.ascontiguousarray(weights), topology)
    return _kernels.mlp_forward(w1, b1, w2, b2, x)


def mse_and_gradient(weights: np.ndarray, topology: Topology, x, t):
    """Mean squared error over all outputs and examples, plus its exact
    gradient with respect to the flat genome (reverse-mode)."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    t = np.ascontiguousarray(t, dtype=np.float64)
    if x.shape[0] == 0:
        raise ValueError("empty batch")
    if x.ndim != 2 or x.shape[1] != topology.input_size:
        raise ValueError(f"bad input shape {x.shape}")
    if t.shape != (x.shape[0], topology.output_size):
        raise ValueError(f"bad target shape {t.shape}")
    w1, b1, w2, b2 = unpack_weights(np.ascontiguousarray(weights), topology)
    loss, gw1, gb1, gw2, gb2 = _kernels.mlp_loss_grad(w1, b1, w2, b2, x, t)
    return float(loss), pack_weights(gw1, gb1, gw2, gb2)


def train_scg(weights0, topology: Topology, x_train, t_train,
              x_val=None, t_val=None,
              cfg: TrainingConfig = TrainingConfig()) -> TrainedModel:
    """Scaled conjugate gradient with Levenberg-style damping.

    One epoch is one candidate step along the current conjugate direction;
    curvature along the direction is estimated by a finite difference of
    gradients, the step is accepted only if it lowers the training error,
    and the direction restarts every genome_length accepted steps.

    Stops on: training MSE at or below ``goal``; ``patience`` consecutive
    validation-error increases over the best seen (the best-validation
    weights are restored); step size and gradient both below 1e-10; or
    ``max_epochs``.  An empty validation set disables early stopping.
    """
    x_train = np.ascontiguousarray(x_train, dtype=np.float64)
    t_train = np.ascontiguousarray(t_train, dtype=np.float64)
    if x_train.shape[0] == 0:
        raise ValueError("empty training set")
    has_val = x_val is not None and len(x_val) > 0
    if has_val:
        x_val = np.ascontiguousarray(x_val, dtype=np.float64)
        t_val = np.ascontiguousarray(t_val, dtype=np.float64)

    w = init_weights(topology, weights0).copy()
    n_params = w.size

    def loss_grad(vec):
        return mse_and_gradient(vec, topology, x_train, t_train)

    def val_loss(vec):
        y = forward_batch(vec, topology, x_val)
        err = y - t_val
        return float((err * err).sum() / err.size)

    f, grad = loss_grad(w)
    if not math.isfinite(f):
        raise TrainingDivergedError("non-finite training loss at epoch 0")
    r = -grad
    p = r.copy()
    success = True
    lam = cfg.lambda0
    lam_bar = 0.0
    delta = 0.0
    accepted_steps = 0
    last_step_norm = math.inf

    train_hist: list[float] = []
    val_hist: list[float] | None = [] if has_val else None
    best_val = math.inf
    best_w = None
    fails = 0
    stop = "max_epochs"

    for epoch in range(1, cfg.max_epochs + 1):
        r_norm2 = float(r @ r)
        if r_norm2 == 0.0:
            stop = "scg_converged"
            break
        p_norm2 = float(p @ p)
        mu = float(p @ r)
        if mu <= 0 or p_norm2 == 0.0:
            # direction lost descent; restart with steepest descent
            p = r.copy()
            p_norm2 = r_norm2
            mu = r_norm2
            success = True
        if success:
            sigma = cfg.sigma0 / math.sqrt(p_norm2)
            _, grad_sigma = loss_grad(w + sigma * p)
            delta = float(p @ (grad_sigma - grad)) / sigma
        delta += (lam - lam_bar) * p_norm2
        if delta <= 0:
            lam_bar = 2.0 * (lam - delta / p_norm2)
            delta = -delta + lam * p_norm2
            lam = lam_bar
        alpha = mu / delta
        f_cand, grad_cand = loss_grad(w + alpha * p)
        if not math.isfinite(f_cand):
            raise TrainingDivergedError(
                f"non-finite training loss at epoch {epoch}")
        comparison = 2.0 * delta * (f - f_cand) / (mu * mu)
        if comparison >= 0:
            w = w + alpha * p
            f = f_cand
            r_new = -grad_cand
            grad = grad_cand
            lam_bar = 0.0
            success = True
            accepted_steps += 1
            last_step_norm = abs(alpha) * math.sqrt(p_norm2)
            if accepted_steps % n_params == 0:
                p = r_new.copy()
            else:
                beta = float(r_new @ r_new - r_new @ r) / mu
                p = r_new + beta * p
            r = r_new
            if comparison >= 0.75:
                lam *= 0.25
        else:
            lam_bar = lam
            success = False
        if comparison < 0.25:
            lam += delta * (1.0 - comparison) / p_norm2

        train_hist.append(f)
        if has_val:
            fv = val_loss(w)
            val_hist.append(fv)
            if fv < best_val:
                best_val = fv
                best_w = w.copy()
                fails = 0
            elif fv > best_val:
                fails += 1

        if f <= cfg.goal:
            stop = "goal"
            break
        if has_val and fails >= cfg.patience:
            stop = "patience"
            w = best_w
            break
        if (last_step_norm < SCG_CONVERGENCE_TOL
                and float(np.sqrt(r @ r)) < SCG_CONVERGENCE_TOL):
            stop = "scg_converged"
            break

    return TrainedModel(topology, w, train_hist, val_hist, stop)


def predict_class(model: TrainedModel, x) -> int:
    """Index of the strongest output neuron; ties go to the lowest index."""
    return int(np.argmax(forward(model.weights, model.topology, x)))


def predict_batch(model: TrainedModel, x) -> np.ndarray:
    return forward_batch(model.weights, model.topology, x).argmax(axis=1)


def one_hot(class_ids, num_classes: int) -> np.ndarray:
    """Targets with a 1 at the class index and 0 elsewhere."""
    class_ids = np.asarray(class_ids, dtype=np.int64)
    if class_ids.size and not (0 <= class_ids.min()
                               and class_ids.max() < num_classes):
        raise ValueError("class id outside [0, num_classes)")
    out = np.zeros((class_ids.size, num_classes))
    out[np.arange(class_ids.size), class_ids] = 1.0
    return out


def save_model(model: TrainedModel, path) -> None:
    """Text format: one topology line, then one weight per line in
    canonical genome order.  Floats are written with repr so the
    round-trip is bit-exact."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{model.topology.input_size} {model.topology.hidden_size} "
                 f"{model.topology.output_size}\n")
        for v in model.weights:
            fh.write(f"{float(v)!r}\n")


def load_model(path) -> TrainedModel:
    with open(path, encoding="utf-8") as fh:
        sizes = fh.readline().split()
        if len(sizes) != 3:
            raise ValueError(f"{path}: bad topology line")
        topology = Topology(*(int(s) for s in sizes))
        weights = np.array([float(line) for line in fh if line.strip()])
    if weights.shape != (topology.genome_length,):
        raise ValueError(
            f"{path}: {weights.size} weights, topology needs "
            f"{topology.genome_length}"
        )
    return TrainedModel(topology, weights, stop_reason="loaded")
