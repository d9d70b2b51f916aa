"""Binary human-vs-spoof classifiers over fused normalized i-vectors.

Two interchangeable back-ends: a linear SVM trained by dual coordinate
descent (primary) and a small DBN pretrained layer-wise with contrastive
divergence and fine-tuned by backpropagation. Both produce a real-valued
score with the same polarity: higher means more human-like.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.special import expit

from ._kernels import svm_dcd_epoch

__all__ = [
    "LinearSvmModel",
    "RbmLayer",
    "DbnModel",
    "Score",
    "svm_train",
    "svm_score",
    "rbm_pretrain",
    "dbn_train",
    "dbn_score",
    "dbn_loss_and_grads",
]


@dataclass(frozen=True)
class LinearSvmModel:
    """Separating hyperplane in normalized i-vector space."""

    weights: np.ndarray
    bias: float
    c_param: float


@dataclass(frozen=True)
class RbmLayer:
    """One pretrained restricted Boltzmann machine.

    gaussian marks a real-valued (Gaussian) visible layer; hidden units
    are always logistic. recon_errors traces the per-epoch mean squared
    reconstruction error observed during contrastive divergence.
    """

    w: np.ndarray            # (n_visible, n_hidden)
    b_hidden: np.ndarray     # (n_hidden,)
    b_visible: np.ndarray    # (n_visible,)
    gaussian: bool
    recon_errors: np.ndarray = field(default_factory=lambda: np.empty(0))


@dataclass(frozen=True)
class DbnModel:
    """Sigmoid hidden layers plus a 2-way softmax head.

    Class index 1 is human, index 0 is spoof.
    """

    layers: List[Tuple[np.ndarray, np.ndarray]]
    head: Tuple[np.ndarray, np.ndarray]


@dataclass(frozen=True)
class Score:
    utt_id: str
    value: float


def _check_labels(y: np.ndarray):
    vals = set(np.unique(y).tolist())
    if not vals <= {-1.0, 1.0}:
        raise ValueError("labels must be +1 (human) or -1 (spoof)")
    if len(vals) < 2:
        raise ValueError("training data contains a single class")


def svm_train(x: np.ndarray, y: np.ndarray, c_param: float = 1.0,
              seed: int = 0, max_epochs: int = 1000,
              human_weight: float = 1.0) -> LinearSvmModel:
    """Train a linear SVM: min 1/2 ||w||^2 + C sum max(0, 1 - y (w.x + b)).

    The bias is carried as an augmented constant-1 feature, and the dual
    problem is solved by coordinate descent with a per-epoch random sweep
    order; training stops when the duality gap drops below 1e-6 * N.
    human_weight scales C for the +1 class (imbalance control, default
    off).
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ValueError("x must be (N, D) with one label per row")
    if x.shape[0] < 2:
        raise ValueError("need at least 2 training points")
    if not np.isfinite(x).all():
        raise ValueError("non-finite features")
    if c_param <= 0:
        raise ValueError("c_param must be positive")
    _check_labels(y)

    n = x.shape[0]
    xa = np.concatenate([x, np.ones((n, 1))], axis=1)
    qdiag = (xa ** 2).sum(axis=1)
    cost = np.where(y > 0, c_param * human_weight, c_param)
    alpha = np.zeros(n)
    w = np.zeros(xa.shape[1])
    rng = np.random.default_rng(seed)
    tol = 1e-6 * n
    for _ in range(max_epochs):
        order = rng.permutation(n)
        svm_dcd_epoch(xa, y, qdiag, cost, alpha, w, order)
        margins = 1.0 - y * (xa @ w)
        primal = 0.5 * w @ w + cost @ np.maximum(margins, 0.0)
        dual = alpha.sum() - 0.5 * w @ w
        if primal - dual < tol:
            break
    return LinearSvmModel(weights=w[:-1].copy(), bias=float(w[-1]),
                          c_param=float(c_param))


def svm_score(m: LinearSvmModel, x: np.ndarray):
    """Uncalibrated margin w.x + b; higher = human. Accepts a vector or
    a matrix of row vectors."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != m.weights.shape[0]:
        raise ValueError(
            f"dimension mismatch: got {x.shape[-1]}, model has "
            f"{m.weights.shape[0]}")
    out = x @ m.weights + m.bias
    return float(out) if x.ndim == 1 else out


# -- DBN ----------------------------------------------------------------------


def _cd1_epochs(x, n_hidden, epochs, lr, rng, batch_size, gaussian):
    n_visible = x.shape[1]
    w = 0.01 * rng.standard_normal((n_visible, n_hidden))
    b_h = np.zeros(n_hidden)
    b_v = np.zeros(n_visible)
    errors = np.empty(epochs)
    for epoch in range(epochs):
        order = rng.permutation(x.shape[0])
        sq_sum = 0.0
        for start in range(0, x.shape[0], batch_size):
            vb = x[order[start:start + batch_size]]
            h1p = expit(vb @ w + b_h)
            h1s = (rng.random(h1p.shape) < h1p).astype(np.float64)
            if gaussian:
                v2 = h1s @ w.T + b_v
            else:
                v2 = expit(h1s @ w.T + b_v)
            h2p = expit(v2 @ w + b_h)
            b = vb.shape[0]
            w += lr * (vb.T @ h1p - v2.T @ h2p) / b
            b_h += lr * (h1p - h2p).mean(axis=0)
            b_v += lr * (vb - v2).mean(axis=0)
            sq_sum += ((vb - v2) ** 2).sum()
        errors[epoch] = sq_sum / x.size
    return w, b_h, b_v, errors


def rbm_pretrain(x: np.ndarray, layer_dims: List[int], epochs: int = 10,
                 lr: float = 0.01, seed: int = 0,
                 batch_size: int = 64) -> List[RbmLayer]:
    """Layer-wise CD-1 pretraining.

    The first RBM has Gaussian (real-valued) visible units for i-vector
    input; deeper RBMs are Bernoulli-Bernoulli and consume the previous
    layer's hidden activation probabilities. epochs=0 returns the seeded
    random initialization untouched.
    """
    x = np.asarray(x, dtype=np.float64)
    if not np.isfinite(x).all():
        raise ValueError("non-finite inputs")
    if not layer_dims:
        raise ValueError("layer_dims must be nonempty")
    rng = np.random.default_rng(seed)
    layers = []
    cur = x
    for depth, n_hidden in enumerate(layer_dims):
        gaussian = depth == 0
        w, b_h, b_v, errors = _cd1_epochs(
            cur, n_hidden, epochs, lr, rng, batch_size, gaussian)
        layers.append(RbmLayer(w=w, b_hidden=b_h, b_visible=b_v,
                               gaussian=gaussian, recon_errors=errors))
        cur = expit(cur @ w + b_h)
    return layers


def _forward(layers, head, x):
    acts = [x]
    for w, b in layers:
        acts.append(expit(acts[-1] @ w + b))
    logits = acts[-1] @ head[0] + head[1]
    logits = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(logits).sum(axis=1, keepdims=True))
    return acts, logits - log_z


def dbn_loss_and_grads(layers, head, x, y01):
    """Mean cross-entropy and its gradients for the full network.

    y01 holds class indices (0 = spoof, 1 = human). Returns
    (loss, layer_grads, head_grad) with grads shaped like the parameters.
    """
    n = x.shape[0]
    acts, log_p = _forward(layers, head, x)
    loss = -log_p[np.arange(n), y01].mean()
    delta = np.exp(log_p)
    delta[np.arange(n), y01] -= 1.0
    delta /= n
    head_grad = (acts[-1].T @ delta, delta.sum(axis=0))
    back = delta @ head[0].T
    layer_grads = [None] * len(layers)
    for i in range(len(layers) - 1, -1, -1):
        h = acts[i + 1]
        local = back * h * (1.0 - h)
        layer_grads[i] = (acts[i].T @ local, local.sum(axis=0))
        back = local @ layers[i][0].T
    return loss, layer_grads, head_grad


def dbn_train(pre: List[RbmLayer], x: np.ndarray, y: np.ndarray,
              epochs: int = 50, lr: float = 0.1, seed: int = 0,
              batch_size: int = 64) -> DbnModel:
    """Fine-tune pretrained layers plus a fresh softmax head by seeded
    mini-batch gradient descent on cross-entropy."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape[0] != y.shape[0]:
        raise ValueError("one label per row required")
    _check_labels(y)
    if pre and pre[0].w.shape[0] != x.shape[1]:
        raise ValueError(
            f"pretrained input dim {pre[0].w.shape[0]} does not match "
            f"data dim {x.shape[1]}")
    y01 = (y > 0).astype(np.int64)
    layers = [(layer.w.copy(), layer.b_hidden.copy()) for layer in pre]
    rng = np.random.default_rng(seed)
    top_dim = layers[-1][0].shape[1] if layers else x.shape[1]
    head = (0.01 * rng.standard_normal((top_dim, 2)), np.zeros(2))
    for _ in range(epochs):
        order = rng.permutation(x.shape[0])
        for start in range(0, x.shape[0], batch_size):
            idx = order[start:start + batch_size]
            _, layer_grads, head_grad = dbn_loss_and_grads(
                layers, head, x[idx], y01[idx])
            layers = [(w - lr * gw, b - lr * gb)
                      for (w, b), (gw, gb) in zip(layers, layer_grads)]
            head = (head[0] - lr * head_grad[0], head[1] - lr * head_grad[1])
    return DbnModel(layers=layers, head=head)


def dbn_score(m: DbnModel, x: np.ndarray):
    """Symmetric log-odds log p(human|x) - log p(spoof|x); higher = human.
    Inference is deterministic: hidden units pass probabilities, nothing
    is sampled. Accepts a vector or a matrix of row vectors."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    xb = x[None, :] if single else x
    in_dim = m.layers[0][0].shape[0] if m.layers else m.head[0].shape[0]
    if xb.shape[1] != in_dim:
        raise ValueError(
            f"dimension mismatch: got {xb.shape[1]}, model expects {in_dim}")
    _, log_p = _forward(m.layers, m.head, xb)
    out = log_p[:, 1] - log_p[:, 0]
    return float(out[0]) if single else out
