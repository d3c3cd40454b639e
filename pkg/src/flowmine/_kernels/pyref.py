"""NumPy reference implementations of the encoder hot kernels.

This backend defines the numeric contract; the compiled backend in
``_core.pyx`` implements the same signatures and must agree to floating
point round-off. Everything is float64, row-major, 2-D.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

_GELU_C = np.sqrt(2.0 / np.pi)
_GELU_A = 0.044715


def masked_softmax(scores: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Row-wise softmax over columns where mask is 1; zeros elsewhere."""
    neg = np.where(mask.astype(bool), scores, -np.inf)
    row_max = np.max(neg, axis=1, keepdims=True)
    # Rows that are fully masked would give -inf max; keep them finite.
    row_max = np.where(np.isfinite(row_max), row_max, 0.0)
    e = np.exp(neg - row_max)
    e = np.where(mask.astype(bool), e, 0.0)
    denom = e.sum(axis=1, keepdims=True)
    denom = np.where(denom == 0.0, 1.0, denom)
    return e / denom


def softmax_backward(probs: np.ndarray, dprobs: np.ndarray) -> np.ndarray:
    """Backprop through row-wise softmax given its output."""
    inner = np.sum(dprobs * probs, axis=1, keepdims=True)
    return probs * (dprobs - inner)


def layernorm_forward(x: np.ndarray, gain: np.ndarray, bias: np.ndarray, eps: float):
    mean = x.mean(axis=1, keepdims=True)
    var = np.mean((x - mean) ** 2, axis=1, keepdims=True)
    rstd = 1.0 / np.sqrt(var + eps)
    y = (x - mean) * rstd * gain + bias
    return y, mean[:, 0].copy(), rstd[:, 0].copy()


def layernorm_backward(
    x: np.ndarray,
    mean: np.ndarray,
    rstd: np.ndarray,
    gain: np.ndarray,
    dy: np.ndarray,
):
    xhat = (x - mean[:, None]) * rstd[:, None]
    dgain = np.sum(dy * xhat, axis=0)
    dbias = np.sum(dy, axis=0)
    dxhat = dy * gain
    m1 = dxhat.mean(axis=1, keepdims=True)
    m2 = np.mean(dxhat * xhat, axis=1, keepdims=True)
    dx = rstd[:, None] * (dxhat - m1 - xhat * m2)
    return dx, dgain, dbias


def gelu_forward(x: np.ndarray) -> np.ndarray:
    inner = _GELU_C * (x + _GELU_A * x**3)
    return 0.5 * x * (1.0 + np.tanh(inner))


def gelu_backward(x: np.ndarray, dy: np.ndarray) -> np.ndarray:
    inner = _GELU_C * (x + _GELU_A * x**3)
    t = np.tanh(inner)
    dinner = _GELU_C * (1.0 + 3.0 * _GELU_A * x**2)
    return dy * (0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * dinner)


def softmax_xent(logits: np.ndarray, labels: np.ndarray, ignore: int):
    """Summed cross-entropy and raw logit gradients at labeled rows.

    Returns (loss_sum, labeled_count, dlogits) where dlogits holds
    softmax(row) - onehot(label) at labeled rows and zeros elsewhere;
    the caller applies the 1/count scaling.
    """
    labeled = labels != ignore
    dlogits = np.zeros_like(logits)
    if not np.any(labeled):
        return 0.0, 0, dlogits
    rows = logits[labeled]
    row_max = rows.max(axis=1, keepdims=True)
    e = np.exp(rows - row_max)
    denom = e.sum(axis=1, keepdims=True)
    probs = e / denom
    picked = labels[labeled]
    logp = (rows - row_max)[np.arange(rows.shape[0]), picked] - np.log(denom[:, 0])
    grad = probs
    grad[np.arange(rows.shape[0]), picked] -= 1.0
    dlogits[labeled] = grad
    return float(-logp.sum()), int(labeled.sum()), dlogits
