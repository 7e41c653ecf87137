"""Numerically stable softmax, categorical sampling, and entropy."""

from __future__ import annotations

import numpy as np

from ..errors import UsageError

PROB_SUM_TOL = 1e-6


def softmax(logits: np.ndarray) -> np.ndarray:
    """Probabilities for 1-d logits, computed with max-subtraction."""
    logits = np.asarray(logits, dtype=np.float64)
    if logits.ndim != 1 or logits.size < 1:
        raise UsageError(f"softmax expects non-empty 1-d logits, got shape {logits.shape}")
    shifted = logits - logits.max()
    e = np.exp(shifted)
    return e / e.sum()


def log_softmax_rows(logits: np.ndarray) -> np.ndarray:
    """Row-wise log softmax for a (N, K) logit matrix."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def _check_probs(probs: np.ndarray) -> np.ndarray:
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 1 or probs.size < 1:
        raise UsageError(f"expected non-empty 1-d probability vector, got shape {probs.shape}")
    if np.any(probs < 0):
        raise UsageError("probability vector has negative entries")
    total = probs.sum()
    if abs(total - 1.0) > PROB_SUM_TOL:
        raise UsageError(f"probability vector sums to {total}, not 1")
    return probs


def categorical_sample(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Draw an index i with probability probs[i]."""
    probs = _check_probs(probs)
    cdf = np.cumsum(probs)
    idx = int(np.searchsorted(cdf, rng.random(), side="right"))
    return min(idx, probs.size - 1)


def categorical_sample_rows(probs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Sample one index per row of a (N, K) probability matrix.

    Consumes exactly N uniforms from ``rng``, in row order.
    """
    cdf = np.cumsum(probs, axis=1)
    u = rng.random(probs.shape[0])
    idx = (u[:, None] >= cdf).sum(axis=1)
    return np.minimum(idx, probs.shape[1] - 1)


def categorical_entropy(probs: np.ndarray) -> float:
    """Entropy -sum(p ln p) in nats, with 0 ln 0 := 0."""
    probs = _check_probs(probs)
    nz = probs[probs > 0]
    return float(-(nz * np.log(nz)).sum())


def entropy_rows(probs: np.ndarray) -> np.ndarray:
    """Row-wise entropy of a (N, K) probability matrix (no zero entries expected)."""
    return -(probs * np.log(probs)).sum(axis=1)
