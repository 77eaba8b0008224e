"""Linear-chain CRF with a START row, Hamming cost augmentation and Viterbi.

Conventions: ``emissions`` is (T, K); ``A`` is (K + 1, K) where row ``K`` holds
the START -> tag scores. There is no STOP transition.
"""

import numpy as np

from .numeric import logsumexp


def _check(emissions, A):
    emissions = np.asarray(emissions, dtype=np.float64)
    if emissions.ndim != 2 or emissions.shape[0] < 1:
        raise ValueError("emissions must be a non-empty (T, K) matrix")
    K = emissions.shape[1]
    if A.shape != (K + 1, K):
        raise ValueError(f"transition matrix must be {(K + 1, K)}, got {A.shape}")
    return emissions, K


def emission_scores(features, w):
    """Lattice emissions ``features @ w.T`` for features (T, D) and w (K, D)."""
    return features @ w.T


def hamming_cost(y, y_other, scale=1.0):
    if len(y) != len(y_other):
        raise ValueError("tag sequences differ in length")
    return scale * float(np.sum(np.asarray(y) != np.asarray(y_other)))


def score_sequence(emissions, y, A):
    """Sum of emission scores plus transitions, starting from START."""
    emissions, K = _check(emissions, A)
    y = np.asarray(y, dtype=np.intp)
    if y.shape != (emissions.shape[0],):
        raise ValueError("tag sequence length differs from the lattice")
    prev = np.concatenate([[K], y[:-1]])
    return float(emissions[np.arange(len(y)), y].sum() + A[prev, y].sum())


def cost_augment(emissions, gold, cost_scale):
    """Fold the Hamming cost into emissions: +cost_scale wherever tag != gold."""
    aug = emissions + cost_scale
    aug[np.arange(len(gold)), gold] -= cost_scale
    return aug


def _forward(E, A):
    T, K = E.shape
    alpha = np.empty((T, K))
    alpha[0] = A[K] + E[0]
    trans = A[:K]
    for t in range(1, T):
        alpha[t] = logsumexp(alpha[t - 1][:, None] + trans, axis=0) + E[t]
    return alpha


def _backward(E, A):
    T, K = E.shape
    beta = np.zeros((T, K))
    trans = A[:K]
    for t in range(T - 2, -1, -1):
        beta[t] = logsumexp(trans + (E[t + 1] + beta[t + 1])[None, :], axis=1)
    return beta


def log_normalizer(emissions, A, cost_against=None, cost_scale=1.0):
    """log sum_y' exp(f(y') + cost(y, y')), or the plain normalizer without ``cost_against``."""
    E, _ = _check(emissions, A)
    if cost_against is not None:
        cost_against = np.asarray(cost_against, dtype=np.intp)
        if cost_against.shape != (E.shape[0],):
            raise ValueError("cost reference length differs from the lattice")
        E = cost_augment(E, cost_against, cost_scale)
    return logsumexp(_forward(E, A)[-1])


def marginals(emissions, A):
    """Node marginals (T, K), edge marginals (T-1, K, K) and log-normalizer."""
    E, K = _check(emissions, A)
    alpha = _forward(E, A)
    beta = _backward(E, A)
    logZ = logsumexp(alpha[-1])
    node = np.exp(alpha + beta - logZ)
    trans = A[:K]
    edge = np.exp(alpha[:-1, :, None] + trans[None] + (E[1:] + beta[1:])[:, None, :] - logZ)
    return node, edge, logZ


def loss_and_grad(emissions, y, A, cost_scale=1.0):
    """Negated cost-augmented objective and its gradients.

    Returns ``(loss, d_emissions, d_A)`` with
    ``loss = log sum_y' exp(f(y') + cost(y, y')) - f(y)``.
    """
    E, K = _check(emissions, A)
    y = np.asarray(y, dtype=np.intp)
    T = E.shape[0]
    aug = cost_augment(E, y, cost_scale) if cost_scale else E
    node, edge, logZ = marginals(aug, A)
    loss = logZ - score_sequence(E, y, A)

    dE = node.copy()
    dE[np.arange(T), y] -= 1.0
    dA = np.zeros_like(A)
    dA[K] = node[0]
    dA[K, y[0]] -= 1.0
    dA[:K] = edge.sum(axis=0)
    np.add.at(dA, (y[:-1], y[1:]), -1.0)
    return max(loss, 0.0), dE, dA


def viterbi_decode(emissions, A):
    """Highest-scoring tag sequence; ties go to the lower tag index."""
    E, K = _check(emissions, A)
    T = E.shape[0]
    trans = A[:K]
    delta = A[K] + E[0]
    back = np.empty((T, K), dtype=np.intp)
    for t in range(1, T):
        cand = delta[:, None] + trans
        back[t] = np.argmax(cand, axis=0)
        delta = cand[back[t], np.arange(K)] + E[t]
    path = np.empty(T, dtype=np.intp)
    path[-1] = int(np.argmax(delta))
    for t in range(T - 1, 0, -1):
        path[t - 1] = back[t, path[t]]
    return path
