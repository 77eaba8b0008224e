"""Gated recurrent units: cell, bidirectional deep stacks and the two encoders.

A GRU cell is a dict holding the six weight matrices named in
``GRU_WEIGHTS``; ``W_*x`` are d x n and ``W_*h`` are d x d. There are no bias
terms. A stack is a list of ``(forward_cell, backward_cell)`` pairs.

Sequence functions work on arrays shaped (S, B, n): S time steps for B
independent sequences of the same length. The character encoder uses this to
run all same-length words of a sentence together; nothing is padded.
"""

import numpy as np

from .numeric import DimensionError, sigmoid

GRU_WEIGHTS = ("W_rx", "W_rh", "W_zx", "W_zh", "W_hx", "W_hh")
DIRECTIONS = ("fwd", "bwd")


def glorot(rng, rows, cols):
    bound = np.sqrt(6.0 / (rows + cols))
    return rng.uniform(-bound, bound, size=(rows, cols))


def init_gru_cell(n, d, rng):
    cell = {}
    for name in GRU_WEIGHTS:
        cols = n if name.endswith("x") else d
        cell[name] = glorot(rng, d, cols)
    return cell


def cell_dims(cell):
    d, n = cell["W_rx"].shape
    return n, d


def stack_param_names(prefix, layers):
    return [f"{prefix}.{l}.{dr}.{w}"
            for l in range(layers) for dr in DIRECTIONS for w in GRU_WEIGHTS]


def stack_shapes(prefix, n_in, d, layers):
    """Map every weight name of a ``layers``-deep stack to its shape."""
    shapes = {}
    for l in range(layers):
        n = n_in if l == 0 else 2 * d
        for dr in DIRECTIONS:
            for w in GRU_WEIGHTS:
                shapes[f"{prefix}.{l}.{dr}.{w}"] = (d, n if w.endswith("x") else d)
    return shapes


def stack_from_params(params, prefix, layers):
    return [tuple({w: params[f"{prefix}.{l}.{dr}.{w}"] for w in GRU_WEIGHTS}
                  for dr in DIRECTIONS)
            for l in range(layers)]


def stack_grads_to_params(grads, prefix):
    """Flatten per-layer gradient pairs to parameter-name keys."""
    out = {}
    for l, pair in enumerate(grads):
        for dr, g in zip(DIRECTIONS, pair):
            for w in GRU_WEIGHTS:
                out[f"{prefix}.{l}.{dr}.{w}"] = g[w]
    return out


# --------------------------------------------------------------------------
# Single step
# --------------------------------------------------------------------------

def gru_cell_forward(x, h_prev, p):
    """One GRU step; returns the new state and a cache for the backward pass."""
    x = np.asarray(x, dtype=np.float64)
    h_prev = np.asarray(h_prev, dtype=np.float64)
    n, d = cell_dims(p)
    if x.shape != (n,) or h_prev.shape != (d,):
        raise DimensionError(f"gru cell expects x[{n}], h[{d}]; got {x.shape}, {h_prev.shape}")
    r = sigmoid(p["W_rx"] @ x + p["W_rh"] @ h_prev)
    z = sigmoid(p["W_zx"] @ x + p["W_zh"] @ h_prev)
    rh = r * h_prev
    h_tilde = np.tanh(p["W_hx"] @ x + p["W_hh"] @ rh)
    h = z * h_prev + (1.0 - z) * h_tilde
    return h, (x, h_prev, r, z, rh, h_tilde, p)


def gru_cell_backward(dh, cache):
    """Gradients of one step w.r.t. input, previous state and the six weights."""
    x, h_prev, r, z, rh, h_tilde, p = cache
    dh = np.asarray(dh, dtype=np.float64)
    if dh.shape != h_prev.shape:
        raise DimensionError("gru_cell_backward: dh does not match the cached step")
    dz = dh * (h_prev - h_tilde)
    dh_tilde = dh * (1.0 - z)
    dh_prev = dh * z
    da_h = dh_tilde * (1.0 - h_tilde ** 2)
    drh = p["W_hh"].T @ da_h
    dr = drh * h_prev
    dh_prev = dh_prev + drh * r
    da_z = dz * z * (1.0 - z)
    da_r = dr * r * (1.0 - r)
    dh_prev = dh_prev + p["W_rh"].T @ da_r + p["W_zh"].T @ da_z
    dx = p["W_rx"].T @ da_r + p["W_zx"].T @ da_z + p["W_hx"].T @ da_h
    grads = {
        "W_rx": np.outer(da_r, x), "W_rh": np.outer(da_r, h_prev),
        "W_zx": np.outer(da_z, x), "W_zh": np.outer(da_z, h_prev),
        "W_hx": np.outer(da_h, x), "W_hh": np.outer(da_h, rh),
    }
    return dx, dh_prev, grads


# --------------------------------------------------------------------------
# Whole sequences
# --------------------------------------------------------------------------

def gru_sequence_forward(X, p):
    """Run one left-to-right GRU over X (S, B, n) from a zero state."""
    S, B, n = X.shape
    n_p, d = cell_dims(p)
    if n != n_p:
        raise DimensionError(f"gru layer expects input width {n_p}, got {n}")
    if S == 0:
        raise ValueError("empty sequence")
    Xr = X @ p["W_rx"].T
    Xz = X @ p["W_zx"].T
    Xh = X @ p["W_hx"].T
    H = np.zeros((S + 1, B, d))
    R = np.empty((S, B, d))
    Z = np.empty((S, B, d))
    Ht = np.empty((S, B, d))
    W_rhT, W_zhT, W_hhT = p["W_rh"].T, p["W_zh"].T, p["W_hh"].T
    for s in range(S):
        hp = H[s]
        r = sigmoid(Xr[s] + hp @ W_rhT)
        z = sigmoid(Xz[s] + hp @ W_zhT)
        ht = np.tanh(Xh[s] + (r * hp) @ W_hhT)
        H[s + 1] = z * hp + (1.0 - z) * ht
        R[s], Z[s], Ht[s] = r, z, ht
    return H[1:], (X, H, R, Z, Ht, p)


def gru_sequence_backward(dOut, cache):
    """Backpropagate dOut (S, B, d) through :func:`gru_sequence_forward`."""
    X, H, R, Z, Ht, p = cache
    S, B, d = dOut.shape
    dAr = np.empty((S, B, d))
    dAz = np.empty((S, B, d))
    dAh = np.empty((S, B, d))
    W_hh, W_rh, W_zh = p["W_hh"], p["W_rh"], p["W_zh"]
    dh_next = np.zeros((B, d))
    for s in range(S - 1, -1, -1):
        dh = dOut[s] + dh_next
        hp, r, z, ht = H[s], R[s], Z[s], Ht[s]
        dz = dh * (hp - ht)
        da_h = dh * (1.0 - z) * (1.0 - ht ** 2)
        drh = da_h @ W_hh
        da_r = drh * hp * r * (1.0 - r)
        da_z = dz * z * (1.0 - z)
        dh_next = dh * z + drh * r + da_r @ W_rh + da_z @ W_zh
        dAr[s], dAz[s], dAh[s] = da_r, da_z, da_h
    Xf = X.reshape(S * B, -1)
    Hp = H[:-1].reshape(S * B, d)
    RHp = (R * H[:-1]).reshape(S * B, d)
    fr, fz, fh = dAr.reshape(S * B, d), dAz.reshape(S * B, d), dAh.reshape(S * B, d)
    grads = {
        "W_rx": fr.T @ Xf, "W_rh": fr.T @ Hp,
        "W_zx": fz.T @ Xf, "W_zh": fz.T @ Hp,
        "W_hx": fh.T @ Xf, "W_hh": fh.T @ RHp,
    }
    dX = dAr @ p["W_rx"] + dAz @ p["W_zx"] + dAh @ p["W_hx"]
    return dX, grads


def _as_batched(seq):
    X = np.asarray(seq, dtype=np.float64)
    if X.ndim == 2:
        return X[:, None, :], True
    if X.ndim != 3:
        raise DimensionError("sequence must be (S, n) or (S, B, n)")
    return X, False


def bigru_forward(seq, stack):
    """Deep bidirectional pass.

    ``seq`` is (S, n) or (S, B, n). Returns the per-layer outputs, each the
    concatenation ``[forward, backward]`` along the last axis, and a cache.
    """
    X, squeeze = _as_batched(seq)
    if X.shape[0] == 0:
        raise ValueError("empty sequence")
    outputs, caches = [], []
    inp = X
    for fwd, bwd in stack:
        Hf, cf = gru_sequence_forward(inp, fwd)
        Hb_rev, cb = gru_sequence_forward(inp[::-1], bwd)
        out = np.concatenate([Hf, Hb_rev[::-1]], axis=-1)
        outputs.append(out)
        caches.append((cf, cb, Hf.shape[-1]))
        inp = out
    if squeeze:
        outputs = [o[:, 0, :] for o in outputs]
    return outputs, (caches, squeeze)


def bigru_backward(d_top, cache):
    """Backpropagate a gradient on the top layer's output.

    Returns the gradient w.r.t. the input sequence and a list of per-layer
    ``(forward_grads, backward_grads)`` dicts.
    """
    caches, squeeze = cache
    d = np.asarray(d_top, dtype=np.float64)
    if squeeze:
        d = d[:, None, :]
    grads = [None] * len(caches)
    for l in range(len(caches) - 1, -1, -1):
        cf, cb, dh = caches[l]
        dXf, gf = gru_sequence_backward(d[..., :dh], cf)
        dXb_rev, gb = gru_sequence_backward(d[::-1, :, dh:], cb)
        d = dXf + dXb_rev[::-1]
        grads[l] = (gf, gb)
    if squeeze:
        d = d[:, 0, :]
    return d, grads


# --------------------------------------------------------------------------
# Encoders
# --------------------------------------------------------------------------

def char_encode_batch(char_ids, char_emb, stack):
    """Character features for B words of equal length S.

    ``char_ids`` is (B, S). Returns (B, 2 d_char): the top-layer forward state
    at the last character next to the top-layer backward state at the first.
    """
    X = char_emb[char_ids.T]  # (S, B, dc)
    outs, cache = bigru_forward(X, stack)
    top = outs[-1]
    dc = top.shape[-1] // 2
    rep = np.concatenate([top[-1, :, :dc], top[0, :, dc:]], axis=-1)
    return rep, (cache, char_ids, top.shape)


def char_encode_batch_backward(d_rep, cache):
    """Returns (d_char_embedding rows (B, S, dc), per-layer stack grads)."""
    gru_cache, char_ids, top_shape = cache
    dc = top_shape[-1] // 2
    d_top = np.zeros(top_shape)
    d_top[-1, :, :dc] = d_rep[:, :dc]
    d_top[0, :, dc:] += d_rep[:, dc:]
    dX, grads = bigru_backward(d_top, gru_cache)
    return dX.transpose(1, 0, 2), grads


def char_encode(char_ids, char_emb, stack, word_vec=None):
    """Word representation ``[fwd char state at S, bwd char state at 1, word_vec]``.

    ``stack=None`` drops the character block; ``word_vec=None`` drops the
    word block.
    """
    ids = np.asarray(char_ids, dtype=np.intp)
    parts = []
    if stack is not None:
        if ids.size == 0:
            raise ValueError("word has no characters")
        rep, _ = char_encode_batch(ids[None, :], char_emb, stack)
        parts.append(rep[0])
    if word_vec is not None:
        parts.append(np.asarray(word_vec, dtype=np.float64))
    if not parts:
        raise ValueError("word representation has no components")
    return np.concatenate(parts)


def word_encode(reps, stack):
    """Contextual states (T, 2 d_word) from word representations (T, D)."""
    reps = np.asarray(reps, dtype=np.float64)
    if reps.shape[0] == 0:
        raise ValueError("empty sentence")
    outs, cache = bigru_forward(reps, stack)
    return outs[-1], cache
