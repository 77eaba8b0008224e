"""
Finite differences through the whole network
============================================

A toy sentence runs through the character GRU, the word GRU and the CRF.
Every analytic gradient is compared with central differences.
"""

import numpy as np

from hiertag.data import Sentence
from hiertag.embeddings import SparseGrad
from hiertag.model import TrainConfig, forward_loss, loss_and_grads, param_shapes
from hiertag.numeric import finite_diff_gradient

config = TrainConfig(word_hidden=3, char_hidden=2, char_dim=3, word_dim=2)
rng = np.random.default_rng(1)

# two words, three tags, a 5-symbol alphabet
shapes = param_shapes(config, n_chars=5, n_words=4, n_tags=3)
params = {name: rng.normal(scale=0.5, size=shape) for name, shape in shapes.items()}
sentence = Sentence(["ab", "c"], [np.array([2, 3]), np.array([4])], np.array([2, 3]),
                    np.array([1, 2]))

loss, grads = loss_and_grads(sentence, params, config)
print(f"loss {loss:.6f}")

for name, p in params.items():
    g = grads[name]
    if isinstance(g, SparseGrad):       # embedding gradients only touch used rows
        g = g.to_dense(p.shape[0])
    fd = finite_diff_gradient(lambda _: forward_loss(sentence, params, config)[0], p)
    ok = np.allclose(g, fd, rtol=1e-4, atol=1e-7)
    print(f"{name:24s} max |diff| {np.abs(g - fd).max():.2e}  {'ok' if ok else 'MISMATCH'}")
