"""
A linear-chain CRF checked by brute force
=========================================

The normalizer, the marginals and the Viterbi path are all dynamic programs.
On a lattice this small we can list every tag sequence and compare.
"""

import itertools

import numpy as np

from hiertag.crf import log_normalizer, loss_and_grad, marginals, score_sequence, viterbi_decode

rng = np.random.default_rng(0)
T, K = 4, 3
E = rng.normal(size=(T, K))          # emission scores, one row per token
A = rng.normal(size=(K + 1, K))      # transitions; the last row holds START scores
gold = np.array([0, 2, 2, 1])

# every one of the K**T paths, scored directly
paths = list(itertools.product(range(K), repeat=T))
scores = np.array([score_sequence(E, y, A) for y in paths])
brute = np.log(np.exp(scores - scores.max()).sum()) + scores.max()
print("log Z  dynamic program:", log_normalizer(E, A))
print("log Z  enumeration:    ", brute)

# node marginals sum to one at each position
node, edge, _ = marginals(E, A)
print("row sums of node marginals:", node.sum(axis=1))

# the cost-augmented loss inflates each competitor by its Hamming distance to gold
loss, dE, dA = loss_and_grad(E, gold, A, cost_scale=1.0)
print("loss:", loss, " emission-gradient row sums:", dE.sum(axis=1).round(12))

best = paths[int(np.argmax(scores))]
print("Viterbi:", viterbi_decode(E, A), " exhaustive:", list(best))
