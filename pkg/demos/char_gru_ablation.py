"""
What the character GRU buys
===========================

Held-out locations are unknown words, so a model without characters sees
only an UNK vector there. With the character GRU the suffix is visible.
"""

from hiertag import TaskSpec, TrainConfig, train_standalone
from hiertag.synthetic import suffix_task

dims = dict(word_hidden=16, char_hidden=12, char_dim=10, word_dim=10, epochs=15)

for seed in range(3):
    train, test = suffix_task(50, 30, seed=seed)
    row = []
    for label, flags in (("full", {}), ("no char GRU", {"use_char_gru": False}),
                         ("no word emb", {"use_word_emb": False})):
        result = train_standalone(TaskSpec("A", train, test=test),
                                  TrainConfig(seed=seed, **dims, **flags))
        row.append(f"{label}: {result.tagger.score(result.encoded('A', 'test'), 'A'):6.2f}")
    print(f"seed {seed}  " + "  ".join(row))
