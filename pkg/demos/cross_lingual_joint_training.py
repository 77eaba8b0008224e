"""
Borrowing characters from another language
==========================================

Task A has ten labelled sentences. Task B is a larger corpus in a made-up
second language that marks places with the same suffix. Cross-lingual
sharing ties their character embeddings and character GRU together.
"""

from hiertag import TaskSpec, TrainConfig, train_joint, train_standalone
from hiertag.synthetic import location_words, make_corpus

places = location_words(120, seed=500)
a = TaskSpec("A", make_corpus(100, 0, places[:20], "en"),
             dev=make_corpus(40, 1, places[20:40], "en"), language="en")
b = TaskSpec("B", make_corpus(100, 2, places[40:], "xx"), language="xx")

base = dict(word_hidden=16, char_hidden=12, char_dim=10, word_dim=10,
            labeling_rates={"A": 0.1}, select_task="A")

joint = train_joint([a, b], "cross_lingual", TrainConfig(epochs=10, **base))
# one joint epoch runs ten A batches, so give the standalone run ten times the epochs
alone = train_standalone(a, TrainConfig(epochs=100, **base))

shared = joint.tagger.plan.shared
print(f"{len(shared)} shared tensors, e.g. {shared[:3]}")
print(f"A dev F1  joint {joint.best_dev['A']:.2f}   standalone {alone.best_dev['A']:.2f}")

pa, pb = joint.tagger.params("A"), joint.tagger.params("B")
print("char embeddings are one array:", pa["char_emb"] is pb["char_emb"])
