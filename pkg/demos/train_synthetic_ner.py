"""
Training a tagger on a generated corpus
=======================================

The generator plants simple rules: a fixed list of person names, two-token
organisation names ending in "corp", and locations recognizable only by the
suffix "ville". Test sentences use location words never seen in training.
"""

import sys

from hiertag import TaskSpec, TrainConfig, train_standalone
from hiertag.synthetic import suffix_task

train, test = suffix_task(n_train=60, n_test=30, seed=0)
print(" ".join(f"{w}/{t}" for w, t in zip(train[0].tokens, train[0].tags)))

# small dimensions keep this under a minute; the defaults are much larger
config = TrainConfig(epochs=30, word_hidden=32, char_hidden=16, char_dim=10, word_dim=16)
result = train_standalone(TaskSpec("ner", train, test=test), config, log_file=sys.stdout)

print("best epoch:", result.best_epoch)
print("test F1:", round(result.tagger.score(result.encoded("ner", "test"), "ner"), 2))

# predictions next to gold on held-out sentences (their place names are unseen)
for raw, pred in zip(test[:3], result.tagger.tag(test[:3], "ner", scheme="iob2")):
    print("  ".join(f"{w}/{g}/{p}" for w, g, p in zip(raw.tokens, raw.tags, pred)))
