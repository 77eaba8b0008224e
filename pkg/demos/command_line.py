"""
The command-line workflow
=========================

Write a corpus to disk, train from a config file, tag, and score. The same
steps work from a shell with ``hiertag train --config run.cfg`` and so on.
"""

import tempfile
from pathlib import Path

from hiertag.cli import main
from hiertag.data import format_conll
from hiertag.synthetic import suffix_task

work = Path(tempfile.mkdtemp())
train, test = suffix_task(40, 20, seed=0)
(work / "train.txt").write_text(format_conll(train))
(work / "test.txt").write_text(format_conll(test))

(work / "run.cfg").write_text(f"""\
tasks = ner
output = {work / 'ner.ckpt'}
log = {work / 'train.log'}
epochs = 30
word_hidden = 16
char_hidden = 12
char_dim = 10
word_dim = 10
task.ner.train = {work / 'train.txt'}
task.ner.test = {work / 'test.txt'}
""")

main(["train", "--config", str(work / "run.cfg"), "--seed", "1"])
print((work / "train.log").read_text())

main(["tag", "--model", str(work / "ner.ckpt"), "--input", str(work / "test.txt"),
      "--output", str(work / "pred.txt"), "--scheme", "iob2"])
print("\n".join((work / "pred.txt").read_text().splitlines()[:6]))

main(["eval", str(work / "test.txt"), str(work / "pred.txt")])
