"""Command-line entry points: ``train``, ``joint-train``, ``tag`` and ``eval``.

Training reads a flat ``key = value`` config file::

    tasks = ner
    sharing = standalone              # or multi_task / cross_lingual
    output = ner.ckpt
    log = ner.log
    epochs = 30                       # any TrainConfig field
    truncation.en = 17
    task.ner.train = eng.train
    task.ner.dev = eng.testa
    task.ner.test = eng.testb
    task.ner.language = en
    task.ner.metric = f1              # or accuracy
    task.ner.token_column = 0
    task.ner.tag_column = -1
    task.ner.embeddings = senna.txt   # "word v1 .. vd" lines
    task.ner.embeddings_vocab = words.lst   # optional: embeddings is then a bare matrix
    task.ner.gazetteer = ner.gaz
    task.ner.labeling_rate = 0.1

Relative data paths are resolved against ``$HIERTAG_DATA_ROOT`` when it is
set. Exit status is 0 on success, 1 for usage or config errors and 2 for
unreadable or malformed data.
"""

import argparse
import os
import sys
from dataclasses import fields

from . import checkpoint
from .data import (ConfigError, ConllFormatError, RawSentence, TagSchemeError, as_bioes,
                   format_conll, parse_conll, read_conll)
from .embeddings import EmbeddingFormatError, read_embedding_pair, read_embeddings
from .evaluation import AlignmentError, chunk_f1, token_accuracy
from .gazetteer import GazetteerFormatError, load_gazetteer
from .model import TrainConfig
from .training import MODES, TaskSpec, train_joint, train_standalone

DATA_ROOT_ENV = "HIERTAG_DATA_ROOT"
ABLATIONS = {"no-char-gru": "use_char_gru", "no-word-emb": "use_word_emb",
             "no-gazetteer": "use_gazetteer"}
TASK_KEYS = {"train", "dev", "test", "language", "metric", "token_column", "tag_column",
             "embeddings", "embeddings_vocab", "gazetteer", "labeling_rate"}
TOP_KEYS = {"tasks", "sharing", "output", "log"}

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2
DATA_ERRORS = (OSError, ConllFormatError, TagSchemeError, EmbeddingFormatError,
               GazetteerFormatError, checkpoint.CheckpointError, AlignmentError,
               UnicodeDecodeError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --------------------------------------------------------------------------
# Config files
# --------------------------------------------------------------------------

def parse_config_text(text):
    """``key = value`` lines into an ordered dict; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"config line {lineno}: expected 'key = value'")
        if key in out:
            raise ConfigError(f"config line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _coerce(name, value, default):
    if isinstance(default, bool):
        low = value.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{name}: expected a boolean, got {value!r}")
    try:
        if isinstance(default, int):
            return int(value)
        if isinstance(default, float):
            return float(value)
    except ValueError:
        raise ConfigError(f"{name}: expected a number, got {value!r}") from None
    return value


def resolve_path(path):
    root = os.environ.get(DATA_ROOT_ENV)
    if root and not os.path.isabs(path):
        return os.path.join(root, path)
    return path


class RunPlan:
    """Everything ``train`` needs, decoded from the config file and flags."""

    def __init__(self, config, mode, tasks, task_options, output, log):
        self.config = config
        self.mode = mode
        self.task_ids = tasks
        self.task_options = task_options
        self.output = output
        self.log = log


def build_run_plan(entries, *, seed=None, labeling_rates=(), ablations=(), joint=False):
    task_ids = [t.strip() for t in entries.get("tasks", "").split(",") if t.strip()]
    if not task_ids:
        raise ConfigError("config needs 'tasks = <id>[,<id>...]'")
    mode = entries.get("sharing", "multi_task" if joint else "standalone")
    if mode not in MODES:
        raise ConfigError(f"sharing must be one of {', '.join(MODES)}")
    if joint and mode == "standalone":
        raise ConfigError("joint-train needs sharing = multi_task or cross_lingual")
    if mode == "standalone" and len(task_ids) != 1:
        raise ConfigError("standalone training takes exactly one task; use joint-train")

    defaults = TrainConfig()
    cfg_fields = {f.name for f in fields(TrainConfig)} - {"truncation", "labeling_rates"}
    kwargs = {"truncation": dict(defaults.truncation), "labeling_rates": {}}
    options = {t: {} for t in task_ids}
    for key, value in entries.items():
        if key in TOP_KEYS:
            continue
        if key in cfg_fields:
            default = getattr(defaults, key)
            if key == "select_task":
                kwargs[key] = value or None
            else:
                kwargs[key] = _coerce(key, value, default)
        elif key.startswith("truncation."):
            kwargs["truncation"][key.split(".", 1)[1]] = _coerce(key, value, 0)
        elif key.startswith("task."):
            parts = key.split(".")
            if len(parts) != 3 or parts[1] not in options or parts[2] not in TASK_KEYS:
                raise ConfigError(f"unknown task key {key!r}")
            options[parts[1]][parts[2]] = value
        else:
            raise ConfigError(f"unknown config key {key!r}")

    for t, opts in options.items():
        if "train" not in opts:
            raise ConfigError(f"task {t!r} has no 'task.{t}.train' path")
        if "labeling_rate" in opts:
            kwargs["labeling_rates"][t] = _coerce(f"task.{t}.labeling_rate",
                                                  opts["labeling_rate"], 1.0)
    for item in labeling_rates:
        task, sep, rate = item.rpartition("=")
        task = task if sep else task_ids[0]
        if task not in options:
            raise ConfigError(f"--labeling-rate names unknown task {task!r}")
        kwargs["labeling_rates"][task] = _coerce("--labeling-rate", rate, 1.0)
    if seed is not None:
        kwargs["seed"] = seed
    for flag in ablations:
        kwargs[ABLATIONS[flag]] = False

    config = TrainConfig(**kwargs)
    return RunPlan(config, mode, task_ids, options, entries.get("output", "model.ckpt"),
                   entries.get("log"))


def load_task(task_id, opts):
    tok = _coerce("token_column", opts.get("token_column", "0"), 0)
    tag = _coerce("tag_column", opts.get("tag_column", "-1"), 0)

    def split(name):
        path = opts.get(name)
        return read_conll(resolve_path(path), tok, tag) if path else []

    metric = opts.get("metric", "f1")
    if metric not in ("f1", "accuracy"):
        raise ConfigError(f"task {task_id!r}: metric must be f1 or accuracy")
    vectors = None
    if "embeddings" in opts:
        if "embeddings_vocab" in opts:
            vectors = read_embedding_pair(resolve_path(opts["embeddings_vocab"]),
                                          resolve_path(opts["embeddings"]))
        else:
            vectors = read_embeddings(resolve_path(opts["embeddings"]))
    gaz = load_gazetteer(resolve_path(opts["gazetteer"])) if "gazetteer" in opts else None
    return TaskSpec(task_id, split("train"), split("dev"), split("test"),
                    language=opts.get("language", "en"), metric=metric,
                    embeddings=vectors, gazetteer=gaz)


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------

def cmd_train(args, joint=False):
    try:
        with open(args.config, encoding="utf-8") as fh:
            entries = parse_config_text(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    plan = build_run_plan(entries, seed=args.seed, labeling_rates=args.labeling_rate or (),
                          ablations=args.ablation or (), joint=joint)
    if args.output:
        plan.output = args.output
    tasks = [load_task(t, plan.task_options[t]) for t in plan.task_ids]
    log_fh = open(plan.log, "w", encoding="utf-8") if plan.log else None
    try:
        if plan.mode == "standalone":
            result = train_standalone(tasks[0], plan.config, log_file=log_fh)
        else:
            result = train_joint(tasks, plan.mode, plan.config, log_file=log_fh)
    finally:
        if log_fh is not None:
            log_fh.close()
    checkpoint.save(result.tagger, plan.output)
    print(f"best epoch {result.best_epoch}; checkpoint written to {plan.output}")
    for task in tasks:
        test = result.encoded(task.task_id, "test")
        if test:
            score = result.tagger.score(test, task.task_id)
            print(f"{task.task_id}\ttest {task.metric}\t{score:.2f}")
    return EXIT_OK


def _read_input(path, fmt, token_column):
    if path == "-":
        text = sys.stdin.read()
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    if fmt == "plain":
        return [RawSentence(line.split()) for line in text.splitlines() if line.split()]
    return parse_conll(text, token_column, None)


def cmd_tag(args):
    tagger = checkpoint.load(args.model)
    task = args.task
    if task is None:
        if len(tagger.tasks) != 1:
            raise UsageError(f"checkpoint holds tasks {sorted(tagger.tasks)}; pass --task")
        task = next(iter(tagger.tasks))
    if task not in tagger.tasks:
        raise UsageError(f"unknown task {task!r}; checkpoint holds {sorted(tagger.tasks)}")
    sentences = _read_input(args.input, args.format, args.token_column)
    tags = tagger.tag(sentences, task, scheme=args.scheme)
    text = format_conll(sentences, tags)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def check_alignment(gold, pred):
    """Raise :class:`AlignmentError` naming the first sentence where the files diverge."""
    for i, (g, p) in enumerate(zip(gold, pred)):
        if g.tokens != p.tokens:
            raise AlignmentError(
                f"sentence {i + 1} differs:\n  gold: {' '.join(g.tokens)}\n"
                f"  pred: {' '.join(p.tokens)}")
    if len(gold) != len(pred):
        i = min(len(gold), len(pred))
        extra = (gold if len(gold) > len(pred) else pred)[i]
        side = "gold" if len(gold) > len(pred) else "pred"
        raise AlignmentError(f"{len(gold)} gold sentences vs {len(pred)} predicted; "
                             f"sentence {i + 1} only in {side}: {' '.join(extra.tokens)}")


def cmd_eval(args):
    gold = read_conll(args.gold, 0, args.tag_column)
    pred = read_conll(args.pred, 0, args.tag_column)
    check_alignment(gold, pred)
    g_tags = [s.tags for s in gold]
    p_tags = [s.tags for s in pred]
    if args.metric == "f1":
        report = chunk_f1([as_bioes(t) for t in g_tags], [as_bioes(t) for t in p_tags])
        text, kv = report.render(), report.key_values()
    else:
        acc = token_accuracy(g_tags, p_tags)
        n = sum(len(t) for t in g_tags)
        text = f"processed {n} tokens; accuracy: {acc:.2f}%"
        kv = f"accuracy\t{acc:.2f}\ntokens\t{n}\n"
    print(text)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(kv)
    return EXIT_OK


# --------------------------------------------------------------------------
# Argument parsing
# --------------------------------------------------------------------------

def make_parser():
    parser = _Parser(prog="hiertag", description="Hierarchical GRU-CRF sequence tagger.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, help_text in (("train", "train one task (or several, per the config)"),
                            ("joint-train", "train several tasks with shared parameters")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="key = value config file")
        p.add_argument("--seed", type=int)
        p.add_argument("--labeling-rate", action="append", metavar="[TASK=]RATE",
                       help="keep this fraction of a task's training sentences "
                            "(bare RATE applies to the first task)")
        p.add_argument("--ablation", action="append", choices=sorted(ABLATIONS))
        p.add_argument("--output", help="checkpoint path (overrides the config)")

    p = sub.add_parser("tag", help="tag tokens with a trained checkpoint")
    p.add_argument("--model", required=True)
    p.add_argument("--task")
    p.add_argument("--input", default="-", help="input file, '-' for stdin")
    p.add_argument("--output")
    p.add_argument("--format", choices=("conll", "plain"), default="conll",
                   help="conll: one token per line (first column); plain: one sentence per line")
    p.add_argument("--token-column", type=int, default=0)
    p.add_argument("--scheme", choices=("bioes", "iob2"), default="bioes")

    p = sub.add_parser("eval", help="score predicted tags against gold")
    p.add_argument("gold")
    p.add_argument("pred")
    p.add_argument("--metric", choices=("f1", "accuracy"), default="f1")
    p.add_argument("--tag-column", type=int, default=-1)
    p.add_argument("--report", help="also write tab-separated key/value scores here")
    return parser


def main(argv=None):
    args = make_parser().parse_args(argv)
    commands = {"train": cmd_train, "joint-train": lambda a: cmd_train(a, joint=True),
                "tag": cmd_tag, "eval": cmd_eval}
    try:
        return commands[args.command](args)
    except (UsageError, ConfigError) as exc:
        print(f"hiertag {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DATA_ERRORS as exc:
        print(f"hiertag {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FloatingPointError as exc:
        print(f"hiertag {args.command}: training diverged: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
