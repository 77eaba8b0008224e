import pytest

from hiertag import checkpoint
from hiertag.cli import build_run_plan, main, parse_config_text
from hiertag.data import ConfigError, format_conll, read_conll
from hiertag.model import TrainConfig
from hiertag.synthetic import suffix_task
from hiertag.training import TaskSpec, train_standalone

SMALL = "word_hidden = 8\nchar_hidden = 6\nchar_dim = 5\nword_dim = 6\n"


@pytest.fixture
def corpus(tmp_path):
    train, test = suffix_task(20, 6)
    (tmp_path / "train.txt").write_text(format_conll(train), encoding="utf-8")
    (tmp_path / "test.txt").write_text(format_conll(test), encoding="utf-8")
    return tmp_path


def write_config(path, body):
    path.write_text(body, encoding="utf-8")
    return str(path)


def test_config_parsing_and_defaults():
    entries = parse_config_text("tasks = a  # comment\n\ntask.a.train = x\n")
    plan = build_run_plan(entries)
    assert plan.mode == "standalone"
    cfg = plan.config
    assert (cfg.learning_rate, cfg.word_hidden, cfg.char_layers, cfg.word_layers) == \
        (0.01, 300, 2, 2)
    with pytest.raises(ConfigError):
        parse_config_text("tasks\n")
    with pytest.raises(ConfigError):
        parse_config_text("a = 1\na = 2\n")


def test_config_overrides():
    entries = parse_config_text(
        "tasks = a,b\nsharing = cross_lingual\nepochs = 3\nfreeze_word_emb = yes\n"
        "truncation.de = 30\ntask.a.train = x\ntask.b.train = y\ntask.b.labeling_rate = 0.5\n")
    plan = build_run_plan(entries, seed=7, labeling_rates=["0.1"], ablations=["no-char-gru"])
    cfg = plan.config
    assert cfg.epochs == 3 and cfg.freeze_word_emb and cfg.seed == 7
    assert cfg.truncation["de"] == 30 and cfg.truncation["en"] == 17
    assert cfg.labeling_rates == {"a": 0.1, "b": 0.5}
    assert not cfg.use_char_gru


@pytest.mark.parametrize("body", [
    "task.a.train = x\n",
    "tasks = a\n",
    "tasks = a\ntask.a.train = x\nbogus = 1\n",
    "tasks = a\ntask.a.train = x\ntask.z.train = y\n",
    "tasks = a\ntask.a.train = x\nepochs = many\n",
    "tasks = a,b\ntask.a.train = x\ntask.b.train = y\n",
    "tasks = a\ntask.a.train = x\nsharing = everything\n",
])
def test_bad_configs(body):
    with pytest.raises(ConfigError):
        build_run_plan(parse_config_text(body))


def test_train_tag_eval_round_trip(corpus, monkeypatch, capsys):
    monkeypatch.setenv("HIERTAG_DATA_ROOT", str(corpus))
    ckpt, log = corpus / "m.ckpt", corpus / "train.log"
    cfg = write_config(corpus / "run.cfg",
                       f"tasks = toy\noutput = {ckpt}\nlog = {log}\nepochs = 2\n{SMALL}"
                       "task.toy.train = train.txt\ntask.toy.test = test.txt\n")
    assert main(["train", "--config", cfg, "--seed", "3"]) == 0
    out = capsys.readouterr().out
    assert "toy\ttest f1\t" in out
    rows = [line.split("\t") for line in log.read_text().splitlines()]
    assert len(rows) == 2 and all(len(r) == 5 for r in rows)
    assert checkpoint.load(ckpt).config.seed == 3

    pred = corpus / "pred.txt"
    args = ["tag", "--model", str(ckpt), "--input", str(corpus / "test.txt"),
            "--output", str(pred), "--scheme", "iob2"]
    assert main(args) == 0
    first = pred.read_bytes()
    assert main(args) == 0
    assert pred.read_bytes() == first
    tagged = read_conll(pred)
    assert [s.tokens for s in tagged] == [s.tokens for s in read_conll(corpus / "test.txt")]

    report = corpus / "scores.tsv"
    assert main(["eval", str(corpus / "test.txt"), str(pred), "--report", str(report)]) == 0
    kv = dict(line.split("\t") for line in report.read_text().splitlines())
    assert set(kv) >= {"precision", "recall", "f1", "accuracy"}


def test_tag_is_pure_and_handles_empty_input(corpus, tmp_path, capsys):
    train, _ = suffix_task(6, 1)
    tagger = train_standalone(TaskSpec("toy", train),
                              TrainConfig(epochs=1, word_hidden=4, char_hidden=3,
                                          char_dim=3, word_dim=3)).tagger
    ckpt = tmp_path / "m.ckpt"
    checkpoint.save(tagger, ckpt)
    before = ckpt.read_bytes()
    empty = tmp_path / "empty.txt"
    empty.write_text("", encoding="utf-8")
    assert main(["tag", "--model", str(ckpt), "--input", str(empty)]) == 0
    assert capsys.readouterr().out == ""
    plain = tmp_path / "plain.txt"
    plain.write_text("anna went to the market\n\nwe saw bob\n", encoding="utf-8")
    assert main(["tag", "--model", str(ckpt), "--input", str(plain), "--format", "plain"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("anna ") and lines[5] == "" and len(lines) == 10
    assert ckpt.read_bytes() == before
    assert main(["tag", "--model", str(ckpt), "--task", "pos", "--input", str(empty)]) == 1
    assert "unknown task" in capsys.readouterr().err


def test_eval_examples(tmp_path, capsys):
    gold = tmp_path / "gold.txt"
    gold.write_text("John B-PER\nsaw O\nParis O\n", encoding="utf-8")
    same = tmp_path / "same.txt"
    same.write_text("John S-PER\nsaw O\nParis O\n", encoding="utf-8")
    assert main(["eval", str(gold), str(same)]) == 0
    assert "FB1: 100.00" in capsys.readouterr().out
    pred = tmp_path / "pred.txt"
    pred.write_text("John B-PER\nsaw O\nParis B-LOC\n", encoding="utf-8")
    assert main(["eval", str(gold), str(pred)]) == 0
    assert "FB1:  66.67" in capsys.readouterr().out


def test_eval_accuracy_format(tmp_path, capsys):
    gold = tmp_path / "g.txt"
    gold.write_text("a DT\ndog NN\nran VBD\n\nit PRP\n", encoding="utf-8")
    pred = tmp_path / "p.txt"
    pred.write_text("a DT\ndog VB\nran VBD\n\nit PRP\n", encoding="utf-8")
    assert main(["eval", str(gold), str(pred), "--metric", "accuracy"]) == 0
    assert "accuracy: 75.00%" in capsys.readouterr().out


def test_eval_misalignment(tmp_path, capsys):
    gold = tmp_path / "g.txt"
    gold.write_text("a O\nb O\n\nc O\nd O\n", encoding="utf-8")
    pred = tmp_path / "p.txt"
    pred.write_text("a O\nb O\n\nc O\n", encoding="utf-8")
    assert main(["eval", str(gold), str(pred)]) == 2
    err = capsys.readouterr().err
    assert "sentence 2" in err and "c d" in err


def test_exit_codes(tmp_path, capsys):
    assert main(["train", "--config", str(tmp_path / "missing.cfg")]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["tag"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["train", "--config", "x", "--ablation", "no-crf"])
    assert exc.value.code == 1
    cfg = write_config(tmp_path / "c.cfg", "tasks = a\ntask.a.train = nowhere.txt\n")
    assert main(["train", "--config", cfg]) == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("x O\ny\n", encoding="utf-8")
    cfg = write_config(tmp_path / "d.cfg", f"tasks = a\ntask.a.train = {bad}\ntag_column = 1\n")
    assert main(["train", "--config", cfg]) == 1
    cfg = write_config(tmp_path / "e.cfg", f"tasks = a\ntask.a.train = {bad}\ntask.a.tag_column = 1\n")
    assert main(["train", "--config", cfg]) == 2
    assert main(["tag", "--model", str(bad), "--input", str(bad)]) == 2
    capsys.readouterr()


def test_joint_train_command(corpus, capsys):
    b_train, _ = suffix_task(10, 2, seed=4, language="xx")
    (corpus / "b.txt").write_text(format_conll(b_train), encoding="utf-8")
    ckpt = corpus / "joint.ckpt"
    cfg = write_config(corpus / "j.cfg",
                       f"tasks = en,xx\nsharing = cross_lingual\noutput = {ckpt}\nepochs = 1\n"
                       f"{SMALL}task.en.train = {corpus / 'train.txt'}\n"
                       f"task.en.dev = {corpus / 'test.txt'}\n"
                       f"task.xx.train = {corpus / 'b.txt'}\ntask.xx.language = xx\n")
    assert main(["joint-train", "--config", cfg, "--labeling-rate", "en=0.5"]) == 0
    tagger = checkpoint.load(ckpt)
    assert tagger.plan.mode == "cross_lingual"
    assert tagger.params("en")["char_emb"] is tagger.params("xx")["char_emb"]
    assert tagger.config.labeling_rates == {"en": 0.5}
    capsys.readouterr()
