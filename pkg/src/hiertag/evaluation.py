"""Token accuracy and CoNLL-style chunk precision/recall/F1."""

from collections import Counter
from dataclasses import dataclass, field

from .data import spans_from_bioes


class AlignmentError(ValueError):
    pass


def _ratio(num, den):
    return 100.0 * num / den if den else 0.0


def _f1(p, r):
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


@dataclass
class LabelScore:
    precision: float
    recall: float
    f1: float
    gold: int
    predicted: int
    correct: int


@dataclass
class EvalReport:
    precision: float = 0.0
    recall: float = 0.0
    f1: float = 0.0
    accuracy: float = 0.0
    gold: int = 0
    predicted: int = 0
    correct: int = 0
    tokens: int = 0
    per_label: dict = field(default_factory=dict)

    def render(self):
        lines = [
            f"processed {self.tokens} tokens with {self.gold} phrases; "
            f"found: {self.predicted} phrases; correct: {self.correct}.",
            f"accuracy: {self.accuracy:6.2f}%; precision: {self.precision:6.2f}%; "
            f"recall: {self.recall:6.2f}%; FB1: {self.f1:6.2f}",
        ]
        for label in sorted(self.per_label):
            s = self.per_label[label]
            lines.append(
                f"{label:>17}: precision: {s.precision:6.2f}%; recall: {s.recall:6.2f}%; "
                f"FB1: {s.f1:6.2f}  {s.predicted}")
        return "\n".join(lines)

    def key_values(self):
        rows = [
            ("accuracy", f"{self.accuracy:.2f}"),
            ("precision", f"{self.precision:.2f}"),
            ("recall", f"{self.recall:.2f}"),
            ("f1", f"{self.f1:.2f}"),
            ("gold", str(self.gold)),
            ("predicted", str(self.predicted)),
            ("correct", str(self.correct)),
            ("tokens", str(self.tokens)),
        ]
        for label in sorted(self.per_label):
            s = self.per_label[label]
            rows += [(f"{label}.precision", f"{s.precision:.2f}"),
                     (f"{label}.recall", f"{s.recall:.2f}"),
                     (f"{label}.f1", f"{s.f1:.2f}")]
        return "".join(f"{k}\t{v}\n" for k, v in rows)


def _check_aligned(gold, pred):
    if len(gold) != len(pred):
        raise AlignmentError(f"{len(gold)} gold sentences vs {len(pred)} predicted")
    for i, (g, p) in enumerate(zip(gold, pred)):
        if len(g) != len(p):
            raise AlignmentError(f"sentence {i}: {len(g)} gold tags vs {len(p)} predicted")


def token_accuracy(gold, pred):
    """Percentage of tokens whose tags agree."""
    _check_aligned(gold, pred)
    total = sum(len(g) for g in gold)
    correct = sum(a == b for g, p in zip(gold, pred) for a, b in zip(g, p))
    return _ratio(correct, total)


def chunk_f1(gold, pred):
    """Micro-averaged chunk scores over BIOES sequences."""
    _check_aligned(gold, pred)
    n_gold, n_pred, n_correct = Counter(), Counter(), Counter()
    for g, p in zip(gold, pred):
        gs, ps = spans_from_bioes(g), spans_from_bioes(p)
        n_gold.update(s.label for s in gs)
        n_pred.update(s.label for s in ps)
        n_correct.update(s.label for s in gs & ps)
    report = EvalReport(
        gold=sum(n_gold.values()),
        predicted=sum(n_pred.values()),
        correct=sum(n_correct.values()),
        tokens=sum(len(g) for g in gold),
        accuracy=token_accuracy(gold, pred),
    )
    report.precision = _ratio(report.correct, report.predicted)
    report.recall = _ratio(report.correct, report.gold)
    report.f1 = _f1(report.precision, report.recall)
    for label in set(n_gold) | set(n_pred):
        p = _ratio(n_correct[label], n_pred[label])
        r = _ratio(n_correct[label], n_gold[label])
        report.per_label[label] = LabelScore(p, r, _f1(p, r), n_gold[label],
                                             n_pred[label], n_correct[label])
    return report


def evaluate(gold, pred, metric):
    """Headline number for ``metric`` ('f1' or 'accuracy')."""
    if metric == "f1":
        return chunk_f1(gold, pred).f1
    if metric == "accuracy":
        return token_accuracy(gold, pred)
    raise ValueError(f"unknown metric {metric!r}")
