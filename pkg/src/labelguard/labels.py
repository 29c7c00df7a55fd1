"""Beat class labels and the MIT-BIH symbol mapping."""

from __future__ import annotations

from enum import IntEnum


class ClassLabel(IntEnum):
    """The six beat classes. Integer order is the tie-breaking order."""

    N = 0
    A = 1
    V = 2
    RB = 3
    P = 4
    LB = 5

    @classmethod
    def parse(cls, name: str) -> "ClassLabel":
        try:
            return cls[name.strip()]
        except KeyError:
            raise ValueError(f"unknown class label {name!r}") from None


N_CLASSES = len(ClassLabel)

#: MIT-BIH annotation symbols kept for classification.
MIT_TO_CLASS = {
    "N": ClassLabel.N,
    "A": ClassLabel.A,
    "V": ClassLabel.V,
    "R": ClassLabel.RB,
    "/": ClassLabel.P,
    "L": ClassLabel.LB,
}

#: Every MIT-BIH symbol that marks a QRS complex (an R-peak), whether or not it is kept.
MIT_BEAT_SYMBOLS = frozenset("NLRBAaJSVrFejnE/fQ?")

#: MIT-BIH symbols that annotate something other than a beat.
MIT_NON_BEAT_SYMBOLS = frozenset(
    ["[", "!", "]", "x", "(", ")", "p", "t", "u", "`", "'", "^", "|", "~", "+", "s", "T",
     "*", "D", "=", '"', "@"]
)
