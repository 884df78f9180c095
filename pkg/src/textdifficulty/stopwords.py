"""Embedded English stopword list.

The word list is the widely used 179-word English list distributed with
NLTK (2018 snapshot).  Entries are passed through the same normalisation as
corpus text, so contractions lose their apostrophes ("don't" -> "dont").
Changing the list changes interference statistics, hence the version tag.
"""
from __future__ import annotations

from dataclasses import dataclass

_RAW_ENGLISH = """
i me my myself we our ours ourselves you you're you've you'll you'd your
yours yourself yourselves he him his himself she she's her hers herself it
it's its itself they them their theirs themselves what which who whom this
that that'll these those am is are was were be been being have has had
having do does did doing a an the and but if or because as until while of
at by for with about against between into through during before after above
below to from up down in out on off over under again further then once here
there when where why how all any both each few more most other some such no
nor not only own same so than too very s t can will just don don't should
should've now d ll m o re ve y ain aren aren't couldn couldn't didn didn't
doesn doesn't hadn hadn't hasn hasn't haven haven't isn isn't ma mightn
mightn't mustn mustn't needn needn't shan shan't shouldn shouldn't wasn
wasn't weren weren't won won't wouldn wouldn't
"""

ENGLISH_VERSION = "nltk-english-179/v1"


@dataclass(frozen=True)
class StopwordList:
    words: frozenset
    source: str = "custom"

    def __post_init__(self):
        if any(w != w.lower() for w in self.words):
            raise ValueError("stopwords must be lowercase")

    def __contains__(self, word: str) -> bool:
        return word in self.words

    def all_stopwords(self, ngram: str) -> bool:
        """True if every space-separated token of ``ngram`` is a stopword."""
        return all(tok in self.words for tok in ngram.split(" "))

    @classmethod
    def from_file(cls, path) -> "StopwordList":
        from .corpus import normalize_text

        with open(path, encoding="utf-8") as fh:
            words = {t for line in fh for t in normalize_text(line, cap=None)}
        return cls(frozenset(words), source=str(path))


def english() -> StopwordList:
    from .corpus import normalize_text

    words = frozenset(t for t in normalize_text(_RAW_ENGLISH, cap=None))
    return StopwordList(words, source=ENGLISH_VERSION)
