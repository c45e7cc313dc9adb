"""Built-in English stopword list.

A fixed list of function words applied when word statistics are asked to
ignore stopwords. Callers can replace it wholesale by loading a one-word-per-
line file at ingest time. Entries are stored in normalized form (lowercase,
internal apostrophes kept).
"""

from __future__ import annotations

DEFAULT_STOPWORDS: frozenset[str] = frozenset(
    """
    a about above after again against all also although am among an and
    another any are aren't around as at be because been before behind being
    below between beyond both but by can can't cannot could couldn't did
    didn't do does doesn't doing don't during each either ever every few for
    from further had hadn't has hasn't have haven't having he he's her here
    hers herself him himself his how i i'm i've if in into is isn't it it's
    its itself just many may me might mine more most much must my myself
    neither never no nor not now of off on once one only onto or other ought
    our ours ourselves out over own same shall she she's should shouldn't
    since so some such than that the their theirs them themselves then there
    these they they're they've this those though through to too toward
    towards under until upon us very was wasn't we we're we've were weren't
    what when where whether which while who whom whose why will with within
    without won't would wouldn't yet you you're you've your yours yourself
    yourselves
    """.split()
)


def load_stopwords(path) -> frozenset[str]:
    """Read a stopword file: one word per line, blank lines and # comments skipped."""
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            word = line.strip().lower()
            if word and not word.startswith("#"):
                words.add(word)
    return frozenset(words)
