"""Shared corpus helpers for the test suite.

The "corpus" is a seeded grid of small random instances used by the
invariant and acceptance tests.  One seed gives a quick slice for unit
tests; the acceptance suite runs eight seeds (1080 instances).
"""

from __future__ import annotations

from typing import Iterator

from subsense import Instance
from subsense.generators import random_instance

CORPUS_NS = (2, 3, 4, 5, 6)
CORPUS_DS = (2, 3, 4)
CORPUS_DENSITIES = (0.3, 0.6, 1.0)
CORPUS_TIGHTNESSES = (0.3, 0.5, 0.7)


def corpus(seeds=(0,)) -> Iterator[Instance]:
    for n in CORPUS_NS:
        for d in CORPUS_DS:
            for density in CORPUS_DENSITIES:
                for tightness in CORPUS_TIGHTNESSES:
                    for seed in seeds:
                        yield random_instance(n, d, density, tightness, seed)


def corpus_size(seeds=(0,)) -> int:
    return (
        len(CORPUS_NS)
        * len(CORPUS_DS)
        * len(CORPUS_DENSITIES)
        * len(CORPUS_TIGHTNESSES)
        * len(seeds)
    )
