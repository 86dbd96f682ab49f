"""Instrumented multiply counts for the complexity comparison.

One complex multiply-accumulate counts as one operation, the convention of
the big-O expressions the benchmark is checked against. Every counting site
takes an optional counter and does nothing when it is ``None``.
"""
from __future__ import annotations

from collections import Counter


class FlopCounter:
    def __init__(self):
        self.counts: Counter[str] = Counter()

    def add(self, key: str, n: int | float):
        self.counts[key] += int(n)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def __repr__(self):
        return f"FlopCounter(total={self.total}, {dict(self.counts)})"


def tally(counter: FlopCounter | None, key: str, n: int | float):
    if counter is not None:
        counter.add(key, n)


def matmul(counter, key, m: int, k: int, n: int):
    tally(counter, key, m * k * n)


def inversion(counter, key, n: int):
    tally(counter, key, n**3)
