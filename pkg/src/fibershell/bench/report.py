"""Benchmark report containers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np


@dataclass
class Comparison:
    """One oracle comparison.

    ``provenance`` is ``closed-form`` (printed formula), ``derived`` (our own
    oracle or analysis) or ``property`` (qualitative check; ``value`` is the
    measured quantity and ``reference`` the bound).  Non-gating entries are
    reported but do not decide the exit status of ``verify``.
    """

    name: str
    value: float
    reference: float
    tol: float
    provenance: str
    mode: str = "rel"        # "rel", "abs" or "le" (value <= reference)
    gate: bool = True
    note: str = ""

    @property
    def error(self) -> float:
        if self.mode == "le":
            return max(0.0, self.value - self.reference)
        d = abs(self.value - self.reference)
        if self.mode == "abs" or self.reference == 0.0:
            return d
        return d / abs(self.reference)

    @property
    def passed(self) -> bool:
        if not np.isfinite(self.value):
            return False
        if self.mode == "le":
            return self.value <= self.reference
        return self.error <= self.tol


@dataclass
class BenchReport:
    name: str
    kind: str
    units: str
    columns: list = field(default_factory=list)     # reaction table header (name [unit])
    rows: list = field(default_factory=list)        # one list per step
    energy_columns: list = field(default_factory=list)
    energy_rows: list = field(default_factory=list)
    comparisons: list = field(default_factory=list)
    fields: dict = field(default_factory=dict)      # step -> point fields
    metrics: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    runtime: float = 0.0

    def add(self, *args, **kw) -> Comparison:
        c = Comparison(*args, **kw)
        self.comparisons.append(c)
        return c

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.comparisons if c.gate)

    def column(self, name: str) -> np.ndarray:
        for i, c in enumerate(self.columns):
            if c == name or c.split(" [")[0] == name:
                return np.array([r[i] for r in self.rows], dtype=float)
        raise KeyError(name)

    def find(self, name: str) -> Optional[Comparison]:
        for c in self.comparisons:
            if c.name == name:
                return c
        return None
