"""Scenario files: sectioned ``key = value`` text parsed with configparser.

Sections are ``scenario``, ``geometry``, ``fibers``, ``material``,
``constraints``, ``schedule`` and ``output``.  Values are plain strings;
typed access goes through :meth:`Scenario.get`, which names the offending
``section.key`` on any error.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

SECTIONS = ("scenario", "geometry", "fibers", "material", "constraints", "schedule", "output")
_MISSING = object()


class ScenarioError(ValueError):
    """Malformed or inconsistent scenario description."""


def parse_mesh(text: str) -> tuple[int, int]:
    try:
        a, b = text.lower().split("x")
        out = (int(a), int(b))
    except ValueError:
        raise ValueError(f"mesh must look like NxM, got {text!r}") from None
    if min(out) < 1:
        raise ValueError("mesh counts must be >= 1")
    return out


def parse_floats(text: str) -> list[float]:
    return [float(t) for t in text.replace(",", " ").split()]


def parse_vectors(text: str) -> list[list[float]]:
    """``"1 1 0; 1 -1 0"`` -> list of vectors."""
    return [parse_floats(chunk) for chunk in text.split(";") if chunk.strip()]


def parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "yes", "true", "on"):
        return True
    if t in ("0", "no", "false", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass
class Scenario:
    sections: dict = field(default_factory=dict)

    @property
    def name(self) -> str:
        return self.get("scenario", "name")

    @property
    def kind(self) -> str:
        return self.get("scenario", "kind")

    def get(self, section: str, key: str, conv: Callable = str, default: Any = _MISSING):
        sec = self.sections.get(section, {})
        if key not in sec:
            if default is _MISSING:
                raise ScenarioError(f"missing key '{section}.{key}'")
            return default
        try:
            return conv(sec[key])
        except (ValueError, TypeError) as exc:
            raise ScenarioError(f"bad value for '{section}.{key}': {sec[key]!r} ({exc})") from None

    def set(self, section: str, key: str, value) -> None:
        if section not in SECTIONS:
            raise ScenarioError(f"unknown section '{section}'")
        self.sections.setdefault(section, {})[key] = str(value)

    def copy(self) -> "Scenario":
        return Scenario({k: dict(v) for k, v in self.sections.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, Scenario) and self.sections == other.sections


def parse(text: str) -> Scenario:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ScenarioError(f"cannot parse scenario: {exc}") from None
    unknown = [s for s in cp.sections() if s not in SECTIONS]
    if unknown:
        raise ScenarioError(f"unknown section '{unknown[0]}'")
    sc = Scenario({s: dict(cp[s]) for s in cp.sections()})
    for key in ("name", "kind"):
        sc.get("scenario", key)
    return sc


def serialize(sc: Scenario) -> str:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    for s in SECTIONS:
        if s in sc.sections:
            cp[s] = sc.sections[s]
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def load(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def apply_overrides(sc: Scenario, mesh: Optional[str] = None, steps: Optional[int] = None,
                    gauss: Optional[int] = None, seed: Optional[int] = None,
                    tol: Optional[float] = None) -> Scenario:
    """Copy of ``sc`` with command-line overrides applied."""
    out = sc.copy()
    if mesh is not None:
        try:
            parse_mesh(mesh)
        except ValueError as exc:
            raise ScenarioError(f"bad value for '--mesh' (geometry.mesh): {exc}") from None
        out.set("geometry", "mesh", mesh)
    if steps is not None:
        if steps < 1:
            raise ScenarioError("steps must be >= 1")
        out.set("schedule", "steps", steps)
    if gauss is not None:
        if gauss < 1:
            raise ScenarioError("gauss order must be >= 1")
        out.set("geometry", "gauss", gauss)
    if seed is not None:
        out.set("geometry", "seed", seed)
    if tol is not None:
        out.set("output", "tol", tol)
    return out


def vector_or_scalar(text: str):
    v = parse_floats(text)
    return v[0] if len(v) == 1 else np.array(v)
