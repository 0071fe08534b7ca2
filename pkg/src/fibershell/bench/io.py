"""Run-directory outputs: CSV tables, legacy VTK point clouds and a text report.

All numbers are written with ``%.17g`` so that repeated runs with the same
seed produce byte-identical files.  A run directory is first written to a
temporary sibling and then renamed into place.
"""

from __future__ import annotations

import os
import shutil
import tempfile
from pathlib import Path

import numpy as np

from .report import BenchReport

FMT = "%.17g"


def _num(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return FMT % float(v)


def write_csv(path: Path, columns, rows, units: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# units: {units}\n")
        fh.write(",".join(columns) + "\n")
        for r in rows:
            fh.write(",".join(_num(v) for v in r) + "\n")


def read_csv(path) -> tuple[list, np.ndarray]:
    """Header columns and data of a file written by :func:`write_csv`."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln and not ln.startswith("#")]
    cols = lines[0].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]]).reshape(-1, len(cols))
    return cols, data


def write_vtk(path: Path, fields: dict, title: str) -> None:
    """Quadrature points as VTK vertices with every field as point data.

    Points are the current positions ``x``; scalar fields become
    ``SCALARS``, 3-vectors ``VECTORS``.
    """
    pts = np.asarray(fields["x"], dtype=float)
    n = len(pts)
    out = [
        "# vtk DataFile Version 3.0",
        title[:255],
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {n} double",
    ]
    out += [" ".join(FMT % c for c in p) for p in pts]
    out.append(f"CELLS {n} {2 * n}")
    out += [f"1 {i}" for i in range(n)]
    out.append(f"CELL_TYPES {n}")
    out += ["1"] * n
    out.append(f"POINT_DATA {n}")
    for key in sorted(fields):
        if key == "x":
            continue
        a = np.asarray(fields[key], dtype=float)
        name = key.replace(" ", "_")
        if a.ndim == 1:
            out += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
            out += [FMT % v for v in a]
        elif a.ndim == 2 and a.shape[1] == 3:
            out.append(f"VECTORS {name} double")
            out += [" ".join(FMT % c for c in v) for v in a]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(out) + "\n")


def format_report(rep: BenchReport, timing: bool = True) -> str:
    lines = [f"scenario: {rep.name}", f"kind: {rep.kind}", f"units: {rep.units}"]
    if timing:
        lines.append(f"runtime [s]: {rep.runtime:.2f}")
    lines.append("")
    lines.append("comparisons (provenance, gate):")
    for c in rep.comparisons:
        status = "PASS" if c.passed else "FAIL"
        gate = "gate" if c.gate else "info"
        lines.append(f"  {status} [{c.provenance}, {gate}] {c.name}: value={_num(c.value)} "
                     f"reference={_num(c.reference)} {c.mode}-error={c.error:.3e} tol={c.tol:.1e}")
        if c.note:
            lines.append(f"       note: {c.note}")
    if rep.metrics:
        lines.append("")
        lines.append("metrics:")
        for k in sorted(rep.metrics):
            lines.append(f"  {k}: {_plain(rep.metrics[k])}")
    if rep.notes:
        lines.append("")
        lines += [f"note: {n}" for n in rep.notes]
    lines.append("")
    lines.append(f"result: {'PASS' if rep.passed else 'FAIL'}")
    return "\n".join(lines) + "\n"


def _plain(v):
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}: {_plain(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_plain(x) for x in v) + "]"
    if v is None or isinstance(v, str):
        return str(v)
    return _num(v)


def write_run(rep: BenchReport, out_dir, scenario_text: str | None = None, timing: bool = False) -> Path:
    """Write all outputs of one run to ``out_dir/<name>`` atomically.

    ``timing`` is off by default so the directory is reproducible bit for bit.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    final = out_dir / rep.name
    tmp = Path(tempfile.mkdtemp(prefix=f".{rep.name}.", dir=out_dir))
    try:
        write_csv(tmp / "reactions.csv", rep.columns, rep.rows, rep.units)
        if rep.energy_rows:
            write_csv(tmp / "energies.csv", rep.energy_columns, rep.energy_rows, rep.units)
        for step in sorted(rep.fields):
            write_vtk(tmp / f"fields_step{step}.vtk", rep.fields[step], f"{rep.name} step {step}")
        (tmp / "report.txt").write_text(format_report(rep, timing), encoding="utf-8")
        if scenario_text is not None:
            (tmp / "scenario.ini").write_text(scenario_text, encoding="utf-8")
        if final.exists():
            old = Path(tempfile.mkdtemp(prefix=f".{rep.name}.old.", dir=out_dir))
            os.replace(final, old / "run")
            os.replace(tmp, final)
            shutil.rmtree(old)
        else:
            os.replace(tmp, final)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    return final
