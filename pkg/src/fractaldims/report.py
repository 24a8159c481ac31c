"""Einstein-relation reports and their serialisations."""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field

import numpy as np

from .io import dumps, jsonable

__all__ = ["Component", "Check", "EinsteinReport", "StageReport", "emit_report", "render_text", "render_csv"]


@dataclass(frozen=True)
class Component:
    """One estimated quantity against its target.

    ``method`` says how the estimate was produced (``moran``, ``boxcount``,
    ``spectrum``, ``exit_curve``, ``literature-target``, ...).
    """

    name: str
    value: float
    method: str
    target: float | None = None
    tolerance: float | None = None
    provenance: str = ""
    fit: dict | None = None

    @property
    def passed(self) -> bool | None:
        if self.target is None or self.tolerance is None:
            return None
        return bool(abs(self.value - self.target) <= self.tolerance)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "method": self.method,
            "target": self.target,
            "tolerance": self.tolerance,
            "delta": None if self.target is None else self.value - self.target,
            "pass": self.passed,
            "provenance": self.provenance,
            "fit": self.fit,
        }


@dataclass(frozen=True)
class Check:
    """An extra pass/fail condition: ``|value - target| <= tolerance`` or,
    for ``relation == "lt"``, ``value < target``."""

    name: str
    value: float
    target: float
    tolerance: float = 0.0
    relation: str = "abs"
    note: str = ""

    @property
    def passed(self) -> bool:
        if self.relation == "lt":
            return bool(self.value < self.target)
        if self.relation == "le":
            return bool(self.value <= self.target + self.tolerance)
        return bool(abs(self.value - self.target) <= self.tolerance)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "target": self.target,
            "tolerance": self.tolerance,
            "relation": self.relation,
            "pass": self.passed,
            "note": self.note,
        }


@dataclass(frozen=True, eq=False)
class EinsteinReport:
    """The three dimensions of one space and ``c = dim_h / (dim_s * dim_w)``."""

    experiment: str
    dim_h: Component
    dim_s: Component
    dim_w: Component
    c_target: float | None = None
    c_tolerance: float | None = None
    c_provenance: str = ""
    checks: tuple[Check, ...] = ()
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.c <= 0 or not np.isfinite(self.c):
            raise ValueError("Einstein constant must be positive and finite")

    @property
    def c(self) -> float:
        return self.dim_h.value / (self.dim_s.value * self.dim_w.value)

    @property
    def c_component(self) -> Component:
        return Component("c", self.c, "dim_h / (dim_s * dim_w)", self.c_target, self.c_tolerance, self.c_provenance)

    def components(self) -> list[Component]:
        return [self.dim_h, self.dim_s, self.dim_w, self.c_component]

    @property
    def passed(self) -> bool:
        flags = [comp.passed for comp in self.components()] + [ch.passed for ch in self.checks]
        return all(f is not False for f in flags)

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "dim_h": self.dim_h.to_dict(),
            "dim_s": self.dim_s.to_dict(),
            "dim_w": self.dim_w.to_dict(),
            "c": self.c_component.to_dict(),
            "checks": {ch.name: ch.to_dict() for ch in self.checks},
            "diagnostics": jsonable(self.diagnostics),
            "pass": self.passed,
        }


@dataclass(frozen=True, eq=False)
class StageReport:
    """Result of a single pipeline stage (one or more components, no ``c``)."""

    experiment: str
    parts: tuple[Component, ...]
    checks: tuple[Check, ...] = ()
    diagnostics: dict = field(default_factory=dict)

    def components(self) -> list[Component]:
        return list(self.parts)

    @property
    def passed(self) -> bool:
        flags = [comp.passed for comp in self.parts] + [ch.passed for ch in self.checks]
        return all(f is not False for f in flags)

    def to_dict(self) -> dict:
        d = {comp.name: comp.to_dict() for comp in self.parts}
        d.update(
            experiment=self.experiment,
            checks={ch.name: ch.to_dict() for ch in self.checks},
            diagnostics=jsonable(self.diagnostics),
        )
        d["pass"] = self.passed
        return d


def _fmt(x) -> str:
    return "-" if x is None else f"{x:.6g}"


def render_text(report) -> str:
    lines = [f"experiment: {report.experiment}", ""]
    lines.append(f"{'quantity':<10} {'estimate':>12} {'target':>12} {'delta':>12} {'tol':>10}  {'pass':<5} method / source")
    for comp in report.components():
        delta = None if comp.target is None else comp.value - comp.target
        ok = {True: "yes", False: "NO", None: "-"}[comp.passed]
        lines.append(
            f"{comp.name:<10} {_fmt(comp.value):>12} {_fmt(comp.target):>12} {_fmt(delta):>12} "
            f"{_fmt(comp.tolerance):>10}  {ok:<5} {comp.method}; {comp.provenance}"
        )
    if report.checks:
        lines += ["", "checks:"]
        for ch in report.checks:
            rel = "<" if ch.relation == "lt" else ("<=" if ch.relation == "le" else "~")
            lines.append(
                f"  {ch.name}: {_fmt(ch.value)} {rel} {_fmt(ch.target)} (tol {_fmt(ch.tolerance)}) "
                f"{'pass' if ch.passed else 'FAIL'}{'; ' + ch.note if ch.note else ''}"
            )
    lines += ["", f"overall: {'PASS' if report.passed else 'FAIL'}"]
    return "\n".join(lines) + "\n"


def render_csv(report) -> str:
    buf = io.StringIO()
    rows = [(c.name, c.value, c.target, c.tolerance, c.passed) for c in report.components()]
    rows += [(ch.name, ch.value, ch.target, ch.tolerance, ch.passed) for ch in report.checks]
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("name", "estimate", "target", "tolerance", "pass"))
    for name, v, t, tol, ok in rows:
        w.writerow((name, repr(float(v)), "" if t is None else repr(float(t)),
                    "" if tol is None else repr(float(tol)), "" if ok is None else str(bool(ok)).lower()))
    return buf.getvalue()


def emit_report(report, fmt: str = "json", path=None) -> str:
    """Serialise ``report``; also write it to ``path`` when given.

    Output is a pure function of the report, so identical runs give
    identical bytes.
    """
    renderers = {"json": lambda r: dumps(r.to_dict()), "csv": render_csv, "text": render_text}
    if fmt not in renderers:
        raise ValueError(f"format must be one of {sorted(renderers)}")
    out = renderers[fmt](report)
    if path is not None:
        try:
            d = os.path.dirname(os.fspath(path))
            if d:
                os.makedirs(d, exist_ok=True)
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(out)
        except OSError as exc:
            raise OSError(f"cannot write report to {path}: {exc}") from exc
    return out
