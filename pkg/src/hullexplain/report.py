"""Structured text run reports.

One flat, versioned key/value format serves both humans and tests: floats
are written with repr so every value survives a parse round trip bit for
bit, and vectors are bracketed so a single-element vector stays a vector.
Layout: header metadata, then [config], [warnings], [point N]... and
[aggregate] sections.
"""
from __future__ import annotations

import datetime
from dataclasses import dataclass, field

import numpy as np

from .errors import DataFormatError, InvalidInputError

REPORT_HEADER = "hullexplain report v1"


@dataclass
class PointResult:
    index: int
    values: dict  # name -> int | float | 1-d array, insertion-ordered


@dataclass
class RunReport:
    command: str
    seed: int
    config: dict = field(default_factory=dict)       # name -> str
    warnings: list = field(default_factory=list)     # messages
    points: list = field(default_factory=list)       # PointResult, by index
    aggregates: dict = field(default_factory=dict)   # name -> value
    timestamp: str | None = None
    elapsed: float | None = None


def new_report(command: str, seed: int, config: dict, stamped: bool = True) -> RunReport:
    rep = RunReport(command=command, seed=seed,
                    config={k: str(v) for k, v in config.items()})
    if stamped:
        rep.timestamp = (
            datetime.datetime.now(datetime.timezone.utc)
            .strftime("%Y-%m-%dT%H:%M:%SZ")
        )
    return rep


def _encode(value) -> str:
    if isinstance(value, bool):
        raise InvalidInputError("encode booleans as 0/1 integers")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim != 1:
        raise InvalidInputError(f"report values must be scalars or 1-d, got shape {arr.shape}")
    return "[" + " ".join(repr(float(v)) for v in arr) + "]"


def _decode(text: str):
    if text.startswith("["):
        if not text.endswith("]"):
            raise DataFormatError(f"unterminated vector value {text!r}")
        inner = text[1:-1].strip()
        parts = inner.split() if inner else []
        try:
            return np.array([float(p) for p in parts])
        except ValueError:
            raise DataFormatError(f"non-numeric vector value {text!r}") from None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        raise DataFormatError(f"non-numeric report value {text!r}") from None


def _clean_key(key: str) -> str:
    if not key or "=" in key or "\n" in key or key != key.strip():
        raise InvalidInputError(f"bad report key {key!r}")
    return key


def format_report(rep: RunReport) -> str:
    lines = [REPORT_HEADER,
             f"command = {rep.command}",
             f"seed = {int(rep.seed)}"]
    if rep.timestamp is not None:
        lines.append(f"timestamp = {rep.timestamp}")
    if rep.elapsed is not None:
        lines.append(f"elapsed-seconds = {repr(float(rep.elapsed))}")
    lines.append("")
    lines.append("[config]")
    for key, value in rep.config.items():
        text = str(value)
        if "\n" in text:
            raise InvalidInputError(f"config value for {key!r} contains a newline")
        lines.append(f"{_clean_key(key)} = {text}")
    lines.append("")
    lines.append("[warnings]")
    for message in rep.warnings:
        lines.append("- " + " ".join(str(message).split()))
    for point in rep.points:
        lines.append("")
        lines.append(f"[point {int(point.index)}]")
        for key, value in point.values.items():
            lines.append(f"{_clean_key(key)} = {_encode(value)}")
    lines.append("")
    lines.append("[aggregate]")
    for key, value in rep.aggregates.items():
        lines.append(f"{_clean_key(key)} = {_encode(value)}")
    return "\n".join(lines) + "\n"


def parse_report(text: str) -> RunReport:
    lines = text.splitlines()
    if not lines or lines[0] != REPORT_HEADER:
        raise DataFormatError("not a hullexplain report (missing version header)")
    rep = RunReport(command="", seed=0)
    section = "meta"
    point = None
    for raw in lines[1:]:
        line = raw.strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1]
            point = None
            if name in ("config", "warnings", "aggregate"):
                section = name
            elif name.startswith("point "):
                section = "point"
                try:
                    index = int(name[6:])
                except ValueError:
                    raise DataFormatError(f"bad point index in {name!r}") from None
                point = PointResult(index=index, values={})
                rep.points.append(point)
            else:
                raise DataFormatError(f"unknown report section {name!r}")
            continue
        if section == "warnings":
            if not line.startswith("- "):
                raise DataFormatError(f"malformed warning line {line!r}")
            rep.warnings.append(line[2:])
            continue
        if "=" not in line:
            raise DataFormatError(f"malformed report line {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if section == "meta":
            if key == "command":
                rep.command = value
            elif key == "timestamp":
                rep.timestamp = value
            elif key in ("seed", "elapsed-seconds"):
                try:
                    number = int(value) if key == "seed" else float(value)
                except ValueError:
                    raise DataFormatError(
                        f"bad value for {key!r}: {value!r}") from None
                if key == "seed":
                    rep.seed = number
                else:
                    rep.elapsed = number
            else:
                raise DataFormatError(f"unknown report field {key!r}")
        elif section == "config":
            rep.config[key] = value
        elif section == "point":
            point.values[key] = _decode(value)
        else:
            rep.aggregates[key] = _decode(value)
    return rep


def write_report(rep: RunReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_report(rep))


def read_report(path) -> RunReport:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_report(fh.read())
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc.strerror or exc}") from exc
