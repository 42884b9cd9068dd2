"""Line-oriented text format for measures and distributions.

Grammar (one `key = value` per line; blank lines and # comments ignored):

    atom = p, k, c            repeatable: coefficient c times d^k delta_p
    density = uniform, a, b[, height]
    density = grid, <csv-path>
    support = [a1,b1];[a2,b2]  declared support override (measures only)

Measures restrict atoms to order 0 with nonnegative coefficients (point
masses) and require a nonnegative density.  Unknown keys are rejected.
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from .distributions import Density, RadonMeasureSpec, StructuredDistribution, SupportSet
from .errors import DomainError
from .numerics import GridFunction


class SpecFormatError(ValueError):
    """A spec file line could not be interpreted."""


_INTERVAL_RE = re.compile(r"\[\s*([^,\]]+)\s*,\s*([^,\]]+)\s*\]")


def _parse_lines(path: Path) -> List[Tuple[str, str]]:
    pairs = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecFormatError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        pairs.append((key.strip().lower(), value.strip()))
    return pairs


def _parse_density(value: str, base: Path) -> Density:
    parts = [p.strip() for p in value.split(",")]
    if parts[0] == "uniform":
        if len(parts) == 3:
            return Density.uniform(float(parts[1]), float(parts[2]))
        if len(parts) == 4:
            return Density.uniform(float(parts[1]), float(parts[2]), float(parts[3]))
        raise SpecFormatError("uniform density takes 'uniform, a, b[, height]'")
    if parts[0] == "grid":
        if len(parts) != 2:
            raise SpecFormatError("grid density takes 'grid, <csv-path>'")
        csv_path = (base.parent / parts[1]).resolve() if not Path(parts[1]).is_absolute() else Path(parts[1])
        if not csv_path.exists():
            raise SpecFormatError(f"grid density file not found: {csv_path}")
        data = np.loadtxt(csv_path, delimiter=",", comments="#")
        if data.ndim != 2 or data.shape[1] != 2 or data.shape[0] < 9:
            raise SpecFormatError("grid density CSV needs >= 9 rows of x,value")
        x, vals = data[:, 0], data[:, 1]
        steps = np.diff(x)
        if np.max(np.abs(steps - steps[0])) > 1e-9 * max(abs(steps[0]), 1e-30):
            raise SpecFormatError("grid density CSV must be uniformly spaced")
        return Density.from_grid(GridFunction(float(x[0]), float(x[-1]), vals))
    raise SpecFormatError(f"unknown density kind {parts[0]!r}")


def _parse_support(value: str) -> SupportSet:
    intervals = []
    for chunk in value.split(";"):
        chunk = chunk.strip()
        m = _INTERVAL_RE.fullmatch(chunk)
        if not m:
            raise SpecFormatError(f"bad support interval {chunk!r}; expected [a,b]")
        intervals.append((float(m.group(1)), float(m.group(2))))
    return SupportSet(tuple(intervals))


def _parse_atom(value: str) -> Tuple[float, int, float]:
    parts = [p.strip() for p in value.split(",")]
    if len(parts) != 3:
        raise SpecFormatError("atom takes 'p, k, c'")
    p, k, c = float(parts[0]), parts[1], float(parts[2])
    if not re.fullmatch(r"[+-]?\d+", k) or int(k) < 0:
        raise SpecFormatError(f"atom order must be a nonnegative integer, got {k!r}")
    return p, int(k), c


def read_distribution(path: str | Path) -> StructuredDistribution:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such spec file: {path}")
    atoms = []
    density: Optional[Density] = None
    for key, value in _parse_lines(path):
        if key == "atom":
            atoms.append(_parse_atom(value))
        elif key == "density":
            if density is not None:
                raise SpecFormatError(f"{path}: repeated density")
            density = _parse_density(value, path)
        elif key == "support":
            raise SpecFormatError(f"{path}: support overrides apply to measures only")
        else:
            raise SpecFormatError(f"{path}: unknown key {key!r}")
    return StructuredDistribution(tuple(atoms), density)


def read_measure(path: str | Path) -> RadonMeasureSpec:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such spec file: {path}")
    masses = []
    density: Optional[Density] = None
    support: Optional[SupportSet] = None
    for key, value in _parse_lines(path):
        if key == "atom":
            p, k, c = _parse_atom(value)
            if k != 0:
                raise SpecFormatError(f"{path}: measures take order-0 atoms only")
            masses.append((p, c))
        elif key == "density":
            if density is not None:
                raise SpecFormatError(f"{path}: repeated density")
            density = _parse_density(value, path)
        elif key == "support":
            support = _parse_support(value)
        else:
            raise SpecFormatError(f"{path}: unknown key {key!r}")
    try:
        return RadonMeasureSpec(density, tuple(masses), support)
    except DomainError as exc:
        raise SpecFormatError(f"{path}: {exc}") from exc
