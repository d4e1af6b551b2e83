"""Parameter sweeps over m, temperature, time or B/A.

Rows come out in grid order, then temperature-series order; each row
carries the full parameter context so the table stands alone.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from ..bath_dynamics import damping_rate, entropy_rate, tunneling_probability
from ..core_model import twice
from ..spectra import exact_splitting, instanton_splitting
from .presets import Preset


class ValidationError(ValueError):
    """A sweep or command specification that cannot be run."""


VARIABLES = {"initial_m": "m", "temperature": "T_K", "time": "t_s", "B_over_A": "B_over_A"}

OUTPUT_COLUMNS = {
    "entropy_rate": ("rate_per_s", "tau_dec_s"),
    "tau_dec": ("rate_per_s", "tau_dec_s"),
    "gamma": ("gamma_per_s",),
    "p_minus_s": ("p_minus_s", "p_valid"),
    "delta_e_exact": ("delta_e_exact_J", "delta_e_resolution_J"),
    "delta_e_instanton": ("delta_e_instanton_J", "delta_e_instanton_log10_abs"),
}
NEEDS_T = {"entropy_rate", "tau_dec", "gamma", "p_minus_s"}
NEEDS_M = {"entropy_rate", "tau_dec"}
NEEDS_TIME = {"p_minus_s"}

CONTEXT_COLUMNS = ("s", "A_J", "B_J", "Bint_J", "rho_kg_m3", "c_m_s")

DEFAULT_TEMPERATURES = (2.0, 4.0, 8.0)


@dataclass(frozen=True)
class GridRange:
    min: float
    max: float
    count: int
    scale: str = "linear"

    def values(self) -> list[float]:
        if self.count < 1:
            raise ValidationError("grid count must be >= 1")
        if self.scale == "log":
            if not self.min > 0 or not self.max > 0:
                raise ValidationError("log grids require min > 0 and max > 0")
            return [float(v) for v in np.geomspace(self.min, self.max, self.count)]
        if self.scale != "linear":
            raise ValidationError(f"grid scale must be 'linear' or 'log', got {self.scale!r}")
        return [float(v) for v in np.linspace(self.min, self.max, self.count)]


@dataclass(frozen=True)
class SweepSpec:
    """One swept variable over ``grid``; everything else held fixed.

    ``grid=None`` on an ``initial_m`` sweep means every m from -s to s.
    ``temperatures`` yields one series per entry unless temperature is swept.
    ``m=None`` means m = s and ``t`` is the time for p_minus_s.
    """

    preset: Preset
    variable: str = "initial_m"
    grid: Union[Sequence[float], GridRange, None] = None
    outputs: Sequence[str] = ("entropy_rate",)
    temperatures: Sequence[float] = DEFAULT_TEMPERATURES
    m: Optional[Union[float, Fraction]] = None
    t: float = 0.0
    form: str = "exponential"

    def validate(self) -> None:
        if self.variable not in VARIABLES:
            raise ValidationError(
                f"unknown sweep variable {self.variable!r}; expected one of {', '.join(VARIABLES)}"
            )
        if not self.outputs:
            raise ValidationError("outputs list is empty")
        unknown = [o for o in self.outputs if o not in OUTPUT_COLUMNS]
        if unknown:
            raise ValidationError(
                f"unknown output(s) {', '.join(unknown)}; expected from {', '.join(OUTPUT_COLUMNS)}"
            )
        if not self.grid_values():
            raise ValidationError("sweep grid is empty")
        if self.variable != "temperature" and self.uses_temperature and not self.temperatures:
            raise ValidationError("no temperatures given")
        if self.form not in ("bracket", "exponential"):
            raise ValidationError(f"form must be 'bracket' or 'exponential', got {self.form!r}")
        for T in self.series():
            if T is not None and not (T >= 0 and math.isfinite(T)):
                raise ValidationError(f"temperature must be >= 0 K, got {T!r}")
        if self.variable == "initial_m":
            for m in self.grid_values():
                _checked_m(self.preset, m)
        elif self.uses_m:
            _checked_m(self.preset, self.m_value)
        if self.variable == "time" and any(t < 0 for t in self.grid_values()):
            raise ValidationError("times must be >= 0")
        if self.variable == "B_over_A" and any(r < 0 for r in self.grid_values()):
            raise ValidationError("B/A must be >= 0")

    @property
    def uses_temperature(self) -> bool:
        return bool(NEEDS_T.intersection(self.outputs))

    @property
    def uses_m(self) -> bool:
        return bool(NEEDS_M.intersection(self.outputs))

    @property
    def m_value(self) -> Fraction:
        return self.preset.sys.s if self.m is None else Fraction(self.m)

    def grid_values(self) -> list:
        if self.grid is None:
            if self.variable != "initial_m":
                raise ValidationError(f"a grid is required for variable {self.variable!r}")
            two_s = self.preset.sys.two_s
            return [Fraction(k, 2) for k in range(-two_s, two_s + 1, 2)]
        if isinstance(self.grid, GridRange):
            values = self.grid.values()
        else:
            values = [float(v) for v in self.grid]
        if self.variable == "initial_m":
            return [Fraction(v) for v in values]
        return values

    def series(self) -> list:
        if self.variable == "temperature" or not self.uses_temperature:
            return [None]
        return [float(T) for T in self.temperatures]

    def columns(self) -> list[str]:
        cols = [VARIABLES[self.variable]]
        if self.uses_m and self.variable != "initial_m":
            cols.append("m")
        if self.uses_temperature and self.variable != "temperature":
            cols.append("T_K")
        if NEEDS_TIME.intersection(self.outputs) and self.variable != "time":
            cols.append("t_s")
        for name in self.outputs:
            for col in OUTPUT_COLUMNS[name]:
                if col not in cols:
                    cols.append(col)
        cols.extend(CONTEXT_COLUMNS)
        return cols


@dataclass
class SweepTable:
    columns: list[str]
    rows: list[dict] = field(default_factory=list)

    @property
    def failed(self) -> int:
        return sum(1 for row in self.rows if row.get("error"))


def _checked_m(preset: Preset, m) -> Fraction:
    try:
        preset.sys.check_m(m)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    return Fraction(twice(m, "m"), 2)


def _evaluate_point(args) -> dict:
    spec, value, T = args
    preset = spec.preset
    m = spec.m_value
    t = spec.t
    row: dict = {}
    if spec.variable == "initial_m":
        m = Fraction(value)
        row["m"] = m
    elif spec.variable == "temperature":
        T = value
        row["T_K"] = T
    elif spec.variable == "time":
        t = value
        row["t_s"] = t
    else:
        row["B_over_A"] = value
        preset = replace(preset, sys=replace(preset.sys, B=value * preset.sys.A))
    if spec.uses_m:
        row.setdefault("m", m)
    if spec.uses_temperature:
        row.setdefault("T_K", T)
    if NEEDS_TIME.intersection(spec.outputs):
        row.setdefault("t_s", t)

    sys, bath = preset.sys, preset.bath
    try:
        for name in spec.outputs:
            if name in ("entropy_rate", "tau_dec"):
                result = entropy_rate(sys, bath, T, m)
                row["rate_per_s"], row["tau_dec_s"] = result.rate, result.time
            elif name == "gamma":
                row["gamma_per_s"] = damping_rate(sys, bath, T).rate
            elif name == "p_minus_s":
                row["p_minus_s"], row["p_valid"] = tunneling_probability(sys, bath, T, t, spec.form)
            elif name == "delta_e_exact":
                split = exact_splitting(sys)
                row["delta_e_exact_J"] = split.delta_e_exact
                row["delta_e_resolution_J"] = split.resolution
            elif name == "delta_e_instanton":
                inst = instanton_splitting(sys)
                row["delta_e_instanton_J"] = float(inst)
                row["delta_e_instanton_log10_abs"] = inst.log10_abs
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"

    row.update(
        s=sys.s,
        A_J=sys.A,
        B_J=sys.B,
        Bint_J=bath.B_int,
        rho_kg_m3=bath.rho,
        c_m_s=bath.c,
    )
    return row


def run_sweep(spec: SweepSpec, jobs: Optional[int] = 1) -> SweepTable:
    """Evaluate every grid point; per-point failures land in an ``error`` column."""
    spec.validate()
    points = [(spec, value, T) for value in spec.grid_values() for T in spec.series()]
    if jobs is None:
        jobs = os.cpu_count() or 1
    if jobs > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_evaluate_point, points, chunksize=max(1, len(points) // (4 * jobs))))
    else:
        rows = [_evaluate_point(p) for p in points]

    columns = spec.columns()
    if any("error" in row for row in rows):
        columns.append("error")
    return SweepTable(columns, [{col: row.get(col) for col in columns} for row in rows])
