"""Built-in parameter sets and flat ``key = value`` config files."""

from __future__ import annotations

import os
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Union

from ..bath_dynamics import BathParams
from ..core_model import SpinSystem, twice


class ConfigError(ValueError):
    """Invalid preset name or malformed config file."""


@dataclass(frozen=True)
class Preset:
    name: str
    sys: SpinSystem
    bath: BathParams

    def with_overrides(self, **fields) -> "Preset":
        """Copy with any of s, A, B, B_int, rho, c replaced (None means keep)."""
        fields = {k: v for k, v in fields.items() if v is not None}
        sys_fields = {}
        if "s" in fields:
            sys_fields["two_s"] = twice(fields.pop("s"), "s")
        for key in ("A", "B"):
            if key in fields:
                sys_fields[key] = float(fields.pop(key))
        bath_fields = {k: float(fields.pop(k)) for k in ("B_int", "rho", "c") if k in fields}
        if fields:
            raise ConfigError(f"unknown override(s): {', '.join(sorted(fields))}")
        return Preset(
            self.name,
            replace(self.sys, **sys_fields) if sys_fields else self.sys,
            replace(self.bath, **bath_fields) if bath_fields else self.bath,
        )


_MN12_A = 7.5e-24
_SPM_A = 2.57e-27

PRESETS = {
    "mn12": Preset(
        "mn12",
        SpinSystem(two_s=20, A=_MN12_A, B=1.7e-26),
        BathParams(B_int=_MN12_A, rho=1.83e3, c=2.0e3),
    ),
    "spm": Preset(
        "spm",
        SpinSystem(two_s=6444, A=_SPM_A, B=2.57e-30),
        BathParams(B_int=4.1e-23, rho=5.0e3, c=3.0e3),
    ),
}

CONFIG_KEYS = ("s", "A_J", "B_J", "Bint_J", "rho_kg_m3", "c_m_s")


def serialize_preset(preset: Preset) -> str:
    """Render as a config file; floats use repr so parsing is bit-exact."""
    lines = [
        f"name = {preset.name}",
        f"s = {preset.sys.s}",
        f"A_J = {preset.sys.A!r}",
        f"B_J = {preset.sys.B!r}",
        f"Bint_J = {preset.bath.B_int!r}",
        f"rho_kg_m3 = {preset.bath.rho!r}",
        f"c_m_s = {preset.bath.c!r}",
    ]
    return "\n".join(lines) + "\n"


def parse_config(text: str, source: str = "<config>") -> Preset:
    values: dict[str, tuple[str, int]] = {}
    name = os.path.splitext(os.path.basename(source))[0]
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "name":
            name = value
            continue
        if key not in CONFIG_KEYS:
            raise ConfigError(
                f"{source}:{lineno}: unknown key {key!r}; expected one of {', '.join(CONFIG_KEYS)}"
            )
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"{source}:{lineno}: empty value for {key!r}")
        values[key] = (value, lineno)

    missing = [k for k in CONFIG_KEYS if k not in values]
    if missing:
        raise ConfigError(f"{source}: missing key(s) {', '.join(missing)}")

    parsed = {}
    for key, (value, lineno) in values.items():
        try:
            parsed[key] = Fraction(value) if key == "s" else float(value)
        except ValueError:
            raise ConfigError(f"{source}:{lineno}: {key} = {value!r} is not a number") from None
    try:
        sys = SpinSystem(twice(parsed["s"], "s"), parsed["A_J"], parsed["B_J"])
        bath = BathParams(parsed["Bint_J"], parsed["rho_kg_m3"], parsed["c_m_s"])
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return Preset(name, sys, bath)


def load_preset(name: Union[str, os.PathLike]) -> Preset:
    """Built-in preset by name ("mn12", "spm") or a config-file path."""
    key = os.fspath(name)
    if key in PRESETS:
        return PRESETS[key]
    if os.path.isfile(key):
        with open(key, encoding="utf-8") as fh:
            return parse_config(fh.read(), source=key)
    raise ConfigError(
        f"unknown preset {key!r}; valid options: {', '.join(PRESETS)} or a config-file path"
    )
