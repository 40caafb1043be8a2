"""Unit registry and affine conversion between units of one dimension."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import UnitDimensionError, UnknownUnitError

PRESSURE = "pressure"
TEMPERATURE = "temperature"
LENGTH = "length"
MASS = "mass"


@dataclass(frozen=True)
class UnitDef:
    """One unit: value_in_base = value * factor + offset."""

    symbol: str
    dimension: str
    factor: float
    offset: float = 0.0


# Base units: pressure Pa, temperature °C, length mm, mass kg.
_UNITS = [
    UnitDef("Па", PRESSURE, 1.0),
    UnitDef("кПа", PRESSURE, 1e3),
    UnitDef("МПа", PRESSURE, 1e6),
    UnitDef("бар", PRESSURE, 1e5),
    UnitDef("атм", PRESSURE, 101325.0),
    UnitDef("кгс/см²", PRESSURE, 98066.5),
    UnitDef("м вод.ст.", PRESSURE, 9806.65),
    UnitDef("мм рт.ст.", PRESSURE, 133.322),
    UnitDef("°C", TEMPERATURE, 1.0, 0.0),
    UnitDef("К", TEMPERATURE, 1.0, -273.15),
    UnitDef("°F", TEMPERATURE, 5.0 / 9.0, -160.0 / 9.0),
    UnitDef("мм", LENGTH, 1.0),
    UnitDef("см", LENGTH, 10.0),
    UnitDef("м", LENGTH, 1000.0),
    UnitDef("дюйм", LENGTH, 25.4),
    UnitDef("кг", MASS, 1.0),
    UnitDef("г", MASS, 1e-3),
    UnitDef("т", MASS, 1e3),
]

_ALIASES = {
    "Pa": "Па",
    "kPa": "кПа",
    "MPa": "МПа",
    "bar": "бар",
    "atm": "атм",
    "кгс/см2": "кгс/см²",
    "kgf/cm2": "кгс/см²",
    "м вод ст": "м вод.ст.",
    "м.вод.ст.": "м вод.ст.",
    "mH2O": "м вод.ст.",
    "мм рт ст": "мм рт.ст.",
    "C": "°C",
    "°С": "°C",  # Cyrillic С
    "С": "°C",
    "K": "К",
    "F": "°F",
    "mm": "мм",
    "cm": "см",
    "m": "м",
    "in": "дюйм",
    "kg": "кг",
    "g": "г",
    "t": "т",
}


class UnitRegistry:
    """Lookup of unit symbols; conversion is exact affine composition via the base unit."""

    def __init__(self, units: list[UnitDef] | None = None, aliases: dict[str, str] | None = None):
        self._units: dict[str, UnitDef] = {}
        for u in units if units is not None else _UNITS:
            self._units[u.symbol] = u
        self._aliases = dict(_ALIASES if aliases is None else aliases)

    def resolve(self, symbol: str) -> UnitDef:
        s = symbol.strip()
        s = self._aliases.get(s, s)
        try:
            return self._units[s]
        except KeyError:
            raise UnknownUnitError(f"unknown unit {symbol!r}") from None

    def canonical(self, symbol: str) -> str:
        return self.resolve(symbol).symbol

    def knows(self, symbol: str) -> bool:
        s = symbol.strip()
        return self._aliases.get(s, s) in self._units

    def dimension(self, symbol: str) -> str:
        return self.resolve(symbol).dimension

    def same_dimension(self, a: str, b: str) -> bool:
        return self.resolve(a).dimension == self.resolve(b).dimension

    def to_base(self, value: float, symbol: str) -> float:
        u = self.resolve(symbol)
        return value * u.factor + u.offset

    def convert(self, value: float, from_unit: str, to_unit: str) -> float:
        src = self.resolve(from_unit)
        dst = self.resolve(to_unit)
        if src.dimension != dst.dimension:
            raise UnitDimensionError(
                f"cannot convert {from_unit!r} ({src.dimension}) to {to_unit!r} ({dst.dimension})"
            )
        if src is dst or src == dst:
            return value
        return (value * src.factor + src.offset - dst.offset) / dst.factor


DEFAULT_REGISTRY = UnitRegistry()


def convert(value: float, from_unit: str, to_unit: str, registry: UnitRegistry | None = None) -> float:
    """Convert value between two units of the same dimension."""
    return (registry or DEFAULT_REGISTRY).convert(value, from_unit, to_unit)
