"""The five ordering properties a consistency model can require of per-process views."""
from __future__ import annotations

from enum import Enum


class Property(str, Enum):
    GPO = "GPO"
    GDO = "GDO"
    GWO = "GWO"
    GAO = "GAO"
    GPDO = "GPDO"

    @classmethod
    def parse(cls, text: str) -> "Property":
        try:
            return cls(text.strip().upper())
        except ValueError:
            raise ValueError(f"unknown property {text!r}") from None

    @property
    def rank(self) -> int:
        return _ORDER.index(self)


_ORDER = [Property.GPO, Property.GDO, Property.GWO, Property.GAO, Property.GPDO]
ALL_PROPERTIES = frozenset(_ORDER)


def sort_properties(props) -> list[Property]:
    return sorted(props, key=lambda p: p.rank)
