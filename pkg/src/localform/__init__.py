"""Exact arithmetic for quadratic lattices over non-archimedean local fields."""

from .errors import LocalformError
from .extvals import INF, Ext, ext_max, ext_min
from .fields import (
    ExtensionEmbedding,
    FieldTower,
    PadicElement,
    catalog_names,
    construct_field,
    embedding,
    field_by_name,
)

__all__ = [
    "LocalformError",
    "INF",
    "Ext",
    "ext_max",
    "ext_min",
    "ExtensionEmbedding",
    "FieldTower",
    "PadicElement",
    "catalog_names",
    "construct_field",
    "embedding",
    "field_by_name",
]
