"""CR-geometry tools: Levi form, foliation leaves, normal normalization, peak function."""

from .defining import CATALOG, DefiningFunction, DefiningSystem, catalog, from_callable, from_json, polynomial
from .foliation import LeafPath, LeafTrace, trace_leaf
from .levi import (FlatnessVerdict, LeviValue, StratumReport, SurfaceSampler, complex_tangent,
                   genericity_check, is_levi_flat, levi_form, project_to_intersection, project_to_surface)
from .normalize import HarmonicityError, NormalizationResult, df_normalize
from .peak import PeakReport, in_wedge, peak_check, peak_function, wedge_samples

__all__ = [
    "CATALOG", "DefiningFunction", "DefiningSystem", "catalog", "from_callable", "from_json", "polynomial",
    "LeafPath", "LeafTrace", "trace_leaf",
    "FlatnessVerdict", "LeviValue", "StratumReport", "SurfaceSampler", "complex_tangent",
    "genericity_check", "is_levi_flat", "levi_form", "project_to_intersection", "project_to_surface",
    "HarmonicityError", "NormalizationResult", "df_normalize",
    "PeakReport", "in_wedge", "peak_check", "peak_function", "wedge_samples",
]
