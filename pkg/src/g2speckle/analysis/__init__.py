"""Maps, scans, sphere searches, ensembles and fits."""

from .ensemble import (
    GeometryRecipe,
    ScalingRow,
    ScalingTable,
    antibunch_scaling_statistic,
    conditional_structure_statistics,
    ensemble_average,
    map_pearson,
    n_sweep,
    s_sweep,
    stable_hash,
)
from .fitting import FitResult, composite_fit, pearson, power_law_fit
from .grid import AngularGrid, MapData, angular_map, map_data, plane_scan
from .search import extremum_search, find_condition_directions, sphere_extrema

__all__ = [
    "AngularGrid",
    "FitResult",
    "GeometryRecipe",
    "MapData",
    "ScalingRow",
    "ScalingTable",
    "angular_map",
    "antibunch_scaling_statistic",
    "composite_fit",
    "conditional_structure_statistics",
    "ensemble_average",
    "extremum_search",
    "find_condition_directions",
    "map_data",
    "map_pearson",
    "n_sweep",
    "pearson",
    "plane_scan",
    "power_law_fit",
    "s_sweep",
    "sphere_extrema",
    "stable_hash",
]
