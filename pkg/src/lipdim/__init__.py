"""lipdim: multi-scale connectivity profiles and Lipschitz-light map diagnostics.

The package measures, on finite metric spaces, how the diameters of
scale-r connectivity components of map preimages behave across a ladder of
scales, and derives dimension-style diagnostics from those profiles.
"""

from __future__ import annotations

from ._config import REL_TOL, leq_tol
from .errors import ClaimFailure, LipdimError, SchemaError, SpecError
from .metric import (
    EuclideanAmbient,
    ExplicitMatrix,
    FiniteMetricSpace,
    Koranyi,
    KoranyiGrid,
    MetricRule,
    ProductSup,
    ScaleLadder,
    SnowflakePower,
    TreePath,
    UltrametricWords,
    check_metric_axioms,
    eps_net,
    rescale,
    window,
)
from .components import (
    ComponentPartition,
    Dendrogram,
    MergeEvent,
    UnionFind,
    component_path,
    components_profile,
    dendrogram,
    r_components,
)
from .lightness import (
    LightnessProfile,
    LipschitzEstimate,
    SampledMap,
    Witness,
    build_windows,
    classify_profile,
    lipschitz_constant,
    ll_constant_at_scale,
    ll_profile,
)
from .generators import (
    SpaceSpec,
    build_space,
    carpet,
    gasket,
    harmonic_set,
    heisenberg_net,
    interval_net,
    koch,
    middle_cantor,
    product,
    real_subset,
    snowflake_space,
    strip,
    tree,
    word_cantor,
)
from .constructions import (
    MapSpec,
    abs_fold_map,
    build_map,
    cantor_coding_map,
    constant_map,
    identity_map,
    mcshane_extend,
    product_map,
    projection,
    rescale_map,
    restrict_domain,
    tree_root_map,
    union_map,
)
from .estimators import (
    DimensionReport,
    assouad_estimate,
    box_counting,
    david_semmes_constant,
    lipdim_upper_search,
    nagata_zero_constant,
    porosity_constant,
    self_covering_check,
)
from .experiments import available as available_experiments
from .experiments import run_experiment
from .serialization import (
    load_map,
    load_space,
    write_map_values,
    write_profile,
    write_report,
    write_space,
)

__version__ = "0.1.0"

__all__ = [
    "REL_TOL",
    "leq_tol",
    "LipdimError",
    "SpecError",
    "SchemaError",
    "ClaimFailure",
    "MetricRule",
    "EuclideanAmbient",
    "SnowflakePower",
    "Koranyi",
    "UltrametricWords",
    "TreePath",
    "ProductSup",
    "ExplicitMatrix",
    "KoranyiGrid",
    "FiniteMetricSpace",
    "ScaleLadder",
    "eps_net",
    "window",
    "rescale",
    "check_metric_axioms",
    "UnionFind",
    "ComponentPartition",
    "MergeEvent",
    "Dendrogram",
    "r_components",
    "dendrogram",
    "components_profile",
    "component_path",
    "SampledMap",
    "LipschitzEstimate",
    "Witness",
    "LightnessProfile",
    "lipschitz_constant",
    "build_windows",
    "ll_constant_at_scale",
    "ll_profile",
    "classify_profile",
    "SpaceSpec",
    "build_space",
    "carpet",
    "gasket",
    "koch",
    "snowflake_space",
    "heisenberg_net",
    "word_cantor",
    "tree",
    "real_subset",
    "interval_net",
    "middle_cantor",
    "harmonic_set",
    "strip",
    "product",
    "MapSpec",
    "build_map",
    "identity_map",
    "constant_map",
    "projection",
    "product_map",
    "restrict_domain",
    "rescale_map",
    "mcshane_extend",
    "union_map",
    "cantor_coding_map",
    "tree_root_map",
    "abs_fold_map",
    "DimensionReport",
    "box_counting",
    "nagata_zero_constant",
    "porosity_constant",
    "self_covering_check",
    "david_semmes_constant",
    "assouad_estimate",
    "lipdim_upper_search",
    "run_experiment",
    "available_experiments",
    "write_space",
    "load_space",
    "write_map_values",
    "load_map",
    "write_profile",
    "write_report",
    "__version__",
]
