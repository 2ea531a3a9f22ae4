"""Matrix-valued Gibbs measures and Kusuoka measures for affine IFS."""
from .gibbs import GibbsData, cylinder_tau, gibbs_data, kappa, measure_table
from .ifs import IfsSystem, build_system, preset, preset_dyadic, preset_harmonic_gasket
from .ruelle import EigenPair, apply_const, leading_eigenpair

__all__ = [
    "EigenPair",
    "GibbsData",
    "IfsSystem",
    "apply_const",
    "build_system",
    "cylinder_tau",
    "gibbs_data",
    "kappa",
    "leading_eigenpair",
    "measure_table",
    "preset",
    "preset_dyadic",
    "preset_harmonic_gasket",
]
__version__ = "0.1.0"
