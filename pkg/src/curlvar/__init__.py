"""curlvar: a variational solver for the critical curl-curl equation in box cavities.

The package estimates curl Sobolev-type constants, computes discrete ground
states of  curl curl u = |u|^4 u  under the metallic boundary condition, and
traces the Brezis-Nirenberg branch  curl curl u + lambda u = |u|^4 u  across
the cavity spectrum.
"""

from .fields import (
    EnergyReport,
    ScalarPotential,
    VectorField,
    dot_l2,
    energy,
    lp_norm,
    norm_l2,
    rescale,
)
from .grids import GridSpec
from .helmholtz import DecomposedField, decompose, project_V
from .inner import InnerSolution, NonlinearitySpec, minimize_w, minimize_w_tilde
from .nehari import (
    NehariPoint,
    project_nehari,
    project_nehari_lambda,
    ray_kernel_gap,
    scalar_t,
)
from .spectrum import EigenPair, SpectralSubspace, build_Vtilde, cavity_mode_ladder, curl_curl_eigs
from .groundstate import (
    ConcentrationReport,
    GroundStateResult,
    concentration_report,
    minimize_sphere,
    recenter,
    sobolev_oracle,
)
from .bn import BNResult, compute_c_lambda, existence_window, multiplicity_count, sweep_c_lambda

__version__ = "0.1.0"

__all__ = [
    "GridSpec",
    "VectorField",
    "ScalarPotential",
    "EnergyReport",
    "dot_l2",
    "norm_l2",
    "lp_norm",
    "energy",
    "rescale",
    "DecomposedField",
    "decompose",
    "project_V",
    "NonlinearitySpec",
    "InnerSolution",
    "minimize_w",
    "minimize_w_tilde",
    "NehariPoint",
    "scalar_t",
    "project_nehari",
    "project_nehari_lambda",
    "ray_kernel_gap",
    "EigenPair",
    "SpectralSubspace",
    "curl_curl_eigs",
    "build_Vtilde",
    "cavity_mode_ladder",
    "GroundStateResult",
    "ConcentrationReport",
    "minimize_sphere",
    "sobolev_oracle",
    "concentration_report",
    "recenter",
    "BNResult",
    "compute_c_lambda",
    "existence_window",
    "multiplicity_count",
    "sweep_c_lambda",
    "__version__",
]
