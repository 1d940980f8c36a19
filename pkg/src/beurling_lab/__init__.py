"""beurling_lab: numerical toolkit for Beurling regular variation.

Self-neglecting auxiliary functions, phi-regular variation and its index,
uniformity profiles, the phi-generated flow, representations and C1
interpolation over Bloom partitions.
"""

__version__ = "0.1.0"

from .asymptotics import ConvergenceReport, TGrid, XSchedule, extrapolate_limit
from .brv import (RatioField, IndexEstimate, cfe_residual, cocycle_defect, cocycle_profile,
                  estimate_index, estimate_karamata_index, limit_g, shift_uniformity,
                  uct_profile)
from .errors import (BeurlingLabError, ConfigError, DomainError, IntegrationError, LimitError,
                     NonFiniteError, ParseError, PositivityError, QuadratureError)
from .flow import (embedding_residual, flow_map, integrate_flow, near_assoc, preaction,
                   reach_time, time_measure)
from .funcspace import (RealFunc, const_c, gamma_rho_builtin, identity_x, parse_expr,
                        power_alpha, x_over_log)
from .interp import BloomPartition, InterpolantC1, bloom_partition, interpolate_c1, smooth_rep_check
from .represent import (GammaRepresentation, build_gamma, decompose, extract_components,
                        make_f_rho, verify_reduction)
from .sn_check import check_karamata_additive, check_little_o, check_phi_slow, check_sn
