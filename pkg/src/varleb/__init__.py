"""varleb: variable-exponent Lebesgue norms, Muckenhoupt-type weight
constants, maximal operators, compactness diagnostics, and empirical
interpolation/extrapolation experiments on rectangular grids."""

from .errors import (ArityMismatchError, ConvergenceError, DomainError,
                     EmptyRegionError, HypothesisFailureError,
                     OverflowToInfinityError, RangeError, SchemaError,
                     SpecMismatchError, VarlebError, VersionMismatchWarning)
from .exponent import (ExponentField, LogHolderReport, QuadrupleSpec,
                       QuadrupleVerdict, blend_quadruple, component_exponent,
                       dual_exponent, harmonic_combine, log_holder_estimate,
                       nu_exponent, reciprocal_affine, scale_exponent,
                       theta_blend, theta_invert, two_to_one_data,
                       validate_quadruple)
from .field import (Box, Cube, DyadicCubeSet, Grid, GridFunction, WeightField,
                    ball_average, ball_mask, box_mask, integrate,
                    random_simple_function, read_grid_csv, realize_function,
                    region_measure, shift_function, write_grid_csv)
from .interp import (EndpointSpace, ExtrapolationBuild, InterpolationReport,
                     MixedInterpolationReport, OperatorSpec, ThetaEntry,
                     WorkflowReport, apply_operator, blend_spaces,
                     build_extrapolation_family, difference_field,
                     run_extrapolation_workflow, verify_interpolation_bound,
                     verify_mixed_interpolation_bound)
from .maximal import (ProbeReport, RadiusSweep, ball_mean, ball_sums,
                      maximal_boundedness_probe, maximal_function,
                      oscillation_average)
from .norms import (NormResult, duality_pairing_lower_bound, holder_constant,
                    luxemburg_norm, mixed_norm, modular, pairing,
                    weight_measure, weighted_norm)
from .rk import (FunctionFamily, NetReport, RKReport, classify, dilate_family,
                 eps_net_oracle, equi_integrability_measure,
                 equicontinuity_profile, family_distance_matrix,
                 mollify, mollify_family, modulate_family, translate_family,
                 uniform_bound_profile, vanishing_profile)
from .weights import (BlendReport, ComponentwiseReport, ContainmentReport,
                      TwoToOneReport, WeightConstantReport, ap_constant,
                      ap_constant_density, blend_constant_check,
                      componentwise_characterize, containment_check,
                      density_from_weight, multilinear_constant,
                      two_to_one_check, weight_from_density)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
