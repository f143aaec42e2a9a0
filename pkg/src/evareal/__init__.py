"""Surface-symmetric Einstein-Vlasov solver in areal coordinates, with a
verification layer for the proven late-time behaviour (decay rates, the de
Sitter attractor, characteristic bounds, energy boundedness, convergence of
the rescaled distribution)."""

__version__ = "0.1.0"

from .kinematics import (ConfigError, MassShellPoint, SimConfig, Symmetry,
                         require_valid, sin_k, v_factor, validate_config)
from .phasespace import (DistributionFn, MomentFields, PhaseSpaceGrid,
                         build_initial_data, compute_moments, make_grid,
                         rescale_fhat, support_radius_w,
                         weighted_sobolev_distance)
from .metric import (BlowUpError, MetricState, attractor_e2mu, lambda_dot,
                     mu_dot, mu_prime, step, vacuum_de_sitter)
from .transport import TransportCoefficients, advect, trace_back, transport_coefficients
from .characteristics import (AnalyticDeSitter, MetricHistory,
                              char_rhs, integrate_characteristic,
                              normal_form_coefficients, variational_rhs)
from .diagnostics import (DiagnosticsRecord, RateFit, energy_functionals,
                          fit_decay_rate, make_record, nohair_distances)

__all__ = [name for name in dir() if not name.startswith("_")]
