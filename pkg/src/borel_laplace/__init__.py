"""Borel-Padé-Laplace time integration with reference schemes and benchmarks.

The solution of ``u' = F(t, u)`` is expanded in a Taylor series, Borel
transformed, continued by Padé approximants and summed back by a
Gauss-Laguerre Laplace integral. Steps are sized by the residue of that
local solution.
"""

from .errors import (BorelLaplaceError, ConvergenceFailure, DegenerateInput, DomainError,
                     NewtonDivergence, NonFiniteCoefficient, OutOfRange, PoleOnRay,
                     RunFailure, StepUnderflow, ValidationError)
from .series import (SeriesProblem, TaylorSeries, evaluate_truncated,
                     evaluate_truncated_derivative, generate_series)
from .summation import (BorelSum, PadeApproximant, QuadratureRule, borel_sum, borel_transform,
                        default_degrees, evaluate_borel_sum, evaluate_borel_sum_derivative,
                        gauss_laguerre_rule, pade_approximant, pade_columns)
from .stability import (StabilityGrid, amplification_anm, amplification_bpl,
                        exponential_borel_pade, region_mask,
                        region_size, write_region_csv, write_size_csv)
from .integrator import (BplConfig, StepRecord, Trajectory, anm_integrate, anm_step,
                         bpl_integrate, bpl_step, dense_output)
from .reference import (AdaptiveConfig, StepperResult, bdf4_integrate, etdrk4_integrate,
                        gauss_legendre10_integrate, rk4_fehlberg_integrate)
from .problems import (NON_STIFF_LV, Dahlquist, KdV, KdvParams, LotkaVolterra,
                       LotkaVolterraParams, QuadraticGrowth, ZeroProblem, kdv_error_metric,
                       kdv_exact, kdv_initial, kdv_problem, lv_first_integral,
                       lv_params_for_ratio, lv_problem, lv_stiffness_ratio,
                       spectral_convolution, spectral_convolution_direct)
from .bench import RunMetrics, Scenario, run_scenario, sweep

__version__ = "0.1.0"
