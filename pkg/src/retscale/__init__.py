"""Return-interval scaling analysis of volatility records."""

__version__ = "0.1.0"

from .stretchedexp import (StretchedExpParams, params_from_gamma, survival, analytic_moment,
                           sample, fit_gamma)
from .volatility import PriceSeries, VolatilitySeries, load_prices, compute_volatility
from .intervals import (IntervalSeries, ThresholdSweep, extract_intervals, sweep_thresholds,
                        moment, scaled_intervals)
from .dist import EmpiricalCdf, empirical_survival, collapse_deviation
from .surrogate import SurrogateConfig, make_surrogate, spectrum_distance
from .multiscaling import (MomentCurve, AlphaEstimate, AlphaEnsemble, fit_alpha,
                           alpha_histogram, alpha_vs_m)
from .simulate import (SimulationPlan, simulate_intervals, discretize,
                       run_discreteness_experiment, run_finite_size_experiment)
