"""Heavy-traffic workbench for the M/GI/1 queue under Foreground-Background scheduling."""

from .analytic import (TrafficPoint, chebyshev_tail_bound, mean_sojourn_fb, mean_sojourn_fb_alt,
                       mean_sojourn_fb_of_size, mean_sojourn_srpt, mean_waiting_fifo_trunc)
from .asymptotics import (asymptotic_mean_fb, asymptotic_mean_pareto, growth_functional,
                          gumbel_table_mean, r_of, regime_of, srpt_ratio_asymptotic)
from .dist import parse_dist
from .errors import (BracketError, DomainError, FBError, InfiniteMomentError, QuadratureError,
                     SimulationError, UnsupportedRegimeError)
from .sim import SimConfig, SojournStats, check_w_to_exp, empirical_ks, simulate_fb
from .tail import TailParams, f_kernel, g_kernel, g_star, laplace_residual, phi_limit, ttail_limit

__version__ = "0.1.0"
