from .rmt_core import solve_canonical, table_quantities, emi, variance, gaussian_mi
from .iid_closed_form import iid_g, iid_emi, iid_variance, asymptotic_limit, high_snr_approx
from .outage_dmt import outage_probability, outage_rate, finite_snr_dmt, dmt_quick_approx, min_irs_size
from .phase_optimizer import PhaseOptimizer
from .monte_carlo import ChannelSampler

__all__ = [
    "solve_canonical", "table_quantities", "emi", "variance", "gaussian_mi",
    "iid_g", "iid_emi", "iid_variance", "asymptotic_limit", "high_snr_approx",
    "outage_probability", "outage_rate", "finite_snr_dmt", "dmt_quick_approx", "min_irs_size",
    "PhaseOptimizer",
    "ChannelSampler",
]
