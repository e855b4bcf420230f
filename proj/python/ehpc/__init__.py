"""Optimal power control for energy-harvesting transmitters with lookahead.

Thin package wrapper around the compiled _ehpc module.
"""

try:
    from ._ehpc import (  # noqa: F401
        SystemParams, bellman_g, distance, gamma_star, mcr, offline_allocation,
        offline_throughput, reward, reward_deriv, reward_deriv_inv, simulate_bernoulli,
        solve_lower, solve_online_w0, solve_upper, throughput_inf, throughput_lower_n,
        throughput_upper_n, xi_star,
    )
except ImportError:  # in-tree builds expose the extension at top level
    from _ehpc import (  # noqa: F401
        SystemParams, bellman_g, distance, gamma_star, mcr, offline_allocation,
        offline_throughput, reward, reward_deriv, reward_deriv_inv, simulate_bernoulli,
        solve_lower, solve_online_w0, solve_upper, throughput_inf, throughput_lower_n,
        throughput_upper_n, xi_star,
    )

__all__ = [
    "SystemParams",
    "bellman_g",
    "distance",
    "gamma_star",
    "mcr",
    "offline_allocation",
    "offline_throughput",
    "reward",
    "reward_deriv",
    "reward_deriv_inv",
    "simulate_bernoulli",
    "solve_lower",
    "solve_online_w0",
    "solve_upper",
    "throughput_inf",
    "throughput_lower_n",
    "throughput_upper_n",
    "xi_star",
]
