"""Optimal personalized pricing under price-difference and price-ratio caps.

Thin Python layer over the C++ core. Solutions are returned as plain dicts
with keys ``p_l``, ``p_u``, ``ps``, ``cs``, ``ts``, ``foc_residual`` and
``warnings``. Failures raise :class:`FairpriceError` whose ``args`` are
``(kind, message)``.
"""

from ._core import (
    DemandModel,
    FairpriceError,
    brute_force_solve,
    check_regularity,
    cost_shift,
    dominance_compare,
    efficient_trade_surplus,
    epsilon_threshold,
    exponential,
    fit_logistic,
    load_model_file,
    loan_price,
    logistic,
    mixture_logistic,
    power_law,
    preset,
    preset_names,
    sensitivity,
    solve_difference,
    solve_ratio,
    solve_uniform_price,
    sweep,
    truncated_logistic,
    uniform,
    welfare,
)

__all__ = [
    "DemandModel",
    "FairpriceError",
    "brute_force_solve",
    "check_regularity",
    "cost_shift",
    "dominance_compare",
    "efficient_trade_surplus",
    "epsilon_threshold",
    "exponential",
    "fit_logistic",
    "load_model_file",
    "loan_price",
    "logistic",
    "mixture_logistic",
    "power_law",
    "preset",
    "preset_names",
    "sensitivity",
    "solve_difference",
    "solve_ratio",
    "solve_uniform_price",
    "sweep",
    "truncated_logistic",
    "uniform",
    "welfare",
]
