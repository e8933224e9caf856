"""Estimation-throughput tradeoff for underlay spectrum sharing.

The secondary transmitter spends ``tau`` of every frame estimating the power
it receives from the primary transmitter, sets its own power inversely to
that estimate, and transmits for the rest of the frame.  This package gives
the resulting interference and throughput laws in closed or semi-analytic
form, a frame-level simulator to check them, and a solver for the estimation
time that maximizes throughput under a confidence constraint on the
interference.
"""

from .params import (DEFAULTS, ChannelModel, EstimationConfig, ParamsError, SystemParams,
                     effective_noise, load_scenario, parse_scenario, validate)
from .analytic import (ConfidenceResult, ScalarDistribution, confidence, conventional_rate,
                       estimate_alpha_p, expected_throughput, scaling_k)
from .montecarlo import McConfig, McReport, self_consistent_k, simulate
from .tradeoff import TradeoffPoint, TradeoffSolution, bounds, sensitivity, solve, sweep

__all__ = [
    "DEFAULTS", "ChannelModel", "ConfidenceResult", "EstimationConfig", "McConfig", "McReport",
    "ParamsError", "ScalarDistribution", "SystemParams", "TradeoffPoint", "TradeoffSolution",
    "bounds", "confidence", "conventional_rate", "effective_noise", "estimate_alpha_p",
    "expected_throughput", "load_scenario", "parse_scenario", "scaling_k", "self_consistent_k",
    "sensitivity", "simulate", "solve", "sweep", "validate",
]
