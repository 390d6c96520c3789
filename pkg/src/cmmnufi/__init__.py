"""Hybrid characteristic-mapping / numerical-flow-iteration solver for 1D+1V Vlasov-Poisson."""
from .config import RunConfig, default_config, parse_config
from .phasegrid import InitialCondition, PhaseGrid, landau, two_stream
from .stepper import SimState, evaluate_window, hybrid_step, init_run, run

__all__ = [
    "RunConfig", "default_config", "parse_config", "InitialCondition", "PhaseGrid", "landau", "two_stream",
    "SimState", "evaluate_window", "hybrid_step", "init_run", "run",
]
