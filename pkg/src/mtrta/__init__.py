"""Response-time analysis and simulation of multi-threaded callback executors."""

from .model import (ARBITRARY, CONSTRAINED, MUTUALLY_EXCLUSIVE, PRIORITY_DRIVEN, REENTRANT,
                    REGULAR, STANDARD, TIMER, AnalysisVerdict, Callback, CallbackGroup, Chain,
                    ExecutorSpec, SystemSpec, ThreadReservation, dedicated_executor, make_chain,
                    single_executor_system, validate)
from .rta import (METHODS, AnalysisConfig, analyze_system, method_config,
                  solve_response_time)
from .sim import SimConfig, SimResult, simulate

__version__ = "0.1.0"
