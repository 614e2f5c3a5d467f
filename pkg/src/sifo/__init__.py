"""Garbled-circuit engine plus an overlay scheduling and timing toolchain."""

from .gc import GarbledCircuit, garble_circuit, round_trip
from .genlib import BENCHMARKS, ProblemSpec
from .netlist import Circuit, Gate, Op, parse, write
from .scheduler import Policy, extract_layers, make_schedule
from .sim import SimOptions, TimingParams, run

__version__ = "0.1.0"

__all__ = [
    "BENCHMARKS", "Circuit", "GarbledCircuit", "Gate", "Op", "Policy", "ProblemSpec",
    "SimOptions", "TimingParams", "extract_layers", "garble_circuit", "make_schedule",
    "parse", "round_trip", "run", "write",
]
