"""Earth-observation satellite scheduling: scenario generation, binary program assembly and solvers."""

__version__ = "0.1.0"
