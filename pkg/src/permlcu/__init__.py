"""permlcu: desk-scale verification engine for time-dependent Hamiltonian
simulation by permutation expansion, integral-free Dyson segments, adaptive
time partitioning, and LCU with oblivious amplitude amplification."""

from . import costcli, dd, dyson, lcu, models, oracle, pham, sched

__all__ = ["dd", "pham", "sched", "dyson", "lcu", "oracle", "costcli", "models"]
__version__ = "0.1.0"
