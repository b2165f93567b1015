"""Exponential functionals of killed Levy processes.

Core objects: the model catalog (`models`), Wiener-Hopf ladder factorization
(`wienerhopf`), Monte Carlo samplers (`montecarlo`), the renewal-equation
density solver (`density`), moment/Mellin recurrences (`moments`), tail and
small-time asymptotics (`asymptotics`), and the distributional identity
verification harness (`checks`).
"""

from .models import ExponentialJumps, LevyModel, SubordinatorModel

__all__ = [
    "ExponentialJumps",
    "LevyModel",
    "SubordinatorModel",
]

__version__ = "0.1.0"
