"""Second-order sharp-interface expansion of the mass-constrained Cahn-Hilliard energy.

Modules: ``potential`` (double wells), ``profile`` (heteroclinic and constants),
``isoperimetry`` (profiles, rearranged domains, weights), ``rearrangement``
(grid functions to 1D), ``solver1d`` (weighted 1D functional), ``asymptotics``
(predictions and eps sweeps) and ``cli``.
"""
from __future__ import annotations

from .errors import Gamma2Error
from .potential import Potential, quartic, skewed, subquadratic
from .profile import Profile, compute_csym, compute_cw, solve_profile

__version__ = "0.1.0"

__all__ = ["Gamma2Error", "Potential", "Profile", "compute_csym", "compute_cw", "quartic",
           "skewed", "solve_profile", "subquadratic", "__version__"]
