"""Executable authentication codes and their exact operational quantities."""

from app.simkit.base import AuthCode, CodeParams
from app.simkit.evaluate import (MonteCarloEstimate, epsilon_exact, epsilon_monte_carlo, omega_exact,
                                 omega_monte_carlo)
from app.simkit.remap import RemappedCode, remap_transform, remapped_rates
from app.simkit.simmons import (SimmonsCode, build_simmons, simmons_impersonation_success, simmons_params,
                                simmons_substitution_success)
from app.simkit.typeclass import TypeClassCode, build_typeclass_code

__all__ = [
    "AuthCode",
    "CodeParams",
    "MonteCarloEstimate",
    "RemappedCode",
    "SimmonsCode",
    "TypeClassCode",
    "build_simmons",
    "build_typeclass_code",
    "epsilon_exact",
    "epsilon_monte_carlo",
    "omega_exact",
    "omega_monte_carlo",
    "remap_transform",
    "remapped_rates",
    "simmons_impersonation_success",
    "simmons_params",
    "simmons_substitution_success",
]
