"""
supercurves: numerical analysis of holomorphic supercurves on the Riemann sphere.

The package computes super energies, checks the defining equations and the mean
value and isoperimetric inequalities, analyses bubbling along degenerating
families, and measures the distance between stable supercurves.
"""

from importlib.metadata import version

try:
    __version__ = version("robotframework-supercurves")
except Exception:  # pragma: no cover
    __version__ = "0.0.0"

__all__ = ["__version__"]
