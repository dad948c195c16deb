"""udnsim: system-level simulator of handover in an ultra-dense 5G small-cell network.

Vehicles move along a three-route road network through a Poisson field of
small cells. Route classifiers trained on position/time samples feed a
screening-cone candidate filter and an SINR-offset penalty that together
suppress unnecessary handovers relative to the conventional best-SINR rule.
"""

__version__ = "0.1.0"

from udnsim.errors import ConfigurationError

__all__ = ["ConfigurationError", "__version__"]
