"""Performance model and Monte Carlo simulator for an RF-energy-harvesting
D2D underlay cell operating a TDD harvest-then-transmit protocol.

The analytical layer (:mod:`d2deh.analysis`) evaluates closed-form operable
probabilities, outage probabilities and sum-rates for the fixed (FTP) and the
adaptive (ATP) access schemes; :mod:`d2deh.simulator` is an independent
slot-level Monte Carlo of the same system; :mod:`d2deh.cli` wires both into a
reproducible experiment runner.
"""

from .model import (ATPConfig, FTPConfig, NetworkParams, SchemeConfig,
                    dbm_to_mw, mw_to_dbm, path_gain, xi)
from .analysis import (MetricsReport, OutageCurve, SchemeDerived, atp_solve,
                       d2d_outage, ftp_solve, optimize_beta_th, scheme_derived,
                       sum_rate)
from .numerics import (ChebyshevGrid, ConvergenceError, IntegrationError,
                       chebyshev_grid)
from .simulator import estimate_metrics

__all__ = [
    "ATPConfig", "FTPConfig", "NetworkParams", "SchemeConfig",
    "dbm_to_mw", "mw_to_dbm", "path_gain", "xi",
    "MetricsReport", "OutageCurve", "SchemeDerived",
    "atp_solve", "ftp_solve", "scheme_derived", "d2d_outage", "sum_rate",
    "optimize_beta_th",
    "ChebyshevGrid", "chebyshev_grid", "ConvergenceError", "IntegrationError",
    "estimate_metrics",
]

__version__ = "0.1.0"
