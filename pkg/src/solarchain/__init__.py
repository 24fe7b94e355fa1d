"""Physics-bounded PV verification, deterministic settlement, and market analytics."""

__version__ = "0.1.0"

from .physics import (  # noqa: F401
    BoundConfig,
    NodeSpec,
    PowerBound,
    Verdict,
    WeatherSample,
    clear_sky_irradiance,
    compute_p_max,
    residual_stats,
    solar_elevation,
    verify_record,
)
from .ledger import Ledger, LedgerConfig, LedgerError  # noqa: F401
from .benchmark import Benchmark, BenchmarkConfig, load_dataset, run_pipeline  # noqa: F401
