from __future__ import annotations

import pytest

from solarchain.benchmark import BenchmarkConfig, run_pipeline, write_dataset


@pytest.fixture(scope="session")
def default_result():
    """Default-seed pipeline result shared across test modules."""
    return run_pipeline(BenchmarkConfig(seed=42))


@pytest.fixture(scope="session")
def dataset_dir(default_result, tmp_path_factory):
    out = tmp_path_factory.mktemp("bench42")
    write_dataset(default_result, str(out))
    return out
