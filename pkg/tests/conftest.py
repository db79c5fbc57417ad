import os
from pathlib import Path

import pytest

from twinbeam import config, io, pipeline
from twinbeam.configs import path as config_path

ACCEPTANCE_LINES = []
CACHE_DIR = Path(os.environ.get("TWINBEAM_CACHE", Path.home() / ".cache" / "twinbeam"))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def reference_cfg():
    return config.load_config_file(config_path("reference.ini"))


@pytest.fixture(scope="session")
def reduced_cfg():
    return config.load_config_file(config_path("reduced_waist.ini"))


@pytest.fixture(scope="session")
def reduced_model(reduced_cfg):
    return pipeline.build_model(reduced_cfg)


@pytest.fixture(scope="session")
def reduced_analysis(reduced_model):
    return pipeline.Analysis(reduced_model)


@pytest.fixture(scope="session")
def reference_scale(reference_cfg):
    """Eigenvalue-only transverse modes and the low-gain near-field cut at full pump radius.

    The 20-30 minute streaming run is cached on disk under ``TWINBEAM_CACHE`` keyed by
    the configuration digest.
    """
    digest = reference_cfg.digest()
    cache = CACHE_DIR / f"transverse_{digest}.npz"
    if cache.exists():
        loaded = io.load_transverse_eigenvalues(cache, digest)
        if loaded is not None:
            return loaded + ({"cached": True},)
    modes, cut, timings = pipeline.large_scale_transverse(reference_cfg)
    CACHE_DIR.mkdir(parents=True, exist_ok=True)
    io.save_transverse_eigenvalues(cache, modes, digest, cut)
    return modes, cut, timings


@pytest.fixture(scope="session")
def reference_analysis(reference_cfg, reference_scale):
    modes = reference_scale[0]
    return pipeline.Analysis(pipeline.build_model(reference_cfg, transverse_modes=modes))
