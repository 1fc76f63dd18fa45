import warnings
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from distgeom import GenConfig, build_instance

settings.register_profile("suite", derandomize=True, max_examples=60, deadline=None)
settings.load_profile("suite")

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir():
    return DATA_DIR


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_point_instance(num_atoms=20, seed=0, epsilon=0.8, cutoff=8.0,
                        keep_fraction=0.5, spread=12.0, name="points"):
    """Instance from a random point cloud; dense enough to stay connected."""
    point_rng = np.random.default_rng(seed)
    points = point_rng.uniform(0.0, spread, size=(num_atoms, 3))
    cfg = GenConfig(epsilon=epsilon, cutoff=cutoff, keep_fraction=keep_fraction,
                    seed=seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        return build_instance(points, cfg, name=name)


@pytest.fixture
def small_instance():
    return make_point_instance(num_atoms=15, seed=7)
