import pytest
import torch

from rnls.grid import Field, Grid, norm_lq
from rnls.log import logger
from rnls.log import directory


def pytest_addoption(parser):
    parser.addoption('--runslow', action='store_true', default=False, help='run full-scale reproduction tests')


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: full-scale reproduction run, needs --runslow')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow'):
        return
    skip_slow = pytest.mark.skip(reason='needs --runslow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def plain_logger():
    colored = logger.colored
    logger.colored = False
    yield
    logger.colored = colored


@pytest.fixture
def out_dir(tmp_path, monkeypatch):
    """Output directory of the run, isolated per test."""
    monkeypatch.setattr(directory, 'BASE_PATH', str(tmp_path))
    return tmp_path


@pytest.fixture
def grid_1d():
    return Grid.box(1, (-8.0, 8.0), 64)


@pytest.fixture
def grid_2d():
    return Grid.box(2, (-8.0, 8.0), 64)


def gaussian(grid: Grid, width: float = 1.0, center=None, amplitude: complex = 1.0) -> Field:
    center = center if center is not None else (0.0,) * grid.dim
    r2 = sum((grid.mesh(axis) - center[axis]) ** 2 for axis in range(grid.dim))
    return Field(grid, amplitude * torch.exp(-r2 / (2 * width ** 2)))


@pytest.fixture
def smooth_field():
    """Factory of smooth, well localized random complex fields."""
    def build(grid: Grid, seed: int = 0, terms: int = 3) -> Field:
        generator = torch.Generator().manual_seed(seed)
        total = Field.zeros(grid)
        for _ in range(terms):
            values = torch.rand(2 + grid.dim + 1, generator=generator, dtype=torch.float64)
            amplitude = complex(values[0].item() - 0.5, values[1].item() - 0.5) * 2
            center = [2.0 * (values[2 + axis].item() - 0.5) for axis in range(grid.dim)]
            width = 0.6 + 0.4 * values[-1].item()
            total = total + gaussian(grid, width, center, amplitude)
        return total
    return build


def unit(f: Field) -> Field:
    return f / norm_lq(f, 2.0)

