import pytest


def pytest_addoption(parser):
    parser.addoption('--runslow', action='store_true', default=False,
                     help='Run slow desk-scale experiments.')


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: desk-scale experiment, only '
                            'run with --runslow')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow'):
        return
    skip_slow = pytest.mark.skip(reason='needs --runslow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def _numpy_legacy_repr_for_doctests(request):
    # Doctests were written against NumPy 1.x scalar reprs (``0.385``
    # rather than ``np.float64(0.385)``); only the repr changes.
    from _pytest.doctest import DoctestItem
    if not isinstance(request.node, DoctestItem):
        yield
        return
    import numpy as np
    if int(np.__version__.split('.')[0]) < 2:
        yield
        return
    with np.printoptions(legacy='1.25'):
        yield
