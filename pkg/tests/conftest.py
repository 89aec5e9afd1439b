import numpy as np
import pytest

from newspred.periods import Frequency, PeriodIndex, PeriodSeries


@pytest.fixture
def rng():
    return np.random.default_rng(20240205)


def monthly(values, start="1996-01"):
    """Shorthand: a monthly PeriodSeries starting at `start`."""
    return PeriodSeries.from_start(start, values)


@pytest.fixture
def make_monthly():
    return monthly
