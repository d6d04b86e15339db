import pytest

from msjlab import JobTypeSpec, ParamSet, SystemConfig, make_param_set


@pytest.fixture(scope="session")
def set_one_64():
    return make_param_set(ParamSet.ONE, 64)


@pytest.fixture(scope="session")
def mm2():
    # M/M/2 at half load: the Erlang-C reference case
    return SystemConfig(n=2, types=(JobTypeSpec(1.0, 1.0, 1),))


@pytest.fixture(scope="session")
def whole_machine():
    # every job occupies the full machine: M/M/1 with rho = 0.5
    return SystemConfig(n=4, types=(JobTypeSpec(0.5, 1.0, 4),))


@pytest.fixture(scope="session")
def two_type():
    # n=6, needs (1, 3), slack 3.09 > l_max: CTMC-oracle reference config.
    # Most load sits on the small type so both queue lengths are far from
    # rare-event territory and batch means behave.
    return SystemConfig(n=6, types=(JobTypeSpec(2.76, 1.0, 1),
                                    JobTypeSpec(0.05, 1.0, 3)))
