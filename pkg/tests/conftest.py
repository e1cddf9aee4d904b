import numpy as np
import pytest

import urysohn as u


@pytest.fixture(scope="session")
def hammerstein():
    return u.get_problem("paper-hammerstein")


@pytest.fixture(scope="session")
def linear_green():
    return u.get_problem("linear-green")


@pytest.fixture(scope="session")
def zero_kernel():
    return u.get_problem("zero-kernel")


@pytest.fixture(scope="session")
def rule10():
    return u.gauss_rule(10)


@pytest.fixture(scope="session")
def rule16():
    return u.gauss_rule(16)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240811)
