import sys

import numpy as np
import pytest

from qbridge import AmplitudeDamping, ExperimentSpec, Projective, SplitChannel, Weak, named_basis
from qbridge.qcore import IdentityFamily


def damping_spec(tau=0.5, measurement="projective", delta=0.1, gamma=1.5, beta_tilde=(0.75, 0.25)):
    fam = AmplitudeDamping(gamma)
    z = named_basis("z")
    if measurement == "projective":
        meas = Projective(z, [1.0, -1.0])
    elif measurement == "weak":
        meas = Weak(z, [1.0, -1.0], delta)
    else:
        meas = None
    split = SplitChannel(fam, fam, tau, meas)
    return ExperimentSpec(named_basis("x"), z, [2 / 3, 1 / 3], split, [2 / 3, 1 / 3], beta_tilde)


def anomalous_spec(theta=np.pi / 3, delta=0.1):
    c, s = np.cos(theta), np.sin(theta)
    post = np.array([[c, s], [-s, c]])
    split = SplitChannel(IdentityFamily(2), IdentityFamily(2), 0.5, Weak(named_basis("z"), [1.0, -1.0], delta))
    return ExperimentSpec(named_basis("x"), post, [0.5, 0.5], split, [0.5, 0.5], [0.5, 0.5])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def worked():
    return damping_spec()


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    lines = getattr(acceptance, "RESULT_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
