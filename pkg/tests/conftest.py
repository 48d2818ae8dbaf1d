import numpy as np
import pytest

from foldylax import IncidentWave, ScattererCloud


def make_wave(kappa=1.0, theta=(0.0, 0.0, 1.0)):
    th = np.asarray(theta, dtype=float)
    return IncidentWave(kappa=float(kappa), theta=th / np.linalg.norm(th))


def make_cloud(centers, radius, impedance, regime=None, areas=None):
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    m = len(centers)
    return ScattererCloud(centers=centers,
                          radii=np.full(m, float(radius)),
                          impedances=np.full(m, impedance, dtype=complex),
                          regime=regime, areas=areas)


@pytest.fixture
def wave():
    return make_wave()


@pytest.fixture
def tilted_wave():
    return make_wave(kappa=1.3, theta=(1.0, 2.0, -0.5))
