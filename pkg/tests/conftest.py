import pytest

from bykovlab.model import parse_config

REFERENCE_TEXT = """\
C_v = 2.0
E_v = 1.0
C_w = 2.0
E_w = 1.0
lambda = 0.01
Pw1 = 0.0
delta_offset = 1.0471975511965976
y_floor = 1e-14
y_max = 1.0
seed = 20240811
tol_root = 1e-10
tol_newton = 1e-12
max_iter = 64
"""


@pytest.fixture(scope="session")
def ref_config():
    """Reference scenario: K = 3, delta = 4, Pw1 = 0, Pw2 = pi, offset pi/3."""
    return parse_config(REFERENCE_TEXT)


@pytest.fixture(scope="session")
def ref_config_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("cfg") / "reference.cfg"
    path.write_text(REFERENCE_TEXT)
    return str(path)


def central_diff(f, z, step=1e-6):
    """Central finite-difference Jacobian of a map R^2 -> R^2."""
    import numpy as np

    jac = np.empty((2, 2))
    for col in range(2):
        zp = list(z)
        zm = list(z)
        zp[col] += step
        zm[col] -= step
        fp = f(*zp)
        fm = f(*zm)
        jac[0, col] = (fp[0] - fm[0]) / (2 * step)
        jac[1, col] = (fp[1] - fm[1]) / (2 * step)
    return jac
