import numpy as np
import pytest

from parsim.system_model import propagate

_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def impulse_covariance(m, p, i, k):
    """Covariance of z_{p,i}(k) from unit-impulse responses of the simulator.

    z is linear in (u_1, ..., u_{k+p+i-1}, e_1, ..., e_{k+p-1}) with x_1 = 0, so
    its covariance is sigma_u^2 M_u M_u' + sigma_e^2 M_e M_e' where the columns
    of M_u, M_e are the responses to single unit pulses.
    """
    length = k + p + i - 1
    n_u, n_y = m.n_u, m.n_y

    def window(u, e):
        _, y = propagate(m, u, e)
        yp = y[:, k - 1:k - 1 + p].T.ravel()
        up = u[:, k - 1:k - 1 + p].T.ravel()
        ui = u[:, k - 1 + p:k - 1 + p + i].T.ravel()
        return np.concatenate([yp, up, ui])

    cols_u, cols_e = [], []
    for t in range(length):
        for c in range(n_u):
            u = np.zeros((n_u, length))
            u[c, t] = 1.0
            cols_u.append(window(u, np.zeros((n_y, length))))
        for c in range(n_y):
            e = np.zeros((n_y, length))
            e[c, t] = 1.0
            cols_e.append(window(np.zeros((n_u, length)), e))
    Mu, Me = np.array(cols_u).T, np.array(cols_e).T
    return m.sigma_u ** 2 * Mu @ Mu.T + m.sigma_e ** 2 * Me @ Me.T


def batch_simulate(m, length, trials, rng):
    """Vectorised simulation of many independent trajectories (trials x dim x time)."""
    u = rng.standard_normal((trials, m.n_u, length)) * m.sigma_u
    e = rng.standard_normal((trials, m.n_y, length)) * m.sigma_e
    x = np.zeros((trials, m.n_x, length))
    y = np.zeros((trials, m.n_y, length))
    xk = np.zeros((trials, m.n_x))
    for k in range(length):
        x[:, :, k] = xk
        y[:, :, k] = xk @ m.C.T + e[:, :, k]
        xk = xk @ m.A.T + u[:, :, k] @ m.B.T + e[:, :, k] @ m.K.T
    return u, y, x, e
