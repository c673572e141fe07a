import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qipmmw import linalg as la
from qipmmw.quantum import InteractiveMeasurement, MeasurementOperator, PureState

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_state(rng, dim_x, dim_z):
    v = rng.standard_normal(dim_x * dim_z) + 1j * rng.standard_normal(dim_x * dim_z)
    return PureState(v / np.linalg.norm(v), dim_x, dim_z)


def random_measurement(rng, dim_y, dim_z, rank=None):
    """Random projector of the given rank (default half the space)."""
    d = dim_y * dim_z
    rank = d // 2 if rank is None else rank
    u = la.random_unitary(d, rng)[:, :rank]
    return MeasurementOperator(u @ u.conj().T, dim_y, dim_z)


def random_q(rng, dim_y, dim_x, kappa=8.0, target_mu=None):
    """Well-conditioned PSD operator; optionally rescaled so that ``mu = target_mu``."""
    from qipmmw.oracle import reference_mu

    d = dim_y * dim_x
    u = la.random_unitary(d, rng)
    w = np.exp(rng.uniform(0, np.log(kappa), d))
    w[0], w[-1] = 1.0, kappa
    q = (u * w) @ u.conj().T
    q = 0.5 * (q + q.conj().T)
    if target_mu is not None:
        q *= target_mu / reference_mu(q, (dim_y, dim_x), tol=1e-9).estimate
    return q


def wrap(q, dim_y, dim_x):
    return InteractiveMeasurement.from_matrix(q, dim_y, dim_x)


def iteration_violations(outcome, q):
    """Names of per-iteration invariants that fail on a solver run."""
    import math

    p = outcome.params
    gamma, eps = outcome.gamma, outcome.epsilon
    bad = []
    if outcome.iterations > p.t_max:
        bad.append("t_max")
    for r in outcome.trace:
        if not (r.s >= 0 and r.log_trace_w > -math.inf):
            bad.append(f"s_or_trace_w@{r.t}")
        if math.isnan(r.pairing):
            continue
        if not r.trace_y < gamma:
            bad.append(f"trace_y@{r.t}")
        if not r.step_norm < 1:
            bad.append(f"step_norm@{r.t}")
        if not r.pairing >= 1 - p.eta**2 / 12:
            bad.append(f"pairing_eta@{r.t}")
        if not r.pairing >= 1 - (eps * gamma / 2) ** 2 / 12:
            bad.append(f"pairing_base_eta@{r.t}")
        weak = math.exp(-p.eta * p.delta * math.exp(-p.eta) * r.pairing) * (1 + 1e-8)
        sharp = math.exp(-p.eta * p.delta * math.exp(-p.eta * r.step_norm) * r.pairing) * (1 + 1e-8)
        if not r.decay <= weak:
            bad.append(f"decay@{r.t}")
        if not r.decay <= sharp:
            bad.append(f"decay_sharp@{r.t}")
    return bad
