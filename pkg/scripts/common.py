"""Random instance generators shared by the experiment scripts."""
import csv
import sys

import numpy as np

from qipmmw import linalg as la
from qipmmw.oracle import reference_mu
from qipmmw.quantum import MeasurementOperator, PureState


def random_state(rng, dim_x, dim_z):
    v = rng.standard_normal(dim_x * dim_z) + 1j * rng.standard_normal(dim_x * dim_z)
    return PureState(v / np.linalg.norm(v), dim_x, dim_z)


def random_measurement(rng, dim_y, dim_z, rank=None):
    d = dim_y * dim_z
    rank = d // 2 if rank is None else rank
    u = la.random_unitary(d, rng)[:, :rank]
    return MeasurementOperator(u @ u.conj().T, dim_y, dim_z)


def random_q(rng, dim_y, dim_x, kappa=8.0, target_mu=None):
    """PSD operator with condition number ``kappa``, optionally scaled to ``mu = target_mu``."""
    d = dim_y * dim_x
    u = la.random_unitary(d, rng)
    w = np.exp(rng.uniform(0, np.log(kappa), d))
    w[0], w[-1] = 1.0, kappa
    q = la.hermitize((u * w) @ u.conj().T)
    if target_mu is not None:
        q *= target_mu / reference_mu(q, (dim_y, dim_x), tol=1e-9).estimate
    return q


def write_rows(rows, path):
    """Write dict rows as CSV to ``path`` (stdout for ``-``)."""
    if not rows:
        return
    fh = sys.stdout if path == "-" else open(path, "w", newline="")
    writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
    writer.writeheader()
    writer.writerows(rows)
    if fh is not sys.stdout:
        fh.close()
