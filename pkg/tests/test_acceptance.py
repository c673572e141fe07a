"""Acceptance checks.  Each test prints one ``[PASS]``/``[FAIL]`` line.

The solver runs are shared between the correctness, invariant and tamper
checks through a module-scoped fixture, so the invariants are checked on
every run that the correctness check makes.
"""
import math
import time
from dataclasses import dataclass

import numpy as np
import pytest

from qipmmw import amplification as amp
from qipmmw import linalg as la
from qipmmw.certificates import (
    DualCertificate,
    PrimalCertificate,
    certificate_from_outcome,
    uhlmann_extend,
    verify,
)
from qipmmw.conditioning import condition, sandwich_check, uniform_state
from qipmmw.mmw import Decision, practical_params, solve
from qipmmw.oracle import reference_mu
from qipmmw.quantum import InteractiveMeasurement, MeasurementOperator, phi, phi_star

from conftest import iteration_violations, random_measurement, random_q, random_state, wrap

EPS = 1 / 12
PSD_TOL = 1e-8


@pytest.fixture
def report(capsys):
    def emit(label, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        return ok

    return emit


# --- 1. lemma suite --------------------------------------------------------------


def golden_thompson_gap(g):
    n = int(g.integers(1, 9))
    x = la.random_hermitian(n, g)
    y = la.random_hermitian(n, g)
    x *= g.uniform(0, 3) / max(la.spectral_norm(x), 1e-300)
    y *= g.uniform(0, 3) / max(la.spectral_norm(y), 1e-300)
    lhs = np.trace(la.expm_hermitian(x + y, 6.0)).real
    rhs = np.trace(la.expm_hermitian(x, 3.0) @ la.expm_hermitian(y, 3.0)).real
    return lhs - rhs


def exp_inequality_gap(g):
    # exp(-eta P) <= 1 - eta e^{-eta} P for 0 <= P <= 1 and every eta > 0.
    n = int(g.integers(1, 9))
    eta = float(np.exp(g.uniform(np.log(1e-3), np.log(50.0))))
    u = la.random_unitary(n, g)
    p = la.hermitize((u * g.uniform(0, 1, n)) @ u.conj().T)
    lhs = la.expm_hermitian(-eta * p, eta) - np.eye(n) + eta * math.exp(-eta) * p
    return la.lambda_max(lhs)


def fuchs_van_de_graaf_gap(g):
    # ||R0 - R1||_1 <= sqrt(2 Tr(R0)^2 + 2 Tr(R1)^2 - 4 F(R0, R1)^2) for PSD R0, R1.
    n = int(g.integers(1, 9))
    r0 = la.random_psd(n, g, rank=int(g.integers(1, n + 1)))
    r1 = la.random_psd(n, g, rank=int(g.integers(1, n + 1)))
    r0 *= g.uniform(0.1, 2) / np.trace(r0).real
    r1 *= g.uniform(0.1, 2) / np.trace(r1).real
    t0, t1 = np.trace(r0).real, np.trace(r1).real
    f = la.fidelity(r0, r1)
    return la.trace_norm(r0 - r1) - math.sqrt(max(0.0, 2 * t0**2 + 2 * t1**2 - 4 * f**2))


def test_1_lemma_suite(report):
    g = np.random.default_rng(101)
    start = time.perf_counter()
    worst = {}
    for name, fn in [("golden_thompson", golden_thompson_gap), ("exp_inequality", exp_inequality_gap),
                     ("fuchs_van_de_graaf", fuchs_van_de_graaf_gap)]:
        worst[name] = max(fn(g) for _ in range(200))
    elapsed = time.perf_counter() - start
    ok = all(v <= 1e-8 for v in worst.values()) and elapsed < 10
    detail = ", ".join(f"{k} worst {v:.2e}" for k, v in worst.items())
    report("1 lemma suite", ok, f"{detail}; 3x200 instances in {elapsed:.1f}s")
    assert ok


# --- 2. Uhlmann extension ------------------------------------------------------------


def test_2_uhlmann(report):
    g = np.random.default_rng(202)
    start = time.perf_counter()
    worst_marg = worst_fid = 0.0
    for i in range(100):
        m, n = int(g.integers(1, 5)), int(g.integers(1, 5))
        rank = None if i % 3 else int(g.integers(1, m * n + 1))
        r0 = la.random_psd(m * n, g, rank=rank)
        r0 *= g.uniform(0.2, 2) / np.trace(r0).real
        p1 = la.random_psd(n, g, rank=None if i % 4 else int(g.integers(1, n + 1)))
        p1 *= g.uniform(0.2, 2) / np.trace(p1).real
        r1 = uhlmann_extend(r0, p1, (m, n))
        p0 = la.partial_trace(r0, (m, n), "A")
        worst_marg = max(worst_marg, la.spectral_norm(la.partial_trace(r1, (m, n), "A") - p1))
        worst_fid = max(worst_fid, abs(la.fidelity(r0, r1) - la.fidelity(p0, p1)))
    elapsed = time.perf_counter() - start
    ok = worst_marg <= 1e-7 and worst_fid <= 1e-6 and elapsed < 30
    report("2 uhlmann extension", ok,
           f"marginal err {worst_marg:.2e}, fidelity err {worst_fid:.2e}; 100 pairs in {elapsed:.1f}s")
    assert ok


# --- 3. conditioning guarantees --------------------------------------------------------


def conditioning_failures(inst, psi):
    k, n = inst.k, inst.n
    w = np.linalg.eigvalsh(inst.q.q)
    bad = []
    if not inst.q.kappa <= 64 * k * (1 + 1e-9):
        bad.append("kappa")
    if not w[0] >= 1 / (64 * k * n) - 1e-12:
        bad.append("lower_operator_bound")
    if not w[-1] <= 1 / n + 1e-12:
        bad.append("upper_operator_bound")
    overlap = abs(np.vdot(uniform_state(psi, inst.schmidt, inst.selected_indices).amplitudes, psi.amplitudes))
    if not overlap >= 1 / math.sqrt(4 * k) - 1e-12:
        bad.append("overlap")
    if not n >= 2**inst.selected_bin / (4 * k):
        bad.append("sigma_size")
    return bad


def test_3_conditioning(report):
    g = np.random.default_rng(303)
    start = time.perf_counter()
    failures = []
    for i in range(50):
        p = 1 + i % 2
        d = 2**p
        psi = random_state(g, d, d)
        # Mix generic states with skewed ones so that several bins are exercised.
        if i % 5 == 0:
            amps = psi.amplitudes.reshape(d, d) * np.exp(-3 * np.arange(d))[:, None]
            psi = type(psi)(amps.reshape(-1) / np.linalg.norm(amps), d, d)
        pi = random_measurement(g, d, d, rank=int(g.integers(0, d * d + 1)))
        inst = condition(psi, pi, p)
        failures += [f"#{i}:{name}" for name in conditioning_failures(inst, psi)]
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 60
    report("3 conditioning guarantees", ok,
           f"50 instances, violations {failures or 'none'}; {elapsed:.1f}s")
    assert ok


# --- 4. conditioning sandwich ------------------------------------------------------------


def test_4_sandwich(report):
    g = np.random.default_rng(404)
    start = time.perf_counter()

    def oracle(q, dims):
        return reference_mu(q, dims, tol=1e-6)

    bad, worst_gap = [], 0.0
    for i in range(10):
        psi = random_state(g, 2, 2)
        pi = random_measurement(g, 2, 2, rank=int(g.integers(0, 5)))
        rep = sandwich_check(psi, pi, 1, oracle)
        worst_gap = max(worst_gap, rep.mu_r[1] - rep.mu_r[0], rep.mu_q[1] - rep.mu_q[0])
        if not rep.holds:
            bad.append(i)
    elapsed = time.perf_counter() - start
    ok = not bad and worst_gap <= 1e-4 and elapsed < 300
    report("4 conditioning sandwich", ok,
           f"10 instances, failing {bad or 'none'}, worst oracle gap {worst_gap:.1e}; {elapsed:.1f}s")
    assert ok


# --- 5, 6, 9. solver runs -------------------------------------------------------------------


@dataclass
class Run:
    name: str
    q: InteractiveMeasurement
    gamma: float
    epsilon: float
    expected: Decision
    outcome: object
    certificate: object


def bounds_hold(cert, q, gamma, eps):
    """The explicit certificate bounds, recomputed without the verifier."""
    if isinstance(cert, PrimalCertificate):
        return (np.trace(cert.x).real >= (1 - 2 * eps) * gamma
                and la.lambda_min(cert.x) >= -PSD_TOL
                and la.lambda_max(phi(q, cert.x)) <= 1 + PSD_TOL)
    return (np.trace(cert.y).real <= (1 + eps) * gamma
            and la.lambda_min(cert.y) >= -PSD_TOL
            and la.lambda_min(phi_star(q, cert.y)) >= 1 - PSD_TOL)


def random_case(g, i):
    """A well-conditioned Q and a gamma on the requested side with oracle-certified gap."""
    yes = i % 2 == 0
    while True:
        if i % 10 == 9:
            psi = random_state(g, 2, 2)
            q = condition(psi, random_measurement(g, 2, 2, rank=int(g.integers(1, 4))), 1).q.q
            m, n = 2, q.shape[0] // 2
        else:
            m, n = int(g.integers(1, 5)), int(g.integers(1, 5))
            if m * n < 2:
                continue
            q = random_q(g, m, n, kappa=float(g.uniform(2, 16)))
            q *= g.uniform(0.15, 0.55) / reference_mu(q, (m, n), tol=1e-6).estimate
        mu = reference_mu(q, (m, n), tol=1e-8)
        gamma = mu.estimate / (1 + 5 * EPS) if yes else mu.estimate / (1 - 5 * EPS)
        if not 0 < gamma < 1:
            continue
        if yes and mu.lower >= (1 + 4 * EPS) * gamma:
            return wrap(q, m, n), gamma, Decision.ACCEPT
        if not yes and mu.upper <= (1 - 4 * EPS) * gamma:
            return wrap(q, m, n), gamma, Decision.REJECT


@pytest.fixture(scope="module")
def solver_runs():
    g = np.random.default_rng(505)
    start = time.perf_counter()
    runs = []
    for i in range(50):
        q, gamma, expected = random_case(g, i)
        out = solve(q, gamma, EPS, practical_params(q, gamma, EPS, t_max=5000))
        runs.append(Run(f"random#{i}", q, gamma, EPS, expected, out, certificate_from_outcome(q, out)))
    # Unmodified parameters on tiny instances.
    tiny = [
        ("scaled_identity_accept", wrap(np.eye(4) / 4, 2, 2), 0.3, EPS, Decision.ACCEPT),
        ("scaled_identity_reject", wrap(np.eye(4) / 4, 2, 2), 0.8, EPS, Decision.REJECT),
        ("diag_reject", wrap(np.diag([0.03, 0.027]), 2, 1), 0.9, 0.24, Decision.REJECT),
    ]
    cond = condition(random_state(g, 2, 2), MeasurementOperator(np.eye(4), 2, 2), 1)
    tiny.append(("conditioned_accept", cond.q, cond.gamma, cond.epsilon, Decision.ACCEPT))
    for name, q, gamma, eps, expected in tiny:
        out = solve(q, gamma, eps)
        runs.append(Run(f"unmodified:{name}", q, gamma, eps, expected, out, certificate_from_outcome(q, out)))
    return runs, time.perf_counter() - start


def test_5_solver_correctness(report, solver_runs):
    runs, elapsed = solver_runs
    random_runs = [r for r in runs if r.name.startswith("random")]
    correct = sum(r.outcome.decision is r.expected for r in random_runs)
    wrong = [r.name for r in runs if r.outcome.decision is not r.expected]
    invalid = [r.name for r in runs
               if not (verify(r.certificate, r.q, r.gamma, r.epsilon).passed
                       and bounds_hold(r.certificate, r.q, r.gamma, r.epsilon))]
    defaults_ok = all(r.outcome.decision is r.expected for r in runs if r.name.startswith("unmodified"))
    ok = correct == 50 and not wrong and not invalid and defaults_ok and elapsed < 900
    report("5 solver correctness", ok,
           f"{correct}/50 random decisions correct (T <= 5000), "
           f"{len(runs) - len(random_runs)} unmodified-parameter runs, wrong {wrong or 'none'}, "
           f"invalid certificates {invalid or 'none'}; {elapsed:.1f}s")
    assert ok


def test_6_iteration_invariants(report, solver_runs):
    runs, _ = solver_runs
    bad = {r.name: v[:3] for r in runs if (v := iteration_violations(r.outcome, r.q))}
    total = sum(r.outcome.iterations for r in runs)
    ok = not bad
    report("6 per-iteration invariants", ok,
           f"{len(runs)} runs, {total} iterations, violations {bad or 'none'}")
    assert ok


def test_9_tamper(report, solver_runs):
    runs, _ = solver_runs
    g = np.random.default_rng(909)
    picks = [runs[i] for i in g.choice(50, size=20, replace=False)]
    unnamed, named = [], []
    for r in picks:
        cert = r.certificate
        if isinstance(cert, PrimalCertificate):
            mat = cert.x
        else:
            mat = cert.y
        noise = 1e-2 * (g.standard_normal(mat.shape) + 1j * g.standard_normal(mat.shape))
        if isinstance(cert, PrimalCertificate):
            bad = PrimalCertificate(mat + noise, cert.claimed_trace)
        else:
            bad = DualCertificate(mat + noise, cert.claimed_trace)
        rep = verify(bad, r.q, r.gamma, r.epsilon)
        if rep.passed or not rep.violations:
            unnamed.append(r.name)
        else:
            named.extend(rep.violations)
    ok = not unnamed
    counts = {k: named.count(k) for k in sorted(set(named))}
    report("9 certificate tamper", ok, f"20 perturbed certificates, accepted {unnamed or 'none'}, "
                                       f"violations named {counts}")
    assert ok


# --- 7. oracle closed forms --------------------------------------------------------------------


def test_7_oracle_closed_forms(report):
    g = np.random.default_rng(707)
    start = time.perf_counter()
    errs = []
    for m, n, c in [(2, 2, 0.3), (3, 2, 0.1), (2, 4, 0.05)]:
        res = reference_mu(c * np.eye(m * n), (m, n))
        errs.append(max(abs(res.lower - c * n), abs(res.upper - c * n)))
    for _ in range(5):
        m, n = int(g.integers(1, 5)), int(g.integers(1, 5))
        xi = la.random_psd(n, g)
        xi /= np.trace(xi).real
        res = reference_mu(np.kron(np.eye(m), xi), (m, n))
        errs.append(max(abs(res.lower - 1), abs(res.upper - 1)))
    elapsed = time.perf_counter() - start
    ok = max(errs) <= 1e-6 and elapsed < 60
    report("7 oracle closed forms", ok, f"{len(errs)} cases, worst error {max(errs):.1e}; {elapsed:.1f}s")
    assert ok


# --- 8. amplification ---------------------------------------------------------------------------


def test_8_amplification(report):
    start = time.perf_counter()
    grid_bad = []
    for r in range(1, 11):
        for q in range(1, 11):
            p = amp.derive_params(r, q, 1.0, 1.0 - 1.0 / q)
            exact = p.s == 2 * r * q and p.t == 8 * r * q * q * p.s
            chains = (p.s * math.exp(-r * p.s) < 2.0**-r
                      and (1 - 1 / (2 * q)) ** p.s < math.exp(-p.s / (2 * q)) < 2.0**-r)
            if not (exact and chains):
                grid_bad.append((r, q))
    p = amp.derive_params(2, 3, 2 / 3, 1 / 3)
    mc = amp.simulate_completeness(p, trials=1000, seed=0)
    elapsed = time.perf_counter() - start
    ok = not grid_bad and (p.s, p.t) == (12, 1728) and mc.failures == 0 and elapsed < 60
    report("8 amplification", ok,
           f"grid 10x10 failing {grid_bad or 'none'}, Monte Carlo {mc.failures}/1000 failures "
           f"(bound {mc.bound:.2e}); {elapsed:.1f}s")
    assert ok
