"""Shared fixtures and independently coded oracles.

The oracles here intentionally avoid the library's own linear algebra
shortcuts: conditioning is done with explicit matrix inverses and Schur
complements, and batch selection with plain Python loops, so that
agreement is evidence rather than tautology.
"""
import math

import numpy as np
import pytest

from geoadapt import Location, MaternParams, ModelSpec


def matern_oracle(u, phi, kappa):
    """Correlation at distance u straight from the Bessel-K definition."""
    from scipy.special import gamma, kv

    if u == 0.0:
        return 1.0
    t = u / phi
    return (2.0 ** (kappa - 1.0) * gamma(kappa)) ** -1 * t ** kappa * kv(kappa, t)


def cov_oracle(xy, sigma2, phi, kappa, tau2):
    """Elementwise covariance build: sigma2 * rho(d_ij) + tau2 * 1{i=j}."""
    n = len(xy)
    v = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            d = math.hypot(xy[i][0] - xy[j][0], xy[i][1] - xy[j][1])
            v[i, j] = sigma2 * matern_oracle(d, phi, kappa)
            if i == j:
                v[i, j] += tau2
    return v


def schur_conditional(joint, mean, data_idx, target_idx, y):
    """Conditional mean and covariance by explicit inverse, no factorizations.

    joint is the full covariance over data+target points; y holds the observed
    values at data_idx.
    """
    data_idx = list(data_idx)
    target_idx = list(target_idx)
    v11 = joint[np.ix_(data_idx, data_idx)]
    v12 = joint[np.ix_(data_idx, target_idx)]
    v22 = joint[np.ix_(target_idx, target_idx)]
    inv = np.linalg.inv(v11)
    mu_d = np.asarray(mean)[data_idx]
    mu_t = np.asarray(mean)[target_idx]
    cmean = mu_t + v12.T @ inv @ (np.asarray(y) - mu_d)
    ccov = v22 - v12.T @ inv @ v12
    return cmean, ccov


def trace_min_dist_batch(cand_xy, active, pv, design_xy, b, delta):
    """Step-by-step reference for one batch of greedy min-distance selection.

    Walks the loop literally: scan the active list for the highest PV (first
    hit wins ties, i.e. lowest index), accept only if strictly farther than
    delta from every design point and every earlier pick, otherwise drop the
    candidate for good. Returns (picks, removed, active_after).
    """
    active = list(active)
    picks = []
    removed = []
    taken = [tuple(p) for p in design_xy]
    while len(picks) < b and active:
        best = active[0]
        for i in active[1:]:
            if pv[i] > pv[best]:
                best = i
        ok = True
        for qx, qy in taken:
            if math.hypot(cand_xy[best][0] - qx, cand_xy[best][1] - qy) <= delta:
                ok = False
                break
        active.remove(best)
        if ok:
            picks.append(best)
            taken.append(tuple(cand_xy[best]))
        else:
            removed.append(best)
    return picks, removed, active


def random_locations(rng, n, span=1.0):
    pts = []
    seen = set()
    while len(pts) < n:
        x = round(float(rng.uniform(0.0, span)), 6)
        y = round(float(rng.uniform(0.0, span)), 6)
        if (x, y) in seen:
            continue
        seen.add((x, y))
        pts.append(Location(x, y))
    return pts


def random_model(rng, tau2=None):
    sigma2 = float(rng.uniform(0.5, 3.0))
    phi = float(rng.uniform(0.05, 0.4))
    kappa = float(rng.choice([0.5, 1.5, 2.5]))
    if tau2 is None:
        tau2 = float(rng.choice([0.0, 0.1]))
    return ModelSpec.intercept_only(float(rng.uniform(-1, 1)), sigma2, phi, kappa, tau2)


@pytest.fixture
def model_04():
    """The simulation-study model: mean 0, unit variance, phi 0.05, kappa 1.5."""
    return ModelSpec.intercept_only(0.0, 1.0, 0.05, 1.5)


_acceptance_lines = []


@pytest.fixture(scope="session")
def acceptance_report():
    return _acceptance_lines


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in _acceptance_lines:
        terminalreporter.write_line(line)
