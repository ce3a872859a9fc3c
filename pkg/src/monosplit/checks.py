"""Executable oracles for the per-iteration identities and inequalities
the solver is supposed to satisfy.

Each checker replays a recorded run (or synthetic data) and reports the
worst scaled violation; none of them re-runs a solver. Violations are
scaled by 1 + (magnitude of the participating terms) so that a single
tolerance works across iterate scales.
"""

from dataclasses import dataclass, field

import numpy as np

from .crifba import (decade_trend, energy, graph_sequence, residual_G,
                     schedule, validate_metric)
from .metriclin import SpdMap, as_vector


DEFAULT_TOL = 1e-10


@dataclass
class CheckReport:
    name: str
    n_checked: int
    worst_violation: float
    passed: bool
    tol: float = DEFAULT_TOL
    status: str = "ok"
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {"name": self.name, "n_checked": self.n_checked,
                "worst_violation": self.worst_violation, "passed": self.passed,
                "tol": self.tol, "status": self.status,
                "details": {k: v for k, v in self.details.items()
                            if np.isscalar(v) or isinstance(v, (dict, str))}}


def _skipped(name, reason):
    return CheckReport(name, 0, 0.0, True, status="skipped: " + reason)


def _report(name, violations, tol=DEFAULT_TOL, details=None):
    violations = np.asarray(violations, dtype=float)
    worst = float(violations.max()) if violations.size else 0.0
    return CheckReport(name, int(violations.size), worst, bool(worst <= tol),
                       tol=tol, details=details or {})


def _scaled(deficit, *terms):
    """Violation of lhs >= rhs given deficit = rhs - lhs, scaled by term size."""
    scale = 1.0 + sum(abs(t) for t in terms)
    return deficit / scale


def check_step_identities(result, A, B, tol=DEFAULT_TOL):
    """Replay the two per-step identities on a recorded run.

    First: the correction residual equals lam*w times the fixed-point
    residual at the extrapolated point. Second: the velocity-plus-correction
    recursion driven by the schedule coefficients.
    """
    p = result.params
    M = p.metric(result.X.shape[1])
    N = result.n_iters
    violations = []
    for n in range(N):
        g = residual_G(A, B, M, p.lam, result.Z[n])
        r1 = np.linalg.norm(result.V[n + 1] - p.lam * p.w * g)
        scale1 = 1.0 + np.linalg.norm(result.X[n + 1])
        violations.append(r1 / scale1)
        _, theta, gamma, _ = schedule(p, n)
        xdot_n = result.X[n] - (result.X[n - 1] if n >= 1 else result.x_prev_init)
        xdot_np1 = result.X[n + 1] - result.X[n]
        r2 = np.linalg.norm(xdot_np1 + result.V[n + 1]
                            - theta * xdot_n - gamma * result.V[n])
        violations.append(r2 / scale1)
    return _report("step_identities", violations, tol=tol)


def check_energy_decrease(result, q, tol=DEFAULT_TOL):
    """Anchored energy must be non-increasing from n = 1 on."""
    p = result.params
    N = result.n_iters
    if N < 2:
        return _skipped("energy_decrease", "run too short")
    E = []
    for n in range(1, N + 1):
        xp = result.X[n - 1]
        E.append(energy(p, result.X[n], xp, result.V[n], n, p.s0, q))
    E = np.array(E)
    viol = (E[1:] - E[:-1]) / (1.0 + np.abs(E[:-1]))
    return _report("energy_decrease", np.maximum(viol, 0.0), tol=tol,
                   details={"E_first": float(E[0]), "E_last": float(E[-1])})


def check_g_cocoercivity(A, B, M, lam, pairs, delta=None, tol=DEFAULT_TOL):
    """Co-coercivity of the fixed-point residual on sample pairs.

    Checks the base inequality and its two shifted variants: one trading
    accuracy for an identity shift delta (valid for any delta > 0), one
    with the metric shifted by lam*L.
    """
    L = B.certificate_L
    Lnorm = L.norm()
    if delta is None:
        delta = lam * Lnorm / 2.0 if Lnorm > 0 else 1.0
    alpha1 = 1.0 - lam * Lnorm / (4.0 * delta)
    H1 = M.matrix - delta * np.eye(M.d)
    H2 = M.matrix - lam * L.matrix
    violations = {"base": [], "shift_identity": [], "shift_metric": []}
    for x1, x2 in pairs:
        x1 = as_vector(x1)
        x2 = as_vector(x2)
        dG = residual_G(A, B, M, lam, x1) - residual_G(A, B, M, lam, x2)
        dB = B(x1) - B(x2)
        lhs = M.inner(dG, x1 - x2)
        dB_linv = float(dB @ L.solve(dB))
        rhs0 = dB_linv + lam * M.norm2(dG) - lam * float(dG @ dB)
        violations["base"].append(_scaled(rhs0 - lhs, lhs, dB_linv,
                                          lam * M.norm2(dG), lam * float(dG @ dB)))
        rhs1 = alpha1 * dB_linv + lam * float(dG @ (H1 @ dG))
        violations["shift_identity"].append(_scaled(rhs1 - lhs, lhs, rhs1))
        rhs2 = 0.75 * dB_linv + lam * float(dG @ (H2 @ dG))
        violations["shift_metric"].append(_scaled(rhs2 - lhs, lhs, rhs2))
    allv = np.concatenate([np.asarray(v) for v in violations.values()])
    details = {k: float(np.max(v)) for k, v in violations.items()}
    details["delta"] = delta
    return _report("g_cocoercivity", allv, tol=tol, details=details)


def check_rilo(result, B, q, tol=DEFAULT_TOL):
    """Lower bounds on the anchored and differenced correction products.

    Needs the recorded extrapolation history and the selector from the
    metric validation; the co-coercivity weight alpha depends on it.
    """
    p = result.params
    if result.Z.shape[0] == 0:
        return _skipped("rilo", "no extrapolation history recorded")
    report = validate_metric(p, d=result.X.shape[1])
    if not report.ok:
        return _skipped("rilo", "metric conditions not satisfied")
    M = p.metric(result.X.shape[1])
    L = p.L
    if report.selector == 1:
        alpha = 1.0 - p.lam * L.norm() / (4.0 * report.delta_used)
    else:
        alpha = 0.75
    if alpha < 0:
        return _skipped("rilo", "negative co-coercivity weight alpha=%g" % alpha)
    q = as_vector(q)
    Bq = B(q)
    coef = (1.0 - p.w) ** 2 / p.w
    N = result.n_iters
    violations = []
    Bz = [B(result.Z[n]) for n in range(N)]
    for n in range(1, N + 1):
        dB = Bz[n - 1] - Bq
        lhs = M.inner(result.V[n], result.X[n] - q)
        rhs = (p.lam * p.w * alpha * float(dB @ L.solve(dB))
               + coef * M.norm2(result.V[n]))
        violations.append(_scaled(rhs - lhs, lhs, rhs))
    for n in range(1, N):
        dB = Bz[n] - Bz[n - 1]
        vdot = result.V[n + 1] - result.V[n]
        xdot = result.X[n + 1] - result.X[n]
        lhs = M.inner(vdot, xdot)
        rhs = (p.lam * p.w * alpha * float(dB @ L.solve(dB))
               + coef * M.norm2(vdot))
        violations.append(_scaled(rhs - lhs, lhs, rhs))
    return _report("rilo", violations, tol=tol,
                   details={"alpha": alpha, "selector": report.selector})


def check_gfru0_identity(n_instances=100, d=5, seed=0x5EED, tol=DEFAULT_TOL):
    """Two-sided evaluation of the discrete energy identity.

    Sequences are synthetic: arbitrary d_n with the velocity recursion
    xdot_{n+1} = theta_n xdot_n - d_n and the schedule identity
    (e+nu_{n+1}) theta_n = nu_n. The relation is an identity, so arbitrary
    data must satisfy it to rounding.
    """
    rng = np.random.default_rng(seed)
    violations = []
    for _ in range(n_instances):
        e = rng.uniform(1.0, 5.0)
        s1 = rng.uniform(0.0, 2.0)
        nu0 = rng.uniform(0.0, 3.0)
        s = rng.uniform(1e-3, e)
        n = int(rng.integers(0, 50))
        raw = rng.standard_normal((d, d))
        M = SpdMap(raw @ raw.T + d * np.eye(d))
        q = rng.standard_normal(d)
        x_prev = rng.standard_normal(d)
        x_n = rng.standard_normal(d)
        d_n = rng.standard_normal(d)
        nu_n = s1 * n + nu0
        nu_np1 = s1 * (n + 1) + nu0
        tau = e + nu_np1
        theta = nu_n / tau
        xdot_n = x_n - x_prev
        xdot_np1 = theta * xdot_n - d_n
        x_np1 = x_n + xdot_np1

        def F(x, xdot, nu):
            return (0.5 * M.norm2(s * (q - x) - nu * xdot)
                    + 0.5 * s * (e - s) * M.norm2(x - q))

        terms = [
            F(x_np1, xdot_np1, nu_np1) - F(x_n, xdot_n, nu_n),
            0.5 * tau ** 2 * M.norm2(xdot_np1 - theta * xdot_n),
            s * tau * M.inner(d_n, x_np1 - q),
            tau * (e - s + nu_np1) * M.inner(d_n, xdot_np1),
            0.5 * (e - s) * (e + 2.0 * nu_np1) * M.norm2(xdot_np1),
        ]
        resid = abs(sum(terms))
        violations.append(resid / (1.0 + sum(abs(t) for t in terms)))
    return _report("energy_identity", violations, tol=tol)


def check_estimg2(result, tol=DEFAULT_TOL):
    """Telescoping bound on the drift sequence v_n + xdot_n, plus the
    decay trend of n times its norm."""
    p = result.params
    M = p.metric(result.X.shape[1])
    N = result.n_iters
    if N < 3:
        return _skipped("drift_telescoping", "run too short")
    xdot = result.X[1:] - result.X[:-1]
    drift = result.V[1:N + 1] + xdot            # v_{n+1} + xdot_{n+1}, n=0..N-1
    drift2 = np.einsum("ij,jk,ik->i", drift, M.matrix, drift)
    xdot2 = np.einsum("ij,jk,ik->i", xdot, M.matrix, xdot)
    violations = []
    for n in range(1, N):
        tau_n = p.e + p.s1 * (n + 1) + p.nu0
        tau_nm1 = p.e + p.s1 * n + p.nu0
        lhs = (tau_n ** 2 * drift2[n] - tau_nm1 ** 2 * drift2[n - 1]
               + (p.s0 - 2.0 * p.s1) * tau_n * drift2[n - 1])
        rhs = (p.e - p.s0 + p.s1) ** 2 / p.s0 * tau_n * xdot2[n - 1]
        violations.append(_scaled(lhs - rhs, lhs, rhs))
    ns = np.arange(1, N + 1)
    trend = decade_trend(ns, ns * np.sqrt(np.maximum(drift2[:N], 0.0)))
    return _report("drift_telescoping", violations, tol=tol,
                   details={"drift_trend": trend})


def check_ystar_bound(result, B, rho=None, tol=DEFAULT_TOL):
    """Norm bound tying the graph elements to the correction residual."""
    p = result.params
    M = p.metric(result.X.shape[1])
    L = p.L
    if result.Z.shape[0] == 0:
        return _skipped("ystar_bound", "no extrapolation history recorded")
    if rho is None:
        rho = 0.9 * M.min_eigenvalue()   # keeps M - rho I positive definite
    if rho <= 0:
        return _skipped("ystar_bound", "no valid rho found")
    Mn = M.norm()
    Ln = L.norm()
    const = (Mn / p.lam + rho ** -0.5 * np.sqrt(Mn * Ln) * (1.0 + np.sqrt(Ln))) / p.w
    N = result.n_iters
    violations = []
    for n in range(1, N + 1):
        _, ystar = graph_sequence(result.X[n], result.V[n], result.Z[n - 1], p, B)
        lhs = M.norm_of(ystar)
        rhs = const * M.norm_of(result.V[n])
        violations.append(_scaled(lhs - rhs, lhs, rhs))
    return _report("ystar_bound", violations, tol=tol, details={"rho": rho,
                                                                "const": const})


def check_graph_inclusion(result, A, B, tol=1e-8):
    """Every graph element pair must lie in the operator-sum graph.

    Uses the operator's membership test; the residual part coming from B is
    subtracted so only the multivalued part is tested.
    """
    if A.graph_member is None:
        return _skipped("graph_inclusion", "operator has no membership test")
    p = result.params
    N = result.n_iters
    bad = 0
    for n in range(1, N + 1):
        y, ystar = graph_sequence(result.X[n], result.V[n], result.Z[n - 1], p, B)
        scale = 1.0 + np.linalg.norm(ystar)
        if not A.graph_member(y, ystar - B(y), tol * scale):
            bad += 1
    return CheckReport("graph_inclusion", N, float(bad), bad == 0, tol=tol)


def check_residual_ratio(result, tol=DEFAULT_TOL):
    """Residual at the new iterate against the residual at the
    extrapolated point: the ratio is bounded by 2(w+1)."""
    p = result.params
    M = p.metric(result.X.shape[1])
    N = result.n_iters
    violations = []
    for n in range(N):
        gz2 = M.norm2(result.V[n + 1]) / (p.lam * p.w) ** 2
        lhs = float(result.res2[n + 1])
        rhs = 2.0 * (p.w + 1.0) * gz2
        violations.append(_scaled(lhs - rhs, lhs, rhs))
    return _report("residual_ratio", violations, tol=tol)


def standard_suite(result, A, B, q=None):
    """Run every checker that applies to a finished run."""
    reports = [
        check_step_identities(result, A, B),
        check_estimg2(result),
        check_residual_ratio(result),
        check_ystar_bound(result, B),
        check_graph_inclusion(result, A, B),
    ]
    if q is not None:
        reports.append(check_energy_decrease(result, q))
        reports.append(check_rilo(result, B, q))
    return reports
