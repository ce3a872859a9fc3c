"""Core solver: relaxed inertial forward-backward iteration with a
correction term, plus its schedule, feasibility validators, residual
operator and per-iteration diagnostics.

The update at step n reads

    v_n = z_{n-1} - x_n
    z_n = x_n + theta_n (x_n - x_{n-1}) + gamma_n v_n
    x_{n+1} = (1-w) z_n + w (M + lam A)^{-1} (M z_n - lam B(z_n))

with theta_n, gamma_n derived from the affine index nu_n = s1 n + nu0.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .metriclin import SpdMap, as_vector, min_eigenvalue_sym
from .operators import generalized_resolvent


@dataclass
class CrifbaParams:
    e: float = 3.0
    s0: float = 2.5
    s1: float = 1.0
    nu0: float = 0.0
    lam: float = 0.5
    w: float = 0.5
    M: Optional[SpdMap] = None
    L: Optional[SpdMap] = None
    delta: Optional[float] = None

    def metric(self, d):
        return self.M if self.M is not None else SpdMap.identity(d)


def feasible_step_bound(M, L, w):
    """Largest lam for which the shifted-identity metric condition can hold.

    Condition 1 with a free delta is satisfiable exactly when
    lam ||L|| < 4 w (1-w) min_eig(M).
    """
    return 4.0 * w * (1.0 - w) * M.min_eigenvalue() / L.norm()


def default_params(L, M=None, safety=0.9, **overrides):
    """Defaults with lam set strictly inside the feasibility region."""
    p = CrifbaParams(L=L, M=M, **overrides)
    Mm = M if M is not None else SpdMap.identity(L.d)
    if "lam" not in overrides:
        p.lam = safety * feasible_step_bound(Mm, L, p.w)
    return p


def schedule(params, n):
    """Return (nu_n, theta_n, gamma_n, tau_n) with tau_n = e + nu_{n+1}."""
    nu_n = params.s1 * n + params.nu0
    tau = params.e + params.s1 * (n + 1) + params.nu0
    theta = 1.0 - (params.e + params.s1) / tau
    gamma = 1.0 - params.s0 / tau
    return nu_n, theta, gamma, tau


def validate_core(params):
    """Strict parameter inequalities; returns (ok, list of violations)."""
    reasons = []
    if not params.s1 >= 0:
        reasons.append("s1 must be nonnegative")
    if not 2.0 * params.s1 < params.s0:
        reasons.append("2*s1 < s0 violated (got 2*%g >= %g)" % (params.s1, params.s0))
    if not params.s0 < params.e:
        reasons.append("s0 < e violated (got %g >= %g)" % (params.s0, params.e))
    if not 0.0 < params.w < 1.0:
        reasons.append("w in (0,1) violated (got %g)" % params.w)
    if not params.lam > 0:
        reasons.append("lam must be positive")
    if not params.nu0 >= 0:
        reasons.append("nu0 must be nonnegative")
    return (not reasons), reasons


@dataclass
class MetricReport:
    selector: Optional[int]
    delta_used: Optional[float]
    margins: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.selector is not None


def validate_metric(params, d=None):
    """Check the step/metric compatibility conditions.

    Condition 1: lam ||L|| <= 4 delta and M - delta/(w(1-w)) I positive
    definite. When no delta is supplied the smallest admissible value
    delta = lam ||L|| / 4 is tried, which makes the condition equivalent to
    lam ||L|| < 4 w (1-w) min_eig(M). Condition 2: M - lam/(w(1-w)) L
    positive definite. Returns a MetricReport with both margins.
    """
    if params.L is None:
        raise ValueError("validate_metric needs the co-coercivity certificate L")
    L = params.L
    M = params.M if params.M is not None else SpdMap.identity(d if d is not None else L.d)
    ww = params.w * (1.0 - params.w)
    Lnorm = L.norm()
    delta = params.delta if params.delta is not None else params.lam * Lnorm / 4.0
    margins = {}
    if delta > 0:
        margins["cond1_step_slack"] = 4.0 * delta - params.lam * Lnorm
        margins["cond1_min_eig"] = min_eigenvalue_sym(M.shifted(delta / ww))
    else:
        margins["cond1_step_slack"] = float("-inf")
        margins["cond1_min_eig"] = float("-inf")
    margins["cond2_min_eig"] = min_eigenvalue_sym(M.matrix - (params.lam / ww) * L.matrix)
    if margins["cond1_step_slack"] >= 0.0 and margins["cond1_min_eig"] > 0.0:
        return MetricReport(1, delta, margins)
    if margins["cond2_min_eig"] > 0.0:
        return MetricReport(2, None, margins)
    return MetricReport(None, None, margins)


def validate(params, d=None):
    """Run both validators; raise with every violation on failure."""
    ok, reasons = validate_core(params)
    if not ok:
        raise ValueError("invalid parameters: " + "; ".join(reasons))
    report = validate_metric(params, d=d)
    if not report.ok:
        raise ValueError("step/metric conditions failed, margins: %r" % report.margins)
    return report


def forward_backward(A, B, M, lam, x):
    """One forward-backward image (M + lam A)^{-1}(M x - lam B(x))."""
    x = as_vector(x)
    if M is None or M.is_identity:
        return generalized_resolvent(A, M, lam, x - lam * B(x))
    return generalized_resolvent(A, M, lam, x - lam * M.solve(B(x)))


def residual_G(A, B, M, lam, x):
    """Fixed-point residual; vanishes exactly on the solution set."""
    x = as_vector(x)
    return (x - forward_backward(A, B, M, lam, x)) / lam


@dataclass
class CrifbaState:
    n: int
    x_prev: np.ndarray
    x: np.ndarray
    z_prev: np.ndarray


@dataclass
class StepTrace:
    v: np.ndarray
    z: np.ndarray
    x_next: np.ndarray
    g: np.ndarray  # residual operator evaluated at z_n


def crifba_step(state, params, A, B):
    """Advance one iteration; returns the new state and a trace of it."""
    M = params.metric(len(state.x))
    v = state.z_prev - state.x
    _, theta, gamma, _ = schedule(params, state.n)
    z = state.x + theta * (state.x - state.x_prev) + gamma * v
    fb = forward_backward(A, B, M, params.lam, z)
    x_next = (1.0 - params.w) * z + params.w * fb
    if not np.all(np.isfinite(x_next)):
        raise ArithmeticError("non-finite iterate at n=%d" % state.n)
    g = (z - fb) / params.lam
    return (CrifbaState(state.n + 1, state.x, x_next, z),
            StepTrace(v, z, x_next, g))


@dataclass
class RunResult:
    X: np.ndarray          # (N+1, d), iterates x_0..x_N
    Z: np.ndarray          # (N, d), extrapolated points z_0..z_{N-1}
    V: np.ndarray          # (N+1, d), correction residuals v_0..v_N
    res2: np.ndarray       # (N+1,), squared M-norm of the residual at x_n
    x_prev_init: np.ndarray
    n_iters: int
    stopped: str           # "tol" | "max_iter" | "diverged"
    params: CrifbaParams

    @property
    def x(self):
        return self.X[-1]


def run(A, B, params, x0, max_iter=10**6, tol=1e-9, x_prev=None, z_prev=None):
    """Iterate until the residual M-norm drops below tol or the cap is hit.

    The cold-start default sets x_{-1} = z_{-1} = x_0, so v_0 = 0 and the
    initial velocity is zero. The residual column is computed directly at
    x_n with its own resolvent call each iteration.
    """
    validate(params, d=len(as_vector(x0)))
    x = as_vector(x0).copy()
    xp = x.copy() if x_prev is None else as_vector(x_prev).copy()
    zp = x.copy() if z_prev is None else as_vector(z_prev).copy()
    M = params.metric(len(x))
    xs = [x.copy()]
    zs = []
    vs = [zp - x]
    res2 = []
    stopped = "max_iter"
    state = CrifbaState(0, xp, x, zp)
    for n in range(max_iter):
        g_here = residual_G(A, B, M, params.lam, state.x)
        res2.append(M.norm2(g_here))
        if np.sqrt(res2[-1]) <= tol:
            stopped = "tol"
            break
        state, tr = crifba_step(state, params, A, B)
        xs.append(tr.x_next)
        zs.append(tr.z)
        vs.append(tr.z - tr.x_next)
        if np.linalg.norm(tr.x_next) > 1e12:
            stopped = "diverged"
            break
    if stopped == "max_iter" or stopped == "diverged":
        g_here = residual_G(A, B, M, params.lam, state.x)
        res2.append(M.norm2(g_here))
    return RunResult(np.array(xs), np.array(zs).reshape(len(zs), len(x)),
                     np.array(vs), np.array(res2), xp,
                     len(xs) - 1, stopped, params)


def energy(params, x, x_prev, v, n, s, q):
    """Anchored quadratic energy at iteration n.

    E_n(s,q) = 1/2 ||s(q - x) - nu_n (x - x_prev)||^2_M
             + 1/2 s(e-s) ||x - q||^2_M + s(e + nu_n) <v, x - q>_M
    """
    if not 0.0 < s <= params.e:
        raise ValueError("s must lie in (0, e]")
    x = as_vector(x)
    q = as_vector(q)
    M = params.metric(len(x))
    nu_n = params.s1 * n + params.nu0
    xdot = x - as_vector(x_prev)
    t1 = 0.5 * M.norm2(s * (q - x) - nu_n * xdot)
    t2 = 0.5 * s * (params.e - s) * M.norm2(x - q)
    t3 = s * (params.e + nu_n) * M.inner(v, x - q)
    return t1 + t2 + t3


def graph_sequence(x, v, z_prev, params, B):
    """Points paired with near-members of the operator-sum graph.

    y = x + (1 - 1/w) v and y* = (lam w)^{-1} M v + B(y) - B(z_prev); at a
    solution both v and y* vanish.
    """
    x = as_vector(x)
    v = as_vector(v)
    M = params.metric(len(x))
    y = x + (1.0 - 1.0 / params.w) * v
    ystar = M.apply(v) / (params.lam * params.w) + B(y) - B(as_vector(z_prev))
    return y, ystar


@dataclass
class DiagnosticsRecord:
    n: int
    vel2: Optional[float]
    vn2: float
    res2: float
    energy: Optional[float] = None
    ystar_norm: Optional[float] = None


def diagnostics(result, A, B, q=None, stride=1):
    """Build per-iteration records from a finished run.

    vel2 at row n is the squared M-norm of x_{n+1} - x_n (absent on the
    final row); energy needs a reference solution q; the graph-element norm
    starts at n = 1.
    """
    params = result.params
    M = params.metric(result.X.shape[1])
    N = result.n_iters
    out = []
    for n in range(0, N + 1, max(1, stride)):
        vel2 = M.norm2(result.X[n + 1] - result.X[n]) if n < N else None
        rec = DiagnosticsRecord(n=n, vel2=vel2,
                                vn2=M.norm2(result.V[n]),
                                res2=float(result.res2[n]))
        if q is not None:
            xp = result.X[n - 1] if n >= 1 else result.x_prev_init
            rec.energy = energy(params, result.X[n], xp, result.V[n], n,
                                params.s0, q)
        if n >= 1:
            _, ystar = graph_sequence(result.X[n], result.V[n],
                                      result.Z[n - 1], params, B)
            rec.ystar_norm = M.norm_of(ystar)
        out.append(rec)
    return out


def partial_sum_report(ns, terms, split=None):
    """Total of a series plus the share contributed by the final decade."""
    ns = np.asarray(ns)
    terms = np.asarray(terms, dtype=float)
    if len(ns) == 0:
        return {"total": 0.0, "final_decade_increment": 0.0, "ratio": 0.0}
    cut = (ns.max() // 10) if split is None else split
    total = float(terms.sum())
    tail = float(terms[ns >= cut].sum())
    return {"total": total, "final_decade_increment": tail,
            "ratio": tail / total if total > 0 else 0.0}


def summability_monitors(result, q=None):
    """The five bounded partial sums behind the convergence rates.

    Keys: inertia-weighted correction velocity (nu^2 |vdot|^2), weighted
    velocity (nu |xdot|^2), anchored correction inner products, squared
    acceleration (n^2 |xddot|^2), and the combined drift (n |xdot + v|^2).
    """
    params = result.params
    M = params.metric(result.X.shape[1])
    N = result.n_iters
    xdot = result.X[1:] - result.X[:-1]                     # xdot_{n+1}, n=0..N-1
    vdot = result.V[1:] - result.V[:-1]                     # vdot_{n+1}, n=0..N-1
    nu = params.s1 * np.arange(1, N + 1) + params.nu0       # nu_{n+1}
    m2 = lambda rows: np.einsum("ij,jk,ik->i", rows, M.matrix, rows)
    mon = {}
    mon["vdot_weighted"] = partial_sum_report(np.arange(0, N), nu**2 * m2(vdot))
    mon["xdot_weighted"] = partial_sum_report(np.arange(0, N), nu * m2(xdot))
    if q is not None:
        diffs = result.X[1:N + 1] - as_vector(q)
        terms = np.einsum("ij,jk,ik->i", result.V[1:N + 1], M.matrix, diffs)
        mon["anchor_products"] = partial_sum_report(np.arange(1, N + 1), terms)
    if N >= 2:
        xddot = xdot[1:] - xdot[:-1]                        # n = 1..N-1
        ns = np.arange(1, N)
        mon["acceleration"] = partial_sum_report(ns, ns**2 * m2(xddot))
    drift = xdot + result.V[1:N + 1]                        # xdot_{n+1}+v_{n+1}
    ns = np.arange(1, N + 1)
    mon["drift"] = partial_sum_report(ns, ns * m2(drift))
    return mon


def decade_trend(ns, values):
    """Compare the series maxima over the first and last decade of n."""
    ns = np.asarray(ns)
    values = np.asarray(values, dtype=float)
    lo = values[(ns >= 1) & (ns <= 10)]
    hi = values[ns >= ns.max() // 10]
    first = float(lo.max()) if len(lo) else 0.0
    last = float(hi.max()) if len(hi) else 0.0
    return {"first_decade_max": first, "final_decade_max": last,
            "ratio": last / first if first > 0 else 0.0}
