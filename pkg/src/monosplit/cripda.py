"""Primal-dual specialization for saddle problems.

The stacked monotone inclusion uses the block metric

    M = [[ I/tau, -K^T ],
         [ -K,    I/sigma ]]

whose shifted resolvent splits into two sequential prox evaluations, so
each step costs one prox of G and one prox of F*. The step index is fixed
to one; tau and sigma carry the step-size role inside the metric.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .metriclin import SpdMap, as_vector, operator_norm
from .operators import MonotoneOp, CocoerciveMap


@dataclass
class CripdaParams:
    tau: float
    sigma: float
    w: float = 0.5
    e: float = 3.0
    s0: float = 2.5
    s1: float = 1.0
    nu0: float = 0.0
    delta: Optional[float] = None

    def schedule(self, n):
        nu_n = self.s1 * n + self.nu0
        tau_n = self.e + self.s1 * (n + 1) + self.nu0
        return nu_n, 1.0 - (self.e + self.s1) / tau_n, 1.0 - self.s0 / tau_n, tau_n


def build_metric(problem, tau, sigma):
    """Assemble the block metric as a dense SpdMap."""
    K = problem.K
    dy, dx = K.shape
    top = np.hstack([np.eye(dx) / tau, -K.T])
    bot = np.hstack([-K, np.eye(dy) / sigma])
    return SpdMap(np.vstack([top, bot]))


def validate_cripda(params, problem):
    """Check the two admissibility conditions; returns (selector, margins).

    Zero Lipschitz constants make the corresponding box constraint vacuous.
    Raises when neither condition holds.
    """
    lq = problem.lip_Q
    lp = problem.lip_Pstar
    ww = params.w * (1.0 - params.w)
    Knorm2 = operator_norm(problem.K) ** 2
    margins = {}
    delta = params.delta
    if delta is None:
        delta = max(0.25 * max(lq, lp), 0.0) + 1e-3
    cap = ww / delta
    m1 = {
        "delta_slack": delta - 0.25 * max(lq, lp),
        "tau_slack": cap - params.tau,
        "sigma_slack": cap - params.sigma,
        "K_slack": (1.0 / params.tau - delta / ww) * (1.0 / params.sigma - delta / ww)
        - Knorm2 if params.tau < cap and params.sigma < cap else float("-inf"),
    }
    margins["cond1"] = m1
    sel1 = (m1["delta_slack"] > 0 and m1["tau_slack"] > 0
            and m1["sigma_slack"] > 0 and m1["K_slack"] > 0)
    tau_cap = ww / lq if lq > 0 else float("inf")
    sigma_cap = ww / lp if lp > 0 else float("inf")
    m2 = {
        "tau_slack": tau_cap - params.tau,
        "sigma_slack": sigma_cap - params.sigma,
        "K_slack": (1.0 / params.tau - lq / ww) * (1.0 / params.sigma - lp / ww)
        - Knorm2 if params.tau < tau_cap and params.sigma < sigma_cap
        else float("-inf"),
    }
    margins["cond2"] = m2
    sel2 = m2["tau_slack"] > 0 and m2["sigma_slack"] > 0 and m2["K_slack"] > 0
    if sel1:
        return 1, margins
    if sel2:
        return 2, margins
    raise ValueError("saddle step sizes inadmissible, margins: %r" % margins)


def precond_resolvent(problem, tau, sigma, xi_p, chi_p):
    """Closed form of the metric-shifted resolvent.

    The lower-triangular structure of metric-plus-operator lets the primal
    prox go first and feed the dual prox.
    """
    x = as_vector(problem.prox_G(tau, tau * as_vector(xi_p)))
    y = as_vector(problem.prox_Fstar(
        sigma, sigma * as_vector(chi_p) + 2.0 * sigma * (problem.K @ x)))
    return x, y


def stacked_operators(problem):
    """The stacked inclusion data: multivalued part, smooth part, metric
    factory. Used by the reduction tests and by the residual measure."""
    K = problem.K
    dy, dx = K.shape

    def gen_resolvent(M, lam, u):
        # resolvent in the block metric; lam is fixed to 1 upstream
        r = M.apply(u)
        x, y = precond_resolvent(problem, _tau_of(M, dx), _sigma_of(M, dx, dy),
                                 r[:dx], r[dx:])
        return np.concatenate([x, y])

    A = MonotoneOp(resolvent=None, label="saddle_stack",
                   gen_resolvent=gen_resolvent)

    def B_apply(u):
        x = u[:dx]
        y = u[dx:]
        return np.concatenate([problem.grad_Q(x), problem.grad_Pstar(y)])

    lip = np.zeros((dx + dy, dx + dy))
    lip[:dx, :dx] = np.eye(dx) * max(problem.lip_Q, 1e-12)
    lip[dx:, dx:] = np.eye(dy) * max(problem.lip_Pstar, 1e-12)
    B = CocoerciveMap(B_apply, SpdMap(lip), label="saddle_smooth")
    return A, B


def _tau_of(M, dx):
    return 1.0 / M.matrix[0, 0]


def _sigma_of(M, dx, dy):
    return 1.0 / M.matrix[dx, dx]


@dataclass
class SaddleState:
    n: int
    x_prev: np.ndarray
    x: np.ndarray
    y_prev: np.ndarray
    y: np.ndarray
    xi_prev: np.ndarray
    chi_prev: np.ndarray


def cripda_step(state, params, problem):
    """One primal-dual step with inertia, correction and relaxation.

    The reflected point fed to the dual prox is twice the primal resolvent
    output minus the extrapolated primal point, recovering the classical
    reflected primal-dual scheme when inertia and correction vanish.
    """
    _, theta, gamma, _ = params.schedule(state.n)
    xi = state.x + theta * (state.x - state.x_prev) + gamma * (state.xi_prev - state.x)
    chi = state.y + theta * (state.y - state.y_prev) + gamma * (state.chi_prev - state.y)
    K = problem.K
    x_hat = as_vector(problem.prox_G(
        params.tau, xi - params.tau * (problem.grad_Q(xi) + K.T @ chi)))
    x_next = (1.0 - params.w) * xi + params.w * x_hat
    xi_bar = 2.0 / params.w * (x_next - (1.0 - params.w) * xi) - xi
    y_hat = as_vector(problem.prox_Fstar(
        params.sigma, chi - params.sigma * (problem.grad_Pstar(chi) - K @ xi_bar)))
    y_next = (1.0 - params.w) * chi + params.w * y_hat
    if not (np.all(np.isfinite(x_next)) and np.all(np.isfinite(y_next))):
        raise ArithmeticError("non-finite iterate at n=%d" % state.n)
    return SaddleState(state.n + 1, state.x, x_next, state.y, y_next, xi, chi)


def fixed_point_residual(problem, params, M, x, y):
    """M-norm distance between (x, y) and its half-step image."""
    dx = len(x)
    u = np.concatenate([x, y])
    smooth = np.concatenate([problem.grad_Q(x), problem.grad_Pstar(y)])
    r = M.apply(u) - smooth
    px, py = precond_resolvent(problem, params.tau, params.sigma, r[:dx], r[dx:])
    diff = u - np.concatenate([px, py])
    return np.sqrt(max(M.norm2(diff), 0.0))


@dataclass
class CripdaResult:
    x: np.ndarray
    y: np.ndarray
    n_iters: int
    stopped: str
    ns: np.ndarray
    vel2: np.ndarray
    fpr2: np.ndarray
    hist: np.ndarray      # stacked (x, y) iterates
    selector: int


def run_cripda(problem, params, x0, y0, max_iter=10**5, tol=1e-9):
    """Iterate the saddle solver until the metric residual is below tol."""
    selector, _ = validate_cripda(params, problem)
    M = build_metric(problem, params.tau, params.sigma)
    x0 = as_vector(x0)
    y0 = as_vector(y0)
    state = SaddleState(0, x0.copy(), x0.copy(), y0.copy(), y0.copy(),
                        x0.copy(), y0.copy())
    ns, vel2, fpr2 = [], [], []
    hist = [np.concatenate([x0, y0])]
    stopped = "max_iter"
    for n in range(max_iter):
        res = fixed_point_residual(problem, params, M, state.x, state.y)
        ns.append(n)
        fpr2.append(res ** 2)
        if res <= tol:
            stopped = "tol"
            vel2.append(0.0)
            break
        state_next = cripda_step(state, params, problem)
        step = np.concatenate([state_next.x - state.x, state_next.y - state.y])
        vel2.append(M.norm2(step))
        hist.append(np.concatenate([state_next.x, state_next.y]))
        if np.linalg.norm(hist[-1]) > 1e12:
            stopped = "diverged"
            state = state_next
            break
        state = state_next
    return CripdaResult(state.x, state.y, len(ns) - (1 if stopped == "tol" else 0),
                        stopped, np.array(ns), np.array(vel2), np.array(fpr2),
                        np.array(hist), selector)
