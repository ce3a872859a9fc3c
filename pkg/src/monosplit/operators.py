"""Monotone operators through their resolvents, plus a small prox catalog."""

import numpy as np

from .metriclin import SpdMap, as_vector


def prox_l1(lam, x):
    """Soft thresholding: sign(x_i) * max(|x_i| - lam, 0)."""
    x = as_vector(x)
    return np.sign(x) * np.maximum(np.abs(x) - lam, 0.0)


def prox_box(lo, hi, x):
    """Componentwise clamp onto [lo, hi]."""
    if lo > hi:
        raise ValueError("empty box: lo > hi")
    return np.clip(as_vector(x), lo, hi)


def prox_quadratic(lam, Q, b, x):
    """Resolvent of the affine map u -> Qu + b, i.e. (I + lam Q)^{-1}(x - lam b).

    Q must be positive semidefinite; the solve is verified by plugging the
    result back into the defining equation.
    """
    Q = np.asarray(Q, dtype=float)
    b = as_vector(b)
    x = as_vector(x)
    lhs = np.eye(len(x)) + lam * Q
    p = np.linalg.solve(lhs, x - lam * b)
    res = np.linalg.norm(lhs @ p - (x - lam * b))
    if res > 1e-10 * max(np.linalg.norm(x), 1.0):
        raise ArithmeticError("resolvent solve failed; check Q is PSD")
    return p


class MonotoneOp:
    """A maximally monotone operator seen through its resolvent.

    resolvent(lam, x) returns (I + lam A)^{-1} x. graph_member, when
    available, tests (x, u) membership in the graph of A up to a tolerance;
    only the inclusion diagnostics need it. affine=(Q, b) marks operators of
    the form A(x) = Qx + b, for which preconditioned resolvents have a
    direct linear solve.
    """

    def __init__(self, resolvent, graph_member=None, label="", affine=None,
                 gen_resolvent=None):
        self.resolvent = resolvent
        self.graph_member = graph_member
        self.label = label
        self.affine = affine
        self.gen_resolvent = gen_resolvent

    def __repr__(self):
        return "MonotoneOp(%s)" % (self.label or "anonymous")


def zero_op():
    return MonotoneOp(lambda lam, x: as_vector(x),
                      graph_member=lambda x, u, tol=1e-8: bool(np.all(np.abs(u) <= tol)),
                      label="zero",
                      affine=(None, None))


def box_op(lo, hi):
    """Normal cone of the box [lo, hi]^d."""
    if lo > hi:
        raise ValueError("empty box: lo > hi")

    def graph_member(x, u, tol=1e-8):
        x = as_vector(x)
        u = as_vector(u)
        if np.any(x < lo - tol) or np.any(x > hi + tol):
            return False
        up_ok = (u <= tol) | (x >= hi - tol)
        lo_ok = (u >= -tol) | (x <= lo + tol)
        return bool(np.all(up_ok) and np.all(lo_ok))

    return MonotoneOp(lambda lam, x: prox_box(lo, hi, x),
                      graph_member=graph_member,
                      label="normal_cone[%g,%g]" % (lo, hi))


def l1_op(weight=1.0):
    """Subdifferential of weight * ||.||_1."""
    if weight < 0:
        raise ValueError("weight must be nonnegative")

    def graph_member(x, u, tol=1e-8):
        x = as_vector(x)
        u = as_vector(u)
        if np.any(np.abs(u) > weight + tol):
            return False
        active = np.abs(x) > tol
        return bool(np.all(np.abs(u[active] - weight * np.sign(x[active])) <= tol))

    return MonotoneOp(lambda lam, x: prox_l1(lam * weight, x),
                      graph_member=graph_member,
                      label="l1_subdiff(w=%g)" % weight)


def affine_op(Q, b, label="affine"):
    """Monotone map A(x) = Qx + b with Q positive semidefinite."""
    Q = np.asarray(Q, dtype=float)
    b = as_vector(b)

    def graph_member(x, u, tol=1e-8):
        return bool(np.linalg.norm(as_vector(u) - (Q @ as_vector(x) + b)) <= tol)

    return MonotoneOp(lambda lam, x: prox_quadratic(lam, Q, b, x),
                      graph_member=graph_member,
                      label=label,
                      affine=(Q, b))


def generalized_resolvent(A, M, lam, u):
    """Solve M p + lam a = M u with a in A(p), i.e. p = (M + lam A)^{-1}(M u).

    Dispatch: identity metric uses the plain resolvent; affine operators get
    a direct linear solve; otherwise the operator must carry its own closed
    form. Anything else is rejected rather than approximated.
    """
    u = as_vector(u)
    if M is None or M.is_identity:
        return as_vector(A.resolvent(lam, u))
    if A.gen_resolvent is not None:
        return as_vector(A.gen_resolvent(M, lam, u))
    if A.affine is not None:
        Q, b = A.affine
        d = len(u)
        Q = np.zeros((d, d)) if Q is None else np.asarray(Q, dtype=float)
        b = np.zeros(d) if b is None else as_vector(b)
        return np.linalg.solve(M.matrix + lam * Q, M.apply(u) - lam * b)
    raise ValueError("generalized resolvent unavailable: metric is not the "
                     "identity and operator %r has no affine form or closed "
                     "formula" % A)


class CocoerciveMap:
    """A single-valued map B together with its co-coercivity certificate L.

    The certificate means <Bx - By, x - y> >= ||Bx - By||^2 in the L^{-1}
    norm. With L = (1/beta) I this is the usual beta-co-coercivity.
    """

    def __init__(self, apply, certificate_L, label=""):
        self._apply = apply
        self.certificate_L = certificate_L
        self.label = label

    def __call__(self, x):
        return as_vector(self._apply(as_vector(x)))

    def __repr__(self):
        return "CocoerciveMap(%s)" % (self.label or "anonymous")


def cocoercive_from_beta(apply, beta, d, label=""):
    """Wrap a beta-co-coercive map; the certificate is (1/beta) I."""
    return CocoerciveMap(apply, SpdMap(np.eye(d) / beta), label=label)


def cocoercivity_check(B, pairs, tol=1e-10):
    """Evaluate the co-coercivity inequality on sample pairs.

    Returns a dict with the per-pair slacks
    <Bx - By, x - y> - ||Bx - By||^2_{L^{-1}}; the check passes when the
    worst slack stays above -tol.
    """
    L = B.certificate_L
    slacks = []
    for x, y in pairs:
        x = as_vector(x)
        y = as_vector(y)
        db = B(x) - B(y)
        slacks.append(float(db @ (x - y)) - float(db @ L.solve(db)))
    slacks = np.array(slacks)
    return {
        "slacks": slacks,
        "min_slack": float(slacks.min()) if len(slacks) else 0.0,
        "passed": bool(len(slacks) and slacks.min() >= -tol),
    }


class SaddleFunctionPair:
    """Data of a convex-concave saddle problem.

    min_x max_y G(x) + Q(x) + <Kx, y> - F*(y) - P*(y), with G, F* given by
    their prox operators and Q, P* by gradients with known Lipschitz
    constants.
    """

    def __init__(self, prox_G, prox_Fstar, grad_Q, lip_Q, grad_Pstar,
                 lip_Pstar, K, label=""):
        self.prox_G = prox_G
        self.prox_Fstar = prox_Fstar
        self.grad_Q = grad_Q
        self.lip_Q = float(lip_Q)
        self.grad_Pstar = grad_Pstar
        self.lip_Pstar = float(lip_Pstar)
        self.K = np.asarray(K, dtype=float)
        self.label = label

    @property
    def d_primal(self):
        return self.K.shape[1]

    @property
    def d_dual(self):
        return self.K.shape[0]
