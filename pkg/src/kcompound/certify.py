"""Sufficient conditions for k-contraction and local stability.

Every contraction-type check returns a :class:`Certificate`. The ``bound``
is the worst value of the tested quantity; the certificate passes when
``bound <= -eta`` and ``bound < 0``. Universal statements over a state
region and time are approximated by the samples of a
:class:`JacobianSampler`, and such certificates are labelled ``sampled``.
Checks on constant matrices, and the Hopfield bound (uniform in the state),
are labelled ``exact``.
"""

import math
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Callable, Optional

import numpy as np

from ._validation import DomainError, as_square, check_invertible, check_k
from .compounds import additive_compound, multiplicative_compound
from .lognorms import dual_exponent, mu, normalize_p, tau

__all__ = [
    "Certificate",
    "JacobianSampler",
    "SampleEvaluationError",
    "certify_direct",
    "certify_tau",
    "trace_dominance",
    "search_diagonal_weights",
    "ltv_smith_certify",
    "hopfield_certify",
    "hurwitz_via_2compound",
    "li_wang_certificate",
    "local_stability_certificate",
    "local_stability_compound_free",
    "eigsum_necessary_check",
]

METHODS = ("direct", "tau", "trace_dominance", "ltv_smith", "hopfield", "li_wang", "local_stability")


class SampleEvaluationError(RuntimeError):
    """The Jacobian evaluator failed at a specific sample."""

    def __init__(self, t, x, cause):
        self.t = t
        self.x = None if x is None else np.asarray(x).tolist()
        super().__init__(f"Jacobian evaluation failed at t={t}, x={self.x}: {cause!r}")


@dataclass
class Certificate:
    method: str
    k: int
    p: object
    bound: float
    eta: float = 0.0
    witness: dict = field(default_factory=dict)
    mode: str = "exact"
    n_samples: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise DomainError(f"unknown certificate method {self.method!r}")
        self.bound = float(self.bound)
        if self.eta < 0:
            raise DomainError("eta must be non-negative")

    @property
    def passed(self):
        return bool(self.bound <= -self.eta and self.bound < 0)

    @property
    def rate_eta(self):
        """Largest certified rate, ``max(0, -bound)``."""
        return max(0.0, -self.bound)

    def __bool__(self):
        return self.passed

    def to_dict(self):
        p = self.p
        if p == math.inf:
            p = "inf"
        return {
            "method": self.method,
            "k": self.k,
            "p": p,
            "bound": self.bound,
            "required_eta": float(self.eta),
            "rate_eta": self.rate_eta,
            "passed": self.passed,
            "mode": self.mode,
            "n_samples": self.n_samples,
            "witness": self.witness,
        }


@dataclass
class JacobianSampler:
    """A Jacobian ``J(t, x)`` together with the sample points used to test it.

    Parameters
    ----------
    n : int
        State dimension.
    evaluator : callable ``(t, x) -> (n, n) array``
    states : array_like, shape (s, n)
    times : array_like, shape (m,)
        Every state is paired with every time.
    exact : bool
        Set when the samples provably cover the quantifier (constant Jacobian).
    """

    n: int
    evaluator: Callable
    states: np.ndarray
    times: np.ndarray = field(default_factory=lambda: np.zeros(1))
    exact: bool = False

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=float).reshape(-1, self.n)
        self.times = np.atleast_1d(np.asarray(self.times, dtype=float))
        if len(self.states) == 0 or len(self.times) == 0:
            raise DomainError("sampling grid is empty")

    @classmethod
    def constant(cls, A):
        A = as_square(A)
        return cls(A.shape[0], lambda t, x: A, np.zeros((1, A.shape[0])), exact=True)

    @classmethod
    def from_time_function(cls, A_of_t, n, times):
        """Linear time-varying system; the state plays no role."""
        return cls(n, lambda t, x: A_of_t(t), np.zeros((1, n)), times)

    @classmethod
    def box(cls, evaluator, n, low, high, per_axis=5, n_random=0, seed=0, times=(0.0,)):
        """Regular grid plus optional uniform random points over ``[low, high]^n``."""
        low = np.broadcast_to(np.asarray(low, dtype=float), (n,))
        high = np.broadcast_to(np.asarray(high, dtype=float), (n,))
        axes = [np.linspace(lo, hi, per_axis) for lo, hi in zip(low, high)]
        pts = [np.array(p) for p in product(*axes)]
        if n_random:
            rng = np.random.default_rng(seed)
            pts.extend(rng.uniform(low, high, size=(n_random, n)))
        return cls(n, evaluator, np.array(pts), np.asarray(times, dtype=float))

    def __len__(self):
        return len(self.states) * len(self.times)

    def __iter__(self):
        for t in self.times:
            for x in self.states:
                try:
                    J = np.asarray(self.evaluator(t, x), dtype=float)
                except Exception as exc:
                    raise SampleEvaluationError(t, x, exc) from exc
                if J.shape != (self.n, self.n) or not np.all(np.isfinite(J)):
                    raise SampleEvaluationError(t, x, ValueError(f"bad Jacobian, shape {J.shape}"))
                yield t, x, J


def _worst(sampler, value):
    best, where = -math.inf, None
    for t, x, J in sampler:
        v = value(J)
        if v > best:
            best, where = v, (float(t), x.tolist())
    return best, {"t": where[0], "x": where[1]}


def certify_direct(sampler, k, p=2, T=None, eta=0.0):
    """Check ``mu_{p,T^(k)}(J^[k](t, x)) <= -eta < 0`` on every sample.

    The compound is formed explicitly, so this path is meant for small n.
    """
    p = normalize_p(p)
    k = check_k(k, sampler.n)
    Tk = None if T is None else multiplicative_compound(check_invertible(T), k)
    bound, where = _worst(sampler, lambda J: mu(additive_compound(J, k), p, scaling=Tk))
    witness = {"worst_sample": where}
    if T is not None:
        witness["T"] = np.asarray(T).tolist()
    return Certificate("direct", k, p, bound, eta, witness,
                       "exact" if sampler.exact else "sampled", len(sampler))


def certify_tau(sampler, k, p=2, T=None, eta=0.0):
    """Check ``tau_{p,k}(J(t, x)) <= -eta < 0`` on every sample, without compounds."""
    p = normalize_p(p)
    k = check_k(k, sampler.n)
    if T is not None:
        T = check_invertible(T)
    bound, where = _worst(sampler, lambda J: tau(J, k, p, T))
    witness = {"worst_sample": where, "q": "inf" if dual_exponent(p) == math.inf else dual_exponent(p)}
    if T is not None:
        witness["T"] = T.tolist()
    return Certificate("tau", k, p, bound, eta, witness,
                       "exact" if sampler.exact else "sampled", len(sampler))


def _check_weights(d, n):
    d = np.asarray(d, dtype=float).ravel()
    if d.shape != (n,):
        raise DomainError(f"need {n} weights, got {d.size}")
    if not np.all(np.isfinite(d)) or np.any(d <= 0):
        raise DomainError("weights must be finite and strictly positive")
    return d


def _trace_dominance_terms(A, k, d):
    """Left side of the weighted k-trace-dominance inequality, one value per column."""
    n = A.shape[0]
    off = np.abs(A)
    np.fill_diagonal(off, 0.0)
    # column i: sum_j d_j |a_ji| / d_i
    scaled = (d @ off) / d
    return np.trace(A) - (n - k) * np.diagonal(A) + (n - k) * scaled


def trace_dominance(A, k, d=None, eta=0.0):
    """Weighted k-trace dominance for ``dx/dt = A x``.

    For each column ``i`` evaluates
    ``-(n-k-1) a_ii + sum_{j != i} (a_jj + (n-k) d_j/d_i |a_ji|)``; passing
    means k-contraction w.r.t. ``|x|_{inf,D} = |D x|_inf``, ``D = diag(d)``.
    """
    A = as_square(A)
    n = A.shape[0]
    k = check_k(k, n)
    d = np.ones(n) if d is None else _check_weights(d, n)
    terms = _trace_dominance_terms(A, k, d)
    i = int(np.argmax(terms))
    return Certificate("trace_dominance", k, math.inf, terms[i], eta,
                       {"d": d.tolist(), "column": i + 1, "terms": terms.tolist()})


def search_diagonal_weights(A, k, iterations=200):
    """Look for positive weights making :func:`trace_dominance` pass.

    The inequality reads ``tr(A) + (n-k) * c_i(d) < 0`` with
    ``c_i(d) = (d^T B)_i / d_i``, where the Metzler matrix ``B`` has
    ``b_ii = -a_ii`` and ``b_ji = |a_ji|`` off the diagonal. The smallest
    achievable ``max_i c_i`` is the Perron root of ``B`` and the optimal
    weights are its left Perron vector. That vector is approached by power iteration on a
    shifted, slightly perturbed copy of ``B``; the best iterate is kept.

    Returns
    -------
    ndarray or None
        Weights normalised to ``max(d) = 1``, or None when no tried weight
        vector passes. None only means this sufficient test is inconclusive.
    """
    A = as_square(A)
    n = A.shape[0]
    k = check_k(k, n)
    ones = np.ones(n)
    if trace_dominance(A, k, ones).passed:
        return ones
    if k == n:
        return None  # the condition is tr(A) < 0 regardless of d
    off = np.abs(A)
    np.fill_diagonal(off, 0.0)
    B = off - np.diag(np.diagonal(A))
    scale = max(1.0, float(np.max(np.abs(B))))
    # positive perturbation keeps the iteration inside the open positive orthant
    M = B + 1e-9 * scale * (np.ones((n, n)) - np.eye(n))
    M = M + (float(np.max(np.diagonal(A))) + scale) * np.eye(n)
    best_d, best_val = ones, float(np.max(_trace_dominance_terms(A, k, ones)))
    d = ones.copy()
    for _ in range(iterations):
        d = d @ M
        d = d / np.max(d)
        if np.min(d) <= 0:
            break
        val = float(np.max(_trace_dominance_terms(A, k, d)))
        if val < best_val:
            best_d, best_val = d.copy(), val
    return best_d if best_val < 0 else None


def _sqrtm_spd(Q):
    w, V = np.linalg.eigh(Q)
    return (V * np.sqrt(w)) @ V.T


def ltv_smith_certify(A_samples, Q, theta, k, eta=0.0):
    """LTV k-contraction from ``A(t)^T Q + Q A(t) + 2 theta(t) Q >= 0``.

    Parameters
    ----------
    A_samples : sequence of (t, A) pairs
    Q : array_like, symmetric positive definite
    theta : float or sequence of float aligned with `A_samples`
    k : int
    eta : float

    The bound is ``max_t tr(A(t)) + (n - k) theta(t)``. The certificate only
    passes if, at every sample, the matrix inequality holds (smallest
    eigenvalue ``>= -1e-9 ||.||_inf``) and ``mu_{2,P}(-A(t)) <= theta(t)``
    with ``P = Q^{1/2}``. On a pass the system is k-contracting in
    ``|x|_{2,P}``.
    """
    Q = as_square(Q, "Q")
    n = Q.shape[0]
    k = check_k(k, n)
    if not np.allclose(Q, Q.T, rtol=0, atol=1e-12 * max(1.0, np.max(np.abs(Q)))):
        raise DomainError("Q must be symmetric")
    Q = 0.5 * (Q + Q.T)
    if np.linalg.eigvalsh(Q)[0] <= 0:
        raise DomainError("Q must be positive definite")
    samples = [(float(t), as_square(A)) for t, A in A_samples]
    if not samples:
        raise DomainError("no samples given")
    theta = np.broadcast_to(np.asarray(theta, dtype=float), (len(samples),))
    P = _sqrtm_spd(Q)
    bound, lmi_ok, mu_ok = -math.inf, True, True
    worst_t, min_eig, max_gap = None, math.inf, -math.inf
    for (t, A), th in zip(samples, theta):
        if A.shape != (n, n):
            raise DomainError(f"A({t}) has shape {A.shape}, expected {(n, n)}")
        S = A.T @ Q + Q @ A + 2 * th * Q
        S = 0.5 * (S + S.T)
        lam = float(np.linalg.eigvalsh(S)[0])
        min_eig = min(min_eig, lam)
        if lam < -1e-9 * max(1.0, np.linalg.norm(S, np.inf)):
            lmi_ok = False
        gap = mu(-A, 2, scaling=P) - th
        max_gap = max(max_gap, gap)
        if gap > 1e-9 * max(1.0, abs(th)):
            mu_ok = False
        val = np.trace(A) + (n - k) * th
        if val > bound:
            bound, worst_t = val, t
    witness = {"Q": Q.tolist(), "P": P.tolist(), "min_lmi_eigenvalue": min_eig,
               "max_mu_minus_theta": max_gap, "lmi_holds": lmi_ok, "mu_bound_holds": mu_ok,
               "worst_t": worst_t}
    if not (lmi_ok and mu_ok):
        # the trace inequality alone certifies nothing
        bound = max(bound, 0.0)
    return Certificate("ltv_smith", k, 2, bound, eta, witness, "sampled", len(samples))


def hopfield_certify(model, k, d=None, eta=0.0):
    """State-independent k-contraction test for a Hopfield network.

    With derivative bounds ``m_i <= |phi_i'| <= M_i`` checks, for every i,

        -(n-k-1) (-1/r_i - m_i |w_ii|)
          + sum_{j != i} (-1/r_j + M_j |w_jj| + (n-k) d_j/d_i M_i |w_ji|)  <=  -eta.

    The first term presumes ``w_ii phi_i' >= 0`` (non-negative
    self-coupling, non-decreasing activation); for a negative ``w_ii`` the
    self-coupling lower bound ``-M_i |w_ii|`` is used instead so the test
    stays sound. Restricted to ``k <= n - 1``.
    """
    n = model.n
    if n < 2:
        raise DomainError("Hopfield certificate needs n >= 2")
    k = check_k(k, n, high=n - 1)
    if model.m is None or model.M is None:
        raise DomainError("model lacks activation derivative bounds")
    d = np.ones(n) if d is None else _check_weights(d, n)
    r_inv = 1.0 / model.r
    w_diag = np.diagonal(model.W)
    absW = np.abs(model.W)
    self_low = np.where(w_diag >= 0, model.m, model.M) * np.abs(w_diag)
    upper_diag = -r_inv + model.M * np.abs(w_diag)
    terms = np.empty(n)
    for i in range(n):
        others = [j for j in range(n) if j != i]
        terms[i] = (-(n - k - 1) * (-r_inv[i] - self_low[i])
                    + sum(upper_diag[j] + (n - k) * d[j] / d[i] * model.M[i] * absW[j, i]
                          for j in others))
    i = int(np.argmax(terms))
    return Certificate("hopfield", k, math.inf, terms[i], eta,
                       {"d": d.tolist(), "column": i + 1, "terms": terms.tolist()})


def li_wang_certificate(A):
    """Certificate form of the Li-Wang Hurwitz test.

    ``bound = max(max Re spec(A^[2]), -(-1)^n det A)``; negative iff both
    conditions hold.
    """
    A = as_square(A)
    n = A.shape[0]
    sign_term = -((-1) ** n) * float(np.linalg.det(A))
    if n == 1:
        spec = float(A[0, 0])
    else:
        spec = float(np.max(np.linalg.eigvals(additive_compound(A, 2)).real))
    return Certificate("li_wang", min(2, n), 2, max(spec, sign_term), 0.0,
                       {"max_real_eig_2compound": spec, "signed_det": -sign_term})


def hurwitz_via_2compound(A):
    """Hurwitz test: ``A^[2]`` Hurwitz and ``(-1)^n det(A) > 0``."""
    return li_wang_certificate(A).passed


def local_stability_certificate(J, p=2, T=None):
    """Certificate form of the compound-free local stability test.

    ``bound = max(tau_{p,2}(J), -(-1)^n det J)``.
    """
    J = as_square(J)
    n = J.shape[0]
    p = normalize_p(p)
    sign_term = -((-1) ** n) * float(np.linalg.det(J))
    t2 = float(J[0, 0]) if n == 1 else tau(J, 2, p, T)
    witness = {"tau_p2": t2, "signed_det": -sign_term}
    if T is not None:
        witness["T"] = np.asarray(T).tolist()
    return Certificate("local_stability", min(2, n), p, max(t2, sign_term), 0.0, witness)


def local_stability_compound_free(J, p=2, T=None):
    """``tau_{p,2}(J) < 0`` and ``(-1)^n det(J) > 0``; True implies J is Hurwitz.

    A False result is inconclusive.
    """
    return local_stability_certificate(J, p, T).passed


def eigsum_necessary_check(A, k):
    """True when every sum of k eigenvalues of `A` has negative real part."""
    A = as_square(A)
    n = A.shape[0]
    k = check_k(k, n)
    if n > 8:
        raise DomainError("eigenvalue-sum enumeration is limited to n <= 8")
    lam = np.linalg.eigvals(A).real
    return bool(max(sum(c) for c in combinations(lam, k)) < 0)
