"""Executable models and simulation utilities.

Contains the continuous Hopfield network, the two-dimensional rotating LTV
system with a closed-form transition matrix, a fixed-step RK4 integrator,
damped Newton equilibrium search and seeded convergence experiments.
"""

import csv
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._validation import DomainError, as_square

__all__ = [
    "HopfieldModel",
    "Classification",
    "Trajectory",
    "ExperimentSummary",
    "EquilibriumNotFound",
    "LTVRotationExample",
    "integrate",
    "classify",
    "find_equilibrium",
    "convergence_experiment",
    "ltv_rotation_example",
    "numerical_jacobian",
]

#: Terminal distance (inf-norm) below which a trajectory is matched to an equilibrium.
MATCH_TOL = 1e-4
#: Tail displacement below which a trajectory counts as settled.
SETTLE_TOL = 1e-8
#: State magnitude treated as divergence.
BLOWUP = 1e12


class EquilibriumNotFound(RuntimeError):
    """Newton iteration failed to reach the residual tolerance."""


@dataclass
class HopfieldModel:
    """``dx_i/dt = -x_i / r_i + sum_j W_ij phi_j(x_j) + u_i``.

    The default activation family is ``phi_j(z) = a_j tanh(b_j z)``, whose
    derivative magnitude lies in ``[0, |a_j b_j|]``. A custom activation
    must come with its derivative and the bounds ``m <= |phi'| <= M``.
    """

    r: np.ndarray
    W: np.ndarray
    u: Optional[np.ndarray] = None
    a: Optional[np.ndarray] = None
    b: Optional[np.ndarray] = None
    activation: Optional[Callable] = None
    activation_derivative: Optional[Callable] = None
    m: Optional[np.ndarray] = None
    M: Optional[np.ndarray] = None

    def __post_init__(self):
        self.W = as_square(self.W, "W")
        n = self.W.shape[0]
        vec = lambda v, fill: np.broadcast_to(  # noqa: E731
            np.asarray(fill if v is None else v, dtype=float), (n,)
        ).copy()
        self.r = vec(self.r, 1.0)
        self.u = vec(self.u, 0.0)
        if np.any(self.r <= 0):
            raise DomainError("time constants r_i must be positive")
        if self.activation is None:
            if self.activation_derivative is not None:
                raise DomainError("activation_derivative given without activation")
            self.a = vec(self.a, 1.0)
            self.b = vec(self.b, 1.0)
            self.m = vec(self.m, 0.0)
            self.M = vec(self.M, np.abs(self.a * self.b))
        else:
            if self.activation_derivative is None or self.m is None or self.M is None:
                raise DomainError("a custom activation needs its derivative and bounds m, M")
            self.m = vec(self.m, 0.0)
            self.M = vec(self.M, 0.0)
        if np.any(self.m < 0) or np.any(self.m > self.M):
            raise DomainError("derivative bounds must satisfy 0 <= m_i <= M_i")

    @classmethod
    def uniform(cls, n=3, r=0.49, weight=1.0, u=0.0):
        """All weights equal to `weight`, equal time constants, tanh activations."""
        return cls(r=np.full(n, float(r)), W=np.full((n, n), float(weight)), u=np.full(n, float(u)))

    @property
    def n(self):
        return self.W.shape[0]

    def phi(self, x):
        if self.activation is not None:
            return self.activation(x)
        return self.a * np.tanh(self.b * x)

    def dphi(self, x):
        if self.activation_derivative is not None:
            return self.activation_derivative(x)
        return self.a * self.b * (1.0 - np.tanh(self.b * x) ** 2)

    def field(self, x):
        """Vector field; `x` may carry leading batch axes."""
        x = np.asarray(x, dtype=float)
        return -x / self.r + self.phi(x) @ self.W.T + self.u

    def jacobian(self, x):
        """``-diag(1/r) + W diag(phi'(x))``."""
        x = np.asarray(x, dtype=float)
        return -np.diag(1.0 / self.r) + self.W * self.dphi(x)[None, :]

    def __call__(self, t, x):
        return self.field(x)

    def to_dict(self):
        out = {"n": self.n, "r": self.r.tolist(), "W": self.W.tolist(), "u": self.u.tolist(),
               "m": self.m.tolist(), "M": self.M.tolist()}
        if self.activation is None:
            out.update(a=self.a.tolist(), b=self.b.tolist())
        return out


def numerical_jacobian(f, x, h=1e-5):
    """Five-point central-difference Jacobian of ``f: R^n -> R^n``."""
    x = np.asarray(x, dtype=float)
    n = x.size
    J = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        J[:, j] = (-f(x + 2 * e) + 8 * f(x + e) - 8 * f(x - e) + f(x - 2 * e)) / (12 * h)
    return J


@dataclass(frozen=True)
class Classification:
    """How a trajectory ended: ``converged``, ``bounded_nonconverged`` or ``diverged``."""

    kind: str
    equilibrium: Optional[int] = None
    distance: Optional[float] = None

    def to_dict(self):
        return {"kind": self.kind, "equilibrium": self.equilibrium, "distance": self.distance}


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    classification: Optional[Classification] = None

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise DomainError("times and states differ in length")

    @property
    def final(self):
        return self.states[-1]

    def to_csv(self, path):
        """Write ``t, x1, ..., xn`` rows."""
        n = self.states.shape[1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t"] + [f"x{i + 1}" for i in range(n)])
            for t, x in zip(self.times, self.states):
                w.writerow([repr(float(t))] + [repr(float(v)) for v in x])


def _rk4_run(field, x0, t0, t1, step):
    """Fixed-step RK4 over ``[t0, t1]``; `x0` may be ``(n,)`` or ``(batch, n)``."""
    if not step > 0:
        raise DomainError("step must be positive")
    if not (np.isfinite(t0) and np.isfinite(t1)) or t1 < t0:
        raise DomainError(f"invalid time span ({t0}, {t1})")
    n_steps = int(round((t1 - t0) / step))
    if n_steps < 1 or not np.isclose(n_steps * step, t1 - t0, rtol=1e-9, atol=1e-12):
        raise DomainError("time span must be a positive whole multiple of step")
    times = t0 + step * np.arange(n_steps + 1)
    x = np.array(x0, dtype=float)
    states = np.empty((n_steps + 1,) + x.shape)
    states[0] = x
    h = step
    alive = True
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(n_steps):
            t = times[i]
            if alive:
                k1 = field(t, x)
                k2 = field(t + h / 2, x + h / 2 * k1)
                k3 = field(t + h / 2, x + h / 2 * k2)
                k4 = field(t + h, x + h * k3)
                x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
                if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > BLOWUP:
                    # keep the blown-up rows as inf, stop integrating once all are gone
                    x = np.where(np.isfinite(x) & (np.abs(x) <= BLOWUP), x, np.inf)
                    alive = not np.all(np.isinf(x))
            states[i + 1] = x
    return times, states


def classify(times, states, equilibria=(), tail=None):
    """Classify the end of a trajectory against a list of equilibria."""
    x_end = states[-1]
    if not np.all(np.isfinite(x_end)):
        return Classification("diverged")
    T = times[-1] - times[0]
    tail = min(1.0, T / 10) if tail is None else tail
    j = int(np.searchsorted(times, times[-1] - tail))
    j = min(j, len(times) - 2)
    settled = np.max(np.abs(x_end - states[j])) < SETTLE_TOL
    dists = [float(np.max(np.abs(x_end - np.asarray(e)))) for e in equilibria]
    if dists:
        best = int(np.argmin(dists))
        if dists[best] < MATCH_TOL:
            return Classification("converged", best, dists[best])
    if settled:
        return Classification("converged", None, 0.0)
    return Classification("bounded_nonconverged")


def integrate(field, x0, t_span, step=1e-3, equilibria=()):
    """Integrate ``dx/dt = field(t, x)`` with classical RK4 at a fixed step.

    Non-finite or exploding states are classified as ``diverged`` rather
    than raising.

    Parameters
    ----------
    field : callable ``(t, x) -> dx/dt``
    x0 : array_like, shape (n,)
    t_span : (t0, t1)
    step : float
    equilibria : sequence of array_like
        Known equilibria used to label the terminal state.
    """
    t0, t1 = (float(v) for v in t_span)
    times, states = _rk4_run(field, np.asarray(x0, dtype=float), t0, t1, step)
    return Trajectory(times, states, classify(times, states, equilibria))


def find_equilibrium(field, jacobian, x0, tol=1e-12, max_iter=100):
    """Damped Newton iteration for ``field(x) = 0``.

    Stops once ``||field(x)||_inf <= tol``. If the iteration stalls above
    `tol` but below ``1e-10`` the iterate is still accepted.

    Raises
    ------
    EquilibriumNotFound
        Singular Jacobian at an iterate, or no acceptable root within
        `max_iter` iterations.
    """
    x = np.array(x0, dtype=float)
    fx = np.asarray(field(x), dtype=float)
    res = np.max(np.abs(fx))
    for _ in range(max_iter):
        if res <= tol:
            return x
        try:
            dx = np.linalg.solve(jacobian(x), -fx)
        except np.linalg.LinAlgError:
            raise EquilibriumNotFound(f"singular Jacobian at x={x.tolist()}") from None
        lam = 1.0
        while lam > 1e-10:
            x_new = x + lam * dx
            f_new = np.asarray(field(x_new), dtype=float)
            r_new = np.max(np.abs(f_new))
            if r_new < res or r_new <= tol:
                break
            lam /= 2
        else:
            break
        x, fx, res = x_new, f_new, r_new
    if res < 1e-10:
        return x
    raise EquilibriumNotFound(f"Newton stalled with residual {res:.3g} at x={x.tolist()}")


def _merge_point(points, x, tol=MATCH_TOL):
    for p in points:
        if np.max(np.abs(p - x)) < tol:
            return
    points.append(x)


@dataclass
class ExperimentSummary:
    equilibria: list
    initial_conditions: np.ndarray
    trajectories: list = field(repr=False)

    @property
    def classifications(self):
        return [t.classification for t in self.trajectories]

    def counts(self):
        out = {"converged": 0, "bounded_nonconverged": 0, "diverged": 0}
        for c in self.classifications:
            out[c.kind] += 1
        return out

    def limits(self):
        """Number of trajectories attracted to each listed equilibrium."""
        hits = [0] * len(self.equilibria)
        for c in self.classifications:
            if c.equilibrium is not None:
                hits[c.equilibrium] += 1
        return hits

    def to_dict(self):
        return {
            "equilibria": [np.asarray(e).tolist() for e in self.equilibria],
            "counts": self.counts(),
            "limit_counts": self.limits(),
            "trajectories": [
                {
                    "x0": np.asarray(x0).tolist(),
                    "x_final": t.final.tolist(),
                    "classification": t.classification.to_dict(),
                }
                for x0, t in zip(self.initial_conditions, self.trajectories)
            ],
        }


def convergence_experiment(model, n_trials, ic_box=(-3.0, 3.0), T=35.0, step=1e-3, seed=0,
                           equilibria=None, extra_ics=()):
    """Simulate `model` from seeded random initial conditions and classify the limits.

    Initial conditions are `extra_ics` followed by `n_trials` points drawn
    uniformly from the box ``ic_box`` (a ``(low, high)`` pair applied to
    every coordinate) with ``numpy.random.default_rng(seed)``. All
    trajectories are integrated together as one batch.

    When `equilibria` is None they are located by Newton's method from the
    origin, ``+-(1, ..., 1)`` and every settled terminal state.
    """
    n = model.n
    rng = np.random.default_rng(seed)
    lo, hi = ic_box
    drawn = rng.uniform(lo, hi, size=(int(n_trials), n))
    extra = np.asarray(extra_ics, dtype=float).reshape(-1, n)
    ics = np.vstack([extra, drawn])
    eq = [np.asarray(e, dtype=float) for e in equilibria] if equilibria is not None else None
    if len(ics) == 0:
        return ExperimentSummary(eq or [], ics, [])

    times, states = _rk4_run(lambda t, x: model.field(x), ics, 0.0, float(T), step)
    if eq is None:
        eq = []
        starts = [np.zeros(n), np.ones(n), -np.ones(n)] + list(states[-1])
        for s in starts:
            if not np.all(np.isfinite(s)):
                continue
            try:
                e = find_equilibrium(model.field, model.jacobian, s)
            except EquilibriumNotFound:
                continue
            _merge_point(eq, e)
        eq.sort(key=lambda e: (round(float(np.sum(np.abs(e))), 6), -float(np.sum(e))))
    trajs = []
    for i in range(len(ics)):
        sts = states[:, i, :]
        trajs.append(Trajectory(times, sts, classify(times, sts, eq)))
    return ExperimentSummary(eq, ics, trajs)


@dataclass(frozen=True)
class LTVRotationExample:
    """``dx/dt = A(t) x`` with

    ``A(t) = 1/2 [[-3 + 3 cos^2 t, 2 - 3 cos t sin t], [-2 - 3 cos t sin t, -3 + 3 sin^2 t]]``.

    Uniformly stable but not contractive; ``A^[2](t) = tr A(t) = -3/2``.
    """

    def A(self, t):
        c, s = np.cos(t), np.sin(t)
        return 0.5 * np.array([[-3 + 3 * c * c, 2 - 3 * c * s], [-2 - 3 * c * s, -3 + 3 * s * s]])

    def field(self, t, x):
        return self.A(t) @ x

    def transition(self, t, t0):
        """Closed-form ``Phi(t, t0)``."""
        rot = lambda a: np.array([[np.cos(a), np.sin(a)], [-np.sin(a), np.cos(a)]])  # noqa: E731
        return rot(t) @ np.diag([1.0, np.exp(-1.5 * (t - t0))]) @ rot(t0).T

    def stable_direction(self, t0):
        """Initial state at ``t0`` spanning the subspace that decays to zero."""
        return np.array([np.sin(t0), np.cos(t0)])

    def trace(self, t):
        return float(np.trace(self.A(t)))


def ltv_rotation_example():
    return LTVRotationExample()
