"""Interference models for power-controlled networks.

The central abstraction is a map from a vector of transmit powers to the
effective interference power seen by each user.  "Standard" maps are
positive, strictly sub-scalable and monotone; those three properties are
what every solver in this package relies on, so a randomized falsification
check is provided alongside the concrete model families (affine coupling,
optimal linear reception, worst-case over an uncertainty set, and the
noise-free large-power limit).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, IterationBudgetError

# Tolerance on strict inequalities checked in floating point.
STRICTNESS_SLACK = 1e-12

# Geometric probe schedule for large-power limits.  The limit estimates are
# monotone decreasing in the scale factor, so probing by decades with a
# relative stopping rule is safe.
DEFAULT_PROBE_SCALES = tuple(10.0 ** k for k in range(13))


def as_power_vector(values, k_users: int | None = None) -> np.ndarray:
    """Validate and convert a power vector to a float64 array."""
    p = np.asarray(values, dtype=np.float64)
    if p.ndim != 1:
        raise InputError(f"power vector must be one-dimensional, got shape {p.shape}")
    if k_users is not None and p.shape[0] != k_users:
        raise InputError(f"power vector has length {p.shape[0]}, expected {k_users}")
    if not np.all(np.isfinite(p)):
        raise InputError("power vector contains non-finite entries")
    if np.any(p < 0.0):
        raise InputError("power vector contains negative entries")
    return p


@dataclass
class SirTargets:
    """Per-user SIR targets together with the protection margin (> 1)."""

    gamma: np.ndarray
    delta: float

    def __post_init__(self):
        self.gamma = np.asarray(self.gamma, dtype=np.float64)
        self.delta = float(self.delta)
        if self.gamma.ndim != 1 or self.gamma.size == 0:
            raise InputError("gamma must be a non-empty one-dimensional sequence")
        if not np.all(np.isfinite(self.gamma)) or np.any(self.gamma <= 0.0):
            raise InputError("every SIR target must be finite and strictly positive")
        if not np.isfinite(self.delta) or self.delta <= 1.0:
            raise InputError(f"protection margin must exceed 1, got {self.delta}")

    @property
    def k_users(self) -> int:
        return self.gamma.shape[0]

    def scaled(self, factor: float) -> "SirTargets":
        return SirTargets(self.gamma * float(factor), self.delta)

    def protected(self) -> "SirTargets":
        """Targets inflated by the protection margin."""
        return self.scaled(self.delta)


def _gamma_of(targets) -> np.ndarray:
    """Accept either SirTargets or a plain weight vector."""
    if isinstance(targets, SirTargets):
        return targets.gamma
    g = np.asarray(targets, dtype=np.float64)
    if g.ndim != 1 or np.any(g <= 0.0) or not np.all(np.isfinite(g)):
        raise InputError("target weights must be a vector of positive finite reals")
    return g


class InterferenceModel:
    """Base class: maps p >= 0 to a strictly positive interference vector."""

    k_users: int

    def evaluate(self, p) -> np.ndarray:
        p = as_power_vector(p, self.k_users)
        return self._evaluate(p)

    def _evaluate(self, p: np.ndarray) -> np.ndarray:
        raise NotImplementedError


def sir(model: InterferenceModel, p) -> np.ndarray:
    """Per-user signal-to-interference ratio p_k / I_k(p)."""
    p = as_power_vector(p, model.k_users)
    return p / model.evaluate(p)


def evaluate_weighted(model: InterferenceModel, targets, p) -> np.ndarray:
    """Target-weighted interference: user k meets its target iff p_k >= value_k."""
    return _gamma_of(targets) * model.evaluate(p)


@dataclass
class AffineModel(InterferenceModel):
    """Linear coupling through a gain matrix plus a positive noise floor."""

    gain_matrix: np.ndarray
    noise: np.ndarray

    def __post_init__(self):
        self.gain_matrix = np.asarray(self.gain_matrix, dtype=np.float64)
        self.noise = np.asarray(self.noise, dtype=np.float64)
        v, z = self.gain_matrix, self.noise
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise InputError(f"gain matrix must be square, got shape {v.shape}")
        if z.ndim != 1 or z.shape[0] != v.shape[0]:
            raise InputError("noise vector length must match the gain matrix")
        if not np.all(np.isfinite(v)) or np.any(v < 0.0):
            raise InputError("gains must be finite and nonnegative")
        if np.any(np.diag(v) != 0.0):
            raise InputError("gain matrix must have a zero diagonal")
        if not np.all(np.isfinite(z)) or np.any(z <= 0.0):
            raise InputError("noise must be finite and strictly positive")
        self.k_users = v.shape[0]

    def _evaluate(self, p):
        return self.gain_matrix @ p + self.noise


@dataclass
class MinStrategyModel(InterferenceModel):
    """Interference under the per-user receive strategy that maximizes SIR.

    ``channels[k, l]`` is the effective (post transmit-vector) channel of
    transmitter l at receiver k.  The best unit-norm receive direction is the
    whitened matched filter, so the minimum interference has the closed form
    1 / (g_kk^H R_k(p)^{-1} g_kk) with R_k the interference-plus-noise
    covariance.  An explicit ``strategy_grid`` replaces the closed form with a
    brute-force minimum over the given unit vectors (exact oracle for tests).
    """

    channels: np.ndarray
    noise_power: float
    strategy_grid: np.ndarray | None = None

    def __post_init__(self):
        self.channels = np.asarray(self.channels, dtype=np.complex128)
        self.noise_power = float(self.noise_power)
        ch = self.channels
        if ch.ndim != 3 or ch.shape[0] != ch.shape[1]:
            raise InputError(f"channels must have shape (K, K, n), got {ch.shape}")
        if not np.isfinite(self.noise_power) or self.noise_power <= 0.0:
            raise InputError("noise power must be finite and strictly positive")
        if self.strategy_grid is not None:
            self.strategy_grid = np.asarray(self.strategy_grid, dtype=np.complex128)
            if self.strategy_grid.ndim != 2 or self.strategy_grid.shape[1] != ch.shape[2]:
                raise InputError("strategy grid must have shape (m, n)")
        self.k_users = ch.shape[0]
        # g_kl g_kl^H outer products, reused at every evaluation.
        self._outer = ch[:, :, :, None] * ch[:, :, None, :].conj()
        self._eye = np.eye(ch.shape[2], dtype=np.complex128)

    def rho(self, k: int, p, u) -> float:
        """Interference at receiver k under a specific receive vector u."""
        p = as_power_vector(p, self.k_users)
        u = np.asarray(u, dtype=np.complex128)
        amp = np.abs(self.channels[k] @ u.conj()) ** 2  # |u^H g_kl|^2 per transmitter
        weights = p.copy()
        weights[k] = 0.0
        num = float(weights @ amp) + self.noise_power * float(np.vdot(u, u).real)
        den = float(np.abs(np.vdot(u, self.channels[k, k])) ** 2)
        if den <= 0.0:
            return np.inf
        return num / den

    def _evaluate(self, p):
        if self.strategy_grid is not None:
            return self._evaluate_grid(p)
        k = self.k_users
        weights = np.tile(p, (k, 1))
        np.fill_diagonal(weights, 0.0)
        cov = np.einsum("kl,klij->kij", weights, self._outer)
        cov += self.noise_power * self._eye
        direct = self.channels[np.arange(k), np.arange(k)]
        sol = np.linalg.solve(cov, direct[:, :, None])[:, :, 0]
        quad = np.einsum("ki,ki->k", direct.conj(), sol).real
        return 1.0 / quad

    def _evaluate_grid(self, p):
        out = np.empty(self.k_users)
        for k in range(self.k_users):
            amp = np.abs(self.strategy_grid.conj() @ self.channels[k].T) ** 2  # (m, K)
            weights = p.copy()
            weights[k] = 0.0
            norms = np.sum(np.abs(self.strategy_grid) ** 2, axis=1)
            num = amp @ weights + self.noise_power * norms
            den = amp[:, k]
            ok = den > 0.0
            if not np.any(ok):
                raise InputError(f"strategy grid never captures the direct channel of user {k}")
            out[k] = np.min(num[ok] / den[ok])
        return out


@dataclass
class WorstCaseModel(InterferenceModel):
    """Component-wise maximum over a finite uncertainty set of models."""

    members: tuple

    def __post_init__(self):
        self.members = tuple(self.members)
        if not self.members:
            raise InputError("worst-case model needs at least one member")
        sizes = {m.k_users for m in self.members}
        if len(sizes) != 1:
            raise InputError(f"member models disagree on the user count: {sorted(sizes)}")
        self.k_users = self.members[0].k_users

    def _evaluate(self, p):
        return np.maximum.reduce([m.evaluate(p) for m in self.members])


@dataclass
class CallableModel(InterferenceModel):
    """Wrap an arbitrary map for composition and for checker test subjects."""

    k_users: int
    fn: object

    def _evaluate(self, p):
        return np.asarray(self.fn(p), dtype=np.float64)


@dataclass
class WeightedModel(InterferenceModel):
    """Target-weighted view of a base model: p -> gamma * I(p)."""

    base: InterferenceModel
    targets: object

    def __post_init__(self):
        self._gamma = _gamma_of(self.targets)
        if self._gamma.shape[0] != self.base.k_users:
            raise InputError("target weights must match the base model size")
        self.k_users = self.base.k_users

    def _evaluate(self, p):
        return self._gamma * self.base.evaluate(p)


@dataclass
class AxiomReport:
    """Outcome of the randomized falsification of the three model axioms."""

    positivity: bool
    scalability: bool
    monotonicity: bool
    counterexample: dict | None = None

    @property
    def all_pass(self) -> bool:
        return self.positivity and self.scalability and self.monotonicity


def check_axioms(
    model: InterferenceModel,
    trials: int = 64,
    scale_grid=(1.0 + 1e-6, 1.5, 10.0),
    seed: int = 0,
) -> AxiomReport:
    """Randomized search for violations of positivity, strict scalability,
    or monotonicity.

    Power samples are log-uniform over [1e-3, 1e3]; the zero vector and the
    coordinate axes are always probed since strictness most often fails at
    the boundary.  A failing model yields a report, not an exception.
    """
    if trials < 1:
        raise InputError("trials must be at least 1")
    rng = np.random.default_rng(seed)
    kk = model.k_users
    probes = [np.zeros(kk)]
    for j in range(min(kk, 4)):
        axis = np.zeros(kk)
        axis[j] = 1.0
        probes.append(axis)
    probes.extend(10.0 ** rng.uniform(-3.0, 3.0, size=(trials, kk)))

    positivity = scalability = monotonicity = True
    counterexample = None

    def note(axiom, **details):
        nonlocal counterexample
        if counterexample is None:
            counterexample = {"axiom": axiom, **details}

    for p in probes:
        base = model.evaluate(p)
        if positivity and not np.all(base > 0.0):
            positivity = False
            note("positivity", p=p.copy(), value=base.copy())
        if scalability:
            for mu in scale_grid:
                slack = mu * base - model.evaluate(mu * p)
                if np.min(slack) <= STRICTNESS_SLACK:
                    scalability = False
                    note("scalability", p=p.copy(), mu=float(mu), slack=float(np.min(slack)))
                    break
        if monotonicity:
            smaller = p * rng.uniform(0.3, 1.0, size=kk)
            drop = base - model.evaluate(smaller)
            if np.min(drop) < -STRICTNESS_SLACK:
                monotonicity = False
                note("monotonicity", p=p.copy(), p_smaller=smaller, drop=float(np.min(drop)))
        if not (positivity or scalability or monotonicity):
            break
    return AxiomReport(positivity, scalability, monotonicity, counterexample)


@dataclass
class AsymptoticModel:
    """A base model together with the probe schedule for its large-power limit."""

    base: InterferenceModel
    scales: tuple = field(default=DEFAULT_PROBE_SCALES)

    def __post_init__(self):
        self.scales = tuple(float(c) for c in self.scales)
        if len(self.scales) < 2 or any(c <= 0 for c in self.scales):
            raise InputError("probe schedule needs at least two positive scales")
        if any(b <= a for a, b in zip(self.scales, self.scales[1:])):
            raise InputError("probe schedule must be strictly increasing")


def asymptotic_limit(amodel: AsymptoticModel, p, tol: float = 1e-8) -> np.ndarray:
    """Noise-free limit of the scaled interference, I(c p) / c for large c.

    The estimates are monotone non-increasing in c for a scalable base model,
    which doubles as a sanity check on the inputs.  Stops when successive
    estimates agree to ``tol`` (relative, with an equal absolute floor for
    components whose limit is zero).
    """
    if tol <= 0.0:
        raise InputError("tol must be positive")
    p = as_power_vector(p, amodel.base.k_users)
    prev = None
    est = None
    for c in amodel.scales:
        est = amodel.base.evaluate(c * p) / c
        if prev is not None:
            if np.any(est > prev * (1.0 + 1e-9) + 1e-300):
                raise InputError(
                    "scaled estimates increased along the probe schedule; "
                    "the base model is not scalable"
                )
            if np.max(np.abs(prev - est)) <= tol * (np.max(np.abs(est)) + 1.0):
                return est
        prev = est
    raise IterationBudgetError(
        "large-power limit did not settle within the probe schedule",
        last_iterate=est,
    )


@dataclass
class RestrictedAsymptoticModel(InterferenceModel):
    """Large-power limit as a function of the active users' powers only.

    Inactive powers are pinned to a fixed positive vector; provided every
    active user is coupled to at least one pinned user, the restriction is
    itself a standard interference model and plugs into any fixed-point
    solver in this package.
    """

    amodel: AsymptoticModel
    active: tuple
    inactive_powers: np.ndarray
    tol: float = 1e-8

    def __post_init__(self):
        total = self.amodel.base.k_users
        self.active = tuple(sorted(int(i) for i in self.active))
        if any(i < 0 or i >= total for i in self.active):
            raise InputError("active indices out of range")
        if len(set(self.active)) != len(self.active):
            raise InputError("active indices must be distinct")
        self._inactive = tuple(i for i in range(total) if i not in set(self.active))
        lam = np.asarray(self.inactive_powers, dtype=np.float64)
        if lam.shape != (len(self._inactive),):
            raise InputError(
                f"expected {len(self._inactive)} pinned powers, got shape {lam.shape}"
            )
        if np.any(lam <= 0.0) or not np.all(np.isfinite(lam)):
            raise InputError("pinned inactive powers must be finite and strictly positive")
        self.inactive_powers = lam
        self.k_users = len(self.active)

    def _evaluate(self, p):
        full = np.empty(self.amodel.base.k_users)
        full[list(self.active)] = p
        full[list(self._inactive)] = self.inactive_powers
        est = asymptotic_limit(self.amodel, full, self.tol)
        return est[list(self.active)]


def restrict_active(
    amodel: AsymptoticModel,
    active,
    inactive_powers,
    tol: float = 1e-8,
) -> RestrictedAsymptoticModel:
    """Pin the inactive users' powers and view the limit map over the rest."""
    return RestrictedAsymptoticModel(amodel, tuple(active), inactive_powers, tol)
