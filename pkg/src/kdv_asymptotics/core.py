"""Domain types for the coupled two-string system.

The model is a pair of wave equations for transverse displacements u and v,
rigidly coupled through the stiff term (-a*u + b*v)/eps^3 and weakly coupled
through a polynomial nonlinearity that enters at relative order eps^2:

    eps^3 (u_tt - k1 u_xx) = -a u + b v + eps^2 f(u, v)
    eps^3 (v_tt - k2 v_xx) =  a u - b v - eps^2 f(u, v)

k1 and k2 are the squared wave speeds of the two strings.  The degenerate
(eps = 0) coupling is rank one, so leading-order dynamics live on the
equilibrium manifold a*u = b*v; everything downstream of this module is an
expansion around that manifold.

The infinite line is truncated to a periodic box [-L, L).  Initial profiles
must decay below 1e-12 of their amplitude at the boundary, which keeps the
truncation error at the noise floor of the spectral discretization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DecayViolation, ValidationError

#: A profile counts as decayed when it is below this fraction of its amplitude.
DECAY_TOLERANCE = 1e-12


@dataclass(frozen=True)
class PhysParams:
    """Physical constants of the coupled system.

    k1, k2 are squared wave speeds (length^2/time^2); a, b are the coupling
    coefficients (1/time^2).  All four must be positive.
    """

    k1: float
    k2: float
    a: float
    b: float

    def __post_init__(self):
        for name in ("k1", "k2", "a", "b"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value)):
                raise ValidationError("must be a finite number", field=name)
            if value <= 0:
                raise ValidationError("must be positive", field=name)


@dataclass(frozen=True)
class Epsilon:
    """The small parameter, 0 < eps <= 1."""

    eps: float

    def __post_init__(self):
        if not (isinstance(self.eps, (int, float)) and math.isfinite(self.eps)):
            raise ValidationError("must be a finite number", field="eps")
        if not 0 < self.eps <= 1:
            raise ValidationError("must satisfy 0 < eps <= 1", field="eps")

    @property
    def relaxation_frequency_factor(self) -> float:
        """1/eps^(3/2), the stiff frequency is sqrt(a+b) times this."""
        return self.eps ** -1.5


@dataclass(frozen=True)
class NonlinearitySpec:
    """Bivariate polynomial f(u, v) = sum coeff * u^i * v^j.

    `terms` is a tuple of (i, j, coeff); each exponent pair may appear once.
    """

    terms: tuple[tuple[int, int, float], ...] = ()

    def __post_init__(self):
        seen = set()
        norm = []
        for term in self.terms:
            if len(term) != 3:
                raise ValidationError("each term must be (i, j, coeff)", field="terms")
            i, j, coeff = term
            if int(i) != i or int(j) != j or i < 0 or j < 0:
                raise ValidationError(
                    "exponents must be non-negative integers", field="terms"
                )
            if not math.isfinite(coeff):
                raise ValidationError("coefficient must be finite", field="terms")
            if (int(i), int(j)) in seen:
                raise ValidationError(
                    f"exponent pair ({int(i)}, {int(j)}) appears twice", field="terms"
                )
            seen.add((int(i), int(j)))
            norm.append((int(i), int(j), float(coeff)))
        object.__setattr__(self, "terms", tuple(norm))

    def __call__(self, u, v):
        return evaluate_nonlinearity(self, u, v)

    @property
    def is_zero(self) -> bool:
        return all(coeff == 0 for _, _, coeff in self.terms)


def evaluate_nonlinearity(f: NonlinearitySpec, u, v):
    """Evaluate f(u, v) = sum coeff * u^i * v^j on scalars or arrays."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    out = np.zeros(np.broadcast(u, v).shape)
    for i, j, coeff in f.terms:
        out += coeff * u**i * v**j
    return out if out.ndim else float(out)


def equilibrium_projection(params: PhysParams, u):
    """Slow-manifold companion of u: the v with a*u - b*v = 0, i.e. (a/b)*u."""
    return (params.a / params.b) * u


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid on [-half_length, half_length).

    n must be a power of two (radix-2 FFTs); node i sits at -L + i*dx with
    dx = 2L/n, and index n wraps to 0.
    """

    half_length: float
    n: int

    def __post_init__(self):
        if not (math.isfinite(self.half_length) and self.half_length > 0):
            raise ValidationError("must be positive and finite", field="half_length")
        if self.n < 8 or (self.n & (self.n - 1)) != 0:
            raise ValidationError("must be a power of two >= 8", field="n")

    @property
    def dx(self) -> float:
        return 2.0 * self.half_length / self.n

    @property
    def nodes(self) -> np.ndarray:
        return -self.half_length + self.dx * np.arange(self.n)

    def wavenumbers_rfft(self) -> np.ndarray:
        """Angular wavenumbers matching np.fft.rfft layout."""
        return 2.0 * np.pi * np.fft.rfftfreq(self.n, d=self.dx)

    def wavenumbers_fft(self) -> np.ndarray:
        """Signed angular wavenumbers matching np.fft.fft layout."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)


class ProfileKind(Enum):
    GAUSSIAN = "gaussian"
    SMOOTHED_STEP = "smoothed_step"


@dataclass(frozen=True)
class Profile:
    """A parametrized initial profile.

    gaussian:       amplitude * exp(-((x - center)/width)^2)
    smoothed_step:  amplitude/2 * (1 + tanh((x - center)/width)), optionally
                    multiplied by a Gaussian window exp(-((x - center)/window_width)^2).

    The bare smoothed step does not decay and is rejected by the boundary
    decay check; give it a window to use it as localized "surge" data.
    """

    kind: ProfileKind = ProfileKind.GAUSSIAN
    amplitude: float = 1.0
    width: float = 1.0
    center: float = 0.0
    window_width: float | None = None

    def __post_init__(self):
        if not math.isfinite(self.amplitude):
            raise ValidationError("must be finite", field="amplitude")
        if not (math.isfinite(self.width) and self.width > 0):
            raise ValidationError("must be positive", field="width")
        if not math.isfinite(self.center):
            raise ValidationError("must be finite", field="center")
        if self.window_width is not None and not (
            math.isfinite(self.window_width) and self.window_width > 0
        ):
            raise ValidationError("must be positive when given", field="window_width")

    @classmethod
    def zero(cls) -> "Profile":
        return cls(kind=ProfileKind.GAUSSIAN, amplitude=0.0, width=1.0)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        arg = x - self.center
        if self.kind is ProfileKind.GAUSSIAN:
            out = self.amplitude * np.exp(-((arg / self.width) ** 2))
        else:
            out = 0.5 * self.amplitude * (1.0 + np.tanh(arg / self.width))
        if self.window_width is not None:
            out = out * np.exp(-((arg / self.window_width) ** 2))
        return out if out.ndim else float(out)


class InitialConditionKind(Enum):
    SMOOTH = "smooth"
    BURST = "burst"


@dataclass(frozen=True)
class InitialConditionSpec:
    """Initial displacement u0 and velocity phi, sampled at x (smooth) or x/eps (burst)."""

    kind: InitialConditionKind
    profile_u0: Profile
    profile_phi: Profile = field(default_factory=Profile.zero)


@dataclass
class FieldPair:
    """Sampled (u, v) and their time derivatives (p, q) at one instant."""

    u: np.ndarray
    v: np.ndarray
    p: np.ndarray
    q: np.ndarray
    time: float

    def __post_init__(self):
        n = len(self.u)
        for name in ("u", "v", "p", "q"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.ndim != 1 or len(arr) != n:
                raise ValidationError("all four arrays must share one length", field=name)
            setattr(self, name, arr)

    def copy(self) -> "FieldPair":
        return FieldPair(
            self.u.copy(), self.v.copy(), self.p.copy(), self.q.copy(), self.time
        )

    def manifold_defect(self, params: PhysParams) -> np.ndarray:
        """Pointwise distance to the equilibrium manifold, a*u - b*v."""
        return params.a * self.u - params.b * self.v


def check_profile_decay(profile: Profile, edge_abs: float, what: str = "profile") -> None:
    """Require |profile(+-edge)| < DECAY_TOLERANCE * |amplitude|.

    Zero-amplitude profiles pass trivially.
    """
    if profile.amplitude == 0:
        return
    bound = DECAY_TOLERANCE * abs(profile.amplitude)
    for edge in (-edge_abs, edge_abs):
        if abs(profile(edge)) >= bound:
            raise DecayViolation(
                f"{what} does not decay at x = {edge:+g}: "
                f"|{profile(edge):.3e}| >= {bound:.3e}"
            )


def sample_initial(
    spec: InitialConditionSpec,
    grid: Grid1D,
    eps: Epsilon,
    params: PhysParams,
) -> FieldPair:
    """Sample the initial condition on the grid.

    Smooth data evaluates the profiles at x, burst data at x/eps, so a burst
    has O(1) amplitude and O(eps) spatial extent.  Initial data always lies on
    the equilibrium manifold: v = (a/b) u and q = (a/b) p.
    """
    scale = 1.0 if spec.kind is InitialConditionKind.SMOOTH else eps.eps
    edge = grid.half_length / scale
    check_profile_decay(spec.profile_u0, edge, what="u0 profile")
    check_profile_decay(spec.profile_phi, edge, what="phi profile")

    arg = grid.nodes / scale
    u = np.asarray(spec.profile_u0(arg), dtype=float)
    p = np.asarray(spec.profile_phi(arg), dtype=float)
    ratio = params.a / params.b
    return FieldPair(u=u, v=ratio * u, p=p, q=ratio * p, time=0.0)
