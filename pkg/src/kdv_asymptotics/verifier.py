"""Quantitative cross-validation of the asymptotics against the full solver.

The paper proves asymptotic statements but reports no numbers, so acceptance
here is property-based: errors between the full solution and the leading-order
construction must shrink monotonically along an eps sweep, the remainder must
vanish identically at t = 0, composite bursts must ride the
pseudo-characteristics at +-c, and the PDE residual of the asymptotic fields
must decrease with eps.  Both Linf and L2 norms are reported since the paper
states its remainder bound without naming a norm.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
import multiprocessing

import numpy as np

from .composer import BurstAsymptotics, build_burst_asymptotics, compose
from .core import (
    Epsilon,
    FieldPair,
    Grid1D,
    InitialConditionKind,
    InitialConditionSpec,
    NonlinearitySpec,
    PhysParams,
    Profile,
    ProfileKind,
)
from .effective import EffectiveParams
from .errors import GridMismatch, InsufficientSnapshots, ValidationError
from .full_solver import SolverConfig, simulate_full
from .regular import RegularExpansion
from .spectral import spectral_derivative

#: Solver floor: stiff periods below eps = 0.05 make desk-scale runs impractical.
MIN_EPS = 0.05


class SweepMode(Enum):
    SMOOTH_REGULAR = "smooth-regular"
    BURST_KDV = "burst-kdv"


@dataclass(frozen=True)
class ErrorNorms:
    l2_u: float
    linf_u: float
    l2_v: float
    linf_v: float


def error_norms(full: FieldPair, approx: FieldPair, grid: Grid1D) -> ErrorNorms:
    """dx-weighted L2 and Linf norms of (full - approx) for u and v."""
    if len(full.u) != len(approx.u) or len(full.u) != grid.n:
        raise GridMismatch("fields and grid must share one length")
    if abs(full.time - approx.time) > 1e-9 * max(1.0, abs(full.time)):
        raise GridMismatch(
            f"time stamps differ: {full.time:g} vs {approx.time:g}"
        )
    du = full.u - approx.u
    dv = full.v - approx.v
    return ErrorNorms(
        l2_u=float(math.sqrt((du**2).sum() * grid.dx)),
        linf_u=float(np.abs(du).max()),
        l2_v=float(math.sqrt((dv**2).sum() * grid.dx)),
        linf_v=float(np.abs(dv).max()),
    )


def pde_residual(
    snapshots: list[FieldPair],
    grid: Grid1D,
    params: PhysParams,
    f: NonlinearitySpec,
    eps: Epsilon,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-node defect of both equations at the middle snapshot.

    Time second derivatives are centered differences over three consecutive
    snapshots (spacing may be non-uniform); x derivatives are spectral.
    """
    if len(snapshots) < 3:
        raise InsufficientSnapshots("need at least 3 snapshots for u_tt")
    mid = len(snapshots) // 2
    prev, cur, nxt = snapshots[mid - 1], snapshots[mid], snapshots[mid + 1]
    h1 = cur.time - prev.time
    h2 = nxt.time - cur.time
    if h1 <= 0 or h2 <= 0:
        raise ValidationError("snapshots must be strictly increasing in time",
                              field="snapshots")

    def second_dt(y0, y1, y2):
        return 2.0 * ((y2 - y1) / h2 - (y1 - y0) / h1) / (h1 + h2)

    e3 = eps.eps**3
    e2 = eps.eps**2
    fval = f(cur.u, cur.v)
    u_tt = second_dt(prev.u, cur.u, nxt.u)
    v_tt = second_dt(prev.v, cur.v, nxt.v)
    u_xx = spectral_derivative(cur.u, grid, 2)
    v_xx = spectral_derivative(cur.v, grid, 2)
    res_u = e3 * (u_tt - params.k1 * u_xx) + params.a * cur.u - params.b * cur.v - e2 * fval
    res_v = e3 * (v_tt - params.k2 * v_xx) - params.a * cur.u + params.b * cur.v + e2 * fval
    return res_u, res_v


@dataclass(frozen=True)
class SweepProblem:
    """Everything eps-independent about one benchmark."""

    params: PhysParams
    f: NonlinearitySpec
    initial: InitialConditionSpec
    x_grid: Grid1D
    t_end: float
    zeta_grid: Grid1D | None = None
    cfl: float = 0.5
    substeps_per_oscillation: int = 16
    dt: float | None = None
    kdv_dt: float | None = None


def smooth_benchmark(t_end: float = 1.0) -> SweepProblem:
    """Canonical smooth problem: k1=1, k2=4, a=b=1, f=u^2, unit Gaussian."""
    return SweepProblem(
        params=PhysParams(k1=1.0, k2=4.0, a=1.0, b=1.0),
        f=NonlinearitySpec(terms=((2, 0, 1.0),)),
        initial=InitialConditionSpec(
            kind=InitialConditionKind.SMOOTH,
            profile_u0=Profile(ProfileKind.GAUSSIAN, amplitude=1.0, width=1.0),
        ),
        x_grid=Grid1D(half_length=30.0, n=1024),
        t_end=t_end,
    )


def burst_benchmark(t_end: float = 2.5) -> SweepProblem:
    """Canonical burst problem; the later t_end buys hump separation."""
    return SweepProblem(
        params=PhysParams(k1=1.0, k2=4.0, a=1.0, b=1.0),
        f=NonlinearitySpec(terms=((2, 0, 1.0),)),
        initial=InitialConditionSpec(
            kind=InitialConditionKind.BURST,
            profile_u0=Profile(ProfileKind.GAUSSIAN, amplitude=0.4, width=2.0),
        ),
        x_grid=Grid1D(half_length=16.0, n=2048),
        zeta_grid=Grid1D(half_length=60.0, n=1024),
        t_end=t_end,
    )


@dataclass(frozen=True)
class SweepRow:
    eps: float
    err_l2_u: float
    err_linf_u: float
    err_l2_v: float
    err_linf_v: float
    pde_residual_linf: float
    seconds: float


@dataclass
class ErrorReport:
    mode: SweepMode
    rows: list[SweepRow] = field(default_factory=list)

    @property
    def fitted_order(self) -> float:
        """Least-squares slope of log(err_linf_u) against log(eps); NaN below 2 rows."""
        pts = [(r.eps, r.err_linf_u) for r in self.rows if r.err_linf_u > 0]
        if len(pts) < 2:
            return float("nan")
        eps_vals, errs = zip(*pts)
        return float(np.polyfit(np.log(eps_vals), np.log(errs), 1)[0])

    def errors_decreasing(self) -> bool:
        errs = [r.err_linf_u for r in self.rows]
        return all(e1 > e2 for e1, e2 in zip(errs, errs[1:]))


def _regular_snapshot(problem: SweepProblem, expansion: RegularExpansion,
                      t: float) -> FieldPair:
    x = problem.x_grid.nodes
    u = np.asarray(expansion.u0_bar(x, t), dtype=float)
    v = np.asarray(expansion.v0_bar(x, t), dtype=float)
    zero = np.zeros_like(u)
    return FieldPair(u, v, zero, zero, t)


def _burst_snapshot(problem: SweepProblem, asym: BurstAsymptotics,
                    t: float) -> FieldPair:
    u, v = compose(asym, problem.params, problem.x_grid.nodes, t)
    zero = np.zeros_like(u)
    return FieldPair(u, v, zero, zero, t)


def _sweep_row(problem: SweepProblem, eps_value: float, mode: SweepMode) -> SweepRow:
    started = time.perf_counter()
    eps = Epsilon(eps_value)
    t_end = problem.t_end
    delta = 1e-3 * eps.eps  # residual probe spacing resolves the frame motion

    config = SolverConfig(
        t_end=t_end,
        dt=problem.dt,
        cfl=problem.cfl,
        substeps_per_oscillation=problem.substeps_per_oscillation,
    )
    full = simulate_full(
        problem.initial, problem.x_grid, problem.params, problem.f, eps, config
    )[-1]

    probe_times = [t_end - delta, t_end, t_end + delta]
    if mode is SweepMode.SMOOTH_REGULAR:
        eff = EffectiveParams.from_params(problem.params)
        expansion = RegularExpansion(problem.initial, problem.params, problem.f, eff.c)
        approx_snaps = [_regular_snapshot(problem, expansion, t) for t in probe_times]
    else:
        if problem.zeta_grid is None:
            raise ValidationError("burst sweeps need a zeta grid", field="zeta_grid")
        asym = build_burst_asymptotics(
            problem.initial, problem.params, problem.f, eps, problem.zeta_grid,
            t_end=t_end + delta, output_times=probe_times, dt=problem.kdv_dt,
        )
        approx_snaps = [_burst_snapshot(problem, asym, t) for t in probe_times]

    norms = error_norms(full, approx_snaps[1], problem.x_grid)
    res_u, res_v = pde_residual(
        approx_snaps, problem.x_grid, problem.params, problem.f, eps
    )
    return SweepRow(
        eps=eps.eps,
        err_l2_u=norms.l2_u,
        err_linf_u=norms.linf_u,
        err_l2_v=norms.l2_v,
        err_linf_v=norms.linf_v,
        pde_residual_linf=float(max(np.abs(res_u).max(), np.abs(res_v).max())),
        seconds=time.perf_counter() - started,
    )


def _worker_cap(n_rows: int) -> int:
    raw = os.environ.get("KDV_ASYMPTOTICS_THREADS")
    if raw is not None:
        try:
            cap = int(raw)
        except ValueError:
            raise ValidationError(
                f"not an integer: {raw!r}", field="KDV_ASYMPTOTICS_THREADS"
            ) from None
        if cap < 1:
            raise ValidationError("must be >= 1", field="KDV_ASYMPTOTICS_THREADS")
    else:
        cap = os.cpu_count() or 1
    return max(1, min(cap, n_rows))


def convergence_sweep(
    problem: SweepProblem, eps_list: list[float], mode: SweepMode
) -> ErrorReport:
    """Run the full solver and the mode's asymptotics for every eps.

    Rows are independent and run in parallel processes, capped by the
    KDV_ASYMPTOTICS_THREADS environment variable; results are ordered by
    decreasing eps regardless of scheduling.
    """
    if not eps_list:
        raise ValidationError("must not be empty", field="eps_list")
    if any(e2 >= e1 for e1, e2 in zip(eps_list, eps_list[1:])):
        raise ValidationError("must be strictly decreasing", field="eps_list")
    if eps_list[-1] < MIN_EPS:
        raise ValidationError(
            f"values below {MIN_EPS} are outside the solver's desk-scale range",
            field="eps_list",
        )

    workers = _worker_cap(len(eps_list))
    if workers == 1:
        rows = [_sweep_row(problem, e, mode) for e in eps_list]
    else:
        ctx = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
            rows = list(pool.map(_sweep_row, [problem] * len(eps_list), eps_list,
                                 [mode] * len(eps_list)))
    rows.sort(key=lambda r: -r.eps)
    return ErrorReport(mode=mode, rows=rows)


@dataclass
class RemainderReport:
    times: list[float]
    linf_u: list[float]
    linf_v: list[float]
    initial_linf: float

    @property
    def max_linf(self) -> float:
        return max(max(self.linf_u), max(self.linf_v))


def remainder_check(
    problem: SweepProblem, eps_value: float, n_times: int = 9
) -> RemainderReport:
    """Track R = full - (u0_bar, v0_bar) over time for one smooth run.

    The remainder starts from identical initial data, so its t = 0 norm is
    exactly zero; across an eps sweep max_t ||R|| must decrease.
    """
    if problem.initial.kind is not InitialConditionKind.SMOOTH:
        raise ValidationError("remainder check needs smooth data", field="initial")
    eps = Epsilon(eps_value)
    times = list(np.linspace(0.0, problem.t_end, n_times))
    config = SolverConfig(
        t_end=problem.t_end, dt=problem.dt, cfl=problem.cfl,
        substeps_per_oscillation=problem.substeps_per_oscillation,
    )
    snaps = simulate_full(
        problem.initial, problem.x_grid, problem.params, problem.f, eps, config,
        output_times=times,
    )
    eff = EffectiveParams.from_params(problem.params)
    expansion = RegularExpansion(problem.initial, problem.params, problem.f, eff.c)
    linf_u, linf_v = [], []
    for snap in snaps:
        ref = _regular_snapshot(problem, expansion, snap.time)
        linf_u.append(float(np.abs(snap.u - ref.u).max()))
        linf_v.append(float(np.abs(snap.v - ref.v).max()))
    return RemainderReport(
        times=times, linf_u=linf_u, linf_v=linf_v, initial_linf=max(linf_u[0], linf_v[0])
    )


def dominant_frequency(samples: np.ndarray, dt: float) -> float:
    """Angular frequency of the strongest line in a real signal.

    Hann-windowed periodogram peak with parabolic sub-bin refinement; good to
    a small fraction of a bin for a clean oscillation.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.size < 8:
        raise ValidationError("need at least 8 samples", field="samples")
    detrended = samples - samples.mean()
    spectrum = np.abs(np.fft.rfft(detrended * np.hanning(samples.size)))
    peak = int(np.argmax(spectrum[1:])) + 1
    if 1 <= peak < spectrum.size - 1:
        with np.errstate(divide="ignore"):
            la, lb, lc = np.log(spectrum[peak - 1 : peak + 2])
        denom = la - 2 * lb + lc
        shift = 0.5 * (la - lc) / denom if np.isfinite(denom) and denom != 0 else 0.0
        shift = float(np.clip(shift, -0.5, 0.5))
    else:
        shift = 0.0
    return 2.0 * math.pi * (peak + shift) / (samples.size * dt)


def hump_speeds(
    asym: BurstAsymptotics,
    params: PhysParams,
    x_grid: Grid1D,
    times: list[float],
    threshold: float = 0.02,
) -> tuple[float, float]:
    """Measured propagation speeds of the two composite humps.

    Signed-field centroid over each half-domain, with values below
    threshold*max masked out so dispersive tails do not bias the centroid;
    speeds are the slopes of linear fits over the given (separated) times.
    Returns (right_speed, left_speed); the pseudo-characteristic prediction
    is (+c, -c).
    """
    if len(times) < 2:
        raise ValidationError("need at least two times", field="times")
    x = x_grid.nodes
    right_pos, left_pos = [], []
    for t in times:
        u, _ = compose(asym, params, x, t)
        masked = np.where(np.abs(u) >= threshold * np.abs(u).max(), u, 0.0)
        for side, acc in ((x > 0, right_pos), (x < 0, left_pos)):
            w = np.where(side, masked, 0.0)
            total = w.sum()
            if total == 0:
                raise ValidationError("hump not found in half-domain", field="times")
            acc.append(float((x * w).sum() / total))
    right = float(np.polyfit(times, right_pos, 1)[0])
    left = float(np.polyfit(times, left_pos, 1)[0])
    return right, left
