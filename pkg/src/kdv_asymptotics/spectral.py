"""Small shared FFT helpers: derivatives, dealiasing, trigonometric interpolation."""

from __future__ import annotations

import numpy as np

from .core import Grid1D


def spectral_derivative(values: np.ndarray, grid: Grid1D, order: int) -> np.ndarray:
    """d^order/dx^order of a real periodic sample via Fourier multipliers.

    The unpaired Nyquist mode is zeroed for odd orders.
    """
    kappa = grid.wavenumbers_rfft()
    mult = (1j * kappa) ** order
    if order % 2 == 1:
        mult = mult.copy()
        mult[-1] = 0.0
    return np.fft.irfft(mult * np.fft.rfft(values), n=grid.n)


def dealias_mask(grid: Grid1D) -> np.ndarray:
    """2/3-rule mask in rfft layout: keep |kappa| <= (2/3) kappa_max."""
    kappa = grid.wavenumbers_rfft()
    return (kappa <= (2.0 / 3.0) * kappa[-1]).astype(float)


def trig_interpolate(
    values: np.ndarray,
    grid: Grid1D,
    targets: np.ndarray,
    outside: str = "zero",
) -> np.ndarray:
    """Band-limited evaluation of a periodic sample at arbitrary points.

    Points outside [-L, L] evaluate to 0 when outside="zero" (the caller is
    responsible for checking that the data is decayed there) or wrap
    periodically when outside="wrap".
    """
    targets = np.asarray(targets, dtype=float)
    flat = np.atleast_1d(targets).ravel()
    out = np.zeros(flat.shape)
    if outside == "zero":
        inside = np.abs(flat) <= grid.half_length
    else:
        inside = np.ones(flat.shape, dtype=bool)
    pts = flat[inside]
    if pts.size:
        coeffs = np.fft.fft(values)
        kappa = grid.wavenumbers_fft()
        # chunked matrix evaluation keeps memory at ~8 MB regardless of sizes
        chunk = max(1, int(1_000_000 / max(len(kappa), 1)))
        vals = np.empty(pts.shape)
        shift = pts + grid.half_length  # node 0 sits at -L
        for lo in range(0, len(pts), chunk):
            block = shift[lo : lo + chunk, None] * kappa[None, :]
            vals[lo : lo + chunk] = (np.exp(1j * block) @ coeffs).real / grid.n
        out[inside] = vals
    return out.reshape(targets.shape) if targets.ndim else float(out[0])
