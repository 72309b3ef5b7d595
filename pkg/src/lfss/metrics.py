"""Quality and rate measurement: PSNR, SSIM, bpp, RD curves, BD deltas.

PSNR defaults to the luma plane and is capped at 100 dB so identical
images keep aggregates finite.  SSIM is the standard single-scale index
on luma with an 11x11 Gaussian window (sigma 1.5), averaged over valid
window positions.  Bjontegaard deltas use the classic cubic fits with the
polynomial integrals evaluated in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .color import luma_plane
from .core import LightField

PSNR_CAP_DB = 100.0
PEAK = 255.0

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def psnr(test: np.ndarray, ref: np.ndarray, domain: str = "y") -> float:
    """Peak signal-to-noise ratio in dB over luma ("y") or pooled RGB."""
    if test.shape != ref.shape:
        raise ValueError(f"image shapes differ: {test.shape} vs {ref.shape}")
    if domain == "y":
        a, b = luma_plane(test), luma_plane(ref)
    elif domain == "rgb":
        a, b = test, ref
    else:
        raise ValueError(f"unknown PSNR domain {domain!r} (use 'y' or 'rgb')")
    diff = a.astype(np.float64) - b.astype(np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(PSNR_CAP_DB, 10.0 * math.log10(PEAK * PEAK / mse))


def _gaussian_kernel_1d() -> np.ndarray:
    half = SSIM_WINDOW // 2
    x = np.arange(-half, half + 1, dtype=np.float64)
    g = np.exp(-(x * x) / (2.0 * SSIM_SIGMA * SSIM_SIGMA))
    return g / g.sum()

_SSIM_KERNEL = _gaussian_kernel_1d()


def _windowed_mean(img: np.ndarray) -> np.ndarray:
    """Gaussian-weighted mean over every valid window position (separable)."""
    from numpy.lib.stride_tricks import sliding_window_view

    rows = sliding_window_view(img, SSIM_WINDOW, axis=0) @ _SSIM_KERNEL
    return sliding_window_view(rows, SSIM_WINDOW, axis=1) @ _SSIM_KERNEL


def ssim(test: np.ndarray, ref: np.ndarray) -> float:
    """Mean structural similarity between the luma planes of two RGB views."""
    if test.shape != ref.shape:
        raise ValueError(f"image shapes differ: {test.shape} vs {ref.shape}")
    h, w = test.shape[:2]
    if h < SSIM_WINDOW or w < SSIM_WINDOW:
        raise ValueError(f"image {w}x{h} smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} window")
    x = luma_plane(test).astype(np.float64)
    y = luma_plane(ref).astype(np.float64)
    c1 = (SSIM_K1 * PEAK) ** 2
    c2 = (SSIM_K2 * PEAK) ** 2
    mu_x = _windowed_mean(x)
    mu_y = _windowed_mean(y)
    var_x = _windowed_mean(x * x) - mu_x * mu_x
    var_y = _windowed_mean(y * y) - mu_y * mu_y
    cov = _windowed_mean(x * y) - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


def bpp(enc_total_bits: int, lf: LightField) -> float:
    """Bits per pixel of the FULL light field, regardless of how many views
    were actually coded (this is what makes sub-sampling reduce bpp)."""
    if enc_total_bits <= 0:
        raise ValueError(f"encoded size must be positive, got {enc_total_bits} bits")
    pixels = lf.grid_rows * lf.grid_cols * lf.view_width * lf.view_height
    return enc_total_bits / pixels


def per_view_stats(per_view: np.ndarray) -> tuple[float, float]:
    """Arithmetic mean and sample (n-1) standard deviation of a metric grid."""
    values = np.asarray(per_view, dtype=np.float64)
    if values.size == 0:
        raise ValueError("empty metric grid")
    mean = float(values.mean())
    std = 0.0 if values.size == 1 else float(values.std(ddof=1))
    return mean, std


@dataclass(frozen=True)
class RdPoint:
    """One rate-distortion measurement of a fully reconstructed light field."""

    qp: int
    bpp: float
    psnr_mean: float
    psnr_std: float
    ssim_mean: float
    psnr_per_view: np.ndarray | None = field(default=None, repr=False)
    ssim_per_view: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.bpp <= 0:
            raise ValueError(f"bpp must be positive, got {self.bpp}")
        for name in ("psnr_per_view", "ssim_per_view"):
            grid = getattr(self, name)
            if grid is not None and grid.ndim != 2:
                raise ValueError(f"{name} must be a 2-D grid")


@dataclass(frozen=True)
class RdCurve:
    """QP sweep of one strategy, sorted by ascending bpp."""

    label: str
    points: tuple[RdPoint, ...]

    def __post_init__(self) -> None:
        if not self.points:
            raise ValueError("curve has no points")
        rates = [p.bpp for p in self.points]
        if any(rates[i] >= rates[i + 1] for i in range(len(rates) - 1)):
            raise ValueError(f"curve {self.label!r} bpp values must strictly increase")

    @property
    def rates(self) -> np.ndarray:
        return np.array([p.bpp for p in self.points], dtype=np.float64)

    @property
    def psnrs(self) -> np.ndarray:
        return np.array([p.psnr_mean for p in self.points], dtype=np.float64)


@dataclass(frozen=True)
class BdResult:
    """Bjontegaard deltas of a test curve against an anchor curve.

    Positive bd_psnr means the test curve is better at equal rate;
    negative bd_rate means the test curve saves rate at equal quality.
    """

    bd_psnr: float
    bd_rate: float
    log_rate_interval: tuple[float, float]
    psnr_interval: tuple[float, float]


def _check_curve_for_bd(curve: RdCurve) -> None:
    if len(curve.points) < 4:
        raise ValueError(
            f"insufficient points on curve {curve.label!r}: "
            f"{len(curve.points)} < 4 required for the cubic fit"
        )
    if len(set(curve.rates.tolist())) != len(curve.points):
        raise ValueError(f"duplicate rates on curve {curve.label!r}")
    if len(set(curve.psnrs.tolist())) != len(curve.points):
        raise ValueError(f"duplicate PSNR values on curve {curve.label!r}")
    if curve.rates.min() <= 0:
        raise ValueError(f"non-positive rate on curve {curve.label!r}")


def _poly_average(coeffs_test, coeffs_anchor, lo: float, hi: float) -> float:
    """Closed-form average of (test - anchor) polynomial over [lo, hi]."""
    diff = np.polysub(coeffs_test, coeffs_anchor)
    integral = np.polyint(diff)
    return float((np.polyval(integral, hi) - np.polyval(integral, lo)) / (hi - lo))


def bd_metrics(test: RdCurve, anchor: RdCurve) -> BdResult:
    """Classic Bjontegaard BD-PSNR (dB) and BD-Rate (%) between two curves."""
    _check_curve_for_bd(test)
    _check_curve_for_bd(anchor)
    lr_test = np.log10(test.rates)
    lr_anchor = np.log10(anchor.rates)

    lr_lo = max(lr_test.min(), lr_anchor.min())
    lr_hi = min(lr_test.max(), lr_anchor.max())
    if lr_hi <= lr_lo:
        raise ValueError("curves do not overlap in rate")
    fit_test = np.polyfit(lr_test, test.psnrs, 3)
    fit_anchor = np.polyfit(lr_anchor, anchor.psnrs, 3)
    bd_psnr = _poly_average(fit_test, fit_anchor, lr_lo, lr_hi)

    ps_lo = max(test.psnrs.min(), anchor.psnrs.min())
    ps_hi = min(test.psnrs.max(), anchor.psnrs.max())
    if ps_hi <= ps_lo:
        raise ValueError("curves do not overlap in PSNR")
    rfit_test = np.polyfit(test.psnrs, lr_test, 3)
    rfit_anchor = np.polyfit(anchor.psnrs, lr_anchor, 3)
    delta = _poly_average(rfit_test, rfit_anchor, ps_lo, ps_hi)
    bd_rate = (10.0 ** delta - 1.0) * 100.0

    return BdResult(bd_psnr, bd_rate, (lr_lo, lr_hi), (ps_lo, ps_hi))


def evaluate(
    reconstructed: LightField,
    original: LightField,
    enc_total_bits: int,
    qp: int,
    psnr_domain: str = "y",
) -> RdPoint:
    """Per-view PSNR and SSIM grids plus aggregates and bpp for one pipeline run."""
    if reconstructed.views.shape != original.views.shape:
        raise ValueError(
            f"light field shapes differ: {reconstructed.views.shape} vs {original.views.shape}"
        )
    rows, cols = original.grid_rows, original.grid_cols
    psnr_grid = np.empty((rows, cols), dtype=np.float64)
    ssim_grid = np.empty((rows, cols), dtype=np.float64)
    for r in range(rows):
        for c in range(cols):
            test, ref = reconstructed.views[r, c], original.views[r, c]
            psnr_grid[r, c] = psnr(test, ref, psnr_domain)
            ssim_grid[r, c] = ssim(test, ref)
    psnr_mean, psnr_std = per_view_stats(psnr_grid)
    ssim_mean, _ = per_view_stats(ssim_grid)
    return RdPoint(
        qp=qp,
        bpp=bpp(enc_total_bits, original),
        psnr_mean=psnr_mean,
        psnr_std=psnr_std,
        ssim_mean=ssim_mean,
        psnr_per_view=psnr_grid,
        ssim_per_view=ssim_grid,
    )
