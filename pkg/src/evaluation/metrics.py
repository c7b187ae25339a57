"""
MSE and SSIM between ground-truth and generated glyphs on the 8-bit scale.
"""

from typing import Union

import numpy as np
import torch
import torch.nn.functional as F

from src.errors import ShapeError

ArrayLike = Union[np.ndarray, torch.Tensor]

DATA_RANGE = 255.0
WINDOW_SIZE = 11
SIGMA = 1.5
K1 = 0.01
K2 = 0.03


def _as_batch(image: ArrayLike) -> torch.Tensor:
    """(H, W), (1, H, W) or (B, 1, H, W) -> float64 (B, 1, H, W) on the 8-bit scale."""
    t = torch.as_tensor(image).detach().to(torch.float64).cpu()
    while t.dim() < 4:
        t = t.unsqueeze(0)
    return (t + 1.0) * (DATA_RANGE / 2.0)


def _pair(y: ArrayLike, y_hat: ArrayLike):
    a, b = _as_batch(y), _as_batch(y_hat)
    if a.shape != b.shape:
        raise ShapeError(f"Shape mismatch: {tuple(a.shape)} vs {tuple(b.shape)}")
    return a, b


def batch_mse(y: ArrayLike, y_hat: ArrayLike) -> torch.Tensor:
    """Per-image mean squared difference on [0, 255], divided by 255."""
    a, b = _pair(y, y_hat)
    return ((a - b) ** 2).mean(dim=(1, 2, 3)) / DATA_RANGE


def gaussian_window(size: int = WINDOW_SIZE, sigma: float = SIGMA) -> torch.Tensor:
    """Normalized 2-D Gaussian kernel of shape (1, 1, size, size), float64."""
    coords = torch.arange(size, dtype=torch.float64) - size // 2
    g = torch.exp(-(coords ** 2) / (2 * sigma ** 2))
    g = g / g.sum()
    return torch.outer(g, g)[None, None]


def batch_ssim(y: ArrayLike, y_hat: ArrayLike) -> torch.Tensor:
    """
    Per-image mean SSIM, 11x11 Gaussian window (sigma 1.5), K1=0.01, K2=0.03.

    Only windows fully inside the image contribute.
    """
    a, b = _pair(y, y_hat)
    window = gaussian_window()
    if a.shape[-1] < WINDOW_SIZE or a.shape[-2] < WINDOW_SIZE:
        raise ShapeError(f"Images smaller than the {WINDOW_SIZE}x{WINDOW_SIZE} window")

    c1 = (K1 * DATA_RANGE) ** 2
    c2 = (K2 * DATA_RANGE) ** 2

    mu1 = F.conv2d(a, window)
    mu2 = F.conv2d(b, window)
    mu1_sq = mu1 * mu1
    mu2_sq = mu2 * mu2
    mu1_mu2 = mu1 * mu2
    sigma1_sq = F.conv2d(a * a, window) - mu1_sq
    sigma2_sq = F.conv2d(b * b, window) - mu2_sq
    sigma12 = F.conv2d(a * b, window) - mu1_mu2

    ssim_map = ((2 * mu1_mu2 + c1) * (2 * sigma12 + c2)) / (
        (mu1_sq + mu2_sq + c1) * (sigma1_sq + sigma2_sq + c2)
    )
    return ssim_map.mean(dim=(1, 2, 3))


def mse(y: ArrayLike, y_hat: ArrayLike) -> float:
    """MSE of one image pair."""
    return float(batch_mse(y, y_hat).mean())


def ssim(y: ArrayLike, y_hat: ArrayLike) -> float:
    """SSIM of one image pair."""
    return float(batch_ssim(y, y_hat).mean())
