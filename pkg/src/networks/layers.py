"""
Shared layer blocks and weight initialization.
"""

import torch
import torch.nn as nn
import torch.nn.functional as F

KERNEL = 5


class BatchNorm(nn.BatchNorm2d):
    """
    BatchNorm2d that tolerates a single value per channel in training mode.

    A one-sample batch at 1x1 spatial size has no batch variance, so it is
    normalized with the running statistics and leaves them untouched.
    """

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if self.training and x.shape[0] * x.shape[2] * x.shape[3] == 1:
            return F.batch_norm(x, self.running_mean, self.running_var, self.weight, self.bias,
                                training=False, momentum=0.0, eps=self.eps)
        return super().forward(x)


def conv_block(in_ch: int, out_ch: int, stride: int, activation: nn.Module) -> nn.Sequential:
    """5x5 convolution, batch normalization, activation."""
    return nn.Sequential(
        nn.Conv2d(in_ch, out_ch, KERNEL, stride=stride, padding=KERNEL // 2),
        BatchNorm(out_ch),
        activation,
    )


def deconv_block(in_ch: int, out_ch: int) -> nn.Sequential:
    """5x5 stride-2 transposed convolution doubling the spatial size, BN, ReLU."""
    return nn.Sequential(
        nn.ConvTranspose2d(in_ch, out_ch, KERNEL, stride=2, padding=KERNEL // 2, output_padding=1),
        BatchNorm(out_ch),
        nn.ReLU(),
    )


def init_weights(module: nn.Module, std: float = 0.02):
    """Zero-mean Gaussian weights for conv/deconv/linear layers, unit-mean BN scales."""
    if isinstance(module, (nn.Conv2d, nn.ConvTranspose2d, nn.Linear)):
        nn.init.normal_(module.weight, 0.0, std)
        if module.bias is not None:
            nn.init.zeros_(module.bias)
    elif isinstance(module, nn.BatchNorm2d):
        nn.init.normal_(module.weight, 1.0, std)
        nn.init.zeros_(module.bias)
