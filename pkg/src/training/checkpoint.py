"""
Training state and versioned checkpoint files.
"""

import os
from dataclasses import dataclass
from typing import Optional, Tuple

import torch

from src.config.logger import get_logger
from src.errors import DataError
from src.networks.config import ModelConfig
from src.networks.discriminator import Discriminator
from src.networks.generator import Generator
from src.training.config import TrainConfig

logger = get_logger(__name__)

CHECKPOINT_VERSION = 1


class CheckpointError(DataError):
    """Unreadable or unwritable checkpoint."""
    pass


class CheckpointMismatchError(DataError):
    """Checkpoint was written for a different model configuration."""
    pass


@dataclass
class TrainState:
    """Networks, optimizer moments and loop position of a training run."""

    generator: Generator
    discriminator: Discriminator
    opt_g: torch.optim.Adam
    opt_d: torch.optim.Adam
    epoch: int = 1
    step: int = 0
    batch_in_epoch: int = 0
    best_ssim: float = float("-inf")

    @property
    def model_config(self) -> ModelConfig:
        return self.generator.config


def create_state(cfg: TrainConfig) -> TrainState:
    """Freshly initialized networks and Adam optimizers (seeded by the caller)."""
    model_cfg = cfg.model_config()
    generator = Generator(model_cfg).to(cfg.device)
    discriminator = Discriminator(model_cfg).to(cfg.device)
    betas = (cfg.beta1, cfg.beta2)
    opt_g = torch.optim.Adam(generator.parameters(), lr=cfg.lr_initial, betas=betas)
    opt_d = torch.optim.Adam(discriminator.parameters(), lr=cfg.lr_initial, betas=betas)
    return TrainState(generator, discriminator, opt_g, opt_d)


def save_checkpoint(state: TrainState, cfg: TrainConfig, path: str):
    """
    Write a checkpoint atomically; a failed write leaves any previous file intact.
    """
    payload = {
        "format_version": CHECKPOINT_VERSION,
        "model_config": state.model_config.to_dict(),
        "train_config": cfg.to_dict(),
        "generator": state.generator.state_dict(),
        "discriminator": state.discriminator.state_dict(),
        "opt_g": state.opt_g.state_dict(),
        "opt_d": state.opt_d.state_dict(),
        "epoch": state.epoch,
        "step": state.step,
        "batch_in_epoch": state.batch_in_epoch,
        "best_ssim": state.best_ssim,
        "rng_state": torch.get_rng_state(),
    }
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    tmp_path = f"{path}.tmp"
    try:
        torch.save(payload, tmp_path)
        os.replace(tmp_path, path)
    except OSError as e:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise CheckpointError(f"Cannot write checkpoint {path}: {e}") from e
    logger.info(f"✓ Checkpoint saved: {path} (epoch {state.epoch}, step {state.step})")


def _read(path: str) -> dict:
    if not os.path.exists(path):
        raise CheckpointError(f"Checkpoint not found: {path}")
    try:
        payload = torch.load(path, map_location="cpu", weights_only=True)
    except Exception as e:
        raise CheckpointError(f"Cannot read checkpoint {path}: {e}") from e
    if payload.get("format_version") != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"Checkpoint {path} has format {payload.get('format_version')}, expected {CHECKPOINT_VERSION}"
        )
    return payload


def _check_config(stored: ModelConfig, expected: Optional[ModelConfig], path: str):
    if expected is not None and stored != expected:
        diff = {
            k: (v, expected.to_dict()[k])
            for k, v in stored.to_dict().items()
            if v != expected.to_dict()[k]
        }
        raise CheckpointMismatchError(f"Checkpoint {path} configuration differs (stored, expected): {diff}")


def load_checkpoint(path: str, cfg: TrainConfig) -> TrainState:
    """Restore a TrainState bit-exactly, including the global RNG state."""
    payload = _read(path)
    stored = ModelConfig.from_dict(payload["model_config"])
    _check_config(stored, cfg.model_config(), path)

    state = create_state(cfg)
    state.generator.load_state_dict(payload["generator"])
    state.discriminator.load_state_dict(payload["discriminator"])
    state.opt_g.load_state_dict(payload["opt_g"])
    state.opt_d.load_state_dict(payload["opt_d"])
    state.epoch = payload["epoch"]
    state.step = payload["step"]
    state.batch_in_epoch = payload["batch_in_epoch"]
    state.best_ssim = payload["best_ssim"]
    torch.set_rng_state(payload["rng_state"])
    logger.info(f"✓ Resumed from {path} (epoch {state.epoch}, step {state.step})")
    return state


def load_generator(path: str, expected: Optional[ModelConfig] = None,
                   device: str = "cpu") -> Tuple[Generator, ModelConfig]:
    """Generator in inference mode from a checkpoint."""
    payload = _read(path)
    stored = ModelConfig.from_dict(payload["model_config"])
    _check_config(stored, expected, path)
    generator = Generator(stored)
    generator.load_state_dict(payload["generator"])
    generator.to(device).eval()
    return generator, stored
