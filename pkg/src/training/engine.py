"""
Adversarial training loop: one discriminator update followed by
g_steps_per_d_step generator updates per batch.
"""

import math
import os
import random
from typing import List, Optional, Sequence, Tuple

import numpy as np
import torch

from src.components.dictionary import ComponentDictionary
from src.config.logger import get_logger
from src.data.samples import TrainingSample
from src.errors import DataError, DivergenceError
from src.evaluation.report import evaluate
from src.objective.losses import (
    LossParts,
    LossReport,
    adversarial_terms,
    category_term,
    combine,
    feature_distance,
    generator_adversarial_loss,
    pixel_loss,
    total_losses,
)
from src.training.batching import collate, epoch_batches
from src.training.checkpoint import TrainState, create_state, load_checkpoint, save_checkpoint
from src.training.config import TrainConfig, lr_at

logger = get_logger(__name__)

METRICS_HEADER = "step epoch d_loss g_adv pixel constancy category lr"


def set_seed(seed: int):
    """Seed every RNG the training loop touches."""
    random.seed(seed)
    np.random.seed(seed)
    torch.manual_seed(seed)
    torch.use_deterministic_algorithms(True, warn_only=True)


class MetricsLog:
    """Append-only per-step metrics file."""

    def __init__(self, path: str):
        self.path = path
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)

    def append(self, step: int, epoch: int, report: LossReport, lr: float):
        line = (f"{step} {epoch} {report.total_d:.8g} {report.adv:.8g} {report.pixel:.8g} "
                f"{report.constancy:.8g} {report.category:.8g} {lr:.8g}")
        with open(self.path, "a", encoding="utf-8") as f:
            f.write(line + "\n")

    def read(self) -> List[str]:
        if not os.path.exists(self.path):
            return []
        with open(self.path, encoding="utf-8") as f:
            return [line.rstrip("\n") for line in f if line.strip()]


def _set_lr(optimizer: torch.optim.Optimizer, lr: float):
    for group in optimizer.param_groups:
        group["lr"] = lr


def _check_finite(value: torch.Tensor, step: int, parts: LossParts):
    if not torch.isfinite(value).all():
        raise DivergenceError(step, {k: float(torch.as_tensor(v).detach())
                                     for k, v in vars(parts).items()})


def train_step(batch: Sequence[TrainingSample], state: TrainState, cfg: TrainConfig,
               lr: Optional[float] = None) -> Tuple[TrainState, LossReport]:
    """
    One discriminator update, then cfg.g_steps_per_d_step generator updates
    on the same batch.

    Args:
        batch: Training samples
        state: Current training state (updated in place and returned)
        cfg: Training configuration
        lr: Learning-rate override; defaults to lr_at(state.epoch)

    Returns:
        (state, LossReport of the last generator update)
    """
    gen, disc = state.generator, state.discriminator
    weights = cfg.weights
    use_style = gen.config.uses_style
    step = state.step + 1

    rate = lr_at(state.epoch, cfg) if lr is None else lr
    _set_lr(state.opt_g, rate)
    _set_lr(state.opt_d, rate)

    b = collate(batch, gen)
    gen.train()
    disc.train()
    zero = torch.zeros((), device=b.x.device)

    # discriminator: fake pairs carry no gradient back to the generator
    with torch.no_grad():
        fake = gen(b.x, b.styles, b.component_ids, b.lengths).image
    disc.requires_grad_(True)
    real_out = disc(b.x, b.y)
    fake_out = disc(b.x, fake)
    d_adv, _ = adversarial_terms(real_out.realness, fake_out.realness)
    category_real = category_term(real_out.style_logits, b.styles) if use_style else zero
    d_parts = LossParts(d_adv=d_adv, category_real=category_real)
    _, total_d = combine(d_parts, weights)
    _check_finite(total_d, step, d_parts)

    state.opt_d.zero_grad(set_to_none=True)
    total_d.backward()
    state.opt_d.step()

    disc.requires_grad_(False)
    try:
        for _ in range(cfg.g_steps_per_d_step):
            out = gen(b.x, b.styles, b.component_ids, b.lengths)
            y_hat = out.image
            g_out = disc(b.x, y_hat)
            parts = LossParts(
                d_adv=d_adv.detach(),
                g_adv=generator_adversarial_loss(g_out.realness),
                pixel=pixel_loss(b.y, y_hat),
                constancy=feature_distance(out.features, gen.encode(y_hat)),
                category_real=category_real.detach(),
                category_fake=category_term(g_out.style_logits, b.styles) if use_style else zero,
            )
            total_g, _ = combine(parts, weights)
            _check_finite(total_g, step, parts)

            state.opt_g.zero_grad(set_to_none=True)
            total_g.backward()
            state.opt_g.step()
    finally:
        disc.requires_grad_(True)

    state.step = step
    return state, total_losses(parts, weights)


def train(cfg: TrainConfig, dataset: Sequence[TrainingSample], out_dir: str,
          dictionary: Optional[ComponentDictionary] = None,
          resume: Optional[str] = None,
          validation: Optional[Sequence[TrainingSample]] = None) -> TrainState:
    """
    Run every epoch with a seeded batch order.

    Writes ``metrics.log`` (one line per step), ``epoch_NNN.pt`` after each
    epoch and ``best.pt`` whenever the validation SSIM improves.

    Args:
        cfg: Training configuration
        dataset: Training samples
        out_dir: Run directory
        dictionary: When given, every training character must be covered
        resume: Checkpoint to continue from (mid-epoch positions included)
        validation: Optional samples for best-checkpoint selection
    """
    if not dataset:
        raise DataError("Training set is empty")
    if dictionary is not None:
        missing = dictionary.coverage_report({s.character for s in dataset})
        if missing:
            raise DataError(f"{len(missing)} training characters lack a decomposition")

    os.makedirs(out_dir, exist_ok=True)
    set_seed(cfg.seed)
    state = load_checkpoint(resume, cfg) if resume else create_state(cfg)
    metrics = MetricsLog(os.path.join(out_dir, "metrics.log"))

    logger.info(
        f"Training {len(dataset)} samples for {cfg.epochs} epochs "
        f"(batch {cfg.batch_size}, style {cfg.style_mode}, components {cfg.components_enabled})"
    )

    for epoch in range(state.epoch, cfg.epochs + 1):
        state.epoch = epoch
        lr = lr_at(epoch, cfg)
        batches = epoch_batches(len(dataset), cfg.batch_size, cfg.seed, epoch)
        report = None
        for index in range(state.batch_in_epoch, len(batches)):
            state, report = train_step([dataset[i] for i in batches[index]], state, cfg)
            state.batch_in_epoch = index + 1
            metrics.append(state.step, epoch, report, lr)

        state.epoch = epoch + 1
        state.batch_in_epoch = 0
        if report is not None:
            logger.info(f"Epoch {epoch}/{cfg.epochs} lr {lr:.6g}: {report}")

        if validation:
            score = evaluate(state.generator, validation).overall.ssim
            if score > state.best_ssim:
                state.best_ssim = score
                save_checkpoint(state, cfg, os.path.join(out_dir, "best.pt"))
        save_checkpoint(state, cfg, os.path.join(out_dir, f"epoch_{epoch:03d}.pt"))

    if not math.isinf(state.best_ssim):
        logger.info(f"Best validation SSIM {state.best_ssim:.4f}")
    return state
