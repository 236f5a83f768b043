"""Spatio-temporal convolutional networks for limb-pose map prediction.

Two models operate on depth clips laid out as (N, C, T, H, W):

* a detection network, an encoder-decoder built from two-branch blocks
  (one branch for joints, one for connections, fused by a 1x1x1 conv)
  that outputs 20 binary affinity-map channels through a sigmoid;
* a regression network, a plain stack of stride-1 convolutions that maps
  depth + 20 affinity channels to 20 real-valued confidence-map channels.

All convolutions keep the temporal stride at 1, so the clip length T is
preserved end to end; only the spatial size is halved or doubled.
"""

from __future__ import annotations

import copy
import math
import time
from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

LOSS_CLAMP_EPS = 1e-7


class ShapeError(ValueError):
    """A tensor does not match the shape contract of a network or loss."""


class TrainingDivergedError(RuntimeError):
    """The training loss became non-finite."""


@dataclass(frozen=True)
class DetectionNetSpec:
    """Geometry and width of the affinity-map detection network."""

    base_channels: int = 64
    out_channels: int = 20
    in_channels: int = 1
    num_blocks: int = 4

    def __post_init__(self):
        if self.base_channels < 2 or self.base_channels % 2:
            raise ValueError("base_channels must be an even number >= 2")
        if self.num_blocks < 1:
            raise ValueError("num_blocks must be >= 1")

    @property
    def spatial_divisor(self) -> int:
        return 2 ** self.num_blocks


@dataclass(frozen=True)
class RegressionNetSpec:
    """Width of the confidence-map regression network."""

    base_channels: int = 64
    out_channels: int = 20
    in_channels: int = 21  # 1 depth + 20 affinity; 1 for the regression-only variant

    def __post_init__(self):
        if self.base_channels < 1:
            raise ValueError("base_channels must be >= 1")
        if self.in_channels not in (1, 21):
            raise ValueError("in_channels must be 21 (full) or 1 (regression-only)")


@dataclass(frozen=True)
class TrainConfig:
    """Optimization settings shared by both training stages."""

    optimizer: str = "adam"  # "adam" for detection, "sgd" for regression
    learning_rate: float = 0.01
    decay_factor: float = 0.9
    decay_every: int = 10
    momentum: float = 0.98
    batch_size: int = 8
    epochs: int = 100
    selection: str = "pixel_accuracy"  # or "mae"
    variant: str = "full"  # or "detection-only" / "regression-only"
    seed: int = 0

    def __post_init__(self):
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.selection not in ("pixel_accuracy", "mae"):
            raise ValueError(f"unknown selection rule {self.selection!r}")
        if self.variant not in ("full", "detection-only", "regression-only"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if not 0 < self.decay_factor <= 1:
            raise ValueError("decay factor must be in (0, 1]")
        if self.batch_size < 1 or self.epochs < 1 or self.decay_every < 1:
            raise ValueError("batch size, epochs and decay interval must be >= 1")

    def lr_at(self, epoch: int) -> float:
        """Learning rate for a zero-based epoch (decays stepwise)."""
        return self.learning_rate * self.decay_factor ** (epoch // self.decay_every)


def _conv_bn_relu(in_ch: int, out_ch: int) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv3d(in_ch, out_ch, kernel_size=3, stride=1, padding=1),
        nn.BatchNorm3d(out_ch),
        nn.ReLU(inplace=True),
    )


class _DownBranch(nn.Module):
    """One encoder branch: a spatial-halving 2x2x2 conv then a 3x3x3 conv."""

    def __init__(self, in_ch: int, out_ch: int):
        super().__init__()
        self.down = nn.Conv3d(in_ch, out_ch, kernel_size=2, stride=(1, 2, 2))
        self.bn = nn.BatchNorm3d(out_ch)
        self.conv = _conv_bn_relu(out_ch, out_ch)

    def forward(self, x):
        # The 2-wide temporal kernel with stride 1 needs one trailing pad
        # frame to keep T unchanged.
        x = F.pad(x, (0, 0, 0, 0, 0, 1))
        x = F.relu(self.bn(self.down(x)), inplace=True)
        return self.conv(x)


class _UpBranch(nn.Module):
    """One decoder branch: a spatial-doubling transposed conv then a 3x3x3 conv."""

    def __init__(self, in_ch: int, out_ch: int):
        super().__init__()
        self.up = nn.ConvTranspose3d(in_ch, out_ch, kernel_size=2, stride=(1, 2, 2))
        self.bn = nn.BatchNorm3d(out_ch)
        self.conv = _conv_bn_relu(out_ch, out_ch)

    def forward(self, x):
        t = x.shape[2]
        # The transposed 2-wide temporal kernel emits T+1 frames; drop the
        # trailing one so T is preserved.
        x = self.up(x)[:, :, :t]
        x = F.relu(self.bn(x), inplace=True)
        return self.conv(x)


class _TwoBranchBlock(nn.Module):
    """Parallel joint/connection branches, concatenated and fused by 1x1x1."""

    def __init__(self, in_ch: int, branch_ch: int, up: bool):
        super().__init__()
        branch_cls = _UpBranch if up else _DownBranch
        self.branch_joints = branch_cls(in_ch, branch_ch)
        self.branch_connections = branch_cls(in_ch, branch_ch)
        self.fuse = nn.Conv3d(2 * branch_ch, 2 * branch_ch, kernel_size=1)
        self.bn = nn.BatchNorm3d(2 * branch_ch)

    @property
    def out_channels(self) -> int:
        return self.fuse.out_channels

    def forward(self, x):
        merged = torch.cat([self.branch_joints(x), self.branch_connections(x)], dim=1)
        return F.relu(self.bn(self.fuse(merged)), inplace=True)


class DetectionNet(nn.Module):
    """Encoder-decoder affinity-map network with sigmoid output.

    Branch widths double per encoder block (base..8*base) and halve per
    decoder block back down to base/2, matching fused widths of 2x those
    values; a final 1x1x1 convolution emits ``out_channels`` maps.
    """

    def __init__(self, spec: DetectionNetSpec):
        super().__init__()
        self.spec = spec
        base = spec.base_channels
        self.stem = _conv_bn_relu(spec.in_channels, base)
        enc_widths = [base * 2 ** i for i in range(spec.num_blocks)]
        dec_widths = [w // 2 for w in reversed(enc_widths)]
        self.encoder = nn.ModuleList()
        ch = base
        for width in enc_widths:
            block = _TwoBranchBlock(ch, width, up=False)
            self.encoder.append(block)
            ch = block.out_channels
        self.decoder = nn.ModuleList()
        for width in dec_widths:
            block = _TwoBranchBlock(ch, width, up=True)
            self.decoder.append(block)
            ch = block.out_channels
        self.head = nn.Conv3d(ch, spec.out_channels, kernel_size=1)
        _init_weights(self)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        _check_input(x, self.spec.in_channels, self.spec.spatial_divisor)
        x = self.stem(x)
        for block in self.encoder:
            x = block(x)
        for block in self.decoder:
            x = block(x)
        return torch.sigmoid(self.head(x))


class RegressionNet(nn.Module):
    """Stride-1 convolutional stack mapping depth+affinity to confidence maps."""

    def __init__(self, spec: RegressionNetSpec):
        super().__init__()
        self.spec = spec
        base = spec.base_channels
        widths = [base, base * 2, base * 4, base * 4, base * 4]
        layers = []
        ch = spec.in_channels
        for width in widths:
            layers.append(_conv_bn_relu(ch, width))
            ch = width
        self.body = nn.Sequential(*layers)
        self.head = nn.Conv3d(ch, spec.out_channels, kernel_size=1)
        _init_weights(self)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        _check_input(x, self.spec.in_channels, divisor=1)
        return self.head(self.body(x))


def _check_input(x: torch.Tensor, channels: int, divisor: int) -> None:
    if x.ndim != 5:
        raise ShapeError(f"expected a (N, C, T, H, W) tensor, got shape {tuple(x.shape)}")
    n, c, t, h, w = x.shape
    if c != channels:
        raise ShapeError(f"expected {channels} input channels, got {c}")
    if t < 1:
        raise ShapeError("clip length must be >= 1")
    if h % divisor or w % divisor:
        raise ShapeError(
            f"spatial size {h}x{w} must be divisible by {divisor} "
            f"to survive {int(math.log2(divisor))} halvings"
        )


def _init_weights(module: nn.Module) -> None:
    for m in module.modules():
        if isinstance(m, (nn.Conv3d, nn.ConvTranspose3d)):
            nn.init.kaiming_normal_(m.weight, nonlinearity="relu")
            if m.bias is not None:
                nn.init.zeros_(m.bias)


def build_detection_net(spec: DetectionNetSpec) -> DetectionNet:
    return DetectionNet(spec)


def build_regression_net(spec: RegressionNetSpec) -> RegressionNet:
    return RegressionNet(spec)


def stack_to_tensor(values: np.ndarray) -> torch.Tensor:
    """(H, W, T, C) map-stack values to a (1, C, T, H, W) float tensor."""
    if values.ndim != 4:
        raise ShapeError(f"expected (H, W, T, C) values, got shape {values.shape}")
    return torch.from_numpy(np.ascontiguousarray(values.transpose(3, 2, 0, 1))).float()[None]


def tensor_to_stack(tensor: torch.Tensor) -> np.ndarray:
    """(1, C, T, H, W) network output back to (H, W, T, C) map-stack values."""
    if tensor.ndim != 5 or tensor.shape[0] != 1:
        raise ShapeError(f"expected a (1, C, T, H, W) tensor, got shape {tuple(tensor.shape)}")
    return tensor.detach().cpu().numpy()[0].transpose(2, 3, 1, 0).astype(np.float64)


def clip_to_tensor(frames: np.ndarray) -> torch.Tensor:
    """(T, H, W) depth frames to a (1, 1, T, H, W) float tensor."""
    if frames.ndim != 3:
        raise ShapeError(f"expected (T, H, W) frames, got shape {frames.shape}")
    return torch.from_numpy(np.ascontiguousarray(frames)).float()[None, None]


def loss_ce(pred: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    """Binary cross-entropy averaged over every element of the batch.

    Predictions are clamped to [eps, 1-eps] so a saturated sigmoid cannot
    produce log(0).
    """
    if pred.shape != target.shape:
        raise ShapeError(f"loss shape mismatch: {tuple(pred.shape)} vs {tuple(target.shape)}")
    p = pred.clamp(LOSS_CLAMP_EPS, 1.0 - LOSS_CLAMP_EPS)
    return -(target * torch.log(p) + (1.0 - target) * torch.log1p(-p)).mean()


def loss_mse(pred: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    """Squared residual averaged over every element of the batch."""
    if pred.shape != target.shape:
        raise ShapeError(f"loss shape mismatch: {tuple(pred.shape)} vs {tuple(target.shape)}")
    return ((pred - target) ** 2).mean()


def pixel_accuracy(pred: torch.Tensor, target: torch.Tensor, threshold: float = 0.5) -> float:
    """Fraction of elements whose thresholded prediction matches the target."""
    if pred.shape != target.shape:
        raise ShapeError(f"metric shape mismatch: {tuple(pred.shape)} vs {tuple(target.shape)}")
    return ((pred >= threshold) == (target >= threshold)).float().mean().item()


def mean_abs_error(pred: torch.Tensor, target: torch.Tensor) -> float:
    if pred.shape != target.shape:
        raise ShapeError(f"metric shape mismatch: {tuple(pred.shape)} vs {tuple(target.shape)}")
    return (pred - target).abs().mean().item()


@dataclass
class EpochLog:
    epoch: int
    train_loss: float
    val_metric: float
    lr: float


@dataclass
class TrainResult:
    state_dict: dict
    log: list[EpochLog] = field(default_factory=list)
    best_epoch: int = -1
    best_metric: float = math.nan


def _make_optimizer(model: nn.Module, cfg: TrainConfig) -> torch.optim.Optimizer:
    if cfg.optimizer == "adam":
        return torch.optim.Adam(model.parameters(), lr=cfg.learning_rate)
    return torch.optim.SGD(model.parameters(), lr=cfg.learning_rate, momentum=cfg.momentum)


def train_model(
    model: nn.Module,
    train_inputs: torch.Tensor,
    train_targets: torch.Tensor,
    val_inputs: torch.Tensor,
    val_targets: torch.Tensor,
    cfg: TrainConfig,
    progress: bool = False,
) -> TrainResult:
    """Optimize ``model``, returning the checkpoint best on the validation set.

    Inputs and targets are stacked along dim 0 (one row per clip).  The
    losses are binary cross-entropy when selecting on pixel accuracy
    (detection stage) and mean squared error when selecting on MAE
    (regression stage).  A non-finite loss aborts with
    :class:`TrainingDivergedError`.
    """
    if len(train_inputs) == 0:
        raise ValueError("training set is empty")
    if len(val_inputs) == 0:
        raise ValueError("validation set is empty; the selection rule is undefined")
    if len(train_inputs) != len(train_targets) or len(val_inputs) != len(val_targets):
        raise ShapeError("inputs and targets must pair up one-to-one")
    loss_fn = loss_ce if cfg.selection == "pixel_accuracy" else loss_mse
    maximize = cfg.selection == "pixel_accuracy"
    optimizer = _make_optimizer(model, cfg)
    gen = torch.Generator().manual_seed(cfg.seed)
    result = TrainResult(state_dict={})
    best = -math.inf if maximize else math.inf
    for epoch in range(cfg.epochs):
        lr = cfg.lr_at(epoch)
        for group in optimizer.param_groups:
            group["lr"] = lr
        model.train()
        order = torch.randperm(len(train_inputs), generator=gen)
        epoch_loss = 0.0
        n_batches = 0
        for start in range(0, len(order), cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            optimizer.zero_grad()
            pred = model(train_inputs[idx])
            loss = loss_fn(pred, train_targets[idx])
            value = loss.item()
            if not math.isfinite(value):
                raise TrainingDivergedError(
                    f"training loss became {value} at epoch {epoch}; aborting"
                )
            loss.backward()
            optimizer.step()
            epoch_loss += value
            n_batches += 1
        val_metric = evaluate_metric(model, val_inputs, val_targets, cfg)
        result.log.append(EpochLog(epoch, epoch_loss / n_batches, val_metric, lr))
        improved = val_metric > best if maximize else val_metric < best
        if improved:
            best = val_metric
            result.best_epoch = epoch
            result.best_metric = val_metric
            result.state_dict = copy.deepcopy(
                {k: v.detach().cpu() for k, v in model.state_dict().items()}
            )
        if progress:
            print(
                f"epoch {epoch:3d} loss {epoch_loss / n_batches:.5f} "
                f"val {val_metric:.5f} lr {lr:.5f}",
                flush=True,
            )
    model.load_state_dict(result.state_dict)
    return result


def evaluate_metric(
    model: nn.Module,
    inputs: torch.Tensor,
    targets: torch.Tensor,
    cfg: TrainConfig,
    batch_size: int | None = None,
) -> float:
    """Validation metric under cfg's selection rule, computed in eval mode."""
    batch = batch_size or cfg.batch_size
    model.eval()
    metric_fn = pixel_accuracy if cfg.selection == "pixel_accuracy" else mean_abs_error
    total = 0.0
    count = 0
    with torch.no_grad():
        for start in range(0, len(inputs), batch):
            chunk = inputs[start : start + batch]
            weight = len(chunk)
            total += metric_fn(model(chunk), targets[start : start + batch]) * weight
            count += weight
    return total / count


def write_training_log(log: list[EpochLog], path) -> None:
    import csv
    from pathlib import Path

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "train_loss", "val_metric", "lr"])
        for entry in log:
            writer.writerow([entry.epoch, repr(entry.train_loss), repr(entry.val_metric), repr(entry.lr)])


def infer(model: nn.Module, inputs: torch.Tensor) -> tuple[torch.Tensor, float]:
    """Run the model in eval mode; returns (output, seconds per frame)."""
    model.eval()
    with torch.no_grad():
        start = time.perf_counter()
        out = model(inputs)
        elapsed = time.perf_counter() - start
    n_frames = inputs.shape[0] * inputs.shape[2]
    return out, elapsed / n_frames


def save_checkpoint(path, model: nn.Module, net_kind: str, configs: dict) -> None:
    """Persist weights plus every config needed to rerun inference standalone.

    ``configs`` values must be plain dicts/lists/scalars so the file loads
    under the safe weights-only loader.
    """
    from dataclasses import asdict, is_dataclass
    from pathlib import Path

    payload = {"net_kind": net_kind, "state_dict": model.state_dict()}
    for key, value in configs.items():
        payload[key] = asdict(value) if is_dataclass(value) else value
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    torch.save(payload, path)


def load_checkpoint(path) -> tuple[nn.Module, dict]:
    """Rebuild the saved network and return (model, full payload)."""
    payload = torch.load(path, map_location="cpu", weights_only=True)
    kind = payload["net_kind"]
    if kind == "detection":
        model = build_detection_net(DetectionNetSpec(**payload["net_spec"]))
    elif kind == "regression":
        model = build_regression_net(RegressionNetSpec(**payload["net_spec"]))
    else:
        raise ValueError(f"unknown checkpoint kind {kind!r}")
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, payload
