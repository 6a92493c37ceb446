"""Desk-scale SGD trajectories from a built-in ReLU MLP.

Training runs plain constant-step SGD to a stop rule, then keeps going
for a fixed tail, recording the per-sample loss of every kept iterate on
every training sample (the raw material of the loss pseudo-metric) and
optionally the flattened iterate coordinates (for the Euclidean
comparison). Everything is seeded and bit-reproducible.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .dimest import DEFAULT_TRIALS, estimate_ph_dim
from .errors import DivergedLoss, NumericFailure, ShapeMismatch, ValidationError
from .matrix_io import DenseMatrix, LossMatrix
from .metric import MetricSpec, distance_matrix_euclidean, distance_matrix_from_losses
from .rng import SplitMix64

TASK_REGRESSION = "regression_mse"
TASK_CLASSIFICATION = "classification_crossentropy"

STOP_FIXED = "fixed_iterations"
STOP_RELATIVE = "relative_loss_change"


@dataclass(frozen=True)
class StopRule:
    kind: str = STOP_RELATIVE
    threshold: float = 0.005
    check_period: int = 2000

    def __post_init__(self):
        if self.kind not in (STOP_FIXED, STOP_RELATIVE):
            raise ValidationError(f"unknown stop rule {self.kind!r}")
        if self.kind == STOP_RELATIVE and (self.threshold <= 0 or self.check_period < 1):
            raise ValidationError("relative stop rule needs threshold > 0 and period >= 1")


@dataclass(frozen=True)
class TrainConfig:
    layer_widths: tuple[int, ...]
    task: str = TASK_REGRESSION
    activation: str = "relu"
    learning_rate: float = 0.01
    batch_size: int = 32
    max_iterations: int = 50_000
    tail_length: int = 2000
    stop_rule: StopRule = field(default_factory=StopRule)
    seed: int = 0

    def __post_init__(self):
        if len(self.layer_widths) < 2 or any(w < 1 for w in self.layer_widths):
            raise ValidationError(f"bad layer widths {self.layer_widths}")
        if self.activation != "relu":
            raise ValidationError(f"unsupported activation {self.activation!r}")
        if self.task not in (TASK_REGRESSION, TASK_CLASSIFICATION):
            raise ValidationError(f"unknown task {self.task!r}")
        if self.learning_rate < 0:
            # zero is allowed: a frozen trajectory is a useful degenerate case
            raise ValidationError("learning_rate must be nonnegative")
        if self.tail_length < 2:
            raise ValidationError("tail_length must be >= 2")
        if self.batch_size < 1 or self.max_iterations < 0:
            raise ValidationError("batch_size >= 1 and max_iterations >= 0 required")


@dataclass(frozen=True)
class Trajectory:
    """Recorded SGD tail plus the risks observed at the final iterate."""

    losses: LossMatrix
    params: DenseMatrix | None
    train_risk: float
    test_risk: float
    gen_gap: float
    gen_gap_sup: float
    iterations_before_tail: int


def init_params(cfg: TrainConfig) -> list[tuple[np.ndarray, np.ndarray]]:
    """Uniform fan-in scaled init, one derived stream per layer."""
    params = []
    widths = cfg.layer_widths
    for layer in range(len(widths) - 1):
        fan_in, fan_out = widths[layer], widths[layer + 1]
        stream = SplitMix64(cfg.seed, 0x1817, layer)
        scale = 1.0 / math.sqrt(fan_in)
        w = (stream.floats(fan_in * fan_out) * 2.0 - 1.0).reshape(fan_in, fan_out) * scale
        b = (stream.floats(fan_out) * 2.0 - 1.0) * scale
        params.append((w, b))
    return params


def flatten_params(params) -> np.ndarray:
    return np.concatenate([np.concatenate([w.ravel(), b.ravel()]) for w, b in params])


def _forward(params, x: np.ndarray) -> np.ndarray:
    h = x
    last = len(params) - 1
    for layer, (w, b) in enumerate(params):
        h = h @ w + b
        if layer != last:
            np.maximum(h, 0.0, out=h)
    return h


def per_sample_losses(params, x: np.ndarray, targets: np.ndarray, task: str) -> np.ndarray:
    """Loss of the current parameters on each sample individually."""
    # overflow on a diverging run surfaces as DivergedLoss downstream
    with np.errstate(over="ignore", invalid="ignore"):
        out = _forward(params, x)
        if task == TASK_REGRESSION:
            return np.mean((out - targets) ** 2, axis=1)
        # stable log-softmax cross entropy; targets hold class indices
        cls = targets[:, 0].astype(np.int64)
        zmax = out.max(axis=1)
        lse = zmax + np.log(np.exp(out - zmax[:, None]).sum(axis=1))
        return lse - out[np.arange(out.shape[0]), cls]


def loss_and_gradients(params, x, targets, task):
    """Mean loss over the batch and its gradient for every parameter."""
    with np.errstate(over="ignore", invalid="ignore"):
        return _loss_and_gradients(params, x, targets, task)


def _loss_and_gradients(params, x, targets, task):
    acts = [x]
    pres = []
    h = x
    last = len(params) - 1
    for layer, (w, b) in enumerate(params):
        z = h @ w + b
        pres.append(z)
        h = np.maximum(z, 0.0) if layer != last else z
        acts.append(h)
    out = acts[-1]
    bs = x.shape[0]
    if task == TASK_REGRESSION:
        diff = out - targets
        loss = float(np.mean(diff**2))
        delta = (2.0 / (bs * out.shape[1])) * diff
    else:
        cls = targets[:, 0].astype(np.int64)
        zmax = out.max(axis=1)
        shifted = out - zmax[:, None]
        expz = np.exp(shifted)
        sums = expz.sum(axis=1)
        loss = float(np.mean(np.log(sums) + zmax - out[np.arange(bs), cls]))
        delta = expz / sums[:, None]
        delta[np.arange(bs), cls] -= 1.0
        delta /= bs
    grads = [None] * len(params)
    for layer in range(last, -1, -1):
        grads[layer] = (acts[layer].T @ delta, delta.sum(axis=0))
        if layer > 0:
            delta = (delta @ params[layer][0].T) * (pres[layer - 1] > 0.0)
    return loss, grads


def _check_dataset(cfg: TrainConfig, features: DenseMatrix, targets: DenseMatrix):
    if features.rows != targets.rows:
        raise ShapeMismatch(
            f"{features.rows} feature rows vs {targets.rows} target rows"
        )
    if features.cols != cfg.layer_widths[0]:
        raise ShapeMismatch(
            f"features have {features.cols} columns, input layer expects "
            f"{cfg.layer_widths[0]}"
        )
    if cfg.task == TASK_REGRESSION and targets.cols != cfg.layer_widths[-1]:
        raise ShapeMismatch(
            f"targets have {targets.cols} columns, output layer expects "
            f"{cfg.layer_widths[-1]}"
        )
    if cfg.task == TASK_CLASSIFICATION:
        cls = targets.data[:, 0]
        if np.any(cls != np.round(cls)) or cls.min() < 0 or cls.max() >= cfg.layer_widths[-1]:
            raise ShapeMismatch(
                "classification targets must be integer class indices within range"
            )


class _BatchIterator:
    """Consecutive mini-batches over a seeded shuffle, reshuffled each
    epoch. The final short batch of an epoch is used as-is."""

    def __init__(self, n: int, batch_size: int, seed: int):
        self._stream = SplitMix64(seed, 0xBA7C4)
        self._perm = np.arange(n, dtype=np.int64)
        self._n = n
        self._bs = min(batch_size, n)
        self._pos = n  # force initial shuffle

    def next(self) -> np.ndarray:
        if self._pos >= self._n:
            self._stream.shuffle(self._perm)
            self._pos = 0
        batch = self._perm[self._pos : self._pos + self._bs]
        self._pos += self._bs
        return batch


def train(
    cfg: TrainConfig,
    dataset: tuple[DenseMatrix, DenseMatrix],
    holdout_fraction: float = 0.2,
    track_params: bool = True,
) -> Trajectory:
    """SGD to the stop rule, then a recorded tail of tail_length iterates.

    Each tail iterate's loss is evaluated on every training sample; the
    generalization gap is reported at the final iterate and as the
    supremum over the recorded tail.
    """
    features, targets = dataset
    if features.rows < 1:
        raise ValidationError("empty dataset")
    if not 0.0 <= holdout_fraction < 1.0:
        raise ValidationError("holdout_fraction must lie in [0, 1)")
    _check_dataset(cfg, features, targets)

    n_total = features.rows
    n_test = int(round(holdout_fraction * n_total))
    if n_test > 0:
        test_idx = SplitMix64(cfg.seed, 0x8079).sample_sorted(n_total, n_test)
        mask = np.ones(n_total, dtype=bool)
        mask[test_idx] = False
        train_idx = np.nonzero(mask)[0]
    else:
        test_idx = np.empty(0, dtype=np.int64)
        train_idx = np.arange(n_total, dtype=np.int64)
    x_tr = features.data[train_idx]
    y_tr = targets.data[train_idx]
    x_te = features.data[test_idx]
    y_te = targets.data[test_idx]
    n_train = x_tr.shape[0]
    if cfg.batch_size > n_train:
        raise ValidationError(
            f"batch_size {cfg.batch_size} exceeds the {n_train}-sample training split"
        )

    params = init_params(cfg)
    batches = _BatchIterator(n_train, cfg.batch_size, cfg.seed)

    def sgd_step():
        batch = batches.next()
        loss, grads = loss_and_gradients(params, x_tr[batch], y_tr[batch], cfg.task)
        if not math.isfinite(loss):
            raise DivergedLoss(f"non-finite batch loss {loss}")
        for layer, (gw, gb) in enumerate(grads):
            w, b = params[layer]
            params[layer] = (w - cfg.learning_rate * gw, b - cfg.learning_rate * gb)
        return loss

    # phase 1: run to the stop rule
    iters = 0
    if cfg.stop_rule.kind == STOP_FIXED:
        for _ in range(cfg.max_iterations):
            sgd_step()
            iters += 1
    else:
        prev_risk = float(np.mean(per_sample_losses(params, x_tr, y_tr, cfg.task)))
        while iters < cfg.max_iterations:
            for _ in range(min(cfg.stop_rule.check_period, cfg.max_iterations - iters)):
                sgd_step()
                iters += 1
            risk = float(np.mean(per_sample_losses(params, x_tr, y_tr, cfg.task)))
            if not math.isfinite(risk):
                raise DivergedLoss(f"non-finite training risk {risk}")
            if prev_risk == 0.0 or abs(prev_risk - risk) <= cfg.stop_rule.threshold * prev_risk:
                break
            prev_risk = risk

    # phase 2: recorded tail
    tail = cfg.tail_length
    loss_rows = np.empty((tail, n_train))
    param_rows = np.empty((tail, flatten_params(params).size)) if track_params else None
    test_risks = np.empty(tail)
    train_risks = np.empty(tail)
    for t in range(tail):
        sgd_step()
        row = per_sample_losses(params, x_tr, y_tr, cfg.task)
        if not np.all(np.isfinite(row)):
            raise DivergedLoss(f"non-finite per-sample loss at tail iterate {t}")
        loss_rows[t] = row
        train_risks[t] = row.mean()
        if n_test > 0:
            te = per_sample_losses(params, x_te, y_te, cfg.task)
            if not np.all(np.isfinite(te)):
                raise DivergedLoss(f"non-finite held-out loss at tail iterate {t}")
            test_risks[t] = te.mean()
        else:
            test_risks[t] = train_risks[t]
        if track_params:
            param_rows[t] = flatten_params(params)

    train_risk = float(train_risks[-1])
    test_risk = float(test_risks[-1])
    return Trajectory(
        losses=LossMatrix(DenseMatrix(loss_rows)),
        params=DenseMatrix(param_rows) if track_params else None,
        train_risk=train_risk,
        test_risk=test_risk,
        gen_gap=test_risk - train_risk,
        gen_gap_sup=float(np.max(test_risks - train_risks)),
        iterations_before_tail=iters,
    )


# ---------------------------------------------------------------------------
# hyperparameter grids


@dataclass(frozen=True)
class EstimatorOptions:
    alpha: float = 1.0
    trials: int = DEFAULT_TRIALS
    seed: int = 0
    sizes: tuple[int, ...] | None = None


@dataclass(frozen=True)
class GridRunRecord:
    lr: float
    batch_size: int
    seed: int
    status: str
    gen_gap: float
    gen_gap_sup: float
    dim_euclid: float
    dim_rho_s: float
    train_risk: float
    test_risk: float
    failure: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "ok"


GRID_CSV_HEADER = (
    "lr,batch_size,seed,status,gen_gap,gen_gap_sup,"
    "dim_euclid,dim_rho_s,train_risk,test_risk"
)


def _run_cell(
    base: TrainConfig,
    dataset,
    holdout_fraction: float,
    lr: float,
    bs: int,
    seed: int,
    opts: EstimatorOptions,
) -> GridRunRecord:
    cfg = replace(base, learning_rate=lr, batch_size=bs, seed=seed)
    try:
        traj = train(cfg, dataset, holdout_fraction, track_params=True)
        d_rho = distance_matrix_from_losses(traj.losses, MetricSpec())
        d_euc = distance_matrix_euclidean(traj.params)
        est_rho = estimate_ph_dim(
            d_rho, alpha=opts.alpha, sizes=opts.sizes, trials=opts.trials, seed=opts.seed
        )
        est_euc = estimate_ph_dim(
            d_euc, alpha=opts.alpha, sizes=opts.sizes, trials=opts.trials, seed=opts.seed
        )
        return GridRunRecord(
            lr=lr,
            batch_size=bs,
            seed=seed,
            status="ok",
            gen_gap=traj.gen_gap,
            gen_gap_sup=traj.gen_gap_sup,
            dim_euclid=est_euc.dimension,
            dim_rho_s=est_rho.dimension,
            train_risk=traj.train_risk,
            test_risk=traj.test_risk,
        )
    except NumericFailure as exc:
        nan = float("nan")
        return GridRunRecord(
            lr=lr,
            batch_size=bs,
            seed=seed,
            status="failed",
            gen_gap=nan,
            gen_gap_sup=nan,
            dim_euclid=nan,
            dim_rho_s=nan,
            train_risk=nan,
            test_risk=nan,
            failure=f"{type(exc).__name__}: {exc}",
        )


def run_grid(
    base: TrainConfig,
    dataset: tuple[DenseMatrix, DenseMatrix],
    lrs,
    batch_sizes,
    seeds,
    holdout_fraction: float = 0.2,
    estimator: EstimatorOptions = EstimatorOptions(),
    threads: int = 1,
) -> list[GridRunRecord]:
    """One record per (lr, batch_size, seed) cell, in grid order. Cells
    that diverge or degenerate are flagged failed, never dropped."""
    if not lrs or not batch_sizes or not seeds:
        raise ValidationError("grid axes must be nonempty")
    cells = list(itertools.product(lrs, batch_sizes, seeds))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(
                pool.map(
                    lambda c: _run_cell(
                        base, dataset, holdout_fraction, c[0], c[1], c[2], estimator
                    ),
                    cells,
                )
            )
    return [
        _run_cell(base, dataset, holdout_fraction, lr, bs, seed, estimator)
        for lr, bs, seed in cells
    ]


def grid_to_csv(records: list[GridRunRecord], path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(GRID_CSV_HEADER + "\n")
        for r in records:
            fh.write(
                f"{r.lr!r},{r.batch_size},{r.seed},{r.status},{r.gen_gap!r},"
                f"{r.gen_gap_sup!r},{r.dim_euclid!r},{r.dim_rho_s!r},"
                f"{r.train_risk!r},{r.test_risk!r}\n"
            )


def grid_from_csv(path) -> list[GridRunRecord]:
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        if header != GRID_CSV_HEADER:
            raise ValidationError(f"unexpected grid CSV header: {header!r}")
        records = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            records.append(
                GridRunRecord(
                    lr=float(cells[0]),
                    batch_size=int(cells[1]),
                    seed=int(cells[2]),
                    status=cells[3],
                    gen_gap=float(cells[4]),
                    gen_gap_sup=float(cells[5]),
                    dim_euclid=float(cells[6]),
                    dim_rho_s=float(cells[7]),
                    train_risk=float(cells[8]),
                    test_risk=float(cells[9]),
                )
            )
    return records


# ---------------------------------------------------------------------------
# synthetic datasets


def synthetic_regression(
    n: int, in_dim: int, seed: int, noise: float = 0.1, teacher_widths=(16,)
) -> tuple[DenseMatrix, DenseMatrix]:
    """Inputs uniform in [-1, 1]^d, targets from a random frozen ReLU
    teacher net plus Gaussian noise."""
    stream = SplitMix64(seed, 0xDA7A)
    x = (stream.floats(n * in_dim) * 2.0 - 1.0).reshape(n, in_dim)
    widths = (in_dim, *teacher_widths, 1)
    teacher_cfg = TrainConfig(layer_widths=widths, seed=seed ^ 0x7EAC)
    teacher = init_params(teacher_cfg)
    y = _forward(teacher, x)
    y = y + noise * stream.gaussians(n).reshape(n, 1)
    return DenseMatrix(x), DenseMatrix(y)


def synthetic_classification(
    n: int, in_dim: int, n_classes: int, seed: int, spread: float = 0.15
) -> tuple[DenseMatrix, DenseMatrix]:
    """Gaussian blobs with one class per blob; targets are class indices."""
    stream = SplitMix64(seed, 0xC1A55)
    centers = (stream.floats(n_classes * in_dim) * 2.0 - 1.0).reshape(n_classes, in_dim)
    labels = np.array([stream.next_below(n_classes) for _ in range(n)], dtype=np.int64)
    noise = stream.gaussians(n * in_dim).reshape(n, in_dim) * spread
    x = centers[labels] + noise
    return DenseMatrix(x), DenseMatrix(labels.reshape(n, 1).astype(np.float64))
