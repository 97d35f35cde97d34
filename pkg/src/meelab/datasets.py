"""Dataset ingestion, RSSI preprocessing, splits and synthetic stand-ins."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, IngestionError, PreprocessError

UJI_COORDS = ("LONGITUDE", "LATITUDE")
UJI_AP_PREFIX = "WAP"
UJI_MISSING = 100.0
RSSI_FLOOR_DBM = -110.0


@dataclass
class TabularDataset:
    features: np.ndarray
    targets: np.ndarray
    feature_names: list[str]
    target_names: list[str] = field(default_factory=list)
    # rows whose targets were deliberately corrupted (synthetic data only)
    corrupted: np.ndarray | None = None

    def __post_init__(self):
        if self.features.shape[0] != self.targets.shape[0]:
            raise IngestionError(
                f"{self.features.shape[0]} feature rows but {self.targets.shape[0]} target rows"
            )

    def __len__(self) -> int:
        return self.features.shape[0]

    def take(self, idx) -> "TabularDataset":
        corrupted = None if self.corrupted is None else self.corrupted[idx]
        return replace(self, features=self.features[idx], targets=self.targets[idx], corrupted=corrupted)


@dataclass
class LocalizationDataset:
    rssi: np.ndarray
    positions: np.ndarray
    ap_names: list[str]
    aps_before: int
    aps_after: int
    ap_positions: np.ndarray | None = None

    def __len__(self) -> int:
        return self.rssi.shape[0]

    @property
    def features(self) -> np.ndarray:
        return self.rssi

    @property
    def targets(self) -> np.ndarray:
        return self.positions

    def take(self, idx) -> "LocalizationDataset":
        return replace(self, rssi=self.rssi[idx], positions=self.positions[idx])


@dataclass(frozen=True)
class PreprocessSpec:
    threshold: float = 0.98
    missing: float = UJI_MISSING
    floor: float = RSSI_FLOOR_DBM
    normalization: str = "min-max"

    def __post_init__(self):
        if not 0.0 < self.threshold <= 1.0:
            raise ConfigError(f"drop threshold must be in (0, 1], got {self.threshold}")
        if self.normalization != "min-max":
            raise ConfigError(f"unsupported normalization {self.normalization!r}")


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError(f"train fraction must be in (0, 1), got {self.train_fraction}")


def load_csv(path, target_columns, feature_columns=None) -> TabularDataset:
    """Read a headed, comma-separated numeric table.

    ``feature_columns`` defaults to every column not listed as a target.
    Errors name the file, 1-based data row and column of the problem.
    """
    path = Path(path)
    target_columns = [target_columns] if isinstance(target_columns, str) else list(target_columns)
    if not path.is_file():
        raise IngestionError(f"{path}: no such file")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise IngestionError(f"{path}: empty file") from None
        if not header or any(not h for h in header) or len(set(header)) != len(header):
            raise IngestionError(f"{path}: malformed header {header}")
        missing = [c for c in target_columns if c not in header]
        if missing:
            raise IngestionError(f"{path}: target columns {missing} not in header")
        if feature_columns is None:
            feature_columns = [h for h in header if h not in target_columns]
        else:
            feature_columns = list(feature_columns)
            absent = [c for c in feature_columns if c not in header]
            if absent:
                raise IngestionError(f"{path}: feature columns {absent} not in header")
        rows = []
        for lineno, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != len(header):
                raise IngestionError(f"{path}: row {lineno} has {len(row)} cells, header has {len(header)}")
            values = []
            for col, cell in zip(header, row):
                try:
                    v = float(cell)
                except ValueError:
                    raise IngestionError(f"{path}: row {lineno}, column {col!r}: non-numeric value {cell!r}") from None
                if not math.isfinite(v):
                    raise IngestionError(f"{path}: row {lineno}, column {col!r}: non-finite value {cell!r}")
                values.append(v)
            rows.append(values)
    table = np.array(rows, dtype=np.float64).reshape(len(rows), len(header))
    pos = {h: i for i, h in enumerate(header)}
    return TabularDataset(
        features=table[:, [pos[c] for c in feature_columns]],
        targets=table[:, [pos[c] for c in target_columns]],
        feature_names=feature_columns,
        target_names=target_columns,
    )


def load_ujiindoorloc(path, coord_columns=UJI_COORDS, ap_prefix=UJI_AP_PREFIX) -> TabularDataset:
    """Load a UJIIndoorLoc-style file: ``WAPnnn`` RSSI columns plus two coordinates."""
    path = Path(path)
    if not path.is_file():
        raise IngestionError(f"{path}: no such file")
    with path.open(newline="") as fh:
        header = [h.strip() for h in next(csv.reader(fh), [])]
    aps = [h for h in header if h.startswith(ap_prefix)]
    if not aps:
        raise IngestionError(f"{path}: no columns starting with {ap_prefix!r}")
    return load_csv(path, list(coord_columns), feature_columns=aps)


def _minmax(x: np.ndarray) -> np.ndarray:
    lo, hi = x.min(axis=0), x.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    return (x - lo) / span


def preprocess_localization(raw, spec: PreprocessSpec = PreprocessSpec()) -> LocalizationDataset:
    """Prune rarely heard APs, fill missing readings, min-max normalize.

    An AP is dropped when the fraction of samples carrying the missing
    sentinel is at least ``spec.threshold``. Remaining missing readings are
    set to ``spec.floor`` before normalization. Coordinates are normalized
    to ``[0, 1]`` per axis. Accepts a :class:`TabularDataset` or an already
    processed :class:`LocalizationDataset`.
    """
    rssi = np.asarray(raw.features, dtype=np.float64)
    coords = np.asarray(raw.targets, dtype=np.float64)
    names = list(getattr(raw, "feature_names", None) or getattr(raw, "ap_names"))
    before = getattr(raw, "aps_before", rssi.shape[1])
    if coords.ndim != 2 or coords.shape[1] != 2:
        raise PreprocessError(f"expected two coordinate targets, got shape {coords.shape}")
    if rssi.shape[0] == 0:
        raise PreprocessError("no samples")

    absent = rssi == spec.missing
    keep = absent.mean(axis=0) < spec.threshold
    if not keep.any():
        raise PreprocessError(f"all {rssi.shape[1]} APs dropped at threshold {spec.threshold}")
    kept = np.where(absent[:, keep], spec.floor, rssi[:, keep])
    return LocalizationDataset(
        rssi=_minmax(kept),
        positions=_minmax(coords),
        ap_names=[n for n, k in zip(names, keep) if k],
        aps_before=before,
        aps_after=int(keep.sum()),
    )


def split(ds, spec: SplitSpec = SplitSpec()):
    n = len(ds)
    if n < 2:
        raise ConfigError("need at least 2 rows to split")
    order = np.random.default_rng(spec.seed).permutation(n)
    n_train = min(max(int(round(spec.train_fraction * n)), 1), n - 1)
    return ds.take(np.sort(order[:n_train])), ds.take(np.sort(order[n_train:]))


SYNTH_COEFS = np.array([1.5, 0.0, -1.0, 0.0, 0.5])
SYNTH_NOISE_STD = 0.3
SYNTH_OUTLIER_SCALE = 10.0


def synth_regression(n: int, outlier_fraction: float = 0.0, seed: int = 0) -> TabularDataset:
    """Five standard-normal features, sparse linear rule plus a mild bump.

    ``y = x @ SYNTH_COEFS + 0.5 sin(x1) + 0.25 x3^2 + noise`` where the
    noise is ``N(0, SYNTH_NOISE_STD^2)``. A random ``outlier_fraction`` of
    rows (marked in ``corrupted``) take noise ten times wider, drawn from
    a Laplace distribution.
    """
    if n < 10:
        raise ConfigError("synthetic regression needs n >= 10")
    if not 0.0 <= outlier_fraction < 0.5:
        raise ConfigError("outlier fraction must be in [0, 0.5)")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, 5))
    clean = x @ SYNTH_COEFS + 0.5 * np.sin(x[:, 1]) + 0.25 * x[:, 3] ** 2
    noise = SYNTH_NOISE_STD * rng.standard_normal(n)
    corrupted = np.zeros(n, dtype=bool)
    corrupted[rng.permutation(n)[: int(round(outlier_fraction * n))]] = True
    scale = SYNTH_OUTLIER_SCALE * SYNTH_NOISE_STD / np.sqrt(2.0)
    noise[corrupted] = rng.laplace(0.0, scale, corrupted.sum())
    return TabularDataset(
        features=x,
        targets=(clean + noise)[:, None],
        feature_names=[f"x{i}" for i in range(5)],
        target_names=["y"],
        corrupted=corrupted,
    )


def synth_localization(
    n_users: int,
    n_aps: int = 16,
    seed: int = 0,
    p0_dbm: float = 40.0,
    path_loss_exp: float = 3.0,
    shadowing_db: float = 4.0,
    normalize: bool = True,
    users=None,
):
    """Log-distance RSSI fingerprints for users in the unit square.

    APs sit on a regular grid covering the square; the RSSI of AP ``l`` at
    distance ``r`` is ``-p0 - 10 * gamma * log10(max(r, 1e-3))`` plus
    Gaussian shadowing. With ``normalize=False`` raw dBm and coordinates are
    returned (and ``shadowing_db=0`` gives the noiseless field). ``users``
    overrides the random user positions.
    """
    if n_aps < 3:
        raise ConfigError("need at least 3 access points")
    rng = np.random.default_rng(seed)
    side = int(np.ceil(np.sqrt(n_aps)))
    grid = (np.arange(side) + 0.5) / side
    gx, gy = np.meshgrid(grid, grid)
    aps = np.column_stack([gx.ravel(), gy.ravel()])[:n_aps]
    if users is None:
        users = rng.uniform(0.0, 1.0, size=(n_users, 2))
    else:
        users = np.asarray(users, dtype=np.float64).reshape(-1, 2)
    dist = np.linalg.norm(users[:, None, :] - aps[None, :, :], axis=2)
    rssi = -p0_dbm - 10.0 * path_loss_exp * np.log10(np.maximum(dist, 1e-3))
    rssi = rssi + shadowing_db * rng.standard_normal(rssi.shape)
    names = [f"{UJI_AP_PREFIX}{i + 1:03d}" for i in range(n_aps)]
    if normalize:
        rssi, users = _minmax(rssi), _minmax(users)
    return LocalizationDataset(rssi, users, names, n_aps, n_aps, ap_positions=aps)
