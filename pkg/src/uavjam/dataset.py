"""Dataset synthesis across a configuration grid, the on-disk tree,
window extraction, and trace-granular fold splitting.

Tree layout: root/<group>/scenario_%04d/{rssi.csv, sinr.csv, meta.txt},
with group in {none_speed, attacker_speed, user_speed, both_speed}.
CSV files carry a `slot,value` header and 9-significant-digit values.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .channel import RadioConstants, synthesize_measurements
from .errors import ConfigError, DataError, DegenerateInput
from .scenario import MASK64, MobilityGroup, ScenarioConfig, config_from_items, config_items, seeded_rng

GROUP_DIRS = ("none_speed", "attacker_speed", "user_speed", "both_speed")

DEFAULT_WINDOW = 256
DEFAULT_STRIDE = 128


class BinaryLabel(enum.Enum):
    NO_JAMMING = "No Jamming"
    YES_JAMMING = "Yes Jamming"


class MotionLabel(enum.Enum):
    FIXED_JAMMING = "Fixed Jamming"
    MOVING_JAMMING = "Moving Jamming"


def labels_for(config: ScenarioConfig):
    """Binary label from attacker count; motion label only on jammed traces."""
    if config.num_attackers < 1:
        return BinaryLabel.NO_JAMMING, None
    if config.mobility_group.attackers_move:
        return BinaryLabel.YES_JAMMING, MotionLabel.MOVING_JAMMING
    return BinaryLabel.YES_JAMMING, MotionLabel.FIXED_JAMMING


@dataclass
class TracePair:
    rssi: np.ndarray
    sinr: np.ndarray
    binary_label: BinaryLabel
    motion_label: MotionLabel | None
    config: ScenarioConfig
    seed: int
    trace_id: str = ""


def synthesize_trace(config: ScenarioConfig, seed, constants=None,
                     jammer_onset_slot=None) -> TracePair:
    rssi, sinr = synthesize_measurements(config, seed, constants, jammer_onset_slot)
    binary, motion = labels_for(config)
    return TracePair(rssi, sinr, binary, motion,
                     replace(config, seed=int(seed) & MASK64), int(seed) & MASK64)


def _write_series(path, values):
    with open(path, "w", newline="\n") as f:
        f.write("slot,value\n")
        for i, v in enumerate(values):
            f.write(f"{i},{v:.9g}\n")


def _read_series(path):
    with open(path) as f:
        header = f.readline().strip()
        if header != "slot,value":
            raise DataError(f"{path}: unexpected header {header!r}")
        return np.array([float(line.split(",", 1)[1]) for line in f])


def write_trace_folder(folder, trace: TracePair):
    os.makedirs(folder, exist_ok=True)
    _write_series(os.path.join(folder, "rssi.csv"), trace.rssi)
    _write_series(os.path.join(folder, "sinr.csv"), trace.sinr)
    with open(os.path.join(folder, "meta.txt"), "w", newline="\n") as f:
        for k, v in config_items(trace.config):
            f.write(f"{k}={v}\n")
        f.write(f"canonical={str(trace.config.is_canonical).lower()}\n")
        f.write(f"binary_label={trace.binary_label.value}\n")
        if trace.motion_label is not None:
            f.write(f"motion_label={trace.motion_label.value}\n")


def read_trace_folder(folder, trace_id=""):
    meta = {}
    with open(os.path.join(folder, "meta.txt")) as f:
        for line in f:
            line = line.rstrip("\n")
            if line:
                k, v = line.split("=", 1)
                meta[k] = v
    config = config_from_items(meta)
    motion = MotionLabel(meta["motion_label"]) if "motion_label" in meta else None
    return TracePair(
        rssi=_read_series(os.path.join(folder, "rssi.csv")),
        sinr=_read_series(os.path.join(folder, "sinr.csv")),
        binary_label=BinaryLabel(meta["binary_label"]),
        motion_label=motion,
        config=config,
        seed=int(meta["seed"]),
        trace_id=trace_id,
    )


def trace_seed(master_seed, index):
    # counter-based stream split: scenarios are independent and parallelizable
    return (int(master_seed) ^ int(index)) & MASK64


def _synthesize_one(args):
    index, config, master_seed, root, constants = args
    folder = os.path.join(root, config.mobility_group.value, f"scenario_{index:04d}")
    try:
        trace = synthesize_trace(config, trace_seed(master_seed, index), constants)
    except Exception as exc:
        raise type(exc)(f"{exc} (grid index {index}: {_describe_cell(config)})") from exc
    write_trace_folder(folder, trace)
    return folder


def _describe_cell(config: ScenarioConfig):
    return (f"users={config.num_users} attackers={config.num_attackers} "
            f"power={config.attacker_power_dbm:g}dBm "
            f"distance={config.serving_distance_m:g}m "
            f"group={config.mobility_group.value}")


def synthesize_dataset(grid, master_seed, root, constants=None, jobs=1):
    """One folder per grid entry; fully deterministic under master_seed."""
    if not grid:
        raise ConfigError("configuration grid is empty")
    constants = constants or RadioConstants()
    os.makedirs(root, exist_ok=True)
    work = [(i, cfg, master_seed, root, constants) for i, cfg in enumerate(grid)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(_synthesize_one, work, chunksize=4))
    else:
        for item in work:
            _synthesize_one(item)
    return root


def load_dataset(root):
    traces = []
    for group in GROUP_DIRS:
        gdir = os.path.join(root, group)
        if not os.path.isdir(gdir):
            continue
        for name in sorted(os.listdir(gdir)):
            folder = os.path.join(gdir, name)
            if os.path.isdir(folder):
                traces.append(read_trace_folder(folder, trace_id=f"{group}/{name}"))
    if not traces:
        raise DataError(f"no trace folders under {root}")
    return traces


def _next_pow2(n):
    return 1 << max(0, math.ceil(math.log2(max(1, n))))


def select_window_size(series_list, max_lag=512):
    """Window size from the mean normalized autocorrelation across traces.

    L = first lag where the mean ACF drops below 1/e; W = next power of two
    >= 4L, clamped to [64, 1024].
    """
    if not series_list:
        raise ConfigError("need at least one series")
    acfs = []
    for x in series_list:
        x = np.asarray(x, dtype=float)
        if len(x) < 512:
            raise ConfigError("series shorter than 512 slots")
        v = x - x.mean()
        denom = float(v @ v)
        if denom <= 1e-24 * len(x):
            raise DegenerateInput("constant series has no autocorrelation structure")
        lags = min(max_lag, len(x) - 1)
        acf = np.empty(lags + 1)
        for lag in range(lags + 1):
            acf[lag] = float(v[: len(v) - lag] @ v[lag:]) / denom
        acfs.append(acf)
    mean_acf = np.mean(np.stack(acfs), axis=0)
    below = np.nonzero(mean_acf[1:] < 1.0 / math.e)[0]
    lag_scale = int(below[0]) + 1 if len(below) else len(mean_acf) - 1
    return int(min(max(_next_pow2(4 * lag_scale), 64), 1024))


def standardize_window(x):
    """Zero-mean, unit-variance copy (float64); guards all-equal windows."""
    x = np.asarray(x, dtype=np.float64)
    std = x.std()
    return (x - x.mean()) / (std if std > 1e-12 else 1.0)


@dataclass
class WindowedExample:
    rssi_window: np.ndarray
    sinr_window: np.ndarray
    binary_label: BinaryLabel
    motion_label: MotionLabel | None
    trace_id: str
    offset: int


class WindowSet:
    """Stacked standardized windows plus per-trace provenance."""

    def __init__(self, rssi, sinr, y_binary, y_motion, trace_idx, offsets,
                 traces, window, stride):
        self.rssi = rssi  # [N, W] float32
        self.sinr = sinr
        self.y_binary = y_binary  # 0 = No Jamming, 1 = Yes Jamming
        self.y_motion = y_motion  # -1 = none, 0 = Fixed, 1 = Moving
        self.trace_idx = trace_idx
        self.offsets = offsets
        self.traces = traces  # list of provenance dicts
        self.window = window
        self.stride = stride

    def __len__(self):
        return len(self.rssi)

    def example(self, i) -> WindowedExample:
        t = self.traces[self.trace_idx[i]]
        motion = MotionLabel(t["motion_label"]) if t["motion_label"] else None
        return WindowedExample(
            rssi_window=self.rssi[i], sinr_window=self.sinr[i],
            binary_label=BinaryLabel(t["binary_label"]), motion_label=motion,
            trace_id=t["trace_id"], offset=int(self.offsets[i]),
        )

    def subset(self, idx):
        idx = np.asarray(idx)
        return WindowSet(self.rssi[idx], self.sinr[idx], self.y_binary[idx],
                         self.y_motion[idx], self.trace_idx[idx], self.offsets[idx],
                         self.traces, self.window, self.stride)

    def trace_ids_of(self, idx):
        return {self.traces[t]["trace_id"] for t in np.unique(self.trace_idx[np.asarray(idx)])}

    def save_npz(self, path):
        prov = self.traces
        np.savez(
            path,
            rssi=self.rssi, sinr=self.sinr, y_binary=self.y_binary,
            y_motion=self.y_motion, trace_idx=self.trace_idx, offsets=self.offsets,
            window=self.window, stride=self.stride,
            t_trace_id=np.array([t["trace_id"] for t in prov]),
            t_users=np.array([t["num_users"] for t in prov], dtype=np.int32),
            t_attackers=np.array([t["num_attackers"] for t in prov], dtype=np.int32),
            t_power=np.array([t["attacker_power_dbm"] for t in prov]),
            t_distance=np.array([t["serving_distance_m"] for t in prov]),
            t_group=np.array([t["mobility_group"] for t in prov]),
            t_seed=np.array([t["seed"] for t in prov], dtype=np.uint64),
            t_binary=np.array([t["binary_label"] for t in prov]),
            t_motion=np.array([t["motion_label"] or "" for t in prov]),
        )

    @classmethod
    def load_npz(cls, path):
        z = np.load(path, allow_pickle=False)
        traces = [
            {
                "trace_id": str(z["t_trace_id"][i]),
                "num_users": int(z["t_users"][i]),
                "num_attackers": int(z["t_attackers"][i]),
                "attacker_power_dbm": float(z["t_power"][i]),
                "serving_distance_m": float(z["t_distance"][i]),
                "mobility_group": str(z["t_group"][i]),
                "seed": int(z["t_seed"][i]),
                "binary_label": str(z["t_binary"][i]),
                "motion_label": str(z["t_motion"][i]) or None,
            }
            for i in range(len(z["t_trace_id"]))
        ]
        return cls(z["rssi"], z["sinr"], z["y_binary"], z["y_motion"],
                   z["trace_idx"], z["offsets"], traces,
                   int(z["window"]), int(z["stride"]))


def _provenance(trace: TracePair):
    return {
        "trace_id": trace.trace_id or f"seed_{trace.seed}",
        "num_users": trace.config.num_users,
        "num_attackers": trace.config.num_attackers,
        "attacker_power_dbm": trace.config.attacker_power_dbm,
        "serving_distance_m": trace.config.serving_distance_m,
        "mobility_group": trace.config.mobility_group.value,
        "seed": trace.seed,
        "binary_label": trace.binary_label.value,
        "motion_label": trace.motion_label.value if trace.motion_label else None,
    }


def window_traces(traces, window=DEFAULT_WINDOW, stride=DEFAULT_STRIDE) -> WindowSet:
    """Sliding standardized windows; count per trace = floor((N-W)/stride)+1."""
    if not traces:
        raise DataError("no traces to window")
    if stride < 1:
        raise ConfigError("stride must be >= 1")
    rssi_rows, sinr_rows, y_bin, y_mot, t_idx, offs = [], [], [], [], [], []
    prov = []
    for ti, trace in enumerate(traces):
        n = len(trace.rssi)
        if window > n:
            raise ConfigError(f"window {window} exceeds trace length {n}")
        prov.append(_provenance(trace))
        b = 1 if trace.binary_label is BinaryLabel.YES_JAMMING else 0
        if trace.motion_label is None:
            m = -1
        else:
            m = 1 if trace.motion_label is MotionLabel.MOVING_JAMMING else 0
        for start in range(0, n - window + 1, stride):
            rssi_rows.append(standardize_window(trace.rssi[start:start + window]))
            sinr_rows.append(standardize_window(trace.sinr[start:start + window]))
            y_bin.append(b)
            y_mot.append(m)
            t_idx.append(ti)
            offs.append(start)
    return WindowSet(
        np.asarray(rssi_rows, dtype=np.float32),
        np.asarray(sinr_rows, dtype=np.float32),
        np.asarray(y_bin, dtype=np.int8),
        np.asarray(y_mot, dtype=np.int8),
        np.asarray(t_idx, dtype=np.int32),
        np.asarray(offs, dtype=np.int32),
        prov, window, stride,
    )


def window_dataset(root, window=DEFAULT_WINDOW, stride=DEFAULT_STRIDE) -> WindowSet:
    return window_traces(load_dataset(root), window, stride)


def split_folds(windows: WindowSet, k=5, seed=0):
    """Trace-granular stratified partition; returns k example-index arrays."""
    if k < 2:
        raise ConfigError("k must be >= 2")
    n_traces = len(windows.traces)
    if n_traces < k:
        raise ConfigError(f"need at least {k} traces for {k} folds, have {n_traces}")
    rng = seeded_rng(seed, 7)
    fold_of_trace = np.empty(n_traces, dtype=np.int32)
    counter = 0
    for label in (0, 1):
        members = [t for t in range(n_traces)
                   if (windows.traces[t]["binary_label"] == BinaryLabel.YES_JAMMING.value) == bool(label)]
        members = list(rng.permutation(members))
        for t in members:
            fold_of_trace[t] = counter % k
            counter += 1
    folds = []
    for f in range(k):
        mask = fold_of_trace[windows.trace_idx] == f
        folds.append(np.nonzero(mask)[0])
    return folds


def match_traces(windows: WindowSet, **selectors):
    """Boolean trace mask from provenance equality, e.g. attacker_power_dbm=2."""
    mask = np.ones(len(windows.traces), dtype=bool)
    for key, val in selectors.items():
        col = np.array([t[key] for t in windows.traces])
        mask &= (col == val)
    return mask


def holdout_split(windows: WindowSet, **selectors):
    """Example indices (kept, held_out) by trace-level selector match."""
    t_mask = match_traces(windows, **selectors)
    ex_mask = t_mask[windows.trace_idx]
    return np.nonzero(~ex_mask)[0], np.nonzero(ex_mask)[0]
