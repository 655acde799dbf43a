"""CSV input parsing and report/trajectory/manifest output."""

import csv
import json
import logging
import math

import numpy as np

from ..errors import ValidationError
from .fusion import Measurement, SensorStream

log = logging.getLogger(__name__)

SUMMARY_HEADER = ("filter", "component", "mse_mean", "mse_std", "iter_mean", "iter_max", "fallbacks")
GT_COLUMNS = ("gt_px", "gt_py", "gt_vx", "gt_vy")


def fmt(value):
    """Shortest round-trip text for a float (17 significant digits max)."""
    value = float(value)
    if math.isnan(value):
        return "nan"
    return repr(value)


def _float(text, path, lineno, what):
    try:
        return float(text)
    except ValueError:
        raise ValidationError(f"{path}:{lineno}: cannot parse {what} {text!r}") from None


def _open(path):
    try:
        return open(path, newline="")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None


def read_fusion_csv(path, time_scale=1.0):
    """Parse ``timestamp,sensor,v1,v2,v3[,gt_px,gt_py,gt_vx,gt_vy]``.

    Lidar rows (sensor ``L``) carry px, py and a blank third value; radar
    rows (``R``) carry range, bearing and range rate. Bearings are wrapped
    to (-pi, pi]. Rows sharing a timestamp form one group.

    Args:
        path: CSV file.
        time_scale: Seconds per timestamp unit.

    Returns:
        SensorStream with truth when all ground-truth columns are present.

    Raises:
        ValidationError: On a malformed row (message carries the line number).
    """
    from ..systems import wrap_angle

    with _open(path) as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        if header[:5] != ["timestamp", "sensor", "v1", "v2", "v3"]:
            raise ValidationError(f"{path}:1: expected header timestamp,sensor,v1,v2,v3")
        has_gt = all(c in header for c in GT_COLUMNS)
        gt_idx = [header.index(c) for c in GT_COLUMNS] if has_gt else []
        times, groups, truth = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 5:
                raise ValidationError(f"{path}:{lineno}: expected at least 5 fields, got {len(row)}")
            t = _float(row[0], path, lineno, "timestamp") * time_scale
            sensor = row[1].strip().upper()
            if sensor == "L":
                values = np.array([_float(row[2], path, lineno, "v1"), _float(row[3], path, lineno, "v2")])
            elif sensor == "R":
                values = np.array([_float(row[k], path, lineno, f"v{k - 1}") for k in (2, 3, 4)])
                values[1] = wrap_angle(values[1])
            else:
                raise ValidationError(f"{path}:{lineno}: sensor must be L or R, got {row[1]!r}")
            if not np.all(np.isfinite(values)):
                raise ValidationError(f"{path}:{lineno}: non-finite measurement")
            gt = [_float(row[i], path, lineno, GT_COLUMNS[j]) for j, i in enumerate(gt_idx)] if has_gt else None
            meas = Measurement(sensor, values)
            if times and t == times[-1]:
                groups[-1].append(meas)
            else:
                if times and t < times[-1]:
                    raise ValidationError(f"{path}:{lineno}: timestamps must not decrease")
                times.append(t)
                groups.append([meas])
                truth.append(gt)
    if not groups:
        raise ValidationError(f"{path}: no measurements")
    return SensorStream(
        np.array(times), tuple(tuple(g) for g in groups),
        np.array(truth, dtype=float) if has_gt else None,
    )


def read_sir_csv(path):
    """Parse ``week,ili_fraction``; values outside [0, 1] are clamped with a warning."""
    values = []
    with _open(path) as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        if header[:2] != ["week", "ili_fraction"]:
            raise ValidationError(f"{path}:1: expected header week,ili_fraction")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 2:
                raise ValidationError(f"{path}:{lineno}: expected 2 fields")
            v = _float(row[1], path, lineno, "ili_fraction")
            if not math.isfinite(v):
                raise ValidationError(f"{path}:{lineno}: non-finite value")
            if v < 0.0 or v > 1.0:
                clamped = min(max(v, 0.0), 1.0)
                log.warning("%s:%d: ili_fraction %r outside [0, 1], clamped to %r", path, lineno, v, clamped)
                v = clamped
            values.append(v)
    if not values:
        raise ValidationError(f"{path}: no data rows")
    return np.array(values)


def write_summary_csv(report, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_HEADER)
        for row in report.rows():
            writer.writerow([row.filter, row.component, fmt(row.mse_mean), fmt(row.mse_std),
                             fmt(row.iter_mean), row.iter_max, row.fallbacks])


def write_per_run_csv(report, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("run", "filter", "component", "mse"))
        for label in report.filters:
            for r, values in enumerate(report.per_run[label]):
                for comp, v in zip(report.components, values):
                    writer.writerow([r, label, comp, fmt(v)])


def _slug(label):
    return label.replace("/", "_")


def write_trajectory_csv(record, path):
    """Write ``k,truth_1..n,est_<filter>_1..n`` rows."""
    n = record.truth.shape[1]
    labels = list(record.estimates)
    header = ["k"] + [f"truth_{i + 1}" for i in range(n)]
    for label in labels:
        header += [f"est_{_slug(label)}_{i + 1}" for i in range(n)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for k in range(record.truth.shape[0]):
            row = [k + 1] + [fmt(v) for v in record.truth[k]]
            for label in labels:
                row += [fmt(v) for v in record.estimates[label][k]]
            writer.writerow(row)


def write_manifest(path, payload):
    """Deterministic JSON: sorted keys, no timestamps."""
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
