"""GMM JSON files and CSV tables.

GMM files hold one object::

    {"weights": [...], "means": [[...], ...], "covariances": [[[...]], ...]}

with row-major covariance matrices.
"""
from __future__ import annotations

import csv
import json
import logging
from pathlib import Path
from typing import Iterable, List, Mapping, Sequence

import numpy as np

from .errors import NotSpd, ParseError, ValidationError
from .gaussian import Gaussian
from .mixture import Gmm

log = logging.getLogger(__name__)

RENORMALIZE_TOL = 1e-9


def gmm_from_dict(data: Mapping) -> Gmm:
    if not isinstance(data, Mapping):
        raise ValidationError("GMM document must be a JSON object")
    missing = [k for k in ("weights", "means", "covariances") if k not in data]
    if missing:
        raise ValidationError(f"missing keys: {', '.join(missing)}")
    try:
        weights = np.asarray(data["weights"], dtype=float).reshape(-1)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"weights: {exc}") from exc
    means, covs = data["means"], data["covariances"]
    if not (len(weights) == len(means) == len(covs)):
        raise ValidationError(
            f"{len(weights)} weights, {len(means)} means and {len(covs)} covariances"
        )
    if len(weights) == 0:
        raise ValidationError("mixture has no components")
    if np.any(~np.isfinite(weights)) or np.any(weights < 0):
        raise ValidationError("weights must be finite and nonnegative")
    total = weights.sum()
    if abs(total - 1.0) > RENORMALIZE_TOL:
        raise ValidationError(f"weights sum to {total!r}, not 1")
    if total != 1.0:
        log.warning("renormalized weights (sum was %r)", total)
        weights = weights / total

    components: List[Gaussian] = []
    dim = None
    for k, (m, c) in enumerate(zip(means, covs)):
        try:
            mean = np.asarray(m, dtype=float).reshape(-1)
            cov = np.asarray(c, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"component {k}: {exc}") from exc
        if dim is None:
            dim = mean.shape[0]
        if mean.shape[0] != dim or cov.shape != (dim, dim):
            raise ValidationError(
                f"component {k}: mean {mean.shape} / covariance {cov.shape} do not match dim {dim}"
            )
        try:
            components.append(Gaussian(mean, cov))
        except (NotSpd, ValueError) as exc:
            raise ValidationError(f"component {k}: covariance is not SPD ({exc})") from exc
    return Gmm(weights, components)


def gmm_to_dict(gmm: Gmm) -> dict:
    return {
        "weights": gmm.weights.tolist(),
        "means": [c.mean.tolist() for c in gmm.components],
        "covariances": [c.cov.entries.tolist() for c in gmm.components],
    }


def load_gmm(path) -> Gmm:
    """Read and validate a GMM JSON file.

    Raises
    ------
    OSError
        The file cannot be read.
    ParseError
        The file is not valid JSON.
    ValidationError
        The document is structurally wrong, a covariance is not SPD, or the
        weights do not sum to one within 1e-9.
    """
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    try:
        return gmm_from_dict(data)
    except ValidationError as exc:
        raise type(exc)(f"{path}: {exc}") from exc


def save_gmm(gmm: Gmm, path) -> None:
    Path(path).write_text(json.dumps(gmm_to_dict(gmm), indent=2))


def write_csv(path_or_file, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Write an RFC 4180 table; floats keep full repr precision."""
    if hasattr(path_or_file, "write"):
        _write(path_or_file, header, rows)
        return
    with open(path_or_file, "w", newline="") as fh:
        _write(fh, header, rows)


def _write(fh, header, rows):
    w = csv.writer(fh, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    return v


def read_csv(path) -> List[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_snapshots(path, snapshots: Mapping[float, np.ndarray]) -> None:
    """Particle snapshots as rows (particle_id, t, x_1..x_d)."""
    if not snapshots:
        write_csv(path, ["particle_id", "t"], [])
        return
    dim = next(iter(snapshots.values())).shape[1]
    header = ["particle_id", "t"] + [f"x_{k + 1}" for k in range(dim)]

    def rows():
        for t in sorted(snapshots):
            for pid, x in enumerate(snapshots[t]):
                yield [pid, float(t)] + [float(v) for v in x]

    write_csv(path, header, rows())
