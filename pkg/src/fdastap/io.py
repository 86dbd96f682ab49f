"""On-disk formats: covariance container, DPSS cache, long-format CSV and run
manifests."""
from __future__ import annotations

import csv
import hashlib
import json
import platform
import struct
from pathlib import Path

import numpy as np
import scipy

from .errors import ConfigError
from .hermitian import Domain, HermitianCov
from .slepian import DpssSet

COV_MAGIC = b"FDCV"
COV_VERSION = 1
DPSS_MAGIC = b"FDSB"
DPSS_VERSION = 1

# magic, version, domain code, dim a, dim b, matrix size
_COV_HEADER = struct.Struct("<4sHHiiq")
# magic, version, length, half bandwidth, number of stored vectors
_DPSS_HEADER = struct.Struct("<4sHidi")
_DOMAIN_CODES = {Domain.PHYSICAL: 0, Domain.COARRAY_SMOOTHED: 1, Domain.COARRAY_RECOVERED: 2}


def save_covariance(path, cov: HermitianCov) -> Path:
    """Header followed by the row-major matrix as interleaved float64 re/im."""
    path = Path(path)
    header = _COV_HEADER.pack(COV_MAGIC, COV_VERSION, _DOMAIN_CODES[cov.domain], *cov.dims, cov.size)
    body = np.ascontiguousarray(cov.matrix, dtype="<c16").tobytes()
    path.write_bytes(header + body)
    return path


def load_covariance(path) -> HermitianCov:
    raw = Path(path).read_bytes()
    if len(raw) < _COV_HEADER.size:
        raise ConfigError(f"{path}: truncated covariance header")
    magic, version, code, a, b, n = _COV_HEADER.unpack_from(raw)
    if magic != COV_MAGIC:
        raise ConfigError(f"{path}: not a covariance file")
    if version != COV_VERSION:
        raise ConfigError(f"{path}: unsupported covariance format version {version}")
    body = raw[_COV_HEADER.size:]
    if len(body) != 16 * n * n:
        raise ConfigError(f"{path}: expected {n}x{n} complex entries, got {len(body)} bytes")
    domain = {v: k for k, v in _DOMAIN_CODES.items()}[code]
    m = np.frombuffer(body, dtype="<c16").reshape(n, n).copy()
    return HermitianCov(m, domain, (a, b))


class DpssCache:
    """Directory of DPSS sets keyed by length, half bandwidth and kept order."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, M_T: int, half_bw: float, N_T: int) -> Path:
        return self.root / f"dpss_{M_T}_{half_bw.hex()}_{N_T}.bin"

    def get(self, M_T: int, half_bw: float, N_T: int) -> DpssSet | None:
        path = self._path(M_T, half_bw, N_T)
        if not path.exists():
            return None
        raw = path.read_bytes()
        magic, version, m, w, k = _DPSS_HEADER.unpack_from(raw)
        if magic != DPSS_MAGIC or version != DPSS_VERSION or (m, w) != (M_T, half_bw):
            return None
        data = np.frombuffer(raw[_DPSS_HEADER.size:], dtype="<f8")
        if data.size != k + M_T * k:
            return None
        return DpssSet(M_T, half_bw, data[k:].reshape(M_T, k).copy(), data[:k].copy())

    def put(self, dpss_set: DpssSet, N_T: int) -> Path:
        k = min(N_T + 1, dpss_set.vectors.shape[1])
        path = self._path(dpss_set.length, dpss_set.half_bandwidth, N_T)
        header = _DPSS_HEADER.pack(DPSS_MAGIC, DPSS_VERSION, dpss_set.length,
                                   dpss_set.half_bandwidth, k)
        body = np.concatenate([dpss_set.eigenvalues[:k],
                               np.ascontiguousarray(dpss_set.vectors[:, :k]).ravel()])
        path.write_bytes(header + body.astype("<f8").tobytes())
        return path

    def get_or_compute(self, M_T: int, half_bw: float, N_T: int) -> DpssSet:
        from .slepian import dpss

        hit = self.get(M_T, half_bw, N_T)
        if hit is not None:
            return hit
        full = dpss(M_T, half_bw)
        self.put(full, N_T)
        return self.get(M_T, half_bw, N_T)


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".12g")
    return str(x)


def write_csv(path, header: list[str], rows) -> Path:
    """Long-format CSV with a header row and fixed float formatting, so the
    bytes depend only on the values."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])
    return path


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"cannot serialize {type(x).__name__}")


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, default=_json_default).encode()
    return hashlib.sha256(blob).hexdigest()


def versions() -> dict:
    from . import __version__

    return {
        "fdastap": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


def write_manifest(out_dir, verb: str, config: dict, seed: int, outputs: list[Path],
                   extra: dict | None = None) -> Path:
    """``manifest.json`` listing every output with its digest; each output
    therefore has a manifest entry."""
    out_dir = Path(out_dir)
    manifest = {
        "verb": verb,
        "config_hash": config_hash(config),
        "config": config,
        "seed": seed,
        "versions": versions(),
        "outputs": {p.name: sha256_file(p) for p in sorted(outputs)},
    }
    if extra:
        manifest.update(extra)
    return write_json(out_dir / "manifest.json", manifest)
