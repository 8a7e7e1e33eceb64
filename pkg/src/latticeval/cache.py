"""Content-addressed on-disk cache for operator matrices and reports.

Files are JSON with a format version and a checksum over the canonical
payload; reads verify the checksum and silently recompute on mismatch.
The directory is taken from the LATTICEVAL_CACHE environment variable,
then the configuration, then a per-user default.
"""

from __future__ import annotations

import hashlib
import json
import os
import warnings
from pathlib import Path

FORMAT_VERSION = 1
ENV_VAR = "LATTICEVAL_CACHE"


def cache_dir(override=None) -> Path:
    if override:
        d = Path(override)
    elif os.environ.get(ENV_VAR):
        d = Path(os.environ[ENV_VAR])
    else:
        d = Path.home() / ".cache" / "latticeval"
    d.mkdir(parents=True, exist_ok=True)
    return d


def cache_key(kind: str, **params) -> str:
    parts = [kind] + [f"{k}={params[k]}" for k in sorted(params)]
    return "|".join(parts)


def _path_for(key: str, directory) -> Path:
    h = hashlib.sha256(key.encode()).hexdigest()[:32]
    return cache_dir(directory) / f"{h}.json"


def _checksum(payload) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def put(key: str, payload, directory=None) -> Path:
    path = _path_for(key, directory)
    doc = {
        "format": FORMAT_VERSION,
        "key": key,
        "checksum": _checksum(payload),
        "payload": payload,
    }
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(doc, sort_keys=True))
    tmp.replace(path)
    return path


def get(key: str, directory=None):
    path = _path_for(key, directory)
    if not path.exists():
        return None
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError):
        warnings.warn(f"unreadable cache file {path}; recomputing")
        return None
    if doc.get("format") != FORMAT_VERSION:
        return None
    if doc.get("key") != key:
        return None
    if _checksum(doc.get("payload")) != doc.get("checksum"):
        warnings.warn(f"cache checksum mismatch for {key}; recomputing")
        return None
    return doc["payload"]


def clear(directory=None) -> int:
    d = cache_dir(directory)
    n = 0
    for f in d.glob("*.json"):
        f.unlink()
        n += 1
    return n


# ---------------------------------------------------------------------------
# cached operator builders
# ---------------------------------------------------------------------------

def cached_cosine(field, n, i, r, options=None, directory=None):
    from .integrate import IntegratorOptions
    from .transforms import OperatorMatrix, cosine_matrix

    opts = options or IntegratorOptions()
    key = cache_key("cosine", model=field.kind, q=field.q, n=n, k=i, r=r,
                    depth=opts.depth_extra, tol=opts.tol_exp, geom=opts.geom_run)
    payload = get(key, directory)
    if payload is not None:
        return OperatorMatrix.from_json(payload)
    m = cosine_matrix(field, n, i, r, opts)
    put(key, m.to_json(), directory)
    return m


def cached_radon(field, n, p, qdim, r, containing=False, directory=None):
    from .transforms import OperatorMatrix, radon_avg_containing, radon_matrix

    kind = "radon-containing" if containing else "radon"
    key = cache_key(kind, model=field.kind, q=field.q, n=n, p=p, qdim=qdim, r=r)
    payload = get(key, directory)
    if payload is not None:
        return OperatorMatrix.from_json(payload)
    m = (radon_avg_containing if containing else radon_matrix)(field, n, p, qdim, r)
    put(key, m.to_json(), directory)
    return m


def cached_fourier(field, n, k, r, directory=None):
    from .transforms import OperatorMatrix, fourier_matrix

    key = cache_key("fourier", model=field.kind, q=field.q, n=n, k=k, r=r)
    payload = get(key, directory)
    if payload is not None:
        return OperatorMatrix.from_json(payload)
    m = fourier_matrix(field, n, k, r)
    put(key, m.to_json(), directory)
    return m
