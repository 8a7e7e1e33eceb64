"""Plain key=value configuration with package defaults."""

from __future__ import annotations

from pathlib import Path

DEFAULTS = {
    "seed": 20240501,
    "cache_dir": "",
    "depth_extra": 8,
    "tol_exp": 10,
    "geom_run": 3,
    "geom_guard": 1,
    "point_cap": 10**6,
    "mc_samples": 10**6,
    "mc_depth_extra": 6,
}

_INT_KEYS = {k for k, v in DEFAULTS.items() if isinstance(v, int)}


def load_config(path=None) -> dict:
    cfg = dict(DEFAULTS)
    if path is None:
        return cfg
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in cfg:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        cfg[key] = int(value) if key in _INT_KEYS else value
    return cfg


def integrator_options(cfg):
    from .integrate import IntegratorOptions

    return IntegratorOptions(depth_extra=cfg["depth_extra"], tol_exp=cfg["tol_exp"],
                             geom_run=cfg["geom_run"], geom_guard=cfg["geom_guard"])
