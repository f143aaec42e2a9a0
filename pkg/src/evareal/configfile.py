"""Flat `key = value` run-configuration files with dotted section prefixes."""

from __future__ import annotations

from .kinematics import ConfigError, SimConfig

__all__ = ["KEYMAP", "parse_config", "parse_config_text", "write_config"]

# dotted file key -> (SimConfig attribute, parser)
KEYMAP = {
    "run.K": ("K", int),
    "run.Lambda": ("Lambda", float),
    "run.t0": ("t0", float),
    "run.t_end": ("t_end", float),
    "run.cfl": ("cfl", float),
    "run.dt_cap": ("dt_cap", float),
    "run.dt_max": ("dt_max", float),
    "run.output_every": ("output_every", int),
    "run.snapshot_every": ("snapshot_every", int),
    "grid.Nr": ("Nr", int),
    "grid.Nw": ("Nw", int),
    "grid.NF": ("NF", int),
    "grid.w_max": ("w_max", float),
    "grid.F_max": ("F_max", float),
    "init.f0": ("f0", float),
    "init.A": ("A", float),
    "init.w_sup": ("w_sup", float),
    "init.F_sup": ("F_sup", float),
    "init.lambda_amp": ("lambda_amp", float),
    "init.mu_offset": ("mu_offset", float),
    "norm.z": ("z", float),
    "norm.l": ("l_norm", int),
}

_ATTR_TO_KEY = {attr: key for key, (attr, _) in KEYMAP.items()}


def parse_config_text(text: str, source: str = "<config>") -> SimConfig:
    cfg = SimConfig()
    errs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errs.append(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in KEYMAP:
            errs.append(f"{source}:{lineno}: unknown key {key!r}")
            continue
        attr, conv = KEYMAP[key]
        try:
            setattr(cfg, attr, conv(val))
        except ValueError:
            errs.append(f"{source}:{lineno}: cannot parse {val!r} as {conv.__name__} for {key}")
    if errs:
        raise ConfigError(errs)
    return cfg


def parse_config(path: str) -> SimConfig:
    with open(path) as fh:
        text = fh.read()
    return parse_config_text(text, source=path)


def write_config(cfg: SimConfig, path: str) -> str:
    with open(path, "w") as fh:
        for key, (attr, conv) in KEYMAP.items():
            fh.write(f"{key} = {getattr(cfg, attr)}\n")
    return path
