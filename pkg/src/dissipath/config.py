"""Run configuration: JSON files, defaults, presets and validation.

Every field is validated before any command starts computing.
"""
import copy
import json
from importlib import resources
from pathlib import Path

from .errors import ConfigError

DEFAULT_CONFIG = {
    "path": {
        "kind": "h4",
        "a": 1.2,
        "lam_min": 0.6,
        "lam_max": 1.6,
        "s_start": 0.0,
        "s_end": "ts",
        "force_half_ts": False,
        "fcidump_files": [],
    },
    "mesh": {
        "policy": "uniform",
        "n_h": 32,
        "eps_e": None,
        "c_safety": 1.0,
        "profile_samples": 65,
        "ds_fd": 1e-3,
    },
    "filter": {
        "kind": "ideal",
        "n_omega": 100,
        "omega_period": None,
        "alpha": 1.5,
        "width": 100.0,
        "m_s": 64,
        "band": 0.1,
    },
    "jumps": {"pairs": "all", "flavors": ["X", "Y"], "scale": 1.0},
    "evolve": {
        "tau": 0.01,
        "n_t": [1, 5, 10, 50],
        "n_t_schedule": None,
        "stepper": "exact",
        "compare_stepper": None,
        "seed": 0,
    },
    "markov": {
        "geometry": "ts",
        "threshold": 0.01,
        "delta_e_layer": "gap",
        "n_samples": 100000,
        "eta": 0.0,
        "eps": 0.01,
        "seed": 0,
        "synthetic": {"layers": 20, "p": 0.3, "L_mu": 5},
    },
    "filter_sweep": {
        "n_omega": [10, 100, 1000],
        "delta_fractions": [0.01, 0.05, 0.1],
        "dim": 24,
        "seed": 0,
        "eps_leak": [0.1, 0.01, 0.001, 0.0001],
    },
    "resources": {
        "n_omega": 1000,
        "qsvt_eps": 1e-3,
        "cost_uh": 10000,
        "t_per_rz": 50,
        "n_h": 32,
        "n_t": 50,
        "h_norm": 1.0,
        "delta_min": 0.1,
        "eps_e": 1.6e-3,
        "n_o": 4,
        "p0": 0.5,
        "p_succ": 0.5,
    },
    "output_dir": None,
}


def default_config():
    return copy.deepcopy(DEFAULT_CONFIG)


def _merge(base, over, prefix=""):
    for key, val in over.items():
        name = f"{prefix}{key}"
        if key not in base:
            raise ConfigError(name, "unknown field")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(name, "expected a table")
            _merge(base[key], val, name + ".")
        else:
            base[key] = val
    return base


def load_config(path=None, preset=None, overrides=None):
    cfg = default_config()
    if preset:
        _merge(cfg, load_preset(preset))
    if path:
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("<file>", f"cannot read {path}: {exc}") from exc
        _merge(cfg, doc)
    if overrides:
        _merge(cfg, overrides)
    validate(cfg)
    return cfg


def preset_names():
    return sorted(p.name[:-5] for p in resources.files("dissipath").joinpath("presets").iterdir()
                  if p.name.endswith(".json"))


def load_preset(name):
    f = resources.files("dissipath").joinpath("presets", f"{name}.json")
    if not f.is_file():
        raise ConfigError("preset", f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return json.loads(f.read_text())


def _num(cfg, section, key, lo=None, hi=None, strict_lo=True, integer=False, allow_none=False):
    v = cfg[section][key]
    name = f"{section}.{key}"
    if v is None and allow_none:
        return
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(name, f"expected a number, got {v!r}")
    if integer and int(v) != v:
        raise ConfigError(name, f"expected an integer, got {v!r}")
    if lo is not None and (v <= lo if strict_lo else v < lo):
        raise ConfigError(name, f"must be {'>' if strict_lo else '>='} {lo}, got {v}")
    if hi is not None and v > hi:
        raise ConfigError(name, f"must be <= {hi}, got {v}")


def validate(cfg):
    p = cfg["path"]
    if p["kind"] not in ("h4", "fcidump"):
        raise ConfigError("path.kind", "must be 'h4' or 'fcidump'")
    _num(cfg, "path", "a", 0)
    _num(cfg, "path", "lam_min", 0)
    _num(cfg, "path", "lam_max", 0)
    if p["lam_min"] >= p["lam_max"]:
        raise ConfigError("path.lam_min", f"must be below path.lam_max ({p['lam_min']} >= {p['lam_max']})")
    _num(cfg, "path", "s_start", 0, 1, strict_lo=False)
    if p["s_end"] != "ts":
        _num(cfg, "path", "s_end", 0, 1)
        if p["s_end"] <= p["s_start"]:
            raise ConfigError("path.s_end", "must exceed path.s_start")
    if p["kind"] == "fcidump" and len(p["fcidump_files"]) < 2:
        raise ConfigError("path.fcidump_files", "an FCIDUMP path needs at least two files")

    m = cfg["mesh"]
    if m["policy"] not in ("uniform", "equal_mass"):
        raise ConfigError("mesh.policy", "must be 'uniform' or 'equal_mass'")
    _num(cfg, "mesh", "n_h", 1, integer=True, allow_none=m["eps_e"] is not None)
    _num(cfg, "mesh", "eps_e", 0, allow_none=True)
    _num(cfg, "mesh", "c_safety", 0)
    _num(cfg, "mesh", "profile_samples", 2, integer=True)
    _num(cfg, "mesh", "ds_fd", 0, 0.1)

    f = cfg["filter"]
    if f["kind"] not in ("ideal", "square", "gevrey"):
        raise ConfigError("filter.kind", "must be 'ideal', 'square' or 'gevrey'")
    _num(cfg, "filter", "n_omega", 0, integer=True)
    _num(cfg, "filter", "omega_period", 0, allow_none=True)
    _num(cfg, "filter", "alpha", 1)
    _num(cfg, "filter", "width", 0)
    _num(cfg, "filter", "m_s", 2, integer=True)
    _num(cfg, "filter", "band", 0)

    j = cfg["jumps"]
    if j["pairs"] != "all":
        if not isinstance(j["pairs"], list) or not all(
            isinstance(q, list) and len(q) == 2 and all(isinstance(x, int) for x in q) and q[0] < q[1] for q in j["pairs"]
        ):
            raise ConfigError("jumps.pairs", "must be 'all' or a list of [i, j] with i < j")
    if not j["flavors"] or any(fl not in ("X", "Y") for fl in j["flavors"]):
        raise ConfigError("jumps.flavors", "must be a nonempty subset of ['X', 'Y']")
    _num(cfg, "jumps", "scale", 0)

    e = cfg["evolve"]
    _num(cfg, "evolve", "tau", 0)
    nts = e["n_t"] if isinstance(e["n_t"], list) else [e["n_t"]]
    if not nts or any(isinstance(n, bool) or not isinstance(n, int) or n < 1 for n in nts):
        raise ConfigError("evolve.n_t", "must be a positive integer or a list of them")
    sched = e["n_t_schedule"]
    if sched is not None and (not isinstance(sched, list) or not sched or any(
            isinstance(n, bool) or not isinstance(n, int) or n < 1 for n in sched)):
        raise ConfigError("evolve.n_t_schedule", "must be null or a list of positive integers, one per geometry")
    if sched is not None and m["policy"] == "uniform" and p["kind"] == "h4" and len(sched) != m["n_h"]:
        raise ConfigError("evolve.n_t_schedule", f"has {len(sched)} entries for a {m['n_h']}-point mesh")
    for key in ("stepper", "compare_stepper"):
        if e[key] is None and key == "compare_stepper":
            continue
        if e[key] not in ("exact", "strang", "qdrift"):
            raise ConfigError(f"evolve.{key}", "must be 'exact', 'strang' or 'qdrift'")
        if e[key] == "strang" and f["kind"] != "square":
            raise ConfigError(f"evolve.{key}", "the splitting stepper needs filter.kind = 'square'")
    _num(cfg, "evolve", "seed", -1, integer=True)

    mk = cfg["markov"]
    g = mk["geometry"]
    if not (g == "ts" or (isinstance(g, int) and not isinstance(g, bool) and g >= 0)
            or (isinstance(g, dict) and set(g) == {"s"} and isinstance(g["s"], (int, float)))):
        raise ConfigError("markov.geometry", "must be 'ts', a mesh index, or {\"s\": value}")
    _num(cfg, "markov", "threshold", 0, 1)
    if cfg["markov"]["threshold"] >= 1:
        raise ConfigError("markov.threshold", "must lie in (0, 1)")
    if mk["delta_e_layer"] != "gap":
        _num(cfg, "markov", "delta_e_layer", 0)
    _num(cfg, "markov", "n_samples", 0, integer=True)
    _num(cfg, "markov", "eta", 0, 1, strict_lo=False)
    _num(cfg, "markov", "eps", 0, 1)
    syn = mk["synthetic"]
    if not isinstance(syn, dict) or set(syn) != {"layers", "p", "L_mu"}:
        raise ConfigError("markov.synthetic", "needs exactly layers, p, L_mu")
    if not (0 < syn["p"] <= 1) or syn["layers"] < 1 or not 0 <= syn["L_mu"] <= syn["layers"]:
        raise ConfigError("markov.synthetic", "need 0 < p <= 1 and 0 <= L_mu <= layers >= 1")

    fs = cfg["filter_sweep"]
    for key in ("n_omega", "delta_fractions", "eps_leak"):
        if not isinstance(fs[key], list) or not fs[key] or any(
            isinstance(v, bool) or not isinstance(v, (int, float)) or v <= 0 for v in fs[key]
        ):
            raise ConfigError(f"filter_sweep.{key}", "must be a nonempty list of positive numbers")
    if any(v >= 1 for v in fs["eps_leak"]):
        raise ConfigError("filter_sweep.eps_leak", "entries must lie in (0, 1)")
    _num(cfg, "filter_sweep", "dim", 2, integer=True)

    r = cfg["resources"]
    for key in ("n_omega", "cost_uh", "t_per_rz", "n_h", "n_t", "h_norm", "delta_min", "eps_e", "n_o"):
        _num(cfg, "resources", key, 0)
    _num(cfg, "resources", "qsvt_eps", 0, 1)
    _num(cfg, "resources", "p0", 0, 1)
    _num(cfg, "resources", "p_succ", 0, 1)
    if cfg["output_dir"] is not None and not isinstance(cfg["output_dir"], str):
        raise ConfigError("output_dir", "must be a string path")
    return cfg
