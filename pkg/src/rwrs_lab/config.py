"""JSON experiment configuration: parsing, validation and canonical serialization.

Schema (all keys other than ``walk``, ``scenery`` and ``n_grid`` optional)::

    {
      "walk": "rademacher" | {"kind": "rademacher" | "lazy" | "uniform" | "fgn" | "drift",
                              "p_stay": 0.5, "support": [-1, 1], "hurst": 0.75},
      "scenery": "iid_gaussian" | "iid_rademacher" | "iid_centered_exp" | "degenerate"
                 | "pareto_centered"
                 | {"kind": "iid" | "causal_ma" | "heavy_tail",
                    "innovation": "gaussian" | {"kind": "constant", "value": 1.0}
                                  | {"kind": "pareto_centered", "index": 1.5},
                    "rho": 0.5, "coeffs": [...],
                    "mu": {"kind": "zero" | "constant" | "periodic",
                           "value": c, "amplitude": a, "period": p, "offset": o},
                    "sigma": {...}, "index": 1.5, "centered": true},
      "n_grid": [1024, 4096],
      "replicas": 200, "seed": 0, "lambda": 1.5, "delta": 0.1,
      "mode": "slln" | "theorem3", "tau": 0.8, "expect_divergent": false,
      "epsilon": 1.0, "lil_slack": 1.25, "window_safety": 2.0,
      "lags": [1, ..., 20], "samples": 10000,
      "synthetic": {"prefactor": 2.0, "exponent": 1.5},
      "acceptance": {"slope_range": [lo, hi], ...}
    }

A manifest.json written by the CLI is also accepted; its embedded config is used.
"""
from __future__ import annotations

import json
from pathlib import Path

from .experiments import ExperimentConfig
from .scenery import Innovation, Profile, SceneryModel
from .walk import WalkModel

DEFAULTS = {"replicas": 200, "lambda": 1.5, "delta": 0.1}

TOP_KEYS = {"walk", "scenery", "n_grid", "replicas", "seed", "lambda", "delta", "mode", "tau",
            "expect_divergent", "epsilon", "lil_slack", "window_safety", "lags", "samples",
            "synthetic", "acceptance"}
RULE_KEYS = {"strictly_decreasing", "slope_range", "centered_mean_se", "decreasing", "mismatch_se",
             "p2_slope_range", "slope_max", "ratio_tol", "se_slack"}


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key
        self.message = message


def _check_keys(d: dict, allowed: set, prefix: str):
    for k in d:
        if k not in allowed:
            raise ConfigError(f"{prefix}{k}", "unknown key")


def _num(d, key, path, default=None, kind=float):
    if key not in d:
        if default is None:
            raise ConfigError(path + key, "required")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(path + key, f"expected a number, got {v!r}")
    if kind is int and int(v) != v:
        raise ConfigError(path + key, f"expected an integer, got {v!r}")
    return kind(v)


def _walk(spec, path="walk") -> WalkModel:
    if isinstance(spec, str):
        spec = {"kind": spec}
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(path, "expected a walk name or an object with 'kind'")
    _check_keys(spec, {"kind", "p_stay", "support", "hurst"}, path + ".")
    kind = spec["kind"]
    try:
        if kind == "rademacher":
            return WalkModel.rademacher()
        if kind == "lazy":
            return WalkModel.lazy(_num(spec, "p_stay", path + "."))
        if kind == "uniform":
            m = WalkModel.uniform(spec.get("support", []))
            if m.mean != 0.0:
                raise ConfigError(path + ".support", "increment law must have zero mean")
            return m
        if kind == "fgn":
            h = _num(spec, "hurst", path + ".")
            if not 0.0 < h < 1.0:
                raise ConfigError(path + ".hurst", f"must lie in (0, 1), got {h}")
            return WalkModel.fgn(h)
        if kind == "drift":
            return WalkModel.drift()
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(path, str(e)) from None
    raise ConfigError(path + ".kind", f"unknown walk kind {kind!r}")


def _innovation(spec, path) -> Innovation:
    if isinstance(spec, str):
        spec = {"kind": spec}
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(path, "expected an innovation name or an object with 'kind'")
    _check_keys(spec, {"kind", "value", "index"}, path + ".")
    kind = spec["kind"]
    if kind == "constant":
        return Innovation("constant", _num(spec, "value", path + ".", 1.0))
    if kind in ("pareto_centered", "pareto"):
        b = _num(spec, "index", path + ".", 1.5)
        if not b > 1.0:
            raise ConfigError(path + ".index", f"Pareto index must be > 1, got {b}")
        return Innovation(kind, b)
    if kind in ("gaussian", "rademacher", "centered_exp"):
        return Innovation(kind)
    raise ConfigError(path + ".kind", f"unknown innovation {kind!r}")


def _profile(spec, path, default: Profile) -> Profile:
    if spec is None:
        return default
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return Profile.constant(spec)
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(path, "expected a number or an object with 'kind'")
    _check_keys(spec, {"kind", "value", "amplitude", "period", "offset"}, path + ".")
    kind = spec["kind"]
    try:
        if kind == "zero":
            return Profile.zero()
        if kind == "constant":
            return Profile.constant(_num(spec, "value", path + "."))
        if kind == "periodic":
            return Profile.periodic(_num(spec, "amplitude", path + "."),
                                    _num(spec, "period", path + ".", kind=int),
                                    _num(spec, "offset", path + ".", 0.0))
    except ValueError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(path, str(e)) from None
    raise ConfigError(path + ".kind", f"unknown profile {kind!r}")


SCENERY_SHORTHAND = {
    "iid_gaussian": {"kind": "iid", "innovation": "gaussian"},
    "iid_rademacher": {"kind": "iid", "innovation": "rademacher"},
    "iid_centered_exp": {"kind": "iid", "innovation": "centered_exp"},
    "degenerate": {"kind": "iid", "innovation": {"kind": "constant", "value": 1.0}},
    "pareto_centered": {"kind": "heavy_tail", "index": 1.5, "centered": True},
}


def _scenery(spec, path="scenery") -> SceneryModel:
    if isinstance(spec, str):
        if spec not in SCENERY_SHORTHAND:
            raise ConfigError(path, f"unknown scenery {spec!r}")
        spec = SCENERY_SHORTHAND[spec]
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(path, "expected a scenery name or an object with 'kind'")
    _check_keys(spec, {"kind", "innovation", "rho", "coeffs", "mu", "sigma", "index", "centered"},
                path + ".")
    kind = spec["kind"]
    p = path + "."
    try:
        if kind == "heavy_tail":
            b = _num(spec, "index", p, 1.5)
            if not b > 1.0:
                raise ConfigError(p + "index", f"Pareto index must be > 1, got {b}")
            mu = _profile(spec.get("mu"), p + "mu", Profile.zero())
            sigma = _profile(spec.get("sigma"), p + "sigma", Profile.constant(1.0))
            return SceneryModel.heavy_tail(b, bool(spec.get("centered", True)),
                                           tuple(spec.get("coeffs", (1.0,))),
                                           scale=sigma.offset, shift=mu.offset)
        inn = _innovation(spec.get("innovation", "gaussian"), p + "innovation")
        mu = _profile(spec.get("mu"), p + "mu", Profile.zero())
        sigma = _profile(spec.get("sigma"), p + "sigma", Profile.constant(1.0))
        if kind == "iid":
            return SceneryModel.iid(inn, mu, sigma)
        if kind == "causal_ma":
            if "rho" in spec and "coeffs" in spec:
                raise ConfigError(p + "coeffs", "give either rho or coeffs, not both")
            if "rho" in spec:
                rho = _num(spec, "rho", p)
                if not 0.0 <= rho < 1.0:
                    raise ConfigError(p + "rho", f"must lie in [0, 1), got {rho}")
                return SceneryModel.causal_ma(rho=rho, innovation=inn, mu=mu, sigma=sigma)
            if "coeffs" not in spec:
                raise ConfigError(p + "rho", "causal_ma needs rho or coeffs")
            return SceneryModel.causal_ma(coeffs=spec["coeffs"], innovation=inn, mu=mu, sigma=sigma)
    except ConfigError:
        raise
    except (ValueError, TypeError) as e:
        raise ConfigError(path, str(e)) from None
    raise ConfigError(p + "kind", f"unknown scenery kind {kind!r}")


def config_from_dict(d: dict) -> ExperimentConfig:
    if not isinstance(d, dict):
        raise ConfigError("<root>", "expected a JSON object")
    if "tool_version" in d and "config" in d:
        d = d["config"]
    _check_keys(d, TOP_KEYS, "")
    for key in ("walk", "scenery", "n_grid"):
        if key not in d:
            raise ConfigError(key, "required")
    grid = d["n_grid"]
    if not isinstance(grid, list) or not grid or not all(isinstance(n, int) and not isinstance(n, bool)
                                                         for n in grid):
        raise ConfigError("n_grid", "expected a non-empty list of integers")
    if any(n < 1 for n in grid):
        raise ConfigError("n_grid", "entries must be >= 1")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("n_grid", "must be strictly increasing")
    replicas = _num(d, "replicas", "", DEFAULTS["replicas"], int)
    if replicas < 1:
        raise ConfigError("replicas", f"must be >= 1, got {replicas}")
    lam = _num(d, "lambda", "", DEFAULTS["lambda"])
    if not lam > 1.0:
        raise ConfigError("lambda", f"must satisfy lambda > 1, got {lam}")
    delta = _num(d, "delta", "", DEFAULTS["delta"])
    if not delta > 0.0:
        raise ConfigError("delta", f"must be > 0, got {delta}")
    mode = d.get("mode", "slln")
    if mode not in ("slln", "theorem3"):
        raise ConfigError("mode", f"must be 'slln' or 'theorem3', got {mode!r}")
    tau = None
    if "tau" in d:
        if mode != "theorem3":
            raise ConfigError("tau", "tau is only allowed with mode = 'theorem3'")
        tau = _num(d, "tau", "")
    divergent = d.get("expect_divergent", False)
    if not isinstance(divergent, bool):
        raise ConfigError("expect_divergent", "expected true or false")
    if tau is not None and tau <= 0.75 and not divergent:
        raise ConfigError("tau", f"tau = {tau} <= 3/4 requires expect_divergent = true")
    seed = _num(d, "seed", "", 0, int)
    if seed < 0:
        raise ConfigError("seed", "must be a non-negative integer")
    synthetic = None
    if "synthetic" in d:
        s = d["synthetic"]
        if not isinstance(s, dict):
            raise ConfigError("synthetic", "expected an object")
        _check_keys(s, {"prefactor", "exponent"}, "synthetic.")
        synthetic = (_num(s, "prefactor", "synthetic."), _num(s, "exponent", "synthetic."))
    lags = d.get("lags", list(range(1, 21)))
    if not isinstance(lags, list) or not all(isinstance(j, int) and j >= 1 for j in lags):
        raise ConfigError("lags", "expected a list of positive integers")
    samples = _num(d, "samples", "", 10_000, int)
    if samples < 10_000:
        raise ConfigError("samples", f"must be >= 10000, got {samples}")
    rules = d.get("acceptance", {})
    if not isinstance(rules, dict):
        raise ConfigError("acceptance", "expected an object")
    _check_keys(rules, RULE_KEYS, "acceptance.")
    rule_items = tuple(sorted((k, tuple(v) if isinstance(v, list) else v) for k, v in rules.items()))
    walk = _walk(d["walk"])
    scenery = _scenery(d["scenery"])
    if mode == "theorem3" and scenery.kind != "heavy_tail" and not scenery.mu.is_constant:
        raise ConfigError("scenery.mu", "theorem3 needs an identically distributed scenery")
    return ExperimentConfig(
        walk=walk, scenery=scenery, n_grid=tuple(grid), replicas=replicas, base_seed=seed,
        lam=lam, tau=tau, delta=delta, mode=mode, expect_divergent=divergent,
        epsilon=_num(d, "epsilon", "", 1.0), lil_slack=_num(d, "lil_slack", "", 1.25),
        window_safety=_num(d, "window_safety", "", 2.0), lags=tuple(lags), samples=samples,
        synthetic=synthetic, acceptance=rule_items,
    )


def parse_config(path) -> ExperimentConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise ConfigError("<file>", f"cannot read {p}: {e.strerror}") from None
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError("<file>", f"malformed JSON at line {e.lineno}: {e.msg}") from None
    return config_from_dict(d)


def _profile_dict(p: Profile) -> dict:
    if p.amplitude == 0.0:
        return {"kind": "constant", "value": p.offset}
    return {"kind": "periodic", "amplitude": p.amplitude, "period": p.period, "offset": p.offset}


def _walk_dict(w: WalkModel) -> dict:
    if w.kind == "fgn":
        return {"kind": "fgn", "hurst": w.hurst}
    if w.kind == "drift":
        return {"kind": "drift"}
    if w.increment == "lazy":
        return {"kind": "lazy", "p_stay": w.p_stay}
    if w.increment == "uniform":
        return {"kind": "uniform", "support": list(w.support)}
    return {"kind": "rademacher"}


def _scenery_dict(s: SceneryModel) -> dict:
    if s.kind == "heavy_tail":
        return {"kind": "heavy_tail", "index": s.innovation.param,
                "centered": s.innovation.kind == "pareto_centered", "coeffs": list(s.coeffs),
                "mu": _profile_dict(s.mu), "sigma": _profile_dict(s.sigma)}
    inn = {"kind": s.innovation.kind}
    if s.innovation.kind == "constant":
        inn["value"] = s.innovation.param
    elif s.innovation.kind.startswith("pareto"):
        inn["index"] = s.innovation.param
    d = {"kind": s.kind, "innovation": inn, "mu": _profile_dict(s.mu), "sigma": _profile_dict(s.sigma)}
    if s.kind == "causal_ma":
        if s.rho is not None:
            d["rho"] = s.rho
        else:
            d["coeffs"] = list(s.coeffs)
    return d


def serialize(config: ExperimentConfig) -> dict:
    """Canonical JSON-ready form; ``config_from_dict(serialize(c)) == c``."""
    d = {
        "walk": _walk_dict(config.walk),
        "scenery": _scenery_dict(config.scenery),
        "n_grid": list(config.n_grid),
        "replicas": config.replicas,
        "seed": config.base_seed,
        "lambda": config.lam,
        "delta": config.delta,
        "mode": config.mode,
        "expect_divergent": config.expect_divergent,
        "epsilon": config.epsilon,
        "lil_slack": config.lil_slack,
        "window_safety": config.window_safety,
        "lags": list(config.lags),
        "samples": config.samples,
        "acceptance": {k: list(v) if isinstance(v, tuple) else v for k, v in config.acceptance},
    }
    if config.tau is not None:
        d["tau"] = config.tau
    if config.synthetic is not None:
        d["synthetic"] = {"prefactor": config.synthetic[0], "exponent": config.synthetic[1]}
    return d
