import hashlib
import os
from dataclasses import dataclass, asdict, fields

import numpy as np
import yaml

from .errors import ConfigError

PACKAGE_PATH = os.path.join(os.path.dirname(__file__))

with open(os.path.join(PACKAGE_PATH, "config/rovella_params.yml")) as f:
    ROVELLA_PARAMS = yaml.safe_load(f)

with open(os.path.join(PACKAGE_PATH, "config/rovella_default.yml")) as f:
    ROVELLA_DEFAULT = yaml.safe_load(f)

FLOW_KEYS = ("lambda1", "lambda2", "lambda3", "rho", "tau_c", "cy_plus", "cy_minus")
INT_KEYS = ("n", "N", "n_push", "grid_size", "f4_horizon", "seed", "jobs")


@dataclass(frozen=True)
class RunConfig:
    """ The merged and checked run configuration of the command line tool. """
    lambda1: float
    lambda2: float
    lambda3: float
    rho: float
    tau_c: float
    cy_plus: float
    cy_minus: float
    map: str
    method: str
    n: int
    N: int
    delta_floor: float
    t_min: float
    t_max: float
    t_step: float
    alpha_grid: object
    n_push: int
    roof: object
    x_min_cutoff: float
    sample_dt: float
    holder_C: float
    holder_alpha: float
    grid_size: int
    f4_horizon: int
    seed: int
    jobs: int
    out: str

    def to_dict(self):
        d = asdict(self)
        if isinstance(d["alpha_grid"], tuple):
            d["alpha_grid"] = list(d["alpha_grid"])
        return d

    def flow_dict(self):
        return {k: getattr(self, k) for k in FLOW_KEYS}

    def digest(self):
        """ SHA-256 of the canonical dump, written into every output header.
        The output directory does not take part in the hash. """
        d = self.to_dict()
        d.pop("out")
        text = yaml.safe_dump(d, sort_keys=True, default_flow_style=False)
        return hashlib.sha256(text.encode("utf-8")).hexdigest()

    def t_grid(self):
        n_step = int(round((self.t_max - self.t_min) / self.t_step))
        return self.t_min + self.t_step * np.arange(n_step + 1)

    def replace(self, **kwargs):
        d = self.to_dict()
        d.update(kwargs)
        return check_config(d)


def _check_range(key, value):
    rng = ROVELLA_PARAMS.get(key)
    if rng is None:
        return
    if isinstance(rng[0], str):
        if value not in rng:
            raise ConfigError("@RunConfig: bad value for {} [{}], allowed: {}".format(key, value, rng))
        return
    lo, hi = rng
    if not lo <= value <= hi:
        raise ConfigError("@RunConfig: {} = {} out of range [{}, {}]".format(key, value, lo, hi))


def parse_map_key(value):
    """ Split the map selection into (kind, weights).

    'rovella' -> ("rovella", None), 'doubling' -> ("pl", (0.5, 0.5)),
    'pl:0.4,0.6' -> ("pl", (0.4, 0.6)).
    """
    if value == "rovella":
        return "rovella", None
    if value == "doubling":
        return "pl", (0.5, 0.5)
    if value.startswith("pl:"):
        try:
            weights = tuple(float(_) for _ in value[3:].split(","))
        except ValueError:
            raise ConfigError("@RunConfig: bad map weights [{}]".format(value))
        if len(weights) < 2 or min(weights) <= 0 or abs(sum(weights) - 1) > 1e-12:
            raise ConfigError("@RunConfig: map weights must be >= 2 positive numbers summing to 1 [{}]".format(value))
        return "pl", weights
    raise ConfigError("@RunConfig: bad value for map [{}]".format(value))


def check_config(d):
    """ Check a merged config dict and return a RunConfig.

    Parameters
    ----------
    d : dict
        Complete mapping of config keys.

    Returns
    -------
    RunConfig
    """
    names = [f.name for f in fields(RunConfig)]
    unknown = sorted(set(d) - set(names))
    if unknown:
        raise ConfigError("@RunConfig: unknown keys {}".format(unknown))
    missing = sorted(set(names) - set(d))
    if missing:
        raise ConfigError("@RunConfig: missing keys {}".format(missing))
    d = dict(d)
    for key in names:
        value = d[key]
        if key in ("map", "method", "out"):
            if not isinstance(value, str):
                raise ConfigError("@RunConfig: {} must be a string [{}]".format(key, value))
        elif key == "alpha_grid":
            if isinstance(value, (list, tuple)):
                try:
                    value = tuple(float(_) for _ in value)
                except (TypeError, ValueError):
                    raise ConfigError("@RunConfig: bad alpha_grid [{}]".format(value))
                if len(value) == 0:
                    raise ConfigError("@RunConfig: alpha_grid is empty")
            elif isinstance(value, int) and not isinstance(value, bool):
                _check_range(key, value)
            else:
                raise ConfigError("@RunConfig: bad alpha_grid [{}]".format(value))
        elif key == "roof":
            if value != "flow":
                try:
                    value = float(value)
                except (TypeError, ValueError):
                    raise ConfigError("@RunConfig: roof must be 'flow' or a positive number [{}]".format(value))
                if not value > 0:
                    raise ConfigError("@RunConfig: roof must be positive [{}]".format(value))
        elif key in INT_KEYS:
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError("@RunConfig: {} must be an integer [{}]".format(key, value))
            _check_range(key, value)
        else:
            if isinstance(value, bool):
                raise ConfigError("@RunConfig: {} must be a number [{}]".format(key, value))
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise ConfigError("@RunConfig: {} must be a number [{}]".format(key, value))
            _check_range(key, value)
        d[key] = value
    kind, weights = parse_map_key(d["map"])
    if d["method"] != "ulam" and kind == "rovella":
        raise ConfigError("@RunConfig: method [{}] needs a full-branch map, rovella maps use ulam".format(d["method"]))
    if not d["t_min"] < d["t_max"]:
        raise ConfigError("@RunConfig: t_min must be smaller than t_max")
    if not d["holder_alpha"] > 1:
        raise ConfigError("@RunConfig: holder_alpha must be > 1 [{}]".format(d["holder_alpha"]))
    if d["jobs"] == 0:
        raise ConfigError("@RunConfig: jobs must be -1 or >= 1")
    return RunConfig(**d)


def load_config(fp=None, **overrides):
    """ Load a run config from a YAML file, merged over ROVELLA_DEFAULT.

    Parameters
    ----------
    fp : str or None
        Path of a flat YAML mapping. None uses the defaults only.
    overrides :
        Values that take precedence over both (e.g. command line flags).

    Returns
    -------
    RunConfig
    """
    d = dict(ROVELLA_DEFAULT)
    if fp is not None:
        if not os.path.exists(fp):
            raise ConfigError("@RunConfig: file not found! [{}]".format(fp))
        try:
            with open(fp) as f:
                user = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigError("@RunConfig: cannot parse [{}]: {}".format(fp, e))
        if user is None:
            user = {}
        if not isinstance(user, dict):
            raise ConfigError("@RunConfig: expected a mapping in [{}]".format(fp))
        d.update(user)
    d.update({k: v for k, v in overrides.items() if v is not None})
    return check_config(d)


def test():
    print(ROVELLA_DEFAULT)
    print(ROVELLA_PARAMS)


if __name__ == "__main__":
    test()
