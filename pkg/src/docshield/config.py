"""Configuration files for the command line.

Three file kinds share one INI syntax (sections of key = value, # or ;
comments, read case-sensitively with interpolation off):

* run config: [split] / [vectorize] / [tfidf] / [select] / [gbdt] /
  [tune] sections setting training knobs. Every key is optional; the
  defaults here match the library defaults.
* grid file: one [grid] section whose keys are the dotted tunable
  parameter names and whose values are comma-separated candidates,
  e.g. ``select.k = 50, 100, 200``.
* policy file: one [policy] section of ``label = action`` lines plus an
  optional ``default = action``. The key ``default`` is reserved and
  cannot name a class.

Unknown sections and keys are hard errors. A typo like ``learning_rte``
silently falling back to a default is the worst possible behavior for a
reproducibility-sensitive tool, so nothing is ignored.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Mapping, Optional

from .errors import InputError
from .gbdt import GbdtHyperparams
from .pipeline import GRID_PARAM_NAMES, PipelineParams
from .policy import DEFAULT_POLICY, PolicyConfig, parse_action

__all__ = [
    "RunConfig",
    "load_run_config",
    "load_grid",
    "load_policy",
]


@dataclass(frozen=True)
class RunConfig:
    params: PipelineParams
    test_fraction: float = 0.25
    n_candidates: int = 12
    n_splits: int = 5


def _read_ini(path: Path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keys are case-sensitive identifiers
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read config file {path}: {exc}") from exc
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise InputError(f"malformed config file: {exc}") from exc
    return parser


def _convert(raw: str, conv: Callable, path: Path, section: str, key: str):
    try:
        return conv(raw)
    except (ValueError, InputError) as exc:
        raise InputError(
            f"{path}: [{section}] {key} = {raw!r}: {exc}"
        ) from exc


def _parse_sections(
    parser: configparser.ConfigParser,
    schema: Mapping[str, Mapping[str, Callable]],
    path: Path,
) -> dict:
    """Walk every (section, key), apply the schema converter, and refuse
    anything the schema does not list."""
    out = {section: {} for section in schema}
    for section in parser.sections():
        if section not in schema:
            raise InputError(
                f"{path}: unknown section [{section}]; valid sections: "
                + ", ".join(sorted(schema))
            )
        for key, raw in parser.items(section):
            if key not in schema[section]:
                raise InputError(
                    f"{path}: unknown key {key!r} in [{section}]; valid keys: "
                    + ", ".join(sorted(schema[section]))
                )
            out[section][key] = _convert(raw, schema[section][key], path,
                                         section, key)
    return out


_RUN_SCHEMA = {
    "split": {"test_fraction": float},
    "vectorize": {"min_df": int},
    "tfidf": {"smoothing_mode": str, "norm": str},
    "select": {"k": int},
    "gbdt": {
        "n_iterations": int,
        "learning_rate": float,
        "max_depth": int,
        "min_samples_leaf": int,
        "seed": int,
    },
    "tune": {"n_candidates": int, "n_splits": int},
}


def load_run_config(path=None) -> RunConfig:
    """Parse a run config, or return pure defaults when path is None."""
    config = RunConfig(params=PipelineParams())
    if path is None:
        return config
    path = Path(path)
    values = _parse_sections(_read_ini(path), _RUN_SCHEMA, path)

    params = config.params
    if values["vectorize"]:
        params = replace(params, min_df=values["vectorize"]["min_df"])
    tf = values["tfidf"]
    if "smoothing_mode" in tf:
        params = replace(params, tfidf_smoothing=tf["smoothing_mode"])
    if "norm" in tf:
        params = replace(params, tfidf_norm=tf["norm"])
    if values["select"]:
        params = replace(params, select_k=values["select"]["k"])
    if values["gbdt"]:
        # routed through the hyperparameter constructor so its range
        # checks fire with the file's values
        params = replace(params, gbdt=replace(params.gbdt, **values["gbdt"]))

    config = replace(config, params=params)
    if "test_fraction" in values["split"]:
        fraction = values["split"]["test_fraction"]
        if not 0.0 < fraction < 1.0:
            raise InputError(
                f"{path}: [split] test_fraction must be in (0, 1), got {fraction}"
            )
        config = replace(config, test_fraction=fraction)
    tune = values["tune"]
    if "n_candidates" in tune:
        config = replace(config, n_candidates=tune["n_candidates"])
    if "n_splits" in tune:
        config = replace(config, n_splits=tune["n_splits"])
    return config


def _grid_int(raw: str) -> int:
    return int(raw.strip())


def _grid_float(raw: str) -> float:
    return float(raw.strip())


def _grid_str(raw: str) -> str:
    return raw.strip()


_GRID_VALUE_PARSERS = {
    "gbdt.learning_rate": _grid_float,
    "gbdt.max_depth": _grid_int,
    "gbdt.min_samples_leaf": _grid_int,
    "gbdt.n_iterations": _grid_int,
    "select.k": _grid_int,
    "tfidf.smoothing_mode": _grid_str,
}
assert set(_GRID_VALUE_PARSERS) == set(GRID_PARAM_NAMES)


def load_grid(path) -> dict:
    """Parse a [grid] file into {dotted name: [candidate values]}."""
    path = Path(path)
    parser = _read_ini(path)
    sections = parser.sections()
    if sections != ["grid"]:
        raise InputError(
            f"{path}: a grid file must contain exactly one [grid] section, "
            f"found {sections or 'none'}"
        )
    grid = {}
    for name, raw in parser.items("grid"):
        if name not in _GRID_VALUE_PARSERS:
            raise InputError(
                f"{path}: unknown grid parameter {name!r}; valid names: "
                + ", ".join(GRID_PARAM_NAMES)
            )
        pieces = [p for p in raw.split(",") if p.strip()]
        if not pieces:
            raise InputError(f"{path}: grid parameter {name!r} lists no values")
        grid[name] = [
            _convert(p, _GRID_VALUE_PARSERS[name], path, "grid", name)
            for p in pieces
        ]
    if not grid:
        raise InputError(f"{path}: the [grid] section is empty")
    return grid


def load_policy(path=None) -> PolicyConfig:
    """Parse a [policy] file, or return the default policy for None."""
    if path is None:
        return DEFAULT_POLICY
    path = Path(path)
    parser = _read_ini(path)
    sections = parser.sections()
    if sections != ["policy"]:
        raise InputError(
            f"{path}: a policy file must contain exactly one [policy] "
            f"section, found {sections or 'none'}"
        )
    mapping = {}
    default_action = DEFAULT_POLICY.default_action
    for key, raw in parser.items("policy"):
        action = _convert(raw, parse_action, path, "policy", key)
        if key == "default":
            default_action = action
        else:
            mapping[key] = action
    return PolicyConfig(mapping=mapping, default_action=default_action)
