"""Scenario configuration: a JSON document describing curve, loadings, driver, strikes and MC settings.

Example::

    {
      "name": "case2",
      "tenor": [5, 6, 7, 8, 9, 10],
      "libors": 0.06,
      "b0": 0.7472581728660287,
      "loadings": 1.0,
      "measure": {"c": 0.0, "jumps": {"kind": "cgmy", "C": 0.1, "lambda_plus": 10,
                                      "lambda_minus": 20, "Y": 1.2}},
      "caplet": 1,
      "strikes": [0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09],
      "mc": {"paths": 100000, "seed": 1, "dt": 0.05, "epsilon": null}
    }

Units are years and decimal rates.  ``libors`` and ``loadings`` accept a scalar,
a per-rate list, or (loadings only) the full per-rate, per-interval array.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .levy import CGMY, LevyMeasure, TabulatedJumps
from .market import MarketModel, TenorStructure
from .montecarlo import SimConfig


class ConfigError(ValueError):
    """Invalid or inconsistent scenario document."""


@dataclass
class ScenarioConfig:
    tenor: list
    libors: object
    b0: float
    loadings: object
    measure: dict
    name: str = "scenario"
    accruals: list | None = None
    caplet: int = 1
    strikes: list = field(default_factory=lambda: [0.06])
    mc: dict = field(default_factory=dict)
    output: str | None = None

    @classmethod
    def from_dict(cls, doc: dict) -> "ScenarioConfig":
        if not isinstance(doc, dict):
            raise ConfigError("scenario must be a JSON object")
        known = {f for f in cls.__dataclass_fields__}
        extra = set(doc) - known
        if extra:
            raise ConfigError(f"unknown scenario keys: {sorted(extra)}")
        missing = {"tenor", "libors", "b0", "loadings", "measure"} - set(doc)
        if missing:
            raise ConfigError(f"missing scenario keys: {sorted(missing)}")
        cfg = cls(**doc)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return asdict(self)

    def validate(self) -> None:
        """Build every object once so that all module-level invariants are checked."""
        try:
            model = self.model()
            self.sim_config()
        except ConfigError:
            raise
        except (ValueError, TypeError, KeyError) as exc:
            raise ConfigError(str(exc)) from exc
        if self.accruals is not None and not np.allclose(self.accruals, model.accruals, rtol=0, atol=1e-12):
            raise ConfigError("accruals inconsistent with tenor dates")
        if not 1 <= int(self.caplet) <= model.n:
            raise ConfigError("caplet index out of range")
        if not self.strikes or any(float(k) <= 0 for k in self.strikes):
            raise ConfigError("strikes must be a non-empty list of positive rates")

    def levy_measure(self) -> LevyMeasure:
        return measure_from_dict(self.measure)

    def model(self, measure: LevyMeasure | None = None) -> MarketModel:
        tenor = TenorStructure(tuple(self.tenor))
        libors = np.broadcast_to(np.asarray(self.libors, dtype=float), (tenor.n,))
        return MarketModel(tenor, libors, float(self.b0), self.loadings, measure or self.levy_measure())

    def sim_config(self, **overrides) -> SimConfig:
        opts = {k: v for k, v in self.mc.items() if k in SimConfig.__dataclass_fields__}
        unknown = set(self.mc) - set(SimConfig.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown mc settings: {sorted(unknown)}")
        opts.update({k: v for k, v in overrides.items() if v is not None})
        return SimConfig(**opts)


def measure_from_dict(doc: dict) -> LevyMeasure:
    if not isinstance(doc, dict):
        raise ConfigError("measure must be an object")
    c = np.atleast_2d(np.asarray(doc.get("c", 0.0), dtype=float))
    jumps = doc.get("jumps")
    if jumps is None or jumps.get("kind", "none") == "none":
        return LevyMeasure(c)
    direction = jumps.get("direction", [1.0] * c.shape[0])
    kind = jumps.get("kind")
    if kind == "cgmy":
        try:
            jm = CGMY(float(jumps["C"]), float(jumps["lambda_plus"]), float(jumps["lambda_minus"]), float(jumps["Y"]))
        except KeyError as exc:
            raise ConfigError(f"cgmy jumps need parameter {exc}") from exc
    elif kind == "tabulated":
        jm = TabulatedJumps(np.asarray(jumps["z"], dtype=float), np.asarray(jumps["density"], dtype=float))
    else:
        raise ConfigError(f"unknown jump kind {kind!r}")
    return LevyMeasure(c, ((direction, jm),))


def load(path) -> ScenarioConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
    return ScenarioConfig.from_dict(doc)


def dumps(cfg: ScenarioConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=True)


def bundled_case(case: int) -> ScenarioConfig:
    """One of the four CGMY reference scenarios shipped with the package."""
    if case not in (1, 2, 3, 4):
        raise ConfigError("case must be 1, 2, 3 or 4")
    text = resources.files("levylibor").joinpath("data", f"case{case}.json").read_text()
    return ScenarioConfig.from_dict(json.loads(text))
