"""Scenario files: YAML documents describing a metric, fields and sample points.

Keys (exact): coordinates, metric, xi, potential, lambda, kappa,
soliton_lambda, alpha, points, random_points {count, low, high, seed},
tolerance.  Point coordinates may be numbers or constant expressions
such as ``"pi/3"``.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path

import numpy as np
import yaml

from . import expr as ex
from .curvature import ExpressionField, MetricField, SamplePoint, VectorFieldSpec, reference_observer
from .splitmix import sample_box
from .tensor import SingularMetricError, invert_metric, signature

DEFAULT_TOLERANCE = 1e-8
UNIT_TOL = 1e-8
SYMMETRY_TOL = 1e-12

_KEYS = {"coordinates", "metric", "xi", "potential", "lambda", "kappa", "soliton_lambda",
         "alpha", "points", "random_points", "tolerance"}
_RANDOM_KEYS = {"count", "low", "high", "seed"}


class ScenarioError(ValueError):
    """Any problem with a scenario file (maps to exit code 2)."""


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ScenarioError(msg)


def _real(doc: dict, key: str, default=None) -> float | None:
    v = doc.get(key, default)
    if v is None:
        return None
    _require(isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v),
             f"{key}: expected a finite real, got {v!r}")
    return float(v)


def _texts(value, shape: tuple[int, ...], key: str) -> list:
    arr = np.array(value, dtype=object)
    _require(arr.shape == shape, f"{key}: expected shape {shape}, got {arr.shape}")
    for idx in np.ndindex(shape):
        c = arr[idx]
        _require(isinstance(c, (str, int, float)) and not isinstance(c, bool),
                 f"{key}{list(idx)}: expected expression text, got {c!r}")
    return [[str(c) for c in row] for row in arr] if len(shape) == 2 else [str(c) for c in arr]


def _field(cls, texts, coords, key, *extra):
    try:
        return cls(texts, *extra, coords) if extra else cls(texts, coords)
    except ex.ParseError as err:
        # locate the offending component for the message
        arr = np.array(texts, dtype=object)
        for idx in np.ndindex(arr.shape):
            try:
                ex.parse(str(arr[idx]), coords)
            except ex.ParseError as inner:
                raise ScenarioError(f"{key}{list(idx)}: {inner}") from None
        raise ScenarioError(f"{key}: {err}") from None


def _coordinate(value, where: str) -> float:
    if isinstance(value, bool):
        raise ScenarioError(f"{where}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        v = float(value)
    elif isinstance(value, str):
        try:
            v = ex.evaluate(ex.parse(value, ()), ())
        except (ex.ParseError, ex.DomainError) as err:
            raise ScenarioError(f"{where}: {err}") from None
    else:
        raise ScenarioError(f"{where}: expected a number, got {value!r}")
    _require(math.isfinite(v), f"{where}: coordinate is not finite")
    return v


def _points(raw, where: str) -> list[list[float]]:
    _require(isinstance(raw, list), f"{where}: expected a list of points")
    out = []
    for i, p in enumerate(raw):
        _require(isinstance(p, list) and len(p) == 4, f"{where}[{i}]: expected 4 coordinates")
        out.append([_coordinate(c, f"{where}[{i}][{j}]") for j, c in enumerate(p)])
    return out


@dataclass(frozen=True)
class RandomPoints:
    count: int
    low: tuple[float, ...]
    high: tuple[float, ...]
    seed: int

    def expand(self) -> list[list[float]]:
        return sample_box(self.count, self.low, self.high, self.seed)


@dataclass(frozen=True)
class Scenario:
    coordinates: tuple[str, ...]
    metric: list
    lam: float
    kappa: float
    tolerance: float = DEFAULT_TOLERANCE
    xi: list | None = None
    potential: list | None = None
    soliton_lambda: float | None = None
    alpha: list | None = None
    explicit_points: list = field(default_factory=list)
    random_points: RandomPoints | None = None
    source: str = ""

    # ---- derived ---------------------------------------------------------

    @property
    def points(self) -> list[list[float]]:
        extra = self.random_points.expand() if self.random_points else []
        return [list(p) for p in self.explicit_points] + extra

    @property
    def xi_declared(self) -> bool:
        return self.xi is not None

    @cached_property
    def metric_field(self) -> MetricField:
        return _field(MetricField, self.metric, self.coordinates, "metric")

    @cached_property
    def xi_field(self) -> VectorFieldSpec:
        if self.xi is None:
            return reference_observer(self.metric_field)
        return _field(VectorFieldSpec, self.xi, self.coordinates, "xi")

    @cached_property
    def potential_field(self) -> VectorFieldSpec | None:
        if self.potential is None:
            return None
        return _field(VectorFieldSpec, self.potential, self.coordinates, "potential")

    @cached_property
    def alpha_field(self) -> ExpressionField | None:
        if self.alpha is None:
            return None
        return _field(ExpressionField, self.alpha, self.coordinates, "alpha", "dd")

    @cached_property
    def samples(self) -> list[SamplePoint]:
        out = []
        for p in self.points:
            try:
                out.append(SamplePoint.build(self.metric_field, p, self.xi_field,
                                             self.potential_field, self.alpha_field))
            except (ex.DomainError, SingularMetricError, ValueError, FloatingPointError) as err:
                raise ScenarioError(f"point {p}: {err}") from None
        return out

    def canonical(self) -> dict:
        return {
            "coordinates": list(self.coordinates),
            "metric": self.metric,
            "xi": self.xi,
            "potential": self.potential,
            "lambda": self.lam,
            "kappa": self.kappa,
            "soliton_lambda": self.soliton_lambda,
            "alpha": self.alpha,
            "points": self.points,
            "tolerance": self.tolerance,
        }

    @property
    def digest(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def with_overrides(self, tolerance: float | None = None, seed: int | None = None) -> "Scenario":
        s = self
        if tolerance is not None:
            _require(tolerance > 0 and math.isfinite(tolerance), "tolerance must be positive")
            s = replace(s, tolerance=float(tolerance))
        if seed is not None and s.random_points is not None:
            s = replace(s, random_points=replace(s.random_points, seed=int(seed)))
        return s

    # ---- validation at the sample points ---------------------------------

    def validate(self) -> None:
        # metric first: the reference observer is only defined for a Lorentzian g
        for p in self.points:
            try:
                g = self.metric_field.value(p)
            except ex.DomainError as err:
                raise ScenarioError(f"metric at point {p}: {err}") from None
            _require(bool(np.all(np.isfinite(g))), f"metric not finite at {p}")
            scale = max(1.0, float(np.max(np.abs(g))))
            _require(float(np.max(np.abs(g - g.T))) <= SYMMETRY_TOL * scale,
                     f"metric is not symmetric at {p}")
            try:
                invert_metric(g)
            except SingularMetricError as err:
                raise ScenarioError(f"metric at {p}: {err}") from None
            _require(signature(g) == (1, 3), f"metric at {p} has signature {signature(g)}, need (-,+,+,+)")
        for p, s in zip(self.points, self.samples):
            xi = s.xi_value
            _require(bool(np.all(np.isfinite(xi))), f"xi not finite at {p}")
            norm = float(xi @ s.bundle.g @ xi)
            _require(abs(norm + 1.0) <= UNIT_TOL, f"xi is not unit timelike at {p}: g(xi, xi) = {norm:.6g}")
            if s.alpha is not None:
                a = s.alpha.value
                _require(float(np.max(np.abs(a - a.T))) <= SYMMETRY_TOL * max(1.0, float(np.max(np.abs(a)))),
                         f"alpha is not symmetric at {p}")


def parse_scenario(doc, source: str = "") -> Scenario:
    _require(isinstance(doc, dict), "scenario must be a mapping")
    unknown = set(doc) - _KEYS
    _require(not unknown, f"unknown keys: {sorted(unknown)}")
    for key in ("metric", "lambda", "kappa"):
        _require(key in doc, f"missing required key: {key}")
    coords = doc.get("coordinates", ["t", "x", "y", "z"])
    _require(isinstance(coords, list) and len(coords) == 4 and all(isinstance(c, str) for c in coords),
             "coordinates: expected 4 names")
    _require(len(set(coords)) == 4, "coordinates: names must be distinct")
    for c in coords:
        _require(c.isidentifier() and c not in ex.FUNCTIONS and c != "pi", f"coordinates: bad name {c!r}")
    kappa = _real(doc, "kappa")
    _require(kappa > 0, "kappa must be positive")
    tol = _real(doc, "tolerance", DEFAULT_TOLERANCE)
    _require(tol > 0, "tolerance must be positive")
    rnd = None
    if doc.get("random_points") is not None:
        r = doc["random_points"]
        _require(isinstance(r, dict) and set(r) == _RANDOM_KEYS,
                 f"random_points: expected keys {sorted(_RANDOM_KEYS)}")
        _require(isinstance(r["count"], int) and not isinstance(r["count"], bool) and r["count"] >= 0,
                 "random_points.count: expected a non-negative integer")
        _require(isinstance(r["seed"], int) and not isinstance(r["seed"], bool), "random_points.seed: expected an integer")
        low = _points([r["low"]], "random_points.low")[0]
        high = _points([r["high"]], "random_points.high")[0]
        _require(all(lo <= hi for lo, hi in zip(low, high)), "random_points: low must not exceed high")
        rnd = RandomPoints(r["count"], tuple(low), tuple(high), r["seed"])
    explicit = _points(doc.get("points") or [], "points")
    scn = Scenario(
        coordinates=tuple(coords),
        metric=_texts(doc["metric"], (4, 4), "metric"),
        lam=_real(doc, "lambda"),
        kappa=kappa,
        tolerance=tol,
        xi=_texts(doc["xi"], (4,), "xi") if doc.get("xi") is not None else None,
        potential=_texts(doc["potential"], (4,), "potential") if doc.get("potential") is not None else None,
        soliton_lambda=_real(doc, "soliton_lambda"),
        alpha=_texts(doc["alpha"], (4, 4), "alpha") if doc.get("alpha") is not None else None,
        explicit_points=explicit,
        random_points=rnd,
        source=source,
    )
    _require(len(scn.points) >= 1, "scenario needs at least one sample point")
    # parse every expression now so syntax errors surface as input errors
    scn.metric_field, scn.xi_field, scn.potential_field, scn.alpha_field
    return scn


def load_scenario(path, tolerance: float | None = None, seed: int | None = None) -> Scenario:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as err:
        raise ScenarioError(f"cannot read {path}: {err.strerror or err}") from None
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise ScenarioError(f"{path}: malformed YAML: {err}") from None
    scn = parse_scenario(doc, str(path)).with_overrides(tolerance, seed)
    scn.validate()
    return scn
