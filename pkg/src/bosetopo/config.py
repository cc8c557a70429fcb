"""YAML run configurations.

Schema (all frequencies in plain Hz)::

    model:
      name: PhotoMagnonicRWA          # PhotoMagnonic | PhotoMagnonicRWA | BKC | BosonicSSH
      N: 4
      n_offset: 1
      parameters: {omega_a: 9.999e9, omega_m: 9.999e9, t: 2.5e7, g: 1.0e8}
      perturbations:
        - {kind: MagnonHopping, strength: 0.0}
    task: sparams
    grid: 1024
    tol: 1.0e-8
    pbc: false
    jobs: 1
    output: out.csv
    sweep: {param: "perturbations[0].strength", start: 0.0, stop: 2.0e9, steps: 41}
    sparams: {start: 9.7e9, stop: 10.3e9, points: 2001, kappa_c: 5.0e5, kappa_m: 1.0e7}
    bands: {points: 256}

Complex numbers are written as ``[re, im]`` pairs; strings such as
``"2e9"`` or ``"1+2j"`` are also accepted on input.
"""
from __future__ import annotations

import copy
import re
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import yaml

from .errors import ValidationError
from .models import ModelSpec, PerturbationSpec

TASKS = ("spectrum", "bands", "classify", "invariant", "zeromodes", "sparams", "sweep", "bulkboundary")


class ConfigParseError(ValueError):
    """The document is not valid YAML or not a mapping."""


def _number(value: Any, what: str):
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, float)):
        return value
    if isinstance(value, (list, tuple)) and len(value) == 2:
        re_, im = (_number(v, what) for v in value)
        return complex(re_, im) if im != 0 else float(re_)
    if isinstance(value, dict) and set(value) == {"re", "im"}:
        return _number([value["re"], value["im"]], what)
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            pass
        try:
            z = complex(value.replace(" ", ""))
        except ValueError:
            raise ValidationError(f"{what}: cannot read {value!r} as a number") from None
        return z if z.imag != 0 else z.real
    raise ValidationError(f"{what}: cannot read {value!r} as a number")


def _encode(value: Any):
    if isinstance(value, (bool, int, str)) or value is None:
        return value
    if isinstance(value, complex):
        return [float(value.real), float(value.imag)] if value.imag != 0 else float(value.real)
    return float(value)


def model_to_dict(spec: ModelSpec) -> Dict[str, Any]:
    out: Dict[str, Any] = {
        "name": spec.name,
        "N": int(spec.N),
        "n_offset": int(spec.n_offset),
        "parameters": {k: _encode(v) for k, v in spec.parameters.items()},
    }
    if spec.perturbations:
        out["perturbations"] = []
        for p in spec.perturbations:
            d: Dict[str, Any] = {"kind": p.kind, "strength": float(p.strength)}
            if p.toward is not None:
                d["toward"] = model_to_dict(p.toward)
            out["perturbations"].append(d)
    return out


def model_from_dict(data: Dict[str, Any]) -> ModelSpec:
    if not isinstance(data, dict):
        raise ValidationError("model must be a mapping")
    unknown = set(data) - {"name", "N", "n_offset", "parameters", "perturbations"}
    if unknown:
        raise ValidationError(f"unknown model fields {sorted(unknown)}")
    for key in ("name", "N"):
        if key not in data:
            raise ValidationError(f"model.{key} is required")
    params = {}
    for k, v in (data.get("parameters") or {}).items():
        params[str(k)] = v if isinstance(v, bool) else _number(v, f"parameters.{k}")
    perts: List[PerturbationSpec] = []
    for i, p in enumerate(data.get("perturbations") or []):
        if not isinstance(p, dict) or "kind" not in p:
            raise ValidationError(f"perturbations[{i}] needs a kind")
        toward = model_from_dict(p["toward"]) if p.get("toward") is not None else None
        strength = _number(p.get("strength", 0.0), f"perturbations[{i}].strength")
        if isinstance(strength, complex):
            raise ValidationError(f"perturbations[{i}].strength must be real")
        perts.append(PerturbationSpec(str(p["kind"]), float(strength), toward))
    N = _number(data["N"], "N")
    offset = _number(data.get("n_offset", 0), "n_offset")
    if isinstance(N, complex) or float(N) != int(N) or isinstance(offset, complex) or float(offset) != int(offset):
        raise ValidationError("N and n_offset must be integers")
    return ModelSpec(str(data["name"]), int(N), params, int(offset), tuple(perts))


@dataclass
class SweepSpec:
    param: str
    start: float
    stop: float
    steps: int

    def __post_init__(self) -> None:
        if int(self.steps) < 2:
            raise ValidationError("a sweep needs at least 2 steps")
        self.steps = int(self.steps)


@dataclass
class RunConfig:
    model: ModelSpec
    task: str = "spectrum"
    sweep: Optional[SweepSpec] = None
    output: Optional[str] = None
    grid: int = 1024
    tol: Optional[float] = None
    pbc: bool = False
    jobs: int = 1
    sparams: Dict[str, float] = field(default_factory=dict)
    bands: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.task not in TASKS:
            raise ValidationError(f"unknown task {self.task!r}; expected one of {TASKS}")
        if int(self.grid) < 4:
            raise ValidationError("grid must be at least 4")
        if int(self.jobs) < 1:
            raise ValidationError("jobs must be at least 1")
        if self.tol is not None and not self.tol > 0:
            raise ValidationError("tol must be positive")
        if self.sweep is not None:
            resolve_path(model_to_dict(self.model), self.sweep.param)

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"model": model_to_dict(self.model), "task": self.task,
                               "grid": int(self.grid), "pbc": bool(self.pbc), "jobs": int(self.jobs)}
        if self.tol is not None:
            out["tol"] = float(self.tol)
        if self.output is not None:
            out["output"] = self.output
        if self.sweep is not None:
            out["sweep"] = {"param": self.sweep.param, "start": float(self.sweep.start),
                            "stop": float(self.sweep.stop), "steps": self.sweep.steps}
        if self.sparams:
            out["sparams"] = {k: _encode(v) for k, v in self.sparams.items()}
        if self.bands:
            out["bands"] = {k: _encode(v) for k, v in self.bands.items()}
        return out


def _real(value: Any, what: str) -> float:
    x = _number(value, what)
    if isinstance(x, complex) or isinstance(x, bool):
        raise ValidationError(f"{what} must be a real number")
    return float(x)


def config_from_dict(data: Dict[str, Any]) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigParseError("configuration must be a mapping")
    if "model" not in data:
        raise ValidationError("configuration needs a model section")
    allowed = {"model", "task", "sweep", "output", "grid", "tol", "pbc", "jobs", "sparams", "bands"}
    unknown = set(data) - allowed
    if unknown:
        raise ValidationError(f"unknown configuration fields {sorted(unknown)}")
    sweep = None
    if data.get("sweep") is not None:
        s = data["sweep"]
        if not isinstance(s, dict) or "param" not in s:
            raise ValidationError("sweep needs param, start, stop and steps")
        try:
            sweep = SweepSpec(str(s["param"]), _real(s["start"], "sweep.start"),
                              _real(s["stop"], "sweep.stop"), int(_real(s["steps"], "sweep.steps")))
        except KeyError as exc:
            raise ValidationError(f"sweep is missing {exc.args[0]}") from None
    tol = data.get("tol")
    return RunConfig(
        model=model_from_dict(data["model"]),
        task=str(data.get("task", "spectrum")),
        sweep=sweep,
        output=data.get("output"),
        grid=int(_real(data.get("grid", 1024), "grid")),
        tol=None if tol is None else _real(tol, "tol"),
        pbc=bool(data.get("pbc", False)),
        jobs=int(_real(data.get("jobs", 1), "jobs")),
        sparams={k: _real(v, f"sparams.{k}") for k, v in (data.get("sparams") or {}).items()},
        bands={k: _real(v, f"bands.{k}") for k, v in (data.get("bands") or {}).items()},
    )


def loads(text: str) -> RunConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        first = str(exc).splitlines()[0] if str(exc) else "invalid YAML"
        raise ConfigParseError(first) from None
    return config_from_dict(data)


def load(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigParseError(f"cannot read {path}: {exc.strerror}") from None
    return loads(text)


def dumps(config: RunConfig) -> str:
    return yaml.safe_dump(config.to_dict(), sort_keys=False)


def dump_model(spec: ModelSpec) -> str:
    return yaml.safe_dump(model_to_dict(spec), sort_keys=False)


def load_model(text: str) -> ModelSpec:
    try:
        return model_from_dict(yaml.safe_load(text))
    except yaml.YAMLError as exc:
        raise ConfigParseError(str(exc).splitlines()[0]) from None


# ---------------------------------------------------------------- parameter paths

_TOKEN = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)|\[(\d+)\]")


def _tokens(path: str) -> List[Any]:
    toks: List[Any] = []
    for part in path.split("."):
        if not part:
            raise ValidationError(f"malformed parameter path {path!r}")
        i = 0
        while i < len(part):
            m = _TOKEN.match(part, i)
            if not m:
                raise ValidationError(f"malformed parameter path {path!r}")
            toks.append(m.group(1) if m.group(1) is not None else int(m.group(2)))
            i = m.end()
    return toks


def _normalize(model: Dict[str, Any], path: str) -> List[Any]:
    toks = _tokens(path)
    # a bare parameter name is shorthand for parameters.<name>
    if len(toks) == 1 and toks[0] not in model and toks[0] in (model.get("parameters") or {}):
        toks = ["parameters", toks[0]]
    return toks


def resolve_path(model: Dict[str, Any], path: str) -> Any:
    node: Any = model
    for tok in _normalize(model, path):
        try:
            node = node[tok]
        except (KeyError, IndexError, TypeError):
            raise ValidationError(f"parameter path {path!r} does not exist in the model") from None
    return node


def set_path(spec: ModelSpec, path: str, value: float) -> ModelSpec:
    """Copy of ``spec`` with the entry at ``path`` replaced by ``value``."""
    data = copy.deepcopy(model_to_dict(spec))
    toks = _normalize(data, path)
    resolve_path(data, path)
    node: Any = data
    for tok in toks[:-1]:
        node = node[tok]
    node[toks[-1]] = value
    return model_from_dict(data)
