"""Sectioned key-value run configuration.

Sections and keys:

    [surface]   genus, degree
    [class]     weights (comma-separated rationals "p/q"), fiber_area,
                B (optional; computed from the weights when absent)
    [monopole]  points ("x,y,t;x,y,t;..."), group (path or "default")
    [numerics]  grid "nx,ny,nt", word_length, epsilon, truncation,
                box "x0,x1,y0,y1,t0,t1", n_phi, n_radial,
                exclusion_factor, harmonicity_tol, scalar_tol,
                slope_tol, ricci_tol, quantization_tol

Unknown sections or keys are rejected; all tolerances must be positive.
Rationals are parsed exactly ("1/3", "0.25", "2"), so weight arithmetic
downstream stays exact.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .errors import ConfigError
from .lattice import KahlerClassParam, RuledSurfaceModel, admissible_b

_KNOWN_KEYS = {
    "surface": {"genus", "degree"},
    "class": {"weights", "fiber_area", "b"},
    "monopole": {"points", "group"},
    "numerics": {
        "grid", "word_length", "epsilon", "truncation", "box",
        "n_phi", "n_radial", "exclusion_factor",
        "harmonicity_tol", "scalar_tol", "slope_tol", "ricci_tol",
        "quantization_tol",
    },
}
_TOLERANCE_KEYS = {
    "epsilon", "exclusion_factor", "harmonicity_tol", "scalar_tol",
    "slope_tol", "ricci_tol", "quantization_tol",
}


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"malformed rational {text!r}: {exc}") from exc


def parse_rational_list(text: str) -> tuple[Fraction, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(parse_rational(part) for part in text.split(","))


def _parse_int(text: str, key: str) -> int:
    try:
        return int(text.strip())
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: expected an integer, got {text!r}") from exc


def _parse_float(text: str, key: str) -> float:
    try:
        return float(text.strip())
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: expected a number, got {text!r}") from exc


def load_sections(path) -> dict[str, dict[str, str]]:
    """Read and validate the sectioned file into plain string maps."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, "r") as handle:
            parser.read_file(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    sections: dict[str, dict[str, str]] = {}
    for name in parser.sections():
        if name not in _KNOWN_KEYS:
            raise ConfigError(f"unknown section [{name}]")
        body = {}
        for key, value in parser.items(name):
            if key not in _KNOWN_KEYS[name]:
                raise ConfigError(f"unknown key {key!r} in section [{name}]")
            if key in _TOLERANCE_KEYS and _parse_float(value, key) <= 0:
                raise ConfigError(f"tolerance {key!r} must be positive, got {value}")
            body[key] = value
        sections[name] = body
    return sections


def require(sections, section: str, key: str) -> str:
    try:
        return sections[section][key]
    except KeyError:
        raise ConfigError(f"missing key {key!r} in section [{section}]") from None


def build_model(sections) -> RuledSurfaceModel:
    genus = _parse_int(require(sections, "surface", "genus"), "genus")
    degree = _parse_int(require(sections, "surface", "degree"), "degree")
    weights = parse_rational_list(sections.get("class", {}).get("weights", ""))
    try:
        return RuledSurfaceModel(genus=genus, degree=degree, blowups=len(weights))
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def build_class(sections, model: RuledSurfaceModel) -> KahlerClassParam:
    body = sections.get("class", {})
    weights = parse_rational_list(body.get("weights", ""))
    fiber_area = parse_rational(body.get("fiber_area", "1"))
    if "b" in body:
        section_ratio = parse_rational(body["b"])
    else:
        section_ratio = admissible_b(model, weights)
    try:
        return KahlerClassParam(fiber_area, section_ratio, weights)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def parse_points(text: str) -> tuple[tuple[Fraction, Fraction, Fraction], ...]:
    """Charged points "x,y,t;..." with exact coordinates."""
    text = text.strip()
    if not text:
        return ()
    out = []
    for part in text.split(";"):
        coords = part.split(",")
        if len(coords) != 3:
            raise ConfigError(f"point {part!r}: expected x,y,t")
        out.append(tuple(parse_rational(c) for c in coords))
    return tuple(out)


@dataclass
class Numerics:
    grid: tuple[int, int, int] = (24, 24, 24)
    word_length: int = 4
    epsilon: float = 0.4
    truncation: int = 2
    box: tuple[float, ...] | None = None
    n_phi: int = 256
    n_radial: int = 48
    exclusion_factor: float = 3.0
    harmonicity_tol: float | None = None
    scalar_tol: float | None = None
    slope_tol: float = 0.1
    ricci_tol: float | None = None
    quantization_tol: float = 1e-9
    extra: dict = field(default_factory=dict)


def build_numerics(sections) -> Numerics:
    body = dict(sections.get("numerics", {}))
    num = Numerics()
    if "grid" in body:
        parts = body.pop("grid").split(",")
        if len(parts) != 3:
            raise ConfigError("grid must be nx,ny,nt")
        num.grid = tuple(_parse_int(p, "grid") for p in parts)
    if "box" in body:
        parts = body.pop("box").split(",")
        if len(parts) != 6:
            raise ConfigError("box must be x0,x1,y0,y1,t0,t1")
        num.box = tuple(_parse_float(p, "box") for p in parts)
    for key, cast in (
        ("word_length", int), ("truncation", int),
        ("n_phi", int), ("n_radial", int),
    ):
        if key in body:
            num.__setattr__(key, _parse_int(body.pop(key), key))
    for key in (
        "epsilon", "exclusion_factor", "harmonicity_tol", "scalar_tol",
        "slope_tol", "ricci_tol", "quantization_tol",
    ):
        if key in body:
            num.__setattr__(key, _parse_float(body.pop(key), key))
    if num.word_length < 0 or num.truncation < 1:
        raise ConfigError("word_length must be >= 0 and truncation >= 1")
    return num


def resolve_group_path(spec: str | None):
    from .hyperbolic import default_group_path

    if spec is None or spec in ("", "default"):
        return default_group_path()
    path = Path(spec)
    if not path.exists():
        raise ConfigError(f"group file {spec!r} does not exist")
    return path
