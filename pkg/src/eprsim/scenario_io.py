"""Deterministic scenario and result serialization.

Scenario documents are strict JSON (unknown fields rejected) in natural
units (hbar = 1, dimensionless masses), declared by the header fields
``schema_version`` and ``units``::

    {
      "schema_version": "1",
      "units": "natural",
      "state": {
        "kind": "singlet",                  # singlet | triplet_m | custom_terms
        "dimension": 1,
        "masses": [1.0, 1.0],
        "statistics": "distinguishable",    # distinguishable | boson | fermion
        "packets": [ {"center": [-2.0], "width": [0.5],
                      "momentum": [0.0], "phase": 0.0}, ... ],
        "m_total": 0,                       # triplet_m only
        "terms": [ ... ]                    # custom_terms only
      },
      "observers": {
        "a": {"velocity": [0.0], "time": 0.0,
              "region": {"lo": [-4.0], "hi": [-1.0]},   # or {"all": true}
              "direction": {"theta": 0.0, "phi": 0.0}},
        "b": { ... }
      },
      "backend": {"kind": "analytic"},      # or {"kind": "grid", "n": 512, "l": 16.0}
      "outputs": ["joint", "correlation"]
    }

Custom terms carry ``amplitude`` as [re, im] plus ``m_alpha``/``m_beta``
and the two packets.  Emission is byte-deterministic: fixed key order and
floating point rendered with 17 significant digits, so parse/emit
round-trips are identity maps on documents and results.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .correlation import CorrelationResult, ObserverSpec, Scenario
from .errors import ValidationError
from .grid import GridConfig
from .measurement import Region
from .spin import Direction
from .states import GaussianPacket, StateTerm, TwoParticleState, make_singlet, make_triplet

__all__ = [
    "ScenarioDocument",
    "parse_document",
    "parse_scenario",
    "emit_document",
    "document_from_scenario",
    "emit_results",
    "parse_results",
    "OUTPUT_KINDS",
]

SCHEMA_VERSION = "1"
OUTPUT_KINDS = ("joint", "correlation", "symmetrized", "equal_time",
                "singlet_closed_form", "triplet_closed_form", "identical")


# ---------------------------------------------------------------------------
# strict document walking

def _fail(path: str, message: str):
    raise ValidationError(message, path=path)


def _expect_object(node, path: str, allowed: tuple, required: tuple) -> dict:
    if not isinstance(node, dict):
        _fail(path, "expected an object")
    for key in node:
        if key not in allowed:
            _fail(f"{path}.{key}" if path else key, "unknown field")
    for key in required:
        if key not in node:
            _fail(f"{path}.{key}" if path else key, "missing required field")
    return node


def _number(node, path: str) -> float:
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        _fail(path, "expected a number")
    if not math.isfinite(node):
        _fail(path, "expected a finite number")
    return float(node)


def _integer(node, path: str) -> int:
    if isinstance(node, bool) or not isinstance(node, int):
        _fail(path, "expected an integer")
    return node


def _string(node, path: str, choices: tuple | None = None) -> str:
    if not isinstance(node, str):
        _fail(path, "expected a string")
    if choices is not None and node not in choices:
        _fail(path, f"expected one of {', '.join(choices)}")
    return node


def _vector(node, path: str, length: int | None = None) -> tuple:
    if not isinstance(node, list) or not node:
        _fail(path, "expected a non-empty array of numbers")
    out = tuple(_number(v, f"{path}[{i}]") for i, v in enumerate(node))
    if length is not None and len(out) != length:
        _fail(path, f"expected {length} components")
    return out


def _parse_packet(node, path: str, dimension: int) -> GaussianPacket:
    _expect_object(node, path, ("center", "width", "momentum", "phase", "chirp"),
                   ("center", "width"))
    center = _vector(node["center"], f"{path}.center", dimension)
    width = _vector(node["width"], f"{path}.width", dimension)
    for i, w in enumerate(width):
        if w <= 0.0:
            _fail(f"{path}.width[{i}]", "width must be strictly positive")
    momentum = _vector(node["momentum"], f"{path}.momentum", dimension) \
        if "momentum" in node else None
    phase = _number(node["phase"], f"{path}.phase") if "phase" in node else 0.0
    chirp = _vector(node["chirp"], f"{path}.chirp", dimension) \
        if "chirp" in node else None
    return GaussianPacket(center, width, momentum, phase, chirp)


def _parse_state(node, path: str) -> TwoParticleState:
    _expect_object(node, path,
                   ("kind", "dimension", "masses", "statistics", "spin",
                    "packets", "m_total", "terms"),
                   ("kind", "dimension", "masses"))
    kind = _string(node["kind"], f"{path}.kind",
                   ("singlet", "triplet_m", "custom_terms"))
    dimension = _integer(node["dimension"], f"{path}.dimension")
    if dimension not in (1, 2, 3):
        _fail(f"{path}.dimension", "dimension must be 1, 2 or 3")
    masses = _vector(node["masses"], f"{path}.masses", 2)
    if any(m <= 0.0 for m in masses):
        _fail(f"{path}.masses", "masses must be positive")
    statistics = _string(node.get("statistics", "distinguishable"),
                         f"{path}.statistics",
                         ("distinguishable", "boson", "fermion"))

    if kind in ("singlet", "triplet_m"):
        if "terms" in node:
            _fail(f"{path}.terms", f"terms are not allowed for kind {kind!r}")
        if "spin" in node:
            _fail(f"{path}.spin", f"spin is fixed to 1/2 for kind {kind!r}")
        packets = node.get("packets")
        if not isinstance(packets, list) or len(packets) != 2:
            _fail(f"{path}.packets", "expected exactly two packets")
        phi = _parse_packet(packets[0], f"{path}.packets[0]", dimension)
        chi = _parse_packet(packets[1], f"{path}.packets[1]", dimension)
        try:
            if kind == "singlet":
                if "m_total" in node:
                    _fail(f"{path}.m_total", "m_total applies to triplet_m only")
                return make_singlet(phi, chi, masses, statistics)
            if "m_total" not in node:
                _fail(f"{path}.m_total", "missing required field")
            m_total = _integer(node["m_total"], f"{path}.m_total")
            if m_total not in (-1, 0, 1):
                _fail(f"{path}.m_total", "m_total must be -1, 0 or +1")
            return make_triplet(phi, chi, m_total, masses, statistics)
        except ValueError as exc:
            if isinstance(exc, ValidationError):
                raise
            _fail(path, str(exc))

    spin = _number(node.get("spin", 0.5), f"{path}.spin")
    if "packets" in node:
        _fail(f"{path}.packets", "custom_terms states carry packets inside terms")
    terms_node = node.get("terms")
    if not isinstance(terms_node, list) or not terms_node:
        _fail(f"{path}.terms", "expected a non-empty array of terms")
    terms = []
    for i, tnode in enumerate(terms_node):
        tpath = f"{path}.terms[{i}]"
        _expect_object(tnode, tpath,
                       ("amplitude", "m_alpha", "m_beta", "packet_alpha", "packet_beta"),
                       ("amplitude", "m_alpha", "m_beta", "packet_alpha", "packet_beta"))
        amp = _vector(tnode["amplitude"], f"{tpath}.amplitude", 2)
        ma = _number(tnode["m_alpha"], f"{tpath}.m_alpha")
        mb = _number(tnode["m_beta"], f"{tpath}.m_beta")
        for label, value in (("m_alpha", ma), ("m_beta", mb)):
            if abs(value) > spin + 1e-12:
                _fail(f"{tpath}.{label}", f"|m| exceeds the spin {spin}")
        terms.append(StateTerm(
            complex(amp[0], amp[1]),
            _parse_packet(tnode["packet_alpha"], f"{tpath}.packet_alpha", dimension),
            _parse_packet(tnode["packet_beta"], f"{tpath}.packet_beta", dimension),
            ma, mb))
    try:
        state = TwoParticleState(spin, dimension, masses[0], masses[1],
                                 statistics, tuple(terms))
        return state.normalized()
    except ValueError as exc:
        _fail(path, str(exc))


def _parse_region(node, path: str, dimension: int) -> Region:
    _expect_object(node, path, ("all", "lo", "hi"), ())
    if node.get("all") is True:
        if "lo" in node or "hi" in node:
            _fail(path, "all-space region cannot carry box bounds")
        return Region.all_space()
    if "lo" not in node or "hi" not in node:
        _fail(path, "region needs either all=true or lo and hi")
    lo = _vector(node["lo"], f"{path}.lo", dimension)
    hi = _vector(node["hi"], f"{path}.hi", dimension)
    for i, (l, h) in enumerate(zip(lo, hi)):
        if l >= h:
            _fail(f"{path}.lo[{i}]", "box requires lo < hi componentwise")
    return Region.box(lo, hi)


def _parse_direction(node, path: str) -> Direction:
    _expect_object(node, path, ("theta", "phi"), ("theta",))
    theta = _number(node["theta"], f"{path}.theta")
    phi = _number(node.get("phi", 0.0), f"{path}.phi")
    if not 0.0 <= theta <= math.pi:
        _fail(f"{path}.theta", "theta must lie in [0, pi]")
    if not 0.0 <= phi < 2.0 * math.pi:
        _fail(f"{path}.phi", "phi must lie in [0, 2*pi)")
    return Direction(theta, phi)


def _parse_observer(node, path: str, dimension: int) -> ObserverSpec:
    _expect_object(node, path, ("velocity", "time", "region", "direction"),
                   ("velocity", "time", "region", "direction"))
    return ObserverSpec(
        velocity=_vector(node["velocity"], f"{path}.velocity", dimension),
        time=_number(node["time"], f"{path}.time"),
        region=_parse_region(node["region"], f"{path}.region", dimension),
        direction=_parse_direction(node["direction"], f"{path}.direction"))


def _parse_backend(node, path: str, dimension: int):
    _expect_object(node, path, ("kind", "n", "l"), ("kind",))
    kind = _string(node["kind"], f"{path}.kind", ("analytic", "grid"))
    if kind == "analytic":
        if "n" in node or "l" in node:
            _fail(path, "analytic backend takes no grid parameters")
        return "analytic", None
    n = _integer(node.get("n", 512), f"{path}.n")
    ell = _number(node.get("l", 16.0), f"{path}.l")
    try:
        return "grid", GridConfig(dimension, n, ell)
    except ValueError as exc:
        _fail(path, str(exc))


@dataclass(frozen=True)
class ScenarioDocument:
    """Validated scenario plus requested output quantities."""

    scenario: Scenario
    outputs: tuple
    schema_version: str = SCHEMA_VERSION


def parse_document(text: str) -> ScenarioDocument:
    """Parse and validate a scenario document; errors carry field paths."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"not valid JSON: {exc}") from exc
    _expect_object(raw, "", ("schema_version", "units", "state", "observers",
                             "backend", "outputs"),
                   ("schema_version", "state", "observers", "backend"))
    version = _string(raw["schema_version"], "schema_version", (SCHEMA_VERSION,))
    if "units" in raw:
        _string(raw["units"], "units", ("natural",))
    state = _parse_state(raw["state"], "state")
    obs_node = _expect_object(raw["observers"], "observers", ("a", "b"), ("a", "b"))
    observer_a = _parse_observer(obs_node["a"], "observers.a", state.dimension)
    observer_b = _parse_observer(obs_node["b"], "observers.b", state.dimension)
    backend, grid = _parse_backend(raw["backend"], "backend", state.dimension)
    outputs = raw.get("outputs", ["joint", "correlation"])
    if not isinstance(outputs, list) or not outputs:
        _fail("outputs", "expected a non-empty array of output names")
    for i, out in enumerate(outputs):
        _string(out, f"outputs[{i}]", OUTPUT_KINDS)
    if observer_b.time < observer_a.time:
        _fail("observers.b.time", "observer B must measure at or after observer A")
    try:
        scenario = Scenario(state, observer_a, observer_b, backend, grid)
    except ValidationError as exc:
        raise ValidationError(str(exc), path="") from exc
    return ScenarioDocument(scenario, tuple(outputs), version)


def parse_scenario(text: str) -> Scenario:
    """Parse a scenario document to its Scenario (outputs field ignored)."""
    return parse_document(text).scenario


# ---------------------------------------------------------------------------
# deterministic emission: fixed key order, floats at 17 significant digits

def _fmt(x: float) -> str:
    if x != x or x in (float("inf"), float("-inf")):
        raise ValueError("cannot serialize a non-finite number")
    if x == int(x) and abs(x) < 1e16:
        return repr(float(x))
    return format(x, ".17g")


def _render(node, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(node, dict):
        if not node:
            return "{}"
        rows = [f'{pad}  "{k}": {_render(v, indent + 1)}' for k, v in node.items()]
        return "{\n" + ",\n".join(rows) + f"\n{pad}}}"
    if isinstance(node, (list, tuple)):
        inner = [_render(v, indent + 1) for v in node]
        if all(not isinstance(v, (dict, list, tuple)) for v in node):
            return "[" + ", ".join(inner) + "]"
        rows = [f"{pad}  {v}" for v in inner]
        return "[\n" + ",\n".join(rows) + f"\n{pad}]"
    if isinstance(node, bool):
        return "true" if node else "false"
    if node is None:
        return "null"
    if isinstance(node, str):
        return json.dumps(node)
    if isinstance(node, int):
        return str(node)
    return _fmt(float(node))


def _packet_node(p: GaussianPacket) -> dict:
    node = {"center": list(p.center), "width": list(p.width),
            "momentum": list(p.momentum), "phase": p.phase}
    if any(c != 0.0 for c in p.chirp):
        node["chirp"] = list(p.chirp)
    return node


def _state_node(state: TwoParticleState) -> dict:
    return {
        "kind": "custom_terms",
        "dimension": state.dimension,
        "masses": [state.mass_alpha, state.mass_beta],
        "statistics": state.statistics,
        "spin": state.spin,
        "terms": [
            {"amplitude": [t.amplitude.real, t.amplitude.imag],
             "m_alpha": t.m_alpha, "m_beta": t.m_beta,
             "packet_alpha": _packet_node(t.packet_alpha),
             "packet_beta": _packet_node(t.packet_beta)}
            for t in state.terms],
    }


def _observer_node(obs: ObserverSpec) -> dict:
    region = {"all": True} if obs.region.is_all else \
        {"lo": list(obs.region.lo), "hi": list(obs.region.hi)}
    return {"velocity": list(obs.velocity), "time": obs.time, "region": region,
            "direction": {"theta": obs.direction.theta, "phi": obs.direction.phi}}


def document_from_scenario(scenario: Scenario,
                           outputs=("joint", "correlation")) -> ScenarioDocument:
    return ScenarioDocument(scenario, tuple(outputs))


def emit_document(doc: ScenarioDocument) -> str:
    scenario = doc.scenario
    backend = {"kind": scenario.backend}
    if scenario.backend == "grid":
        backend["n"] = scenario.grid.points_per_axis
        backend["l"] = scenario.grid.half_extent
    node = {
        "schema_version": doc.schema_version,
        "units": "natural",
        "state": _state_node(scenario.state),
        "observers": {"a": _observer_node(scenario.observer_a),
                      "b": _observer_node(scenario.observer_b)},
        "backend": backend,
        "outputs": list(doc.outputs),
    }
    return _render(node) + "\n"


# ---------------------------------------------------------------------------
# results

def emit_results(result: CorrelationResult, fmt: str = "csv") -> str:
    """Render a correlation result.

    CSV: rows (lambda_a, lambda_b, probability) in descending eigenvalue
    order, then one summary row ``C,,value``; no header.  JSON mirrors the
    result field-for-field.
    """
    if fmt == "csv":
        rows = []
        for i, la in enumerate(result.lambdas):
            for j, lb in enumerate(result.lambdas):
                rows.append(f"{_fmt(la)},{_fmt(lb)},{_fmt(result.joint[i, j])}")
        rows.append(f"C,,{_fmt(result.value)}")
        return "\n".join(rows) + "\n"
    if fmt == "json":
        node = {
            "schema_version": SCHEMA_VERSION,
            "backend_used": result.backend_used,
            "lambdas": list(result.lambdas),
            "joint": [list(row) for row in result.joint],
            "marginal_a": list(result.marginal_a),
            "marginal_b": list(result.marginal_b),
            "value": result.value,
            "diagnostics": {k: result.diagnostics[k] for k in sorted(result.diagnostics)},
        }
        return _render(node) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def parse_results(text: str) -> CorrelationResult:
    """Inverse of emit_results(..., 'json')."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"not valid JSON: {exc}") from exc
    _expect_object(raw, "", ("schema_version", "backend_used", "lambdas", "joint",
                             "marginal_a", "marginal_b", "value", "diagnostics"),
                   ("backend_used", "lambdas", "joint", "marginal_a",
                    "marginal_b", "value"))
    lambdas = _vector(raw["lambdas"], "lambdas")
    m = len(lambdas)
    joint_node = raw["joint"]
    if not isinstance(joint_node, list) or len(joint_node) != m:
        _fail("joint", f"expected {m} rows")
    joint = np.array([_vector(row, f"joint[{i}]", m)
                      for i, row in enumerate(joint_node)])
    diagnostics = raw.get("diagnostics", {})
    if not isinstance(diagnostics, dict):
        _fail("diagnostics", "expected an object")
    return CorrelationResult(
        lambdas=lambdas, joint=joint,
        marginal_a=np.array(_vector(raw["marginal_a"], "marginal_a", m)),
        marginal_b=np.array(_vector(raw["marginal_b"], "marginal_b", m)),
        value=_number(raw["value"], "value"),
        backend_used=_string(raw["backend_used"], "backend_used"),
        diagnostics={k: _number(v, f"diagnostics.{k}") for k, v in diagnostics.items()})
