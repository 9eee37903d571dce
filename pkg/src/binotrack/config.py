"""Scenario files: YAML documents mirroring :class:`~binotrack.simulator.Scenario`.

Schema (all lengths in the global frame)::

    name: fig3a                 # optional
    initial:
      t: 0.0                    # optional, default 0
      p_l: [-10, 5]
      p_r: [10, 5]
      p_t: [15, 30]
    goal: {xi_star: 1.2, eta_star: pi/2, c_star: 40}
    gains: {kappa_c: 0.1, kappa_eta: 1.0, kappa_xi: 1.0}
    trajectory:                 # optional, default stationary
      kind: stationary | circular | waypoints
      center: [100, 100]        # circular
      radius: 50                # circular
      speed: 5                  # circular (signed, + is counter-clockwise) or waypoints
      points: [[100, 50], [250, 200]]   # waypoints
    dt: 0.01                    # optional
    t_end: 150
    seed: 0                     # optional
    decimate: 10                # optional

Angles may be written as numbers or as ``pi`` multiples such as ``pi/2``,
``3*pi/2`` or ``0.5pi``. Unknown keys are rejected.
"""

from __future__ import annotations

import math
import re
from pathlib import Path
from typing import Any

import yaml

from .controller import FormationGoal, Gains
from .geometry import Vec2
from .simulator import Circular, Scenario, SimState, Stationary, Waypoints


class ScenarioFileError(ValueError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.path = path

    def __str__(self) -> str:
        where = "".join(f"{part}:" for part in (self.path, self.line) if part is not None)
        return f"{where} {self.message}" if where else self.message


class _LineDict(dict):
    """Mapping that remembers the 1-based source line of each key."""

    lines: dict
    line: int


class _Loader(yaml.SafeLoader):
    pass


def _construct_mapping(loader, node, deep=False):
    loader.flatten_mapping(node)
    d = _LineDict()
    d.lines = {}
    d.line = node.start_mark.line + 1
    for key_node, value_node in node.value:
        key = loader.construct_object(key_node, deep=deep)
        if key in d:
            raise ScenarioFileError(f"duplicate key {key!r}", key_node.start_mark.line + 1)
        d[key] = loader.construct_object(value_node, deep=deep)
        d.lines[key] = key_node.start_mark.line + 1
    return d


_Loader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)

_PI_RE = re.compile(r"^\s*([-+]?\d*\.?\d*(?:[eE][-+]?\d+)?)\s*\*?\s*pi\s*(?:/\s*(\d*\.?\d+))?\s*$")


def _number(value: Any, what: str, line: int | None) -> float:
    if isinstance(value, bool):
        raise ScenarioFileError(f"{what} must be a number, got {value!r}", line)
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        m = _PI_RE.match(value)
        if m:
            coef = m.group(1)
            k = 1.0 if coef in ("", "+") else -1.0 if coef == "-" else float(coef)
            den = float(m.group(2)) if m.group(2) else 1.0
            return k * math.pi / den
        try:
            return float(value)
        except ValueError:
            pass
    raise ScenarioFileError(f"{what} must be a number, got {value!r}", line)


def _vec(value: Any, what: str, line: int | None) -> Vec2:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ScenarioFileError(f"{what} must be a two-element list [x, y]", line)
    return Vec2(_number(value[0], what, line), _number(value[1], what, line))


def _section(doc: Any, key: str, parent_line: int | None, required: bool = True) -> _LineDict | None:
    if key not in doc:
        if required:
            raise ScenarioFileError(f"missing required key {key!r}", parent_line)
        return None
    sec = doc[key]
    if not isinstance(sec, dict):
        raise ScenarioFileError(f"{key!r} must be a mapping", doc.lines.get(key))
    return sec


def _check_keys(d: _LineDict, allowed: set[str], where: str) -> None:
    for k in d:
        if k not in allowed:
            raise ScenarioFileError(f"unknown key {k!r} in {where}", d.lines.get(k))


def _get(d: _LineDict, key: str, where: str, default: Any = ...) -> tuple[Any, int | None]:
    if key not in d:
        if default is ...:
            raise ScenarioFileError(f"missing required key {key!r} in {where}", getattr(d, "line", None))
        return default, None
    return d[key], d.lines.get(key)


def scenario_from_dict(doc: Any) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioFileError("scenario document must be a mapping", 1)
    _check_keys(doc, {"name", "initial", "goal", "gains", "trajectory", "dt", "t_end",
                      "seed", "decimate"}, "scenario")
    top = getattr(doc, "line", 1)

    ini = _section(doc, "initial", top)
    _check_keys(ini, {"t", "p_l", "p_r", "p_t"}, "initial")
    vals = {}
    for k in ("p_l", "p_r", "p_t"):
        v, ln = _get(ini, k, "initial")
        vals[k] = _vec(v, f"initial.{k}", ln)
    t0, ln = _get(ini, "t", "initial", 0.0)
    t0 = _number(t0, "initial.t", ln)

    g = _section(doc, "goal", top)
    _check_keys(g, {"xi_star", "eta_star", "c_star"}, "goal")
    gv = {}
    for n in ("xi_star", "eta_star", "c_star"):
        v, ln = _get(g, n, "goal")
        gv[n] = _number(v, f"goal.{n}", ln)

    k = _section(doc, "gains", top)
    _check_keys(k, {"kappa_c", "kappa_eta", "kappa_xi"}, "gains")
    kv = {}
    for n in ("kappa_c", "kappa_eta", "kappa_xi"):
        v, ln = _get(k, n, "gains")
        kv[n] = _number(v, f"gains.{n}", ln)

    traj = Stationary()
    tr = _section(doc, "trajectory", top, required=False)
    if tr is not None:
        kind, ln = _get(tr, "kind", "trajectory")
        try:
            if kind == "stationary":
                _check_keys(tr, {"kind"}, "trajectory")
            elif kind == "circular":
                _check_keys(tr, {"kind", "center", "radius", "speed"}, "trajectory")
                center, cl = _get(tr, "center", "trajectory")
                radius, rl = _get(tr, "radius", "trajectory")
                speed, sl = _get(tr, "speed", "trajectory")
                traj = Circular(_vec(center, "trajectory.center", cl),
                                _number(radius, "trajectory.radius", rl),
                                _number(speed, "trajectory.speed", sl))
            elif kind == "waypoints":
                _check_keys(tr, {"kind", "points", "speed"}, "trajectory")
                pts, pl = _get(tr, "points", "trajectory")
                speed, sl = _get(tr, "speed", "trajectory")
                if not isinstance(pts, list):
                    raise ScenarioFileError("trajectory.points must be a list of [x, y]", pl)
                traj = Waypoints(tuple(_vec(p, "trajectory.points", pl) for p in pts),
                                 _number(speed, "trajectory.speed", sl))
            else:
                raise ScenarioFileError(
                    f"trajectory.kind must be stationary, circular or waypoints, got {kind!r}", ln)
        except ScenarioFileError:
            raise
        except ValueError as exc:
            raise ScenarioFileError(str(exc), tr.line) from exc

    def integer(v, what, ln):
        if isinstance(v, bool) or not isinstance(v, int):
            raise ScenarioFileError(f"{what} must be an integer, got {v!r}", ln)
        return v

    v, ln = _get(doc, "t_end", "scenario")
    t_end = _number(v, "t_end", ln)
    v, ln = _get(doc, "dt", "scenario", 0.01)
    dt = _number(v, "dt", ln)
    v, ln = _get(doc, "seed", "scenario", 0)
    seed = integer(v, "seed", ln)
    v, ln = _get(doc, "decimate", "scenario", 10)
    decimate = integer(v, "decimate", ln)
    name = doc.get("name", "")
    if not isinstance(name, str):
        raise ScenarioFileError("name must be a string", doc.lines.get("name"))

    try:
        return Scenario(
            initial=SimState(t0, vals["p_l"], vals["p_r"], vals["p_t"]),
            goal=FormationGoal(**gv),
            gains=Gains(**kv),
            trajectory=traj,
            dt=dt,
            t_end=t_end,
            seed=seed,
            decimate=decimate,
            name=name,
        )
    except ValueError as exc:
        raise ScenarioFileError(f"invalid scenario: {exc}", top) from exc


def loads(text: str, path: str | None = None) -> Scenario:
    try:
        doc = yaml.load(text, Loader=_Loader)
        return scenario_from_dict(doc)
    except ScenarioFileError as exc:
        exc.path = path
        raise
    except yaml.MarkedYAMLError as exc:
        line = exc.problem_mark.line + 1 if exc.problem_mark else None
        raise ScenarioFileError(f"YAML syntax error: {exc.problem}", line, path) from exc


def load(path: str | Path) -> Scenario:
    path = Path(path)
    return loads(path.read_text(), str(path))


def scenario_to_dict(sc: Scenario) -> dict:
    traj = sc.trajectory
    if isinstance(traj, Circular):
        tdoc = {"kind": "circular", "center": list(traj.center), "radius": traj.radius,
                "speed": traj.speed}
    elif isinstance(traj, Waypoints):
        tdoc = {"kind": "waypoints", "points": [list(p) for p in traj.points], "speed": traj.speed}
    else:
        tdoc = {"kind": "stationary"}
    doc = {
        "name": sc.name,
        "initial": {"t": sc.initial.t, "p_l": list(sc.initial.p_l),
                    "p_r": list(sc.initial.p_r), "p_t": list(sc.initial.p_t)},
        "goal": {"xi_star": sc.goal.xi_star, "eta_star": sc.goal.eta_star,
                 "c_star": sc.goal.c_star},
        "gains": {"kappa_c": sc.gains.kappa_c, "kappa_eta": sc.gains.kappa_eta,
                  "kappa_xi": sc.gains.kappa_xi},
        "trajectory": tdoc,
        "dt": sc.dt,
        "t_end": sc.t_end,
        "seed": sc.seed,
        "decimate": sc.decimate,
    }
    if not sc.name:
        del doc["name"]
    return doc


def dumps(sc: Scenario) -> str:
    doc = scenario_to_dict(sc)
    # plain floats, not numpy scalars, so the output stays safe_load-able
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=None)


def dump(sc: Scenario, path: str | Path) -> None:
    Path(path).write_text(dumps(sc))
