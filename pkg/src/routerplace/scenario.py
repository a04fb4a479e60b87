"""Scenario documents and the CSV trace / surface formats.

Scenario files are JSON::

    {
      "format_version": 1,
      "name": "two_flow_table3_noise1",
      "seed": 0,
      "channel": {"eta": 2.0, "p_t": 1.0, "p_m": 1.0, "p_n": 1.0},
      "flows": [
        {"tx": {"pos": [-10, 0]},
         "rx": {"pos": [10, 0], "mobile": false},
         "robots": [{"pos": [0, 0]}, {"pos": [2, 0]}]}
      ],
      "annealing": {"iterations": 40000},
      "controller": {"delta": 0.25},
      "mobility": {"start_iteration": 100, "stop_iteration": 400}
    }

Only ``flows`` is required. Node ids are assigned in document order, flow
by flow: transmitter, robots, receiver. So the first flow with two robots
gets ids 1-4 and the second gets 5-8.

Trace and surface files are comma-separated with a leading
``#format_version=1`` line, a header row and numbers printed with 12
significant digits.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterable

import numpy as np

from .annealing import AnnealingSchedule, AnnealTrace
from .channel import ChannelParams
from .distributed import ControllerParams, DistributedTrace, EndpointMobility, MobilityModel
from .network import FlowSpec, Network, NetworkState, flow_costs
from .validation import ValidationError, check_count, check_finite, check_positive

FORMAT_VERSION = 1
SCENARIO_DIR = Path(__file__).parent / "scenarios"


class ScenarioError(Exception):
    """Base class for problems with a scenario document."""


class ScenarioParseError(ScenarioError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line, self.column = line, column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


class ScenarioValidationError(ScenarioError, ValidationError):
    def __init__(self, field: str, message: str):
        ValidationError.__init__(self, field, message)


@dataclass(frozen=True)
class EndpointDoc:
    pos: tuple[float, float]
    mobile: bool = False
    step: float = 0.2


@dataclass(frozen=True)
class FlowDoc:
    tx: EndpointDoc
    rx: EndpointDoc
    robots: tuple[tuple[float, float], ...] = ()


@dataclass(frozen=True)
class MobilityDoc:
    start_iteration: int = 0
    stop_iteration: int | None = None
    period: int = 1
    bounds: tuple[float, float, float, float] | None = None  # None: scenario box + margin
    margin: float = 2.0


@dataclass(frozen=True)
class ScenarioDoc:
    name: str
    flows: tuple[FlowDoc, ...]
    channel: ChannelParams = field(default_factory=ChannelParams)
    annealing: AnnealingSchedule = field(default_factory=AnnealingSchedule)
    controller: ControllerParams = field(default_factory=ControllerParams)
    mobility: MobilityDoc = field(default_factory=MobilityDoc)
    seed: int = 0

    def flow_specs(self) -> list[FlowSpec]:
        specs, next_id = [], 1
        for i, f in enumerate(self.flows, start=1):
            robots = tuple(range(next_id + 1, next_id + 1 + len(f.robots)))
            rx = next_id + 1 + len(f.robots)
            specs.append(FlowSpec(i, next_id, rx, robots, f.tx.mobile, f.rx.mobile))
            next_id = rx + 1
        return specs

    def network(self) -> Network:
        return Network(self.flow_specs())

    def initial_state(self) -> NetworkState:
        positions = {}
        for spec, f in zip(self.flow_specs(), self.flows):
            positions[spec.tx] = f.tx.pos
            positions[spec.rx] = f.rx.pos
            positions.update(zip(spec.robots, f.robots))
        return NetworkState.from_mapping(positions)

    def mobility_model(self) -> MobilityModel:
        endpoints = {}
        for spec, f in zip(self.flow_specs(), self.flows):
            for node, end in ((spec.tx, f.tx), (spec.rx, f.rx)):
                if end.mobile:
                    endpoints[node] = EndpointMobility("random_walk", end.step)
        bounds = self.mobility.bounds
        if bounds is None:
            pts = self.initial_state().positions
            m = self.mobility.margin
            lo, hi = pts.min(axis=0) - m, pts.max(axis=0) + m
            bounds = (float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1]))
        return MobilityModel(
            endpoints, bounds, self.seed, self.mobility.start_iteration,
            self.mobility.stop_iteration, self.mobility.period,
        )

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "name": self.name,
            "seed": self.seed,
            "channel": asdict(self.channel),
            "flows": [
                {
                    "tx": _endpoint_dict(f.tx),
                    "rx": _endpoint_dict(f.rx),
                    "robots": [{"pos": list(p)} for p in f.robots],
                }
                for f in self.flows
            ],
            "annealing": asdict(self.annealing),
            "controller": asdict(self.controller),
            "mobility": {
                k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(self.mobility).items()
            },
        }


def _endpoint_dict(e: EndpointDoc) -> dict:
    return {"pos": list(e.pos), "mobile": e.mobile, "step": e.step}


# -- parsing ---------------------------------------------------------------


def _expect(value, kind, path: str):
    if kind is float:
        return check_finite(value, path)
    if kind is bool:
        if not isinstance(value, bool):
            raise ScenarioValidationError(path, f"expected true/false, got {value!r}")
        return value
    if kind is dict and not isinstance(value, dict):
        raise ScenarioValidationError(path, f"expected an object, got {type(value).__name__}")
    if kind is list and not isinstance(value, list):
        raise ScenarioValidationError(path, f"expected an array, got {type(value).__name__}")
    if kind is str and not isinstance(value, str):
        raise ScenarioValidationError(path, f"expected a string, got {value!r}")
    return value


def _check_keys(obj: dict, allowed: Iterable[str], path: str):
    unknown = sorted(set(obj) - set(allowed))
    if unknown:
        raise ScenarioValidationError(f"{path}.{unknown[0]}" if path else unknown[0], "unknown field")


def _point(value, path: str) -> tuple[float, float]:
    _expect(value, list, path)
    if len(value) != 2:
        raise ScenarioValidationError(path, f"expected [x, y], got {value!r}")
    return (_expect(value[0], float, f"{path}[0]"), _expect(value[1], float, f"{path}[1]"))


def _section(cls, obj, path: str, ints=(), optional_ints=(), strings=()):
    """Build a frozen dataclass section, prefixing validation errors with ``path``."""
    if obj is None:
        return cls()
    _expect(obj, dict, path)
    names = [f.name for f in fields(cls) if f.init]
    _check_keys(obj, names, path)
    kwargs = {}
    for key, value in obj.items():
        where = f"{path}.{key}"
        try:
            if key in strings:
                kwargs[key] = _expect(value, str, where)
            elif key in optional_ints and value is None:
                kwargs[key] = None
            elif key in ints or key in optional_ints:
                kwargs[key] = check_count(value, where)
            else:
                kwargs[key] = _expect(value, float, where)
        except ValidationError as exc:
            raise ScenarioValidationError(exc.field, exc.message) from None
    try:
        return cls(**kwargs)
    except ValidationError as exc:
        raise ScenarioValidationError(f"{path}.{exc.field}", exc.message) from None


def _endpoint(obj, path: str) -> EndpointDoc:
    _expect(obj, dict, path)
    _check_keys(obj, ("pos", "mobile", "step"), path)
    if "pos" not in obj:
        raise ScenarioValidationError(f"{path}.pos", "missing")
    return EndpointDoc(
        _point(obj["pos"], f"{path}.pos"),
        _expect(obj.get("mobile", False), bool, f"{path}.mobile"),
        check_positive(obj.get("step", 0.2), f"{path}.step", allow_zero=True),
    )


def _flow(obj, path: str) -> FlowDoc:
    _expect(obj, dict, path)
    _check_keys(obj, ("tx", "rx", "robots"), path)
    for key in ("tx", "rx"):
        if key not in obj:
            raise ScenarioValidationError(f"{path}.{key}", "missing")
    robots = _expect(obj.get("robots", []), list, f"{path}.robots")
    points = []
    for k, r in enumerate(robots):
        where = f"{path}.robots[{k}]"
        _expect(r, dict, where)
        _check_keys(r, ("pos",), where)
        if "pos" not in r:
            raise ScenarioValidationError(f"{where}.pos", "missing")
        points.append(_point(r["pos"], f"{where}.pos"))
    return FlowDoc(_endpoint(obj["tx"], f"{path}.tx"), _endpoint(obj["rx"], f"{path}.rx"), tuple(points))


def _mobility(obj) -> MobilityDoc:
    if obj is None:
        return MobilityDoc()
    _expect(obj, dict, "mobility")
    _check_keys(obj, [f.name for f in fields(MobilityDoc)], "mobility")
    bounds = obj.get("bounds")
    if bounds is not None:
        _expect(bounds, list, "mobility.bounds")
        if len(bounds) != 4:
            raise ScenarioValidationError("mobility.bounds", "expected [xmin, ymin, xmax, ymax]")
        bounds = tuple(_expect(b, float, f"mobility.bounds[{k}]") for k, b in enumerate(bounds))
        if bounds[0] > bounds[2] or bounds[1] > bounds[3]:
            raise ScenarioValidationError("mobility.bounds", "empty rectangle")
    stop = obj.get("stop_iteration")
    try:
        return MobilityDoc(
            check_count(obj.get("start_iteration", 0), "mobility.start_iteration"),
            None if stop is None else check_count(stop, "mobility.stop_iteration"),
            check_count(obj.get("period", 1), "mobility.period", minimum=1),
            bounds,
            check_positive(obj.get("margin", 2.0), "mobility.margin", allow_zero=True),
        )
    except ValidationError as exc:
        raise ScenarioValidationError(exc.field, exc.message) from None


def parse_scenario_dict(data) -> ScenarioDoc:
    """Validate a decoded JSON document and apply defaults."""
    try:
        return _parse_scenario_dict(data)
    except ScenarioValidationError:
        raise
    except ValidationError as exc:
        raise ScenarioValidationError(exc.field, exc.message) from None


def _parse_scenario_dict(data) -> ScenarioDoc:
    _expect(data, dict, "<document>")
    _check_keys(
        data,
        ("format_version", "name", "seed", "channel", "flows", "annealing", "controller", "mobility"),
        "",
    )
    version = data.get("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise ScenarioValidationError("format_version", f"unsupported version {version!r}")
    if "flows" not in data:
        raise ScenarioValidationError("flows", "missing")
    flows = _expect(data["flows"], list, "flows")
    if not flows:
        raise ScenarioValidationError("flows", "at least one flow is required")
    try:
        seed = check_count(data.get("seed", 0), "seed")
    except ValidationError as exc:
        raise ScenarioValidationError("seed", exc.message) from None
    return ScenarioDoc(
        name=_expect(data.get("name", "unnamed"), str, "name"),
        flows=tuple(_flow(f, f"flows[{k}]") for k, f in enumerate(flows)),
        channel=_section(ChannelParams, data.get("channel"), "channel"),
        annealing=_section(
            AnnealingSchedule, data.get("annealing"), "annealing",
            ints=("iterations", "steps_per_temperature"), strings=("cost_scale",),
        ),
        controller=_section(
            ControllerParams, data.get("controller"), "controller",
            ints=("candidate_count", "max_iterations", "cycle_window"),
        ),
        mobility=_mobility(data.get("mobility")),
        seed=seed,
    )


def _reject_constant(token):
    raise ValueError(f"non-finite number {token}")


def parse_scenario(document: str) -> ScenarioDoc:
    """Parse and validate a JSON scenario document."""
    try:
        data = json.loads(document, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(exc.msg, exc.lineno, exc.colno) from None
    except ValueError as exc:
        raise ScenarioParseError(str(exc)) from None
    return parse_scenario_dict(data)


def dump_scenario(doc: ScenarioDoc) -> str:
    return json.dumps(doc.to_dict(), indent=2) + "\n"


def resolve_scenario_path(name_or_path: str | os.PathLike) -> Path:
    """A file path as given, or the name of a shipped scenario."""
    path = Path(name_or_path)
    if path.is_file():
        return path
    shipped = SCENARIO_DIR / f"{path.name.removesuffix('.json')}.json"
    if shipped.is_file():
        return shipped
    raise FileNotFoundError(f"no scenario file or shipped scenario named {str(name_or_path)!r}")


def load_scenario(name_or_path) -> ScenarioDoc:
    return parse_scenario(resolve_scenario_path(name_or_path).read_text())


def shipped_scenarios() -> list[str]:
    return sorted(p.stem for p in SCENARIO_DIR.glob("*.json"))


# -- traces and surfaces ---------------------------------------------------


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    node_id: int
    x: float
    y: float
    flow_min_sinr: tuple[float, ...]
    global_min_sinr: float


def _g(v: float) -> str:
    return f"{v:.12g}"


def write_atomic(destination, text: str):
    destination = Path(destination)
    fd, tmp = tempfile.mkstemp(dir=destination.parent, prefix=f".{destination.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, destination)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def trace_rows(trace, network: Network | None = None, params: ChannelParams | None = None) -> list[TraceRow]:
    """Flatten a run trace into one row per node per recorded iteration.

    Distributed traces carry their own costs; annealing traces are
    re-evaluated from their state snapshots, so ``network`` and ``params``
    are required for them.
    """
    if isinstance(trace, DistributedTrace):
        blocks = [(r.state, r.flow_costs, r.global_cost) for r in trace.records]
    elif isinstance(trace, AnnealTrace):
        if network is None or params is None:
            raise ValueError("annealing traces need the network and channel params")
        blocks = []
        for s in trace.states:
            costs = flow_costs(s, params, network)
            blocks.append((s, tuple(costs), float(costs.min())))
    else:
        return list(trace)
    return [
        TraceRow(s.iteration, nid, float(x), float(y), tuple(float(c) for c in fc), g)
        for s, fc, g in blocks
        for nid, (x, y) in zip(s.node_ids, s.positions)
    ]


def write_trace(trace, destination, network=None, params=None) -> Path:
    rows = trace_rows(trace, network, params)
    if not rows:
        raise ValueError("cannot write an empty trace")
    n_flows = len(rows[0].flow_min_sinr)
    buf = io.StringIO()
    buf.write(f"#format_version={FORMAT_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(
        ["iteration", "node_id", "x", "y"]
        + [f"flow_min_sinr_{i}" for i in range(1, n_flows + 1)]
        + ["global_min_sinr"]
    )
    for r in rows:
        w.writerow(
            [r.iteration, r.node_id, _g(r.x), _g(r.y)]
            + [_g(v) for v in r.flow_min_sinr]
            + [_g(r.global_min_sinr)]
        )
    write_atomic(destination, buf.getvalue())
    return Path(destination)


def _read_versioned_csv(source) -> list[list[str]]:
    lines = Path(source).read_text().splitlines()
    if not lines or lines[0] != f"#format_version={FORMAT_VERSION}":
        raise ScenarioParseError(f"{source}: missing or unsupported format_version line", 1, 1)
    return list(csv.reader(lines[1:]))


def read_trace(source) -> list[TraceRow]:
    table = _read_versioned_csv(source)
    header, body = table[0], table[1:]
    n_flows = len(header) - 5
    return [
        TraceRow(
            int(r[0]), int(r[1]), float(r[2]), float(r[3]),
            tuple(float(v) for v in r[4:4 + n_flows]), float(r[4 + n_flows]),
        )
        for r in body
    ]


def write_surface(grid, axes, destination, names=("param1", "param2")) -> Path:
    """Write ``grid[i, j]`` as rows ``(axes[0][i], axes[1][j], value)``."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 2:
        raise ValueError(f"surface grid must be 2-D, got shape {grid.shape}")
    a, b = (np.asarray(ax, dtype=float) for ax in axes)
    if grid.shape != (len(a), len(b)):
        raise ValueError(f"grid shape {grid.shape} does not match axes ({len(a)}, {len(b)})")
    buf = io.StringIO()
    buf.write(f"#format_version={FORMAT_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([names[0], names[1], "min_sinr"])
    for i, u in enumerate(a):
        for j, v in enumerate(b):
            w.writerow([_g(u), _g(v), _g(grid[i, j])])
    write_atomic(destination, buf.getvalue())
    return Path(destination)


def read_surface(source) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Inverse of :func:`write_surface`: ``(axis_a, axis_b, grid)``."""
    body = _read_versioned_csv(source)[1:]
    a = sorted({float(r[0]) for r in body})
    b = sorted({float(r[1]) for r in body})
    grid = np.full((len(a), len(b)), math.nan)
    ia = {v: k for k, v in enumerate(a)}
    ib = {v: k for k, v in enumerate(b)}
    for r in body:
        grid[ia[float(r[0])], ib[float(r[1])]] = float(r[2])
    return np.array(a), np.array(b), grid
