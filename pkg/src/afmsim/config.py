"""JSON scenario configs: parsing, normalization, fingerprinting.

A config document has four sections: ``topology``, ``params``,
``controller``, and optional ``run``. Loading broadcasts scalar shorthands
(per-node and per-link values may be given once), resolves per-direction
link fields, and then applies every well-posedness check; all schema and
constraint violations are reported together, each with the path of the
offending field. The canonical form emitted by ``to_dict`` is fully
resolved, so two configs that mean the same scenario fingerprint the same.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import engine
from .controllers import ControllerSpec
from .topology import (
    Link,
    Scenario,
    SystemParams,
    Topology,
    ValidationError,
    Violation,
    validate,
)


class ConfigError(ValueError):
    """Config text that is not well-formed JSON; carries line/column."""


@dataclass(frozen=True)
class RunSettings:
    t_max: float = 100.0
    output_grid: float = 0.5
    seed: int | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: Scenario
    controller: ControllerSpec
    run: RunSettings

    def to_dict(self) -> dict:
        """Canonical, fully resolved form; stable key order is left to the
        JSON writer."""
        topo = self.scenario.topology
        par = self.scenario.params
        edges = []
        for (a, b) in topo.edges():
            ab = topo.links[(a, b)]
            ba = topo.links[(b, a)]
            edges.append(
                {
                    "a": a,
                    "b": b,
                    "latency_ab": ab.latency,
                    "latency_ba": ba.latency,
                    "gearbox_ab": [ab.gearbox.numerator, ab.gearbox.denominator],
                    "gearbox_ba": [ba.gearbox.numerator, ba.gearbox.denominator],
                    "beta0_ab": par.beta0[(a, b)],
                    "beta0_ba": par.beta0[(b, a)],
                }
            )
        ctrl = self.controller
        return {
            "topology": {
                "n_nodes": topo.n_nodes,
                "buffer_capacity": topo.buffer_capacity,
                "edges": edges,
            },
            "params": {
                "p": par.p,
                "d": par.d,
                "omega_min": par.omega_min,
                "epoch": par.epoch,
                "theta0": list(par.theta0),
                "omega_u": list(par.omega_u),
                "omega_init1": list(par.omega_init1),
                "omega_init2": list(par.omega_init2),
            },
            "controller": {
                "kind": ctrl.kind,
                "k_p": ctrl.k_p,
                "beta_ref": ctrl.beta_ref,
                "clamp": list(ctrl.clamp) if ctrl.clamp is not None else None,
            },
            "run": {
                "t_max": self.run.t_max,
                "output_grid": self.run.output_grid,
                "seed": self.run.seed,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def fingerprint(self) -> str:
        """Content hash of the canonical form; identifies the scenario."""
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _is_number(x) -> bool:
    # json.loads accepts NaN/Infinity literals; neither is a usable parameter
    return (
        isinstance(x, (int, float))
        and not isinstance(x, bool)
        and math.isfinite(x)
    )


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


class _Reader:
    """Walks the raw dict, collecting violations with field paths."""

    def __init__(self):
        self.violations: list[Violation] = []

    def bad(self, name: str, path: str, detail: str) -> None:
        self.violations.append(Violation(name, path, detail))

    def section(self, raw: dict, key: str, path: str, required: bool = True) -> dict | None:
        val = raw.get(key)
        if val is None:
            if required:
                self.bad("missing_field", f"{path}{key}", "required section")
            return None
        if not isinstance(val, dict):
            self.bad("wrong_type", f"{path}{key}", "expected an object")
            return None
        return val

    def number(self, raw: dict, key: str, path: str, default=None, required=True):
        if key not in raw:
            if required:
                self.bad("missing_field", f"{path}{key}", "required number")
            return default
        val = raw[key]
        if not _is_number(val):
            self.bad("wrong_type", f"{path}{key}", f"expected a number, got {val!r}")
            return default
        return val

    def integer(self, raw: dict, key: str, path: str, default=None, required=True):
        if key not in raw:
            if required:
                self.bad("missing_field", f"{path}{key}", "required integer")
            return default
        val = raw[key]
        if not _is_int(val):
            self.bad("wrong_type", f"{path}{key}", f"expected an integer, got {val!r}")
            return default
        return val

    def check_keys(self, raw: dict, allowed: set[str], path: str) -> None:
        for key in raw:
            if key not in allowed:
                self.bad("unknown_field", f"{path}{key}", "not part of the schema")

    def per_node(self, raw: dict, key: str, path: str, n: int, default=None):
        """A scalar broadcast to all nodes, or a list of n numbers."""
        if key not in raw:
            if default is None:
                self.bad("missing_field", f"{path}{key}", "required per-node value")
                return None
            return default
        val = raw[key]
        if _is_number(val):
            return [float(val)] * n
        if isinstance(val, list):
            if len(val) != n or not all(_is_number(x) for x in val):
                self.bad(
                    "wrong_type", f"{path}{key}", f"expected {n} numbers, got {val!r}"
                )
                return None
            return [float(x) for x in val]
        self.bad("wrong_type", f"{path}{key}", f"expected number or list, got {val!r}")
        return None

    def gearbox(self, raw: dict, key: str, path: str) -> Fraction | None:
        """Accepts 2, [2, 1], or "2/1"; canonical form is the two-element list."""
        if key not in raw:
            return None
        val = raw[key]
        if _is_int(val):
            return Fraction(val)
        if isinstance(val, str):
            parts = val.split("/")
            if len(parts) == 2 and parts[0].strip().lstrip("-").isdigit() and parts[1].strip().isdigit():
                den = int(parts[1])
                if den != 0:
                    return Fraction(int(parts[0]), den)
            self.bad("wrong_type", f"{path}{key}", f"expected 'num/den', got {val!r}")
            return None
        if isinstance(val, list) and len(val) == 2 and all(_is_int(x) for x in val):
            if val[1] == 0:
                self.bad("wrong_type", f"{path}{key}", "zero denominator")
                return None
            return Fraction(val[0], val[1])
        self.bad(
            "wrong_type", f"{path}{key}", f"expected integer, [num, den], or 'num/den', got {val!r}"
        )
        return None


_EDGE_KEYS = {
    "a",
    "b",
    "latency",
    "latency_ab",
    "latency_ba",
    "gearbox",
    "gearbox_ab",
    "gearbox_ba",
    "beta0",
    "beta0_ab",
    "beta0_ba",
}


def load_config(text: str) -> ScenarioConfig:
    """Parse, normalize, and validate a config document.

    Raises ConfigError on malformed JSON and ValidationError (with the full
    violation list, each naming the offending path) on schema or constraint
    problems.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a JSON object")

    r = _Reader()
    r.check_keys(raw, {"topology", "params", "controller", "run"}, "")

    topo_raw = r.section(raw, "topology", "")
    par_raw = r.section(raw, "params", "")
    ctrl_raw = r.section(raw, "controller", "")
    run_raw = r.section(raw, "run", "", required=False)

    n_nodes = 0
    links: dict[tuple[int, int], Link] = {}
    beta0: dict[tuple[int, int], int] = {}
    capacity = None
    if topo_raw is not None:
        r.check_keys(topo_raw, {"n_nodes", "buffer_capacity", "edges"}, "topology.")
        n_nodes = r.integer(topo_raw, "n_nodes", "topology.", default=0) or 0
        if "buffer_capacity" in topo_raw and topo_raw["buffer_capacity"] is not None:
            capacity = r.integer(topo_raw, "buffer_capacity", "topology.")
        edges_raw = topo_raw.get("edges")
        if not isinstance(edges_raw, list):
            r.bad("wrong_type", "topology.edges", "expected a list of edge objects")
            edges_raw = []
        default_beta0 = None
        if par_raw is not None and "beta0" in par_raw:
            default_beta0 = r.integer(par_raw, "beta0", "params.", required=False)
        for idx, edge in enumerate(edges_raw):
            path = f"topology.edges[{idx}]."
            if not isinstance(edge, dict):
                r.bad("wrong_type", path[:-1], "expected an edge object")
                continue
            r.check_keys(edge, _EDGE_KEYS, path)
            a = r.integer(edge, "a", path)
            b = r.integer(edge, "b", path)
            if a is None or b is None:
                continue
            if (a, b) in links or (b, a) in links:
                r.bad("duplicate_edge", path[:-1], f"edge ({a},{b}) already defined")
                continue
            shared_lat = r.number(edge, "latency", path, required=False)
            lat_ab = r.number(edge, "latency_ab", path, default=shared_lat, required=False)
            lat_ba = r.number(edge, "latency_ba", path, default=shared_lat, required=False)
            if lat_ab is None or lat_ba is None:
                r.bad("missing_field", f"{path}latency", "each direction needs a latency")
                continue
            shared_gear = r.gearbox(edge, "gearbox", path)
            gear_ab = r.gearbox(edge, "gearbox_ab", path) or shared_gear or Fraction(1)
            gear_ba = r.gearbox(edge, "gearbox_ba", path) or shared_gear or Fraction(1)
            shared_b0 = r.integer(edge, "beta0", path, required=False)
            b0_ab = r.integer(edge, "beta0_ab", path, default=None, required=False)
            b0_ba = r.integer(edge, "beta0_ba", path, default=None, required=False)
            if b0_ab is None:
                b0_ab = shared_b0 if shared_b0 is not None else default_beta0
            if b0_ba is None:
                b0_ba = shared_b0 if shared_b0 is not None else default_beta0
            if b0_ab is None or b0_ba is None:
                r.bad(
                    "beta0_missing",
                    path[:-1],
                    "no initial occupancy given and no params.beta0 default",
                )
                continue
            links[(a, b)] = Link(latency=float(lat_ab), gearbox=gear_ab)
            links[(b, a)] = Link(latency=float(lat_ba), gearbox=gear_ba)
            beta0[(a, b)] = b0_ab
            beta0[(b, a)] = b0_ba

    params = None
    if par_raw is not None:
        r.check_keys(
            par_raw,
            {
                "p",
                "d",
                "omega_min",
                "epoch",
                "theta0",
                "omega_u",
                "omega_init1",
                "omega_init2",
                "beta0",
            },
            "params.",
        )
        p = r.integer(par_raw, "p", "params.", default=0)
        d = r.integer(par_raw, "d", "params.", default=0)
        omega_min = r.number(par_raw, "omega_min", "params.", default=0.0)
        epoch = r.number(par_raw, "epoch", "params.", default=0.0)
        theta0 = r.per_node(par_raw, "theta0", "params.", n_nodes)
        omega_u = r.per_node(par_raw, "omega_u", "params.", n_nodes)
        omega_init1 = r.per_node(par_raw, "omega_init1", "params.", n_nodes, default=omega_u)
        omega_init2 = r.per_node(
            par_raw, "omega_init2", "params.", n_nodes, default=omega_init1
        )
        if theta0 is not None and omega_u is not None and omega_init1 and omega_init2:
            params = SystemParams(
                p=p,
                d=d,
                omega_min=float(omega_min),
                epoch=float(epoch),
                theta0=tuple(theta0),
                omega_u=tuple(omega_u),
                omega_init1=tuple(omega_init1),
                omega_init2=tuple(omega_init2),
                beta0=beta0,
            )

    controller = None
    if ctrl_raw is not None:
        r.check_keys(ctrl_raw, {"kind", "k_p", "beta_ref", "clamp"}, "controller.")
        kind = ctrl_raw.get("kind")
        if kind not in ("zero", "proportional"):
            r.bad(
                "controller_kind",
                "controller.kind",
                f"expected 'zero' or 'proportional', got {kind!r}",
            )
        else:
            k_p = r.number(
                ctrl_raw, "k_p", "controller.", default=0.0, required=(kind == "proportional")
            )
            beta_ref = r.number(ctrl_raw, "beta_ref", "controller.", default=0.0, required=False)
            clamp = None
            if ctrl_raw.get("clamp") is not None:
                cl = ctrl_raw["clamp"]
                if (
                    isinstance(cl, list)
                    and len(cl) == 2
                    and all(_is_number(x) for x in cl)
                    and cl[0] <= cl[1]
                ):
                    clamp = (float(cl[0]), float(cl[1]))
                else:
                    r.bad(
                        "wrong_type",
                        "controller.clamp",
                        f"expected [low, high] with low <= high, got {cl!r}",
                    )
            if k_p is not None and beta_ref is not None:
                controller = ControllerSpec(
                    kind=kind, k_p=float(k_p), beta_ref=float(beta_ref), clamp=clamp
                )

    run = RunSettings()
    if run_raw is not None:
        r.check_keys(run_raw, {"t_max", "output_grid", "seed"}, "run.")
        t_max = r.number(run_raw, "t_max", "run.", default=100.0, required=False)
        grid = r.number(run_raw, "output_grid", "run.", default=0.5, required=False)
        seed = None
        if run_raw.get("seed") is not None:
            seed = r.integer(run_raw, "seed", "run.")
        if t_max is not None and t_max <= 0:
            r.bad("run_t_max_nonpositive", "run.t_max", f"t_max={t_max!r}")
        if grid is not None and grid <= 0:
            r.bad("run_grid_nonpositive", "run.output_grid", f"output_grid={grid!r}")
        run = RunSettings(
            t_max=float(t_max if t_max else 100.0),
            output_grid=float(grid if grid else 0.5),
            seed=seed,
        )

    if r.violations:
        raise ValidationError(r.violations)
    assert params is not None and controller is not None
    topology = Topology(n_nodes=n_nodes, links=links, buffer_capacity=capacity)
    scenario = validate(topology, params)  # raises with constraint violations
    return ScenarioConfig(scenario=scenario, controller=controller, run=run)


def load_config_file(path: str | Path) -> ScenarioConfig:
    return load_config(Path(path).read_text(encoding="utf-8"))


def write_config(cfg: ScenarioConfig, path: str | Path) -> None:
    Path(path).write_text(cfg.to_json(), encoding="utf-8")


def run_config(
    cfg: ScenarioConfig,
    t_max: float | None = None,
    grid_dt: float | None = None,
    *,
    tie_break: str = "min",
    check_admissibility: bool = True,
) -> engine.Trace:
    """Simulate a loaded config and stamp the trace with its fingerprint."""
    t = cfg.run.t_max if t_max is None else t_max
    g = cfg.run.output_grid if grid_dt is None else grid_dt
    trace = engine.simulate(
        cfg.scenario,
        cfg.controller,
        t,
        grid_dt=g,
        tie_break=tie_break,
        check_admissibility=check_admissibility,
    )
    trace.fingerprint = cfg.fingerprint()
    trace.meta = {"config": cfg.to_dict(), "t_max": t, "grid_dt": g}
    return trace
