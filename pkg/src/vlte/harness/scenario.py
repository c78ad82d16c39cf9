"""Scenario files: JSON documents describing a testbed and a timed script.

See docs/scenario-schema.md for the field reference.  Loading validates the
structure, resolves cross-references (cells to cores, SIMs to subscribers,
script targets to cells) and checks that script times never go backwards.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Optional

from ..codec import EeaAlg, PlmnId
from ..epc import CoreFault, SubscriberRecord
from ..radio_env import CellConfig, RadioParams
from ..tcu import SimProfile, TcuPolicy, TcuTiming
from ..world import CoreConfig, WorldConfig, network_key, provision

ACTIONS = ("set_gain", "set_power", "inject_fault", "clear_fault", "broadcast", "power_cycle", "run_attack")
ATTACK_KINDS = ("imsi_catcher", "fbs", "fbs_statistics", "handover", "fallback", "fingerprint",
                "fingerprint_cases", "injection", "capability")


class ScenarioError(Exception):
    pass


class ParseError(ScenarioError):
    def __init__(self, message: str, *, line: Optional[int] = None, field: Optional[str] = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.line = line
        self.field = field


class UnresolvedReference(ScenarioError):
    pass


class NonMonotoneScript(ScenarioError):
    pass


@dataclass
class ScriptAction:
    t_ms: int
    action: str
    params: dict = field(default_factory=dict)


@dataclass
class Scenario:
    name: str
    seed: int
    world: WorldConfig
    script: list = field(default_factory=list)
    source: Optional[Path] = None

    @property
    def policy(self) -> TcuPolicy:
        return self.world.policy


# ---------------------------------------------------------------------------


def _req(d: dict, key: str, path: str):
    if not isinstance(d, dict):
        raise ParseError("expected an object", field=path)
    if key not in d:
        raise ParseError("missing required field", field=f"{path}.{key}" if path else key)
    return d[key]


def _build(cls, d: dict, path: str, **extra):
    known = {f.name for f in fields(cls)}
    unknown = set(d) - known - set(extra)
    if unknown:
        raise ParseError(f"unknown key(s) {sorted(unknown)}", field=path)
    try:
        return cls(**{**d, **extra})
    except (TypeError, ValueError, KeyError) as exc:
        raise ParseError(str(exc), field=path) from None


def _hex(value, path: str) -> bytes:
    try:
        return bytes.fromhex(value)
    except (TypeError, ValueError):
        raise ParseError("expected a hex string", field=path) from None


def parse_policy(spec, path: str = "tcu_policy") -> TcuPolicy:
    if spec is None:
        return TcuPolicy.observed()
    if isinstance(spec, str):
        try:
            return TcuPolicy.named(spec)
        except ValueError as exc:
            raise ParseError(str(exc), field=path) from None
    if not isinstance(spec, dict):
        raise ParseError("expected a profile name or an object", field=path)
    spec = dict(spec)
    profile = spec.pop("profile", "observed")
    unknown = set(spec) - TcuPolicy.field_names()
    if unknown:
        raise ParseError(f"unknown policy field(s) {sorted(unknown)}", field=path)
    for key in ("whitelist", "roaming_markets", "fallback_targets"):
        if key in spec:
            spec[key] = tuple(spec[key])
    try:
        return TcuPolicy.named(profile, **spec)
    except (TypeError, ValueError) as exc:
        raise ParseError(str(exc), field=path) from None


def _plmn(value, path: str) -> PlmnId:
    try:
        return PlmnId.parse(str(value))
    except ValueError as exc:
        raise ParseError(str(exc), field=path) from None


def _parse_core(d: dict, i: int) -> CoreConfig:
    path = f"cores[{i}]"
    name = _req(d, "name", path)
    plmn = _plmn(_req(d, "plmn", path), f"{path}.plmn")
    key = d.get("signing_key", "derived")
    if key == "derived":
        key = network_key(str(plmn))
    elif key is not None:
        key = _hex(key, f"{path}.signing_key")
    try:
        ciphers = tuple(EeaAlg[c] for c in d.get("allowed_ciphers", [a.name for a in EeaAlg]))
    except KeyError as exc:
        raise ParseError(f"unknown cipher {exc}", field=f"{path}.allowed_ciphers") from None
    unknown = set(d) - {"name", "plmn", "signing_key", "allowed_ciphers"}
    if unknown:
        raise ParseError(f"unknown key(s) {sorted(unknown)}", field=path)
    return CoreConfig(name, plmn, signing_key=key, allowed_ciphers=ciphers)


def _parse_sim(d: dict, i: int, cores: dict) -> tuple[SimProfile, Optional[tuple[str, SubscriberRecord]]]:
    """A SIM entry is either fully explicit or a ``provision`` shorthand that also creates the subscriber."""
    path = f"sims[{i}]"
    if "provision" in d:
        p = dict(d["provision"])
        core = p.pop("core", None)
        plmn = str(_req(p, "plmn", f"{path}.provision"))
        del p["plmn"]
        try:
            sub, sim = provision(plmn, **p)
        except (TypeError, ValueError) as exc:
            raise ParseError(str(exc), field=f"{path}.provision") from None
        if core is not None and core not in cores:
            raise UnresolvedReference(f"{path}.provision.core: no core named {core!r}")
        return sim, ((core, sub) if core is not None else None)
    d = dict(d)
    for key in ("ki", "opc", "network_key"):
        if d.get(key) is not None:
            d[key] = _hex(d[key], f"{path}.{key}")
    if "selectors" in d:
        d["selectors"] = tuple(d["selectors"])
    return _build(SimProfile, d, path), None


def _parse_subscriber(d: dict, i: int, cores: dict) -> tuple[str, SubscriberRecord]:
    path = f"subscribers[{i}]"
    core = _req(d, "core", path)
    if core not in cores:
        raise UnresolvedReference(f"{path}.core: no core named {core!r}")
    rec = {k: v for k, v in d.items() if k != "core"}
    for key in ("ki", "opc"):
        rec[key] = _hex(_req(rec, key, path), f"{path}.{key}")
    rec["home_plmn"] = _plmn(_req(rec, "home_plmn", path), f"{path}.home_plmn")
    if "allowed_apns" in rec:
        rec["allowed_apns"] = tuple(rec["allowed_apns"])
    return core, _build(SubscriberRecord, rec, path)


def _parse_script(items: list, cells: set, cores: dict) -> list[ScriptAction]:
    script = []
    last = None
    for i, item in enumerate(items):
        path = f"script[{i}]"
        t = _req(item, "t_ms", path)
        action = _req(item, "action", path)
        if not isinstance(t, int) or t < 0:
            raise ParseError("t_ms must be a non-negative integer", field=f"{path}.t_ms")
        if action not in ACTIONS:
            raise ParseError(f"unknown action {action!r}", field=f"{path}.action")
        if last is not None and t < last:
            raise NonMonotoneScript(f"{path}: t_ms {t} is earlier than the previous action at {last}")
        last = t
        params = {k: v for k, v in item.items() if k not in ("t_ms", "action")}
        if action in ("set_gain", "set_power", "broadcast"):
            cell = _req(params, "cell", path)
            if cell not in cells:
                raise UnresolvedReference(f"{path}.cell: no cell {cell}")
        if action in ("inject_fault", "clear_fault"):
            core = _req(params, "core", path)
            if core not in cores:
                raise UnresolvedReference(f"{path}.core: no core named {core!r}")
        if action == "run_attack":
            kind = _req(params, "kind", path)
            if kind not in ATTACK_KINDS:
                raise ParseError(f"unknown attack kind {kind!r}", field=f"{path}.kind")
        script.append(ScriptAction(t, action, params))
    return script


def parse_scenario(doc: dict, source: Optional[Path] = None) -> Scenario:
    if not isinstance(doc, dict):
        raise ParseError("scenario must be a JSON object", line=1)
    known = {"name", "seed", "tcu_policy", "cores", "cells", "subscribers", "sims", "faults",
             "script", "radio", "timing", "imei", "description"}
    unknown = set(doc) - known
    if unknown:
        raise ParseError(f"unknown top-level key(s) {sorted(unknown)}", field=sorted(unknown)[0])
    name = _req(doc, "name", "")
    seed = _req(doc, "seed", "")
    if not isinstance(seed, int) or not 0 <= seed < 1 << 64:
        raise ParseError("seed must be a 64-bit unsigned integer", field="seed")

    cores = {}
    for i, c in enumerate(doc.get("cores", [])):
        core = _parse_core(c, i)
        if core.name in cores:
            raise ParseError(f"duplicate core {core.name!r}", field=f"cores[{i}].name")
        cores[core.name] = core

    cells = []
    for i, c in enumerate(_req(doc, "cells", "")):
        cell = _build(CellConfig, c, f"cells[{i}]")
        if cell.core_link is not None and cell.core_link not in cores:
            raise UnresolvedReference(f"cells[{i}].core_link: no core named {cell.core_link!r}")
        if any(x.cell_id == cell.cell_id for x in cells):
            raise ParseError(f"duplicate cell id {cell.cell_id}", field=f"cells[{i}].cell_id")
        cells.append(cell)

    for i, s in enumerate(doc.get("subscribers", [])):
        core, sub = _parse_subscriber(s, i, cores)
        cores[core].subscribers.append(sub)

    sims = []
    for i, s in enumerate(_req(doc, "sims", "")):
        sim, linked = _parse_sim(s, i, cores)
        if linked is not None:
            cores[linked[0]].subscribers.append(linked[1])
        sims.append(sim)

    for i, f in enumerate(doc.get("faults", [])):
        path = f"faults[{i}]"
        core = _req(f, "core", path)
        if core not in cores:
            raise UnresolvedReference(f"{path}.core: no core named {core!r}")
        try:
            cores[core].faults.append(CoreFault(_req(f, "kind", path), f.get("cause")))
        except (ValueError, KeyError) as exc:
            raise ParseError(f"bad fault: {exc}", field=path) from None

    world = WorldConfig(
        cells=cells,
        cores=list(cores.values()),
        sims=sims,
        policy=parse_policy(doc.get("tcu_policy")),
        timing=_build(TcuTiming, _tupled(doc.get("timing", {})), "timing"),
        radio=_build(RadioParams, _tupled(doc.get("radio", {})), "radio"),
        imei=doc.get("imei", WorldConfig.imei),
    )
    script = _parse_script(doc.get("script", []), {c.cell_id for c in cells}, cores)
    return Scenario(str(name), seed, world, script, source)


def _tupled(d: dict) -> dict:
    return {k: tuple(tuple(x) if isinstance(x, list) else x for x in v) if isinstance(v, list) else v
            for k, v in d.items()}


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read scenario file {str(path)!r}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    return parse_scenario(doc, path)


def with_seed(scenario: Scenario, seed: int) -> Scenario:
    return replace(scenario, seed=int(seed))


def scenario_summary(s: Scenario) -> dict[str, Any]:
    return {"name": s.name, "seed": s.seed, "policy": s.policy.name, "cells": len(s.world.cells),
            "sims": len(s.world.sims), "script": len(s.script)}
