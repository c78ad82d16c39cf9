"""Executes a scenario's script and collects the trace and attack reports."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .. import attacks
from ..codec import RrcKind, RrcMessage, WarningMessage, WarningSystem
from ..epc import CoreFault
from ..tcu import PowerMode
from ..trace import NullSink, TraceSink
from ..world import World, build_world, testbed
from .scenario import Scenario, ScenarioError, ScriptAction, with_seed

SEED_ENV = "VLTE_SEED"


class ScenarioRuntimeError(ScenarioError):
    pass


@dataclass
class RunResult:
    scenario: Scenario
    trace: TraceSink
    reports: list = field(default_factory=list)

    def report_document(self) -> dict:
        return {
            "scenario": self.scenario.name,
            "seed": self.scenario.seed,
            "policy": self.scenario.policy.name,
            "trace_digest": self.trace.digest(),
            "reports": [r.to_dict() for r in self.reports],
        }

    def write_report(self, path) -> None:
        Path(path).write_text(json.dumps(self.report_document(), indent=2, sort_keys=True) + "\n", encoding="utf-8")

    def write_trace(self, path) -> None:
        self.trace.write(path)


def effective_seed(scenario: Scenario, seed: Optional[int] = None) -> int:
    """Explicit seed, else ``VLTE_SEED``, else the scenario's own seed."""
    if seed is not None:
        return int(seed)
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env, 0)
        except ValueError:
            raise ScenarioError(f"{SEED_ENV} is not an integer: {env!r}") from None
    return scenario.seed


def run(scenario: Scenario, seed: Optional[int] = None) -> RunResult:
    scenario = with_seed(scenario, effective_seed(scenario, seed))
    trace = TraceSink(scenario.name)
    trace.emit(0, "harness", "scenario_start", scenario=scenario.name, seed=scenario.seed,
               policy=scenario.policy.to_dict())
    result = RunResult(scenario, trace)
    live: Optional[World] = None
    for i, step in enumerate(scenario.script):
        try:
            if step.action == "run_attack":
                trace.set_context("")
                trace.emit(live.env.now_ms if live else step.t_ms, "harness", "attack_start",
                           step=i, kind=step.params["kind"])
                result.reports.extend(_run_attack(scenario, step, trace))
                continue
            if live is None:
                trace.set_context("live")
                live = build_world(scenario.world, scenario.seed, trace)
            trace.set_context("live")
            live.env.run_until(step.t_ms)
            _apply(live, step)
        except ScenarioError:
            raise
        except Exception as exc:
            raise ScenarioRuntimeError(f"script[{i}] {step.action} at t={step.t_ms} ms: "
                                       f"{type(exc).__name__}: {exc}") from exc
    trace.set_context("")
    trace.emit(live.env.now_ms if live else 0, "harness", "scenario_end", reports=len(result.reports))
    return result


def _apply(world: World, step: ScriptAction) -> None:
    p = step.params
    env = world.env
    if step.action == "set_gain":
        env.set_cell_gain(p["cell"], p["gain_db"])
    elif step.action == "set_power":
        env.set_power(p["cell"], bool(p.get("on", True)))
    elif step.action == "inject_fault":
        world.cores[p["core"]].inject_fault(CoreFault(p["kind"], p.get("cause")))
    elif step.action == "clear_fault":
        world.cores[p["core"]].clear_fault(p["kind"])
    elif step.action == "broadcast":
        kind = RrcKind[p.get("kind", "Sib12")]
        system = WarningSystem.CMAS if kind == RrcKind.Sib12 else WarningSystem.ETWS
        msg = RrcMessage(kind, warning_payload=WarningMessage(system, p.get("message_id", 4370),
                                                              p.get("serial", 1), p.get("text", "").encode()))
        env.broadcast(p["cell"], msg)
    elif step.action == "power_cycle":
        world.tcu.power_cycle(PowerMode(p.get("mode", "Hard")))
    if "run_ms" in p:
        env.advance(int(p["run_ms"]))


def _attack_world(scenario: Scenario, params: dict):
    tb = params.get("testbed")
    if tb is None:
        return scenario.world
    cfg = testbed(policy=scenario.policy, radio=scenario.world.radio, **tb)
    cfg.timing = scenario.world.timing
    return cfg


def _run_attack(scenario: Scenario, step: ScriptAction, trace: TraceSink) -> list:
    p = dict(step.params)
    kind = p.pop("kind")
    seed = scenario.seed
    cfg = _attack_world(scenario, p)
    p.pop("testbed", None)
    if kind == "imsi_catcher":
        return [attacks.run_imsi_catcher(cfg, p.pop("attacker_plmn"), p.pop("trials", 10), seed, trace=trace, **p)]
    if kind == "fbs":
        gains = p.pop("gains", None) or [p.pop("dl_gain_db")]
        trials = p.pop("trials", 10)
        return [attacks.run_fbs(cfg, g, trials, seed, trace=trace, **p) for g in gains]
    if kind == "fbs_statistics":
        # large batches are not traced record by record
        return [attacks.run_fbs(cfg, p.pop("dl_gain_db"), p.pop("trials", 1000), seed, trace=NullSink(), **p)]
    if kind == "handover":
        return [attacks.run_handover_hijack(cfg, seed, trace=trace, **p)]
    if kind == "fallback":
        return attacks.run_fallback_suite(cfg, seed, trace=trace, **p)
    if kind == "fingerprint":
        return attacks.run_plmn_fingerprint(p.pop("plmns"), p.pop("roaming_markets"), seed,
                                            policy=scenario.policy, trace=trace, **p)
    if kind == "fingerprint_cases":
        return attacks.run_fingerprint_cases(str(p.pop("plmn")), p.pop("roaming_markets"), seed,
                                             policy=scenario.policy, trace=trace, **p)
    if kind == "injection":
        channels = p.pop("channels", None) or [p.pop("channel")]
        return [attacks.run_message_injection(cfg, ch, None, seed, trace=trace, **p) for ch in channels]
    if kind == "capability":
        return [attacks.run_capability_probe(cfg, seed, trace=trace, **p)]
    raise ScenarioError(f"unknown attack kind {kind!r}")
