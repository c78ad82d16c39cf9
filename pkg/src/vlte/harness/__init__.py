from .compliance import ComplianceFinding, Vulnerability, compliance_map, render_compliance
from .render import render_tables
from .runner import RunResult, ScenarioRuntimeError, run
from .scenario import (
    NonMonotoneScript,
    ParseError,
    Scenario,
    ScenarioError,
    UnresolvedReference,
    load_scenario,
    parse_scenario,
)

__all__ = [name for name in dir() if not name.startswith("_")]
