"""Plain-text reproductions of the three result tables."""

from __future__ import annotations

from typing import Iterable

from ..attacks.reports import FailureBehaviorRow, FaultClass, FbsMetrics, ImsiCatchReport, report_from_dict

OK, FAIL, NA = "OK", "X", "-"

TABLE1_CAPTION = "IMSI catching outcomes with different PLMNs."
TABLE1_HEADER = ("Attacking PLMN", "Tesla PLMN", "Identity Leaked", "SIM Type", "Attack Result")
TABLE2_CAPTION = "FBS result metrics across various cell gain values."
TABLE2_ROWS = ("Attach type", "Time-to-attach (s)", "Conn. duration (s)", "Reattach / Camp", "Success rate (%)")
TABLE3_CAPTION = "Summarized TCU behaviors across failures."
TABLE3_STAGES = ("Stage 1: Attach success", "Stage 2: PDN session", "Stage 3: Data connectivity")
TABLE3_OUTCOMES = ("Fallback triggered", "Loop trapped", "State transition failure")
POLICY_ORDER = ("observed", "mitigated")


def _grid(rows: list[tuple]) -> str:
    widths = [max(len(str(r[i])) for r in rows) for i in range(len(rows[0]))]
    rule = "+" + "+".join("-" * (w + 2) for w in widths) + "+"
    out = [rule]
    for n, row in enumerate(rows):
        out.append("| " + " | ".join(str(c).ljust(w) for c, w in zip(row, widths)) + " |")
        if n == 0:
            out.append(rule.replace("-", "="))
    out.append(rule)
    return "\n".join(out)


def _mark(value) -> str:
    return NA if value is None else OK if value else FAIL


def _yes_no(value: bool) -> str:
    return "Yes" if value else "No"


def _gain(g: float) -> str:
    return f"{g:g}"


def _seconds(v) -> str:
    return NA if v is None else f"{v:.1f}"


def table1(reports: list[ImsiCatchReport]) -> str:
    rows = [TABLE1_HEADER]
    for r in reports:
        leaked = "/".join(x for x in ("IMSI", "GUTI") if x in r.leaked) or "None"
        rows.append((r.attacker_plmn, r.sim_plmn, leaked, r.sim_type.value, _mark(r.attack_success)))
    return f"Table: {TABLE1_CAPTION}\n" + _grid(rows)


def table2(reports: list[FbsMetrics]) -> str:
    ordered = sorted(reports, key=lambda r: -r.dl_gain_db)
    header = ("Metric",) + tuple(_gain(r.dl_gain_db) for r in ordered)
    values = [
        [r.attach_type.value for r in ordered],
        [_seconds(r.time_to_attach_s) for r in ordered],
        [_seconds(r.conn_duration_s) for r in ordered],
        [r.post_state.value if r.post_state else NA for r in ordered],
        [f"{r.success_rate_pct:g}" for r in ordered],
    ]
    rows = [header] + [(label, *vals) for label, vals in zip(TABLE2_ROWS, values)]
    return f"Table: {TABLE2_CAPTION}\nDL cell gain (dB)\n" + _grid(rows)


def table3(reports: list[FailureBehaviorRow]) -> str:
    by_class = {r.fault_class: r for r in reports}
    classes = [c for c in FaultClass if c in by_class]
    cols = [by_class[c] for c in classes]
    rows = [("Connection Stage",) + tuple(c.value for c in classes)]
    rows.append((TABLE3_STAGES[0], *(_mark(r.stage1_attach) for r in cols)))
    rows.append((TABLE3_STAGES[1], *(_mark(r.stage2_pdn) for r in cols)))
    rows.append((TABLE3_STAGES[2], *(_mark(r.stage3_data) for r in cols)))
    rows.append(("Behavioral outcomes",) + ("",) * len(cols))
    rows.append((TABLE3_OUTCOMES[0], *(_yes_no(r.fallback_triggered) for r in cols)))
    rows.append((TABLE3_OUTCOMES[1], *(_yes_no(r.loop_trapped) for r in cols)))
    rows.append((TABLE3_OUTCOMES[2], *(_yes_no(r.state_transition_failure) for r in cols)))
    return f"Table: {TABLE3_CAPTION}\nFailures / Errors\n" + _grid(rows)


def _normalise(reports: Iterable) -> list:
    return [report_from_dict(r) if isinstance(r, dict) else r for r in reports]


def render_tables(reports: Iterable) -> str:
    """All three tables, once per policy present, observed first."""
    reports = _normalise(reports)
    policies = sorted({r.policy for r in reports},
                      key=lambda p: (POLICY_ORDER.index(p) if p in POLICY_ORDER else len(POLICY_ORDER), p))
    if not policies:
        return "No reports.\n"
    sections = []
    for policy in policies:
        mine = [r for r in reports if r.policy == policy]
        parts = [f"== Policy: {policy} =="]
        specs = ((ImsiCatchReport, table1, "IMSI catching"),
                 (FbsMetrics, table2, "FBS"),
                 (FailureBehaviorRow, table3, "failure behaviour"))
        for cls, render, label in specs:
            subset = [r for r in mine if isinstance(r, cls)]
            if subset:
                parts.append(render(subset))
            else:
                parts.append(f"(Table omitted: no {label} reports for policy {policy}.)")
        sections.append("\n\n".join(parts))
    return "\n\n\n".join(sections) + "\n"
