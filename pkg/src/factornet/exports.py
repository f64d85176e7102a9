"""File renderers: GraphML/DOT network exports, the feature matrix CSV, and
the correlation / model / alert / score reports.

Everything here is deterministic: nodes and rows are emitted in lexicographic
order and floats through one shared formatter, so identical inputs produce
byte-identical files.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Iterable
from xml.sax.saxutils import escape, quoteattr

from .alerts import Alert
from .correlation import CorrelationReport
from .errors import ValidationError
from .ledger import LEDGER_COLUMNS, Party
from .logit import LogitModel
from .metrics import FEATURE_COLUMNS, ClientFeatureRow
from .networks import RiskNetwork


def fmt(value: float) -> str:
    """Shared float formatting for exports ("%.12g", integers bare)."""
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return format(value, ".12g")


# --- networks ---------------------------------------------------------------

def graphml(
    net: RiskNetwork,
    parties: Iterable[Party] = (),
    flags: Iterable[str] = (),
) -> str:
    """GraphML with sector/region/label node attributes and weight/kind edge
    attributes; tacit flags become a boolean ``flagged`` node attribute."""
    by_id = {p.party_id: p for p in parties}
    flag_set = set(flags)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<graphml xmlns="http://graphml.graphdrawing.org/xmlns">',
        '  <key id="sector" for="node" attr.name="sector" attr.type="string"/>',
        '  <key id="region" for="node" attr.name="region" attr.type="string"/>',
        '  <key id="label" for="node" attr.name="label" attr.type="string"/>',
        '  <key id="flagged" for="node" attr.name="flagged" attr.type="boolean"/>',
        '  <key id="weight" for="edge" attr.name="weight" attr.type="double"/>',
        '  <key id="kind" for="edge" attr.name="kind" attr.type="string"/>',
        f'  <graph id={quoteattr(net.kind.value)} edgedefault='
        f'{quoteattr("directed" if net.directed else "undirected")}>',
    ]
    for pid in net.sorted_nodes():
        party = by_id.get(pid)
        data = []
        if party is not None:
            data.append(f'<data key="sector">{escape(party.sector_code)}</data>')
            data.append(f'<data key="region">{escape(party.region)}</data>')
            label = "" if party.high_risk_label is None else str(party.high_risk_label)
            data.append(f'<data key="label">{label}</data>')
        data.append(f'<data key="flagged">{"true" if pid in flag_set else "false"}</data>')
        lines.append(f"    <node id={quoteattr(pid)}>{''.join(data)}</node>")
    for arc in net.sorted_arcs():
        lines.append(
            f"    <edge source={quoteattr(arc.tail)} target={quoteattr(arc.head)}>"
            f'<data key="weight">{fmt(arc.weight)}</data>'
            f'<data key="kind">{escape(net.kind.value)}</data></edge>'
        )
    lines.append("  </graph>")
    lines.append("</graphml>")
    return "\n".join(lines) + "\n"


def dot(net: RiskNetwork) -> str:
    """Graphviz rendering with arc weights as edge labels."""
    def q(name: str) -> str:
        return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'

    keyword, connector = ("digraph", "->") if net.directed else ("graph", "--")
    lines = [f"{keyword} {net.kind.value} {{"]
    for pid in net.sorted_nodes():
        lines.append(f"  {q(pid)};")
    for arc in net.sorted_arcs():
        lines.append(f"  {q(arc.tail)} {connector} {q(arc.head)} [label={q(fmt(arc.weight))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_network_exports(net: RiskNetwork, out_dir: Path, parties=(), flags=()) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    gml = out_dir / f"{net.kind.value}.graphml"
    dotfile = out_dir / f"{net.kind.value}.dot"
    gml.write_text(graphml(net, parties, flags), encoding="utf-8")
    dotfile.write_text(dot(net), encoding="utf-8")
    return [gml, dotfile]


# --- feature matrix ----------------------------------------------------------

def write_feature_csv(rows: list[ClientFeatureRow], path: Path):
    """Feature matrix with the fixed column order; unlabeled parties have an
    empty high_risk cell."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["party_id"] + FEATURE_COLUMNS)
        for row in sorted(rows, key=lambda r: r.party_id):
            label = "" if row.high_risk_label is None else str(row.high_risk_label)
            cells = [row.party_id, label, str(row.missing_id)]
            cells += [fmt(row.value(c)) for c in FEATURE_COLUMNS[2:]]
            writer.writerow(cells)


def read_feature_csv(path: Path) -> list[ClientFeatureRow]:
    """Inverse of ``write_feature_csv``."""
    rows = []
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames != ["party_id"] + FEATURE_COLUMNS:
            raise ValidationError(f"{path}: unexpected feature matrix header")
        for row in reader:
            label = row["high_risk"].strip()
            rows.append(
                ClientFeatureRow(
                    party_id=row["party_id"],
                    high_risk_label=int(label) if label else None,
                    missing_id=int(row["missing_id"]),
                    metrics={c: float(row[c]) for c in FEATURE_COLUMNS[2:]},
                )
            )
    return rows


# --- reports -----------------------------------------------------------------

def _corr_cell(report: CorrelationReport, i: int, j: int) -> str:
    r = report.matrix[i, j]
    if math.isnan(r):
        return "NA"
    return f"{r:.3f}{report.star(i, j)}"


def correlation_csv(report: CorrelationReport) -> str:
    """Lower-triangular correlation table with significance stars."""
    lines = []
    header = ["variable"] + [str(i + 1) for i in range(len(report.columns))]
    lines.append(",".join(header))
    for i, name in enumerate(report.columns):
        cells = [f"{i + 1} {name}"]
        cells += [_corr_cell(report, i, j) for j in range(i + 1)]
        cells += [""] * (len(report.columns) - i - 1)
        lines.append(",".join(cells))
    lines.append("legend,** p<.01; * p<.05; n=" + str(report.n))
    return "\n".join(lines) + "\n"


def correlation_text(report: CorrelationReport) -> str:
    """Aligned plain-text rendering of the correlation table."""
    name_width = max(len(f"{i + 1} {c}") for i, c in enumerate(report.columns))
    cell_width = 9
    lines = []
    header = " " * name_width + "".join(f"{i + 1:>{cell_width}}" for i in range(len(report.columns)))
    lines.append(header)
    for i, name in enumerate(report.columns):
        row = f"{i + 1} {name}".ljust(name_width)
        row += "".join(f"{_corr_cell(report, i, j):>{cell_width}}" for j in range(i + 1))
        lines.append(row)
    lines.append("")
    lines.append(f"** p<.01; * p<.05. n={report.n} labeled clients.")
    return "\n".join(lines) + "\n"


def _coef_star(p: float) -> str:
    if math.isnan(p):
        return ""
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""


def model_report_text(model: LogitModel) -> str:
    """Aligned coefficient table plus fit statistics."""
    p_values = model.wald_p_values()
    names = list(model.predictor_names) + ["constant"]
    # intercept is stored first; report it last like a regression table
    order = list(range(1, model.k)) + [0]
    width = max(len(n) for n in names) + 2
    lines = [f"{'variable'.ljust(width)}{'coefficient':>14}{'std_error':>12}"]
    for name, idx in zip(names, order):
        coef = model.coefficients[idx]
        star = _coef_star(p_values[idx])
        se = model.std_errors[idx] if model.std_errors else math.nan
        se_text = "" if math.isnan(se) else f"{se:.3f}"
        lines.append(f"{name.ljust(width)}{f'{coef:.3f}{star}':>14}{se_text:>12}")
    lines.append("")
    lines.append(f"{'mcfadden_r2'.ljust(width)}{model.mcfadden_r2:>14.3f}")
    lines.append(f"{'n'.ljust(width)}{model.n:>14}")
    lines.append(f"{'aic'.ljust(width)}{model.aic:>14.3f}")
    lines.append(f"{'bic'.ljust(width)}{model.bic:>14.3f}")
    lines.append(f"{'converged'.ljust(width)}{str(model.converged).lower():>14}")
    lines.append("")
    lines.append("*** p<.001; ** p<.01; * p<.05")
    return "\n".join(lines) + "\n"


def model_report_csv(model: LogitModel) -> str:
    p_values = model.wald_p_values()
    names = list(model.predictor_names) + ["constant"]
    order = list(range(1, model.k)) + [0]
    lines = ["variable,coefficient,std_error,p_value"]
    for name, idx in zip(names, order):
        se = model.std_errors[idx] if model.std_errors else math.nan
        se_text = "" if math.isnan(se) else fmt(se)
        p = p_values[idx]
        p_text = "" if math.isnan(p) else fmt(p)
        lines.append(f"{name},{fmt(model.coefficients[idx])},{se_text},{p_text}")
    lines.append(f"mcfadden_r2,{fmt(model.mcfadden_r2)},,")
    lines.append(f"n,{model.n},,")
    lines.append(f"aic,{fmt(model.aic)},,")
    lines.append(f"bic,{fmt(model.bic)},,")
    lines.append(f"converged,{str(model.converged).lower()},,")
    return "\n".join(lines) + "\n"


def write_alerts_csv(alerts: list[Alert], path: Path):
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["party_id", "component_id", "reason_members"])
        for alert in alerts:
            writer.writerow([alert.party_id, alert.component_id, ";".join(alert.reasons)])


def write_scores_csv(ranked: list[tuple[str, float]], path: Path):
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["rank", "party_id", "probability"])
        for position, (party_id, probability) in enumerate(ranked, start=1):
            writer.writerow([position, party_id, f"{probability:.6f}"])


def write_parties_csv(parties: list[Party], path: Path):
    """Dataset artifact: one row per deduplicated party."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["party_id", "sector_code", "region", "country", "high_risk"])
        for party in sorted(parties, key=lambda p: p.party_id):
            label = "" if party.high_risk_label is None else str(party.high_risk_label)
            writer.writerow([party.party_id, party.sector_code, party.region, party.country or "", label])


def read_parties_csv(path: Path) -> list[Party]:
    parties = []
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames != ["party_id", "sector_code", "region", "country", "high_risk"]:
            raise ValidationError(f"{path}: unexpected parties header")
        for row in reader:
            label = row["high_risk"].strip()
            parties.append(
                Party(
                    party_id=row["party_id"],
                    sector_code=row["sector_code"],
                    region=row["region"],
                    country=row["country"] or None,
                    high_risk_label=int(label) if label else None,
                )
            )
    return parties


def write_ledger_csv(records, path: Path):
    """Dataset artifact: validated records in canonical CSV form."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(LEDGER_COLUMNS)
        for rec in records:
            writer.writerow(rec.as_csv_row())
