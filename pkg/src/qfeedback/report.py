"""JSON and text output, and the JSON form of a protocol description.

Matrices are written as row-major nested lists of ``[re, im]`` pairs. JSON
output uses sorted keys and Python's shortest round-trip float repr, so equal
inputs give byte-identical files.
"""
from __future__ import annotations

import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np

from .campaign import CampaignReport
from .measurement import BranchEnsemble, MeasurementChannel, OutcomeDistribution
from .operators import CompositeSpace
from .protocol import InequalityVerdict, ProtocolLedger, ProtocolSpec
from .scenarios import AnalyticLedger
from .thermo import BathSpec, PhysicalConstants

SCHEMA_VERSION = 1


def matrix_to_json(a: np.ndarray) -> list:
    a = np.asarray(a, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def matrix_from_json(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValueError(f"expected a matrix of [re, im] pairs, got array of shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def _scalar(x):
    x = float(x)
    return x if math.isfinite(x) else None


def to_jsonable(obj):
    """Convert ledgers, reports and numpy values into plain JSON types."""
    if isinstance(obj, CampaignReport):
        return obj.to_dict()
    if isinstance(obj, np.ndarray):
        if obj.ndim == 2:
            return matrix_to_json(obj)
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _scalar(obj)
    if isinstance(obj, complex):
        return [_scalar(obj.real), _scalar(obj.imag)]
    if isinstance(obj, BranchEnsemble):
        return [
            {"label": to_jsonable(b.label), "probability": _scalar(b.probability),
             "state": None if b.state is None else matrix_to_json(b.state)}
            for b in obj.branches
        ]
    if isinstance(obj, OutcomeDistribution):
        return {"labels": [to_jsonable(l) for l in obj.labels], "probabilities": to_jsonable(obj.probabilities)}
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def ledger_scalars(ledger) -> dict:
    """Scalar bookkeeping shared by simulated and analytic ledgers."""
    out = {
        "mode": ledger.mode,
        "W_ext": ledger.W_ext,
        "Q": dict(ledger.Q),
        "delta_U_S": ledger.delta_U_S,
        "delta_F_S": ledger.delta_F_S,
        "qc_mutual": ledger.qc_mutual,
        "entropy_reduction": ledger.entropy_reduction,
        "system_temperature": ledger.system_temperature,
        "bath_temperatures": dict(ledger.bath_temperatures),
        "constants": dataclasses.asdict(ledger.constants),
    }
    if isinstance(ledger, AnalyticLedger):
        out["scenario"] = ledger.scenario
        out["parameters"] = dict(ledger.parameters)
        out["shannon"] = ledger.shannon
    else:
        out["info"] = dataclasses.asdict(ledger.info)
        out["diagnostics"] = dict(ledger.diagnostics)
        out["outcome_probabilities"] = ledger.outcome_dist.probabilities
    return to_jsonable(out)


def build_document(report, verdicts: list[InequalityVerdict] | None = None, include_timing: bool = False) -> dict:
    if isinstance(report, CampaignReport):
        doc = report.to_dict(include_timing=include_timing)
    elif isinstance(report, (AnalyticLedger, ProtocolLedger)):
        kind = "analytic_ledger" if isinstance(report, AnalyticLedger) else "protocol_ledger"
        doc = {"schema_version": SCHEMA_VERSION, "kind": kind, **to_jsonable(report)}
        doc["qc_mutual"] = _scalar(report.qc_mutual)
        doc["entropy_reduction"] = _scalar(report.entropy_reduction)
    elif isinstance(report, dict):
        doc = {"schema_version": SCHEMA_VERSION, **to_jsonable(report)}
    else:
        raise TypeError(f"cannot report {type(report).__name__}")
    if verdicts is not None:
        doc["verdicts"] = [to_jsonable(v) for v in verdicts]
    return doc


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _fmt(x) -> str:
    return "n/a" if x is None else f"{x:.6g}"


def render_text(report, verdicts: list[InequalityVerdict] | None = None) -> str:
    lines = []
    if isinstance(report, CampaignReport):
        cfg = report.config
        lines.append(f"campaign mode={cfg.mode} channel={cfg.channel_kind} seed={cfg.seed} instances={cfg.n_instances}")
        lines.append(f"{'check':<26}{'checked':>9}{'satisfied':>11}{'worst slack':>15}{'at':>7}")
        for name, s in sorted(report.verdicts.items()):
            lines.append(f"{name:<26}{s.checked:>9}{s.satisfied:>11}{_fmt(s.worst_slack):>15}{str(s.worst_instance):>7}")
        lines.append(f"violations: {report.n_violations}  errors: {len(report.errors)}")
        for e in report.errors[:10]:
            lines.append(f"  instance {e['instance']}: {e['error']}")
        if report.wall_time is not None:
            lines.append(f"wall time: {report.wall_time:.2f} s")
    else:
        scalars = report.get("ledger", {}) if isinstance(report, dict) else ledger_scalars(report)
        for key, value in scalars.items():
            lines.append(f"{key:<22}{value}")
    if verdicts:
        lines.append(f"{'inequality':<14}{'lhs':>16}{'rhs':>16}{'slack':>14}  ok")
        for v in verdicts:
            lines.append(f"{v.name:<14}{v.lhs:>16.10g}{v.rhs:>16.10g}{v.slack:>14.3e}  {'yes' if v.satisfied else 'NO'}")
    return "\n".join(lines) + "\n"


def emit_report(report, path=None, format: str = "json", verdicts=None, include_timing: bool = False) -> str:
    """Serialize ``report`` and write it to ``path`` (stdout if ``None``). Returns the text."""
    if format == "json":
        text = dumps(build_document(report, verdicts, include_timing))
    elif format == "text":
        text = render_text(report, verdicts)
    else:
        raise ValueError(f"unknown format {format!r}")
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")
    return text


# ---------------------------------------------------------------- protocol files


def spec_to_dict(spec: ProtocolSpec) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "protocol_spec",
        "factor_labels": list(spec.space.factor_labels),
        "factor_dims": list(spec.space.factor_dims),
        "system_label": spec.system_label,
        "system_hamiltonian_initial": matrix_to_json(spec.system_hamiltonian_initial),
        "system_hamiltonian_final": matrix_to_json(spec.system_hamiltonian_final),
        "system_temperature": spec.system_temperature,
        "baths": [
            {"label": b.label, "hamiltonian": matrix_to_json(b.hamiltonian), "temperature": b.temperature}
            for b in spec.baths
        ],
        "stage2_unitary": matrix_to_json(spec.stage2_unitary),
        "measurement_operators": [matrix_to_json(m) for m in spec.channel.operators],
        "outcome_labels": [to_jsonable(l) for l in spec.channel.outcome_labels],
        "feedback_unitaries": [matrix_to_json(u) for u in spec.feedback_unitaries],
        "stage5_unitary": matrix_to_json(spec.stage5_unitary),
        "constants": dataclasses.asdict(spec.constants),
    }


def _stage(data: dict, key: str):
    """A stage is either ``<key>_unitary`` or a ``<key>_schedule`` of ``{hamiltonian, duration}`` segments."""
    if f"{key}_unitary" in data:
        return matrix_from_json(data[f"{key}_unitary"])
    if f"{key}_schedule" in data:
        return [(matrix_from_json(seg["hamiltonian"]), float(seg["duration"])) for seg in data[f"{key}_schedule"]]
    raise KeyError(f"protocol file needs {key}_unitary or {key}_schedule")


def spec_from_dict(data: dict) -> ProtocolSpec:
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {version}")
    constants = PhysicalConstants(**data.get("constants", {}))
    space = CompositeSpace(data["factor_dims"], data["factor_labels"])
    baths = tuple(
        BathSpec(b["label"], matrix_from_json(b["hamiltonian"]), float(b["temperature"])) for b in data.get("baths", [])
    )
    labels = data.get("outcome_labels") or ()
    channel = MeasurementChannel(tuple(matrix_from_json(m) for m in data["measurement_operators"]), tuple(labels))
    return ProtocolSpec(
        space=space,
        system_hamiltonian_initial=matrix_from_json(data["system_hamiltonian_initial"]),
        system_hamiltonian_final=matrix_from_json(data["system_hamiltonian_final"]),
        system_temperature=float(data["system_temperature"]),
        baths=baths,
        stage2_unitary=_stage(data, "stage2"),
        channel=channel,
        feedback_unitaries=tuple(matrix_from_json(u) for u in data["feedback_unitaries"]),
        stage5_unitary=_stage(data, "stage5"),
        constants=constants,
        system_label=data.get("system_label", "S"),
    )


def load_spec(path) -> ProtocolSpec:
    return spec_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
