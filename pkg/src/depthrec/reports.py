"""Serialization: CSV node tables, the JSON report, atomic writes.

All float formatting is deterministic: CSV carries 17 significant digits
(lossless round-trip), JSON uses Python's shortest-repr floats.  Writes go
through a temp file plus rename so readers never see partial output.
"""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile

import numpy as np

from .criticals import CriticalSet
from .errors import DomainError
from .ivp import SolutionPiece
from .modulus import ModulusModel, SampledModulus
from .solutions import ConvergenceCone, PiecewiseSolution
from .taylor import TaylorBranch

__all__ = [
    "atomic_write_text", "format_float", "u_csv_text", "read_u_csv",
    "solution_csv_text", "read_solution_csv", "report_json_text",
    "piece_payload", "solution_payload", "criticals_payload",
    "branch_payload", "cone_payload", "empty_report",
]


def format_float(x: float) -> str:
    return f"{float(x):.17g}"


def atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-depthrec-")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def u_csv_text(u: ModulusModel, samples: int = 501) -> str:
    lo, hi = u.domain
    lines = ["theta,u"]
    for th in np.linspace(lo, hi, samples):
        lines.append(f"{format_float(th)},{format_float(u.value(float(th)))}")
    return "\n".join(lines) + "\n"


def read_u_csv(path: str) -> SampledModulus:
    thetas: list[float] = []
    values: list[float] = []
    with open(path, newline="") as handle:
        for row in csv.reader(handle):
            if not row or row[0].strip().lower() == "theta":
                continue
            if len(row) < 2:
                raise DomainError(f"bad profile row {row!r} in {path}")
            thetas.append(float(row[0]))
            values.append(float(row[1]))
    return SampledModulus(np.array(thetas), np.array(values))


def solution_csv_text(sol, u: ModulusModel | None = None) -> str:
    """Node table theta,rho,drho,x,y,residual for a piece or a solution."""
    thetas = np.asarray(sol.thetas, dtype=float)
    rhos = np.asarray(sol.rhos, dtype=float)
    drhos = np.asarray(sol.drhos, dtype=float)
    lines = ["theta,rho,drho,x,y,residual"]
    for th, r, dr in zip(thetas, rhos, drhos):
        x = r * math.cos(th)
        y = r * math.sin(th)
        res = abs(dr * dr + r * r - u.value(float(th))) if u is not None else 0.0
        lines.append(",".join(format_float(v) for v in (th, r, dr, x, y, res)))
    return "\n".join(lines) + "\n"


def read_solution_csv(path: str) -> dict[str, np.ndarray]:
    cols: dict[str, list[float]] = {k: [] for k in
                                    ("theta", "rho", "drho", "x", "y", "residual")}
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        for row in reader:
            for key, val in zip(header, row):
                cols[key].append(float(val))
    return {k: np.array(v) for k, v in cols.items()}


def piece_payload(piece: SolutionPiece) -> dict:
    return {
        "sign": piece.sign,
        "direction": piece.direction,
        "dense_contact": piece.dense_contact,
        "termination": {"kind": piece.termination.kind.value,
                        "theta": piece.termination.theta},
        "nodes": {
            "theta": [float(v) for v in piece.thetas],
            "rho": [float(v) for v in piece.rhos],
            "drho": [float(v) for v in piece.drhos],
        },
    }


def solution_payload(sol: PiecewiseSolution) -> dict:
    return {
        "c1": sol.c1,
        "sign_pattern": sol.sign_pattern,
        "junctions": [{"theta": j.theta, "kind": j.kind.value,
                       "delta_rho": j.delta_rho, "delta_drho": j.delta_drho}
                      for j in sol.junctions],
        "pieces": [piece_payload(p) for p in sol.pieces],
    }


def criticals_payload(cs: CriticalSet) -> dict:
    return {
        "dense": cs.dense,
        "dense_intervals": [[a, b] for a, b in cs.dense_intervals],
        "rejected": [{"theta": th, "reason": reason} for th, reason in cs.rejected],
        "points": [{
            "theta": p.theta,
            "depth": p.depth,
            "kind": p.kind.value,
            "boundary": p.boundary,
            "u_jet": [float(c) for c in p.u_jet.coeffs],
        } for p in cs.points],
    }


def branch_payload(branch: TaylorBranch) -> dict:
    radius = branch.radius_estimate
    if radius is not None and math.isinf(radius):
        radius = "inf"
    return {
        "theta0": branch.ic.theta0,
        "rho0": branch.ic.rho0,
        "beta": branch.beta,
        "status": branch.status.value,
        "free_index": branch.free_index,
        "consistency_residual": branch.consistency_residual,
        "radius_estimate": radius,
        "derivatives": [float(d) for d in branch.derivs],
    }


def cone_payload(cone: ConvergenceCone) -> dict:
    return {
        "apex_theta": cone.apex_theta,
        "apex_depth": cone.apex_depth,
        "domain": [cone.domain[0], cone.domain[1]],
        "side": cone.side,
        "upper": solution_payload(cone.upper),
        "lower": solution_payload(cone.lower),
    }


def empty_report() -> dict:
    return {"criticals": {}, "branches": [], "maximal": {}, "cones": [],
            "solutions": []}


def report_json_text(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"
