"""VQEG-style validation of objective scores against MOS.

A four-parameter logistic maps objective scores onto the MOS scale before
the linear correlation is taken; rank correlation uses the raw scores.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit
from scipy.stats import rankdata

TABLE_ORDER = ("FLT", "JPG", "JP2", "DCQ", "BLR", "NOZ")
ALL = "All"
MIN_GROUP = 5


class EvaluationError(ValueError):
    pass


class LogisticFitError(EvaluationError):
    def __init__(self, message, best_residual=None):
        super().__init__(message)
        self.best_residual = best_residual


@dataclass(frozen=True)
class LogisticParams:
    g1: float
    g2: float
    g3: float
    g4: float

    def as_array(self) -> np.ndarray:
        return np.array([self.g1, self.g2, self.g3, self.g4])


@dataclass(frozen=True)
class EvaluationRecord:
    ref_id: str
    label: str
    q: float
    mos: float
    dist_id: str = ""


def logistic(gamma, q):
    """(g1 - g2) / (1 + exp(-(q - g3) / g4)) + g2."""
    g1, g2, g3, g4 = (gamma.as_array() if isinstance(gamma, LogisticParams) else gamma)
    return (g1 - g2) * expit((np.asarray(q, dtype=np.float64) - g3) / g4) + g2


def _check_pairs(x, y, minimum):
    a = np.asarray(x, dtype=np.float64).ravel()
    b = np.asarray(y, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise EvaluationError(f"paired inputs differ in length: {a.size} vs {b.size}")
    if a.size < minimum:
        raise EvaluationError(f"need at least {minimum} pairs, got {a.size}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise EvaluationError("inputs must be finite")
    return a, b


def fit_logistic(q, mos, n_starts: int = 8) -> LogisticParams:
    """Least-squares logistic fit by multi-start Nelder-Mead."""
    x, y = _check_pairs(q, mos, MIN_GROUP)
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise LogisticFitError("degenerate data: objective scores or MOS are constant")

    def sse(g):
        if g[3] == 0 or not np.all(np.isfinite(g)):
            return np.inf
        r = y - logistic(g, x)
        return float(r @ r)

    sd = x.std()
    starts = [
        (y.max(), y.min(), c, sign * s)
        for c in (np.median(x), x.mean())
        for s in (sd, sd / 3.0)
        for sign in (1.0, -1.0)
    ][:n_starts]
    opts = {"xatol": 1e-12, "fatol": 1e-18, "maxiter": 5000, "maxfev": 10000}
    best, converged = None, False
    for start in starts:
        res = minimize(sse, np.array(start, dtype=np.float64), method="Nelder-Mead", options=opts)
        converged |= bool(res.success)
        if best is None or res.fun < best.fun:
            best = res
    # restart from the optimum until the simplex stops improving
    for _ in range(5):
        res = minimize(sse, best.x, method="Nelder-Mead", options=opts)
        if not res.fun < best.fun:
            break
        best = res
    if not converged or not np.isfinite(best.fun):
        raise LogisticFitError(
            f"logistic fit did not converge from any start (best SSE {best.fun:.6g})",
            best_residual=float(best.fun),
        )
    return LogisticParams(*(float(v) for v in best.x))


def pearson(x, y) -> float:
    a, b = _check_pairs(x, y, 3)
    a = a - a.mean()
    b = b - b.mean()
    denom = math.sqrt(float(a @ a) * float(b @ b))
    if denom == 0:
        raise EvaluationError("zero variance: correlation undefined")
    return float(np.clip((a @ b) / denom, -1.0, 1.0))


def spearman(x, y) -> float:
    """Pearson correlation of average ranks."""
    a, b = _check_pairs(x, y, 3)
    if np.ptp(a) == 0 or np.ptp(b) == 0:
        raise EvaluationError("all values equal: rank correlation undefined")
    return pearson(rankdata(a), rankdata(b))


def psnr(reference, distorted, peak: float = 255.0) -> float:
    a = np.asarray(reference, dtype=np.float64)
    b = np.asarray(distorted, dtype=np.float64)
    if a.shape != b.shape:
        raise EvaluationError(f"shape mismatch {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    return math.inf if mse == 0 else 10.0 * math.log10(peak * peak / mse)


@dataclass
class GroupResult:
    group: str
    n: int
    plcc: float = math.nan
    srocc: float = math.nan
    rmse: float = math.nan
    params: LogisticParams | None = None
    status: str = "ok"

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass
class EvaluationReport:
    rows: list[GroupResult]
    fit_mode: str = "per-group"
    metric: str = "tetrolet-gsm"
    scatter: list[tuple] = field(default_factory=list)

    def row(self, group: str) -> GroupResult:
        for r in self.rows:
            if r.group == group:
                return r
        raise KeyError(group)

    def to_text(self) -> str:
        groups = [r.group for r in self.rows]
        width = max(8, *(len(g) + 2 for g in groups))
        out = [f"{self.metric} (logistic fit: {self.fit_mode})"]
        out.append(f"{'':<26}" + "".join(f"{g:>{width}}" for g in groups))

        def line(name, values):
            return f"{name:<26}" + "".join(f"{v:>{width}}" for v in values)

        def fmt(r, attr):
            return f"{getattr(r, attr):.2f}" if r.ok else "n/a"

        out.append(line("n", [str(r.n) for r in self.rows]))
        out.append(line("Correlation Coefficient", [fmt(r, "plcc") for r in self.rows]))
        out.append(line("Rank-Order Correlation", [fmt(r, "srocc") for r in self.rows]))
        out.append(line("RMSE", [fmt(r, "rmse") for r in self.rows]))
        for r in self.rows:
            if not r.ok:
                out.append(f"  {r.group}: {r.status}")
        return "\n".join(out) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["group", "n", "plcc", "srocc", "rmse", "g1", "g2", "g3", "g4"])
        for r in self.rows:
            g = r.params.as_array() if r.params is not None else [math.nan] * 4
            w.writerow([r.group, r.n, *(_fmt(v) for v in (r.plcc, r.srocc, r.rmse, *g))])
        return buf.getvalue()

    def scatter_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["ref_id", "dist_id", "label", "q", "mos", "mos_p"])
        for ref_id, dist_id, label, q, mos, mos_p in self.scatter:
            w.writerow([ref_id, dist_id, label, _fmt(q), _fmt(mos), _fmt(mos_p)])
        return buf.getvalue()


def _fmt(v) -> str:
    return "nan" if v is None or (isinstance(v, float) and math.isnan(v)) else f"{float(v):.10g}"


def _ordered_groups(labels) -> list[str]:
    present = set(labels)
    known = [g for g in TABLE_ORDER if g in present]
    return known + sorted(present - set(TABLE_ORDER))


def _score_group(name, q, mos, params) -> GroupResult:
    res = GroupResult(group=name, n=q.size, params=params)
    mos_p = logistic(params, q)
    res.rmse = float(np.sqrt(np.mean((mos_p - mos) ** 2)))
    try:
        res.plcc = pearson(mos_p, mos)
        res.srocc = spearman(q, mos)
    except EvaluationError as exc:
        res.status = str(exc)
    return res


def evaluate(records, fit_mode: str = "per-group", metric: str = "tetrolet-gsm") -> EvaluationReport:
    """Per-distortion and pooled PLCC/SROCC.

    ``fit_mode="per-group"`` refits the logistic for every group;
    ``"global"`` fits once on all records and reuses that mapping.
    """
    records = list(records)
    if not records:
        raise EvaluationError("no records to evaluate")
    if fit_mode not in ("per-group", "global"):
        raise ValueError(f"unknown fit mode {fit_mode!r}")
    q_all = np.array([r.q for r in records], dtype=np.float64)
    mos_all = np.array([r.mos for r in records], dtype=np.float64)
    labels = np.array([r.label for r in records], dtype=object)

    global_params, global_error = None, None
    if fit_mode == "global":
        try:
            global_params = fit_logistic(q_all, mos_all)
        except EvaluationError as exc:
            global_error = str(exc)

    rows = []
    for name in _ordered_groups(labels) + [ALL]:
        mask = np.ones(len(records), bool) if name == ALL else labels == name
        q, mos = q_all[mask], mos_all[mask]
        if q.size < MIN_GROUP:
            rows.append(GroupResult(name, q.size, status="insufficient data"))
            continue
        if fit_mode == "global":
            if global_params is None:
                rows.append(GroupResult(name, q.size, status=global_error))
                continue
            params = global_params
        else:
            try:
                params = fit_logistic(q, mos)
            except EvaluationError as exc:
                rows.append(GroupResult(name, q.size, status=str(exc)))
                continue
        rows.append(_score_group(name, q, mos, params))

    all_row = rows[-1]
    scatter = []
    for r in records:
        mos_p = float(logistic(all_row.params, r.q)) if all_row.params is not None else math.nan
        scatter.append((r.ref_id, r.dist_id, r.label, r.q, r.mos, mos_p))
    return EvaluationReport(rows=rows, fit_mode=fit_mode, metric=metric, scatter=scatter)
