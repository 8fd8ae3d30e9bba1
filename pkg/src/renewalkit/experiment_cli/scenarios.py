"""Scenario implementations.  Each writes its artifacts through the sink and returns a verdict."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from ..concentration import check_concentration, check_local_ldp, ldp_shape_summary
from ..errors import BudgetExceeded, SpecInvalid
from ..exact_lattice import LatticeLaw, decompose, is_aperiodic
from ..renewal_engine import TargetCell, big_n_prediction, renewal_sums, small_n_sum
from ..srt_criteria import CriterionConfig, criterion_sum, theil_sen_slope
from ..stable_law import StableLaw, density, fibonacci_sphere, rho
from ..step_models import ProductStable, WilliamsonModified, build_model
from .artifacts import ArtifactSink
from .spec import ExperimentSpec

__all__ = ["ScenarioResult", "SCENARIOS", "run_scenario", "is_stochastic"]


@dataclass
class ScenarioResult:
    ok: bool = True
    summary: dict = field(default_factory=dict)
    consumed: dict = field(default_factory=dict)


def _model(spec: ExperimentSpec):
    if spec.model is None:
        raise SpecInvalid(f"scenario {spec.scenario} needs a model")
    return build_model(spec.model)


def _row_base(spec: ExperimentSpec, **extra) -> dict:
    return {"scenario": spec.scenario, "model": spec.model or spec.params.get("law"), **extra}


def _check_samples(spec: ExperimentSpec, n: int) -> int:
    if spec.budget.max_samples is not None and n > spec.budget.max_samples:
        raise BudgetExceeded(f"{n} Monte Carlo samples requested, budget is {spec.budget.max_samples}")
    return n


def _directions(spec: ExperimentSpec, d: int) -> np.ndarray:
    om = spec.param("omegas")
    if om is not None:
        u = np.atleast_2d(np.asarray(om, float))
        if u.shape[1] != d:
            raise SpecInvalid("omegas must have d coordinates")
        return u / np.linalg.norm(u, axis=1, keepdims=True)
    return fibonacci_sphere(int(spec.param("n_directions", 16)), d)


def _law(spec: ExperimentSpec) -> StableLaw:
    cfg = spec.param("law")
    if cfg is None:
        return _model(spec).limit_law()
    kind = cfg.get("kind")
    try:
        if kind == "isotropic":
            return StableLaw.isotropic(float(cfg["alpha"]), int(cfg["d"]), float(cfg.get("cf_scale", 1.0)))
        if kind == "product":
            return StableLaw.product(float(cfg["alpha"]), int(cfg["d"]), float(cfg.get("cf_scale", 1.0)))
        if kind == "gaussian":
            return StableLaw.gaussian(cfg["cov"])
    except (KeyError, ValueError, TypeError) as exc:
        raise SpecInvalid(f"law: {exc}") from exc
    raise SpecInvalid("law.kind must be isotropic, product or gaussian")


# scenarios -----------------------------------------------------------------------------------
def _decompose(spec: ExperimentSpec, sink: ArtifactSink, workers: int) -> ScenarioResult:
    try:
        law = LatticeLaw.from_json(spec.param("law"))
    except (KeyError, ValueError, TypeError) as exc:
        raise SpecInvalid(f"law: {exc}") from exc
    dec = decompose(law)
    ap = is_aperiodic(law)
    out = {"scenario": spec.scenario, "law": law.to_json(), "decomposition": dec.to_json(), "aperiodicity": ap.to_json()}
    sink.emit_json("decompose.json", out)
    return ScenarioResult(summary={"r": dec.r, "nu": dec.nu, "q": dec.q, "aperiodic": ap.aperiodic})


def _reference_density(cfg, x: np.ndarray) -> Optional[np.ndarray]:
    """Closed forms: isotropic alpha = 2 (Gaussian) and alpha = 1 (Cauchy)."""
    if not cfg or cfg.get("kind") != "isotropic":
        return None
    a, d, c = float(cfg["alpha"]), int(cfg["d"]), float(cfg.get("cf_scale", 1.0))
    r2 = np.sum(x * x, axis=-1)
    if a == 2.0:
        return (4 * math.pi * c) ** (-d / 2) * np.exp(-r2 / (4 * c))
    if a == 1.0:
        return math.gamma((d + 1) / 2) / math.pi ** ((d + 1) / 2) * c / (c * c + r2) ** ((d + 1) / 2)
    return None


def _density(spec: ExperimentSpec, sink: ArtifactSink, workers: int) -> ScenarioResult:
    law = _law(spec)
    kw = {"extent": float(spec.param("extent", 5.0)), "tol": float(spec.param("tol", 1e-7))}
    if spec.budget.max_nodes is not None:
        kw["max_nodes"] = int(spec.budget.max_nodes)
    g = density(law, **kw)
    pts = g.points().reshape(-1, g.d)
    vals = g.values.reshape(-1)
    ref = _reference_density(spec.param("law"), pts)
    rows = []
    for p, v, r in zip(pts, vals, ref if ref is not None else [None] * len(vals)):
        row = {f"x{i}": float(c) for i, c in enumerate(p)}
        row["psi"] = float(v)
        if r is not None:
            row["reference"] = float(r)
        rows.append(row)
    sink.emit_csv("density.csv", rows)
    summary = {
        "scenario": spec.scenario,
        "law": spec.param("law") or spec.model,
        "d": g.d,
        "spacing": g.spacing,
        "shape": list(g.values.shape),
        "mass": g.mass(),
        "error_estimate": g.error_estimate,
        "richardson_gap": g.richardson_gap,
    }
    if ref is not None:
        summary["reference_max_abs_error"] = float(np.max(np.abs(vals - ref)))
    sink.emit_json("density.json", summary)
    return ScenarioResult(summary={k: summary[k] for k in ("mass", "spacing") if k in summary}, consumed={"nodes": int(vals.size)})


def _rho(spec: ExperimentSpec, sink: ArtifactSink, workers: int) -> ScenarioResult:
    law = _law(spec)
    q = int(spec.param("q", 1))
    dirs = _directions(spec, law.d)
    rows = []
    for dl in spec.delta:
        for w in dirs:
            r = rho(law, q, w, dl)
            rows.append(_row_base(spec, q=q, omega=list(map(float, w)), delta=dl, value=r.value, infinite=r.infinite, tail_estimate=r.tail_estimate))
    sink.emit_csv("rho.csv", rows)
    spread = {}
    for dl in spec.delta:
        v = [r["value"] for r in rows if r["delta"] == dl and not r["infinite"]]
        spread[repr(dl)] = (max(v) - min(v)) if v else None
    out = {"scenario": spec.scenario, "law": spec.param("law") or spec.model, "q": q, "spread": spread, "rows": rows}
    sink.emit_json("rho.json", out)
    return ScenarioResult(summary={"spread": spread, "any_infinite": any(r["infinite"] for r in rows)})


def _renewal(spec: ExperimentSpec, sink: ArtifactSink, workers: int) -> ScenarioResult:
    model = _model(spec)
    h = float(spec.param("h", 1.0))
    cell = TargetCell.for_model(model, h)
    method = spec.param("method", "spectral")
    M = float(spec.param("M", 8.0))
    n_paths = _check_samples(spec, int(spec.param("n_paths", 20000))) if method == "mc" else 0
    dirs = _directions(spec, model.d)
    rows, worst = [], {}
    for dl in spec.delta:
        pred = [big_n_prediction(model, cell, w, dl) for w in dirs]
        for s in spec.s:
            est = renewal_sums(model, cell, s, dirs, dl, M=M, method=method, tail=spec.param("tail", "llt"), n_paths=max(n_paths, 1), seed=spec.seed, workers=workers)
            for e, p in zip(est, pred):
                ratio = e.value / p if p and math.isfinite(p) else float("nan")
                rows.append(_row_base(spec, h=h, M=M, method=method, delta=dl, s=s, omega=list(e.omega), value=e.value, error=e.error, prediction=p, ratio=ratio))
            worst[f"delta={dl!r},s={s!r}"] = float(max(abs(r["ratio"] - 1) for r in rows[-len(dirs):]))
    sink.emit_csv("renewal.csv", rows)
    out = {"scenario": spec.scenario, "model": model.describe(), "max_abs_ratio_error": worst}
    sink.emit_json("renewal.json", out)
    ok = True
    tol = spec.param("max_rel_error")
    if tol is not None:
        last = [v for k, v in worst.items() if k.endswith(f"s={max(spec.s)!r}")]
        ok = all(v < float(tol) for v in last)
    return ScenarioResult(ok, {"max_abs_ratio_error": worst}, {"samples": n_paths * len(spec.s) * len(spec.delta)})


def _small_n(spec: ExperimentSpec, sink: ArtifactSink, workers: int) -> ScenarioResult:
    model = _model(spec)
    h = float(spec.param("h", 1.0))
    cell = TargetCell.for_model(model, h)
    method = spec.param("method", "spectral")
    n_paths = _check_samples(spec, int(spec.param("n_paths", 20000))) if method == "mc" else 0
    dirs = _directions(spec, model.d)
    rows = []
    for dl in spec.delta:
        for s in spec.s:
            e = small_n_sum(model, cell, s, dl, method=method, directions=dirs, n_paths=max(n_paths, 1), seed=spec.seed, workers=workers)
            rows.append(_row_base(spec, h=h, method=method, delta=dl, s=s, omega=list(e.omega), value=e.value, error=e.error, n_max=e.n_range[1]))
    sink.emit_csv("small_n.csv", rows)
    sink.emit_json("small_n.json", {"scenario": spec.scenario, "model": model.describe(), "rows": rows})
    return ScenarioResult(summary={"max_value": max(r["value"] for r in rows)})


_CRIT_KEYS = ("theta", "eta", "chi", "h", "method", "n_directions", "n_radii", "chi_sweep", "a_grid")


def _criterion_config(spec: ExperimentSpec) -> CriterionConfig:
    kw = {k: spec.params[k] for k in _CRIT_KEYS if k in spec.params}
    if "chi_sweep" in kw:
        kw["chi_sweep"] = tuple(kw["chi_sweep"])
    try:
        return CriterionConfig(deltas=spec.delta, s_values=spec.s, **kw)
    except (ValueError, TypeError) as exc:
        raise SpecInvalid(f"criterion parameters: {exc}") from exc


def _criterion_rows(spec, report, **extra):
    return [dict(_row_base(spec, **extra), **r) for r in report.csv_rows()]


def _criterion(spec: ExperimentSpec, sink: ArtifactSink, workers: int) -> ScenarioResult:
    model = _model(spec)
    cfg = _criterion_config(spec)
    try:
        cfg.check_for(model.d, model.alpha)
    except ValueError as exc:
        raise SpecInvalid(str(exc)) from exc
    rep = criterion_sum(model, cfg)
    sink.emit_csv("criterion.csv", _criterion_rows(spec, rep))
    sink.emit_json("criterion.json", dict(rep.to_json(), scenario=spec.scenario))
    expect = spec.param("expect")
    ok = expect is None or rep.verdict.value == expect
    return ScenarioResult(ok, {"verdict": rep.verdict.value, "exponent": rep.exponent.slope})


def _concentration(spec: ExperimentSpec, sink: ArtifactSink, workers: int) -> ScenarioResult:
    model = _model(spec)
    n_samples = _check_samples(spec, int(spec.param("n_samples", 200_000)))
    checks = check_concentration(model, spec.param("h"), spec.param("a"), cell_grid=spec.param("cell_grid"), n_samples=n_samples, seed=spec.seed)
    rows = [_row_base(spec, **{k: v for k, v in c.to_json().items() if k != "model"}) for c in checks]
    sink.emit_csv("concentration.csv", rows)
    n_bad = sum(not c.holds for c in checks)
    sink.emit_json("concentration.json", {"scenario": spec.scenario, "model": model.describe(), "violations": n_bad, "checks": [c.to_json() for c in checks]})
    return ScenarioResult(n_bad == 0, {"violations": n_bad, "cases": len(checks)}, {"samples": n_samples})


def _ldp(spec: ExperimentSpec, sink: ArtifactSink, workers: int) -> ScenarioResult:
    model = _model(spec)
    method = spec.param("method", "auto")
    n_paths = _check_samples(spec, int(spec.param("n_paths", 200_000)))
    kw = {}
    if "rho_over_s" in spec.params:
        kw["rho_over_s"] = tuple(spec.param("rho_over_s"))
    checks = check_local_ldp(
        model, spec.n, spec.s, spec.param("rays"), h=float(spec.param("h", 1.0)), method=method, n_paths=n_paths, seed=spec.seed, workers=workers, **kw
    )
    rows = []
    for c in checks:
        j = c.to_json()
        rows.append(_row_base(spec, n=c.n, s=c.s, h=c.h, ray=j["ray"], method=c.method, slope=c.slope, chi_fit=c.chi_fit, slope_per_rho=c.slope_per_rho, r2=c.fit.r2 if c.fit else float("nan"), C_fit=c.C_fit))
    sink.emit_csv("ldp.csv", rows)
    shape = ldp_shape_summary(checks)
    sink.emit_json("ldp.json", {"scenario": spec.scenario, "model": model.describe(), "shape": shape.to_json(), "checks": [c.to_json() for c in checks]})
    ok = shape.all_negative and (shape.steepening or not spec.param("require_steepening", True))
    return ScenarioResult(ok, shape.to_json(), {"samples": n_paths if any(c.method == "mc" for c in checks) else 0})


def _williamson_dichotomy(spec: ExperimentSpec, sink: ArtifactSink, workers: int) -> ScenarioResult:
    """Normalized criterion sums for two spike weights: the first must decay in s, the second plateau."""
    d = int(spec.param("d", 2))
    decaying, plateau = spec.param("b_values", ["ln2", "ln"])
    cfg = _criterion_config(spec)
    reports = {}
    rows = []
    for b in (decaying, plateau):
        model = WilliamsonModified(d, b)
        rep = criterion_sum(model, cfg)
        reports[b] = rep
        rows += _criterion_rows(spec, rep, b=b)
    sink.emit_csv("dichotomy.csv", rows)
    i = 0  # smallest delta
    s = np.asarray(cfg.s_values)
    dec = reports[decaying].normalized[i]
    pla = reports[plateau].normalized[i]
    fit_dec = theil_sen_slope(np.log(s), np.log(dec))
    fit_pla = theil_sen_slope(np.log(s), np.log(pla))
    floor = float(pla.min()) >= 0.5 * float(pla.mean())
    order = bool(np.all(dec[s >= 1e3] < pla[s >= 1e3]))
    checks = {
        "decaying_trend_negative": fit_dec.high < 0,
        "plateau_trend_flat": fit_pla.low <= 0 <= fit_pla.high,
        "plateau_above_floor": floor,
        "strict_order": order,
    }
    out = {
        "scenario": spec.scenario,
        "d": d,
        "b_values": [decaying, plateau],
        "delta": cfg.deltas[i],
        "s_values": list(cfg.s_values),
        "normalized": {decaying: dec.tolist(), plateau: pla.tolist()},
        "trends": {decaying: fit_dec.to_json(), plateau: fit_pla.to_json()},
        "checks": checks,
        "reports": {b: r.to_json() for b, r in reports.items()},
    }
    sink.emit_json("dichotomy.json", out)
    return ScenarioResult(all(checks.values()), checks)


def _product_exponent(spec: ExperimentSpec, sink: ArtifactSink, workers: int) -> ScenarioResult:
    """Criterion sweep for a product stable law and its delta exponent against 2 alpha - d + 1."""
    alpha, d = float(spec.param("alpha")), int(spec.param("d"))
    model = ProductStable(d, alpha, float(spec.param("scale", 1.0)))
    cfg = _criterion_config(spec)
    rep = criterion_sum(model, cfg)
    expected = 2 * alpha - d + 1
    tol = float(spec.param("tolerance", 0.15))
    sink.emit_csv("sweep.csv", _criterion_rows(spec, rep, expected=expected))
    within = abs(rep.exponent.slope - expected) <= tol
    chi_ok = all(abs(v - expected) <= tol for v in rep.chi_exponents.values())
    out = dict(rep.to_json(), scenario=spec.scenario, expected_exponent=expected, tolerance=tol, within=within, chi_within=chi_ok)
    sink.emit_json("sweep.json", out)
    return ScenarioResult(within and chi_ok, {"exponent": rep.exponent.slope, "expected": expected, "chi_exponents": rep.chi_exponents})


SCENARIOS: Dict[str, Callable] = {
    "decompose": _decompose,
    "density": _density,
    "rho": _rho,
    "renewal": _renewal,
    "small-n": _small_n,
    "criterion": _criterion,
    "concentration": _concentration,
    "ldp": _ldp,
    "williamson-dichotomy": _williamson_dichotomy,
    "product-exponent": _product_exponent,
}


def is_stochastic(spec: ExperimentSpec) -> bool:
    """Whether the scenario draws random numbers (its outputs depend on the seed)."""
    if spec.scenario in ("renewal", "small-n"):
        return spec.param("method", "spectral") == "mc"
    if spec.scenario == "ldp":
        return spec.param("method", "auto") != "exact"
    if spec.scenario == "concentration":
        return spec.model is not None and spec.model.get("family") in ("product_stable", "radial")
    return False


def run_scenario(spec: ExperimentSpec, sink: ArtifactSink, workers: int = 1) -> ScenarioResult:
    return SCENARIOS[spec.scenario](spec, sink, workers)
