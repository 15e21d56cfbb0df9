"""Verification suites over a fixture and the JSON report they produce.

Suite failures are report entries; only malformed input raises.  Reports are
deterministic for fixed flags apart from the ``timing`` block.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .algebra import seminorm
from .bundle import (
    hermitian_structure_by_gluing,
    hermitian_structure_by_reduction,
    verify_cocycle,
    verify_hermitian_structure,
    verify_partition,
    verify_section,
)
from .calculus import (
    DEFAULT_STEP,
    Polynomial,
    check_linearity_split,
    differential_LS,
    random_directions,
    symbolic_LS,
)
from .checks import Check, all_passed
from .connection import (
    frame_connection,
    leibniz_convergence,
    verify_additivity,
    verify_chart_consistency,
    verify_compatibility,
    verify_leibniz,
    verify_tangent_linearity,
)
from .errors import AbundleError, NotReduced, PivotNotInvertible
from .fixtures import Fixture
from .hermitian import gram_schmidt, isometry_to_standard, pair, standard_form, verify_axioms
from .pmodule import apply

REPORT_FORMAT = "abundle-report/1"
SUITES = ("calculus", "hermitian", "partition", "cocycle", "reduction", "gluing",
          "leibniz", "compatibility", "chart-consistency")
CONVERGENCE_RANGE = (3.0, 5.0)
# log10 bin edges for residual histograms
HIST_EDGES = tuple(range(-18, 4, 2))


@dataclass
class RunFlags:
    step: float = DEFAULT_STEP
    tol: float = 1e-6
    samples: int = 32
    seed: int = 0
    directions: int = 8
    diagonal_only: bool = True

    def to_json(self) -> dict:
        return dict(self.__dict__)


@dataclass
class SuiteResult:
    suite: str
    checks: list
    seconds: float = 0.0
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all_passed(self.checks)


def _calculus(fx: Fixture, flags: RunFlags, pts, rng) -> SuiteResult:
    """L/S splits of ``a^2``, ``star(a)``, ``a star(a)`` against Wirtinger derivatives."""
    maps = {"square": {(2, 0): 1.0}, "star": {(0, 1): 1.0}, "norm": {(1, 1): 1.0}}
    n = fx.atlas.grid_size
    checks = []
    for label, powers in maps.items():
        poly = Polynomial.from_dict(powers)
        split, lin, skew = [], [], []
        for x in pts:
            dirs = random_directions(rng, n, 1, 2)
            for h in dirs:
                num = differential_LS(poly, x, h, flags.step)
                ref = symbolic_LS(poly, x, h)
                split.append(max(seminorm(num.L - ref.L), seminorm(num.S - ref.S)))
            scalars = [complex(*rng.standard_normal(2)) for _ in range(2)]
            rep = check_linearity_split(poly, x, dirs, scalars, 1e-7, flags.step)
            lin.append(rep.l_residual)
            skew.append(rep.s_residual)
        checks += [
            Check.upper(f"{label}-split", split, 1e-6,
                        anchor="Df = Lf + Sf with Lf A-linear and Sf skew-linear"),
            Check.upper(f"{label}-L-linear", lin, 1e-7, anchor="Lf(x)(a h) = a Lf(x)(h)"),
            Check.upper(f"{label}-S-skew", skew, 1e-7, anchor="Sf(x)(a h) = a* Sf(x)(h)"),
        ]
    return SuiteResult("calculus", checks)


def _hermitian(fx: Fixture, flags: RunFlags, pts, rng) -> SuiteResult:
    form = fx.alpha
    module = form.module
    checks = list(verify_axioms(form, tol=1e-9, rng=rng, n_samples=16).checks)
    f = isometry_to_standard(form).matrix.entries
    std = standard_form(module)
    res = []
    for _ in range(32):
        x, y = module.random_element(rng).coords, module.random_element(rng).coords
        res.append(seminorm(pair(form.H, apply(f, x), apply(f, y)) - std.pair(x, y)))
    checks.append(Check.upper("isometry", res, 1e-8,
                              anchor="every form is isometric to the standard one"))
    notes = []
    if module.is_free_ambient:
        frame = [np.eye(module.ambient_rank)[j] * np.ones((module.grid_size, 1))
                 for j in range(module.ambient_rank)]
        try:
            basis = gram_schmidt(frame, form)
            dev = [seminorm(form.pair(u.coords, w.coords) - (1.0 if i == j else 0.0))
                   for i, u in enumerate(basis) for j, w in enumerate(basis)]
            checks.append(Check.upper("gram-schmidt", dev, 1e-10,
                                      anchor="orthonormal bases exist for free modules"))
        except PivotNotInvertible as exc:
            checks.append(Check.failure("gram-schmidt", 1e-10, detail=str(exc)))
    else:
        notes.append("gram-schmidt skipped: fiber is not free")
    return SuiteResult("hermitian", checks, notes=notes)


def _partition(fx: Fixture, flags, pts, rng) -> SuiteResult:
    return SuiteResult("partition", verify_partition(fx.partition, fx.base, 1e-12),
                       notes=["support containment is checked on the finite sample plan"])


def _cocycle(fx: Fixture, flags, pts, rng) -> SuiteResult:
    checks = verify_cocycle(fx.atlas, 1e-10)
    checks.append(verify_section(fx.xi, 1e-10).renamed("section-xi"))
    checks.append(verify_section(fx.eta, 1e-10).renamed("section-eta"))
    return SuiteResult("cocycle", checks)


def _reduction(fx: Fixture, flags, pts, rng) -> SuiteResult:
    anchor = "structure group reduces to GL(M, alpha): s(x) = alpha o (tau_ix x tau_ix)"
    try:
        s = hermitian_structure_by_reduction(fx.atlas, fx.alpha, 1e-10)
    except NotReduced as exc:
        return SuiteResult("reduction", [
            Check("form-unitary-transitions", exc.residual, 1e-10, False, "upper", anchor, str(exc))])
    idx = fx.base.sample_plan.subset(flags.samples, flags.seed)
    checks = [Check.upper("form-unitary-transitions", [0.0], 1e-10, anchor=anchor)]
    checks += verify_hermitian_structure(s, 1e-9, idx, consistency_tol=1e-10, rng=rng)
    return SuiteResult("reduction", checks)


def _gluing(fx: Fixture, flags, pts, rng) -> SuiteResult:
    s = hermitian_structure_by_gluing(fx.atlas, fx.alpha, fx.partition)
    idx = fx.base.sample_plan.subset(flags.samples, flags.seed)
    return SuiteResult("gluing", verify_hermitian_structure(s, 1e-9, idx, rng=rng))


def _leibniz(fx: Fixture, flags, pts, rng) -> SuiteResult:
    D = frame_connection(fx.atlas, fx.partition, fx.alpha)
    checks = [verify_leibniz(D, fx.xi, fx.f, pts, flags.tol, flags.step, flags.directions, rng=rng)]
    ratio = leibniz_convergence(D, fx.xi, fx.f, pts[:8], flags.step, flags.directions, rng=rng)
    checks.append(Check.within("leibniz-convergence", ratio, *CONVERGENCE_RANGE,
                               anchor="Leibniz residual is second order in the step",
                               detail="residual(step) / residual(step / 2)"))
    const = lambda x: np.full(x.shape[0], 0.7 - 0.4j)
    checks.append(verify_leibniz(D, fx.xi, const, pts[:8], flags.tol, flags.step, 4, rng=rng)
                  .renamed("constant-homogeneity"))
    checks.append(verify_additivity(D, fx.xi, fx.eta, pts[:8], 1e-10, flags.step, rng=rng))
    checks.append(verify_tangent_linearity(D, fx.xi, pts[:8], flags.tol, flags.step, rng=rng))
    return SuiteResult("leibniz", checks)


def _compatibility(fx: Fixture, flags, pts, rng) -> SuiteResult:
    D = frame_connection(fx.atlas, fx.partition, fx.alpha)
    notes = []
    try:
        s = hermitian_structure_by_reduction(fx.atlas, fx.alpha, 1e-10)
    except NotReduced as exc:
        s = hermitian_structure_by_gluing(fx.atlas, fx.alpha, fx.partition)
        notes.append(f"no reduction ({exc}); measured against the glued structure")
    rep = verify_compatibility(D, s, fx.xi, fx.eta, pts, flags.tol, flags.diagonal_only,
                               flags.step, flags.directions, rng)
    return SuiteResult("compatibility", list(rep.checks), notes=notes)


def _chart_consistency(fx: Fixture, flags, pts, rng) -> SuiteResult:
    D = frame_connection(fx.atlas, fx.partition, fx.alpha)
    return SuiteResult("chart-consistency", verify_chart_consistency(D, fx.xi, pts, 1e-8, 1e-12,
                                                                     flags.step))


_RUNNERS = {
    "calculus": _calculus,
    "hermitian": _hermitian,
    "partition": _partition,
    "cocycle": _cocycle,
    "reduction": _reduction,
    "gluing": _gluing,
    "leibniz": _leibniz,
    "compatibility": _compatibility,
    "chart-consistency": _chart_consistency,
}


def resolve_suites(selector) -> list[str]:
    if selector is None or selector == "all":
        return list(SUITES)
    names = selector.split(",") if isinstance(selector, str) else list(selector)
    names = [s.strip() for s in names if s.strip()]
    bad = [s for s in names if s not in _RUNNERS]
    if bad:
        raise ValueError(f"unknown suite(s) {bad}; choose from {', '.join(SUITES)} or 'all'")
    return [s for s in SUITES if s in names]


def run_suite(fx: Fixture, suites="all", flags: RunFlags | None = None) -> list[SuiteResult]:
    """Run the selected suites in their canonical order."""
    flags = RunFlags() if flags is None else flags
    idx = fx.base.sample_plan.subset(flags.samples, flags.seed)
    pts = fx.base.sample_plan.points[idx]
    out = []
    for k, name in enumerate(resolve_suites(suites)):
        rng = np.random.default_rng([flags.seed, k])
        t0 = time.perf_counter()
        try:
            res = _RUNNERS[name](fx, flags, pts, rng)
        except AbundleError as exc:
            res = SuiteResult(name, [Check.failure(f"{name}-error", flags.tol,
                                                   detail=f"{type(exc).__name__}: {exc}")])
        res.seconds = time.perf_counter() - t0
        out.append(res)
    return out


def _num(v: float):
    v = float(v)
    if math.isfinite(v):
        return v
    return "inf" if v > 0 else ("-inf" if v < 0 else "nan")


def histogram(samples) -> dict:
    r = np.abs(np.asarray(samples, dtype=float))
    r = r[np.isfinite(r)]
    logs = np.log10(np.maximum(r, 1e-300))
    # bin 0 is below the first edge, the last bin at or above the final edge
    bins = np.searchsorted(np.array(HIST_EDGES, dtype=float), logs, side="right")
    counts = np.bincount(bins, minlength=len(HIST_EDGES) + 1)
    return {"log10_edges": list(HIST_EDGES), "counts": counts.tolist()}


def _entry(c: Check) -> dict:
    e = {
        "name": c.name,
        "residual": _num(c.residual),
        "tol": _num(c.tol),
        "bound": c.bound,
        "passed": c.passed,
        "anchor": c.anchor,
    }
    if c.detail:
        e["detail"] = c.detail
    if len(c.samples) > 1:
        e["count"] = len(c.samples)
        e["histogram"] = histogram(c.samples)
    return e


def build_report(fx: Fixture, results, flags: RunFlags) -> dict:
    suites = []
    for r in results:
        suites.append({
            "suite": r.suite,
            "passed": r.passed,
            "entries": [_entry(c) for c in r.checks],
            **({"notes": r.notes} if r.notes else {}),
        })
    verdict = all(s["passed"] for s in suites)
    return {
        "format": REPORT_FORMAT,
        "fixture": fx.name,
        "descriptor": {"seed": fx.descriptor.seed, "grid_size": fx.descriptor.grid_size,
                       "role": fx.descriptor.role},
        "flags": flags.to_json(),
        "suites": suites,
        "verdict": "pass" if verdict else "fail",
        "timing": {"suites": {r.suite: round(r.seconds, 4) for r in results},
                   "total_seconds": round(sum(r.seconds for r in results), 4)},
    }


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=False) + "\n"


def summary_lines(report: dict) -> list[str]:
    lines = []
    for s in report["suites"]:
        for e in s["entries"]:
            flag = {True: "PASS", False: "FAIL", None: "INFO"}[e["passed"]]
            res = e["residual"]
            res = f"{res:.3e}" if isinstance(res, float) else res
            if e.get("bound") == "interval":
                bar = e["detail"].split(";")[0]
            else:
                bar = f"{'>=' if e.get('bound') == 'lower' else '<='} {e['tol']}"
            lines.append(f"{flag}  {s['suite']:<18} {e['name']:<28} {res}  ({bar})")
    lines.append(f"verdict: {report['verdict']}  [{report['fixture']}]")
    return lines
