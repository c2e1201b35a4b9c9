"""Theorem-level verification runs over a corpus, weights and r grids."""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .functions import LogOneMinusZ, LogSquaredOneMinusZ, dilate, parse_function
from .norms import (
    bmoa_garsia_norm,
    bphi_norm,
    bphi_quotient,
    envelope,
    exp_integral,
    growth_ratio,
    mu_envelope,
    radial_min,
    RayProfile,
)
from .quadrature import QuadratureSpec
from .weights import PowerWeight, parse_weight

THEOREMS = ("T1", "T1-corollary", "T2", "T3", "T3-mu-chain", "bloch-membership")
CSV_COLUMNS = ("theorem", "fn", "weight", "r", "lhs", "rhs", "ratio", "pass")
MU_CHAIN_FROM = 1.0 - 2.0**-4


def geometric_grid(k_lo: int, k_hi: int) -> list[float]:
    return [1.0 - 2.0**-k for k in range(k_lo, k_hi + 1)]


@dataclass
class RunConfig:
    corpus: list = field(default_factory=lambda: ["mono:1", "mono:2", "log1mz", "lacunary:16"])
    weights: list = field(default_factory=lambda: ["power:0", "power:0.25", "power:0.5"])
    r_grid: list = field(default_factory=lambda: geometric_grid(1, 10))
    t3_r_grid: list = field(default_factory=lambda: geometric_grid(2, 12))
    gamma_grid: list = field(default_factory=lambda: [0.01, 0.05, 0.1])
    rays: int = 32
    tolerance: float = 0.02
    spec: QuadratureSpec = field(default_factory=QuadratureSpec)
    out_dir: str = "reports"
    format: str = "csv"
    seed: int = 0
    random_ray_offset: bool = False
    bloch_levels: int = 20
    radial_points: int = 64

    def __post_init__(self):
        if isinstance(self.spec, dict):
            self.spec = QuadratureSpec.from_dict(self.spec)
        for name in ("r_grid", "t3_r_grid"):
            grid = [float(r) for r in getattr(self, name)]
            if not grid or any(not 0.0 < r < 1.0 for r in grid) or any(np.diff(grid) <= 0):
                raise ValueError(f"{name} must be strictly increasing inside (0, 1)")
            setattr(self, name, grid)
        if self.rays < 1:
            raise ValueError("rays must be >= 1")
        if self.format not in ("csv", "json"):
            raise ValueError("format must be csv or json")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["spec"] = self.spec.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def ray_points(self) -> np.ndarray:
        offset = 0.0
        if self.random_ray_offset:
            offset = float(np.random.default_rng(self.seed).random())
        return np.exp(2j * np.pi * (np.arange(self.rays) + offset) / self.rays)


@dataclass
class VerificationRecord:
    theorem: str
    fn: str
    weight: str
    r: float
    lhs: float
    rhs: float
    ratio: float
    passed: bool
    spec: dict = field(default_factory=dict)
    error: str | None = None
    extra: dict = field(default_factory=dict)

    @classmethod
    def compare(cls, theorem, fn, weight, r, lhs, rhs, tol, spec, **extra):
        lhs, rhs = float(lhs), float(rhs)
        if lhs == 0.0:
            ratio = 0.0
        elif rhs == 0.0 or math.isnan(lhs) or math.isnan(rhs):
            ratio = math.inf
        else:
            ratio = lhs / rhs
        return cls(theorem, fn, weight, float(r), lhs, rhs, ratio, bool(ratio <= 1.0 + tol),
                   spec.to_dict(), None, extra)

    @classmethod
    def failed(cls, theorem, fn, weight, r, spec, message):
        nan = math.nan
        return cls(theorem, fn, weight, float(r), nan, nan, nan, False, spec.to_dict(), message)

    def sort_key(self):
        return (THEOREMS.index(self.theorem), self.fn, self.weight, self.r)


def pmap(func, items, workers: int = 1):
    """Ordered map; results do not depend on the worker count."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(func, items))


def _bphi_task(args):
    fn, wl, spec = args
    try:
        return bphi_norm(parse_function(fn), parse_weight(wl), spec).value, None
    except Exception as exc:  # recorded as an error row
        return math.nan, f"{type(exc).__name__}: {exc}"


def _bmoa_task(args):
    fn, r, spec = args
    try:
        est = bmoa_garsia_norm(dilate(parse_function(fn), r), spec)
        return est.value, {"xi": [est.witness.real, est.witness.imag],
                           "on_cutoff": est.meta["on_cutoff"]}, None
    except Exception as exc:
        return math.nan, {}, f"{type(exc).__name__}: {exc}"


class NormTable:
    """Memo of B_phi and BMOA norms shared between theorem runs."""

    def __init__(self, cfg: RunConfig, workers: int = 1):
        self.cfg, self.workers = cfg, workers
        self.bphi: dict = {}
        self.bmoa: dict = {}

    def need_bphi(self, pairs):
        todo = [p for p in pairs if p not in self.bphi]
        for p, res in zip(todo, pmap(_bphi_task, [(f, w, self.cfg.spec) for f, w in todo], self.workers)):
            self.bphi[p] = res

    def need_bmoa(self, pairs):
        todo = [p for p in pairs if p not in self.bmoa]
        for p, res in zip(todo, pmap(_bmoa_task, [(f, r, self.cfg.spec) for f, r in todo], self.workers)):
            self.bmoa[p] = res


def _weight_label(wl: str) -> str:
    return parse_weight(wl).label


def verify_theorem1(cfg: RunConfig, table: NormTable | None = None, workers: int = 1):
    """||f_r||_BMOA <= ||f||_{B_phi} sqrt(g(1 - r^2)) on corpus x weights x r grid."""
    table = table or NormTable(cfg, workers)
    table.need_bphi([(f, w) for f in cfg.corpus for w in cfg.weights])
    table.need_bmoa([(f, r) for f in cfg.corpus for r in cfg.r_grid])
    out = []
    for f in cfg.corpus:
        for wl in cfg.weights:
            w = parse_weight(wl)
            norm, err_n = table.bphi[(f, wl)]
            for r in cfg.r_grid:
                lhs, info, err_l = table.bmoa[(f, r)]
                if err_n or err_l:
                    out.append(VerificationRecord.failed("T1", f, w.label, r, cfg.spec, err_n or err_l))
                    continue
                rhs = norm * envelope(w, r)
                out.append(VerificationRecord.compare("T1", f, w.label, r, lhs, rhs, cfg.tolerance,
                                                      cfg.spec, bphi_norm=norm, **info))
    return out


def verify_theorem1_corollary(cfg: RunConfig, table: NormTable | None = None, workers: int = 1):
    """Bloch case: ||f_r||_BMOA <= ||f||_B sqrt(|log(1 - r^2)|)."""
    table = table or NormTable(cfg, workers)
    wl = "power:0"
    label = PowerWeight(0.0).label
    table.need_bphi([(f, wl) for f in cfg.corpus])
    table.need_bmoa([(f, r) for f in cfg.corpus for r in cfg.r_grid])
    out = []
    for f in cfg.corpus:
        norm, err_n = table.bphi[(f, wl)]
        for r in cfg.r_grid:
            lhs, info, err_l = table.bmoa[(f, r)]
            if err_n or err_l:
                out.append(VerificationRecord.failed("T1-corollary", f, label, r, cfg.spec, err_n or err_l))
                continue
            rhs = norm * math.sqrt(abs(math.log((1.0 - r) * (1.0 + r))))
            out.append(VerificationRecord.compare("T1-corollary", f, label, r, lhs, rhs, cfg.tolerance,
                                                  cfg.spec, bphi_norm=norm, **info))
    return out


def boundary_nodes(r: float, spec: QuadratureSpec, cap: int = 2**16) -> int:
    """Circle nodes for sampling f(r zeta): at least 8/(1-r), power of two."""
    need = max(spec.n_theta, 8.0 / (1.0 - r))
    return int(min(cap, 2 ** math.ceil(math.log2(need))))


def _expint_task(args):
    fn, wl, norm, r, gammas, spec = args
    f, w = parse_function(fn), parse_weight(wl)
    n = boundary_nodes(r, spec)
    try:
        return [exp_integral(f, w, r, gm, n, norm=norm) for gm in gammas], None
    except Exception as exc:
        return [math.nan] * len(gammas), f"{type(exc).__name__}: {exc}"


def verify_theorem2(cfg: RunConfig, table: NormTable | None = None, workers: int = 1):
    """Exponential integrability; returns (records, {gamma: M_emp})."""
    table = table or NormTable(cfg, workers)
    table.need_bphi([(f, w) for f in cfg.corpus for w in cfg.weights])
    cells, out = [], []
    for f in cfg.corpus:
        for wl in cfg.weights:
            norm, err = table.bphi[(f, wl)]
            if err or not norm > 0 or abs(parse_function(f)(0.0)) > 1e-14:
                why = err or "needs f(0) = 0 and a positive B_phi norm"
                for r in cfg.r_grid:
                    for gm in cfg.gamma_grid:
                        out.append(VerificationRecord.failed("T2", f, _weight_label(wl), r, cfg.spec, why))
                continue
            cells.extend((f, wl, norm, r) for r in cfg.r_grid)
    results = pmap(_expint_task, [(f, wl, n, r, cfg.gamma_grid, cfg.spec) for f, wl, n, r in cells], workers)
    m_table = {}
    for i, gm in enumerate(cfg.gamma_grid):
        vals = [res[0][i] for res in results if res[1] is None]
        m_table[gm] = max(vals) if vals else math.nan
    for (f, wl, norm, r), (vals, err) in zip(cells, results):
        for gm, v in zip(cfg.gamma_grid, vals):
            if err:
                out.append(VerificationRecord.failed("T2", f, _weight_label(wl), r, cfg.spec, err))
            else:
                rec = VerificationRecord.compare("T2", f, _weight_label(wl), r, v, m_table[gm], cfg.tolerance,
                                                 cfg.spec, gamma=gm, bphi_norm=norm)
                rec.passed = rec.passed and math.isfinite(v)
                out.append(rec)
    return out, m_table


def _ray_task(args):
    fn, wl, norm, rays, r_grid, n_mu = args
    f, w = parse_function(fn), parse_weight(wl)
    ratios = np.array([growth_ratio(f, w, rays, r) for r in r_grid])          # (n_r, n_rays)
    mus = np.array([[radial_min(f, z, r, n_mu) for z in rays] for r in r_grid])
    return ratios, mus


def verify_theorem3(cfg: RunConfig, table: NormTable | None = None, workers: int = 1):
    """Radial growth along equispaced rays; returns (records, profiles, constants).

    gamma1_emp is the largest normalized growth ratio over rays and grid radii
    r >= 1 - 2^-4, and the bound is checked on that window. Smaller radii only
    need a finite ratio. The tail-half maximum (the finite-grid limsup
    surrogate) is reported next to it.
    """
    table = table or NormTable(cfg, workers)
    table.need_bphi([(f, w) for f in cfg.corpus for w in cfg.weights])
    r_grid = [r for r in cfg.t3_r_grid if r > 1.0 - math.exp(-1.0)]
    rays = cfg.ray_points()
    pairs = [(f, wl) for f in cfg.corpus for wl in cfg.weights]
    results = pmap(_ray_task, [(f, wl, table.bphi[(f, wl)][0], rays, r_grid, cfg.radial_points)
                               for f, wl in pairs], workers)
    out, profiles, constants = [], [], {}
    chain_idx = [i for i, r in enumerate(r_grid) if r >= MU_CHAIN_FROM]
    tail_idx = list(range(len(r_grid) // 2, len(r_grid)))
    for (f, wl), (ratios, mus) in zip(pairs, results):
        w = parse_weight(wl)
        norm, err = table.bphi[(f, wl)]
        if err:
            out.extend(VerificationRecord.failed("T3", f, w.label, r, cfg.spec, err) for r in r_grid)
            continue
        scale = norm if norm > 0 else 1.0
        gamma1 = float(ratios[chain_idx].max() / scale) if chain_idx and norm > 0 else 0.0
        gamma1_tail = float(ratios[tail_idx].max() / scale) if norm > 0 else 0.0
        worst = int(np.argmax(ratios.max(axis=0)))
        constants[(f, w.label)] = {"gamma1_emp": gamma1, "gamma1_tail": gamma1_tail,
                                   "bphi_norm": norm, "worst_ray": [float(rays[worst].real), float(rays[worst].imag)]}
        for j, z in enumerate(rays):
            profiles.append((f, w.label, RayProfile(complex(z), np.array(r_grid),
                                                    np.abs(parse_function(f)(np.array(r_grid) * z)),
                                                    ratios[:, j])))
        for i, r in enumerate(r_grid):
            if i not in chain_idx:
                # below the fitting window only finiteness is checked
                out.append(VerificationRecord.compare("T3", f, w.label, r, ratios[i].max(), math.inf,
                                                      cfg.tolerance, cfg.spec, check="finite"))
                continue
            out.append(VerificationRecord.compare("T3", f, w.label, r, ratios[i].max(), gamma1 * norm,
                                                  cfg.tolerance, cfg.spec, gamma1_emp=gamma1))
            rhs = gamma1 * norm * mu_envelope(w, r)
            out.append(VerificationRecord.compare("T3-mu-chain", f, w.label, r, mus[i].max(), rhs,
                                                  cfg.tolerance, cfg.spec, gamma1_emp=gamma1))
    return out, profiles, constants


def bloch_closed_form(label: str, x: float) -> float:
    """(1 - x^2)|f'(x)| on the positive axis for the two log members."""
    if label == "log1mz":
        return 1.0 + x
    if label == "log2_1mz":
        return 2.0 * (1.0 + x) * abs(math.log1p(-x))
    raise ValueError(label)


def verify_bloch_membership(cfg: RunConfig):
    """log(1-z) stays below 2 along z = 1 - 2^-k; log^2(1-z) grows past 10."""
    w = PowerWeight(0.0)
    xs = [1.0 - 2.0**-k for k in range(1, cfg.bloch_levels + 1)]
    out = []
    q1 = [float(bphi_quotient(LogOneMinusZ(), w, x)) for x in xs]
    for x, q in zip(xs, q1):
        out.append(VerificationRecord.compare("bloch-membership", "log1mz", w.label, x, q, 2.0, 0.0, cfg.spec,
                                              closed_form=bloch_closed_form("log1mz", x)))
    q2 = [float(bphi_quotient(LogSquaredOneMinusZ(), w, x)) for x in xs]
    for k in range(1, len(xs)):
        out.append(VerificationRecord.compare("bloch-membership", "log2_1mz", w.label, xs[k], q2[k - 1], q2[k],
                                              0.0, cfg.spec, check="increasing",
                                              closed_form=bloch_closed_form("log2_1mz", xs[k])))
    out.append(VerificationRecord.compare("bloch-membership", "log2_1mz", "threshold:10", xs[-1], 10.0, q2[-1],
                                          0.0, cfg.spec, check="exceeds", quotient=q2[-1]))
    return out


def proof_inequalities(w, r_grid) -> list[dict]:
    """The two monotonicity steps of the radial-growth argument, evaluated on a grid."""
    rows = []
    for r in r_grid:
        g_mid = w.g((1.0 - r) * (3.0 + r) / 4.0)
        g_half = w.g((1.0 - r) * (1.0 + r) / 2.0)
        rho = np.linspace(r, 0.5 * (r + 1.0), 33)
        lhs_log = np.min(np.log(math.e / (1.0 - rho)) ** -2)
        rhs_log = math.log(2.0 * math.e / (1.0 - r)) ** -2
        rows.append({"r": r, "g_mid": g_mid, "g_half": g_half, "g_ok": g_mid <= g_half,
                     "log_ok": bool(lhs_log >= rhs_log * (1 - 1e-12))})
    return rows


def run_verification(cfg: RunConfig, theorems=("t1", "t1c", "t2", "t3", "bloch"), workers: int = 1):
    """Run the selected checks; returns (records, extras) with records in report order."""
    table = NormTable(cfg, workers)
    records, extras = [], {}
    if "t1" in theorems:
        records += verify_theorem1(cfg, table)
    if "t1c" in theorems:
        records += verify_theorem1_corollary(cfg, table)
    if "t2" in theorems:
        recs, m_table = verify_theorem2(cfg, table)
        records += recs
        extras["M_emp"] = {repr(k): v for k, v in m_table.items()}
    if "t3" in theorems:
        recs, profiles, consts = verify_theorem3(cfg, table)
        records += recs
        extras["gamma1"] = {f"{f}|{w}": v for (f, w), v in consts.items()}
        extras["proof_inequalities"] = {wl: proof_inequalities(parse_weight(wl), cfg.t3_r_grid)
                                        for wl in cfg.weights}
    if "bloch" in theorems:
        records += verify_bloch_membership(cfg)
    records.sort(key=VerificationRecord.sort_key)
    return records, extras


def _num(x: float) -> str:
    return repr(float(x)) if math.isfinite(x) else ("nan" if math.isnan(x) else ("inf" if x > 0 else "-inf"))


def _jsonable(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else _num(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return _jsonable(obj.item())
    return obj


def summarize(records) -> dict:
    summary = {}
    for rec in records:
        s = summary.setdefault(rec.theorem, {"pass": 0, "fail": 0})
        s["pass" if rec.passed else "fail"] += 1
    return summary


def emit_report(records, out_dir, fmt: str = "csv", name: str = "report", extras: dict | None = None) -> Path:
    """Write records (stable column order) plus a per-theorem summary; returns the report path."""
    if not records:
        raise ValueError("no verification records to report")
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        summary = summarize(records)
        if fmt == "csv":
            path = out_dir / f"{name}.csv"
            with open(path, "w", newline="") as fh:
                wr = csv.writer(fh)
                wr.writerow(CSV_COLUMNS)
                for rec in records:
                    wr.writerow([rec.theorem, rec.fn, rec.weight, _num(rec.r), _num(rec.lhs), _num(rec.rhs),
                                 _num(rec.ratio), "true" if rec.passed else "false"])
            with open(out_dir / f"{name}_summary.json", "w") as fh:
                json.dump(_jsonable({"summary": summary, **(extras or {})}), fh, indent=2, sort_keys=True)
                fh.write("\n")
        elif fmt == "json":
            path = out_dir / f"{name}.json"
            rows = [{"theorem": r.theorem, "fn": r.fn, "weight": r.weight, "r": r.r, "lhs": r.lhs, "rhs": r.rhs,
                     "ratio": r.ratio, "pass": r.passed, "error": r.error, "extra": r.extra, "spec": r.spec}
                    for r in records]
            with open(path, "w") as fh:
                json.dump(_jsonable({"records": rows, "summary": summary, **(extras or {})}), fh,
                          indent=2, sort_keys=True)
                fh.write("\n")
        else:
            raise ValueError(f"unknown report format {fmt!r}")
    except OSError as exc:
        raise OSError(f"cannot write report under {out_dir}: {exc}") from exc
    return path
