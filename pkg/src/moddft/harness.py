"""Scenario generation, Monte Carlo recovery experiments and report output.

Randomness flows from one integer seed through :class:`numpy.random.SeedSequence`:
each ``(N, trial)`` or ``(P, N, trial)`` gets its own child stream, so a run is
reproducible and independent of trial execution order.
"""
from __future__ import annotations

import csv
import io
import json
import os
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .cyclotomic import H_of, partition_gaussian
from .errors import DomainError
from .ident import PBLConfig, identifiable_full, oversampling_sufficient, pbl_identifiable_HN
from .modcore import centered_mod, complex_mod, dft_matrix, fold_decompose
from .recover import SolverConfig, pbl_recover, solve_integer_equations

__all__ = [
    "TABLE1_N",
    "REPORT_VERSION",
    "SEED_ENV",
    "default_seed",
    "gen_signal",
    "gen_pbl",
    "scenario1_V",
    "scenario2_V",
    "theoretical_prob",
    "ExperimentConfig",
    "ExperimentReport",
    "monte_carlo",
    "region_map",
    "region_predicted",
    "region_svg",
]

TABLE1_N = (5, 6, 7, 8, 10, 11, 14, 16)
REPORT_VERSION = 1
SEED_ENV = "MODDFT_SEED"
SUCCESS_TOL = 1e-6


def default_seed():
    """Seed from the ``MODDFT_SEED`` environment variable, else 0."""
    raw = os.environ.get(SEED_ENV, "").strip()
    if not raw:
        return 0
    try:
        return int(raw, 0)
    except ValueError:
        raise DomainError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def gen_signal(N, V, rng):
    """Signal with zeros on ``V`` and real, imaginary parts ~ U[-1, 1] elsewhere."""
    N = int(N)
    s = rng.uniform(-1.0, 1.0, N) + 1j * rng.uniform(-1.0, 1.0, N)
    idx = sorted(int(v) for v in V)
    if idx and (idx[0] < 0 or idx[-1] >= N):
        raise DomainError(f"V must be a subset of 0..{N - 1}")
    s[idx] = 0.0
    return s


def gen_pbl(N, P, rng):
    """Random PBL signal: ``c_1..c_P`` with parts ~ U[-1, 1] and ``c_0 = 0``."""
    N, P = int(N), int(P)
    if P < 1 or N <= 2 * P + 1:
        raise DomainError("need P >= 1 and N > 2P + 1")
    c = rng.uniform(-1.0, 1.0, P) + 1j * rng.uniform(-1.0, 1.0, P)
    return PBLConfig.from_positive(P, N, c, 0.0)


def scenario1_V(N):
    """Smallest index of every root class: a minimal hitting set.

    Examples
    --------
    >>> scenario1_V(6)
    (0, 1, 2, 3)
    """
    N = int(N)
    if N < 2:
        raise DomainError("N must be >= 2")
    return tuple(sorted(min(c) for c in partition_gaussian(N).classes))


def scenario2_V(N, rng):
    """Uniform random subset: each index kept independently with probability 1/2."""
    return tuple(int(i) for i in np.flatnonzero(rng.random(int(N)) < 0.5))


def _class_masks(N):
    return [sum(1 << n for n in c) for c in partition_gaussian(N).classes]


def theoretical_prob(N, method="auto"):
    """Probability that a uniform random ``V`` makes the model identifiable.

    Parameters
    ----------
    N : int
    method : {'auto', 'enumerate', 'closed'}
        ``enumerate`` counts hitting sets over all ``2^N`` subsets (N <= 24);
        ``closed`` uses ``prod_k (2^{|N_k|} - 1) / 2^N``; ``auto`` enumerates
        when feasible.

    Returns
    -------
    Fraction
    """
    N = int(N)
    if N < 1:
        raise DomainError("N must be positive")
    if method == "auto":
        method = "enumerate" if N <= 24 else "closed"
    if method == "closed":
        num = 1
        for c in partition_gaussian(N).classes:
            num *= (1 << len(c)) - 1
        return Fraction(num, 1 << N)
    if method != "enumerate":
        raise DomainError(f"unknown method {method!r}")
    if N > 24:
        raise DomainError("enumeration is limited to N <= 24")
    masks = _class_masks(N)
    count = 0
    chunk = 1 << min(N, 20)
    for start in range(0, 1 << N, chunk):
        subsets = np.arange(start, start + chunk, dtype=np.int64)
        ok = np.ones(chunk, dtype=bool)
        for m in masks:
            ok &= (subsets & m) != 0
        count += int(ok.sum())
    return Fraction(count, 1 << N)


@dataclass(frozen=True)
class ExperimentConfig:
    """Monte Carlo settings.

    Parameters
    ----------
    N_list : sequence of int
    trials : int
        Trials per ``N`` (or per region cell).
    scenario : {'s1_hitting', 's2_uniform_random'}
    seed : int
    solver : SolverConfig
    """

    N_list: tuple = TABLE1_N
    trials: int = 300
    scenario: str = "s1_hitting"
    seed: int = 0
    solver: SolverConfig = SolverConfig()

    def __post_init__(self):
        object.__setattr__(self, "N_list", tuple(int(n) for n in self.N_list))
        if int(self.trials) < 1:
            raise DomainError("trials must be >= 1")
        if self.scenario not in ("s1_hitting", "s2_uniform_random"):
            raise DomainError(f"unknown scenario {self.scenario!r}")


@dataclass
class ExperimentReport:
    """Rows of results plus run metadata.

    ``rows`` holds one dict per ``N`` (Monte Carlo) or per ``(P, N)`` cell
    (region map).  Wall times live in ``timing`` so that the serialized rows
    stay byte-identical across runs with the same seed.
    """

    kind: str
    columns: list
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)

    def row(self, **key):
        for r in self.rows:
            if all(r.get(k) == v for k, v in key.items()):
                return r
        raise KeyError(key)

    def to_csv(self, timing=False):
        buf = io.StringIO()
        buf.write(f"# moddft-report v{REPORT_VERSION} kind={self.kind}\n")
        cols = list(self.columns) + (["wall_time_s"] if timing else [])
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in self.rows:
            vals = [r.get(c, "") for c in self.columns]
            if timing:
                vals.append(f"{self.timing.get(_row_key(self.kind, r), 0.0):.3f}")
            w.writerow([_fmt(v) for v in vals])
        return buf.getvalue()

    def to_json(self, timing=False):
        doc = {"format": f"moddft-report v{REPORT_VERSION}", "kind": self.kind,
               "meta": self.meta, "columns": self.columns, "rows": self.rows}
        if timing:
            doc["timing"] = self.timing
        return json.dumps(doc, indent=2, sort_keys=True, default=_fmt)


def _row_key(kind, r):
    return f"P={r['P']},N={r['N']}" if kind == "region" else f"N={r['N']}"


def _fmt(v):
    if isinstance(v, float):
        return repr(round(v, 12))
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, (list, tuple)):
        return " ".join(str(x) for x in v)
    return v


MC_COLUMNS = ["N", "scenario", "trials", "successes", "success_rate", "inbox_trials",
              "inbox_successes", "inbox_success_rate", "out_of_box", "budget_exhausted",
              "empty_V", "status_multiple", "mean_nodes", "theoretical_prob", "gap_vs_theory", "V"]


def monte_carlo(cfg: ExperimentConfig, progress=None):
    """Run recovery trials for each ``N`` in ``cfg.N_list``.

    Per trial: draw ``V``, draw ``s``, fold ``z = C(F s)``, solve, and score a
    success when ``||s_hat - s||_inf <= 1e-6``.  Budget exhaustion counts as a
    failure and is tallied separately, as are trials whose true fold vector
    falls outside the solver box.

    Parameters
    ----------
    cfg : ExperimentConfig
    progress : callable, optional
        Called as ``progress(N, trial)`` after each trial.

    Returns
    -------
    ExperimentReport
    """
    B = int(cfg.solver.box_bound)
    report = ExperimentReport("montecarlo", list(MC_COLUMNS),
                              meta={"seed": int(cfg.seed), "trials": int(cfg.trials),
                                    "scenario": cfg.scenario, "box_bound": B,
                                    "residual_tol": cfg.solver.residual_tol,
                                    "success_tol": SUCCESS_TOL, "max_nodes": int(cfg.solver.max_nodes),
                                    "method": cfg.solver.method})
    for N in cfg.N_list:
        t0 = time.perf_counter()
        F = dft_matrix(N)
        streams = np.random.SeedSequence(int(cfg.seed), spawn_key=(N,)).spawn(int(cfg.trials))
        tally = dict(successes=0, inbox_trials=0, inbox_successes=0, out_of_box=0,
                     budget_exhausted=0, empty_V=0, status_multiple=0)
        nodes = 0
        V1 = scenario1_V(N) if cfg.scenario == "s1_hitting" else None
        for t, ss in enumerate(streams):
            rng = np.random.default_rng(ss)
            V = V1 if V1 is not None else scenario2_V(N, rng)
            s = gen_signal(N, V, rng)
            y = F @ s
            z = complex_mod(y)
            eps = fold_decompose(z, y)
            inbox = max(np.abs(eps.re).max(), np.abs(eps.im).max()) <= B
            tally["inbox_trials"] += int(inbox)
            tally["out_of_box"] += int(not inbox)
            if not V:
                tally["empty_V"] += 1
                continue
            res = solve_integer_equations(z, V, cfg.solver)
            nodes += res.nodes
            if res.status == "budget_exhausted":
                tally["budget_exhausted"] += 1
            elif res.status == "multiple":
                tally["status_multiple"] += 1
            ok = (res.status != "budget_exhausted" and res.s_hat is not None
                  and float(np.max(np.abs(res.s_hat - s))) <= SUCCESS_TOL)
            tally["successes"] += int(ok)
            tally["inbox_successes"] += int(ok and inbox)
            if progress:
                progress(N, t)
        T = int(cfg.trials)
        theory = theoretical_prob(N) if N <= 24 else theoretical_prob(N, "closed")
        row = {"N": N, "scenario": cfg.scenario, "trials": T, **tally,
               "success_rate": tally["successes"] / T,
               "inbox_success_rate": (tally["inbox_successes"] / tally["inbox_trials"]
                                      if tally["inbox_trials"] else float("nan")),
               "mean_nodes": nodes / T,
               "theoretical_prob": theory,
               "gap_vs_theory": tally["successes"] / T - float(theory),
               "V": list(V1) if V1 is not None else "random"}
        report.rows.append(row)
        report.timing[f"N={N}"] = time.perf_counter() - t0
    return report


REGION_COLUMNS = ["P", "N", "gamma", "H_N", "predicted_identifiable", "oversampling_sufficient",
                  "trials", "successes", "success_rate", "inbox_trials", "inbox_successes",
                  "out_of_box", "budget_exhausted", "witness_solutions", "witness_status"]


def _pbl_success(y_hat, y):
    if y_hat is None:
        return False
    d = y_hat - y
    shift = d - d[0]
    return float(np.max(np.abs(shift))) <= SUCCESS_TOL and abs(d[0] - round(d[0])) <= SUCCESS_TOL


def region_map(P_range: Sequence[int], N_range: Sequence[int], cfg: ExperimentConfig,
               witness=True, progress=None):
    """PBL identifiability grid: predicted verdict against empirical recovery.

    Only cells with ``N > 2P + 1`` are run.  Trials use ``pbl_recover`` with
    ``cfg.solver``.  For predicted-unidentifiable cells an ``enumerate_all``
    search on the first trial's samples records how many inequivalent
    solutions exist in the box (capped at 2) when ``witness`` is set.

    Returns
    -------
    ExperimentReport
    """
    P_range = [int(p) for p in P_range]
    N_range = [int(n) for n in N_range]
    if not P_range or not N_range:
        raise DomainError("P and N ranges must be nonempty")
    B = int(cfg.solver.box_bound)
    report = ExperimentReport("region", list(REGION_COLUMNS),
                              meta={"seed": int(cfg.seed), "trials": int(cfg.trials), "box_bound": B,
                                    "stop_at_first": bool(cfg.solver.stop_at_first),
                                    "residual_tol": cfg.solver.residual_tol, "method": cfg.solver.method,
                                    "max_nodes": int(cfg.solver.max_nodes),
                                    "P_range": P_range, "N_range": N_range})
    wcfg = SolverConfig(box_bound=B, residual_tol=cfg.solver.residual_tol,
                        max_nodes=cfg.solver.max_nodes, mode="enumerate_all", max_solutions=2)
    for P in P_range:
        for N in N_range:
            if N <= 2 * P + 1:
                continue
            t0 = time.perf_counter()
            pred = pbl_identifiable_HN(N, P).identifiable
            streams = np.random.SeedSequence(int(cfg.seed), spawn_key=(P, N)).spawn(int(cfg.trials))
            tally = dict(successes=0, inbox_trials=0, inbox_successes=0, out_of_box=0, budget_exhausted=0)
            first_z = None
            for t, ss in enumerate(streams):
                rng = np.random.default_rng(ss)
                y = gen_pbl(N, P, rng).samples()
                z = centered_mod(y)
                if first_z is None:
                    first_z = z
                eps = np.rint(z - y).astype(np.int64)
                inbox = int(eps.max() - eps.min()) <= 2 * B
                tally["inbox_trials"] += int(inbox)
                tally["out_of_box"] += int(not inbox)
                res = pbl_recover(z, P, cfg.solver)
                if res.status == "budget_exhausted":
                    tally["budget_exhausted"] += 1
                ok = res.status != "budget_exhausted" and _pbl_success(res.y_hat, y)
                tally["successes"] += int(ok)
                tally["inbox_successes"] += int(ok and inbox)
                if progress:
                    progress(P, N, t)
            wsol, wstat = "", ""
            if witness and not pred:
                wres = pbl_recover(first_z, P, wcfg)
                wsol, wstat = len(wres.eps_solutions), wres.status
            T = int(cfg.trials)
            report.rows.append({"P": P, "N": N, "gamma": Fraction(N, 2 * P), "H_N": H_of(N),
                                "predicted_identifiable": pred,
                                "oversampling_sufficient": oversampling_sufficient(N, P),
                                "trials": T, **tally, "success_rate": tally["successes"] / T,
                                "witness_solutions": wsol, "witness_status": wstat})
            report.timing[f"P={P},N={N}"] = time.perf_counter() - t0
    return report


def region_predicted(P_range: Sequence[int], N_range: Sequence[int]):
    """Region report with predicted verdicts only (no simulation)."""
    P_range = [int(p) for p in P_range]
    N_range = [int(n) for n in N_range]
    if not P_range or not N_range:
        raise DomainError("P and N ranges must be nonempty")
    cols = ["P", "N", "gamma", "H_N", "predicted_identifiable", "oversampling_sufficient"]
    report = ExperimentReport("region", cols, meta={"P_range": P_range, "N_range": N_range, "trials": 0})
    for P in P_range:
        for N in N_range:
            if N <= 2 * P + 1:
                continue
            report.rows.append({"P": P, "N": N, "gamma": Fraction(N, 2 * P), "H_N": H_of(N),
                                "predicted_identifiable": pbl_identifiable_HN(N, P).identifiable,
                                "oversampling_sufficient": oversampling_sufficient(N, P)})
    return report


def region_svg(report: ExperimentReport, cell=14):
    """Two-panel SVG heatmap of a region report.

    Left: predicted verdict (black = unidentifiable, white = identifiable,
    grey = ``N <= 2P + 1``).  Right: empirical success rate in grey levels.
    Both panels carry the predicted boundary in red and the line
    ``N = 6 (P + 1)`` in blue.
    """
    Ps = report.meta.get("P_range") or sorted({r["P"] for r in report.rows})
    Ns = report.meta.get("N_range") or sorted({r["N"] for r in report.rows})
    cells = {(r["P"], r["N"]): r for r in report.rows}
    W, Hh = len(Ns) * cell, len(Ps) * cell
    pad, gap = 40, 50
    width = 2 * W + gap + 2 * pad
    height = Hh + 2 * pad
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="10">',
           f'<rect width="{width}" height="{height}" fill="white"/>']

    def xy(ox, i, j):
        # P grows upwards
        return ox + j * cell, pad + (len(Ps) - 1 - i) * cell

    for panel, ox in enumerate((pad, pad + W + gap)):
        title = "predicted (H(N) >= P+1)" if panel == 0 else "empirical success rate"
        out.append(f'<text x="{ox}" y="{pad - 22}">{title}</text>')
        for i, P in enumerate(Ps):
            for j, N in enumerate(Ns):
                x, y = xy(ox, i, j)
                r = cells.get((P, N))
                if r is None:
                    fill = "#bbbbbb"
                elif panel == 0 or "success_rate" not in r:
                    fill = "#ffffff" if r["predicted_identifiable"] else "#000000"
                else:
                    g = int(round(255 * float(r["success_rate"])))
                    fill = f"rgb({g},{g},{g})"
                out.append(f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{fill}" '
                           f'stroke="#dddddd" stroke-width="0.3"/>')
        # red boundary between predicted classes
        for i, P in enumerate(Ps):
            for j, N in enumerate(Ns):
                here = cells.get((P, N))
                if here is None:
                    continue
                for di, dj in ((0, 1), (1, 0)):
                    if i + di >= len(Ps) or j + dj >= len(Ns):
                        continue
                    other = cells.get((Ps[i + di], Ns[j + dj]))
                    if other is None or other["predicted_identifiable"] == here["predicted_identifiable"]:
                        continue
                    x, y = xy(ox, i, j)
                    if dj:
                        seg = (x + cell, y, x + cell, y + cell)
                    else:
                        seg = (x, y, x + cell, y)
                    out.append('<line x1="%d" y1="%d" x2="%d" y2="%d" stroke="red" stroke-width="2"/>' % seg)
        # blue oversampling line N = 6(P+1), drawn through cell centres
        pts = []
        for i, P in enumerate(Ps):
            N6 = 6 * (P + 1)
            if Ns[0] <= N6 <= Ns[-1]:
                x = ox + (N6 - Ns[0]) * cell + cell / 2
                y = pad + (len(Ps) - 1 - i) * cell + cell / 2
                pts.append(f"{x:.1f},{y:.1f}")
        if len(pts) >= 2:
            out.append(f'<polyline points="{" ".join(pts)}" fill="none" stroke="blue" stroke-width="2"/>')
        for j, N in enumerate(Ns):
            if N % 5 == 0:
                out.append(f'<text x="{ox + j * cell + 2}" y="{pad + Hh + 12}">{N}</text>')
        for i, P in enumerate(Ps):
            out.append(f'<text x="{ox - 12}" y="{pad + (len(Ps) - 1 - i) * cell + cell - 3}">{P}</text>')
        out.append(f'<text x="{ox + W / 2 - 4}" y="{pad + Hh + 26}">N</text>')
        out.append(f'<text x="{ox - 30}" y="{pad + Hh / 2}">P</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
