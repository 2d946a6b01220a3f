"""Command-line entry point: ``ftbessel compute`` and ``ftbessel verify <check>``.

Exit codes: 0 when everything passes, 1 when a check fails or an evaluation
errors, 2 for configuration errors, 3 when a resource cap is hit.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

from .errors import FtBesselError, ParameterOutOfRange, ResourceLimitError
from .fredholm import DEFAULT_EPS, gap_probability, ratio_identity_residual, toeplitz_q
from .lattice import HalfInt, SigmaProfile, halfint_range

__all__ = ["RunConfig", "ConfigError", "parse_s_values", "parse_L_values", "build_config",
           "cmd_compute", "cmd_verify", "main", "CHECKS"]

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_RESOURCE = 0, 1, 2, 3

_VALUE_FLAGS = {"--sigma", "--u", "--sigma-file", "--L", "--s", "--s-max", "--h", "--tol", "--eps",
                "--samples", "--seed", "--out", "--format"}


class ConfigError(ParameterOutOfRange):
    """Invalid command-line configuration."""


# ---------------------------------------------------------------------------
# configuration


def parse_s_values(text: str) -> list[HalfInt]:
    """``"-1/2..21/2"`` (inclusive, step 1) or a comma list such as ``"1/2,5/2"``."""
    out: list[HalfInt] = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = (HalfInt.parse(x) for x in part.split(".."))
            if hi < lo:
                raise ConfigError(f"empty s range {part!r}")
            out.extend(halfint_range(lo, hi))
        elif part:
            out.append(HalfInt.parse(part))
    if not out:
        raise ConfigError("the s range is empty")
    return sorted(set(out))


def parse_L_values(text: str) -> list[float]:
    vals = sorted({float(x) for x in text.split(",") if x.strip()})
    if not vals:
        raise ConfigError("the L grid is empty")
    if any(not (v > 0 and math.isfinite(v)) for v in vals):
        raise ConfigError("L values must be positive and finite")
    return vals


@dataclass
class RunConfig:
    """Validated CLI settings; ``None`` means the check's own default."""

    command: str
    check: str | None = None
    sigmas: list = field(default_factory=list)
    L: list | None = None
    s: list | None = None
    s_max: HalfInt | None = None
    h: float | None = None
    tol: float | None = None
    eps: float = DEFAULT_EPS
    samples: int | None = None
    seed: int = 12345
    out: str | None = None
    fmt: str | None = None
    quick: bool = False

    def __post_init__(self):
        for name in ("h", "tol", "eps"):
            v = getattr(self, name)
            if v is not None and not (v > 0 and math.isfinite(v)):
                raise ConfigError(f"--{name} must be positive")
        if self.samples is not None and self.samples < 2:
            raise ConfigError("--samples must be at least 2")

    def sigma_list(self, default: list[SigmaProfile]) -> list[SigmaProfile]:
        return self.sigmas or default


def _sigma_from_args(args) -> list[SigmaProfile]:
    if args.sigma_file:
        with open(args.sigma_file) as fh:
            return [SigmaProfile.from_json(json.load(fh))]
    if args.sigma is None:
        if args.u is not None:
            return [SigmaProfile.fermi(args.u)]
        return []
    if args.sigma == "fermi" and args.u is not None:
        return [SigmaProfile.fermi(args.u)]
    return [SigmaProfile.parse(args.sigma)]


def build_config(args) -> RunConfig:
    try:
        return RunConfig(
            command=args.command,
            check=getattr(args, "check", None),
            sigmas=_sigma_from_args(args),
            L=parse_L_values(args.L) if args.L else None,
            s=parse_s_values(args.s) if args.s else None,
            s_max=HalfInt.parse(args.s_max) if args.s_max else None,
            h=args.h,
            tol=args.tol,
            eps=args.eps if args.eps is not None else DEFAULT_EPS,
            samples=args.samples,
            seed=args.seed if args.seed is not None else 12345,
            out=args.out,
            fmt=args.format,
            quick=getattr(args, "quick", False),
        )
    except (ValueError, OSError, KeyError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def _workers() -> int:
    raw = os.environ.get("TBL_THREADS")
    if raw:
        try:
            n = int(raw)
        except ValueError as exc:
            raise ConfigError(f"TBL_THREADS must be an integer, got {raw!r}") from exc
        if n < 1:
            raise ConfigError("TBL_THREADS must be at least 1")
        return n
    return min(8, os.cpu_count() or 1)


def _pmap(fn: Callable, items: list) -> list:
    """Map over a thread pool; results come back in input order."""
    if len(items) <= 1 or _workers() == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=_workers()) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# compute


def cmd_compute(cfg: RunConfig) -> tuple[int, str]:
    """CSV (or JSON) of gap probabilities over ``sigma x L x s``."""
    if not cfg.sigmas:
        raise ConfigError("compute needs --sigma, --u or --sigma-file")
    if not cfg.L or not cfg.s:
        raise ConfigError("compute needs --L and --s")
    jobs = [(sg, L, s) for sg in cfg.sigmas for L in cfg.L for s in cfg.s]

    def run(job):
        sg, L, s = job
        return gap_probability(L, s, sg, cfg.eps).csv_row()

    rows = _pmap(run, jobs)
    if cfg.fmt == "json":
        return EXIT_OK, json.dumps(rows, indent=1, sort_keys=True) + "\n"
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return EXIT_OK, buf.getvalue()


# ---------------------------------------------------------------------------
# verification checks
#
# Each check expands into independent jobs; a job returns a list of entries
# ``{check, params, residual, tolerance, pass}``.

_IND = SigmaProfile.indicator()
_FERMI = SigmaProfile.fermi(0.5)


def _entry(check: str, params: dict, residual: float, tol: float, ok: bool | None = None, **extra) -> dict:
    residual = float(residual)
    if ok is None:
        ok = math.isfinite(residual) and residual < tol
    e = {"check": check, "params": params, "residual": residual, "tolerance": float(tol), "pass": bool(ok)}
    e.update(extra)
    return e


def _params(**kw) -> dict:
    out = {}
    for k, v in kw.items():
        if isinstance(v, HalfInt):
            v = str(v)
        elif isinstance(v, SigmaProfile):
            v = v.sigma_id
        out[k] = v
    return out


def _guard(check: str, params: dict, tol: float, fn: Callable[[], list]) -> list:
    """Turn a degenerate-input error into a failed entry with a diagnostic."""
    try:
        return fn()
    except ResourceLimitError:
        raise
    except FtBesselError as exc:
        return [_entry(check, params, math.nan, tol, False, diagnostic=f"{type(exc).__name__}: {exc}")]


def _tol(cfg, default):
    return cfg.tol if cfg.tol is not None else default


def _jobs_toda(cfg):
    from .integrable import toda_convergence, toda_residual

    Ls = cfg.L or ([1.0] if cfg.quick else [0.5, 1.0, 2.0])
    ss = cfg.s or (parse_s_values("-1/2,3/2") if cfg.quick else parse_s_values("-1/2..11/2"))
    tol = _tol(cfg, 1e-6)
    h = cfg.h or 1e-2

    def job(args):
        sg, L, s = args
        p = _params(sigma=sg, L=L, s=s, h=h)

        def run():
            out = [_entry("toda", p, toda_residual(L, s, sg, h, cfg.eps), tol)]
            conv = toda_convergence(L, s, sg, eps=cfg.eps)
            # passes when every halving gains a factor 8 or lands on the rounding floor
            out.append(_entry("toda_convergence", _params(sigma=sg, L=L, s=s), conv.residuals[-1], tol, conv.ok,
                              steps=list(conv.steps), residuals=list(conv.residuals),
                              ratios=list(conv.ratios), floors=list(conv.floors)))
            return out

        return _guard("toda", p, tol, run)

    return [(job, (sg, L, s)) for sg in cfg.sigma_list([_IND, _FERMI]) for L in Ls for s in ss]


def _jobs_variational(cfg):
    from .drhp import verify_variational

    Ls = cfg.L or ([1.0] if cfg.quick else [0.5, 1.0, 2.0])
    ss = cfg.s or (parse_s_values("-1/2,3/2") if cfg.quick else parse_s_values("-1/2..11/2"))
    tols = {"res_beta": _tol(cfg, 1e-9), "res_alpha": _tol(cfg, 1e-6), "res_det_relation": _tol(cfg, 1e-9)}
    h = cfg.h or 1e-3

    def job(args):
        sg, L, s = args
        p = _params(sigma=sg, L=L, s=s, h=h)

        def run():
            res = verify_variational(L, s, sg, h=h, eps=cfg.eps)
            return [_entry(f"variational.{k}", p, res[k], tols[k]) for k in sorted(tols)]

        return _guard("variational", p, tols["res_beta"], run)

    return [(job, (sg, L, s)) for sg in cfg.sigma_list([_IND, _FERMI]) for L in Ls for s in ss]


def _jobs_idpii(cfg):
    from .integrable import large_s_ratio, verify_idpii

    Ls = cfg.L or [1.0]
    ss = cfg.s or (parse_s_values("3/2") if cfg.quick else parse_s_values("3/2..7/2"))
    tol = _tol(cfg, 1e-7)
    keys = ("res_a_sum", "res_b_sum", "res_recursion")

    def job(args):
        sg, L, s = args
        p = _params(sigma=sg, L=L, s=s)

        def run():
            if s is None:
                r = large_s_ratio(L, sg, eps=cfg.eps)
                return [_entry("idpii.large_s_ratio", _params(sigma=sg, L=L, s=r["s"]), r["max_dev"],
                               _tol(cfg, 1e-3))]
            res = verify_idpii(L, s, sg, eps=cfg.eps)
            return [_entry(f"idpii.{k}", p, res[k], tol) for k in keys]

        return _guard("idpii", p, tol, run)

    sigmas = cfg.sigma_list([_IND, _FERMI])
    jobs = [(job, (sg, L, s)) for sg in sigmas for L in Ls for s in ss]
    jobs += [(job, (sg, L, None)) for sg in sigmas for L in Ls]
    return jobs


def _jobs_dpii(cfg):
    from .integrable import dpii_sequence, volterra_residual

    Ls = cfg.L or [1.0]
    s_max = cfg.s_max or (HalfInt(15) if cfg.quick else HalfInt(21))
    tol = _tol(cfg, 1e-8)
    vol_tol = 1e-6
    h = cfg.h or 1e-3

    def job(L):
        p = _params(L=L, s_max=s_max)

        def run():
            seq = dpii_sequence(L, s_max, cfg.eps, halt_tol=tol)
            out = [
                _entry("dpii.cross_check", _params(L=L, s=s), c, tol)
                for s, c in zip(seq.s_values, seq.cross_check)
            ]
            if seq.halted or seq.s_values[-1] != s_max:
                out.append(_entry("dpii.horizon", p, math.nan, tol, False,
                                  diagnostic=f"cross-check failed beyond s = {seq.horizon}"))
            # Volterra needs v(s +- 1) at L +- 2h, so it is only meaningful inside the stable range
            stable = seq.stable_horizon(tol)
            need = min(s_max, HalfInt(15))
            out.append(_entry("dpii.stable_horizon", p, float(stable), float(need), stable >= need,
                              error_bound=[float(e) for e in seq.error_bound]))
            for s in halfint_range(HalfInt(1), min(s_max, stable) - 1):
                out.append(_entry("dpii.volterra", _params(L=L, s=s, h=h), volterra_residual(L, s, h), vol_tol))
            return out

        return _guard("dpii", p, tol, run)

    return [(job, L) for L in Ls]


def _jobs_smalll(cfg):
    from .integrable import small_l_check

    if cfg.sigmas:
        cases = [(sg, s, _tol(cfg, 1e-4)) for sg in cfg.sigmas for s in (cfg.s or parse_s_values("1/2,3/2"))]
    else:
        cases = [(_FERMI, HalfInt(1), 1e-4), (_FERMI, HalfInt(3), 1e-4), (_IND, HalfInt(-1), 1e-6)]
        cases = [(sg, s, _tol(cfg, t)) for sg, s, t in cases]
    Ls = tuple(cfg.L) if cfg.L else (0.05, 0.025, 0.0125)

    def job(args):
        sg, s, tol = args
        p = _params(sigma=sg, s=s, L=list(Ls))

        def run():
            fit = small_l_check(s, sg, Ls)
            return [_entry("smalll", p, fit.deviation, tol, coefficient=fit.coefficient, expected=fit.expected)]

        return _guard("smalll", p, tol, run)

    return [(job, c) for c in cases]


def _jobs_ratio(cfg):
    Ls = cfg.L or ([1.0] if cfg.quick else [0.5, 1.0, 2.0])
    ss = cfg.s or parse_s_values("1/2..11/2")
    tol = _tol(cfg, 1e-9)

    def job(args):
        sg, L, s = args
        p = _params(sigma=sg, L=L, s=s)
        return _guard("ratio", p, tol, lambda: [_entry("ratio", p, ratio_identity_residual(L, s, sg, cfg.eps), tol)])

    return [(job, (sg, L, s)) for sg in cfg.sigma_list([_IND, _FERMI]) for L in Ls for s in ss]


def _jobs_toeplitz(cfg):
    from .specfun import bessel_i

    Ls = cfg.L or ([0.5, 1.0] if cfg.quick else [0.5, 1.0, 2.0, 3.0])
    ss = cfg.s or parse_s_values("-1/2..21/2")
    tol = _tol(cfg, 1e-11)

    def job(args):
        L, s = args
        p = _params(sigma=_IND, L=L, s=s)

        def run():
            q = gap_probability(L, s, _IND, cfg.eps).q
            out = [_entry("toeplitz", p, abs(q - toeplitz_q(L, s)), tol)]
            closed = {-1: math.exp(-L * L), 1: math.exp(-L * L) * bessel_i(0, 2.0 * L)}
            if s.twice in closed:
                out.append(_entry("closed_form", p, abs(q - closed[s.twice]), _tol(cfg, 1e-10)))
            return out

        return _guard("toeplitz", p, tol, run)

    return [(job, (L, s)) for L in Ls for s in ss if s.twice >= -1]


def _jobs_mc(cfg):
    from .plancherel import estimate_many

    n = cfg.samples or (20_000 if cfg.quick else 100_000)
    if cfg.sigmas:
        cases = [(sg, L, tuple(cfg.s or parse_s_values("1/2,5/2"))) for sg in cfg.sigmas for L in (cfg.L or [2.0])]
    else:
        cases = [(_FERMI, 2.0, (HalfInt(1), HalfInt(5))), (_IND, 1.0, (HalfInt(-1), HalfInt(3)))]

    def job(args):
        sg, L, ss = args
        p = _params(sigma=sg, L=L, samples=n, seed=cfg.seed)

        def run():
            est = estimate_many(sg, L, ss, n, cfg.seed)
            out = []
            for s in ss:
                e = est[s.twice]
                ref = gap_probability(L, s, sg, cfg.eps).q
                bound = 3.0 * e.std_err
                out.append(_entry("mc", _params(sigma=sg, L=L, s=s, samples=n, seed=cfg.seed),
                                  abs(e.mean - ref), bound, abs(e.mean - ref) <= bound,
                                  mean=e.mean, std_err=e.std_err, fredholm=ref))
            return out

        return _guard("mc", p, 0.0, run)

    return [(job, c) for c in cases]


def _jobs_kdv(cfg):
    from .continuum import fermi_family, kdv_residual_diagnostic

    eps_list = (0.4, 0.3, 0.2)
    anchor_tol = 1e-6

    def job(_):
        p = _params(x=0.0, t=1.0, epsilons=list(eps_list))

        def run():
            rep = kdv_residual_diagnostic(0.0, 1.0, eps_list, fermi_family, eps=cfg.eps)
            out = [_entry("kdv.trend", p, abs(rep.residuals[-1]), abs(rep.residuals[0]), rep.decreasing,
                          residuals=list(rep.residuals), toda_gaps=list(rep.toda_gaps))]
            for e, a, pt, noisy in zip(rep.epsilons, rep.toda_anchor, rep.points, rep.noisy):
                out.append(_entry("kdv.toda_anchor", _params(epsilon=e, L=pt.L, s=pt.s), a, anchor_tol))
                if noisy:
                    out.append(_entry("kdv.rounding", _params(epsilon=e), math.nan, 0.0, False,
                                      diagnostic="rounding noise exceeds the difference signal"))
            return out

        return _guard("kdv", p, 0.0, run)

    return [(job, None)]


CHECKS = {
    "toda": _jobs_toda,
    "variational": _jobs_variational,
    "idpii": _jobs_idpii,
    "dpii": _jobs_dpii,
    "smalll": _jobs_smalll,
    "ratio": _jobs_ratio,
    "toeplitz": _jobs_toeplitz,
    "mc": _jobs_mc,
    "kdv": _jobs_kdv,
}


def _sort_key(entry: dict) -> tuple:
    return (entry["check"], json.dumps(entry["params"], sort_keys=True))


def cmd_verify(cfg: RunConfig) -> tuple[int, str]:
    """Run the named check (or ``all``) and return ``(exit code, report text)``."""
    names = sorted(CHECKS) if cfg.check == "all" else [cfg.check]
    if any(n not in CHECKS for n in names):
        raise ConfigError(f"unknown check {cfg.check!r}")
    jobs = [j for n in names for j in CHECKS[n](cfg)]
    entries = [e for batch in _pmap(lambda j: j[0](j[1]), jobs) for e in batch]
    entries.sort(key=_sort_key)
    n_fail = sum(not e["pass"] for e in entries)
    code = EXIT_OK if n_fail == 0 else EXIT_FAIL
    if cfg.fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["check", "params", "residual", "tolerance", "pass"])
        for e in entries:
            writer.writerow([e["check"], json.dumps(e["params"], sort_keys=True), repr(e["residual"]),
                             repr(e["tolerance"]), e["pass"]])
        return code, buf.getvalue()
    report = {
        "checks": entries,
        "summary": {"total": len(entries), "failed": n_fail, "all_pass": n_fail == 0},
    }
    return code, json.dumps(report, indent=1, sort_keys=True, allow_nan=True) + "\n"


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--sigma", help="indicator | zero | fermi[:u] | JSON object")
    p.add_argument("--u", type=float, help="fermi parameter u in (0, 1)")
    p.add_argument("--sigma-file", help="path to a JSON sigma description")
    p.add_argument("--L", help="comma-separated list of L values")
    p.add_argument("--s", help="half-integers: a..b (inclusive) or a comma list, e.g. -1/2..21/2")
    p.add_argument("--s-max", help="last s for the dPII recursion")
    p.add_argument("--h", type=float, help="finite-difference step in L")
    p.add_argument("--tol", type=float, help="override the tolerance of the selected check")
    p.add_argument("--eps", type=float, help=f"truncation target (default {DEFAULT_EPS:g})")
    p.add_argument("--samples", type=int, help="Monte Carlo sample count")
    p.add_argument("--seed", type=int, help="Monte Carlo master seed (default 12345)")
    p.add_argument("--out", help="write output here instead of stdout")
    p.add_argument("--format", choices=("csv", "json"), help="output format")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ftbessel", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    pc = sub.add_parser("compute", help="tabulate Q_sigma(L, s)")
    _add_common(pc)
    pv = sub.add_parser("verify", help="run numerical identity checks")
    pv.add_argument("check", choices=sorted(CHECKS) + ["all"])
    pv.add_argument("--quick", action="store_true", help="reduced grids")
    _add_common(pv)
    return parser


def _join_negative_values(argv: list[str]) -> list[str]:
    """Glue ``--s -1/2..3/2`` into ``--s=-1/2..3/2`` so argparse does not read it as a flag."""
    out: list[str] = []
    i = 0
    while i < len(argv):
        a = argv[i]
        if a in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-") and not argv[i + 1].startswith("--"):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = make_parser()
    try:
        args = parser.parse_args(_join_negative_values(argv))
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = build_config(args)
        if cfg.command == "compute":
            code, text = cmd_compute(cfg)
        else:
            code, text = cmd_verify(cfg)
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ParameterOutOfRange as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FtBesselError as exc:
        print(f"evaluation error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
