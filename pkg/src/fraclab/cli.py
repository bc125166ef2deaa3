"""Command-line front end.

Subcommands: forward | ucp-scan | stability | certify, each driven by one
scenario config file.  Exit codes: 0 success, 2 configuration error,
3 runtime/solver error; error messages name the failing invariant class.
Outputs are plain CSV and key=value text, byte-reproducible for a fixed
config and seed (every file carries the config hash, never a timestamp).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import Scenario, build_scenario, load_config
from .errors import ConfigError, FraclabError
from .experiments import end_to_end, run_forward, run_ucp_scan, scan_radii
from .forward import export_measurement_csv
from .geometry import interval_mask
from .reconstruction import certify_bound, potential_sweep

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _fmt(x) -> str:
    return f"{x:.17g}" if isinstance(x, (int, float, np.floating)) else str(x)


def _header(sc_or_cfg) -> str:
    cfg = sc_or_cfg.config if isinstance(sc_or_cfg, Scenario) else sc_or_cfg
    return f"config_hash={cfg.content_hash} version={__version__}"


def _write_lines(path: Path, lines) -> None:
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_forward(sc: Scenario, out: Path) -> None:
    art = run_forward(sc)
    x = sc.spec.nodes()
    mask = interval_mask(sc.spec, sc.geom.omega) | interval_mask(sc.spec, sc.geom.w)
    rows = [f"# {_header(sc)}", "x,u"]
    rows += [f"{_fmt(xx)},{_fmt(vv)}"
             for xx, vv in zip(x[mask], art.solution.u.values[mask])]
    _write_lines(out / "u.csv", rows)
    export_measurement_csv(sc.geom, art.measurement, out / "measurement.csv",
                           header_comment=_header(sc))
    _write_lines(out / "apriori_report.txt",
                 [f"# {_header(sc)}"] + art.report_lines)


def _doubling_rows(report) -> list:
    rows = ["r,mass,ratio"]
    for r, m, d in zip(report.radii, report.masses, report.ratios):
        rows.append(f"{_fmt(r)},{_fmt(m)},{_fmt(d)}")
    rows.append(f"# summary: {{\"mode\": \"{report.mode}\", "
                f"\"beta_hat\": {_fmt(report.beta_hat)}, "
                f"\"c_hat\": {_fmt(report.c_hat)}, "
                f"\"fit_residual\": {_fmt(report.fit_residual)}, "
                f"\"r0\": {_fmt(report.r0)}}}")
    return rows


def cmd_ucp_scan(sc: Scenario, out: Path) -> None:
    art = run_ucp_scan(sc)
    _write_lines(out / "doubling_bulk.csv",
                 [f"# {_header(sc)}"] + _doubling_rows(art.bulk))
    _write_lines(out / "doubling_boundary.csv",
                 [f"# {_header(sc)}"] + _doubling_rows(art.boundary))
    rows = [f"# {_header(sc)}", "name,lhs,rhs_core,implied_constant"]
    rows += [f"{c.name},{_fmt(c.lhs)},{_fmt(c.rhs_core)},{_fmt(c.implied_constant)}"
             for c in art.checks]
    _write_lines(out / "lemma_checks.csv", rows)
    rows = [f"# {_header(sc)}", "r,psi,gap"]
    rows += [f"{_fmt(r)},{_fmt(p)},{_fmt(g)}" for r, p, g in art.carleman_rows]
    lo, hi = art.carleman_extrema
    rows.append(f"# summary: {{\"gap_min\": {_fmt(lo)}, \"gap_max\": {_fmt(hi)}}}")
    _write_lines(out / "carleman.csv", rows)


def cmd_stability(sc: Scenario, out: Path) -> None:
    cfg = sc.config
    mode = cfg.get("sweep.mode", "noise")
    if mode == "potential":
        ts = cfg.get("sweep.t_values")
        if not ts:
            raise ConfigError("potential sweep needs nonempty sweep.t_values")
        curve = potential_sweep(sc.geom, sc.spec, sc.op, sc.q1, sc.q2, sc.f, ts)
        report = None
    elif mode == "noise":
        eps = cfg.get("sweep.epsilons")
        if not eps:
            raise ConfigError("noise sweep needs nonempty sweep.epsilons")
        report = end_to_end(sc, epsilons=eps)
        curve = report.curve
    else:
        raise ConfigError(f"unknown sweep.mode {mode!r}")

    model = curve.model(curve.t_values)
    rows = [f"# {_header(sc)}", "t,error,model_value"]
    rows += [f"{_fmt(t)},{_fmt(e)},{_fmt(m)}"
             for t, e, m in zip(curve.t_values, curve.errors, model)]
    _write_lines(out / "curve.csv", rows)

    fit_lines = [f"# {_header(sc)}", f"mode={curve.mode}"]
    if curve.gamma_hat is None:
        fit_lines.append(f"fit_skipped={curve.note}")
    else:
        fit_lines += [f"gamma_hat={_fmt(curve.gamma_hat)}",
                      f"c_hat={_fmt(curve.c_hat)}",
                      f"fit_residual={_fmt(curve.fit_residual)}"]
    _write_lines(out / "fit.txt", fit_lines)

    cert_lines = [f"# {_header(sc)}"]
    if report is None:
        cert_lines.append("note=certificate requires sweep.mode = noise")
    elif report.certificate is None:
        cert_lines.append(f"note={report.note}")
    else:
        c = report.certificate
        cert_lines += [
            f"E={_fmt(c.holder_bound)}", f"alpha={_fmt(c.alpha)}",
            f"beta={_fmt(c.beta)}", f"c_low={_fmt(c.c_low)}",
            f"c_stab={_fmt(c.c_stab)}", f"mu={_fmt(c.mu)}",
            f"e_tilde={_fmt(c.e_tilde)}", f"epsilon={_fmt(c.epsilon)}",
            f"r_opt={_fmt(c.r_opt)}", f"bound={_fmt(c.bound)}",
            f"actual_sup_gap={_fmt(report.actual_sup_gap)}",
            f"certified_dominates={report.certified_dominates}",
            f"fudge={_fmt(report.fudge)}",
        ]
    _write_lines(out / "certificate.txt", cert_lines)


def cmd_certify(sc_cfg, out: Path) -> None:
    cfg = sc_cfg
    needed = ["cert.E", "cert.alpha", "cert.beta", "cert.c_low",
              "cert.c_stab", "cert.mu", "cert.e_tilde", "cert.epsilon",
              "cert.r0"]
    missing = [k for k in needed if cfg.get(k) is None]
    if missing:
        raise ConfigError(f"certify needs keys: {', '.join(missing)}")
    cert = certify_bound(
        holder_bound=cfg["cert.E"], alpha=cfg["cert.alpha"],
        beta=cfg["cert.beta"], c_low=cfg["cert.c_low"],
        c_stab=cfg["cert.c_stab"], mu=cfg["cert.mu"],
        e_tilde=cfg["cert.e_tilde"], epsilon=cfg["cert.epsilon"],
        r0=cfg["cert.r0"])
    _write_lines(out / "certificate.txt", [
        f"# {_header(cfg)}",
        f"E={_fmt(cert.holder_bound)}", f"alpha={_fmt(cert.alpha)}",
        f"beta={_fmt(cert.beta)}", f"c_low={_fmt(cert.c_low)}",
        f"c_stab={_fmt(cert.c_stab)}", f"mu={_fmt(cert.mu)}",
        f"e_tilde={_fmt(cert.e_tilde)}", f"epsilon={_fmt(cert.epsilon)}",
        f"r_opt={_fmt(cert.r_opt)}", f"bound={_fmt(cert.bound)}",
    ])


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fraclab",
        description="scenario-driven experiments for the nonlocal "
                    "inverse-potential laboratory")
    parser.add_argument("command",
                        choices=["forward", "ucp-scan", "stability", "certify"])
    parser.add_argument("--config", required=True, metavar="PATH")
    parser.add_argument("--out", default=".", metavar="DIR")
    parser.add_argument("--seed", type=int, default=None, metavar="N")
    parser.add_argument("--resolution", type=int, default=1, metavar="MULT")
    args = parser.parse_args(argv)

    out = Path(args.out)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            entries = dict(cfg.entries)
            entries["seed"] = args.seed
            entries["noise.seed"] = args.seed
            cfg = type(cfg)(entries=entries,
                            text=cfg.text + f"\n# seed override = {args.seed}\n")
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "certify":
            cmd_certify(cfg, out)
            return EXIT_OK
        sc = build_scenario(cfg, resolution_multiplier=args.resolution)
    except FraclabError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"ConfigError: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.command == "forward":
            cmd_forward(sc, out)
        elif args.command == "ucp-scan":
            _ = scan_radii(sc)   # surface missing scan keys as config errors
            cmd_ucp_scan(sc, out)
        elif args.command == "stability":
            cmd_stability(sc, out)
        return EXIT_OK
    except ConfigError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FraclabError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
