"""Command-line pipeline orchestration and report emission.

Subcommands: bound, det, certify, oracle, cover.  Reports are deterministic:
identical inputs give byte-identical JSON and text.  Exit codes: 0 success,
2 configuration or containment failure, 3 certification incomplete,
4 word budget exceeded.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

from . import apriori, certify, determinant, oracle
from .config import canonical_json, config_to_json, parse_config, system_to_json
from .errors import (
    BudgetExceededError,
    ConfigurationError,
    DivergentTailError,
    TransferOpError,
)
from .geometry import cover_efficiency
from .config import domain_to_json

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INCOMPLETE = 3
EXIT_BUDGET = 4

PER_N_ROWS = 20


def _thread_env() -> int:
    """Thread-count knob; the implementation is sequential, the value is
    validated and echoed so scripted callers can rely on the interface."""
    raw = os.environ.get("TRANSFEROP_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigurationError(f"TRANSFEROP_THREADS must be an integer: {raw!r}") from exc
    if n < 1:
        raise ConfigurationError("TRANSFEROP_THREADS must be >= 1")
    return n


def _fmt(x) -> str:
    if isinstance(x, complex):
        return f"{x.real!r}{'+' if x.imag >= 0 else '-'}{abs(x.imag)!r}j"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _emit(report: dict, text_lines, out_path) -> None:
    text = "\n".join(text_lines) + "\n"
    sys.stdout.write(text)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(canonical_json(report))


def _tilde_values(config, system):
    ts = config.param("tilde")
    if ts:
        return list(ts)
    lo = apriori.hull_scale_lower(system)
    if lo >= 1.0:
        raise ConfigurationError(
            "no admissible intermediate domain: branch images fill the domain"
        )
    return [lo + 0.5 * (1.0 - lo)]


def _bound_entry(system, t, granularity, quadrature) -> dict:
    pb = apriori.pipeline_class(system, t, granularity, quadrature)
    per_n = []
    for n in range(1, PER_N_ROWS + 1):
        per_n.append(
            {
                "n": n,
                "s_bound": pb.cls.singular_bound(n),
                "lambda_bound": pb.tail.bound(n),
            }
        )
    return {
        "t": t,
        "efficiency": pb.efficiency.as_dict(),
        "norm": pb.norm,
        "c": pb.cls.c,
        "gauge": pb.cls.gauge,
        "b": pb.tail.b,
        "B": pb.tail.B,
        "per_n": per_n,
    }


def cmd_bound(config, args) -> int:
    system = config.system
    ts = _tilde_values(config, system)
    entries = [
        _bound_entry(system, t, config.param("granularity"), config.param("quadrature"))
        for t in ts
    ]
    best = max(entries, key=lambda e: e["c"])
    report = dict(best)
    report["system"] = system_to_json(system)
    if len(entries) > 1:
        report["sweep"] = [
            {k: e[k] for k in ("t", "c", "gauge", "b", "B")} for e in entries
        ]
    lines = ["a priori bound report"]
    lines.append(f"{'t':>10} {'c':>22} {'gauge':>22} {'b':>22} {'B':>22}")
    for e in entries:
        lines.append(
            f"{_fmt(e['t']):>10} {_fmt(e['c']):>22} {_fmt(e['gauge']):>22} "
            f"{_fmt(e['b']):>22} {_fmt(e['B']):>22}"
        )
    lines.append("")
    lines.append(f"best t = {_fmt(best['t'])} (largest c)")
    lines.append(f"{'n':>4} {'s_bound':>22} {'lambda_bound':>22}")
    for row in best["per_n"]:
        lines.append(
            f"{row['n']:>4} {_fmt(row['s_bound']):>22} {_fmt(row['lambda_bound']):>22}"
        )
    _emit(report, lines, args.out)
    return EXIT_OK


def _expansion_for(config, system):
    order = config.param("order")
    budget = config.param("budget")
    n_br = system.n_branches
    if n_br**order > budget:
        raise BudgetExceededError(
            f"order {order} needs {n_br}^{order} words (> budget {budget}); "
            f"max feasible order is {determinant.max_feasible_order(n_br, budget)}",
            max_feasible=determinant.max_feasible_order(n_br, budget),
        )
    ts = _tilde_values(config, system)
    classes = [
        apriori.pipeline_class(
            system, t, config.param("granularity"), config.param("quadrature")
        )
        for t in ts
    ]
    best = max(classes, key=lambda pb: pb.cls.c)
    traces = [
        determinant.ruelle_trace(system, n, budget) for n in range(1, order + 1)
    ]
    return determinant.det_coefficients(traces, best.cls), best


def cmd_det(config, args) -> int:
    system = config.system
    expansion, pb = _expansion_for(config, system)
    report = {
        "order": expansion.order,
        "alpha": [[a.c.real, a.c.imag, a.r] for a in expansion.alphas],
        "traces": [
            [t.value.real, t.value.imag, t.error_radius] for t in expansion.traces
        ],
        "tail": {"c": expansion.source_class.c, "gauge": expansion.source_class.gauge},
        "t": pb.t,
        "system": system_to_json(system),
    }
    lines = ["determinant expansion report", f"order N = {expansion.order}"]
    lines.append(f"{'n':>4} {'trace a_n':>48} {'err':>12}")
    for t in expansion.traces:
        lines.append(f"{t.n:>4} {_fmt(t.value):>48} {t.error_radius:>12.3e}")
    lines.append(f"{'n':>4} {'alpha_n':>48} {'err':>12}")
    for n, a in enumerate(expansion.alphas, start=1):
        lines.append(f"{n:>4} {_fmt(a.c):>48} {a.r:>12.3e}")
    lines.append(
        f"tail class: c = {_fmt(expansion.source_class.c)}, "
        f"gauge = {_fmt(expansion.source_class.gauge)}"
    )
    _emit(report, lines, args.out)
    return EXIT_OK


def cmd_certify(config, args) -> int:
    system = config.system
    expansion, pb = _expansion_for(config, system)
    k = config.param("eigs")
    results = certify.certify_leading(expansion, k, system)
    report = {
        "order": expansion.order,
        "t": pb.t,
        "eigenvalues": [r.as_dict() for r in results],
        "system": system_to_json(system),
    }
    lines = ["eigenvalue certification report", f"order N = {expansion.order}, k = {k}"]
    lines.append(
        f"{'#':>3} {'eigenvalue center':>48} {'radius':>12} {'mult':>5} {'ok':>4}"
    )
    for i, r in enumerate(results, start=1):
        if r.eigenvalue_disk is not None:
            centre, radius = _fmt(r.eigenvalue_disk.c), f"{r.eigenvalue_disk.r:.3e}"
        else:
            centre, radius = "-", "-"
        lines.append(
            f"{i:>3} {centre:>48} {radius:>12} {r.multiplicity:>5} "
            f"{'yes' if r.certified else 'NO':>4}"
        )
        if not r.certified and r.failed_inequality is not None:
            lhs, rhs = r.failed_inequality
            lines.append(f"     failed inequality: lhs={lhs:.6e} rhs={rhs:.6e}")
    _emit(report, lines, args.out)
    if any(not r.certified for r in results):
        return EXIT_INCOMPLETE
    return EXIT_OK


def cmd_oracle(config, args) -> int:
    system = config.system
    M = config.param("basis")
    gm = oracle.galerkin_matrix(system, M)
    eigs = oracle.oracle_eigenvalues(gm)
    n_traces = min(config.param("order"), 10)
    traces = {str(n): oracle.oracle_traces(gm, n) for n in range(1, n_traces + 1)}
    report = {
        "basis": gm.size,
        "eigenvalues": [[z.real, z.imag] for z in eigs],
        "traces": {k: [v.real, v.imag] for k, v in sorted(traces.items())},
        "system": system_to_json(system),
    }
    lines = ["oracle report (non-rigorous)", f"basis size M = {gm.size}"]
    lines.append(f"{'#':>4} {'eigenvalue':>48} {'|lambda|':>22}")
    for i, z in enumerate(eigs[: min(len(eigs), 20)], start=1):
        lines.append(f"{i:>4} {_fmt(z):>48} {_fmt(abs(z)):>22}")
    lines.append(f"{'n':>4} {'tr(M^n)':>48}")
    for key in sorted(traces, key=int):
        lines.append(f"{key:>4} {_fmt(traces[key]):>48}")
    _emit(report, lines, args.out)
    return EXIT_OK


def cmd_cover(config, args) -> int:
    system = config.system
    ts = _tilde_values(config, system)
    t = ts[0]
    omega_tilde = apriori.tilde_domain(system, t)
    cover = apriori.auto_cover(
        system.domain, omega_tilde, config.param("granularity")
    )
    eff = cover_efficiency(cover)
    report = {
        "t": t,
        "efficiency": eff.as_dict(),
        "pieces": [
            {"domain": domain_to_json(p), "gamma": g} for p, g in cover.pieces
        ],
        "system": system_to_json(system),
    }
    lines = ["relative cover report", f"t = {_fmt(t)}, N = {eff.N}, d = {eff.d}"]
    lines.append(f"c = {_fmt(eff.c)}  min Gamma = {_fmt(eff.min_Gamma)}")
    lines.append(f"{'#':>4} {'gamma':>22} {'log gamma':>22}")
    for i, ((_, g), gn) in enumerate(zip(cover.pieces, eff.Gamma), start=1):
        lines.append(f"{i:>4} {_fmt(g):>22} {_fmt(gn):>22}")
    _emit(report, lines, args.out)
    return EXIT_OK


COMMANDS = {
    "bound": cmd_bound,
    "det": cmd_det,
    "certify": cmd_certify,
    "oracle": cmd_oracle,
    "cover": cmd_cover,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="transferop",
        description="Certified spectral bounds for holomorphic transfer operators.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("config", help="path to the JSON configuration")
        p.add_argument("--order", type=int, help="determinant order N")
        p.add_argument("--eigs", type=int, help="number of eigenvalues to certify")
        p.add_argument("--basis", type=int, help="oracle basis size M")
        p.add_argument(
            "--tilde", help="intermediate-domain scale(s) in (0,1), comma-separated"
        )
        p.add_argument("--granularity", type=int, help="cover grid granularity")
        p.add_argument(
            "--quadrature", action="store_true", help="refine the norm bound by quadrature"
        )
        p.add_argument("--budget", type=int, help="word enumeration budget")
        p.add_argument("--out", help="write the JSON report to this path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _thread_env()
        config = parse_config(args.config)
        for key in ("order", "eigs", "basis", "granularity", "budget"):
            value = getattr(args, key)
            if value is not None:
                if value < 0 or (value == 0 and key != "eigs"):
                    raise ConfigurationError(f"--{key} must be positive")
                config.params[key] = value
        if args.tilde is not None:
            ts = [float(x) for x in str(args.tilde).split(",") if x]
            if not ts or any(not 0.0 < t < 1.0 for t in ts):
                raise ConfigurationError("--tilde values must lie in (0, 1)")
            config.params["tilde"] = ts
        if args.quadrature:
            config.params["quadrature"] = True
        return COMMANDS[args.command](config, args)
    except BudgetExceededError as exc:
        sys.stderr.write(f"budget error: {exc}\n")
        return EXIT_BUDGET
    except DivergentTailError as exc:
        sys.stderr.write(f"certification error: {exc}\n")
        return EXIT_INCOMPLETE
    except TransferOpError as exc:
        sys.stderr.write(f"{type(exc).__name__.replace('Error', '')}: {exc}\n")
        return EXIT_CONFIG
    except ValueError as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
