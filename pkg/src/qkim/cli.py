"""Command-line front end: every computation as a reproducible batch job.

Each subcommand resolves its arguments into a JobSpec, runs, and writes CSV or
JSON outputs plus a .params.json sidecar carrying the resolved parameter set.
Outputs are deterministic: fixed iteration orders, repr floats, no wall-clock
data. Exit codes: 0 ok, 1 domain or numerical error (machine-readable JSON on
stderr), 2 usage error.
"""

import argparse
import json
import math
import sys
import warnings
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from . import mps as mps_mod
from .classical import save_vector_csv
from .hamiltonians import build_h_tau, f_table, heisenberg_split
from .model import ModelParams, SpinConfig, config_from_string, params_from_json, params_to_json
from .quantum import (
    ghz_density,
    maximally_mixed,
    plus_product_density,
    sector_report,
    sector_report_to_csv,
    thermal_density,
)
from .rates import check_detailed_balance, glauber_rate
from .spectra import eigvalsh, positivity_sweep, save_spectrum_csv, spectral_report, sweep_to_csv

COMMANDS = (
    "dbc-check",
    "spectrum",
    "gap-scan",
    "positivity-sweep",
    "lindblad-evolve",
    "stationary-states",
    "entropy-profile",
    "heisenberg-split",
)

TAU_SELECTORS = ("all", "homogeneous", "two-flips", "domain-wall")


@dataclass(frozen=True)
class JobSpec:
    """Fully resolved description of one batch job."""

    command: str
    params: ModelParams
    tau_selector: Optional[str] = None
    tau_bits: Optional[int] = None
    output: Optional[str] = None
    format: str = "csv"
    options: Tuple[Tuple[str, object], ...] = ()

    def option(self, key, default=None):
        for k, v in self.options:
            if k == key:
                return v
        return default


def jobspec_to_json(job):
    payload = {
        "command": job.command,
        "params": json.loads(params_to_json(job.params)),
        "tau_selector": job.tau_selector,
        "tau_bits": job.tau_bits,
        "output": job.output,
        "format": job.format,
        "options": {k: v for k, v in job.options},
    }
    return json.dumps(payload, sort_keys=True)


def jobspec_from_json(text):
    payload = json.loads(text)
    params = params_from_json(json.dumps(payload["params"]))
    options = tuple(sorted(payload["options"].items()))
    return JobSpec(
        command=payload["command"],
        params=params,
        tau_selector=payload["tau_selector"],
        tau_bits=payload["tau_bits"],
        output=payload["output"],
        format=payload["format"],
        options=options,
    )


def resolve_delta(raw, gamma):
    """Parse a delta argument: a float or the name of the gamma-locked coupling."""
    if isinstance(raw, float):
        return raw
    text = str(raw).strip()
    if text == "haake-thol":
        return gamma / (2.0 - gamma)
    try:
        return float(text)
    except ValueError:
        raise ValueError("delta must be a number or 'haake-thol', got %r" % raw)


def resolve_tau(selector, n_sites):
    """Map a tau selector to sector bits.

    Accepts 'homogeneous', 'two-flips' (flips at N/4 and 3N/4), 'domain-wall'
    (second half flipped), a '+-' pattern, or an integer bit pattern.
    """
    text = str(selector).strip()
    if text == "homogeneous":
        return 0
    if text == "two-flips":
        return (1 << (n_sites // 4)) | (1 << (3 * n_sites // 4))
    if text == "domain-wall":
        return sum(1 << i for i in range(n_sites // 2, n_sites))
    if text and all(ch in "+-−" for ch in text):
        cfg = config_from_string(text)
        if cfg.n_sites != n_sites:
            raise ValueError("tau pattern length %d does not match n %d" % (cfg.n_sites, n_sites))
        return cfg.bits
    try:
        bits = int(text, 0)
    except ValueError:
        raise ValueError("unknown tau selector %r" % selector)
    if not 0 <= bits < (1 << n_sites):
        raise ValueError("tau bits %d out of range for n=%d" % (bits, n_sites))
    return bits


def _parse_float_list(text):
    values = [float(tok) for tok in str(text).split(",") if tok.strip() != ""]
    if not values:
        raise ValueError("empty value list")
    return values


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qkim",
        description="Kinetic Ising chain laboratory: rates, sector spectra, quantum dynamics, entropy profiles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, tau_default=None, needs_gamma=True):
        p.add_argument("--n", type=int, required=True, help="number of sites")
        if needs_gamma:
            p.add_argument("--gamma", type=float, required=True, help="equilibrium coupling tanh(2 beta J)")
            p.add_argument("--delta", default="0", help="rate asymmetry, a float or 'haake-thol'")
        p.add_argument("--Gamma", type=float, default=1.0, help="attempt rate scale")
        p.add_argument("--J", type=float, default=1.0, help="Ising coupling")
        p.add_argument("--output", default=None, help="output file (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        if tau_default is not None:
            p.add_argument("--tau", default=tau_default, help="sector: bits, '+-' pattern, or selector name")

    p = sub.add_parser("dbc-check", help="verify detailed balance of the Glauber rates")
    common(p)
    p.add_argument("--tol", type=float, default=1e-12)

    p = sub.add_parser("spectrum", help="eigenvalues of one sector Hamiltonian")
    common(p, tau_default="0")

    p = sub.add_parser("gap-scan", help="sector gap across a list of gamma values")
    common(p, tau_default="0")
    p.add_argument("--gammas", required=True, help="comma-separated gamma values")

    p = sub.add_parser("positivity-sweep", help="minimum eigenvalue over a (gamma, delta, tau) grid")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--gammas", required=True, help="comma-separated gamma values")
    p.add_argument("--deltas", required=True, help="comma-separated delta values")
    p.add_argument("--taus", default="all", help="'all' or comma-separated sector bits")
    p.add_argument("--Gamma", type=float, default=1.0)
    p.add_argument("--J", type=float, default=1.0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--output", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("lindblad-evolve", help="evolve a density matrix and report sector norms")
    common(p)
    p.add_argument("--t", type=float, default=1.0, help="evolution time")
    p.add_argument(
        "--initial",
        choices=("ghz", "plus", "thermal", "mixed"),
        default="ghz",
        help="initial density matrix",
    )
    p.add_argument("--mix", type=float, default=0.0, help="admixture of the maximally mixed state")

    p = sub.add_parser("stationary-states", help="kernel dimension and gap of every sector")
    common(p)

    p = sub.add_parser("entropy-profile", help="TEBD ground-state entropy profile of one sector")
    common(p, tau_default="homogeneous")
    p.add_argument("--chi", type=int, default=64, help="bond dimension cap")
    p.add_argument("--cutoff", type=float, default=1e-12, help="relative singular value cutoff")
    p.add_argument("--sweeps", type=int, default=200, help="sweep budget per dt stage")

    p = sub.add_parser("heisenberg-split", help="commuting-block decomposition of a sector at delta=-1")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--tau", required=True)
    p.add_argument("--output", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="json")

    return parser


def jobspec_from_args(args):
    needs_gamma = args.command not in ("positivity-sweep", "heisenberg-split")
    options = []
    if needs_gamma:
        delta = resolve_delta(args.delta, args.gamma)
        params = ModelParams.from_gamma(
            n_sites=args.n, gamma=args.gamma, delta=delta, Gamma=args.Gamma, J=args.J
        )
        if isinstance(args.delta, str) and args.delta.strip() == "haake-thol":
            options.append(("delta_rule", "haake-thol"))
    else:
        gamma = 0.0
        delta = 0.0
        big_g = getattr(args, "Gamma", 1.0)
        jay = getattr(args, "J", 1.0)
        params = ModelParams.from_gamma(n_sites=args.n, gamma=gamma, delta=delta, Gamma=big_g, J=jay)
    tau_selector = getattr(args, "tau", None)
    tau_bits = None
    if tau_selector is not None and args.command != "positivity-sweep":
        tau_bits = resolve_tau(tau_selector, args.n)
    for key in ("tol", "t", "initial", "mix", "chi", "cutoff", "sweeps", "jobs", "gammas", "deltas", "taus"):
        if hasattr(args, key):
            options.append((key, getattr(args, key)))
    return JobSpec(
        command=args.command,
        params=params,
        tau_selector=None if tau_selector is None else str(tau_selector),
        tau_bits=tau_bits,
        output=args.output,
        format=getattr(args, "format", "csv"),
        options=tuple(sorted(options)),
    )


def _emit_rows(job, columns, rows, writer_csv):
    """Write tabular output per the job's format, to its file or stdout."""
    if job.format == "json":
        payload = json.dumps(
            {"columns": list(columns), "rows": [list(r) for r in rows]}, sort_keys=True
        )
        if job.output:
            with open(job.output, "w") as fh:
                fh.write(payload + "\n")
        else:
            print(payload)
    elif job.output:
        writer_csv(job.output)
    else:
        sys.stdout.write(",".join(columns) + "\n")
        for row in rows:
            sys.stdout.write(",".join(str(x) for x in row) + "\n")
    _write_sidecar(job)


def _write_sidecar(job):
    if job.output:
        with open(job.output + ".params.json", "w") as fh:
            fh.write(jobspec_to_json(job) + "\n")


def _tau_config(job):
    return SpinConfig(job.tau_bits, job.params.n_sites)


def run_dbc_check(job):
    report = check_detailed_balance(glauber_rate, job.params, tol=job.option("tol", 1e-12))
    payload = json.dumps(
        {
            "command": job.command,
            "holds": bool(report.holds),
            "max_violation": repr(float(report.max_violation)),
            "params": json.loads(params_to_json(job.params)),
        },
        sort_keys=True,
    )
    if job.output:
        with open(job.output, "w") as fh:
            fh.write(payload + "\n")
    print(payload)
    _write_sidecar(job)
    return 0


def run_spectrum(job):
    vals = eigvalsh(build_h_tau(_tau_config(job), job.params))
    rows = [(i, repr(float(v))) for i, v in enumerate(vals)]
    _emit_rows(job, ("index", "value"), rows, lambda path: save_spectrum_csv(path, vals))
    return 0


def run_gap_scan(job):
    gammas = _parse_float_list(job.option("gammas"))
    report_rows = []
    for g in gammas:
        if job.option("delta_rule") == "haake-thol":
            delta = g / (2.0 - g)
        else:
            delta = job.params.delta
        params = ModelParams.from_gamma(
            n_sites=job.params.n_sites, gamma=g, delta=delta, Gamma=job.params.Gamma, J=job.params.J
        )
        rep = spectral_report(build_h_tau(SpinConfig(job.tau_bits, params.n_sites), params))
        report_rows.append((g, delta, job.tau_bits, rep.kernel_dimension, rep.gap))

    def write_csv(path):
        with open(path, "w") as fh:
            fh.write("gamma,delta,tau_bits,kernel_dim,gap\n")
            for g, d, tb, kd, gap in report_rows:
                fh.write("%s,%s,%d,%d,%s\n" % (repr(g), repr(d), tb, kd, repr(gap)))

    rows = [(repr(g), repr(d), tb, kd, repr(gap)) for g, d, tb, kd, gap in report_rows]
    _emit_rows(job, ("gamma", "delta", "tau_bits", "kernel_dim", "gap"), rows, write_csv)
    return 0


def run_positivity_sweep(job):
    gammas = _parse_float_list(job.option("gammas"))
    deltas = _parse_float_list(job.option("deltas"))
    taus_opt = str(job.option("taus", "all"))
    taus = None if taus_opt == "all" else [int(tok, 0) for tok in taus_opt.split(",")]
    rows = positivity_sweep(
        job.params.n_sites,
        gammas,
        deltas,
        taus=taus,
        Gamma=job.params.Gamma,
        J=job.params.J,
        jobs=int(job.option("jobs", 1)),
    )
    out_rows = [
        (repr(r.gamma), repr(r.delta), r.tau_bits, repr(r.min_eig), r.kernel_dim, repr(r.gap))
        for r in rows
    ]
    _emit_rows(
        job,
        ("gamma", "delta", "tau_bits", "min_eig", "kernel_dim", "gap"),
        out_rows,
        lambda path: sweep_to_csv(path, rows),
    )
    return 0


def run_lindblad_evolve(job):
    n = job.params.n_sites
    initial = str(job.option("initial", "ghz"))
    if initial == "ghz":
        rho0 = ghz_density(n)
    elif initial == "plus":
        rho0 = plus_product_density(n)
    elif initial == "thermal":
        rho0 = thermal_density(job.params)
    else:
        rho0 = maximally_mixed(n)
    mix = float(job.option("mix", 0.0))
    if not 0.0 <= mix <= 1.0:
        raise ValueError("mix must lie in [0, 1]")
    if mix > 0.0:
        rho0 = (1.0 - mix) * rho0 + mix * maximally_mixed(n)
    rows = sector_report(rho0, job.params, float(job.option("t", 1.0)))
    out_rows = [
        (r.tau_bits, repr(r.min_eigenvalue), repr(r.sector_norm_initial), repr(r.sector_norm_final))
        for r in rows
    ]
    _emit_rows(
        job,
        ("tau_bits", "min_eigenvalue", "sector_norm_initial", "sector_norm_final"),
        out_rows,
        lambda path: sector_report_to_csv(path, rows),
    )
    return 0


def run_stationary_states(job):
    n = job.params.n_sites
    report_rows = []
    for tau_bits in range(1 << n):
        rep = spectral_report(build_h_tau(SpinConfig(tau_bits, n), job.params))
        report_rows.append((tau_bits, rep.kernel_dimension, rep.min_eigenvalue, rep.gap))

    def write_csv(path):
        with open(path, "w") as fh:
            fh.write("tau_bits,kernel_dim,min_eigenvalue,gap\n")
            for tb, kd, mn, gap in report_rows:
                fh.write("%d,%d,%s,%s\n" % (tb, kd, repr(mn), repr(gap)))

    rows = [(tb, kd, repr(mn), repr(gap)) for tb, kd, mn, gap in report_rows]
    _emit_rows(job, ("tau_bits", "kernel_dim", "min_eigenvalue", "gap"), rows, write_csv)
    return 0


def run_entropy_profile(job):
    tau = _tau_config(job)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        result = mps_mod.imaginary_time_ground_state(
            tau,
            job.params,
            chi_max=int(job.option("chi", 64)),
            cutoff=float(job.option("cutoff", 1e-12)),
            sweeps_per_stage=int(job.option("sweeps", 200)),
        )
    entropies = mps_mod.entropy_profile(result.state)
    rows = [(b + 1, repr(float(s))) for b, s in enumerate(entropies)]
    _emit_rows(job, ("L", "S"), rows, lambda path: mps_mod.save_entropy_csv(path, entropies))
    if job.output:
        meta = {
            "energy": repr(float(result.energy)),
            "converged": bool(result.converged),
            "max_bond_dimension": max(result.state.bond_dimensions()),
        }
        with open(job.output + ".run.json", "w") as fh:
            fh.write(json.dumps(meta, sort_keys=True) + "\n")
    return 0


def run_heisenberg_split(job):
    tau = _tau_config(job)
    split = heisenberg_split(tau)
    payload = json.dumps(
        {
            "tau_bits": job.tau_bits,
            "f": [int(v) for v in f_table(tau)],
            "blocks": [list(map(int, b)) for b in split.blocks],
            "isolated_sites": [int(i) for i in split.isolated_sites],
        },
        sort_keys=True,
    )
    if job.output:
        with open(job.output, "w") as fh:
            fh.write(payload + "\n")
        _write_sidecar(job)
    else:
        print(payload)
    return 0


RUNNERS = {
    "dbc-check": run_dbc_check,
    "spectrum": run_spectrum,
    "gap-scan": run_gap_scan,
    "positivity-sweep": run_positivity_sweep,
    "lindblad-evolve": run_lindblad_evolve,
    "stationary-states": run_stationary_states,
    "entropy-profile": run_entropy_profile,
    "heisenberg-split": run_heisenberg_split,
}


def run(job):
    return RUNNERS[job.command](job)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        job = jobspec_from_args(args)
        return run(job)
    except (ValueError, OSError, RuntimeError) as exc:
        error = {
            "code": 1,
            "message": str(exc),
            "context": {"command": args.command},
        }
        sys.stderr.write(json.dumps(error, sort_keys=True) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
