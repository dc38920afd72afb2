"""Command line front end.

Subcommands: equilibrium, spectrum, continue, choreo, simulate. Every
subcommand accepts --config FILE with JSON values for its own flags;
values given explicitly on the command line win over the file.

Exit codes: 0 success, 2 usage, 3 degenerate geometry or missing
bifurcation, 4 convergence or escape failures, 5 collision.
"""

import argparse
import json
import sys
import warnings

import numpy as np

from .choreography import (
    sample_inertial,
    save_report,
    scan_branch_for_choreographies,
    write_inertial_csv,
)
from .continuation import (
    branch_seed,
    continue_branch,
    extrapolate_seed_frequency,
    load_branch,
    save_branch,
)
from .dynamics import SimState, integrate, ring_state
from .errors import (
    ChartEscape,
    ChartSingular,
    CollisionApproach,
    CollisionError,
    Degenerate,
    DegenerateAt,
    FrequencyMismatch,
    NoBifurcation,
    NoConvergence,
    NotCoprime,
    StepUnderflow,
)
from .ring import (
    gradient_V,
    hamiltonian_H,
    min_pair_distance,
    moment_G,
    ring_params,
    ring_positions,
)
from .spectral import critical_frequency, spectral_block, stability_verdict

FLOAT_FMT = "%.17g"


def _fmt(x):
    return FLOAT_FMT % float(x)


def _geometry_flags(sp):
    sp.add_argument("--n", type=int, help="number of vortices (>= 3)")
    sp.add_argument("--r", type=float, help="chart radius of the ring")
    sp.add_argument("--theta", type=float, help="polar angle of the ring")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="vortexsphere",
        description="Polygonal vortex rings on the sphere: equilibria, "
        "spectra, branch continuation, choreographies, simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub_map = {}

    eq = sub.add_parser("equilibrium", help="ring equilibrium data")
    _geometry_flags(eq)
    eq.add_argument("--config", help="JSON file with flag values")
    eq.set_defaults(func=cmd_equilibrium)
    sub_map["equilibrium"] = eq

    spec = sub.add_parser("spectrum", help="isotypic blocks and stability")
    _geometry_flags(spec)
    spec.add_argument("--l-max", type=int, default=64, help="resonance search bound")
    spec.add_argument("--config", help="JSON file with flag values")
    spec.set_defaults(func=cmd_spectrum)
    sub_map["spectrum"] = spec

    cont = sub.add_parser("continue", help="continue a branch from nu_k")
    _geometry_flags(cont)
    cont.add_argument("--k", type=int, help="symmetry class (1..n-1)")
    cont.add_argument("--steps", type=int, default=50)
    cont.add_argument("--ds", type=float, default=0.01)
    cont.add_argument("--eps", type=float, default=1e-3)
    cont.add_argument("--p", type=int, default=32, help="Fourier truncation")
    cont.add_argument("--tol", type=float, default=1e-10)
    cont.add_argument("--direction", choices=("pos", "neg", "both"), default="pos")
    cont.add_argument("--out", help="branch JSON path")
    cont.add_argument("--config", help="JSON file with flag values")
    cont.set_defaults(func=cmd_continue)
    sub_map["continue"] = cont

    cho = sub.add_parser("choreo", help="certify choreographies on a branch")
    cho.add_argument("--branch", help="branch JSON produced by continue")
    cho.add_argument("--denom-max", type=int, default=12)
    cho.add_argument("--out", help="report JSON path")
    cho.add_argument("--csv", help="prefix for inertial-curve CSV files")
    cho.add_argument("--config", help="JSON file with flag values")
    cho.set_defaults(func=cmd_choreo)
    sub_map["choreo"] = cho

    sim = sub.add_parser("simulate", help="integrate the dynamics")
    sim.add_argument("--preset", choices=("ring",), help="built-in initial state")
    sim.add_argument("--state", help="JSON file with an initial state")
    _geometry_flags(sim)
    sim.add_argument("--mode", choices=("chart", "sphere"))
    sim.add_argument("--t-end", type=float)
    sim.add_argument("--nu", type=float, default=1.0, help="chart time scaling")
    sim.add_argument("--perturb", type=float, default=0.0)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--n-out", type=int, default=201)
    sim.add_argument("--tol", type=float, default=1e-10)
    sim.add_argument("--out", help="trajectory CSV path")
    sim.add_argument("--config", help="JSON file with flag values")
    sim.set_defaults(func=cmd_simulate)
    sub_map["simulate"] = sim

    return parser, sub_map


def _apply_config(parser, sub_map, argv):
    """Load --config JSON (if any) as subparser defaults; flags still win."""
    command = next((a for a in argv if not a.startswith("-")), None)
    path = None
    for i, token in enumerate(argv):
        if token == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif token.startswith("--config="):
            path = token.split("=", 1)[1]
    if path is None:
        return
    if command not in sub_map:
        parser.error("--config requires a subcommand")
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        parser.error("cannot read config %s: %s" % (path, exc))
    if not isinstance(data, dict):
        parser.error("config must be a JSON object")
    sp = sub_map[command]
    valid = {a.dest for a in sp._actions} - {"help", "config", "func"}
    for key, value in data.items():
        dest = key.replace("-", "_")
        if dest not in valid:
            parser.error("unknown config key %r for %s" % (key, command))
        sp.set_defaults(**{dest: value})


def _params_from_args(args, parser):
    if args.n is None:
        parser.error("--n is required")
    n = int(args.n)
    if n < 3:
        parser.error("--n must be at least 3")
    given = (args.r is not None) + (args.theta is not None)
    if given != 1:
        parser.error("exactly one of --r / --theta is required")
    if args.r is not None:
        if args.r <= 0:
            parser.error("--r must be positive")
        return ring_params(n, r=float(args.r))
    if not 0.0 < args.theta < np.pi:
        parser.error("--theta must lie strictly between 0 and pi")
    return ring_params(n, theta=float(args.theta))


def cmd_equilibrium(args, parser):
    params = _params_from_args(args, parser)
    x = ring_positions(params)
    grad = gradient_V(x, params)
    print("n = %d" % params.n)
    print("r = " + _fmt(params.r))
    print("theta = " + _fmt(2.0 * np.arctan(1.0 / params.r)))
    print("zeta = " + _fmt(params.zeta))
    print("omega = " + _fmt(params.omega))
    for j in range(params.n):
        print("vortex %d: %s %s" % (j + 1, _fmt(x[j, 0]), _fmt(x[j, 1])))
    print("H = " + _fmt(hamiltonian_H(x)))
    print("G = " + _fmt(moment_G(x)))
    print("V = " + _fmt(params.omega * moment_G(x) + hamiltonian_H(x)))
    print("min_dist = " + _fmt(min_pair_distance(x)))
    print("grad_norm = " + _fmt(np.max(np.abs(grad))))
    return 0


def cmd_spectrum(args, parser):
    params = _params_from_args(args, parser)
    n, r = params.n, params.r
    s1 = params.s[0]
    print("n = %d, r = %s, omega = %s" % (n, _fmt(r), _fmt(params.omega)))
    for k in range(1, n):
        blk = spectral_block(k, params, l_max=int(args.l_max))
        sk = params.s[k - 1]
        radicand = sk * (2.0 * s1 - sk - 4.0 * s1 * r**2 / (1.0 + r**2) ** 2)
        if radicand > 1e-12:
            nu_str = _fmt(critical_frequency(k, params))
        elif radicand > -1e-12:
            nu_str = "0.0"
        else:
            nu_str = "-"
        b = np.real(np.diag(blk.B))
        line = "k=%d s_k=%s B=diag(%s, %s) margin=%s nu_k=%s" % (
            k,
            _fmt(blk.s_k),
            _fmt(b[0]),
            _fmt(b[1]),
            _fmt(blk.margin),
            nu_str,
        )
        if blk.morse_jump is not None:
            line += " morse_jump=%d" % blk.morse_jump
        if blk.resonances:
            line += " resonances=" + ",".join(
                "%d*nu_%d=nu_%d" % (l, k, j) for l, j in blk.resonances
            )
        print(line)
    report = stability_verdict(n, 2.0 * np.arctan(1.0 / r))
    if report.boundary:
        verdict = "boundary"
    elif report.stable:
        verdict = "stable"
    else:
        verdict = "unstable"
    line = "verdict: " + verdict
    if report.failing and not report.boundary:
        line += " (failing modes: %s)" % ",".join(str(k) for k in report.failing)
    print(line)
    return 0


def _suffixed(path, suffix):
    if path.endswith(".json"):
        return path[: -len(".json")] + suffix + ".json"
    return path + suffix


def cmd_continue(args, parser):
    params = _params_from_args(args, parser)
    if args.k is None:
        parser.error("--k is required")
    k = int(args.k)
    if not 1 <= k <= params.n - 1:
        parser.error("--k must lie in 1..n-1")
    if args.direction not in ("pos", "neg", "both"):
        parser.error("--direction must be pos, neg or both")
    out = args.out or "branch_n%d_k%d.json" % (params.n, k)
    if args.direction == "both":
        runs = [(1.0, _suffixed(out, "_pos")), (-1.0, _suffixed(out, "_neg"))]
    else:
        runs = [(1.0 if args.direction == "pos" else -1.0, out)]
    for sign, path in runs:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            seed = branch_seed(k, params, sign * float(args.eps), p=int(args.p))
        for w in caught:
            print("warning: %s" % w.message, file=sys.stderr)
        branch = continue_branch(
            seed, int(args.steps), ds=float(args.ds), tol=float(args.tol)
        )
        save_branch(branch, path)
        nus = [pt.nu for pt in branch.points]
        amps = [pt.amplitude for pt in branch.points]
        print("wrote %s" % path)
        print("points = %d" % len(branch.points))
        print("termination = %s" % branch.termination)
        print("nu_seed = " + _fmt(branch.nu_seed))
        print("nu_range = %s .. %s" % (_fmt(min(nus)), _fmt(max(nus))))
        print("amplitude_max = " + _fmt(max(amps)))
        if len(branch.points) >= 3:
            print("nu_extrapolated = " + _fmt(extrapolate_seed_frequency(branch)))
    return 0


def cmd_choreo(args, parser):
    if not args.branch:
        parser.error("--branch is required")
    branch = load_branch(args.branch)
    certs = scan_branch_for_choreographies(branch, denom_max=int(args.denom_max))
    for cert in certs:
        print(
            "ell=%d m=%d ell_star=%d k_tilde=%d nu=%s alignment=%s rotation=%s %s"
            % (
                cert.ell,
                cert.m,
                cert.ell_star,
                cert.k_tilde,
                _fmt(cert.nu),
                _fmt(cert.alignment_residual),
                _fmt(cert.rotation_residual),
                "accepted" if cert.accepted else "rejected",
            )
        )
    print("certified %d of %d candidates" % (
        sum(1 for c in certs if c.accepted), len(certs)))
    if args.out:
        save_report(args.out, args.branch, certs)
        print("wrote %s" % args.out)
    if args.csv:
        for cert in certs:
            if not (cert.accepted and cert.config is not None):
                continue
            t, q = sample_inertial(cert.config, cert.m)
            path = "%s_ell%d_m%d.csv" % (args.csv, cert.ell, cert.m)
            write_inertial_csv(path, t, q)
            print("wrote %s" % path)
    return 0


def _state_from_json(path, parser, mode_flag):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        parser.error("cannot read state %s: %s" % (path, exc))
    mode = data.get("mode", "chart")
    if mode_flag is not None and mode_flag != mode:
        parser.error("state file mode %r conflicts with --mode %s" % (mode, mode_flag))
    state = np.asarray(data["state"], dtype=float)
    if state.ndim != 2 or state.shape[1] != (3 if mode == "sphere" else 2):
        parser.error("state array has the wrong shape for mode %r" % mode)
    params = None
    if "n" in data and ("r" in data or "theta" in data):
        if "r" in data:
            params = ring_params(int(data["n"]), r=float(data["r"]))
        else:
            params = ring_params(int(data["n"]), theta=float(data["theta"]))
    if mode == "chart":
        if params is None:
            parser.error("chart-mode state file needs n and r (or theta)")
        if params.n != state.shape[0]:
            parser.error("state has %d rows but n = %d" % (state.shape[0], params.n))
    return SimState(mode=mode, state=state, t=float(data.get("t", 0.0)), params=params)


def cmd_simulate(args, parser):
    if (args.preset is None) == (args.state is None):
        parser.error("exactly one of --preset / --state is required")
    if args.preset == "ring":
        params = _params_from_args(args, parser)
        state = ring_state(params, mode=args.mode or "chart")
    else:
        state = _state_from_json(args.state, parser, args.mode)
    if args.t_end is None:
        parser.error("--t-end is required")
    if args.perturb:
        rng = np.random.default_rng(int(args.seed))
        noisy = state.state + float(args.perturb) * rng.standard_normal(
            state.state.shape
        )
        if state.mode == "sphere":
            noisy /= np.linalg.norm(noisy, axis=1, keepdims=True)
        state = SimState(mode=state.mode, state=noisy, t=state.t, params=state.params)
    traj = integrate(
        state,
        float(args.t_end),
        tol=float(args.tol),
        n_out=int(args.n_out),
        nu=float(args.nu),
    )
    labels = ("H", "G") if traj.mode == "chart" else ("H", "Mz")
    print("mode = %s" % traj.mode)
    print("t_end = " + _fmt(traj.t[-1]))
    print("%s_drift = %s" % (labels[0], _fmt(np.max(np.abs(traj.energy - traj.energy[0])))))
    print("%s_drift = %s" % (labels[1], _fmt(np.max(np.abs(traj.moment - traj.moment[0])))))
    if args.out:
        traj.write_csv(args.out)
        print("wrote %s" % args.out)
    return 0


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, sub_map = build_parser()
    _apply_config(parser, sub_map, argv)
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except (NoBifurcation, Degenerate, DegenerateAt, ChartSingular) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 3
    except (NoConvergence, StepUnderflow, FrequencyMismatch, ChartEscape) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 4
    except (CollisionError, CollisionApproach) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 5
    except NotCoprime as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
