import argparse
import logging
import os
import sys

from ShatterLab import __version__
from ShatterLab.config import parse_campaign
from ShatterLab.diagnostic_agent import Diagnostic_Agent
from ShatterLab.errors import DomainError, InputError, ShatterLabError
from ShatterLab.experiment_agent import Experiment_Agent
from ShatterLab.family_agent import Family_Agent, FamilyKind, MatrixFamily
from ShatterLab.io_agent import IO_Agent, environment_stamp, schema_tag
from ShatterLab.matrix_agent import as_dense
from ShatterLab.noise_agent import NoiseSpec, Noise_Agent
from ShatterLab.specr_agent import SpecrConfig, Specr_Agent

logger = logging.getLogger("ShatterLab")


def parse_complex(text):
    """Accepts "re,im" or a literal such as "1+2j"."""
    if isinstance(text, (int, float, complex)):
        return complex(text)
    if isinstance(text, (list, tuple)) and len(text) == 2:
        return complex(float(text[0]), float(text[1]))
    text = str(text).strip()
    try:
        if "," in text:
            re_part, im_part = text.split(",")
            return complex(float(re_part), float(im_part))
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise InputError(f"Cannot read complex number {text!r}; use 're,im' or '1+2j'.") from None


def show(message):
    print(f"[ShatterLab] {message}")


def finish(command, config, outputs, seed=None):
    for path in outputs:
        IO_Agent.write_manifest(path, command, config, outputs, seed)
        show(f"wrote {path}")
    return outputs


# =============================================================================
# commands: each takes the JSON-ready config recorded in its manifests
# =============================================================================

def run_perturb(config):
    M = IO_Agent.read_matrix(config["input"])
    spec = NoiseSpec(n=M.shape[0], rho=config["rho"], scale=config["scale"], seed=config["seed"], trial=config["trial"])
    A = Noise_Agent.perturb(M, spec)
    IO_Agent.write_matrix(config["out"], A, layout=config["layout"])
    show(f"perturbed n={spec.n} rho={spec.rho} scale={spec.scale}: nnz {M.nnz} -> {A.nnz}")
    return finish("perturb", config, [config["out"]], spec.seed)


def run_diagnose(config):
    A = IO_Agent.read_matrix(config["input"])
    report = Diagnostic_Agent.spectral_report(A, threshold=config["threshold"])
    out = config["out"]
    if config["format"] == "csv":
        frame = IO_Agent.report_to_frame(report)
        if out is None:
            frame.to_csv(sys.stdout, index=False)
            return []
        IO_Agent.write_csv(out, frame)
    else:
        payload = {"schema": schema_tag("report"), **report.to_dict()}
        if out is None:
            print(IO_Agent.dumps(payload), end="")
            return []
        IO_Agent.write_json(out, payload)
    show(f"n={report.n} eta={report.eta:.6g} kappa_V in [{report.kappa_v_lower:.6g}, {report.kappa_v_upper:.6g}] defective={report.defective}")
    return finish("diagnose", config, [out])


def run_pseudospectrum(config):
    A = as_dense(IO_Agent.read_matrix(config["input"]))
    center = parse_complex(config["center"])
    grid = Diagnostic_Agent.pseudospectrum_grid(
        A, eps_levels=config["eps"], center=center, radius=config["radius"], resolution=config["res"],
    )
    outputs = [IO_Agent.write_csv(config["out"], IO_Agent.grid_to_frame(grid))]

    area = None
    if config["area"] is not None:
        area = Diagnostic_Agent.pseudospectral_area(A, config["area"], center=center, radius=config["radius"], method=config["method"])
        show(f"area of Lambda_eps at eps={config['area']}: {area.area:.6g} +- {area.error_bound:.3g} ({area.method})")

    if config["json"]:
        payload = IO_Agent.grid_to_dict(grid)
        if area is not None:
            payload["area"] = {"eps": config["area"], "area": area.area, "error_bound": area.error_bound, "method": area.method}
        outputs.append(IO_Agent.write_json(os.path.splitext(config["out"])[0] + ".json", payload))
    return finish("pseudospectrum", config, outputs)


def run_specr(config):
    M = IO_Agent.read_matrix(config["input"])
    cfg = SpecrConfig(
        rho=config["rho"], eps=config["eps"], delta=config["delta"], seed=config["seed"], k_override=config["k"],
        trial=config["trial"],
    )
    outcome = Specr_Agent.specr_estimate(M, cfg, with_oracle=config["with_oracle"])
    payload = {"schema": schema_tag("specr"), "config": config, **outcome.to_dict()}
    show(f"specr estimate {outcome.estimate:.10g} with k={outcome.k_used}, ||E||={outcome.perturbation_norm:.3g}")
    if outcome.oracle_spr is not None:
        show(f"dense oracle spr {outcome.oracle_spr:.10g}, relative error {outcome.relative_error:.3g}")
    if config["out"] is None:
        print(IO_Agent.dumps(payload), end="")
        return []
    IO_Agent.write_json(config["out"], payload)
    return finish("specr", config, [config["out"]], cfg.seed)


def run_experiment(config):
    cfg = parse_campaign(config["campaign"])
    plan = Experiment_Agent.plan(cfg)
    if config.get("dry_run"):
        show(f"{cfg.campaign} campaign: {plan['trials']} trials, about {plan['matvecs']} matvecs (nothing run)")
        return []

    show(f"running {cfg.campaign} campaign: {plan['trials']} trials")
    result = Experiment_Agent.run(cfg)
    stem = config["out"]
    csv_path = IO_Agent.write_csv(stem + ".csv", result.rows())
    json_path = IO_Agent.write_json(stem + ".json", {
        "schema": schema_tag(cfg.campaign),
        "config": cfg.to_dict(),
        "result": result.summary(),
        "environment": environment_stamp(),
    })
    return finish("experiment", config, [csv_path, json_path], getattr(cfg, "seed", 0))


def run_family(config):
    family = MatrixFamily(
        kind=FamilyKind(config["kind"]), n=config["n"], norm_target=config["norm_target"],
        spread=config["spread"], path=config["path"], seed=config["seed"],
    )
    M = Family_Agent.build(family)
    IO_Agent.write_matrix(config["out"], M, layout=config["layout"])
    return finish("family", config, [config["out"]], family.seed)


def run_replay(config):
    manifest = IO_Agent.read_manifest(config["manifest"])
    if manifest.command not in COMMANDS:
        raise InputError(f"Manifest names unknown command {manifest.command!r}.", pointer="/command")
    show(f"replaying {manifest.command} recorded by version {manifest.tool_version} at {manifest.timestamp}")
    return COMMANDS[manifest.command](manifest.config)


COMMANDS = {
    "perturb": run_perturb,
    "diagnose": run_diagnose,
    "pseudospectrum": run_pseudospectrum,
    "specr": run_specr,
    "experiment": run_experiment,
    "family": run_family,
}


# =============================================================================
# argparse front door
# =============================================================================

def config_from_args(args):
    if args.command == "perturb":
        return {"input": args.input, "rho": args.rho, "scale": args.scale, "seed": args.seed, "trial": args.trial,
                "out": args.out, "layout": args.layout}
    if args.command == "diagnose":
        return {"input": args.input, "format": args.format, "out": args.out, "threshold": args.threshold}
    if args.command == "pseudospectrum":
        center = parse_complex(args.center)
        return {"input": args.input, "eps": args.eps, "center": [center.real, center.imag], "radius": args.radius,
                "res": args.res, "out": args.out, "json": args.json, "area": args.area, "method": args.method}
    if args.command == "specr":
        return {"input": args.input, "rho": args.rho, "eps": args.eps, "delta": args.delta, "seed": args.seed,
                "trial": args.trial, "k": args.k, "with_oracle": args.with_oracle, "out": args.out}
    if args.command == "experiment":
        campaign = IO_Agent.read_json(args.config)
        out = args.out or os.path.join("results", os.path.splitext(os.path.basename(args.config))[0])
        return {"campaign": campaign, "out": out, "dry_run": args.dry_run}
    if args.command == "family":
        return {"kind": args.kind, "n": args.n, "norm_target": args.norm_target, "spread": args.spread,
                "path": args.path, "seed": args.seed, "out": args.out, "layout": args.layout}
    if args.command == "replay":
        return {"manifest": args.manifest}
    raise InputError(f"Unknown command {args.command!r}.")


def build_parser():
    parser = argparse.ArgumentParser(prog="main.py", description="Sparse random perturbations and pseudospectral shattering.")
    parser.add_argument("--version", action="version", version=f"ShatterLab {__version__}")
    parser.add_argument("--verbose", action="store_true", help="log per-trial detail")
    parser.add_argument("--quiet", action="store_true", help="only log warnings and errors")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("perturb", help="write M + scale * N_g for a Matrix Market input")
    p.add_argument("input", type=str)
    p.add_argument("--rho", type=float, required=True, help="Bernoulli sparsity, 0 < rho <= 1")
    p.add_argument("--scale", type=float, default=1.0, help="noise multiplier delta > 0")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--out", type=str, required=True)
    p.add_argument("--layout", type=str, default="coordinate", choices=["coordinate", "array"])

    p = sub.add_parser("diagnose", help="eigenvalue conditioning, gap and smallest singular values")
    p.add_argument("input", type=str)
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="format", action="store_const", const="json")
    fmt.add_argument("--csv", dest="format", action="store_const", const="csv")
    p.set_defaults(format="json")
    p.add_argument("--out", type=str, default=None, help="output file; stdout when omitted")
    p.add_argument("--threshold", type=float, default=1e-13, help="|w* v| below this is treated as defective")

    p = sub.add_parser("pseudospectrum", help="sigma_min(zI - A) on a square grid")
    p.add_argument("input", type=str)
    p.add_argument("--eps", type=float, nargs="*", default=[], help="eps levels recorded with the grid")
    p.add_argument("--center", type=str, default="0,0", help="'re,im' or '1+2j'")
    p.add_argument("--radius", type=float, default=None, help="defaults to ||A|| + max eps + |center|")
    p.add_argument("--res", "--resolution", dest="res", type=int, default=100, help="nodes per axis")
    p.add_argument("--out", type=str, required=True, help="CSV of (re, im, sigma_min)")
    p.add_argument("--json", action="store_true", help="also write the grid as JSON next to --out")
    p.add_argument("--area", type=float, default=None, metavar="EPS", help="also report the area of Lambda_EPS")
    p.add_argument("--method", type=str, default="grid", choices=["grid", "windows"])

    p = sub.add_parser("specr", help="spectral radius of M + (delta/n) N via k matvecs")
    p.add_argument("input", type=str)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--eps", type=float, required=True, help="relative accuracy, 0 < eps < 1")
    p.add_argument("--delta", type=float, required=True, help="backward error budget, 0 < delta < 1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--k", type=int, default=None, help="override the number of matvecs")
    p.add_argument("--with_oracle", "--with-oracle", dest="with_oracle", action="store_true",
                   help="also dense-solve the realized matrix for its spectral radius")
    p.add_argument("--out", type=str, default=None)

    p = sub.add_parser("experiment", help="run a campaign described by a JSON config")
    p.add_argument("config", type=str)
    p.add_argument("--out", type=str, default=None, help="output stem; <stem>.csv and <stem>.json are written")
    p.add_argument("--dry_run", "--dry-run", dest="dry_run", action="store_true")

    p = sub.add_parser("family", help="write a test matrix M")
    p.add_argument("--kind", type=str, required=True, choices=[kind.value for kind in FamilyKind])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--norm_target", "--norm-target", dest="norm_target", type=float, default=1.0)
    p.add_argument("--spread", type=float, default=0.0)
    p.add_argument("--path", type=str, default=None, help="input for FromFile")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=str, required=True)
    p.add_argument("--layout", type=str, default="coordinate", choices=["coordinate", "array"])

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest", type=str)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="[ShatterLab] %(levelname)s %(name)s: %(message)s")
    logger.setLevel(level)

    try:
        config = config_from_args(args)
        if args.command == "replay":
            run_replay(config)
        else:
            COMMANDS[args.command](config)
    except ShatterLabError as exc:
        print(f"[ShatterLab] error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"[ShatterLab] error: {exc}", file=sys.stderr)
        return DomainError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
