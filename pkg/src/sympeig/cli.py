"""Command-line front end: instance generation, solving, the dense
reference oracle, validity checks, and benchmark sweeps.

Every output file embeds the resolved configuration and seed so runs
can be audited and reproduced.  Exit codes: 0 success, 1 solver did not
converge, 2 usage error, 3 I/O error, 4 numerical failure.
"""

import argparse
import concurrent.futures
import json
import os
import sys
import time

import numpy as np
from scipy.io import mmread, mmwrite

from . import __version__
from .errors import NumericalFailure
from .factor import srr
from .metrics import golub_werman, residue
from .operators import canonical_frame, load_matrix, poisson, store_matrix, symplectic_gram
from .oracle import reference
from .solver import (
    SolverParams,
    SolveStatus,
    SympEigResult,
    beta_best,
    beta_suggest,
    solve,
    solve_basic,
)
from .testgen import FAMILIES, gen_dense, gen_prescribed, gen_slr, gen_sparse

EXIT_OK = 0
EXIT_NO_CONVERGENCE = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4

OUT_ENV_VAR = "SYMPEIG_OUT"


def _out_dir(args):
    out = args.out or os.environ.get(OUT_ENV_VAR) or "."
    os.makedirs(out, exist_ok=True)
    return out


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def _add_source_args(sp, need_matrix=True):
    sp.add_argument("--matrix", help="path to a Matrix Market file (.B.mtx for slr pairs)")
    sp.add_argument("--family", choices=FAMILIES, help="generate the instance instead")
    sp.add_argument("--n", type=int, help="half-dimension of a generated instance")
    sp.add_argument("--density", type=float, help="sparsity of sparse/slr (default 10/n)")
    sp.add_argument("--rank-width", type=int, default=10, help="low-rank width m of slr")
    sp.add_argument(
        "--spectrum", help="comma-separated prescribed eigenvalues (default 1..n)"
    )
    sp.add_argument(
        "--seed", type=int, help="generator and solver seed (default 0)"
    )


def _seed_of(args):
    return 0 if getattr(args, "seed", None) is None else args.seed


def _parse_spectrum(text, n):
    if text is None:
        return None
    values = [float(tok) for tok in text.split(",") if tok.strip()]
    if len(values) != n:
        raise ValueError(f"--spectrum needs {n} values, got {len(values)}")
    return values


def _resolve_source(args):
    """Returns (op, descriptor, exact_reference_or_None)."""
    if args.matrix:
        return load_matrix(args.matrix), {"source": "file", "path": args.matrix}, None
    if not args.family or not args.n:
        raise ValueError("pass either --matrix or --family with --n")
    seed = _seed_of(args)
    descriptor = {
        "source": "generated",
        "family": args.family,
        "n": args.n,
        "seed": seed,
    }
    if args.family == "dense":
        return gen_dense(args.n, seed=seed), descriptor, None
    if args.family == "sparse":
        descriptor["density"] = args.density
        return gen_sparse(args.n, density=args.density, seed=seed), descriptor, None
    if args.family == "slr":
        descriptor["density"] = args.density
        descriptor["m"] = args.rank_width
        op = gen_slr(args.n, density=args.density, m=args.rank_width, seed=seed)
        return op, descriptor, None
    spectrum = _parse_spectrum(args.spectrum, args.n)
    descriptor["spectrum"] = spectrum
    op, ref = gen_prescribed(args.n, spectrum=spectrum, seed=seed)
    return op, descriptor, ref


def _build_params(args):
    mapping = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                mapping = json.load(fh)
        except OSError:
            raise
        except ValueError as exc:
            raise OSError(f"{args.config}: not valid JSON ({exc})") from exc
        if not isinstance(mapping, dict):
            raise ValueError(f"{args.config}: config must be a flat JSON object")
    if getattr(args, "tol", None) is not None:
        mapping["tol"] = args.tol
    if getattr(args, "seed", None) is not None:
        mapping["seed"] = args.seed
    return SolverParams.from_dict(mapping)


def _resolve_beta(label, op, p, ref=None):
    """Map a beta spec ('auto', 'sug', '2sug', 'best', '1.001dp', or a
    float literal) to a value; 'auto' returns None (solver heuristic)."""
    if label is None or label == "auto":
        return None
    if label == "sug":
        return beta_suggest(op, p)
    if label.endswith("sug"):
        return float(label[:-3]) * beta_suggest(op, p)
    if label in ("best", "1.001dp"):
        if ref is None:
            raise ValueError(f"beta label {label!r} needs the dense oracle reference")
        d_p = float(ref.d[p - 1])
        return beta_best(d_p) if label == "best" else 1.001 * d_p
    return float(label)


def _write_trace(path, trace, meta):
    with open(path, "w") as fh:
        fh.write("# " + json.dumps(_jsonable(meta), sort_keys=True) + "\n")
        fh.write("k,i,f,gnorm,gamma,t,beta\n")
        for row in trace.inner:
            fh.write(
                f"{row.k},{row.stage},{row.f!r},{row.gnorm!r},"
                f"{row.gamma!r},{row.t},{row.beta!r}\n"
            )


def _result_payload(result, meta):
    return _jsonable(
        {
            **meta,
            "status": result.status.value,
            "eigenvalues": result.eigenvalues,
            "beta_final": result.beta_final,
            "residue": result.residue,
            "feasibility": result.feasibility,
            "inner_iterations": result.inner_iterations,
            "outer_iterations": result.outer_iterations,
            "elapsed_s": result.elapsed,
        }
    )


def _status_exit(status):
    if status is SolveStatus.CONVERGED:
        return EXIT_OK
    if status is SolveStatus.MAX_ITERATIONS:
        return EXIT_NO_CONVERGENCE
    return EXIT_NUMERICAL


def _feasibility(x):
    return float(np.linalg.norm(symplectic_gram(x) - poisson(x.shape[1] // 2)))


def _run_variant(op, p, params, variant, beta_value):
    """Run one solver variant; returns a SympEigResult either way."""
    if variant == "enhanced":
        if beta_value is not None:
            params.beta0 = beta_value
        return solve(op, p, params)
    beta = beta_value if beta_value is not None else beta_suggest(op, p)
    start = time.perf_counter()
    x, trace = solve_basic(op, canonical_frame(op.n, p), beta, params)
    s_fin, d_fin = srr(op, x)
    resid = residue(op, s_fin, d_fin)
    reached = trace.outer[0].reached
    return SympEigResult(
        eigenvalues=d_fin,
        eigenbasis=s_fin,
        x_final=x,
        status=SolveStatus.CONVERGED if reached else SolveStatus.MAX_ITERATIONS,
        trace=trace,
        beta_final=float(beta),
        residue=resid,
        feasibility=_feasibility(s_fin),
        inner_iterations=len(trace.inner),
        outer_iterations=1,
        elapsed=time.perf_counter() - start,
    )


def cmd_gen(args):
    out = _out_dir(args)
    fake = argparse.Namespace(
        matrix=None, family=args.family, n=args.n, density=args.density,
        rank_width=args.rank_width, spectrum=args.spectrum, seed=args.seed,
    )
    op, descriptor, ref = _resolve_source(fake)
    base = os.path.join(out, f"{args.family}_n{args.n}_seed{args.seed}")
    paths = store_matrix(op, base + ".mtx")
    sidecar = {"version": __version__, **descriptor, "files": list(paths)}
    if ref is not None:
        sidecar["spectrum"] = ref.d
    with open(base + ".json", "w") as fh:
        json.dump(_jsonable(sidecar), fh, indent=2, sort_keys=True)
    for path in paths + (base + ".json",):
        print(path)
    return EXIT_OK


def cmd_solve(args):
    out = _out_dir(args)
    op, descriptor, _ = _resolve_source(args)
    if not 1 <= args.p < op.n:
        raise ValueError(f"need 1 <= p < n, got p={args.p}, n={op.n}")
    params = _build_params(args)
    beta_value = _resolve_beta(args.beta, op, args.p)
    result = _run_variant(op, args.p, params, args.variant, beta_value)
    meta = {
        "version": __version__,
        "matrix": descriptor,
        "p": args.p,
        "variant": args.variant,
        "params": vars(params).copy(),
        "seed": params.seed,
    }
    result_path = os.path.join(out, "result.json")
    with open(result_path, "w") as fh:
        json.dump(_result_payload(result, meta), fh, indent=2, sort_keys=True)
    _write_trace(os.path.join(out, "trace.csv"), result.trace, meta)
    if args.save_basis and result.eigenbasis is not None:
        mmwrite(os.path.join(out, "basis.mtx"), result.eigenbasis, precision=17)
    print(result_path)
    print(f"status={result.status.value} residue={result.residue:g}")
    return _status_exit(result.status)


def cmd_oracle(args):
    out = _out_dir(args)
    op, descriptor, _ = _resolve_source(args)
    if not 1 <= args.p <= op.n:
        raise ValueError(f"need 1 <= p <= n, got p={args.p}, n={op.n}")
    ref = reference(op, args.p)
    payload = {
        "version": __version__,
        "matrix": descriptor,
        "p": args.p,
        "n": op.n,
        "d": ref.d,
        "d_smallest": ref.d[: args.p],
    }
    oracle_path = os.path.join(out, "oracle.json")
    with open(oracle_path, "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
    xref_path = os.path.join(out, "xref.mtx")
    mmwrite(xref_path, ref.x_ref, precision=17)
    print(oracle_path)
    print(xref_path)
    return EXIT_OK


def cmd_check(args):
    op = load_matrix(args.matrix)
    rng = np.random.default_rng(args.seed)
    findings = {
        "matrix": args.matrix,
        "n": op.n,
        "kind": op.kind,
        "symmetric": op.is_symmetric(rng=rng),
        "spd": op.is_spd(rng=rng),
    }
    if args.basis:
        x = np.asarray(mmread(args.basis))
        feas = _feasibility(x)
        findings["basis_feasibility"] = feas
        findings["symplectic"] = bool(feas <= args.feas_tol)
    print(json.dumps(_jsonable(findings), indent=2, sort_keys=True))
    passed = findings["symmetric"] and findings["spd"] and findings.get("symplectic", True)
    return EXIT_OK if passed else EXIT_NUMERICAL


def _bench_cell(op, ref, cell, tol):
    family, n, p, seed, beta_label, variant = cell
    params = SolverParams(seed=seed, tol=tol)
    row = {
        "family": family, "n": n, "p": p, "seed": seed,
        "beta_label": beta_label, "beta": "", "variant": variant,
        "status": "", "outer_iters": "", "inner_iters": "",
        "time_s": "", "residue": "", "gw_err": "", "feasibility": "",
    }
    try:
        beta_value = _resolve_beta(beta_label, op, p, ref)
        start = time.perf_counter()
        result = _run_variant(op, p, params, variant, beta_value)
        elapsed = time.perf_counter() - start
        row.update(
            beta=result.beta_final,
            status=result.status.value,
            outer_iters=result.outer_iterations,
            inner_iters=result.inner_iterations,
            time_s=elapsed,
            residue=result.residue,
            feasibility=result.feasibility,
        )
        if ref is not None and result.eigenbasis is not None:
            row["gw_err"] = golub_werman(result.eigenbasis, ref.frame(p))
    except Exception as exc:  # per-row failure; the sweep continues
        row["status"] = f"error:{type(exc).__name__}"
    return row


def cmd_bench(args):
    out = _out_dir(args)
    families = [tok for tok in args.families.split(",") if tok]
    n_list = [int(tok) for tok in args.n_list.split(",")]
    p_list = [int(tok) for tok in args.p_list.split(",")]
    seeds = [int(tok) for tok in args.seeds.split(",")]
    betas = [tok for tok in args.betas.split(",") if tok]
    variants = [tok for tok in args.variants.split(",") if tok]
    for family in families:
        if family not in FAMILIES:
            raise ValueError(f"unknown family {family!r}")
    for variant in variants:
        if variant not in ("basic", "enhanced"):
            raise ValueError(f"unknown variant {variant!r}")
    for n in n_list:
        for p in p_list:
            if p >= n:
                raise ValueError(f"need p < n in the grid, got p={p}, n={n}")

    instances = {}
    for family in families:
        for n in n_list:
            for seed in seeds:
                fake = argparse.Namespace(
                    matrix=None, family=family, n=n, density=None,
                    rank_width=10, spectrum=None, seed=seed,
                )
                op, _, ref = _resolve_source(fake)
                if ref is None and 2 * n <= 4000 and args.with_oracle:
                    ref = reference(op)
                instances[(family, n, seed)] = (op, ref)

    cells = [
        (family, n, p, seed, beta_label, variant)
        for family in families
        for n in n_list
        for p in p_list
        for seed in seeds
        for beta_label in betas
        for variant in variants
    ]
    rows = []
    with concurrent.futures.ThreadPoolExecutor(max_workers=args.jobs) as pool:
        futures = []
        for cell in cells:
            op, ref = instances[(cell[0], cell[1], cell[3])]
            futures.append(pool.submit(_bench_cell, op, ref, cell, args.tol))
        rows = [future.result() for future in futures]
    rows.sort(key=lambda r: (r["family"], r["n"], r["p"], r["seed"], r["beta_label"], r["variant"]))

    meta = {
        "version": __version__, "families": families, "n_list": n_list,
        "p_list": p_list, "seeds": seeds, "betas": betas, "variants": variants,
        "tol": args.tol,
    }
    columns = [
        "family", "n", "p", "seed", "beta_label", "beta", "variant", "status",
        "outer_iters", "inner_iters", "time_s", "residue", "gw_err", "feasibility",
    ]
    bench_path = os.path.join(out, "bench.csv")
    with open(bench_path, "w") as fh:
        fh.write("# " + json.dumps(_jsonable(meta), sort_keys=True) + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(str(row[col]) for col in columns) + "\n")
    print(bench_path)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sympeig",
        description="Smallest symplectic eigenvalues of SPD matrices "
        "by trace-penalty minimization.",
    )
    parser.add_argument("--version", action="version", version=f"sympeig {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True)

    sp = sub.add_parser("gen", help="generate a test instance and write it out")
    sp.add_argument("--family", choices=FAMILIES, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--density", type=float)
    sp.add_argument("--rank-width", type=int, default=10)
    sp.add_argument("--spectrum")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("solve", help="compute the p smallest symplectic eigenvalues")
    _add_source_args(sp)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--beta", default="auto", help="'auto', 'sug', '<mult>sug', or a number")
    sp.add_argument("--tol", type=float, help="final residual target (enhanced)")
    sp.add_argument("--variant", choices=("basic", "enhanced"), default="enhanced")
    sp.add_argument("--config", help="JSON file with solver parameter overrides")
    sp.add_argument("--save-basis", action="store_true")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("oracle", help="dense reference spectrum (desk scale)")
    _add_source_args(sp)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("check", help="validate SPD / symmetry / symplecticity")
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--basis", help="optional basis file to test for symplecticity")
    sp.add_argument("--feas-tol", type=float, default=1e-6)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("bench", help="sweep (family, n, p, seed, beta, variant) cells")
    sp.add_argument("--families", default="dense")
    sp.add_argument("--n-list", default="50")
    sp.add_argument("--p-list", default="5")
    sp.add_argument("--seeds", default="0,1,2")
    sp.add_argument("--betas", default="sug")
    sp.add_argument("--variants", default="enhanced")
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--jobs", type=int, default=None)
    sp.add_argument("--with-oracle", action="store_true",
                    help="attach the dense oracle (subspace errors, d_p betas)")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else int(exc.code)
    try:
        return args.func(args)
    except OSError as exc:
        print(json.dumps({"error": str(exc), "type": type(exc).__name__}), file=sys.stderr)
        return EXIT_IO
    except (NumericalFailure, np.linalg.LinAlgError) as exc:
        print(json.dumps({"error": str(exc), "type": type(exc).__name__}), file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(json.dumps({"error": str(exc), "type": type(exc).__name__}), file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
