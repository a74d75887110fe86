"""Command-line interface.

Exit codes: 0 success, 1 failed self-check, 2 configuration or input error,
3 solver did not converge.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from . import determinant as det
from .errors import CCGraphError, SingularJacobianError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NOCONV = 0, 1, 2, 3


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _load_json_arg(text: str, what: str):
    from .errors import ConfigurationError

    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{what} is not valid JSON: {exc}") from None


def _load_json_file(path: str, what: str):
    from .errors import ConfigurationError

    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read {what} {path!r}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{what} {path!r} is not valid JSON: {exc}") from None


# -- shared argument groups ---------------------------------------------------------


def _add_system(p: argparse.ArgumentParser):
    g = p.add_argument_group("system")
    g.add_argument("--integrals", help="FCIDUMP-style integral file")
    g.add_argument("--model", choices=["pairing", "hubbard-chain"], help="built-in model instead of a file")
    g.add_argument("--norb", type=int, help="number of orbitals K (pairing; hubbard-chain uses K = 2 * sites)")
    g.add_argument("--sites", type=int, help="hubbard-chain sites")
    g.add_argument("--nelec", type=int, help="number of particles N")
    g.add_argument("--g", type=float, default=0.5, help="pairing strength")
    g.add_argument("--spacing", type=float, default=1.0, help="pairing level spacing")
    g.add_argument("--U", type=float, default=1.0, help="Hubbard on-site repulsion")
    g.add_argument("--t", type=float, default=1.0, help="Hubbard hopping")
    g.add_argument("--periodic", action="store_true", help="periodic Hubbard chain")
    g.add_argument("--basis", choices=["site", "mo"], default="site", help="Hubbard orbital basis")
    g.add_argument("--field", type=float, default=0.0, help="Zeeman splitting between up and down orbitals")
    g.add_argument("--json", action="store_true", help="print a JSON report")


def _hamiltonian(args):
    from .errors import ConfigurationError
    from .hamiltonian import Hamiltonian, builtin_model, parse_integrals

    if (args.integrals is None) == (args.model is None):
        raise ConfigurationError("give exactly one of --integrals and --model")
    if args.integrals is not None:
        ints = parse_integrals(args.integrals, norb=args.norb)
    elif args.model == "pairing":
        if args.norb is None:
            raise ConfigurationError("--model pairing needs --norb")
        ints = builtin_model("pairing", K=args.norb, g=args.g, spacing=args.spacing, field=args.field)
    else:
        sites = args.sites
        if sites is None:
            if args.norb is None or args.norb % 2:
                raise ConfigurationError("--model hubbard-chain needs --sites or an even --norb")
            sites = args.norb // 2
        ints = builtin_model("hubbard-chain", sites=sites, U=args.U, t=args.t, periodic=args.periodic,
                             basis=args.basis, field=args.field)
    N = args.nelec if args.nelec is not None else ints.nelec
    if N is None:
        raise ConfigurationError("number of particles unknown: pass --nelec")
    if not 0 <= N <= ints.K:
        raise ConfigurationError(f"--nelec {N} outside 0..{ints.K}")
    return Hamiltonian(ints, N)


def _graph_spec(text):
    from .graph import GraphSpec

    return GraphSpec.full() if text is None else GraphSpec.from_json(text)


def _ref(args, K, N):
    if getattr(args, "ref", None):
        return det.from_indices(_load_json_arg(args.ref, "--ref"), K)
    return det.from_indices(range(1, N + 1))


def _solver_options(args, mr=False):
    from .cc import SolverOptions

    mode = args.jacobian or ("finite-difference" if mr else "analytic")
    return SolverOptions(tol_residual=args.tol, max_iter=args.max_iter, damping=args.damping, jacobian_mode=mode)


def _add_solver(p):
    p.add_argument("--graph", help='graph spec JSON, e.g. \'{"kind":"ranks","ranks":[1,2]}\'')
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--damping", type=float, default=0.5)
    p.add_argument("--jacobian", choices=["analytic", "finite-difference"])


# -- subcommands ------------------------------------------------------------------------


def cmd_graph_stats(args) -> int:
    from .graph import ExcitationGraph
    from .stats import graph_stats, predecessor_count

    K, N = args.norb, args.nelec
    ref = _ref(args, K, N)
    G = ExcitationGraph(K, N, [ref])
    rep = graph_stats(G, max_path_rank=args.max_path_rank)
    preds = []
    for r in range(2, N + 1):
        alpha = next((s for s in G.vertices(0) if det.rank(s, ref) == r), None)
        if alpha is not None:
            p = predecessor_count(alpha, ref, K)
            preds.append({"rank": r, "formula": p.formula, "inclusive": p.inclusive, "strict": p.strict,
                          "complementary_pairs": p.complementary_pairs})
    if args.json:
        doc = rep.to_json()
        doc["predecessors"] = preds
        print(_dump(doc))
    else:
        print(f"K={K} N={N} reference={det.format_det(ref)}")
        print(rep.table())
        for p in preds:
            print(f"predecessors rank {p['rank']}: formula {p['formula']}, enumerated inclusive {p['inclusive']}, "
                  f"strict {p['strict']}, complementary pairs {p['complementary_pairs']}")
    return EXIT_OK


def cmd_fci(args) -> int:
    from .cc import solve_fci

    H = _hamiltonian(args)
    pairs = solve_fci(H, args.nstates)
    if args.json:
        print(_dump({"K": H.K, "N": H.N, "dim": H.basis.dim, "energies": [e for e, _ in pairs]}))
    else:
        print(f"FCI K={H.K} N={H.N} dim={H.basis.dim}")
        for k, (e, _) in enumerate(pairs):
            print(f"state {k}: E = {e:.12f}")
    return EXIT_OK


def cmd_ci(args) -> int:
    from .cc import solve_ci_projected
    from .graph import ExcitationGraph

    H = _hamiltonian(args)
    G = ExcitationGraph(H.K, H.N, [_ref(args, H.K, H.N)], _graph_spec(args.graph))
    e, vec = solve_ci_projected(H, G)
    if args.json:
        print(_dump({"energy": e, "dimension": len(G.labels()) + 1}))
    else:
        print(f"projected CI: dimension {len(G.labels()) + 1}, E = {e:.12f}")
    return EXIT_OK


def cmd_cc(args) -> int:
    from .cc import CCProblem, solve_cc
    from .graph import ExcitationGraph

    H = _hamiltonian(args)
    G = ExcitationGraph(H.K, H.N, [_ref(args, H.K, H.N)], _graph_spec(args.graph))
    sol = solve_cc(CCProblem(H, G, _solver_options(args)))
    report = sol.to_json()
    report["amplitudes-path"] = args.amplitudes_out
    if args.amplitudes_out:
        with open(args.amplitudes_out, "w") as fh:
            fh.write(_dump(sol.t.to_json()) + "\n")
    if args.json:
        print(_dump(report))
    else:
        state = "converged" if sol.converged else "NOT converged"
        print(f"CC {state} after {sol.iterations} iterations, |r| = {sol.residual_norm:.3e}")
        print(f"E_CC = {sol.energy:.12f}")
    return EXIT_OK if sol.converged else EXIT_NOCONV


def cmd_mrcc(args) -> int:
    from .errors import ConfigurationError
    from .graph import ExcitationGraph
    from .mrcc import MRProblem, solve_jm_mrcc, solve_mrci

    H = _hamiltonian(args)
    refs_doc = _load_json_arg(args.refs, "--refs")
    if not isinstance(refs_doc, list) or not refs_doc:
        raise ConfigurationError("--refs must be a non-empty list of index lists")
    refs = det.parse_det_list(refs_doc, H.K)
    G = ExcitationGraph(H.K, H.N, refs, _graph_spec(args.graph))
    problem = MRProblem(H, G, _solver_options(args, mr=True))
    sol = solve_mrci(problem) if args.method == "mrci" else solve_jm_mrcc(problem)
    report = {
        "method": args.method,
        "references": [det.to_indices(r) for r in refs],
        "converged": sol.converged,
        "iterations": sol.iterations,
        "residual_norm": sol.residual_norm,
        "amplitudes": [t.to_json() for t in sol.amplitudes],
        **sol.model.to_json(),
    }
    if args.json:
        print(_dump(report))
    else:
        state = "converged" if sol.converged else "NOT converged"
        print(f"{args.method} {state} after {sol.iterations} iterations, |r| = {sol.residual_norm:.3e}")
        for k, e in enumerate(sol.model.energies):
            print(f"E_{k} = {complex(e).real:.12f}" + (f" {complex(e).imag:+.3e}i" if sol.model.complex_roots else ""))
        if sol.model.complex_roots:
            print("warning: effective Hamiltonian has complex eigenvalues")
    return EXIT_OK if sol.converged else EXIT_NOCONV


def _read_costs(path, K):
    from .errors import ConfigurationError

    doc = _load_json_file(path, "costs file")
    costs = {}
    if not isinstance(doc, list):
        raise ConfigurationError('costs file must be a list of {"det": [...], "cost": value}')
    for item in doc:
        try:
            d = det.from_indices(item["det"], K)
            c = item["cost"]
        except (KeyError, TypeError) as exc:
            raise ConfigurationError(f"malformed cost entry {item!r}") from exc
        if c is None or c == "inf":
            costs[d] = None
        else:
            try:
                costs[d] = Fraction(str(c))
            except ValueError:
                raise ConfigurationError(f"cost {c!r} is not a rational number") from None
    return costs


def cmd_select_refs(args) -> int:
    from .cover import CoverInstance, size_estimate, solve_cover, verify_cover

    targets = det.parse_det_list(_load_json_file(args.targets, "targets file"), args.norb)
    costs = _read_costs(args.costs, args.norb) if args.costs else {}
    inst = CoverInstance(args.norb, args.nelec, targets, args.rank, costs)
    sol = solve_cover(inst, node_cap=args.node_cap)
    check = verify_cover(inst, sol.references)
    est = size_estimate(inst, sol.certificate["candidates"])
    if args.json:
        doc = sol.to_json()
        doc["verified"] = check.passed
        doc["estimate"] = est
        print(_dump(doc))
    else:
        print(f"references ({len(sol.references)}): " + " ".join(det.format_det(r) for r in sol.references))
        print(f"total cost {sol.total_cost}, optimal {'yes' if sol.optimal else 'no (node cap reached)'}, "
              f"verified {'yes' if check.passed else 'no'}")
        c = sol.certificate
        print(f"candidates {c['candidates']} (allowed {c['allowed_candidates']}), nodes {c['nodes']}, "
              f"greedy bound {c['greedy_cost']}")
        line = f"estimate: n/|S| = {est['n']}/{est['|S|']} = {est['ratio']:.4g}, ball bound {est['ball_bound']:.4g}"
        if "entropy_bound" in est:
            line += f", entropy bound {est['entropy_bound']:.4g}"
        print(line)
    return EXIT_OK


def cmd_export_dot(args) -> int:
    from .graph import ExcitationGraph, to_dot

    K, N = args.norb, args.nelec
    refs = det.parse_det_list(_load_json_arg(args.refs, "--refs"), K) if args.refs else [det.from_indices(range(1, N + 1))]
    text = to_dot(ExcitationGraph(K, N, refs, _graph_spec(args.graph)))
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_selfcheck(args) -> int:
    from .selfcheck import run_selfcheck

    results = run_selfcheck(args.norb, args.nelec, args.seed)
    failed = [name for name, ok in results if not ok]
    if args.json:
        print(_dump({"checks": [{"name": n, "passed": ok} for n, ok in results], "failed": failed}))
    else:
        for name, ok in results:
            print(f"{'pass' if ok else 'FAIL'}  {name}")
        if failed:
            print(f"{len(failed)} of {len(results)} checks failed")
        else:
            print(f"all {len(results)} checks passed")
    return EXIT_FAIL if failed else EXIT_OK


# -- parser ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ccgraph", description="Excitation graphs and coupled-cluster solvers")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("graph-stats", help="closed-form versus enumerated graph statistics")
    p.add_argument("--norb", type=int, required=True)
    p.add_argument("--nelec", type=int, required=True)
    p.add_argument("--ref", help="reference as a JSON index list (default [1..N])")
    p.add_argument("--max-path-rank", type=int)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_graph_stats)

    p = sub.add_parser("fci", help="full CI energies")
    _add_system(p)
    p.add_argument("--nstates", type=int, default=1)
    p.set_defaults(func=cmd_fci)

    p = sub.add_parser("ci", help="CI projected onto an excitation graph")
    _add_system(p)
    p.add_argument("--graph")
    p.add_argument("--ref")
    p.set_defaults(func=cmd_ci)

    for name in ("cc", "solve"):
        p = sub.add_parser(name, help="single-reference coupled cluster")
        _add_system(p)
        _add_solver(p)
        p.add_argument("--ref")
        p.add_argument("--amplitudes-out", help="write converged amplitudes as JSON")
        p.set_defaults(func=cmd_cc)

    p = sub.add_parser("mrcc", help="Jeziorski-Monkhorst MRCC or MRCI")
    _add_system(p)
    _add_solver(p)
    p.add_argument("--refs", required=True, help="JSON list of index lists")
    p.add_argument("--method", choices=["jm", "mrci"], default="jm")
    p.set_defaults(func=cmd_mrcc)

    p = sub.add_parser("select-refs", help="optimal reference determinants by Hamming covering")
    p.add_argument("--norb", type=int, required=True)
    p.add_argument("--nelec", type=int, required=True)
    p.add_argument("--rank", type=int, required=True, help="excitation rank truncation rho")
    p.add_argument("--targets", required=True, help="JSON file with a list of index lists")
    p.add_argument("--costs", help='JSON file: [{"det": [...], "cost": value or null}, ...]')
    p.add_argument("--node-cap", type=int, default=10**6)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_select_refs)

    p = sub.add_parser("export-dot", help="write the (multi)graph in DOT format")
    p.add_argument("--norb", type=int, required=True)
    p.add_argument("--nelec", type=int, required=True)
    p.add_argument("--refs", help="JSON list of index lists (default [[1..N]])")
    p.add_argument("--graph")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_export_dot)

    p = sub.add_parser("selfcheck", help="compare the main code paths with the brute-force oracle")
    p.add_argument("--norb", type=int, default=4)
    p.add_argument("--nelec", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_selfcheck)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SingularJacobianError as exc:
        print(f"error ({exc.code}): {exc}", file=sys.stderr)
        return EXIT_NOCONV
    except CCGraphError as exc:
        print(f"error ({exc.code}): {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except np.linalg.LinAlgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOCONV


if __name__ == "__main__":
    sys.exit(main())
