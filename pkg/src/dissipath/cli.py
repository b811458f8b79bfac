"""Command-line interface.

Exit codes: 0 success, 2 configuration/input error, 3 numerical failure,
4 failed ``--assert`` checks.
"""
import argparse
import csv
import json
import os
import sys
import time
from pathlib import Path

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_ASSERT = 0, 2, 3, 4
OUTPUT_ENV = "DISSIPATH_OUTPUT_DIR"
CHEMICAL_ACCURACY = 1.6e-3


class AssertionFailed(Exception):
    pass


def _parser():
    p = argparse.ArgumentParser(prog="dissipath", description=__doc__.splitlines()[0])
    p.add_argument("--emit-default-config", action="store_true", help="print the default config as JSON and exit")
    p.add_argument("--threads", type=int, default=None, help="cap on BLAS threads (applies before numpy loads)")
    sub = p.add_subparsers(dest="command")
    for name, hlp in (
        ("path-build", "build and align the reaction-path mesh"),
        ("evolve", "cool a warm start along the mesh"),
        ("markov", "induced Markov kernel, drift and hitting times"),
        ("filter", "filter leakage sweeps and support table"),
        ("resources", "resource formulas and bundled fixtures"),
    ):
        sp = sub.add_parser(name, help=hlp)
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--preset", help="bundled preset name (fig1a, fig2, fig3, synthetic_chain)")
        sp.add_argument("--out", help=f"output directory (default: ${OUTPUT_ENV} or ./dissipath-out)")
        sp.add_argument("--assert", dest="check", action="store_true", help="exit 4 if acceptance checks fail")
        sp.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=JSON",
                        help="override one config field, e.g. --set evolve.tau=0.02")
        if name == "evolve":
            sp.add_argument("--stepper", choices=["exact", "strang", "qdrift"])
            sp.add_argument("--compare-stepper", choices=["exact", "strang", "qdrift"],
                            help="rerun with this stepper and report the trajectory deviation")
            sp.add_argument("--seed", type=int)
        if name == "markov":
            sp.add_argument("--threshold", type=float)
    return p


def _overrides(args):
    from .errors import ConfigError

    over = {}
    for item in args.set:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(item, "expected SECTION.KEY=VALUE")
        key, raw = item.split("=", 1)
        try:
            val = json.loads(raw)
        except json.JSONDecodeError:
            val = raw
        node = over
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = val
    if getattr(args, "stepper", None):
        over.setdefault("evolve", {})["stepper"] = args.stepper
    if getattr(args, "compare_stepper", None):
        over.setdefault("evolve", {})["compare_stepper"] = args.compare_stepper
    if getattr(args, "seed", None) is not None:
        over.setdefault("evolve", {})["seed"] = args.seed
    if getattr(args, "threshold", None) is not None:
        over.setdefault("markov", {})["threshold"] = args.threshold
    return over


def _outdir(args, cfg):
    d = Path(args.out or cfg["output_dir"] or os.environ.get(OUTPUT_ENV) or "dissipath-out")
    d.mkdir(parents=True, exist_ok=True)
    return d


def _dump(path, doc):
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True, default=_jsonable) + "\n")


# pipeline helpers -----------------------------------------------------------


def path_kind(cfg):
    from .path import FcidumpSequence, H4Rectangle

    p = cfg["path"]
    if p["kind"] == "fcidump":
        return FcidumpSequence(tuple(p["fcidump_files"]))
    return H4Rectangle(p["a"], p["lam_min"], p["lam_max"])


def path_end(cfg, kind):
    from .path import transition_state_s

    s_end = cfg["path"]["s_end"]
    if s_end == "ts":
        return transition_state_s(kind, cfg["path"]["force_half_ts"])
    return float(s_end)


def mesh_coordinates(cfg, kind):
    import numpy as np

    from .path import build_mesh, choose_nh, equal_mass_mesh

    m = cfg["mesh"]
    if cfg["path"]["kind"] == "fcidump":
        return np.linspace(0.0, 1.0, len(kind.files)), None
    s0, s1 = cfg["path"]["s_start"], path_end(cfg, kind)
    if m["policy"] == "uniform":
        return np.linspace(s0, s1, int(m["n_h"])), None
    prof = build_mesh(kind, np.linspace(s0, s1, int(m["profile_samples"])), ds=m["ds_fd"]).dk
    n_h = int(m["n_h"]) if m["eps_e"] is None else choose_nh(prof.C_DK, m["eps_e"], m["c_safety"])
    return equal_mass_mesh(prof.s, prof.g, n_h), prof


def build_cfg_mesh(cfg, with_profile=True):
    from .path import build_mesh

    kind = path_kind(cfg)
    s, _ = mesh_coordinates(cfg, kind)
    if cfg["path"]["kind"] == "fcidump":
        from .path import PathMesh, build_path_points

        return kind, PathMesh(build_path_points(kind, s))
    return kind, build_mesh(kind, s, with_profile=with_profile, ds=cfg["mesh"]["ds_fd"])


def filter_spec(cfg, h_norm=None):
    from .lindblad import FilterSpec

    f = dict(cfg["filter"])
    if f["omega_period"] is None:
        f["omega_period"] = 4.0 * (h_norm or 1.0)
    return FilterSpec(f["kind"], int(f["n_omega"]), float(f["omega_period"]), float(f["alpha"]),
                      float(f["width"]), int(f["m_s"]), float(f["band"]))


def jump_sources(cfg, point):
    from .lindblad.evolve import default_jump_sources

    j = cfg["jumps"]
    pairs = None if j["pairs"] == "all" else [tuple(q) for q in j["pairs"]]
    return default_jump_sources(point, pairs, tuple(j["flavors"]))


def max_norm(points):
    from .spectral import spectral_norm

    return max(spectral_norm(p.H.entries) for p in points)


# commands -------------------------------------------------------------------


def cmd_path_build(cfg, out, check):
    import numpy as np

    from .path import occupied_overlap_matrix, overlap_from_principal_angles

    t0 = time.time()
    kind, mesh = build_cfg_mesh(cfg)
    mesh.to_json(out / "mesh.json")
    if mesh.dk is not None:
        with open(out / "dk_profile.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["s", "g"])
            for s, g in zip(mesh.dk.s, mesh.dk.g):
                w.writerow([repr(float(s)), repr(float(g))])
    rows = []
    pts = mesh.points
    have_orbitals = pts[0].scf is not None
    if have_orbitals:
        from .path import build_path_points

        raw = build_path_points(kind, mesh.s)
    for k in range(len(pts) - 1):
        row = {"k": k, "s_k": pts[k].s, "s_k1": pts[k + 1].s,
               "ground_overlap": float(abs(np.vdot(pts[k].eig.ground, pts[k + 1].eig.ground)) ** 2)}
        if have_orbitals:
            sig, prod = overlap_from_principal_angles(occupied_overlap_matrix(pts[k], pts[k + 1]))
            row["occupied_cosines"] = sig.tolist()
            row["determinant_overlap"] = prod
            row["ground_overlap_unaligned"] = float(abs(np.vdot(raw[k].eig.ground, raw[k + 1].eig.ground)) ** 2)
        rows.append(row)
    _dump(out / "alignment.json", {"pairs": rows})
    summary = {"N_H": mesh.N_H}
    if mesh.dk is not None:
        summary.update(C_DK=mesh.dk.C_DK, L_H=mesh.dk.L_H)
    _dump(out / "path_summary.json", summary)
    print(f"mesh: {mesh.N_H} points, s in [{mesh.s[0]:.6f}, {mesh.s[-1]:.6f}] ({time.time() - t0:.1f} s)")
    if mesh.dk is not None:
        print(f"C_DK = {mesh.dk.C_DK:.6f}   L_H = {mesh.dk.L_H:.6f} hartree")
    if check and have_orbitals:
        bad = [r["k"] for r in rows if r["ground_overlap"] + 1e-12 < r["ground_overlap_unaligned"]]
        if bad:
            raise AssertionFailed(f"alignment lowered the ground overlap for pairs {bad}")


def _run_label(n):
    return "schedule" if isinstance(n, list) else str(n)


def cmd_evolve(cfg, out, check):
    import numpy as np

    from .lindblad.evolve import evolve_along_path

    _, mesh = build_cfg_mesh(cfg, with_profile=False)
    pts = mesh.points
    labels, sources = jump_sources(cfg, pts[0])
    spec = filter_spec(cfg, max_norm(pts))
    ev = cfg["evolve"]
    if ev["n_t_schedule"] is not None:
        runs = [ev["n_t_schedule"]]
    else:
        runs = sorted(ev["n_t"]) if isinstance(ev["n_t"], list) else [ev["n_t"]]

    def run(n, stepper):
        return evolve_along_path(pts, sources, spec, ev["tau"], n, stepper, labels=labels, seed=ev["seed"],
                                 scale=cfg["jumps"]["scale"])

    summary = {"stepper": ev["stepper"], "tau": ev["tau"], "filter": spec.kind, "runs": {}}
    for n in runs:
        t0 = time.time()
        traj = run(n, ev["stepper"])
        key = _run_label(n)
        traj.to_csv(out / f"trajectory_NT{key}.csv")
        last = traj.records[-1]
        entry = {"dE_ts": last.dE, "infidelity_ts": last.infidelity,
                 "chemical_accuracy": bool(last.dE <= CHEMICAL_ACCURACY)}
        if ev["compare_stepper"]:
            other = run(n, ev["compare_stepper"])
            entry["compare"] = {
                "stepper": ev["compare_stepper"],
                "max_dE_deviation": float(np.max(np.abs(other.column("dE") - traj.column("dE")))),
                "max_infidelity_deviation": float(
                    np.max(np.abs(other.column("infidelity") - traj.column("infidelity")))),
                "final_state_deviation": float(np.max(np.abs(other.final_state - traj.final_state))),
            }
        summary["runs"][key] = entry
        print(f"N_T={key:>8s}  dE_TS={last.dE * 1e3:9.4f} mHa  infidelity_TS={last.infidelity:.3e}  "
              f"({time.time() - t0:.1f} s)")
        if "compare" in entry:
            print(f"          vs {ev['compare_stepper']}: max |d dE| = {entry['compare']['max_dE_deviation']:.3e}")
    dEs = [summary["runs"][_run_label(n)]["dE_ts"] for n in runs]
    summary["dE_nonincreasing"] = all(b <= a + 1e-12 for a, b in zip(dEs, dEs[1:]))
    _dump(out / "evolve_summary.json", summary)
    if check:
        if not summary["dE_nonincreasing"]:
            raise AssertionFailed("TS energy error increases with N_T")
        if dEs[-1] > CHEMICAL_ACCURACY:
            raise AssertionFailed(f"TS energy error {dEs[-1]:.3e} above chemical accuracy")


def _select_point(cfg, kind, mesh):
    import numpy as np

    from .path import compute_point, transition_state_s

    from .errors import ConfigError

    g = cfg["markov"]["geometry"]
    if cfg["path"]["kind"] == "fcidump" and not isinstance(g, int):
        raise ConfigError("markov.geometry", "FCIDUMP paths need an integer mesh index")
    if g == "ts":
        s_ts = transition_state_s(kind, cfg["path"]["force_half_ts"])
        i = int(np.argmin(np.abs(mesh.s - s_ts)))
        if abs(mesh.s[i] - s_ts) < 1e-12:
            return i, mesh.points[i]
        return None, compute_point(kind.geometry(s_ts), s_ts, kind.n_electrons)
    if isinstance(g, dict):
        return None, compute_point(kind.geometry(g["s"]), g["s"], kind.n_electrons)
    if g >= mesh.N_H:
        raise ConfigError("markov.geometry", f"index {g} outside mesh of {mesh.N_H} points")
    return g, mesh.points[g]


def cmd_markov(cfg, out, check):
    import numpy as np

    from .lindblad.evolve import build_generator
    from .markov import (
        check_uniform_drift,
        export_transition_graph,
        kernel_from_jumps,
        layer_partition,
        layer_sweep,
        layered_chain,
        longest_downhill_path,
        populated_window,
        simulate_hitting,
        verify_tail_bound,
        warm_start_radius,
    )
    from .spectral import gaps

    mk = cfg["markov"]
    kind, mesh = build_cfg_mesh(cfg, with_profile=False)
    idx, point = _select_point(cfg, kind, mesh)
    labels, sources = jump_sources(cfg, point)
    spec = filter_spec(cfg, max_norm([point]))
    gen = build_generator(point.eig, sources, spec, labels, cfg["jumps"]["scale"])
    K = kernel_from_jumps(gen.jumps)
    E = point.eig.energies
    delta = gaps(point.eig).delta
    dE_layer = delta if mk["delta_e_layer"] == "gap" else float(mk["delta_e_layer"])

    # warm start: previous mesh ground state expressed in this eigenbasis
    if idx is not None and idx > 0:
        prev = mesh.points[idx - 1].eig.ground
        mu = np.abs(point.eig.vectors.conj().T @ prev) ** 2
    else:
        mu = np.zeros(len(E))
        mu[0] = 1.0
    mu = mu / mu.sum()
    parts = layer_partition(E, dE_layer)
    drift = check_uniform_drift(K, E, dE_layer, threshold=mk["threshold"])
    drift_win = check_uniform_drift(K, E, dE_layer, window=populated_window(mu))
    ell, unreachable, _ = longest_downhill_path(K, mk["threshold"])
    (out / "graph.dot").write_text(export_transition_graph(K, mk["threshold"], "dot", E, parts))
    (out / "graph.json").write_text(export_transition_graph(K, mk["threshold"], "json", E, parts))

    L_mu = warm_start_radius(mu, parts, mk["eta"])
    stats = simulate_hitting(K, mu, int(mk["n_samples"]), mk["seed"])
    p_cert = drift_win.p_min_achieved
    tail = verify_tail_bound(stats, L_mu, p_cert, mk["eta"], mk["eps"]) if p_cert > 0 else None
    hist = np.bincount(stats.samples)
    with open(out / "hitting_hist.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["tau0", "count"])
        for t, c in enumerate(hist):
            if c:
                w.writerow([t, int(c)])

    syn = mk["synthetic"]
    chain, chain_E = layered_chain(syn["layers"], syn["p"])
    mu_syn = np.zeros(chain.dim)
    mu_syn[1 : syn["L_mu"] + 1] = 1.0 / max(syn["L_mu"], 1)
    if syn["L_mu"] == 0:
        mu_syn[0] = 1.0
    syn_stats = simulate_hitting(chain, mu_syn, int(mk["n_samples"]), mk["seed"])
    syn_tail = verify_tail_bound(syn_stats, syn["L_mu"], syn["p"], 0.0, mk["eps"])

    report = {
        "s": point.s,
        "delta": delta,
        "delta_e_layer": dE_layer,
        "p_min_all_states": drift.p_min_achieved,
        "p_min_warm_window": drift_win.p_min_achieved,
        "violators": drift.violators,
        "layer_sweep": {str(f): r.p_min_achieved for f, r in layer_sweep(K, E, delta).items()},
        "threshold": mk["threshold"],
        "ell": ell,
        "unreachable": unreachable,
        "L_mu": L_mu,
        "hitting_mean": float(stats.samples.mean()),
        "tail": tail,
        "synthetic_tail": syn_tail,
    }
    _dump(out / "markov_report.json", report)
    print(f"geometry s={point.s:.6f}: ell={ell}, unreachable={len(unreachable)}, "
          f"p_min={drift.p_min_achieved:.4f} at dE_layer={dE_layer:.4g}")
    print(f"synthetic chain tail: {'PASS' if syn_tail['passes'] else 'FAIL'} "
          f"(t*={syn_tail['t_star']}, tail={syn_tail['tail']:.2e}, bound={syn_tail['bound']:.2e})")
    if check:
        msgs = []
        if unreachable:
            msgs.append(f"{len(unreachable)} states cannot reach the ground state")
        if ell > 6:
            msgs.append(f"longest downhill path {ell} > 6")
        if not syn_tail["passes"]:
            msgs.append("synthetic tail bound violated")
        if tail is not None and not tail["passes"]:
            msgs.append("warm-start tail bound violated")
        if msgs:
            raise AssertionFailed("; ".join(msgs))


def _jsonable(o):
    import numpy as np

    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.bool_,)):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


def cmd_filter(cfg, out, check):
    from .lindblad import FilterSpec, time_support
    from .lindblad.leakage import gapped_model, measured_leakage

    fs = cfg["filter_sweep"]
    rows = []
    for frac in fs["delta_fractions"]:
        eig, A = gapped_model(int(fs["dim"]), frac, 1.0, fs["seed"])
        for n in fs["n_omega"]:
            spec = FilterSpec("square", int(n), 4.0)
            exc, full = measured_leakage(A, eig, spec)
            env = 1.0 / (frac * spec.support)
            rows.append({"model": "gapped", "delta": frac, "n_omega": int(n), "T_N": spec.support,
                         "leakage": exc, "leakage_with_diagonal": full, "envelope": env, "ok": bool(exc <= env)})
        ideal = measured_leakage(A, eig, FilterSpec("ideal"))[1]
        rows.append({"model": "gapped", "delta": frac, "n_omega": 0, "T_N": float("inf"), "leakage": ideal,
                     "leakage_with_diagonal": ideal, "envelope": 0.0, "ok": bool(ideal == 0.0)})
    with open(out / "leakage_sweep.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(float(v)) if isinstance(v, float) else v) for k, v in r.items()})
    gev = FilterSpec("gevrey", alpha=cfg["filter"]["alpha"])
    sq = FilterSpec("square")
    delta = min(fs["delta_fractions"])
    with open(out / "support_table.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["eps_leak", "delta", "T_square", "T_gevrey"])
        for eps in fs["eps_leak"]:
            w.writerow([repr(float(eps)), repr(float(delta)), repr(float(time_support(sq, delta, eps)[0])),
                        repr(float(time_support(gev, delta, eps)[0]))])
    n_ok = sum(r["ok"] for r in rows)
    print(f"leakage rows within envelope: {n_ok}/{len(rows)}")
    if check and n_ok != len(rows):
        raise AssertionFailed("measured leakage above the envelope")


def cmd_resources(cfg, out, check):
    from .resources import ComplexityInputs, CostModel, report_table, resource_report

    r = cfg["resources"]
    model = CostModel(int(r["n_omega"]), r["qsvt_eps"], r["cost_uh"], int(r["t_per_rz"]), int(r["n_h"]),
                      int(r["n_t"]))
    inputs = ComplexityInputs(r["h_norm"], r["delta_min"], r["eps_e"], r["n_o"], r["p0"], r["p_succ"])
    doc = resource_report(model, inputs)
    _dump(out / "resources.json", doc)
    text = report_table(doc)
    (out / "resources.txt").write_text(text + "\n")
    print(text)
    print(f"N_UH = {doc['n_uh_calls']}, total Toffolis = {doc['total_toffoli']:.4g}")
    if check and len(doc["table2"]) != 8:
        raise AssertionFailed("fixture table incomplete")


COMMANDS = {
    "path-build": cmd_path_build,
    "evolve": cmd_evolve,
    "markov": cmd_markov,
    "filter": cmd_filter,
    "resources": cmd_resources,
}


def main(argv=None):
    args = _parser().parse_args(argv)
    if args.threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(args.threads)
    from .config import DEFAULT_CONFIG, load_config
    from .errors import InputError, NumericalError

    if args.emit_default_config:
        print(json.dumps(DEFAULT_CONFIG, indent=2))
        return EXIT_OK
    if not args.command:
        _parser().print_help()
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config, args.preset, _overrides(args))
        out = _outdir(args, cfg)
        COMMANDS[args.command](cfg, out, args.check)
    except AssertionFailed as exc:
        print(f"assertion failed: {exc}", file=sys.stderr)
        return EXIT_ASSERT
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
