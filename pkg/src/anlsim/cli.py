"""Command-line interface: ``anlsim {simulate,campaign,sweep,gn}``.

Exit codes: 0 success, 2 usage or configuration error, 3 runtime failure.
``ANLSIM_WORKERS`` sets the default worker count for campaigns and sweeps.
"""
import argparse
import csv
import datetime
import hashlib
import json
import os
import sys

from . import __version__, units
from .config import ConfigError, campaign_from, load
from .gnmodel import (AnlDistribution, DomainError, GnLink, Span, a_nl_supralinear, ase_power,
                      ber_from_snr_qpsk, delta_q2_opt, inverse_snr_accumulate, p_opt,
                      q2_opt_difference, q_from_ber, snr_identical_spans, snr_opt, snr_with_nli)
from .siggrid import ConfigurationError

EXIT_USAGE = 2
EXIT_RUNTIME = 3


class UsageError(Exception):
    pass


def _load_doc(path):
    if path is None:
        return {}, None
    doc, digest = load(path)
    return doc, digest


def _write_manifest(outdir, args, config_path, digest, outputs):
    manifest = {
        "software_version": __version__,
        "command": args.command,
        "argv": sys.argv[1:],
        "config_path": config_path,
        "config_sha256": digest,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "outputs": outputs,
    }
    with open(os.path.join(outdir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def _overrides(cfg, args):
    kw = {}
    if getattr(args, "model", None):
        kw["model"] = args.model
    if getattr(args, "n_plates", None) is not None:
        kw["n_plates"] = args.n_plates
    if getattr(args, "seed", None) is not None:
        kw["base_seed"] = args.seed
    if getattr(args, "draws", None) is not None:
        if args.draws < 2:
            raise UsageError("--draws must be >= 2 (sample variance undefined)")
        kw["n_draws"] = args.draws
    if getattr(args, "workers", None) is not None:
        kw["workers"] = args.workers
    if getattr(args, "gamma", None) is not None:
        kw["fiber"] = cfg.fiber.with_(gamma=units.per_w_km_to_si(args.gamma))
    if getattr(args, "pmd", None) is not None:
        kw["fiber"] = kw.get("fiber", cfg.fiber).with_(pmd_coefficient=units.ps_sqrt_km_to_si(args.pmd))
    return cfg.with_(**kw) if kw else cfg


def _campaign_cfg(args):
    doc, digest = _load_doc(args.config)
    cfg = campaign_from(doc)
    if "workers" not in doc.get("campaign", {}) and os.environ.get("ANLSIM_WORKERS"):
        cfg = cfg.with_(workers=int(os.environ["ANLSIM_WORKERS"]))
    return _overrides(cfg, args), digest


def cmd_simulate(args):
    from .campaign import transmit

    cfg, digest = _campaign_cfg(args)
    rx, _ = transmit(cfg, 0)
    os.makedirs(args.out, exist_ok=True)
    outputs = ["rx_result.json"]
    with open(os.path.join(args.out, "rx_result.json"), "w") as fh:
        fh.write(rx.to_json(indent=2, sort_keys=True) + "\n")
    if args.constellation:
        with open(os.path.join(args.out, "constellation.csv"), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["symbol_index", "x_re", "x_im", "y_re", "y_im"])
            for i, (x, y) in enumerate(zip(rx.t_spaced_symbols_x, rx.t_spaced_symbols_y)):
                w.writerow([i] + [repr(float(v)) for v in (x.real, x.imag, y.real, y.imag)])
        outputs.append("constellation.csv")
    _write_manifest(args.out, args, args.config, digest, outputs)
    print(f"a_NL = {rx.a_nl_mw2:.6e} mW^-2 ({rx.a_nl_db:.3f} dBmW^-2)")
    return 0


def _progress(done, total):
    print(f"\r  draw {done}/{total}", end="" if done < total else "\n", file=sys.stderr, flush=True)


def cmd_campaign(args):
    from .campaign import run_campaign, write_campaign

    cfg, digest = _campaign_cfg(args)
    res = run_campaign(cfg, progress=None if args.quiet else _progress)
    res.metadata["manifest"] = "manifest.json"
    write_campaign(res, args.out)
    _write_manifest(args.out, args, args.config, digest, ["campaign.json", "samples.csv"])
    d = res.dist
    print(f"mu = {d.mu_db:.3f} dBmW^-2, sigma = {units.per_w2_to_per_mw2(d.sigma):.3e} mW^-2 "
          f"over {d.n_samples} draws")
    return 0


def cmd_sweep(args):
    from .campaign import SWEEP_AXES, sweep, write_campaign, write_sweep

    values = [v.strip() for v in (args.values or "").split(",") if v.strip()]
    if not values:
        raise UsageError("--values must list at least one value")
    if args.axis not in SWEEP_AXES:
        raise UsageError(f"--axis must be one of {', '.join(SWEEP_AXES)}")
    cfg, digest = _campaign_cfg(args)

    def report(v, res):
        print(f"{args.axis}={v}: mu = {res.dist.mu_db:.3f} dBmW^-2", flush=True)

    rows = sweep(args.axis, values, cfg, progress=None if args.quiet else report)
    os.makedirs(args.out, exist_ok=True)
    outputs = ["sweep.csv"]
    for r in rows:
        sub = f"{args.axis}={r.value}"
        r.result.metadata["manifest"] = "../manifest.json"
        write_campaign(r.result, os.path.join(args.out, sub))
        outputs += [f"{sub}/campaign.json", f"{sub}/samples.csv"]
    write_sweep(rows, os.path.join(args.out, "sweep.csv"))
    _write_manifest(args.out, args, args.config, digest, outputs)
    return 0


# -- gn ----------------------------------------------------------------------------

def _lin(db):
    return units.db_to_lin(db)


def _fmt_db(x):
    return f"{units.lin_to_db(x):.6f}"


def cmd_gn(args):
    f = args.formula
    if f == "ber-from-snr":
        snr = _lin(args.snr_db) if args.snr is None else args.snr
        print(f"{float(ber_from_snr_qpsk(snr)):.10e}")
    elif f == "q-from-ber":
        q = float(q_from_ber(args.ber))
        print(f"{q:.10g}")
    elif f == "snr":
        snr = snr_with_nli(units.dbm_to_w(args.power_dbm), units.dbm_to_w(args.p_ase_dbm),
                           units.per_mw2_to_per_w2(args.a_nl_mw2),
                           0.0 if args.p_trx_dbm is None else units.dbm_to_w(args.p_trx_dbm))
        print(_fmt_db(snr))
    elif f == "snr-spans":
        snr = snr_identical_spans(args.n, units.dbm_to_w(args.power_dbm), _lin(args.nf_db),
                                  _lin(args.gain_db), args.bandwidth_ghz * 1e9,
                                  units.per_mw2_to_per_w2(args.alpha_nl_mw2), args.epsilon)
        print(_fmt_db(snr))
    elif f == "snr-opt":
        args_ = (args.n, _lin(args.nf_db), _lin(args.gain_db), args.bandwidth_ghz * 1e9,
                 units.per_mw2_to_per_w2(args.alpha_nl_mw2), args.epsilon)
        print(_fmt_db(snr_opt(*args_)))
        if args.verbose:
            print(f"P_opt = {units.w_to_dbm(p_opt(*args_)):.4f} dBm")
    elif f == "a-nl":
        print(f"{a_nl_supralinear(args.alpha_nl_mw2, args.n, args.epsilon):.10e}")
    elif f == "delta-q2":
        dist = AnlDistribution.from_db(args.mu_db, args.sigma)
        print(f"{delta_q2_opt(dist):.6f}")
    elif f == "q2-diff":
        c = AnlDistribution.from_db(args.mu_cnlse_db, 0.0)
        m = AnlDistribution.from_db(args.mu_manakov_db, 0.0)
        print(f"{q2_opt_difference(c, m):.6f}")
    elif f == "delta-laws":
        from .campaign import empirical_delta_laws
        dmu, dsig = empirical_delta_laws(args.n_plates)
        print(f"delta_mu_mW-2={dmu:.6e} delta_sigma_mW-2={dsig:.6e}")
    elif f == "accumulate":
        doc, _ = _load_doc(args.config)
        gn = doc.get("gn", {})
        spans = gn.get("spans")
        if not spans:
            raise ConfigError("no spans listed", "gn.spans")
        link = GnLink(
            [Span(units.dbm_to_w(s.get("power_dbm", 0.0)), _lin(s.get("noise_figure_db", 5.0)),
                  _lin(s.get("gain_db", 20.0)), units.per_mw2_to_per_w2(s.get("a_nl_mw2", 0.0)))
             for s in spans],
            bandwidth=gn.get("bandwidth_ghz", 32.0) * 1e9,
            snr_trx=None if gn.get("snr_trx_db") is None else _lin(gn["snr_trx_db"]),
        )
        print(_fmt_db(inverse_snr_accumulate(link)))
    return 0


def _add_campaign_flags(p, draws=True):
    p.add_argument("config", nargs="?", help="JSON configuration file (defaults: paper setup)")
    p.add_argument("--model", choices=["cnlse", "manakov"])
    p.add_argument("--n-plates", type=int)
    p.add_argument("--seed", type=int, help="base seed")
    p.add_argument("--gamma", type=float, help="override nonlinear coefficient, 1/(W km)")
    p.add_argument("--pmd", type=float, help="override PMD coefficient, ps/sqrt(km)")
    p.add_argument("--out", default="runs/out")
    p.add_argument("--quiet", action="store_true")
    if draws:
        p.add_argument("--draws", type=int)
        p.add_argument("--workers", type=int)


def build_parser():
    ap = argparse.ArgumentParser(prog="anlsim", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="single transmission, one a_NL value")
    _add_campaign_flags(p, draws=False)
    p.add_argument("--constellation", action="store_true", help="also write constellation.csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("campaign", help="Monte Carlo campaign over birefringence draws")
    _add_campaign_flags(p)
    p.set_defaults(func=cmd_campaign)

    p = sub.add_parser("sweep", help="one campaign per value of a parameter")
    _add_campaign_flags(p)
    p.add_argument("--axis", required=True)
    p.add_argument("--values", required=True, help="comma-separated values")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gn", help="GN-model formulas")
    gsub = p.add_subparsers(dest="formula", required=True)
    p.set_defaults(func=cmd_gn)

    g = gsub.add_parser("ber-from-snr")
    grp = g.add_mutually_exclusive_group(required=True)
    grp.add_argument("--snr", type=float, help="linear")
    grp.add_argument("--snr-db", type=float)
    g = gsub.add_parser("q-from-ber")
    g.add_argument("--ber", type=float, required=True)
    g = gsub.add_parser("snr", help="P / (P_ASE + a_NL P^3 + P_TRX), printed in dB")
    g.add_argument("--power-dbm", type=float, required=True)
    g.add_argument("--p-ase-dbm", type=float, required=True)
    g.add_argument("--a-nl-mw2", type=float, required=True)
    g.add_argument("--p-trx-dbm", type=float)
    for name in ("snr-spans", "snr-opt"):
        g = gsub.add_parser(name)
        g.add_argument("--n", type=int, default=1)
        g.add_argument("--nf-db", type=float, default=5.0)
        g.add_argument("--gain-db", type=float, default=20.0)
        g.add_argument("--bandwidth-ghz", type=float, default=32.0)
        g.add_argument("--alpha-nl-mw2", type=float, default=3.95e-4)
        g.add_argument("--epsilon", type=float, default=0.22)
        if name == "snr-spans":
            g.add_argument("--power-dbm", type=float, required=True)
        else:
            g.add_argument("--verbose", action="store_true")
    g = gsub.add_parser("a-nl", help="alpha_NL N^(1+epsilon), mW^-2")
    g.add_argument("--alpha-nl-mw2", type=float, default=3.95e-4)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--epsilon", type=float, default=0.22)
    g = gsub.add_parser("delta-q2", help="optimum-Q^2 band width in dB")
    g.add_argument("--mu-db", type=float, required=True, help="mean a_NL, dBmW^-2")
    g.add_argument("--sigma", type=float, required=True, help="std of a_NL, mW^-2")
    g = gsub.add_parser("q2-diff", help="Q^2_opt(CNLSE) - Q^2_opt(Manakov), dB")
    g.add_argument("--mu-cnlse-db", type=float, required=True)
    g.add_argument("--mu-manakov-db", type=float, required=True)
    g = gsub.add_parser("delta-laws", help="empirical SMF gap laws")
    g.add_argument("--n-plates", type=float, required=True)
    g = gsub.add_parser("accumulate", help="multi-span SNR from gn.spans of a config")
    g.add_argument("config")
    return ap


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ConfigurationError, UsageError, DomainError) as exc:
        print(f"anlsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"anlsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # numerical or worker failure
        print(f"anlsim: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
