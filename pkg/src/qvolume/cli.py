"""Command-line front end: ratio estimation jobs, Bell-detection scans
and the low-level matrix checks, with JSON/CSV result artifacts."""

import json
import os
import sys
import time

import click
import numpy as np

from .basis import FAMILY_NAMES, make_family
from .bell import DEFAULT_BELL_TOL, draw_scan_settings, scan_setting_matrix
from .errors import InsufficientStatisticsError, QVolumeError
from .matio import format_entry, read_matrix
from .positivity import DEFAULT_PSD_TOL, newton_coefficients, power_traces
from .ptrans import is_ppt
from .rng import RngStream
from .samplers import (
    DEFAULT_BLOCK_SIZE,
    MultiphaseConfig,
    PREDICATE_NAMES,
    estimate_predicate_ratios,
    iterate_chain_coords,
    multiphase_estimate,
)
from .stats import combine_block_fractions

SCHEMA_VERSION = 1
_SCAN_STREAM_ID = 20_000

# Exit code 2 is reserved for insufficient statistics, so argument and
# config problems must exit 1 rather than click's default 2.
click.exceptions.UsageError.exit_code = 1

_CLI_PREDICATES = tuple(n for n in PREDICATE_NAMES if n != "true")


class IntCount(click.ParamType):
    """Integer sample counts, scientific notation accepted ("1e7")."""

    name = "count"

    def convert(self, value, param, ctx):
        if isinstance(value, int):
            return value
        try:
            f = float(value)
            i = int(f)
            if i != f:
                raise ValueError
            return i
        except (TypeError, ValueError):
            self.fail(f"{value!r} is not an integer count", param, ctx)


INT_COUNT = IntCount()


def _load_config_file(path):
    cfg = {}
    try:
        with open(path) as fh:
            for raw in fh:
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise click.UsageError(
                        f"{path}: expected key=value lines, got {line!r}")
                key, value = line.split("=", 1)
                cfg[key.strip().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise click.UsageError(f"cannot read config file: {exc}")
    return cfg


def _merge_config(ctx, config_path, values):
    """Fill in values from a key=value file; explicit flags win."""
    if not config_path:
        return values
    cfg = _load_config_file(config_path)
    params = {p.name: p for p in ctx.command.params}
    for key, raw in cfg.items():
        if key in ("config", "out"):
            continue
        if key not in params or key not in values:
            raise click.UsageError(f"unknown config key {key!r}")
        if ctx.get_parameter_source(key) is click.core.ParameterSource.DEFAULT:
            values[key] = params[key].type.convert(raw, params[key], ctx)
    return values


def _require(kw, *names):
    for name in names:
        if kw[name] is None:
            raise click.UsageError(f"missing --{name} (flag or config file)")


def _resolve_seed(seed):
    if seed is not None:
        return seed
    env = os.environ.get("QVOLUME_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise click.UsageError(f"QVOLUME_SEED={env!r} is not an integer")


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _emit_json(payload, out):
    _emit(json.dumps(payload, indent=2) + "\n", out)


def _progress(msg):
    click.echo(msg, err=True)


def _handle(exc):
    if isinstance(exc, InsufficientStatisticsError):
        _progress(f"error: {exc}")
        sys.exit(2)
    _progress(f"error: {exc}")
    sys.exit(1)


@click.group()
def main():
    """Volume-ratio and Bell-detectability estimation over bipartite
    quantum state families."""


@main.command()
@click.option("--family", type=click.Choice(FAMILY_NAMES), default=None)
@click.option("--sampler", type=click.Choice(["multiphase", "hitrun"]),
              default="hitrun", show_default=True)
@click.option("--samples", type=INT_COUNT, default=10 ** 6, show_default=True,
              help="Chain length (hitrun) or samples per phase (multiphase).")
@click.option("--block-size", type=INT_COUNT, default=DEFAULT_BLOCK_SIZE,
              show_default=True)
@click.option("--phases", type=int, default=None,
              help="Multiphase ball count; default grows with the dimension.")
@click.option("--reps", type=int, default=20, show_default=True,
              help="Multiphase repetitions.")
@click.option("--seed", type=int, default=None,
              help="Defaults to QVOLUME_SEED, then 0.")
@click.option("--chains", type=int, default=None,
              help="Hit-and-run chains; defaults to available parallelism.")
@click.option("--tol", type=float, default=DEFAULT_BELL_TOL, show_default=True,
              help="Violation-predicate tolerance.")
@click.option("--restarts", type=int, default=32, show_default=True)
@click.option("--predicate", type=click.Choice(_CLI_PREDICATES),
              default="ppt", show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]),
              default="json", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--config", type=click.Path(exists=True, dir_okay=False),
              default=None, help="key=value defaults file; flags override.")
@click.pass_context
def ratio(ctx, **kw):
    """Estimate the fraction of states satisfying a predicate."""
    kw = _merge_config(ctx, kw.pop("config"), kw)
    _require(kw, "family")
    seed = _resolve_seed(kw["seed"])
    chains = kw["chains"] if kw["chains"] is not None else (os.cpu_count() or 1)
    try:
        family = make_family(kw["family"])
        t0 = time.monotonic()
        _progress(f"ratio: family={family.name} sampler={kw['sampler']} "
                  f"predicate={kw['predicate']} samples={kw['samples']} seed={seed}")
        if kw["sampler"] == "multiphase":
            cfg = MultiphaseConfig.for_family(
                family, kw["samples"], kw["reps"], kw["phases"])
            est = multiphase_estimate(
                family, kw["predicate"], cfg, RngStream(seed),
                bell_tol=kw["tol"], restarts=kw["restarts"])
            chains = 1
        else:
            est = estimate_predicate_ratios(
                family, [kw["predicate"]], kw["samples"], kw["block_size"],
                seed, chains, bell_tol=kw["tol"],
                restarts=kw["restarts"])[kw["predicate"]]
        elapsed = time.monotonic() - t0
    except QVolumeError as exc:
        _handle(exc)
    rate = est.samples / elapsed if elapsed > 0 else float("inf")
    _progress(f"done: {est.samples} samples in {elapsed:.1f}s "
              f"({rate:.0f} states/s), "
              f"hits~{round(est.mean * est.samples)}")
    d = est.to_dict()
    payload = {
        "schema_version": SCHEMA_VERSION,
        "family": family.name,
        "sampler": d["sampler"],
        "predicate": kw["predicate"],
        "samples": d["samples"],
        "blocks": d["blocks"],
        "ratio_mean": d["ratio_mean"],
        "ratio_sigma": d["ratio_sigma"],
        "seed": d["seed"],
        "chains": d["chains"],
        "wall_seconds": round(elapsed, 3),
    }
    if "per_phase" in d:
        payload["per_phase"] = d["per_phase"]
    if kw["fmt"] == "json":
        _emit_json(payload, kw["out"])
    else:
        _emit(_ratio_csv(payload, est), kw["out"])


def _ratio_csv(payload, est):
    keys = [k for k in payload if k != "per_phase"]
    lines = [",".join(keys),
             ",".join(repr(payload[k]) if isinstance(payload[k], float)
                      else str(payload[k]) for k in keys)]
    if "per_phase" in payload:
        lines.append("rep,phase,hits")
        for rep, hits in enumerate(payload["per_phase"]):
            for phase, h in enumerate(hits):
                lines.append(f"{rep},{phase},{h}")
    elif est.block_fraction_lists is not None:
        lines.append("chain,block,fraction")
        for cid, fr in enumerate(est.block_fraction_lists):
            for b, f in enumerate(fr):
                lines.append(f"{cid},{b},{float(f)!r}")
    return "\n".join(lines) + "\n"


@main.command()
@click.option("--family", type=click.Choice(FAMILY_NAMES), default=None)
@click.option("--predicate", default=None,
              type=click.Choice(["chsh", "12m", "cg-body", "cg-opt",
                                 "cg-scan"]))
@click.option("--samples", type=INT_COUNT, default=10 ** 6, show_default=True)
@click.option("--block-size", type=INT_COUNT, default=DEFAULT_BLOCK_SIZE,
              show_default=True)
@click.option("--seed", type=int, default=None)
@click.option("--restarts", type=int, default=32, show_default=True)
@click.option("--scan-settings", type=INT_COUNT, default=100,
              show_default=True, help="Random settings per state (cg-scan).")
@click.option("--tol", type=float, default=DEFAULT_BELL_TOL, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--config", type=click.Path(exists=True, dir_okay=False),
              default=None, help="key=value defaults file; flags override.")
@click.pass_context
def bell(ctx, **kw):
    """Fraction of hit-and-run states caught by one Bell detector."""
    kw = _merge_config(ctx, kw.pop("config"), kw)
    _require(kw, "family", "predicate")
    seed = _resolve_seed(kw["seed"])
    try:
        family = make_family(kw["family"])
        t0 = time.monotonic()
        _progress(f"bell: family={family.name} predicate={kw['predicate']} "
                  f"samples={kw['samples']} seed={seed}")
        if kw["predicate"] == "cg-scan":
            mean, sigma, blocks = _scan_fraction(
                family, kw["samples"], kw["block_size"], seed,
                kw["scan_settings"], kw["tol"])
        else:
            est = estimate_predicate_ratios(
                family, [kw["predicate"]], kw["samples"], kw["block_size"],
                seed, 1, bell_tol=kw["tol"],
                restarts=kw["restarts"])[kw["predicate"]]
            mean, sigma, blocks = est.mean, est.sigma, est.blocks_or_reps
        elapsed = time.monotonic() - t0
    except QVolumeError as exc:
        _handle(exc)
    _progress(f"done: {kw['samples']} samples in {elapsed:.1f}s, "
              f"hits~{round(mean * kw['samples'])}")
    payload = {
        "schema_version": SCHEMA_VERSION,
        "predicate": kw["predicate"],
        "ratio_mean": mean,
        "ratio_sigma": sigma,
        "samples": kw["samples"],
        "config": {
            "family": family.name,
            "seed": seed,
            "restarts": kw["restarts"],
            "scan_settings": kw["scan_settings"],
            "block_size": kw["block_size"],
            "blocks": blocks,
            "tol": kw["tol"],
            "sampler": "hitrun",
        },
    }
    _emit_json(payload, kw["out"])


def _scan_first_hits(family, n_samples, seed, chsh_dirs, cg_dirs, tol,
                     sub_chunk=8192):
    """First violating setting index per state (m if never) for both
    detectors, over one hit-and-run chain."""
    m = chsh_dirs.shape[0]
    chsh_idx = []
    cg_idx = []
    for _, coords in iterate_chain_coords(family, n_samples, seed):
        for lo in range(0, coords.shape[0], sub_chunk):
            chunk = coords[lo:lo + sub_chunk]
            cb, gb = scan_setting_matrix(family, chunk, chsh_dirs, cg_dirs,
                                         tol)
            for mat, acc in ((cb, chsh_idx), (gb, cg_idx)):
                idx = np.argmax(mat, axis=1)
                idx[~mat.any(axis=1)] = m
                acc.append(idx)
    return np.concatenate(chsh_idx), np.concatenate(cg_idx)


def _block_stats_from_bits(bits, block_size):
    n_blocks = bits.shape[0] // block_size
    fr = bits[:n_blocks * block_size].reshape(n_blocks, block_size).mean(axis=1)
    return combine_block_fractions([fr])


def _scan_fraction(family, n_samples, block_size, seed, m, tol):
    settings = draw_scan_settings(m, RngStream(seed, _SCAN_STREAM_ID))
    _, cg_idx = _scan_first_hits(family, n_samples, seed, *settings, tol)
    return _block_stats_from_bits(cg_idx < m, block_size)


@main.command("scan-curve")
@click.option("--family", type=click.Choice(FAMILY_NAMES),
              default="two_qubit", show_default=True)
@click.option("--samples", type=INT_COUNT, default=10 ** 6, show_default=True)
@click.option("--seed", type=int, default=None)
@click.option("--scan-settings", type=INT_COUNT, default=1000,
              show_default=True, help="Largest settings count on the grid.")
@click.option("--grid-points", type=int, default=10, show_default=True)
@click.option("--tol", type=float, default=DEFAULT_BELL_TOL, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--config", type=click.Path(exists=True, dir_okay=False),
              default=None, help="key=value defaults file; flags override.")
@click.pass_context
def scan_curve(ctx, **kw):
    """Detected fractions vs. number of random settings (CSV)."""
    kw = _merge_config(ctx, kw.pop("config"), kw)
    seed = _resolve_seed(kw["seed"])
    try:
        family = make_family(kw["family"])
        if not family.is_two_qubit():
            raise click.UsageError(
                f"scan-curve needs a two-qubit family, got {family.name}")
        m_max = kw["scan_settings"]
        if m_max < 1 or kw["grid_points"] < 1:
            raise click.UsageError("scan-settings and grid-points must be >= 1")
        grid = sorted(set(
            int(round(g)) for g in np.geomspace(1, m_max, kw["grid_points"])))
        t0 = time.monotonic()
        _progress(f"scan-curve: family={family.name} samples={kw['samples']} "
                  f"settings={grid} seed={seed}")
        settings = draw_scan_settings(m_max, RngStream(seed, _SCAN_STREAM_ID))
        chsh_idx, cg_idx = _scan_first_hits(
            family, kw["samples"], seed, *settings, kw["tol"])
        union_idx = np.minimum(chsh_idx, cg_idx)
        n = chsh_idx.shape[0]
        lines = ["m,R_CG,R_CHSH,R_CG+CHSH"]
        for g in grid:
            r_cg = np.count_nonzero(cg_idx < g) / n
            r_ch = np.count_nonzero(chsh_idx < g) / n
            r_u = np.count_nonzero(union_idx < g) / n
            lines.append(f"{g},{r_cg!r},{r_ch!r},{r_u!r}")
        elapsed = time.monotonic() - t0
    except QVolumeError as exc:
        _handle(exc)
    _progress(f"done: {n} samples x {m_max} settings in {elapsed:.1f}s")
    _emit("\n".join(lines) + "\n", kw["out"])


@main.command("check-psd")
@click.argument("matrix_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--tol", type=float, default=DEFAULT_PSD_TOL, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def check_psd(matrix_file, tol, out):
    """Newton-coefficient positivity check of a matrix text file."""
    try:
        a = read_matrix(matrix_file)
        n = a.shape[0]
        coeffs = newton_coefficients(power_traces(a, n), n)
    except QVolumeError as exc:
        _handle(exc)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "n": n,
        "psd": bool(all(c >= -tol for c in coeffs.c[1:])),
        "coefficients": [float(c) for c in coeffs.c],
    }
    _emit_json(payload, out)


@main.command("ppt-check")
@click.argument("matrix_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--na", type=int, required=True, help="Dimension of subsystem A.")
@click.option("--nb", type=int, required=True, help="Dimension of subsystem B.")
@click.option("--tol", type=float, default=DEFAULT_PSD_TOL, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def ppt_check(matrix_file, na, nb, tol, out):
    """Positivity of the partial transpose of a matrix text file."""
    try:
        a = read_matrix(matrix_file)
        result = is_ppt(a, na, nb, tol)
    except QVolumeError as exc:
        _handle(exc)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "n": a.shape[0],
        "n_a": na,
        "n_b": nb,
        "ppt": bool(result),
    }
    _emit_json(payload, out)


@main.command("basis-dump")
@click.option("--family", required=True, type=click.Choice(FAMILY_NAMES))
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def basis_dump(family, out):
    """Generators and scales of a state family as JSON."""
    try:
        fam = make_family(family)
    except QVolumeError as exc:
        _handle(exc)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "family": fam.name,
        "n": fam.n,
        "n_a": fam.n_a,
        "n_b": fam.n_b,
        "d": fam.d,
        "scales": [float(s) for s in fam.scales],
        "generators": [
            [[format_entry(z) for z in row] for row in g]
            for g in fam.generators
        ],
    }
    _emit_json(payload, out)


if __name__ == "__main__":
    main()
