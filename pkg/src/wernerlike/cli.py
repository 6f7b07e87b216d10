"""Command-line pipeline: metrics, simulate, reconstruct, wigner, verify.

Configuration is a flat key = value text file; unknown keys are rejected.
Every output file embeds the sha256 hash of the canonical config text plus
the seed, and ``verify`` re-derives and checks those hashes.

Exit codes: 0 success, 1 validation error, 2 I/O error, 3 numerical failure.
"""

import argparse
import hashlib
import json
import os
import sys
from contextlib import contextmanager
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import montecarlo, states, tomography, trapsim, wigner
from .tomography import SingularSystemError, TomographySettings

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_NUMERICAL = 3

LOCK_NAME = ".wernerlike.lock"
SETTING_GROUP_NAMES = ("diagonal", "real-part", "imag-part")


class ConfigError(ValueError):
    """Bad configuration file or command line."""


@dataclass(frozen=True)
class RunConfig:
    alpha: float = 0.7
    cutoff: int = 32
    beta_abs: float = 0.6
    n_max: int = 31
    n_cutoff: int = 31
    n_phases: int = 96
    events_per_phase: int = 10000
    eta: float = 0.9
    seed: int = 20260801
    backend: str = "density"

    _TYPES = {
        "alpha": float,
        "cutoff": int,
        "beta_abs": float,
        "n_max": int,
        "n_cutoff": int,
        "n_phases": int,
        "events_per_phase": int,
        "eta": float,
        "seed": int,
        "backend": str,
    }

    @classmethod
    def from_file(cls, path):
        values = {}
        try:
            text = Path(path).read_text()
        except OSError:
            raise
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key not in cls._TYPES:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if key in values:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            try:
                values[key] = cls._TYPES[key](value)
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: cannot parse {key} value {value!r}")
        return cls(**values).validate()

    def to_text(self):
        lines = [f"{f.name} = {getattr(self, f.name)}" for f in fields(self)]
        return "\n".join(lines) + "\n"

    def config_hash(self):
        return hashlib.sha256(self.to_text().encode()).hexdigest()

    def settings(self, theta=0.0, phi_spin=0.0):
        return TomographySettings(
            theta=theta,
            phi_spin=phi_spin,
            beta_abs=self.beta_abs,
            n_phases=self.n_phases,
            n_max=self.n_max,
            n_cutoff=self.n_cutoff,
            eta=self.eta,
        )

    def validate(self):
        if self.alpha < 0:
            raise ConfigError("alpha must be nonnegative")
        if self.cutoff < 2:
            raise ConfigError("cutoff must be at least 2")
        if self.backend not in ("density", "trap"):
            raise ConfigError(f"backend must be 'density' or 'trap', got {self.backend!r}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in an unsigned 64-bit integer")
        if self.events_per_phase < 1:
            raise ConfigError("events_per_phase must be positive")
        try:
            self.settings()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return self

    def truth_state(self):
        return states.build_hybrid_mixture(self.alpha, self.cutoff)


@contextmanager
def output_lock(outdir):
    path = Path(outdir) / LOCK_NAME
    try:
        fd = os.open(path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise OSError(
            f"output directory {outdir} is in use (lock file {path}; remove it if stale)"
        )
    try:
        os.write(fd, str(os.getpid()).encode())
        yield
    finally:
        os.close(fd)
        path.unlink(missing_ok=True)


def _stamp(config):
    return {"config_hash": config.config_hash(), "seed": config.seed}


def _stamp_comments(config):
    return [f"config_hash={config.config_hash()}", f"seed={config.seed}"]


def _record_path(outdir, index):
    return Path(outdir) / f"records_g{index}.jsonl"


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------

def cmd_metrics(config, args):
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    with output_lock(outdir):
        table = states.metric_sweep(args.alpha_min, args.alpha_max, args.steps)
        alpha_star = states.fidelity_threshold()
        star_row = np.array([states.metric_row(alpha_star)])
        pos = int(np.searchsorted(table[:, 0], alpha_star))
        table = np.insert(table, pos, star_row, axis=0)
        csv_path = outdir / "metrics.csv"
        states.write_metrics_csv(
            csv_path,
            table,
            comments=_stamp_comments(config) + [f"fidelity_threshold_alpha={alpha_star:.17g}"],
        )
        meta = {
            "fidelity_threshold_alpha": alpha_star,
            "classical_fidelity": states.CLASSICAL_FIDELITY,
            "rows": int(table.shape[0]),
            "monotonicity": states.sweep_monotonicity(table),
            **_stamp(config),
        }
        (outdir / "metrics_meta.json").write_text(json.dumps(meta))
    print(f"wrote {csv_path} ({table.shape[0]} rows); threshold alpha = {alpha_star:.4f}")
    return EXIT_OK


def cmd_simulate(config, args):
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    with output_lock(outdir):
        targets = [_record_path(outdir, i) for i in range(3)] + [outdir / "manifest.json"]
        if not args.force:
            existing = [str(p) for p in targets if p.exists()]
            if existing:
                raise ConfigError(
                    f"refusing to overwrite {', '.join(existing)}; pass --force to allow"
                )
        files = []
        for i, angles in enumerate(tomography.standard_setting_angles()):
            settings = config.settings(*angles)
            if config.backend == "trap":
                records = trapsim.simulate_trap_acquisition(
                    config.alpha, settings, config.events_per_phase, config.seed,
                    dim=config.cutoff, setting_index=i,
                )
            else:
                records = montecarlo.simulate_acquisition(
                    config.truth_state(), settings, config.events_per_phase,
                    config.seed, setting_index=i,
                )
            path = _record_path(outdir, i)
            montecarlo.write_records(path, records)
            files.append(
                {
                    "path": path.name,
                    "group": SETTING_GROUP_NAMES[i],
                    "theta": angles[0],
                    "phi_spin": angles[1],
                }
            )
        manifest = {
            "config_text": config.to_text(),
            "backend": config.backend,
            "files": files,
            **_stamp(config),
        }
        (outdir / "manifest.json").write_text(json.dumps(manifest))
    print(f"wrote {len(files)} record groups and manifest to {outdir}")
    return EXIT_OK


def _load_marginals(config, records_dir):
    datas = []
    for i, angles in enumerate(tomography.standard_setting_angles()):
        path = _record_path(records_dir, i)
        if not path.exists():
            raise ConfigError(
                f"missing record group with (theta, phi_spin) = "
                f"({angles[0]:.6g}, {angles[1]:.6g}) (expected file {path})"
            )
        datas.append(montecarlo.estimate_marginals(montecarlo.read_records(path)))
    return datas


def cmd_reconstruct(config, args):
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    records_dir = Path(args.records) if args.records else outdir
    with output_lock(outdir):
        base = config.settings()
        truth = config.truth_state()
        if args.exact:
            datas = [
                tomography.exact_marginal_data(truth, config.settings(*angles))
                for angles in tomography.standard_setting_angles()
            ]
        else:
            datas = _load_marginals(config, records_dir)
        estimate = tomography.reconstruct_full(datas, base)
        report = tomography.error_report(estimate, truth) if args.truth else None
        extra = {
            "backend": config.backend,
            "exact_marginals": bool(args.exact),
            "truth_comparison": report,
            **_stamp(config),
        }
        out_path = outdir / "reconstruction.json"
        tomography.write_estimate_json(out_path, estimate, extra)
        lines = [
            f"reconstruction written to {out_path}",
            f"trace(uu) = {np.trace(estimate.uu.values).real:+.6f}"
            f"  trace(dd) = {np.trace(estimate.dd.values).real:+.6f}",
            f"trace(ud) = {np.trace(estimate.ud.values):+.6f}",
            "order  sigma_max      cond        dropped",
        ]
        for diag in estimate.uu.orders:
            lines.append(
                f"r={diag['r']:<4d} {diag['sigma_max']:<13.4e} {diag['cond']:<11.3e}"
                f" {diag['dropped']}"
            )
        if report is not None:
            for name in ("uu", "dd", "ud"):
                lines.append(
                    f"block {name}: max |error| = {report[name]['max_abs_error']:.3e},"
                    f" within 3 sigma = {report[name]['within_3sigma']:.3f}"
                )
            lines.append(f"pooled within 3 sigma = {report['pooled_within_3sigma']:.4f}")
        summary = "\n".join(lines) + "\n"
        (outdir / "summary.txt").write_text(
            f"# config_hash={config.config_hash()} seed={config.seed}\n" + summary
        )
    print(summary, end="")
    return EXIT_OK


def cmd_wigner(config, args):
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    with output_lock(outdir):
        re_axis, im_axis = wigner.default_axes(
            config.alpha, re_pad=args.re_pad, spacing=args.spacing, im_extent=args.im_extent
        )
        truth = config.truth_state()
        sources = {}
        if args.source in ("true", "both"):
            sources["true"] = {name: getattr(truth, name) for name in wigner.BLOCK_NAMES}
        if args.source in ("recon", "both"):
            recon_path = Path(args.reconstruction) if args.reconstruction else outdir / "reconstruction.json"
            if not recon_path.exists():
                raise ConfigError(f"no reconstruction file at {recon_path}")
            estimate, _ = tomography.load_estimate_json(recon_path)
            st = estimate.to_state()
            sources["recon"] = {name: getattr(st, name) for name in wigner.BLOCK_NAMES}
        grids = {}
        meta = {"spacing": args.spacing, **_stamp(config)}
        for tag, blocks in sources.items():
            expected = {
                "uu": np.trace(blocks["uu"]),
                "dd": np.trace(blocks["dd"]),
                "ud": np.trace(blocks["ud"]),
            }
            grid = wigner.wigner_grid(blocks, re_axis, im_axis, expected_traces=expected)
            grids[tag] = grid
            path = outdir / f"wigner_{tag}.csv"
            wigner.write_grid_csv(path, grid, comments=_stamp_comments(config))
            x, y = grid.line_profile("uu", 0.0)
            meta[tag] = {
                "normalization_ok": grid.meta.get("normalization_ok"),
                "normalization": grid.meta.get("normalization"),
                "uu_profile_maxima": wigner.profile_maxima(x, y.real),
                "file": path.name,
            }
        if len(grids) == 2:
            gap = max(
                float(np.max(np.abs(grids["true"].blocks[n] - grids["recon"].blocks[n])))
                for n in wigner.BLOCK_NAMES
            )
            meta["max_pointwise_gap"] = gap
        (outdir / "wigner_meta.json").write_text(json.dumps(meta))
    print(f"wigner export complete: {', '.join(sorted(grids))} -> {outdir}")
    return EXIT_OK


def cmd_verify(config, args):
    outdir = Path(args.out)
    manifest_path = outdir / "manifest.json"
    problems = []
    checked = 0
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text())
        text = manifest.get("config_text", "")
        rehash = hashlib.sha256(text.encode()).hexdigest()
        checked += 1
        if rehash != manifest.get("config_hash"):
            problems.append("manifest config_hash does not match its config_text")
        expected = manifest.get("config_hash")
    else:
        expected = config.config_hash()
    for path in sorted(outdir.glob("*.json")):
        if path.name == "manifest.json":
            continue
        payload = json.loads(path.read_text())
        if "config_hash" in payload:
            checked += 1
            if payload["config_hash"] != expected:
                problems.append(f"{path.name}: config_hash mismatch")
    for path in sorted(outdir.glob("*.csv")):
        head = path.read_text().splitlines()[:4]
        stamps = [line for line in head if line.startswith("# config_hash=")]
        if stamps:
            checked += 1
            if stamps[0].split("=", 1)[1] != expected:
                problems.append(f"{path.name}: config_hash mismatch")
    if checked == 0:
        raise ConfigError(f"nothing to verify under {outdir}")
    if problems:
        for p in problems:
            print(f"verify: {p}", file=sys.stderr)
        return EXIT_VALIDATION
    print(f"verify: {checked} hash stamps consistent under {outdir}")
    return EXIT_OK


# ----------------------------------------------------------------------
# argument parsing and dispatch
# ----------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser():
    parser = _Parser(prog="wernerlike", description=__doc__)
    parser.add_argument("--config", help="path to a key = value config file")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--out", default="out", help="output directory (default: out)")
    parser.add_argument("--force", action="store_true", help="allow overwriting outputs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("metrics", help="entropy/negativity/fidelity sweep to CSV")
    p.add_argument("--alpha-min", type=float, default=0.0)
    p.add_argument("--alpha-max", type=float, default=3.0)
    p.add_argument("--steps", type=int, default=61)

    sub.add_parser("simulate", help="write record files for the three setting groups")

    p = sub.add_parser("reconstruct", help="invert record files into block estimates")
    p.add_argument("--records", help="directory with records_g*.jsonl (default: --out)")
    p.add_argument("--exact", action="store_true",
                   help="use exact marginals instead of record files")
    p.add_argument("--no-truth", dest="truth", action="store_false",
                   help="skip the comparison against the configured true state")

    p = sub.add_parser("wigner", help="export Wigner surfaces to CSV")
    p.add_argument("--source", choices=("true", "recon", "both"), default="true")
    p.add_argument("--spacing", type=float, default=0.1)
    p.add_argument("--re-pad", type=float, default=3.0)
    p.add_argument("--im-extent", type=float, default=3.0)
    p.add_argument("--reconstruction", help="path to reconstruction.json")

    sub.add_parser("verify", help="check embedded config hashes")
    return parser


_COMMANDS = {
    "metrics": cmd_metrics,
    "simulate": cmd_simulate,
    "reconstruct": cmd_reconstruct,
    "wigner": cmd_wigner,
    "verify": cmd_verify,
}


def run(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    config = RunConfig.from_file(args.config) if args.config else RunConfig().validate()
    if args.seed is not None:
        config = replace(config, seed=args.seed).validate()
    return _COMMANDS[args.command](config, args)


def main(argv=None):
    try:
        return run(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SingularSystemError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
