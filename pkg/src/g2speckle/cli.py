"""Command-line front end.

Exit codes: 0 success, 1 I/O failure, 2 usage error, 3 verification failure.

Every subcommand accepts ``--config FILE``, a flat TOML document whose keys
are the long flag names with dashes turned into underscores
(``n_theta = 180``, ``s = [1e-6, 1e-5]``). Flags given on the command line
win over the file.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from . import __version__, _backend
from .errors import (
    ConfigParseError,
    DegenerateInputError,
    FitError,
    InvalidArgumentError,
    ResourceLimitError,
)

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2, 3

AXES = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# {{{ argument helpers


def _floats(text):
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    if isinstance(text, (int, float)):
        return [float(text)]
    try:
        return [float(v) for v in str(text).replace(" ", "").split(",") if v]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}")


def _ints(text):
    if isinstance(text, (list, tuple)):
        vals = list(text)
    elif isinstance(text, int):
        vals = [text]
    else:
        vals = [v for v in str(text).replace(" ", "").split(",") if v]
    try:
        return [int(v) for v in vals]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}")


def _vec3(text, name):
    if isinstance(text, str) and text.lower() in AXES:
        return AXES[text.lower()]
    v = _floats(text)
    if len(v) != 3:
        raise UsageError(f"{name}: expected x, y, z or three comma-separated numbers, got {text!r}")
    return tuple(v)


def _global_parent():
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    g.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores)")
    g.add_argument("--out", default=None, help="output path (default: stdout)")
    g.add_argument("--config", default=None, help="flat TOML file with flag values")
    g.add_argument(
        "--degrees", action="store_true", default=None, help="read angles given on flags as degrees"
    )
    return p


DEFAULTS = {
    "seed": 0,
    "threads": None,
    "out": None,
    "degrees": False,
    # gen
    "n": 100,
    "spacing": 1.0,
    "axis": "x",
    "diameter": 6 * math.pi,
    "counts": None,
    # map / scan / extrema
    "geometry": None,
    "s": None,
    "n_theta": 180,
    "n_phi": 360,
    "orders": "2",
    "laser": "z",
    "laser_angles": None,
    "normal": "y",
    "n_points": 720,
    "which": "both",
    "m": 2,
    "levels": 5,
    "candidates": 64,
    # sweep
    "kind": "ball",
    "realizations": 1,
    "statistic": "max_g2",
    "fit_window": None,
    "fit_out": None,
    "n_seeds": 10,
    "reduce": "median",
    # fit
    "table": None,
    "model": "power",
    "window": None,
    # verify
    "level": "fast",
    "dump_partitions": None,
    "mutate": None,
}


def build_parser():
    parent = _global_parent()
    parser = _Parser(prog="g2speckle", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"g2speckle {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def add(name, help_):
        return sub.add_parser(name, parents=[parent], help=help_, argument_default=None)

    p = add("gen", "generate an emitter configuration")
    p.add_argument("geometry_kind", choices=["chain", "lattice2d", "lattice3d", "ball"])
    p.add_argument("--n", type=int, help="number of emitters (chain, ball)")
    p.add_argument("--spacing", type=float, help="chain/lattice spacing (k * distance)")
    p.add_argument("--axis", help="chain axis: x, y, z or 'ax,ay,az'")
    p.add_argument("--diameter", type=float, help="ball diameter (k * length)")
    p.add_argument("--counts", help="lattice counts per axis, e.g. 4,5")

    def add_drive(p, many=False):
        p.add_argument("--geometry", help="geometry JSON written by 'gen'")
        p.add_argument("--s", help="saturation parameter" + (" list" if many else ""))
        p.add_argument("--laser", help="laser direction: x, y, z or 'kx,ky,kz' (default z)")
        p.add_argument("--laser-angles", help="laser direction as 'theta,phi' (overrides --laser)")

    p = add("map", "full angular map over (theta, phi)")
    add_drive(p)
    p.add_argument("--n-theta", type=int)
    p.add_argument("--n-phi", type=int)
    p.add_argument("--orders", help="correlation orders, e.g. 2,3")

    p = add("scan", "great-circle scan through the laser direction")
    add_drive(p)
    p.add_argument("--normal", help="plane normal: x, y, z or 'nx,ny,nz' (default y: xz-plane)")
    p.add_argument("--n-points", type=int)
    p.add_argument("--orders", help="correlation orders, e.g. 2,3")

    p = add("extrema", "max/min of g^(m) over all directions")
    add_drive(p, many=True)
    p.add_argument("--which", choices=["max", "min", "both"])
    p.add_argument("--m", type=int)
    p.add_argument("--n-theta", type=int)
    p.add_argument("--n-phi", type=int)
    p.add_argument("--levels", type=int)
    p.add_argument("--candidates", type=int)

    p = add("sweep", "ensemble scaling table plus power-law fit")
    p.add_argument("--kind", choices=["ball", "chain", "lattice2d", "lattice3d"])
    p.add_argument("--n", help="emitter count list")
    p.add_argument("--diameter", type=float)
    p.add_argument("--spacing", type=float)
    p.add_argument("--s", help="saturation parameter list")
    p.add_argument("--laser", help="laser direction: x, y, z or 'kx,ky,kz' (default z)")
    p.add_argument("--laser-angles", help="laser direction as 'theta,phi' (overrides --laser)")
    p.add_argument("--realizations", type=int)
    p.add_argument("--statistic", choices=["max_g2", "min_g2", "S2k_at_dest", "antibunch_expr"])
    p.add_argument("--fit-window", help="'lo,hi' range of control values used by the fit")
    p.add_argument("--fit-out", help="fit JSON path (default: <out>.fit.json, or stdout)")
    p.add_argument("--n-theta", type=int)
    p.add_argument("--n-phi", type=int)
    p.add_argument("--levels", type=int)
    p.add_argument("--candidates", type=int)
    p.add_argument("--n-seeds", type=int)
    p.add_argument("--reduce", choices=["median", "min", "mean"])

    p = add("fit", "fit a scaling table CSV")
    p.add_argument("--table", help="table CSV written by 'sweep'")
    p.add_argument("--model", choices=["power", "composite"])
    p.add_argument("--window", help="'lo,hi' range of control values")

    p = add("verify", "oracle and identity checks")
    p.add_argument("--level", choices=["fast", "full"])
    p.add_argument("--dump-partitions", type=int, metavar="M", help="print the partition table of M as JSON")
    p.add_argument("--mutate", help=argparse.SUPPRESS)
    return parser


def _load_toml(path):
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigParseError(f"{path}: {exc}") from exc


def resolve(args, parser_actions) -> dict:
    """Merge defaults < config file < command-line flags into one flat dict."""
    given = {k: v for k, v in vars(args).items() if v is not None}
    file_vals = {}
    if given.get("config"):
        file_vals = _load_toml(given["config"])
        bad = sorted(k for k in file_vals if k not in parser_actions or isinstance(file_vals[k], dict))
        if bad:
            raise UsageError(f"--config: unknown or nested keys for '{args.command}': {', '.join(bad)}")
    cfg = {k: DEFAULTS.get(k) for k in parser_actions if k in DEFAULTS}
    cfg.update(file_vals)
    cfg.update(given)
    cfg["command"] = args.command
    cfg["_set"] = frozenset(file_vals) | frozenset(given)
    return cfg


def _echo(cfg):
    """Resolved config as echoed into output headers (no file-layout keys)."""
    return {k: v for k, v in sorted(cfg.items()) if k not in ("config", "out", "fit_out", "threads", "_set")}


# }}}


def _emit(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _angle(v, cfg):
    return math.radians(v) if cfg.get("degrees") else v


def _laser(cfg):
    from .analysis.grid import directions

    if cfg.get("laser_angles") is not None:
        a = _floats(cfg["laser_angles"])
        if len(a) != 2:
            raise UsageError("--laser-angles: expected 'theta,phi'")
        return tuple(float(c) for c in directions(_angle(a[0], cfg), _angle(a[1], cfg)))
    v = np.asarray(_vec3(cfg["laser"], "--laser"), float)
    nrm = np.linalg.norm(v)
    if not nrm > 0:
        raise UsageError("--laser: direction must be non-zero")
    return tuple(float(c) for c in v / nrm)


def _geometry(cfg):
    from .geometry import load_config

    if not cfg.get("geometry"):
        raise UsageError("--geometry is required")
    return load_config(cfg["geometry"])


def _s_list(cfg, required=True):
    if cfg.get("s") is None:
        if required:
            raise UsageError("--s is required")
        return []
    vals = _floats(cfg["s"])
    if required and not vals:
        raise UsageError("--s: empty list")
    return vals


def _search_grid(cfg):
    """Explicit grid if either resolution was set, else the search's own default."""
    from .analysis.grid import AngularGrid

    if {"n_theta", "n_phi"} & cfg["_set"]:
        return AngularGrid(cfg["n_theta"], cfg["n_phi"])
    return None


def _window(text, name):
    if text is None:
        return None
    w = _floats(text)
    if len(w) != 2 or not w[0] <= w[1]:
        raise UsageError(f"{name}: expected 'lo,hi' with lo <= hi")
    return tuple(w)


# {{{ subcommands


def cmd_gen(cfg):
    from .geometry import generate_chain, generate_lattice, sample_ball, dumps_config

    kind = cfg["geometry_kind"]
    if kind == "chain":
        axis = cfg["axis"]
        if isinstance(axis, str) and "," not in axis and axis.lower() not in AXES:
            raise UsageError(f"--axis: invalid choice {axis!r} (choose from x, y, z or 'ax,ay,az')")
        conf = generate_chain(cfg["n"], cfg["spacing"], _vec3(axis, "--axis"))
    elif kind == "ball":
        conf = sample_ball(cfg["n"], cfg["diameter"], cfg["seed"])
    else:
        dims = 2 if kind == "lattice2d" else 3
        counts = _ints(cfg["counts"]) if cfg.get("counts") is not None else None
        if counts is None or len(counts) != dims:
            raise UsageError(f"--counts: {kind} needs {dims} comma-separated counts")
        conf = generate_lattice(counts, [cfg["spacing"]] * dims)
    _emit(dumps_config(conf), cfg["out"])
    msg = f"N={conf.n} kind={conf.kind.value} bounding_radius={conf.bounding_radius():.12g}"
    print(msg, file=sys.stderr if cfg["out"] in (None, "-") else sys.stdout)
    return EXIT_OK


def cmd_map(cfg):
    from .analysis.export import map_csv
    from .analysis.grid import AngularGrid, map_data
    from .correlations import DriveParams

    conf = _geometry(cfg)
    s = _s_list(cfg)
    if len(s) != 1:
        raise UsageError("--s: map takes a single saturation parameter")
    drive = DriveParams(s[0], _laser(cfg))
    md = map_data(conf, drive, AngularGrid(cfg["n_theta"], cfg["n_phi"]), _ints(cfg["orders"]))
    _emit(map_csv(md, config=_echo(cfg), master_seed=cfg["seed"]), cfg["out"])
    return EXIT_OK


def cmd_scan(cfg):
    from .analysis.export import map_csv
    from .analysis.grid import plane_scan
    from .correlations import DriveParams

    conf = _geometry(cfg)
    s = _s_list(cfg)
    if len(s) != 1:
        raise UsageError("--s: scan takes a single saturation parameter")
    drive = DriveParams(s[0], _laser(cfg))
    md = plane_scan(conf, drive, _vec3(cfg["normal"], "--normal"), cfg["n_points"], _ints(cfg["orders"]))
    _emit(map_csv(md, config=_echo(cfg), master_seed=cfg["seed"]), cfg["out"])
    return EXIT_OK


def cmd_extrema(cfg):
    from .analysis.export import _f, metadata_lines
    from .analysis.search import sphere_extrema

    conf = _geometry(cfg)
    s_vals = _s_list(cfg)
    which = ("max", "min") if cfg["which"] == "both" else (cfg["which"],)
    for s in s_vals:
        if not s > 0:
            raise UsageError("--s: values must be > 0")
    grid = _search_grid(cfg)
    res = sphere_extrema(
        conf, s_vals, _laser(cfg), cfg["m"], which, grid=grid, levels=cfg["levels"], n_candidates=cfg["candidates"]
    )
    lines = metadata_lines(_echo(cfg), cfg["seed"])
    lines.append("s,which,value,coarse_value,theta,phi,kx,ky,kz")
    for i, s in enumerate(s_vals):
        for w in which:
            e = res[w][i]
            lines.append(
                ",".join([_f(s), w] + [_f(v) for v in (e.value, e.coarse_value, e.theta, e.phi, *e.k_obs)])
            )
    _emit("\n".join(lines) + "\n", cfg["out"])
    return EXIT_OK


def cmd_sweep(cfg):
    from .analysis.ensemble import (
        CONDITION_STATISTICS,
        GeometryRecipe,
        fit_table,
        n_sweep,
        s_sweep,
    )
    from .analysis.export import fit_json, table_csv

    stat = cfg["statistic"]
    n_list = _ints(cfg["n"]) if cfg.get("n") is not None else []
    if not n_list:
        raise UsageError("--n: empty list")
    if cfg["realizations"] < 1:
        raise UsageError("--realizations must be >= 1")
    recipe = GeometryRecipe(cfg["kind"], n_list[0], cfg["diameter"], cfg["spacing"])
    kl = _laser(cfg)
    grid = _search_grid(cfg)
    if stat in CONDITION_STATISTICS:
        if len(n_list) < 2:
            raise UsageError("--n: an N-sweep needs at least two values")
        kw = dict(n_seeds=cfg["n_seeds"], reduce=cfg["reduce"])
        if grid is not None:
            kw["grid"] = grid
        table = n_sweep(recipe, n_list, cfg["realizations"], cfg["seed"], (stat,), kl, **kw)[stat]
    else:
        s_vals = _s_list(cfg)
        if len(n_list) != 1:
            raise UsageError("--n: an s-sweep takes a single N")
        kw = dict(levels=cfg["levels"], n_candidates=cfg["candidates"])
        if grid is not None:
            kw["grid"] = grid
        table = s_sweep(recipe, s_vals, cfg["realizations"], cfg["seed"], (stat,), kl, **kw)[stat]
    window = _window(cfg.get("fit_window"), "--fit-window")
    text = table_csv(table, config=_echo(cfg), master_seed=cfg["seed"], extra={"recipe": recipe.to_dict()})
    _emit(text, cfg["out"])
    if len(table.rows) >= (3 if stat == "antibunch_expr" else 2):
        fit = fit_table(table, window)
        fit_path = cfg.get("fit_out") or (None if cfg["out"] in (None, "-") else f"{cfg['out']}.fit.json")
        text = fit_json(fit, statistic=stat, window=window)
        if fit_path is None:
            sys.stderr.write(text)
        else:
            _emit(text, fit_path)
    return EXIT_OK


def cmd_fit(cfg):
    from .analysis.export import fit_json, read_csv
    from .analysis.fitting import composite_fit, power_law_fit

    if not cfg.get("table"):
        raise UsageError("--table is required")
    try:
        text = Path(cfg["table"]).read_text()
    except OSError as exc:
        raise OSError(f"cannot read {cfg['table']}: {exc.strerror or exc}") from exc
    _, header, rows = read_csv(text)
    if header is None or "control" not in header or "mean" not in header:
        raise UsageError("--table: not a scaling table (needs control and mean columns)")
    x = rows[:, header.index("control")]
    y = rows[:, header.index("mean")]
    window = _window(cfg.get("window"), "--window")
    if window is not None:
        keep = (x >= window[0]) & (x <= window[1])
        x, y = x[keep], y[keep]
    fit = composite_fit(x, y) if cfg["model"] == "composite" else power_law_fit(x, y)
    _emit(fit_json(fit, model=cfg["model"], window=window), cfg["out"])
    return EXIT_OK


def cmd_verify(cfg):
    from . import verify

    if cfg.get("dump_partitions") is not None:
        from .structure import enumerate_partitions

        terms = enumerate_partitions(cfg["dump_partitions"])
        _emit(json.dumps([t.as_dict() for t in terms], indent=2) + "\n", cfg["out"])
        return EXIT_OK
    ok = verify.run(cfg["level"], seed=cfg["seed"], mutate=cfg.get("mutate"), stream=sys.stdout)
    return EXIT_OK if ok else EXIT_VERIFY


COMMANDS = {
    "gen": cmd_gen,
    "map": cmd_map,
    "scan": cmd_scan,
    "extrema": cmd_extrema,
    "sweep": cmd_sweep,
    "fit": cmd_fit,
    "verify": cmd_verify,
}


# }}}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        dests = {a.dest for a in sub._actions if a.dest != "help"}
        cfg = resolve(args, dests)
        if cfg.get("threads"):
            _backend.set_threads(cfg["threads"])
        return COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except (InvalidArgumentError, DegenerateInputError, ResourceLimitError, FitError) as exc:
        print(f"g2speckle: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigParseError as exc:
        # unreadable input file content counts as an I/O failure
        print(f"g2speckle: cannot parse input: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"g2speckle: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
