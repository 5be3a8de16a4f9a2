"""Config-driven command line front end.

A run config is a JSON object::

    {
      "coefficient": {"generator": "constant-disk", "params": {"k": 0.3}},
      "domain": null,
      "solver": {"grid": 256, "box": 4.0, "tol": 1e-10, "max_iter": 200},
      "grunsky": {"N_list": [4, 8, 16, 32], "R": null},
      "degeneration": {"m_list": [1, 2, 4, 8, 16, 32], "xi_cut": null},
      "stages": ["teichmuller", "grunsky", "pairing", "degeneration"],
      "k_L": null,
      "outputs": {"dir": null, "formats": ["json", "csv"]}
    }

``domain`` is a DomainSpec object ``{"kind": ..., "params": {...}}`` and
defaults to the support of the coefficient.  ``degeneration.xi_cut`` is an
absolute cut-off for every m; when null each m uses 40 m.

``run`` writes report.json (config echo and results), kappa.csv
(N,kappa_N,gap) and degeneration.csv (m,re,im,abs,gap,tail_bound).  Exit
status is 0 on success, 2 on a validation error and 3 when a numerical stage
fails.  Nothing is written unless every stage succeeds.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from typing import Optional

from . import __version__
from . import geometry as geo
from .coefficients import build_coefficient
from .errors import ComparisonError, InadmissibleError, QCError, SchemaError
from .functionals import StageError, equality_report

STAGES = ("teichmuller", "grunsky", "pairing", "degeneration")
FORMATS = ("json", "csv")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3


def _positive(x, name, integer=False, allow_none=False):
    if x is None and allow_none:
        return None
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise SchemaError(f"{name} must be a number")
    if integer and (float(x) != int(x)):
        raise SchemaError(f"{name} must be an integer")
    if not (math.isfinite(x) and x > 0):
        raise SchemaError(f"{name} must be positive")
    return int(x) if integer else float(x)


def _increasing(seq, name):
    if not isinstance(seq, list):
        raise SchemaError(f"{name} must be a list")
    vals = [_positive(v, name, integer=True) for v in seq]
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise SchemaError(f"{name} must be strictly increasing")
    return vals


def _section(d, key):
    sec = d.get(key, {})
    if sec is None:
        sec = {}
    if not isinstance(sec, dict):
        raise SchemaError(f"{key} must be an object")
    return sec


@dataclass
class RunConfig:
    coefficient: dict
    domain: Optional[dict] = None
    grid: int = 256
    box: float = 4.0
    tol: float = 1e-10
    max_iter: int = 200
    N_list: list = field(default_factory=lambda: [4, 8, 16, 32])
    R: Optional[float] = None
    m_list: list = field(default_factory=lambda: [1, 2, 4, 8, 16, 32])
    xi_cut: Optional[float] = None
    stages: list = field(default_factory=lambda: list(STAGES))
    k_L: Optional[float] = None
    out_dir: Optional[str] = None
    formats: list = field(default_factory=lambda: list(FORMATS))

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise SchemaError("config must be a JSON object")
        known = {"coefficient", "domain", "solver", "grunsky", "degeneration",
                 "stages", "k_L", "outputs"}
        extra = set(d) - known
        if extra:
            raise SchemaError(f"unknown config keys: {', '.join(sorted(extra))}")
        coef = d.get("coefficient")
        if not isinstance(coef, dict) or "generator" not in coef:
            raise SchemaError("coefficient must be {\"generator\": ..., \"params\": {...}}")
        coef = {"generator": coef["generator"], "params": copy.deepcopy(coef.get("params") or {})}
        dom = d.get("domain")
        if dom is not None:
            try:
                dom = geo.DomainSpec.from_dict(dom).to_dict()
            except (KeyError, TypeError, ValueError) as exc:
                raise SchemaError(f"bad domain: {exc}") from exc
        sol, gr, dg, out = (_section(d, k) for k in ("solver", "grunsky", "degeneration", "outputs"))
        stages = d.get("stages", list(STAGES))
        if not isinstance(stages, list) or any(s not in STAGES for s in stages):
            raise SchemaError(f"stages must be a list drawn from {', '.join(STAGES)}")
        formats = out.get("formats", list(FORMATS))
        if not isinstance(formats, list) or any(f not in FORMATS for f in formats):
            raise SchemaError(f"formats must be a list drawn from {', '.join(FORMATS)}")
        k_L = d.get("k_L")
        if k_L is not None:
            if isinstance(k_L, bool) or not isinstance(k_L, (int, float)) or not 0 <= k_L < 1:
                raise SchemaError("k_L must lie in [0, 1)")
            k_L = float(k_L)
        out_dir = out.get("dir")
        if out_dir is not None and not isinstance(out_dir, str):
            raise SchemaError("outputs.dir must be a string")
        return cls(
            coefficient=coef, domain=dom,
            grid=_positive(sol.get("grid", 256), "solver.grid", integer=True),
            box=_positive(sol.get("box", 4.0), "solver.box"),
            tol=_positive(sol.get("tol", 1e-10), "solver.tol"),
            max_iter=_positive(sol.get("max_iter", 200), "solver.max_iter", integer=True),
            N_list=_increasing(gr.get("N_list", [4, 8, 16, 32]), "grunsky.N_list"),
            R=_positive(gr.get("R"), "grunsky.R", allow_none=True),
            m_list=_increasing(dg.get("m_list", [1, 2, 4, 8, 16, 32]), "degeneration.m_list"),
            xi_cut=_positive(dg.get("xi_cut"), "degeneration.xi_cut", allow_none=True),
            stages=[s for s in STAGES if s in stages], k_L=k_L, out_dir=out_dir,
            formats=[f for f in FORMATS if f in formats],
        )

    @classmethod
    def from_json(cls, text):
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"malformed JSON: {exc}") from exc
        return cls.from_dict(d)

    def to_dict(self):
        return {
            "coefficient": copy.deepcopy(self.coefficient),
            "domain": copy.deepcopy(self.domain),
            "solver": {"grid": self.grid, "box": self.box, "tol": self.tol,
                       "max_iter": self.max_iter},
            "grunsky": {"N_list": list(self.N_list), "R": self.R},
            "degeneration": {"m_list": list(self.m_list), "xi_cut": self.xi_cut},
            "stages": list(self.stages),
            "k_L": self.k_L,
            "outputs": {"dir": self.out_dir, "formats": list(self.formats)},
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def validate(self):
        """Build the coefficient and domain; raises SchemaError or InadmissibleError."""
        mu = build_coefficient(self.coefficient)
        dom = geo.DomainSpec.from_dict(self.domain) if self.domain else None
        if self.xi_cut is not None and self.xi_cut < 20 * max(self.m_list):
            raise SchemaError("degeneration.xi_cut must be at least 20 max(m_list)")
        return mu, dom


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

PRESETS = {
    "example1-rectangle": {
        "coefficient": {"generator": "rectangle", "params": {
            "a": 2.0, "b": 1.0,
            "h1": {"kind": "power", "c": 0.25, "s": 1.0},
            "h2": {"kind": "linear", "nodes": [[0.0, 0.5], [1.0, 0.5]]}}},
        "solver": {"grid": 256, "box": 4.0},
    },
    "example2-ellipse": {
        "coefficient": {"generator": "ellipse-ramp", "params": {
            "a": 1.25, "b": 0.75, "k": 0.4, "x_c": 0.0}},
        "solver": {"grid": 256, "box": 4.0},
    },
    "example3-polygon": {
        "coefficient": {"generator": "polygon-pseudo-harmonic", "params": {
            "angles": [1.5], "prevertices": [0.0], "r_fraction": 0.5}},
        "stages": ["teichmuller"],
    },
    "example4-harmonic": {
        "coefficient": {"generator": "poisson-harmonic", "params": {
            "c1": 0.2, "c2": 0.1, "c3": 0.3, "q": 0.1}},
        "solver": {"grid": 256, "box": 4.0},
    },
    "oracle-constant": {
        "coefficient": {"generator": "constant-disk", "params": {"k": 0.3}},
        "solver": {"grid": 512, "box": 4.0},
        "degeneration": {"m_list": [1, 2, 4, 8, 16, 32]},
    },
}


def presets():
    """Names and fully populated configs of the built-in presets."""
    return {name: RunConfig.from_dict(d).to_dict() for name, d in PRESETS.items()}


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

def _json_safe(x):
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, complex):
        return [_json_safe(x.real), _json_safe(x.imag)]
    if isinstance(x, dict):
        return {str(k): _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    if hasattr(x, "item"):  # numpy scalars
        return _json_safe(x.item())
    return x


def execute(cfg: RunConfig):
    """Run the configured stages and return {filename: text}."""
    mu, dom = cfg.validate()
    want = set(cfg.stages)
    rep = equality_report(
        mu, dom, N_list=tuple(cfg.N_list) if "grunsky" in want else (),
        grid=cfg.grid, box=cfg.box, tol=cfg.tol, max_iter=cfg.max_iter, R=cfg.R,
        m_list=tuple(cfg.m_list), xi_cut=cfg.xi_cut,
        degeneration="degeneration" in want, pairing="pairing" in want, k_L=cfg.k_L,
        provenance={"generator": mu.generator, "note": mu.note, "qclab": __version__})
    files = {}
    if "json" in cfg.formats:
        body = {"config": cfg.to_dict(), "results": rep.to_dict()}
        files["report.json"] = json.dumps(_json_safe(body), indent=2, sort_keys=True) + "\n"
    if "csv" in cfg.formats:
        files["kappa.csv"] = rep.kappa_csv()
        if rep.degeneration is not None:
            files["degeneration.csv"] = rep.degeneration.to_csv()
        else:
            files["degeneration.csv"] = "m,re,im,abs,gap,tail_bound\n"
    return files


def _write_all(files, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    for name, text in files.items():
        fd, tmp = tempfile.mkstemp(dir=out_dir, prefix=f".{name}.")
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, os.path.join(out_dir, name))


def run(config_path, out_dir=None, stderr=None):
    """Run a config file; returns the exit status."""
    stderr = stderr or sys.stderr
    try:
        with open(config_path, encoding="utf-8") as fh:
            cfg = RunConfig.from_json(fh.read())
        target = out_dir or cfg.out_dir
        if target is None:
            raise SchemaError("no output directory (use --out or outputs.dir)")
        files = execute(cfg)
    except StageError as exc:
        print(f"error: {exc}", file=stderr)
        if isinstance(exc.cause, (InadmissibleError, SchemaError)):
            return EXIT_VALIDATION
        return EXIT_NUMERICAL
    except (OSError, SchemaError, InadmissibleError, ValueError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_VALIDATION
    except QCError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_NUMERICAL
    _write_all(files, target)
    return EXIT_OK


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------

def _kappa_rows(path):
    with open(path, encoding="utf-8") as fh:
        d = json.load(fh)
    rows = d["results"]["kappa"] if "results" in d else d["kappa"]
    return [int(r["N"]) for r in rows], [float(r["gap"]) for r in rows]


def compare(paths):
    """CSV with one gap column per report and the spread across reports."""
    if len(paths) < 2:
        raise ComparisonError("compare needs at least two reports")
    tables = [_kappa_rows(p) for p in paths]
    N_list = tables[0][0]
    for p, (ns, _) in zip(paths, tables):
        if ns != N_list:
            raise ComparisonError(f"{p} has N_list {ns}, expected {N_list}")
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["N"] + [f"gap_{i}" for i in range(len(paths))] + ["spread"])
    for j, n in enumerate(N_list):
        gaps = [t[1][j] for t in tables]
        wr.writerow([n] + [repr(g) for g in gaps] + [repr(max(gaps) - min(gaps))])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _parser():
    p = argparse.ArgumentParser(prog="qclab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"qclab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a config file")
    r.add_argument("--config", required=True)
    r.add_argument("--out")
    ps = sub.add_parser("presets", help="list or emit the built-in configs")
    g = ps.add_mutually_exclusive_group(required=True)
    g.add_argument("--list", action="store_true")
    g.add_argument("--emit", metavar="NAME")
    c = sub.add_parser("compare", help="tabulate Grunsky gaps across reports")
    c.add_argument("files", nargs="+")
    c.add_argument("--out")
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    if args.command == "run":
        return run(args.config, args.out)
    if args.command == "presets":
        table = presets()
        if args.list:
            for name in table:
                print(name)
            return EXIT_OK
        if args.emit not in table:
            print(f"error: unknown preset {args.emit!r}; available: {', '.join(table)}",
                  file=sys.stderr)
            return EXIT_VALIDATION
        sys.stdout.write(json.dumps(table[args.emit], indent=2, sort_keys=True) + "\n")
        return EXIT_OK
    try:
        text = compare(args.files)
    except (ComparisonError, OSError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
