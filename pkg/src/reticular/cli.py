"""Command-line entry point: ``reticular <subcommand> ...``.

Exit status is 0 on success, 1 when a germ is rejected or a verification
fails, and 2 on usage errors (bad flags, unreadable germ text).
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import shlex
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import __version__
from .classify import CatalogLabel, Reject, classify_component, classify_family, classify_multigerm, OutOfCatalog
from .jetalg import GermSyntaxError, UnknownVariableError
from .tangent import (
    Family, MultiGerm, check_inf_stable, codim_report, determinacy_order, is_rK_l_determined,
    jet_cap, nondegeneracy_issues,
)
from .unfold import (
    VerificationError, build_codim1, build_versal, catalog, codim1_sign_vectors, export_json,
    export_text, find_variant, verify_catalog,
)

GRAMMAR_HINT = (
    "germ grammar: components separated by ';' (or one per line in --file), "
    "e.g. \"y^2; x*y + y^3\"; variables x, y, x1.., y1.., t, q1.., u11.., z; "
    "operators + - * ^ and parentheses; rationals as 3/2"
)
MANIFEST = "manifest.json"


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    """Fully resolved settings of one invocation, echoed into manifests."""

    subcommand: str
    argv: list[str]
    options: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"subcommand": self.subcommand, "argv": self.argv, "options": self.options,
                "command": "reticular " + shlex.join(self.argv), "version": __version__}


# ------------------------------------------------------------ helpers

def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(out: Path, cfg: RunConfig, files: list[Path]) -> Path:
    data = cfg.as_dict()
    data["files"] = [{"name": p.name, "bytes": p.stat().st_size, "sha256": _sha256(p)}
                     for p in sorted(files, key=lambda p: p.name)]
    path = out / MANIFEST
    path.write_text(json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")
    return path


def _read_source(args, attr: str = "germ") -> str:
    text = getattr(args, attr, None)
    if getattr(args, "file", None):
        if text:
            raise UsageError(f"give either --{attr} or --file, not both")
        try:
            lines = Path(args.file).read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise UsageError(f"cannot read {args.file}: {exc}") from None
        text = "; ".join(l.strip() for l in lines if l.strip() and not l.lstrip().startswith("#"))
    if not text:
        raise UsageError(f"missing --{attr} (or --file)")
    return text


def _germ(args) -> MultiGerm:
    return MultiGerm.parse(_read_source(args))


def _cap(args) -> int:
    return args.cap if getattr(args, "cap", None) else jet_cap(args.n if getattr(args, "n", None) else 2)


def _mu_str(mu) -> str:
    return "inf" if mu == math.inf else str(mu)


class _Out:
    """Collects report text so it can be printed and optionally saved."""

    def __init__(self):
        self.lines: list[str] = []

    def __call__(self, line: str = ""):
        self.lines.append(line)

    @property
    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def _emit(args, cfg: RunConfig, out: _Out, data: dict, stem: str) -> None:
    text = json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n" if args.json else out.text
    sys.stdout.write(text)
    if getattr(args, "out", None):
        d = Path(args.out)
        d.mkdir(parents=True, exist_ok=True)
        p = d / (stem + (".json" if args.json else ".txt"))
        p.write_text(text, encoding="utf-8")
        write_manifest(d, cfg, [p])


# ------------------------------------------------------------ subcommands

def cmd_codim(args, cfg) -> int:
    f0 = _germ(args)
    cap = _cap(args)
    cfg.options.update(germ=str(f0), cap=cap, order=args.order)
    rep = codim_report(f0, args.order, cap)
    out = _Out()
    out(f"germ: {f0}")
    out("mu: (" + ", ".join(_mu_str(m) for m in rep.mu) + ")")
    for i, (c, ph, l) in enumerate(zip(f0.comps, rep.phi, rep.orders)):
        basis = ", ".join(str(p) for p in ph) if rep.mu[i] != math.inf else "not finite"
        out(f"  f{i + 1} = {c}: mu = {_mu_str(rep.mu[i])} (jet order {l}); phi = [{basis}]")
    data = rep.as_dict()
    data["config"] = cfg.as_dict()
    _emit(args, cfg, out, data, "codim")
    return 0


def cmd_determine(args, cfg) -> int:
    f0 = _germ(args)
    cap = _cap(args)
    cfg.options.update(germ=str(f0), cap=cap)
    out = _Out()
    comps = []
    for i, c in enumerate(f0.comps):
        verdicts = [(l, is_rK_l_determined(c, l)) for l in range(1, cap + 1)]
        order = determinacy_order(c, cap)
        out(f"f{i + 1} = {c}: determinacy order {order if order is not None else f'> {cap}'}")
        for l, v in verdicts:
            out(f"  l={l}: {v}")
        comps.append({"germ": str(c), "order": order, "verdicts": {str(l): str(v) for l, v in verdicts}})
    _emit(args, cfg, out, {"components": comps, "cap": cap, "config": cfg.as_dict()}, "determine")
    return 0


def _label_text(label: CatalogLabel, args) -> str:
    return label.ascii if getattr(args, "ascii", False) else str(label)


def cmd_classify(args, cfg) -> int:
    out = _Out()
    data = {"config": cfg.as_dict()}
    cap = _cap(args)
    try:
        if args.family:
            F = Family.parse(args.family, args.n)
            cfg.options.update(family=str(F), n=F.n, cap=cap)
            label = classify_family(F, cap)
        else:
            f0 = _germ(args)
            if args.n is None:
                raise UsageError("classify --germ needs --n")
            cfg.options.update(germ=str(f0), n=args.n, cap=cap)
            label = classify_multigerm(f0, args.n, cap)
    except Reject as exc:
        out(f"Reject({exc.reason}): {exc.detail}")
        data.update(rejected=True, reason=exc.reason, detail=exc.detail)
        _emit(args, cfg, out, data, "classify")
        return 1
    out(_label_text(label, args))
    data.update(rejected=False, label=label.ascii, label_unicode=str(label), slug=label.slug)
    if args.verbose and not args.family:
        for c in f0.comps:
            cc = classify_component(c, cap)
            out(f"  {c}: {cc.symbol} (mu={cc.mu}, mu on x=0: {cc.mu_boundary}, residual {cc.reduction.residual})")
    _emit(args, cfg, out, data, "classify")
    return 0


def cmd_unfold(args, cfg) -> int:
    f0 = _germ(args)
    n = args.n
    cap = jet_cap(n)
    out = _Out()
    data = {"config": cfg.as_dict()}
    try:
        label = classify_multigerm(f0, n, cap)
    except Reject as exc:
        out(f"Reject({exc.reason}): {exc.detail}")
        data.update(ok=False, reason=exc.reason)
        cfg.options.update(germ=str(f0), n=n)
        _emit(args, cfg, out, data, "unfold")
        return 1
    cfg.options.update(germ=str(f0), n=n, signs=args.signs, label=label.ascii)
    prefix = label.prefix if args.codim is None else args.codim
    if prefix != label.prefix:
        label = CatalogLabel(prefix, label.symbols)
        cfg.options.update(label=label.ascii)
    cfg.options.update(codim=prefix)
    try:
        F = build_versal(f0, n) if prefix == 0 else build_codim1(f0, n, args.signs)
    except VerificationError as exc:
        out(f"verification failed: {exc}")
        if exc.witness:
            out(f"  missing direction: {exc.witness}")
        if prefix == 1:
            good = [s for s, ok in codim1_sign_vectors(f0, n) if ok]
            out("  stable sign vectors: " + (", ".join(good) if good else "none"))
        data.update(ok=False, error=str(exc), witness=exc.witness)
        _emit(args, cfg, out, data, "unfold")
        return 1
    issues = nondegeneracy_issues(F)
    stable = check_inf_stable(F)
    out(f"label: {_label_text(label, args)}")
    out(f"family: {F}")
    checked = ", ".join(f"l={l} codim {c}" for l, c in stable.orders)
    out(f"stable: {'yes' if stable.ok else 'no'} ({checked})")
    out("non-degenerate: " + ("yes" if not issues else "no; " + "; ".join(issues)))
    ok = stable.ok and not issues
    data.update(ok=ok, label=label.ascii, family=[str(c) for c in F.comps], stable=stable.ok, issues=issues)
    _emit(args, cfg, out, data, "unfold")
    return 0 if ok else 1


def cmd_catalog(args, cfg) -> int:
    n = args.n
    cfg.options.update(n=n, verify=args.verify, minimal=not args.no_minimal)
    entries = catalog(n)
    if not args.verify:
        text = export_json(entries) if args.json else export_text(entries)
        sys.stdout.write(text)
        if args.out:
            d = Path(args.out)
            d.mkdir(parents=True, exist_ok=True)
            p = d / f"catalog_n{n}.{'json' if args.json else 'tsv'}"
            p.write_text(text, encoding="utf-8")
            write_manifest(d, cfg, [p])
        return 0
    rep = verify_catalog(n, check_minimal=not args.no_minimal)
    out = _Out()
    for r in rep.rows:
        flags = "".join(c if ok else "-" for c, ok in zip("NSLMP", (r.nondegenerate, r.stable, r.label_ok,
                                                                       r.mu_ok, r.minimal)))
        out(f"{'pass' if r.ok else 'FAIL'}  {flags}  {r.label.ascii:<18} {r.signs or '.':<4} {r.family}")
        for note in r.notes:
            out(f"      {note}")
    lines_ok = {}
    for r in rep.rows:
        key = r.label.ascii.replace("C3+", "C3±").replace("C3-", "C3±")
        lines_ok[key] = lines_ok.get(key, True) and r.ok
    out(f"{sum(lines_ok.values())}/{len(lines_ok)} catalog lines pass in every sign variant")
    out(rep.summary())
    out("flags: N non-degenerate, S stable, L label, M mu, P minimal")
    data = {"ok": rep.ok, "summary": rep.summary(), "rows": [r.as_dict() for r in rep.rows],
            "config": cfg.as_dict()}
    _emit(args, cfg, out, data, f"verify_n{n}")
    return 0 if rep.ok else 1


def _sign_token(signs: str) -> str:
    return signs.replace("+", "p").replace("-", "m") if signs else "0"


def _parse_slice(text: str):
    name, _, value = text.partition("=")
    if not value:
        raise UsageError(f"--slice expects NAME=VALUE, got {text!r}")
    try:
        return name.strip(), Fraction(value.strip())
    except ValueError:
        raise UsageError(f"--slice value {value!r} is not a number") from None


def _resolve_family(args):
    """Catalog label or inline expression -> (family, label, signs)."""
    text = args.family
    try:
        label = CatalogLabel.parse(text)
    except ValueError:
        label = None
    if label is not None:
        try:
            v = find_variant(args.n, label, args.signs)
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from None
        return v.family, v.label, v.signs
    F = Family.parse(text, args.n)
    try:
        found = classify_family(F)
    except (Reject, ValueError):
        found = None
    return F, found, args.signs or ""


def cmd_front(args, cfg) -> int:
    from .front import DEFAULT_BOX, render, sweep, t_values, write_csv, default_grid

    if args.family is None:
        raise UsageError("front needs --family (catalog label such as 1(A1,A2), or an inline family)")
    F, label, signs = _resolve_family(args)
    issues = nondegeneracy_issues(F)
    for msg in issues:
        print(f"warning: {msg}", file=sys.stderr)
    stem = f"{label.slug if label else 'family'}_{_sign_token(signs)}"
    sl = None
    if args.slice:
        name, value = _parse_slice(args.slice)
        try:
            F = F.slice(name, value)
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from None
        sl = f"{name}={value}"
        stem += f"_{name}_{str(value).replace('-', 'm').replace('/', 'd')}"
    grid = args.grid or default_grid(F.n)
    box = args.box if args.box is not None else DEFAULT_BOX
    ts = t_values(args.t_min, args.t_max, args.frames)
    cfg.options.update(family=str(F), label=label.ascii if label else None, signs=signs, n=F.n, slice=sl,
                       t_min=args.t_min, t_max=args.t_max, frames=args.frames, grid=grid, box=box,
                       t_values=ts, workers=args.workers, stem=stem)
    frames = sweep(F, ts, grid, box, workers=args.workers)
    out_dir = Path(args.out)
    paths = render(frames, out_dir, stem, label=str(label) if label else "")
    csv_path = write_csv(frames, out_dir / f"{stem}.csv", F.q)
    out = _Out()
    out(f"family: {F}")
    if label:
        out(f"label: {label.ascii}  signs: {signs or '-'}")
    events = []
    for k, f in enumerate(frames):
        counts = ", ".join(f"{b.component + 1}{'/' + ','.join(b.stratum) if b.stratum else ''}:{b.size}"
                           for b in f.branches)
        trunc = "  (truncated at box)" if f.truncated else ""
        out(f"t[{k}] = {f.t:+.6f}  points {counts}{trunc}")
        for ev in sorted(f.events.values(), key=lambda e: e.pair):
            out(f"    {ev.describe()}")
            events.append(ev.as_dict())
    ev_path = out_dir / f"{stem}_events.json"
    ev_path.write_text(json.dumps(events, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    report = out_dir / f"{stem}_report.txt"
    report.write_text(out.text, encoding="utf-8")
    write_manifest(out_dir, cfg, paths + [csv_path, ev_path, report])
    sys.stdout.write(out.text)
    return 0


# ------------------------------------------------------------ parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(2)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="reticular", description="Reticular tangent spaces, classification, unfoldings and fronts.")
    p.add_argument("--version", action="version", version=f"reticular {__version__}")
    sub = p.add_subparsers(dest="subcommand", metavar="SUBCOMMAND", parser_class=_Parser)
    sub.required = True

    def common(sp, germ=True):
        if germ:
            sp.add_argument("--germ", help="components separated by ';'")
            sp.add_argument("--file", help="read components from a file, one per line")
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        sp.add_argument("--out", help="also save the report and a manifest in this directory")

    sp = sub.add_parser("codim", help="codimension mu and quotient bases per component")
    common(sp)
    sp.add_argument("--n", type=int, help="parameter count, sets the default jet cap n + 5")
    sp.add_argument("--order", type=int, help="fixed jet order instead of the automatic one")
    sp.add_argument("--cap", type=int, help="highest jet order tried")
    sp.set_defaults(func=cmd_codim)

    sp = sub.add_parser("determine", help="finite-determinacy verdict per jet order")
    common(sp)
    sp.add_argument("--n", type=int)
    sp.add_argument("--cap", type=int)
    sp.set_defaults(func=cmd_determine)

    sp = sub.add_parser("classify", help="catalog label of a multi-germ or family")
    common(sp)
    sp.add_argument("--family", help="classify an unfolding instead of a germ")
    sp.add_argument("--n", type=int)
    sp.add_argument("--cap", type=int)
    sp.add_argument("--ascii", action="store_true", help="print the ascii form of the label")
    sp.add_argument("--verbose", "-v", action="store_true")
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("unfold", help="build and verify a versal unfolding")
    common(sp)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--signs", help="sign vector for codimension-1 families, e.g. --signs=+-")
    sp.add_argument("--codim", type=int, choices=(0, 1),
                    help="force a plain (0) or codimension-1 (1) unfolding instead of the budget rule")
    sp.add_argument("--ascii", action="store_true")
    sp.set_defaults(func=cmd_unfold)

    sp = sub.add_parser("catalog", help="print or verify the normal-form table")
    common(sp, germ=False)
    sp.add_argument("--n", type=int, choices=(1, 2), required=True)
    sp.add_argument("--verify", action="store_true")
    sp.add_argument("--no-minimal", action="store_true", help="skip the parameter-drop probe")
    sp.set_defaults(func=cmd_catalog)

    sp = sub.add_parser("front", help="trace, render and dump fronts over a t-sweep")
    sp.add_argument("--family", help="catalog label (1(A1,A2), 1_A1_A2, ...) or inline family")
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--signs", help="sign variant of a catalog label")
    sp.add_argument("--t-min", type=float, default=-0.5)
    sp.add_argument("--t-max", type=float, default=0.5)
    sp.add_argument("--frames", type=int, default=3)
    sp.add_argument("--grid", type=int, help="samples per free axis (default 801 for n=1, 161 for n=2)")
    sp.add_argument("--box", type=float, help="half-width of the sampling box (default 1.5)")
    sp.add_argument("--slice", help="fix one parameter, e.g. q2=-0.1, and draw curves")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_front)
    return p


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        sys.stdout.reconfigure(encoding="utf-8")
    except (AttributeError, ValueError):
        pass
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    cfg = RunConfig(args.subcommand, argv)
    try:
        return args.func(args, cfg)
    except UsageError as exc:
        print(f"reticular {args.subcommand}: error: {exc}", file=sys.stderr)
        return 2
    except (GermSyntaxError, UnknownVariableError) as exc:
        print(f"reticular {args.subcommand}: error: {exc}\n{GRAMMAR_HINT}", file=sys.stderr)
        return 2
    except (OutOfCatalog, VerificationError) as exc:
        print(f"reticular {args.subcommand}: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"reticular {args.subcommand}: error: {exc}\n{GRAMMAR_HINT}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"reticular {args.subcommand}: {exc}", file=sys.stderr)
        return 1


run = main

if __name__ == "__main__":
    sys.exit(main())
