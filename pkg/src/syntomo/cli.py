"""Command line: ``syntomo run | cohomology | herr | solve-implicit | compare``.

Exit status is 0 when every check passes, 1 when a check fails (the report is
still written) and 2 when the configuration is invalid.
"""

from __future__ import annotations

import json
import logging
import os
import sys
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

import click

from .errors import ConfigError, ConvergenceError
from .homcx import cohomology, quasi_iso_certificate
from .pipeline import COMPLEX_NAMES, Bundle, PipelineConfig, stability, truncation_plan
from .suites import SUITE_NAMES, Check, SuiteReport, change_of_frobenius, cohomology_entry, herr_checks, run_suite

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger("syntomo")

PROFILE_KEYS = {"name", "p", "e", "eisenstein", "i_cyclo", "d", "r", "n", "u", "v", "decorations"}
TRUNCATION_KEYS = {"M", "n_work", "slack", "margin"}
RUN_KEYS = {"seed", "format", "threads", "out"}
FORMATS = ("json", "table")


@dataclass(frozen=True)
class RunConfig:
    pipeline: PipelineConfig
    seed: int = 0
    format: str = "json"
    threads: int = 1
    out: str | None = None
    source: str = ""
    extra: dict = field(default_factory=dict)


def _fraction(value, key: str) -> Fraction:
    try:
        return Fraction(str(value))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"[profile].{key}: cannot read {value!r} as a fraction") from exc


def _expect(table: dict, key: str, kind, where: str):
    value = table[key]
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise ConfigError(f"[{where}].{key}: expected an integer, got {value!r}")
    if kind is str and not isinstance(value, str):
        raise ConfigError(f"[{where}].{key}: expected a string, got {value!r}")
    if kind is list and not isinstance(value, list):
        raise ConfigError(f"[{where}].{key}: expected a list, got {value!r}")
    return value


def parse_config(data: dict, source: str = "") -> RunConfig:
    """Validate a parsed TOML document; unknown tables and keys are errors."""
    unknown = sorted(set(data) - {"profile", "truncation", "run"})
    if unknown:
        raise ConfigError(f"unknown table(s) {unknown}; expected [profile], [truncation], [run]")
    prof = data.get("profile")
    if not isinstance(prof, dict):
        raise ConfigError("missing [profile] table")
    trunc = data.get("truncation", {})
    run = data.get("run", {})
    for table, allowed, where in ((prof, PROFILE_KEYS, "profile"), (trunc, TRUNCATION_KEYS, "truncation"),
                                  (run, RUN_KEYS, "run")):
        if not isinstance(table, dict):
            raise ConfigError(f"[{where}] must be a table")
        bad = sorted(set(table) - allowed)
        if bad:
            raise ConfigError(f"[{where}]: unknown key(s) {bad}; allowed {sorted(allowed)}")
    if "name" not in prof:
        raise ConfigError("[profile].name: required (A or B)")
    kw: dict = {"profile": _expect(prof, "name", str, "profile")}
    for key in ("p", "e", "i_cyclo", "d", "r", "n"):
        if key in prof:
            kw[key] = _expect(prof, key, int, "profile")
    if "eisenstein" in prof:
        coeffs = _expect(prof, "eisenstein", list, "profile")
        if not all(isinstance(c, int) and not isinstance(c, bool) for c in coeffs):
            raise ConfigError("[profile].eisenstein: expected a list of integers")
        kw["eisenstein"] = tuple(coeffs)
    for key in ("u", "v"):
        if key in prof:
            kw[key] = _fraction(prof[key], key)
    if "decorations" in prof:
        decos = _expect(prof, "decorations", list, "profile")
        kw["decorations"] = tuple(str(x) for x in decos)
    for key in ("M", "n_work", "slack", "margin"):
        if key in trunc:
            kw[key] = _expect(trunc, key, int, "truncation")
    try:
        cfg = PipelineConfig(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[profile]: {exc}") from exc
    seed = _expect(run, "seed", int, "run") if "seed" in run else 0
    fmt = _expect(run, "format", str, "run") if "format" in run else "json"
    if fmt not in FORMATS:
        raise ConfigError(f"[run].format: expected one of {FORMATS}, got {fmt!r}")
    threads = _expect(run, "threads", int, "run") if "threads" in run else 1
    if threads < 1:
        raise ConfigError("[run].threads: must be at least 1")
    out = _expect(run, "out", str, "run") if "out" in run else None
    return RunConfig(cfg, seed, fmt, threads, out, source)


def load_config(path: str | os.PathLike) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed TOML in {path}: {exc}") from exc
    return parse_config(data, str(path))


# ---------------------------------------------------------------------------
# reports

def load_schema(name: str = "report") -> dict:
    text = resources.files("syntomo").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def validate_report(report: dict) -> None:
    import jsonschema

    jsonschema.validate(report, load_schema("report"))


def build_report(command: str, cfg: PipelineConfig | None, rep: SuiteReport, *, seed: int | None = None,
                 suite: str | None = None, result: dict | None = None) -> dict:
    entries = sorted(rep.stability, key=lambda s: s["name"])
    stab = {"M": truncation_plan(cfg).M if cfg is not None else None,
            "2M matched": all(s["2M matched"] for s in entries) if entries else None}
    if entries:
        stab["entries"] = entries
    report = {
        "command": command,
        "suite": suite,
        "seed": seed,
        "config": cfg.to_dict() if cfg is not None else None,
        "plan": truncation_plan(cfg).to_dict() if cfg is not None else None,
        "complexes": rep.complexes,
        "edges": rep.edges,
        "stability": stab,
        "checks": [c.to_json() for c in rep.checks],
        "skipped": rep.skipped,
        "result": result,
        "passed": rep.passed,
    }
    return report


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    return render_table(report)


def render_table(report: dict) -> str:
    lines = [f"command: {report['command']}" + (f"  suite: {report['suite']}" if report.get("suite") else "")]
    cfg = report.get("config")
    if cfg:
        lines.append("config: " + " ".join(f"{k}={cfg[k]}" for k in sorted(cfg) if cfg[k] is not None))
    for cx in report["complexes"]:
        lines.append(f"complex {cx['name']}")
        for row in sorted(cx["divisors"], key=lambda r: r["degree"]):
            exps = row["divisor_exponents"]
            body = " + ".join(f"Z/p^{e}" for e in sorted(exps, reverse=True)) if exps else "0"
            lines.append(f"  H^{row['degree']}: {body}")
    for edge in report["edges"]:
        cert = edge["certificate"]
        per = ", ".join(f"{r['degree']}:({r['kernel']},{r['cokernel']})" for r in cert["per_degree"])
        lines.append(f"edge {edge['name']}: kernel {cert['kernel']} cokernel {cert['cokernel']} [{per}]")
    stab = report["stability"]
    for s in stab.get("entries", []):
        lines.append(f"stability {s['name']}: M={s['M']} matched={s['2M matched']}")
    for c in report.get("checks", []):
        measured = json.dumps(c["measured"], sort_keys=True)
        lines.append(f"{'PASS' if c['passed'] else 'FAIL'} {c['name']} {measured}")
    for s in report.get("skipped", []):
        lines.append(f"SKIP {s}")
    if report.get("result") is not None:
        lines.append("result: " + json.dumps(report["result"], sort_keys=True))
    lines.append(f"passed: {report['passed']}")
    return "\n".join(lines) + "\n"


def write_atomic(path: str | os.PathLike, text: str) -> None:
    """Write to a temporary file in the target directory, then rename over the target."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(report: dict, fmt: str, out: str | None) -> None:
    validate_report(report)
    text = render(report, fmt)
    if out:
        write_atomic(out, text)
    else:
        click.echo(text, nl=False)


# ---------------------------------------------------------------------------
# commands

def _setup_logging() -> None:
    level = os.environ.get("SYNTOMO_LOG", "WARNING").strip().upper()
    value = int(level) if level.isdigit() else getattr(logging, level, None)
    if not isinstance(value, int):
        value = logging.WARNING
    logging.basicConfig(level=value, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def _config_or_exit(path: str | None) -> RunConfig:
    if path is None:
        raise click.UsageError("--config is required")
    try:
        return load_config(path)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)


def _settings(rc: RunConfig, out, fmt, seed, threads) -> tuple:
    return (out if out is not None else rc.out, fmt or rc.format, rc.seed if seed is None else seed,
            rc.threads if threads is None else threads)


def _finish(report: dict, fmt: str, out: str | None) -> None:
    emit(report, fmt, out)
    sys.exit(0 if report["passed"] else 1)


_common = [
    click.option("--config", "config_path", type=click.Path(dir_okay=False), help="TOML run configuration."),
    click.option("--out", type=click.Path(dir_okay=False), default=None, help="Report path (stdout if omitted)."),
    click.option("--format", "fmt", type=click.Choice(FORMATS), default=None, help="Report format."),
    click.option("--seed", type=int, default=None, help="Seed for randomized checks."),
    click.option("--threads", type=click.IntRange(min=1), default=None, help="Worker threads."),
]


def common_options(fn):
    for opt in reversed(_common):
        fn = opt(fn)
    return fn


@click.group()
@click.version_option(package_name="syntomo")
def main() -> None:
    """Syntomic and Herr complexes over Z/p^n: suites, cohomology tables and certificates."""
    _setup_logging()


@main.command()
@common_options
@click.option("--suite", type=click.Choice(SUITE_NAMES), default="all", show_default=True)
def run(config_path, out, fmt, seed, threads, suite):
    """Run a named check suite and write its report."""
    rc = _config_or_exit(config_path)
    out, fmt, seed, threads = _settings(rc, out, fmt, seed, threads)
    try:
        rep = run_suite(rc.pipeline, suite, seed=seed, threads=threads)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    _finish(build_report("run", rc.pipeline, rep, seed=seed, suite=suite), fmt, out)


@main.command("cohomology")
@common_options
@click.option("--complex", "names", multiple=True, type=click.Choice(COMPLEX_NAMES),
              help="Complex to compute (repeatable); default syn.")
@click.option("--deco", type=click.Choice(("PD", "U", "UV")), default=None, help="Decoration for kum/kum_psi/hk/dr.")
@click.option("--edge", "edges", multiple=True,
              type=click.Choice(("pd_to_u", "phi_to_psi", "u_to_uv", "psi_uv_back_to_phi")),
              help="Chain-map certificate to add (repeatable).")
@click.option("--stability/--no-stability", "check_stability", default=True, show_default=True, help="Re-run with the band doubled.")
def cohomology_cmd(config_path, out, fmt, seed, threads, names, deco, edges, check_stability):
    """Cohomology tables of the named complexes, with band-doubling stability."""
    rc = _config_or_exit(config_path)
    out, fmt, seed, threads = _settings(rc, out, fmt, seed, threads)
    cfg = rc.pipeline
    rep = SuiteReport("cohomology")
    try:
        b = Bundle(cfg)
        for name in names or ("syn",):
            C = b.build(name, deco)
            rep.complexes.append(cohomology_entry(name if deco is None else f"{name}_{deco}", cohomology(C), C))
            kind_deco = _stability_key(name, deco)
            if check_stability and kind_deco is not None:
                st = stability(cfg, *kind_deco)
                rep.stability.append({"name": f"{kind_deco[0]}_{kind_deco[1]}", **st.to_dict()})
                rep.checks.append(Check(f"stability[{kind_deco[0]}_{kind_deco[1]}]", st.matched,
                                        {"window_exponent": st.tau}))
        r = cfg.r
        for edge in edges:
            f = b.chain_map(edge)
            cert = quasi_iso_certificate(f, degrees=[k for k in f.source.degrees if k <= r])
            rep.edges.append({"name": edge, "certificate": cert.to_json()})
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    _finish(build_report("cohomology", cfg, rep, seed=seed), fmt, out)


def _stability_key(name: str, deco: str | None):
    table = {"syn": ("kum", "PD"), "kum": ("kum", deco or "UV"), "kum_psi": ("kum_psi", deco or "U"),
             "cycl": ("cycl", "UV")}
    return table.get(name)


@main.command()
@common_options
@click.option("--M", "M", type=click.IntRange(min=1), default=None, help="Negative band radius of the smallest model.")
def herr(config_path, out, fmt, seed, threads, M):
    """Herr complex cohomology, its stability and the H^2 comparison with Syn."""
    rc = _config_or_exit(config_path)
    out, fmt, seed, threads = _settings(rc, out, fmt, seed, threads)
    try:
        rep = herr_checks(rc.pipeline, M)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    _finish(build_report("herr", rc.pipeline, rep, seed=seed), fmt, out)


@main.command()
@common_options
def compare(config_path, out, fmt, seed, threads):
    """Kummer and cyclotomic Frobenius on the annulus: compare elementary divisors."""
    rc = _config_or_exit(config_path)
    out, fmt, seed, threads = _settings(rc, out, fmt, seed, threads)
    try:
        rep = change_of_frobenius(rc.pipeline, threads=threads)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    _finish(build_report("compare", rc.pipeline, rep, seed=seed), fmt, out)


@main.command("solve-implicit")
@click.option("--coeffs", required=True,
              help="Integer polynomial coefficients, highest degree first, e.g. '1,0,-8' for x^2 - 8.")
@click.option("--p", "p", type=click.IntRange(min=2), required=True, help="Prime.")
@click.option("--digits", type=click.IntRange(min=1), default=4, show_default=True, help="p-adic digits wanted.")
@click.option("--start", type=int, required=True, help="Approximate root modulo p.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--format", "fmt", type=click.Choice(FORMATS), default="json", show_default=True)
def solve_implicit(coeffs, p, digits, start, out, fmt):
    """Lift a simple root of an integer polynomial to Z/p^digits by the contraction iteration."""
    from .operators import implicit_solve
    from .padic import is_prime

    try:
        cs = [int(c) for c in coeffs.replace(" ", "").split(",") if c]
    except ValueError:
        click.echo(f"config error: --coeffs must be comma-separated integers, got {coeffs!r}", err=True)
        sys.exit(2)
    if not cs or not is_prime(p):
        click.echo("config error: need at least one coefficient and a prime --p", err=True)
        sys.exit(2)

    def Q(x):
        acc = 0
        for c in cs:
            acc = acc * x + c
        return acc

    def jac(x):
        acc = 0
        deg = len(cs) - 1
        for i, c in enumerate(cs[:-1]):
            acc = acc * x + c * (deg - i)
        return acc

    rep = SuiteReport("solve-implicit")
    result = {"p": p, "digits": digits, "coefficients": cs, "start": start}
    try:
        sol = implicit_solve(Q, jac, start, p, p=p, prec=digits)
        vals = sol.residual_valuations
        increasing = all(b > a for a, b in zip(vals, vals[1:]))
        residual_ok = Q(sol.value) % p**digits == 0
        result.update({"value": sol.value, "iterations": sol.iterations, "residual_valuations": vals})
        rep.checks.append(Check("solve:residual_zero", residual_ok, {"value": sol.value}))
        rep.checks.append(Check("solve:residual_valuation_increases", increasing, {"valuations": vals}))
    except (ConvergenceError, ValueError) as exc:
        result["error"] = str(exc)
        rep.checks.append(Check("solve:converged", False, {"error": str(exc)}))
    _finish(build_report("solve-implicit", None, rep, result=result), fmt, out)


if __name__ == "__main__":
    main()
