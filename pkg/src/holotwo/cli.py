"""Command-line interface: ``holotwo holonomy | verify | carrier``.

Exit codes: 0 success, 1 a verification check failed, 2 invalid input,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .carriers import CarrierError, load_carrier_spec
from .geometry import (
    GeometryError,
    Path1,
    PoleProximityError,
    Path2,
    bezier,
    braid_generator,
    check_fake_curvature,
    homotopy,
    path_from_spec,
    segment,
    two_curvature_at,
)
from .holonomy import (
    ConfigError,
    HolonomyError,
    QuadratureConfig,
    boundary_residuals,
    comp0_residuals,
    holonomy_fuzzy,
    holonomy_P,
    holonomy_Q,
    holonomy_R,
    parallel_map,
    polygon_residuals,
    verify_composition_laws,
)
from .instances import (
    InstanceError,
    chain_two_connection,
    kz_braid,
    kz_braid_homotopy,
    kz_connection,
    kz_homotopic_pair,
    kz_two_connection,
    planar_square,
)
from .series import SeriesError, grouplike_residual
from .xmod import XModError, build_ba, build_hom_complex, check_bare_xmod_axioms, check_hopf_xmod_axioms

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
STRUCTURAL_TOL = 1e-6
COMPAT_TOL = 1e-5


class InputError(ValueError):
    """Semantically invalid configuration (exit code 2)."""


# ---------------------------------------------------------------------------
# configuration schema


class QuadratureModel(BaseModel):
    model_config = ConfigDict(extra="forbid")
    grid_t: int = Field(64, ge=2)
    grid_s: int = Field(64, ge=1)
    ode_steps: int = Field(256, ge=1)

    @field_validator("grid_t")
    @classmethod
    def _even(cls, v: int) -> int:
        if v % 2:
            raise ValueError("grid_t must be even")
        return v

    def build(self) -> QuadratureConfig:
        return QuadratureConfig(self.grid_t, self.grid_s, self.ode_steps)


class InstanceModel(BaseModel):
    model_config = ConfigDict(extra="forbid")
    kind: Literal["kz", "chain"]
    n: int = Field(3, ge=2, le=6)
    complex: str | dict = "C->C"
    degree: int = Field(1, ge=0, le=4)
    zero: bool = False


class RunConfig(BaseModel):
    """A validated run description; embedded verbatim in every output."""

    model_config = ConfigDict(extra="forbid")
    command: Literal["p", "q", "r", "fuzzy"] = "p"
    instance: InstanceModel
    N: int = Field(3, ge=0, le=6)
    quadrature: QuadratureModel = QuadratureModel()
    path: dict | None = None
    surface: dict | None = None
    seed: int = 0
    estimate_error: bool = False
    output: str | None = None


def _format_validation(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = ".".join(str(x) for x in e["loc"]) or "<root>"
        lines.append(f"{loc}: {e['msg']}")
    return "\n".join(lines)


def load_config(path: str | None, default: dict | None = None) -> RunConfig:
    if path is None:
        if default is None:
            raise InputError("--config is required")
        data = default
    else:
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise InputError(f"cannot read {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return RunConfig.model_validate(data)


# ---------------------------------------------------------------------------
# paths and surfaces


def parse_path(spec: dict) -> Path1:
    if spec.get("kind") == "builtin" and spec.get("name") == "braid_word":
        return kz_braid(int(spec["n"]), [int(x) for x in spec["word"]])
    return path_from_spec(spec)


def parse_surface(spec: dict) -> Path2:
    kind = spec.get("kind")
    if kind == "braid_homotopy":
        return kz_braid_homotopy(int(spec.get("n", 3)), int(spec.get("i", 1)), float(spec.get("ecc0", 1.0)),
                                 float(spec.get("ecc1", 0.5)), bool(spec.get("inverse", False)),
                                 float(spec.get("bump0", 0.0)), float(spec.get("bump1", 0.3)))
    if kind == "planar_square":
        start = spec.get("start", [0.0, 0.0])
        return planar_square((float(start[0]), float(start[1])), float(spec.get("scale", 0.5)),
                             float(spec.get("bend", 0.3)))
    if kind == "homotopy":
        return homotopy(parse_path(spec["source"]), parse_path(spec["target"]), bool(spec.get("ease", True)))
    raise InputError(f"surface.kind: unknown surface kind {kind!r}")


def _default_surface(cfg: RunConfig) -> Path2:
    if cfg.surface is not None:
        return parse_surface(cfg.surface)
    if cfg.instance.kind == "kz":
        return kz_braid_homotopy(cfg.instance.n)
    return planar_square()


def _default_path(cfg: RunConfig) -> Path1:
    if cfg.path is not None:
        return parse_path(cfg.path)
    if cfg.instance.kind == "kz":
        return kz_braid(cfg.instance.n, [1])
    return bezier([[0, 0], [0.2, 0.3], [0.5, -0.2], [0.7, 0.1]])


# ---------------------------------------------------------------------------
# holonomy command


def _chain(cfg: RunConfig):
    inst = cfg.instance
    return chain_two_connection(inst.complex, seed=cfg.seed, degree=inst.degree, zero=inst.zero)


def run_holonomy(cfg: RunConfig) -> dict:
    N, qc = cfg.N, cfg.quadrature.build()
    inst = cfg.instance
    out: dict[str, Any] = {"command": cfg.command, "config": cfg.model_dump(mode="json")}
    if cfg.command == "p":
        if inst.kind == "kz":
            kz = kz_connection(inst.n, N)
            omega, carrier = kz.omega, kz.carrier
        else:
            c = _chain(cfg).connection
            omega, carrier = c.omega, c.bottom
        res = holonomy_P(omega, carrier, _default_path(cfg), N, config=qc, estimate_error=cfg.estimate_error)
        out.update(carrier=carrier.name, result=res.to_json())
        return out
    if inst.kind == "kz":
        if inst.n < 3:
            raise InputError("instance.n: the KZ 2-connection needs n >= 3")
        if cfg.command == "r":
            raise InputError("command: the bare holonomy needs a bare instance (use kind 'chain')")
        conn = kz_two_connection(inst.n, N).connection
    else:
        ci = _chain(cfg)
        conn = ci.connection if cfg.command == "r" else ci.lift(N).connection
    G = _default_surface(cfg)
    if cfg.command == "q":
        res = holonomy_Q(conn, G, N, config=qc, estimate_error=cfg.estimate_error)
        out.update(carrier=conn.top.name, result=res.to_json())
    elif cfg.command == "r":
        res = holonomy_R(conn, G, N, config=qc, estimate_error=cfg.estimate_error)
        out.update(carrier=conn.top.name, result=res.to_json())
    else:
        fz = holonomy_fuzzy(conn, build_ba(conn.xmod), G, N, qc)
        out.update(carrier=f"BA({conn.xmod.name})", result=fz.to_json())
    return out


# ---------------------------------------------------------------------------
# verification suites


@dataclass
class Check:
    name: str
    anchor: str
    residual: float
    tolerance: float
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual)) and self.residual <= self.tolerance

    def to_json(self, timings: bool) -> dict:
        d = {"name": self.name, "anchor": self.anchor, "residual": float(self.residual),
             "tolerance": self.tolerance, "passed": self.passed}
        if timings:
            d["seconds"] = round(self.seconds, 3)
        return d


@dataclass
class Report:
    suites: list[str]
    config: dict
    checks: list[Check]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self, timings: bool = False) -> dict:
        return {
            "suites": self.suites,
            "config": self.config,
            "passed": self.passed,
            "checks": [c.to_json(timings) for c in sorted(self.checks, key=lambda c: c.name)],
        }

    def text(self) -> str:
        lines = []
        for c in sorted(self.checks, key=lambda c: c.name):
            lines.append(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  residual={c.residual:.3e}  "
                         f"tol={c.tolerance:.0e}  ({c.seconds:.2f}s)  [{c.anchor}]")
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


Task = Callable[[], list[Check]]


def _timed(fn: Callable[[], list[tuple[str, str, float, float]]]) -> Task:
    def run() -> list[Check]:
        t0 = time.perf_counter()
        rows = fn()
        dt = (time.perf_counter() - t0) / max(1, len(rows))
        return [Check(n, a, float(r), tol, dt) for n, a, r, tol in rows]

    return run


def _axiom_rows(rep, prefix: str, anchor: str) -> list[tuple[str, str, float, float]]:
    rows = []
    for name, outcome in sorted(rep.checks.items()):
        residual = float(outcome.max_residual) if outcome.passed else max(1.0, float(outcome.max_residual))
        rows.append((f"{prefix}: {name}", anchor, residual, 0.0))
    return rows


def axioms_tasks(cfg: RunConfig) -> list[Task]:
    inst = cfg.instance
    if inst.kind == "chain":
        def hom():
            X = build_hom_complex(_chain_complex(cfg)).xmod
            return _axiom_rows(check_bare_xmod_axioms(X), "HOM(V)", "bare crossed-module axioms")

        def cert():
            ci = _chain(cfg)
            return [(f"exact fake curvature: {k}", "fake-curvature condition, rational mode", float(v), 0.0)
                    for k, v in ci.certificate.items()]

        return [_timed(hom), _timed(cert)]

    def four_t():
        from .carriers import chord_algebra, four_term_relations

        H = chord_algebra(inst.n, cfg.N)
        worst = 0.0
        for rel in four_term_relations(inst.n):
            v = H.element(rel)
            worst = max(worst, float(max((abs(x) for x in v), default=0)))
        return [("4T relations vanish in ch_n", "chord-diagram relations", worst, 0.0)]

    def hopf():
        if inst.n < 3:
            return []
        Hx = kz_two_connection(inst.n, cfg.N).connection.xmod
        return _axiom_rows(check_hopf_xmod_axioms(Hx), "U(2ch_n)", "Hopf crossed-module axioms")

    return [_timed(four_t), _timed(hopf)]


def _chain_complex(cfg: RunConfig):
    from .instances import chain_complex

    return chain_complex(cfg.instance.complex)


def _sample_points(cfg: RunConfig, count: int):
    rng = np.random.default_rng(cfg.seed)
    if cfg.instance.kind == "chain":
        return [rng.uniform(-1, 1, 2) for _ in range(count)], None
    n = cfg.instance.n
    pts, pairs = [], []
    while len(pts) < count:
        p = rng.normal(size=n) + 1j * rng.normal(size=n)
        if min(abs(p[a] - p[b]) for a in range(n) for b in range(a + 1, n)) < 0.1:
            continue
        pts.append(p)
        pairs.append([(rng.normal(size=n) + 1j * rng.normal(size=n), rng.normal(size=n) + 1j * rng.normal(size=n))])
    return pts, pairs


def holonomy_tasks(cfg: RunConfig) -> list[Task]:
    N, qc, inst = cfg.N, cfg.quadrature.build(), cfg.instance
    tasks: list[Task] = []
    if inst.kind == "kz":
        def flat():
            kz = kz_connection(inst.n, N)
            from .geometry import curvature_at

            pts, pairs = _sample_points(cfg, 20)
            worst = max(float(np.max(np.abs(curvature_at(kz.omega, kz.carrier, p, *pr[0], N=N))))
                        for p, pr in zip(pts, pairs))
            return [("KZ curvature vanishes", "flatness of the KZ connection", worst, 1e-8)]

        def glike():
            kz = kz_connection(inst.n, N)
            P = holonomy_P(kz.omega, kz.carrier, _default_path(cfg), N, config=qc, estimate_error=False).value
            return [("1-holonomy is group-like", "group-like parallel transport", grouplike_residual(P), 1e-7)]

        tasks += [_timed(flat), _timed(glike)]
        if inst.n >= 3:
            def fake_and_two():
                kz2 = kz_two_connection(inst.n, N)
                pts, pairs = _sample_points(cfg, 10)
                fc = check_fake_curvature(kz2.connection, pts, pairs).max_residual
                rng = np.random.default_rng(cfg.seed + 1)
                M = 0.0
                for p, pr in zip(pts, pairs):
                    Z = rng.normal(size=inst.n) + 1j * rng.normal(size=inst.n)
                    M = max(M, float(np.max(np.abs(two_curvature_at(kz2.connection, p, *pr[0], Z, N=3)[3]))))
                return [("fake curvature vanishes", "fake-curvature condition", fc, STRUCTURAL_TOL),
                        ("2-curvature vanishes (h^3 slice)", "2-curvature 3-form", M, STRUCTURAL_TOL)]

            def laws():
                conn = kz_two_connection(inst.n, N).connection
                G1 = kz_braid_homotopy(inst.n, 1, 1.0, 0.7, bump0=0.0, bump1=0.3)
                G3 = kz_braid_homotopy(inst.n, 1, 0.7, 0.5, bump0=0.3, bump1=0.1)
                rep = verify_composition_laws(conn, G1, N, qc, G3=G3)
                return [(k, "composition laws of the exact 2-holonomy", v, STRUCTURAL_TOL)
                        for k, v in rep.residuals.items()]

            def homotopy_inv():
                conn = kz_two_connection(inst.n, N).connection
                a, b = kz_homotopic_pair(inst.n)
                qa = holonomy_Q(conn, a, N, config=qc).value
                qb = holonomy_Q(conn, b, N, config=qc).value
                return [("Q is a homotopy invariant", "flat 2-connections", (qa - qb).max_abs(), COMPAT_TOL)]

            tasks += [_timed(fake_and_two), _timed(laws), _timed(homotopy_inv)]
        return tasks

    def fake():
        ci = _chain(cfg)
        pts, _ = _sample_points(cfg, 10)
        return [("fake curvature vanishes", "fake-curvature condition",
                 check_fake_curvature(ci.connection, pts).max_residual, STRUCTURAL_TOL)]

    G1 = planar_square()
    G2 = planar_square((0.5, 0.0), 0.4, 0.5)
    G3 = homotopy(G1.target, bezier([[0, 0], [0.2, 0.4], [0.4, 0.1], [0.5, 0]]))
    left = segment(np.array([-0.3, 0.2]), np.array([0.0, 0.0]))
    right = segment(np.array([0.5, 0.0]), np.array([0.8, 0.3]))
    phi = (lambda t: t + 0.25 * t * (1 - t), lambda t: 1 + 0.25 * (1 - 2 * t))

    def bare_laws():
        ci = _chain(cfg)
        rep = verify_composition_laws(ci.connection, G1, N, qc, G2, G3, left, right, phi)
        return [(f"bare: {k}", "composition laws of the bare 2-holonomy", v, STRUCTURAL_TOL)
                for k, v in rep.residuals.items()]

    def exact_laws():
        ci = _chain(cfg)
        rep = verify_composition_laws(ci.lift(N).connection, G1, N, qc, G2, G3, left, right, phi)
        return [(f"exact: {k}", "composition laws of the exact 2-holonomy", v, STRUCTURAL_TOL)
                for k, v in rep.residuals.items()]

    return [_timed(fake), _timed(bare_laws), _timed(exact_laws)]


def compat_tasks(cfg: RunConfig) -> list[Task]:
    N, qc, inst = cfg.N, cfg.quadrature.build(), cfg.instance
    if inst.kind == "kz":
        if inst.n < 3:
            return []

        def comp0():
            conn = kz_two_connection(inst.n, N).connection
            res = comp0_residuals(conn, _default_surface(cfg), N, qc)
            return [(k, "exact, blur and fuzzy holonomies", v, COMPAT_TOL) for k, v in res.items()]

        return [_timed(comp0)]

    def polygon():
        ci = _chain(cfg)
        res = polygon_residuals(ci.connection, ci.lift(N).connection, _default_surface(cfg), N, qc)
        return [(k, "bare, exact and fuzzy holonomies over HOM(V)", v, COMPAT_TOL) for k, v in res.items()]

    def comp0():
        ci = _chain(cfg)
        res = comp0_residuals(ci.lift(N).connection, _default_surface(cfg), N, qc)
        return [(k, "exact, blur and fuzzy holonomies", v, COMPAT_TOL) for k, v in res.items()]

    return [_timed(polygon), _timed(comp0)]


SUITES: dict[str, Callable[[RunConfig], list[Task]]] = {
    "axioms": axioms_tasks,
    "holonomy": holonomy_tasks,
    "compat": compat_tasks,
}


def parse_suites(text: str) -> list[str]:
    names = [s.strip() for s in text.split(",") if s.strip()]
    if not names:
        raise InputError("--suite: empty suite selection")
    out: list[str] = []
    for s in names:
        if s == "all":
            out += list(SUITES)
        elif s in SUITES:
            out.append(s)
        else:
            raise InputError(f"--suite: unknown suite {s!r}; choose from {sorted(SUITES) + ['all']}")
    return list(dict.fromkeys(out))


def run_verify(cfg: RunConfig, suites: list[str]) -> Report:
    tasks = [t for s in suites for t in SUITES[s](cfg)]
    if not tasks:
        raise InputError("the selected suites contain no checks for this instance")
    results = parallel_map(lambda t: t(), tasks)
    return Report(suites, cfg.model_dump(mode="json"), [c for r in results for c in r])


# ---------------------------------------------------------------------------
# carrier command


def run_carrier(spec_path: str, report: str) -> dict:
    try:
        spec = json.loads(Path(spec_path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {spec_path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{spec_path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    try:
        car = load_carrier_spec(spec)
    except KeyError as exc:
        raise InputError(f"carrier spec: missing field {exc}") from exc
    out: dict[str, Any] = {"name": car.name, "dim": car.dim, "degree_dims": car.degree_dims()}
    if report == "basis":
        out["labels"] = list(car.labels)
    return out


# ---------------------------------------------------------------------------
# entry point


def _dump(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _emit(obj: Any, output: str | None) -> None:
    text = _dump(obj)
    if output:
        Path(output).write_text(text + "\n")
    else:
        print(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="holotwo", description="Two-dimensional holonomy of algebra-valued 2-connections.")
    sub = p.add_subparsers(dest="cmd", required=True)
    h = sub.add_parser("holonomy", help="compute P, Q, R or the fuzzy holonomy")
    h.add_argument("--config", required=True)
    h.add_argument("--output")
    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite", default="all", help="axioms, holonomy, compat, all, or a comma-separated list")
    v.add_argument("--config")
    v.add_argument("--output")
    v.add_argument("--timings", action="store_true", help="include per-check seconds in the JSON report")
    c = sub.add_parser("carrier", help="describe a carrier algebra")
    c.add_argument("--spec", required=True)
    c.add_argument("--report", choices=["dims", "basis"], default="dims")
    return p


DEFAULT_VERIFY = {"instance": {"kind": "chain", "complex": "C->C"}}

NUMERIC_ERRORS = (HolonomyError, PoleProximityError, SeriesError, FloatingPointError, np.linalg.LinAlgError)
INPUT_ERRORS = (InputError, ConfigError, InstanceError, CarrierError, XModError, GeometryError, KeyError, TypeError)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.cmd == "holonomy":
            cfg = load_config(args.config)
            _emit(run_holonomy(cfg), args.output or cfg.output)
            return EXIT_OK
        if args.cmd == "verify":
            suites = parse_suites(args.suite)
            cfg = load_config(args.config, DEFAULT_VERIFY)
            report = run_verify(cfg, suites)
            print(report.text(), file=sys.stderr)
            _emit(report.to_json(args.timings), args.output or cfg.output)
            return EXIT_OK if report.passed else EXIT_FAIL
        _emit(run_carrier(args.spec, args.report), None)
        return EXIT_OK
    except ValidationError as exc:
        print(f"invalid configuration:\n{_format_validation(exc)}", file=sys.stderr)
        return EXIT_INPUT
    except NUMERIC_ERRORS as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except INPUT_ERRORS as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
