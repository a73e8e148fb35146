"""Command-line front end: solve, verify, scan, oracle.

Outputs are static artifacts: CSV tables (floats at 17 significant digits),
verification certificates as JSON, and minimal self-contained SVG plots
(polyline + axes, no plotting dependency).

Exit codes: 0 success, 1 error (bad input, solver failure), 2 verification
attempted but not successful.
"""

from __future__ import annotations

import csv
import math
import os
import sys
import time
from dataclasses import dataclass, field

import click
import numpy as np

from .haar import MAX_LEVEL, collocation_points
from .opmat import get_opmats
from .oracle import emit_reference_csv, integral_Gamma_entry, integral_P_entry, logistic_reference_coeffs
from .problems import (
    ForcedLogistic,
    Logistic,
    Lorenz,
    NoConvergence,
    ProblemSpec,
    SingularJacobian,
    default_initial_guess,
    newton_solve,
    reconstruct_solution,
)
from .verifier import AllOmegaFailed, build_A, compute_bounds, find_radius, optimize_omega, verify

_PROBLEMS = ("logistic", "forced-logistic", "lorenz")


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


@dataclass
class RunConfig:
    problem: str = "logistic"
    lam: float = 6.0
    u0: float = 0.2
    sigma: float = 10.0
    rho: float = 28.0
    beta: float = 8.0 / 3.0
    ic: tuple[float, float, float] = (9.0, 9.0, 27.0)
    J: int = 6
    j_range: tuple[int, int] | None = None
    omega: float | None = None
    omega_grid: tuple[float, float, float] | None = None
    tol: float = 1e-12
    max_iter: int = 50
    out: str = "."
    cache: bool = True

    def validate(self) -> None:
        if self.problem not in _PROBLEMS:
            raise ValueError(f"unknown problem {self.problem!r}; choose from {_PROBLEMS}")
        js = [self.J] if self.j_range is None else list(self.j_range)
        for j in js:
            if not 0 <= j <= MAX_LEVEL:
                raise ValueError(f"J={j} outside supported range [0, {MAX_LEVEL}]")
        if self.j_range is not None and self.j_range[0] > self.j_range[1]:
            raise ValueError("J-range start exceeds end")
        if self.omega is not None and not 0.0 < self.omega < 1.0:
            raise ValueError("omega must lie strictly between 0 and 1")
        if self.omega_grid is not None:
            a, b, step = self.omega_grid
            if step <= 0 or not (0.0 < a <= b < 1.0):
                raise ValueError("omega-grid must satisfy 0 < a <= b < 1 with step > 0")
            if not self.grid_values():
                raise ValueError("omega-grid is empty")
        for name in ("lam", "u0", "sigma", "rho", "beta", "tol"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"parameter {name} is not finite")
        if any(not math.isfinite(v) for v in self.ic):
            raise ValueError("initial conditions must be finite")

    def grid_values(self) -> list[float]:
        if self.omega_grid is None:
            return []
        a, b, step = self.omega_grid
        out = []
        k = 0
        while True:
            w = a + k * step
            if w > b + 1e-12:
                break
            if 0.0 < w < 1.0:
                out.append(round(w, 12))
            k += 1
        return out

    def spec(self) -> ProblemSpec:
        if self.problem == "logistic":
            return Logistic(lam=self.lam, u0=self.u0)
        if self.problem == "forced-logistic":
            return ForcedLogistic(lam=self.lam, u0=self.u0)
        return Lorenz(self.sigma, self.rho, self.beta, *self.ic)


def _read_config_file(path: str) -> dict[str, str]:
    """Flat key=value lines; '#' starts a comment; blank lines ignored."""
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def _parse_j_range(text: str) -> tuple[int, int]:
    a, _, b = text.partition("..")
    if not b:
        raise ValueError(f"J-range must look like a..b, got {text!r}")
    return int(a), int(b)


def _parse_omega_grid(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"omega-grid must look like a:b:step, got {text!r}")
    return float(parts[0]), float(parts[1]), float(parts[2])


def _parse_ic(text: str) -> tuple[float, float, float]:
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != 3:
        raise ValueError(f"--ic needs three numbers x,y,z, got {text!r}")
    return tuple(float(p) for p in parts)  # type: ignore[return-value]


_CONFIG_PARSERS = {
    "problem": str,
    "lam": float,
    "u0": float,
    "sigma": float,
    "rho": float,
    "beta": float,
    "ic": _parse_ic,
    "J": int,
    "j_range": _parse_j_range,
    "omega": float,
    "omega_grid": _parse_omega_grid,
    "tol": float,
    "max_iter": int,
    "out": str,
    "cache": lambda s: s.lower() in ("1", "true", "yes", "on"),
}


def build_config(config_path: str | None, overrides: dict) -> RunConfig:
    cfg = RunConfig()
    if config_path:
        for key, raw in _read_config_file(config_path).items():
            if key not in _CONFIG_PARSERS:
                raise ValueError(f"unknown config key {key!r}")
            setattr(cfg, key, _CONFIG_PARSERS[key](raw))
    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, value)
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# Minimal SVG plotting
# ---------------------------------------------------------------------------

_COLORS = ("#1f6fb2", "#c2423f", "#3a9a5c")


def write_svg(
    path: str,
    xs: np.ndarray,
    series: list[np.ndarray],
    labels: list[str],
    title: str = "",
    log_y: bool = False,
) -> None:
    width, height, margin = 640, 420, 50
    ys_all = np.concatenate(series)
    if log_y:
        ys_all = np.log10(np.maximum(ys_all, 1e-300))
    x0, x1 = float(np.min(xs)), float(np.max(xs))
    y0, y1 = float(np.min(ys_all)), float(np.max(ys_all))
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def sx(x: float) -> float:
        return margin + (x - x0) / (x1 - x0) * (width - 2 * margin)

    def sy(y: float) -> float:
        return height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height-margin}" x2="{width-margin}" y2="{height-margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height-margin}" stroke="black"/>',
    ]
    if title:
        parts.append(f'<text x="{width/2}" y="20" text-anchor="middle" font-size="14">{title}</text>')
    for tick in np.linspace(x0, x1, 5):
        parts.append(
            f'<text x="{sx(tick):.1f}" y="{height-margin+18}" text-anchor="middle" font-size="10">{tick:.3g}</text>'
        )
    for tick in np.linspace(y0, y1, 5):
        label = f"1e{tick:.2f}" if log_y else f"{tick:.3g}"
        parts.append(
            f'<text x="{margin-6}" y="{sy(tick):.1f}" text-anchor="end" font-size="10">{label}</text>'
        )
    for k, (ys, label) in enumerate(zip(series, labels)):
        plot_ys = np.log10(np.maximum(ys, 1e-300)) if log_y else ys
        points = " ".join(f"{sx(float(x)):.2f},{sy(float(y)):.2f}" for x, y in zip(xs, plot_ys))
        color = _COLORS[k % len(_COLORS)]
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{points}"/>')
        parts.append(
            f'<text x="{width-margin-4}" y="{margin+14*(k+1)}" text-anchor="end" '
            f'font-size="11" fill="{color}">{label}</text>'
        )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _common_options(fn):
    opts = [
        click.option("--config", "config_path", type=click.Path(exists=True), default=None,
                     help="Flat key=value config file; CLI flags override it."),
        click.option("--problem", type=click.Choice(_PROBLEMS), default=None),
        click.option("--lambda", "lam", type=float, default=None, help="Logistic growth rate."),
        click.option("--u0", type=float, default=None, help="Logistic initial value."),
        click.option("--sigma", type=float, default=None),
        click.option("--rho", type=float, default=None),
        click.option("--beta", type=float, default=None),
        click.option("--ic", type=str, default=None, callback=lambda c, p, v: _parse_ic(v) if v else None,
                     help="Lorenz initial conditions as x,y,z."),
        click.option("--J", "J", type=int, default=None, help="Resolution level (M = 2^(J+1))."),
        click.option("--tol", type=float, default=None),
        click.option("--max-iter", "max_iter", type=int, default=None),
        click.option("--out", type=click.Path(), default=None, help="Output directory."),
        click.option("--cache/--no-cache", "cache", default=None,
                     help="Reuse matrices from the on-disk cache (HAARVERIFY_CACHE_DIR)."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _prepare(cfg: RunConfig):
    os.makedirs(cfg.out, exist_ok=True)
    spec = cfg.spec()
    ops = get_opmats(cfg.J, use_cache=cfg.cache)
    result = newton_solve(
        spec, ops, default_initial_guess(spec, ops), tol=cfg.tol, max_iter=cfg.max_iter
    )
    return spec, ops, result


def _fail(message: str, code: int = 1) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@click.group()
def main() -> None:
    """Rigorous ODE solving and a-posteriori verification on [0, 1]."""


@main.command()
@_common_options
def solve(config_path, **overrides) -> None:
    """Solve the collocation system and write the solution CSV + SVG plot."""
    try:
        cfg = build_config(config_path, overrides)
        spec, ops, result = _prepare(cfg)
    except (ValueError, NoConvergence, SingularJacobian) as exc:
        _fail(str(exc))
    t = collocation_points(cfg.J)
    u = reconstruct_solution(spec, ops, result.cbar, t)
    csv_path = os.path.join(cfg.out, "solution.csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if cfg.problem == "lorenz":
            writer.writerow(["t", "x", "y", "z"])
            for k in range(t.size):
                writer.writerow([_fmt(t[k])] + [_fmt(u[i, k]) for i in range(3)])
            series = [u[0], u[1], u[2]]
            labels = ["x", "y", "z"]
        else:
            writer.writerow(["t", "u"])
            for k in range(t.size):
                writer.writerow([_fmt(t[k]), _fmt(u[k])])
            series = [u]
            labels = ["u"]
    write_svg(os.path.join(cfg.out, "solution.svg"), t, series, labels,
              title=f"{cfg.problem} J={cfg.J}")
    click.echo(f"wrote {csv_path} ({t.size} rows), residual {result.residual_norm:.3e}")


@main.command("verify")
@_common_options
@click.option("--omega", type=float, default=None,
              help="Ball-splitting weight in (0,1); omitted = optimized by scan.")
def verify_cmd(config_path, omega, **overrides) -> None:
    """Verify the solved system; write a certificate JSON.

    Exit code 0 when verified, 2 when verification fails, 1 on error.
    """
    overrides["omega"] = omega
    try:
        cfg = build_config(config_path, overrides)
        spec, ops, result = _prepare(cfg)
        cert = verify(
            spec, ops, result.cbar, omega=cfg.omega,
            A_M=result.A_M, solver_residual=result.residual_norm,
        )
    except (ValueError, NoConvergence, SingularJacobian) as exc:
        _fail(str(exc))
    cert_path = os.path.join(cfg.out, "certificate.json")
    with open(cert_path, "w", encoding="utf-8") as fh:
        fh.write(cert.to_json(indent=2))
    if cert.verified:
        click.echo(
            f"VERIFIED {cfg.problem} J={cfg.J}: true solution within "
            f"r0={_fmt(cert.r0)} of the numerical one (omega={cert.omega})"
        )
        sys.exit(0)
    click.echo(
        f"NOT VERIFIED {cfg.problem} J={cfg.J}: dominant term {cert.dominant_term}; "
        "try a larger J or a different omega",
        err=True,
    )
    click.echo(f"certificate written to {cert_path}", err=True)
    sys.exit(2)


@main.command()
@_common_options
@click.option("--J-range", "j_range", type=str, default=None,
              callback=lambda c, p, v: _parse_j_range(v) if v else None,
              help="Inclusive resolution range a..b.")
@click.option("--omega-grid", "omega_grid", type=str, default=None,
              callback=lambda c, p, v: _parse_omega_grid(v) if v else None,
              help="Weight grid a:b:step; omitted = built-in optimizer.")
def scan(config_path, **overrides) -> None:
    """Verify across a J range; write a (J, omega*, r0, time) CSV and plot."""
    try:
        cfg = build_config(config_path, overrides)
    except ValueError as exc:
        _fail(str(exc))
    if cfg.j_range is None:
        cfg.j_range = (cfg.J, cfg.J)
    os.makedirs(cfg.out, exist_ok=True)
    grid = cfg.grid_values()
    rows = []
    for J in range(cfg.j_range[0], cfg.j_range[1] + 1):
        cfg_j = RunConfig(**{**cfg.__dict__, "J": J})
        start = time.perf_counter()
        try:
            spec, ops, result = _prepare(cfg_j)
            bounds = compute_bounds(spec, ops, result.cbar, result.A_M)
        except (ValueError, NoConvergence, SingularJacobian) as exc:
            _fail(f"J={J}: {exc}")
        best = None
        if grid:
            for w in grid:
                r = find_radius(bounds, w)
                if r is not None and (best is None or r < best[1]):
                    best = (w, r)
        else:
            try:
                best = optimize_omega(bounds)
            except AllOmegaFailed:
                best = None
        elapsed = time.perf_counter() - start
        if best is None:
            click.echo(f"J={J}: no omega admits a radius", err=True)
            rows.append((J, float("nan"), float("nan"), elapsed))
        else:
            rows.append((J, best[0], best[1], elapsed))
            click.echo(f"J={J}: omega*={best[0]:.3f} r0={_fmt(best[1])} [{elapsed:.2f}s]")
    csv_path = os.path.join(cfg.out, "scan.csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["J", "omega_star", "r0", "time_s"])
        for J, w, r, dt in rows:
            writer.writerow([J, _fmt(w), _fmt(r), _fmt(dt)])
    good = [(J, r) for J, _, r, _ in rows if math.isfinite(r)]
    if good:
        write_svg(
            os.path.join(cfg.out, "scan.svg"),
            np.array([J for J, _ in good], dtype=float),
            [np.array([r for _, r in good])],
            ["r0"],
            title=f"{cfg.problem}: radius vs resolution",
            log_y=True,
        )
    click.echo(f"wrote {csv_path}")
    if not good:
        sys.exit(2)


@main.command()
@click.option("--what", type=click.Choice(["p-entries", "gamma-entries", "logistic-coeffs"]),
              default="logistic-coeffs", show_default=True)
@click.option("--J", "J", type=int, default=6, show_default=True)
@click.option("--lambda", "lam", type=float, default=6.0, show_default=True)
@click.option("--u0", type=float, default=0.2, show_default=True)
@click.option("--out", type=click.Path(), default=".", show_default=True)
def oracle(what, J, lam, u0, out) -> None:
    """Emit independently computed reference values as CSV."""
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, f"oracle_{what.replace('-', '_')}.csv")
    try:
        if what == "logistic-coeffs":
            coeffs = logistic_reference_coeffs(lam, u0, J)
            emit_reference_csv(path, [(i + 1, c) for i, c in enumerate(coeffs)], ["i", "c_i"])
        else:
            entry = integral_P_entry if what == "p-entries" else integral_Gamma_entry
            M = 2 ** (J + 1)
            if M > 64:
                _fail("entry tables limited to J <= 4")
            rows = []
            for i in range(1, M + 1):
                for l in range(1, M + 1):
                    rows.append((i, l, float(entry(i, l).evalf(20))))
            emit_reference_csv(path, rows, ["i", "l", "value"])
    except ValueError as exc:
        _fail(str(exc))
    click.echo(f"wrote {path}")


if __name__ == "__main__":
    main()
