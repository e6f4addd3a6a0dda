"""``cv-teleport`` command line: entanglement sweeps, teleportation runs, self test.

Exit codes: 0 ok, 1 self-test failure, 2 configuration error, 3 convergence warning.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from cvteleport import _accel
from cvteleport.analysis import (
    distribution_to_csv,
    fringe_visibility,
    quadrature_distribution,
    wigner_function,
)
from cvteleport.conditioning import (
    SubtractionEvent,
    entanglement_entropy,
    entanglement_sweep,
    subtract_photons,
    subtract_photons_tmsv,
    sweep_to_csv,
    tmsv_entropy,
)
from cvteleport.numerics import gauss_legendre, oscillator_eigenfunctions
from cvteleport.states import (
    DensityMatrix,
    TruncationWarning,
    cat_truncation_weight,
    coherent_state,
    normalize,
    odd_cat_state,
    random_state,
    tmsv_truncation_weight,
    to_json,
    two_mode_squeezed_vacuum,
)
from cvteleport.teleport import (
    ConvergenceError,
    HomodyneOutcome,
    averaged_density_matrix,
    averaged_fidelity,
    conditional_fidelity,
    kernel_B,
    kernel_D,
    outcome_surface,
    teleport_oracle,
    teleported_coefficients,
)

log = logging.getLogger("cvteleport")

EXIT_OK = 0
EXIT_SELFTEST = 1
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    q: float = 0.8178
    alpha_re: float = 0.0
    alpha_im: float = 1.5
    n1: int = 1
    n2: int = 1
    r1: float = 0.15
    r2: float = 0.15
    dim: int = 64
    bound: float = 8.0
    order: int = 160
    entangled: str = "both"
    outcome: list | None = None
    r_values: list = field(default_factory=lambda: [round(0.005 * k, 3) for k in range(81)])
    wigner_bound: float = 4.0
    wigner_points: int = 81
    surface_bound: float = 4.0
    surface_points: int = 41
    x_bound: float = 5.0
    x_points: int = 1001
    max_truncation: float = 1e-8
    out: str = "."

    def validate(self):
        if not 0.0 < self.q < 1.0:
            raise ConfigError(f"q must lie in (0, 1), got {self.q}")
        for name in ("r1", "r2"):
            if not 0.0 <= getattr(self, name) < 1.0:
                raise ConfigError(f"{name} must lie in [0, 1), got {getattr(self, name)}")
        if any(not 0.0 <= r < 1.0 for r in self.r_values):
            raise ConfigError("every r value must lie in [0, 1)")
        if self.n1 < 0 or self.n2 < 0:
            raise ConfigError("photon counts must be non-negative")
        if self.dim < 8:
            raise ConfigError(f"dim must be >= 8, got {self.dim}")
        if self.bound <= 0 or self.order < 1:
            raise ConfigError("outcome grid needs bound > 0 and order >= 1")
        if self.entangled not in ("tmsv", "subtracted", "both"):
            raise ConfigError("entangled must be one of tmsv, subtracted, both")
        if self.outcome is not None and len(self.outcome) != 2:
            raise ConfigError("outcome takes two numbers, X0 and P1")
        if self.alpha_re == 0 and self.alpha_im == 0:
            raise ConfigError("cat amplitude alpha must be nonzero")
        for name in ("wigner_points", "surface_points", "x_points"):
            if getattr(self, name) < 2:
                raise ConfigError(f"{name} must be >= 2")

    @property
    def alpha(self):
        return complex(self.alpha_re, self.alpha_im)

    @property
    def event(self):
        return SubtractionEvent(self.n1, self.n2, self.r1, self.r2)


def load_config(path, overrides) -> RunConfig:
    values = {}
    if path:
        try:
            values.update(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    values.update({k: v for k, v in overrides.items() if v is not None})
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write(outdir: Path, name: str, text: str):
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / name).write_text(text)
    log.info("wrote %s", outdir / name)


# ---------------------------------------------------------------------------
# entangle
# ---------------------------------------------------------------------------


def cmd_entangle(cfg: RunConfig) -> int:
    rows = entanglement_sweep(cfg.q, cfg.n1, cfg.n2, cfg.r_values, cfg.dim)
    outdir = Path(cfg.out)
    _write(outdir, "entangle_sweep.csv", sweep_to_csv(rows))

    base = entanglement_entropy(two_mode_squeezed_vacuum(cfg.q, cfg.dim))
    valid = [row for row in rows if not math.isnan(row.entropy_bits)]
    best = max(valid, key=lambda row: row.entropy_bits, default=None)
    worst_trunc = max((row.truncation_weight for row in rows), default=0.0)
    worst_trunc = max(worst_trunc, tmsv_truncation_weight(cfg.q, cfg.dim))
    summary = {
        "q": cfg.q,
        "n1": cfg.n1,
        "n2": cfg.n2,
        "dim": cfg.dim,
        "tmsv_entropy_bits": base,
        "tmsv_entropy_bits_analytic": tmsv_entropy(cfg.q),
        "max_entropy_bits": best.entropy_bits if best else None,
        "r_at_max_entropy": best.r if best else None,
        "max_entropy_gain_bits": (best.entropy_bits - base) if best else None,
        "max_truncation_weight": worst_trunc,
    }
    _write(outdir, "entangle_summary.json", _dump_json(summary))
    if worst_trunc > cfg.max_truncation:
        log.warning("truncation weight %.3e exceeds %.1e; raise --dim", worst_trunc, cfg.max_truncation)
        return EXIT_CONVERGENCE
    return EXIT_OK


# ---------------------------------------------------------------------------
# teleport
# ---------------------------------------------------------------------------


def _entangled_cases(cfg: RunConfig):
    """Yield (name, normalized entangled state, heralding probability)."""
    tmsv = two_mode_squeezed_vacuum(cfg.q, cfg.dim)
    if cfg.entangled in ("tmsv", "both"):
        yield "tmsv", normalize(tmsv), 1.0
    if cfg.entangled in ("subtracted", "both"):
        sub, prob = subtract_photons(tmsv, cfg.event)
        yield "subtracted", normalize(sub), prob


def _grids(cfg):
    wx = np.linspace(-cfg.wigner_bound, cfg.wigner_bound, cfg.wigner_points)
    sx = np.linspace(-cfg.surface_bound, cfg.surface_bound, cfg.surface_points)
    xx = np.linspace(-cfg.x_bound, cfg.x_bound, cfg.x_points)
    return wx, sx, xx


def _safe_visibility(pr, xx):
    try:
        return fringe_visibility(pr, xx)
    except ValueError:
        return None


def cmd_teleport(cfg: RunConfig) -> int:
    outdir = Path(cfg.out)
    status = EXIT_OK
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", TruncationWarning)
        inp = odd_cat_state(cfg.alpha, cfg.dim)
    if caught:
        log.warning("%s", caught[0].message)
        status = EXIT_CONVERGENCE
    if tmsv_truncation_weight(cfg.q, cfg.dim) > cfg.max_truncation:
        log.warning("squeezed vacuum truncated at dim=%d loses %.2e", cfg.dim, tmsv_truncation_weight(cfg.q, cfg.dim))
        status = EXIT_CONVERGENCE

    wx, sx, xx = _grids(cfg)
    rho_in = DensityMatrix.from_pure(inp)
    pr_in = quadrature_distribution(rho_in, xx)
    w_in = wigner_function(rho_in, wx, wx)
    _write(outdir, "wigner_input.csv", w_in.to_csv())
    _write(outdir, "wigner_input.json", w_in.header(state="input") + "\n")
    _write(outdir, "quadrature_input.csv", distribution_to_csv(xx, pr_in))

    summary = {
        "q": cfg.q,
        "alpha": [cfg.alpha_re, cfg.alpha_im],
        "dim": cfg.dim,
        "input_visibility": _safe_visibility(pr_in, xx),
        "cases": {},
    }
    if cfg.outcome is None:
        summary["outcome_grid"] = {"bound": cfg.bound, "order": cfg.order}
    else:
        summary["outcome"] = list(cfg.outcome)
    if cfg.entangled in ("subtracted", "both"):
        summary["event"] = dataclasses.asdict(cfg.event)

    grid = gauss_legendre(cfg.order, -cfg.bound, cfg.bound)
    for name, ent, herald in _entangled_cases(cfg):
        case = {"success_probability": herald, "entropy_bits": entanglement_entropy(ent)}
        if cfg.outcome is not None:
            outcome = HomodyneOutcome(*cfg.outcome)
            b = teleported_coefficients(inp, ent, outcome)
            case["probability_density"] = float(np.vdot(b.coeffs, b.coeffs).real)
            case["conditional_fidelity"] = conditional_fidelity(inp, ent, outcome)
            rho = DensityMatrix.from_pure(normalize(b))
            tag = f"outcome_{name}"
        else:
            try:
                rho = averaged_density_matrix(inp, ent, grid, grid)
            except ConvergenceError as exc:
                log.warning("%s: %s", name, exc)
                status = EXIT_CONVERGENCE
                rho = averaged_density_matrix(inp, ent, grid, grid, max_loss=None)
            case["trace"] = rho.trace
            case["averaged_fidelity"] = averaged_fidelity(inp, rho)
            surface = outcome_surface(inp, ent, sx, sx)
            _write(outdir, f"surface_{name}.csv", surface.to_csv())
            _write(outdir, f"rho_{name}.json", to_json(rho) + "\n")
            tag = name
        rho_n = DensityMatrix(rho.elements / rho.trace)
        pr = quadrature_distribution(rho_n, xx)
        case["fringe_visibility"] = _safe_visibility(pr, xx)
        w = wigner_function(rho_n, wx, wx)
        _write(outdir, f"wigner_{tag}.csv", w.to_csv())
        _write(outdir, f"wigner_{tag}.json", w.header(state=tag) + "\n")
        _write(outdir, f"quadrature_{tag}.csv", distribution_to_csv(xx, pr))
        summary["cases"][name] = case

    _write(outdir, "teleport_summary.json", _dump_json(summary))
    return status


# ---------------------------------------------------------------------------
# selftest
# ---------------------------------------------------------------------------


def _check(report, name, deviation, tol):
    ok = bool(np.isfinite(deviation) and deviation <= tol)
    report.append((name, ok, float(deviation), tol))
    return ok


def run_selftest(dim: int = 64, bound: float = 8.0, order: int = 160, q: float = 0.8178):
    """Oracle cross-checks. Returns a list of ``(name, passed, deviation, tolerance)``."""
    report = []
    rng = np.random.default_rng(20240611)

    # closed-form kernels against their defining overlap integrals
    xs = gauss_legendre(600, -14.0, 14.0)
    kmax = min(dim, 8)
    dev_b = dev_d = 0.0
    for X0, P1 in [(0.7, -0.3), (1.1, 0.4), (-0.5, 1.3)]:
        x = xs.nodes
        phi = oscillator_eigenfunctions(kmax - 1, x)
        phis = oscillator_eigenfunctions(kmax - 1, x - math.sqrt(2) * X0)
        Bq = (phi * np.exp(1j * math.sqrt(2) * P1 * x) * xs.weights) @ phis.T
        phl = oscillator_eigenfunctions(kmax - 1, (x - X0) / math.sqrt(2))
        phn = oscillator_eigenfunctions(kmax - 1, (x + X0) / math.sqrt(2))
        Dq = (phl * np.exp(-1j * P1 * x) * xs.weights) @ phn.T
        phase = np.exp(1j * X0 * P1)
        for m in range(kmax):
            for k in range(kmax):
                dev_b = max(dev_b, abs(Bq[m, k] - phase * kernel_B(m, k, (X0, P1))))
                dev_d = max(dev_d, abs(Dq[m, k] - kernel_D(m, k, (X0, P1))))
    _check(report, "kernel B vs overlap integral", dev_b, 1e-8)
    _check(report, "kernel D vs overlap integral", dev_d, 1e-8)

    # general subtraction map against the squeezed-vacuum closed form
    dev = 0.0
    tmsv = two_mode_squeezed_vacuum(q, dim)
    for n1 in range(5):
        for n2 in range(5):
            for r in (0.05, 0.15, 0.3):
                ev = SubtractionEvent(n1, n2, r, r)
                a, _ = subtract_photons(tmsv, ev)
                b, _ = subtract_photons_tmsv(q, ev, dim)
                dev = max(dev, float(np.max(np.abs(a.coeffs - b.coeffs))))
    _check(report, "photon subtraction: general map vs closed form", dev, 1e-12)

    # truncation of the states used by the teleport defaults
    _check(report, "squeezed-vacuum truncation weight", tmsv_truncation_weight(q, dim), 1e-8)
    _check(report, "cat-state truncation weight", cat_truncation_weight(1.5j, dim), 1e-8)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        cat = odd_cat_state(1.5j, dim)

    # Fock pipeline against direct wave-function quadrature
    ent = normalize(tmsv)
    dev = 0.0
    states = [cat] + [random_state(dim, min(dim, 10), rng) for _ in range(2)]
    for inp in states:
        for X0, P1 in rng.uniform(-2.0, 2.0, size=(3, 2)):
            b = teleported_coefficients(inp, ent, (X0, P1)).coeffs
            o = teleport_oracle(inp, ent, (X0, P1)).coeffs
            dev = max(dev, float(np.max(np.abs(b - o))))
    _check(report, "Fock kernels vs wave-function oracle", dev, 1e-6)

    # probability conservation on the outcome grid
    grid = gauss_legendre(order, -bound, bound)
    rho = averaged_density_matrix(cat, ent, grid, grid, max_loss=None)
    _check(report, "integrated outcome probability", abs(rho.trace - 1.0), 1e-5)

    # coherent input against the analytic fidelity 1 / (1 + exp(-2 r))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        coh = coherent_state(1.0, dim)
    rho_c = averaged_density_matrix(coh, ent, grid, grid, max_loss=None)
    expected = 1.0 / (1.0 + math.exp(-2.0 * math.atanh(q)))
    _check(report, "coherent-state fidelity vs analytic", abs(averaged_fidelity(coh, rho_c) - expected), 5e-3)
    return report


def cmd_selftest(dim=64, bound=8.0, order=160, stream=None) -> int:
    stream = stream or sys.stdout
    report = run_selftest(dim=dim, bound=bound, order=order)
    for name, ok, dev, tol in report:
        stream.write(f"{'PASS' if ok else 'FAIL'}  {name}: deviation {dev:.3e} (tol {tol:.1e})\n")
    failed = [r for r in report if not r[1]]
    stream.write(f"{len(report) - len(failed)}/{len(report)} checks passed\n")
    return EXIT_OK if not failed else EXIT_SELFTEST


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser():
    parser = argparse.ArgumentParser(prog="cv-teleport", description=__doc__.splitlines()[0])
    parser.add_argument("--threads", type=int, default=None, help="cap worker threads")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
        p.add_argument("--out", help="output directory")
        p.add_argument("--q", type=float)
        p.add_argument("--dim", type=int)
        p.add_argument("--n1", type=int)
        p.add_argument("--n2", type=int)
        p.add_argument("--max-truncation", dest="max_truncation", type=float)

    ent = sub.add_parser("entangle", help="entropy and heralding probability versus reflectance")
    common(ent)
    ent.add_argument("--r-values", dest="r_values", type=_floats, help="comma-separated reflectances")

    tel = sub.add_parser("teleport", help="teleport the odd cat state")
    common(tel)
    tel.add_argument("--alpha-re", dest="alpha_re", type=float)
    tel.add_argument("--alpha-im", dest="alpha_im", type=float)
    tel.add_argument("--r1", type=float)
    tel.add_argument("--r2", type=float)
    tel.add_argument("--entangled", choices=("tmsv", "subtracted", "both"))
    tel.add_argument("--bound", type=float, help="outcome grid half-width")
    tel.add_argument("--order", type=int, help="Gauss-Legendre nodes per outcome axis")
    tel.add_argument("--outcome", nargs=2, type=float, metavar=("X0", "P1"))
    tel.add_argument("--wigner-bound", dest="wigner_bound", type=float)
    tel.add_argument("--wigner-points", dest="wigner_points", type=int)
    tel.add_argument("--surface-bound", dest="surface_bound", type=float)
    tel.add_argument("--surface-points", dest="surface_points", type=int)
    tel.add_argument("--x-bound", dest="x_bound", type=float)
    tel.add_argument("--x-points", dest="x_points", type=int)

    st = sub.add_parser("selftest", help="run oracle cross-checks")
    st.add_argument("--dim", type=int, default=64)
    st.add_argument("--bound", type=float, default=8.0)
    st.add_argument("--order", type=int, default=160)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        _accel.set_threads(args.threads)
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG

    if args.command == "selftest":
        if args.dim < 1 or args.order < 1 or args.bound <= 0:
            log.error("selftest needs dim >= 1, order >= 1, bound > 0")
            return EXIT_CONFIG
        return cmd_selftest(args.dim, args.bound, args.order)

    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config", "threads", "verbose")}
    try:
        cfg = load_config(args.config, overrides)
    except (ConfigError, TypeError, ValueError) as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    if args.command == "entangle":
        return cmd_entangle(cfg)
    return cmd_teleport(cfg)


if __name__ == "__main__":
    sys.exit(main())
