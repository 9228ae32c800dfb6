"""Batch experiment runner.

    dbsampler <kind> --config <path> [--out <path>] [--seed <u64>] [--figure <png>]

The config is flat ``key = value`` text with ``#`` comments.  Output is a
CSV file: a ``# config:`` comment row, a header row, then data rows with
17 significant digits.  Exit codes: 0 success, 2 invalid input, 3
numerical failure; on failure a single JSON error record goes to stderr.
Column layouts are listed in docs/schemas.md.
"""

from __future__ import annotations

import argparse
import ast
import io
import json
import operator
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, NumericalError
from .fitting import decay_fit
from .identities import IDENTITIES, ibp_identity_residual, identity_sides
from .kernel import KernelEvaluator
from .model import ProblemSetup
from .potentials import Potential
from .sampling import (
    CompactGrid,
    Profile,
    alias_reconstruct,
    default_grid,
    noise_sequence,
    oversample_reconstruct,
    parseval_defect,
    reconstruct_exact,
    transform,
)
from .spectrum import asymptotic_prediction, compute_spectrum

KINDS = ("spectrum", "kernel-check", "exact", "oversample", "alias", "pw-baseline", "ibp-check", "decay-fit")

_SETUP_KEYS = ("nu", "s", "gamma", "q", "q_c", "q_beta", "q_r", "q_center", "q_width", "q_file")
_GRID_KEYS = ("grid_x_lo", "grid_x_hi", "grid_h", "grid_m", "grid_k")
_PROFILE_KEYS = ("profile", "profile_lo", "profile_hi", "profile_power", "profile_amplitude", "profile_file")
_ALLOWED = {
    "spectrum": _SETUP_KEYS + ("N",),
    "kernel-check": _SETUP_KEYS + _GRID_KEYS,
    "exact": _SETUP_KEYS + _GRID_KEYS + _PROFILE_KEYS + ("N",),
    "oversample": _SETUP_KEYS + _GRID_KEYS + _PROFILE_KEYS + ("N", "a", "delta", "noise_convention"),
    "alias": _SETUP_KEYS + _GRID_KEYS + _PROFILE_KEYS + ("N", "a"),
    "pw-baseline": ("mode", "a", "b", "N", "delta", "packet", "packet_c", "packet_terms",
                    "grid_x_lo", "grid_x_hi", "grid_m"),
    "ibp-check": _SETUP_KEYS + ("a", "b", "t", "z", "identities"),
    "decay-fit": _SETUP_KEYS + ("quantity", "N", "n_lo", "n_hi", "a", "z"),
}


# ---------------------------------------------------------------------------
# config parsing


def parse_config(text: str) -> dict:
    """Flat key = value pairs; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, val = (p.strip() for p in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = val
    return out


class Params:
    """Typed access to a parsed config."""

    def __init__(self, kind, raw: dict):
        self.kind = kind
        self.raw = dict(raw)
        allowed = set(_ALLOWED[kind]) | {"seed"}
        unknown = sorted(set(raw) - allowed)
        if unknown:
            raise ConfigError(f"unknown keys for {kind}: {', '.join(unknown)}")

    def has(self, key):
        return key in self.raw

    def _get(self, key, default):
        if key not in self.raw:
            if default is _REQUIRED:
                raise ConfigError(f"missing required key {key!r} for {self.kind}")
            return None if default is None else str(default)
        return self.raw[key]

    def float(self, key, default=None):
        v = self._get(key, default)
        if v is None:
            return None
        return _number(key, v)

    def int(self, key, default=None):
        v = self.float(key, default)
        if v is None:
            return None
        if v != int(v):
            raise ConfigError(f"key {key!r} must be an integer")
        return int(v)

    def str(self, key, default=None):
        return self._get(key, default)

    def floats(self, key, default=None):
        v = self._get(key, default)
        if v is None:
            return None
        return [self._num(key, p) for p in v.split(",") if p.strip()]

    def ints(self, key, default=None):
        vals = self.floats(key, default)
        if vals is None:
            return None
        if any(v != int(v) for v in vals):
            raise ConfigError(f"key {key!r} must hold integers")
        return [int(v) for v in vals]

    def complexes(self, key, default=None):
        v = self._get(key, default)
        if v is None:
            return None
        out = []
        for p in v.split(","):
            p = p.strip().replace(" ", "").replace("i", "j")
            try:
                out.append(complex(p))
            except ValueError as exc:
                raise ConfigError(f"key {key!r}: cannot read {p!r} as a complex number") from exc
        return out

    def _num(self, key, p):
        return _number(key, p)


_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}


def _number(key, text):
    """Real number; accepts arithmetic on literals, ``pi`` and ``inf`` (e.g. pi/2)."""

    def ev(node):
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in ("pi", "inf"):
            return np.pi if node.id == "pi" else np.inf
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        raise ValueError

    try:
        return float(ev(ast.parse(text.strip(), mode="eval").body))
    except (SyntaxError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"key {key!r}: cannot read {text!r} as a number") from exc


_REQUIRED = object()


def _setup(p: Params) -> ProblemSetup:
    nu = p.float("nu", _REQUIRED)
    s = p.float("s", _REQUIRED)
    gamma = p.float("gamma", _REQUIRED)
    kind = p.str("q", "zero")
    r = p.float("q_r", "inf")
    if kind == "zero":
        q = Potential.zero()
    elif kind == "constant":
        q = Potential.constant(p.float("q_c", _REQUIRED))
    elif kind == "power":
        q = Potential.power(p.float("q_c", _REQUIRED), p.float("q_beta", _REQUIRED), r)
    elif kind == "bump":
        q = Potential.bump(p.float("q_c", _REQUIRED), p.float("q_center", _REQUIRED), p.float("q_width", _REQUIRED))
    elif kind == "file":
        q = Potential.from_file(p.str("q_file", _REQUIRED), r)
    else:
        raise ConfigError(f"unknown potential kind {kind!r}")
    return ProblemSetup(nu, s, q, gamma)


def _profile(p: Params, lo_default, hi_default) -> Profile:
    kind = p.str("profile", _REQUIRED)
    lo = p.float("profile_lo", lo_default)
    hi = p.float("profile_hi", hi_default)
    amp = p.float("profile_amplitude", 1.0)
    if kind == "bump":
        return Profile.bump(lo, hi, amp)
    if kind == "indicator":
        return Profile.indicator(lo, hi, amp)
    if kind == "ramp":
        return Profile.ramp(lo, hi, amp)
    if kind == "polynomial":
        return Profile.polynomial(lo, hi, p.int("profile_power", 1), amp)
    if kind == "file":
        return Profile.from_file(p.str("profile_file", _REQUIRED))
    raise ConfigError(f"unknown profile kind {kind!r}")


def _grid(p: Params, default: CompactGrid) -> CompactGrid:
    return CompactGrid(
        p.float("grid_x_lo", default.x_lo),
        p.float("grid_x_hi", default.x_hi),
        p.float("grid_h", default.h),
        p.int("grid_m", default.m),
        p.int("grid_k", default.k),
    )


# ---------------------------------------------------------------------------
# experiments: each returns (header, rows, figure callback or None)


def _prepare(kind, p: Params, seed: int):
    """Validate and type every input before any computation; returns a thunk."""
    if kind == "pw-baseline":
        return _prepare_pw(p, seed)
    setup = _setup(p)

    if kind == "spectrum":
        N = p.int("N", _REQUIRED)
        if N < 1:
            raise ConfigError("N must be >= 1")
        return lambda: _run_spectrum(setup, N)

    if kind == "kernel-check":
        grid = _grid(p, CompactGrid(0.5, 20.0, 1.0, 5, 2))
        return lambda: _run_kernel_check(setup, grid)

    if kind == "exact":
        Ns = p.ints("N", _REQUIRED)
        prof = _profile(p, 0.0, setup.s)
        grid = _grid(p, default_grid(max(Ns), setup.s))
        return lambda: _run_exact(setup, prof, Ns, grid)

    if kind == "oversample":
        Ns = p.ints("N", _REQUIRED)
        a = p.float("a", _REQUIRED)
        deltas = p.floats("delta", _REQUIRED)
        conv = p.str("noise_convention", "definition")
        if not 0 < a < setup.s:
            raise ConfigError("oversampling needs 0 < a < s")
        prof = _profile(p, 0.05 * a, 0.95 * a)
        grid = _grid(p, default_grid(max(Ns), setup.s))
        for d in deltas:
            noise_sequence(setup.nu, d, 1, seed, convention=conv)  # validates delta and convention
        return lambda: _run_oversample(setup, prof, a, Ns, deltas, conv, seed, grid)

    if kind == "alias":
        Ns = p.ints("N", _REQUIRED)
        a = p.float("a", _REQUIRED)
        if not 0 < a < setup.s:
            raise ConfigError("aliasing needs 0 < a < s")
        if setup.gamma == 0.0:
            raise ConfigError("aliasing requires gamma in (0, pi); gamma = 0 is excluded by the aliasing theorem")
        prof = _profile(p, 0.0, setup.s)
        grid = _grid(p, default_grid(max(Ns), a))
        return lambda: _run_alias(setup, prof, a, Ns, grid)

    if kind == "ibp-check":
        a = p.float("a", _REQUIRED)
        b = p.float("b", setup.s)
        ts = p.floats("t", _REQUIRED)
        zs = p.complexes("z", _REQUIRED)
        which = [w.strip() for w in p.str("identities", "A1,A2,A3").split(",")]
        if any(w not in IDENTITIES for w in which):
            raise ConfigError(f"identities must be among {IDENTITIES}")
        if not 0 < a < b:
            raise ConfigError("ibp-check needs 0 < a < b")
        if len(ts) != len(zs):
            raise ConfigError("t and z lists must have the same length")
        return lambda: _run_ibp(setup, a, b, ts, zs, which)

    if kind == "decay-fit":
        quantity = p.str("quantity", _REQUIRED)
        N = p.int("N", _REQUIRED)
        n_lo = p.int("n_lo", 20)
        n_hi = p.int("n_hi", N)
        if quantity not in ("norming", "sc1", "eigenvalue-deviation"):
            raise ConfigError("quantity must be norming, sc1 or eigenvalue-deviation")
        a = p.float("a", _REQUIRED) if quantity == "sc1" else None
        zs = p.complexes("z", "0") if quantity == "sc1" else []
        if a is not None and not 0 < a < setup.s:
            raise ConfigError("sc1 needs 0 < a < s")
        if n_hi - n_lo + 1 < 10 or n_hi > N:
            raise ConfigError("fit window needs at least 10 indices within 1..N")
        return lambda: _run_decay(setup, quantity, N, n_lo, n_hi, a, zs)

    raise ConfigError(f"unknown experiment kind {kind!r}")


def _run_spectrum(setup, N):
    sp = compute_spectrum(setup, N)
    rows = []
    for n, lam, K in zip(sp.indices, sp.eigenvalues, sp.norming):
        if n >= 1:
            tp = float(asymptotic_prediction(setup, n)[0])
            dev = np.sqrt(lam) - tp if lam >= 0 else np.nan
        else:
            tp, dev = np.nan, np.nan
        rows.append((int(n), lam, K, tp, dev))

    def fig(path):
        from . import plotting

        n = np.array([r[0] for r in rows], float)
        plotting.loglog_series(path, [("|t_n - prediction|", n, [r[4] for r in rows])],
                               title="eigenvalue asymptotics", ylabel="deviation")

    return ("index", "lambda", "norming_constant", "asymptotic_prediction", "deviation"), rows, fig


def _run_kernel_check(setup, grid):
    zs = grid.points()
    ev = KernelEvaluator(setup, t_max=grid.t_max)
    Ki = ev.kernel_inner(zs, zs)
    rows = []
    for i, z in enumerate(zs):
        for j, w in enumerate(zs):
            hb = ev.kernel_hb(z, w)
            ki = Ki[i, j]
            r = ki / hb
            rows.append((z.real, z.imag, w.real, w.imag, ki.real, ki.imag, hb.real, hb.imag, r.real, r.imag))

    def fig(path):
        from . import plotting

        plotting.bars(path, [f"{k}" for k in range(len(rows))], [abs(r[8] + 1j * r[9]) for r in rows],
                      title="kernel_inner / kernel_hb", ylabel="|ratio|")

    return ("z_re", "z_im", "w_re", "w_im", "inner_re", "inner_im", "hb_re", "hb_im", "ratio_re", "ratio_im"), rows, fig


def _run_exact(setup, prof, Ns, grid):
    sp = compute_spectrum(setup, max(Ns))
    F = transform(setup, prof)
    rows, errs = [], []
    for N in Ns:
        vals, truth, rep = reconstruct_exact(F, sp, N, grid)
        errs.append(np.abs(vals - truth))
        rows.append((N, rep.sup_error, rep.tail_estimate, parseval_defect(F, sp, N)))

    def fig(path):
        from . import plotting

        plotting.error_profile(path, grid.points(), errs, "exact sampling", [f"N={N}" for N in Ns])

    return ("N", "sup_error", "tail_estimate", "parseval_defect"), rows, fig


def _run_oversample(setup, prof, a, Ns, deltas, conv, seed, grid):
    sp = compute_spectrum(setup, max(Ns))
    F = transform(setup, prof)
    rows, errs, labels = [], [], []
    for N in Ns:
        for d in deltas:
            noise = noise_sequence(setup.nu, d, N, seed, setup.first_index, conv)
            vals, truth, rep = oversample_reconstruct(F, sp, noise, N, grid)
            errs.append(np.abs(vals - truth))
            labels.append(f"N={N} delta={d:g}")
            rows.append((a, setup.s, N, d, rep.sup_error, rep.tail_estimate, rep.constant, rep.extra["noise_gain"]))

    def fig(path):
        from . import plotting

        plotting.error_profile(path, grid.points(), errs, "oversampling", labels)

    return ("a", "b", "N", "delta", "sup_error", "tail_estimate", "fitted_C", "noise_gain"), rows, fig


def _run_alias(setup, prof, a, Ns, grid):
    spa = compute_spectrum(setup.with_s(a), max(Ns))
    F = transform(setup, prof)
    rows, errs = [], []
    for N in Ns:
        vals, truth, rep = alias_reconstruct(F, spa, N, grid)
        errs.append(np.abs(vals - truth))
        rows.append((a, setup.s, N, rep.sup_error, rep.tail_estimate, rep.tail_norm, rep.constant))

    def fig(path):
        from . import plotting

        plotting.error_profile(path, grid.points(), errs, "aliasing", [f"N={N}" for N in Ns])

    return ("a", "b", "N", "sup_error", "tail_estimate", "tail_norm", "fitted_D"), rows, fig


def _run_ibp(setup, a, b, ts, zs, which):
    rows = []
    for w in which:
        for t, z in zip(ts, zs):
            lhs, rhs = identity_sides(w, setup, a, b, t, z)
            res = ibp_identity_residual(w, setup, a, b, t, z)
            rows.append((w, t, z.real, z.imag, lhs.real, lhs.imag, rhs.real, rhs.imag, res))

    def fig(path):
        from . import plotting

        plotting.bars(path, [f"{r[0]} t={r[1]:g}" for r in rows], [r[8] for r in rows],
                      title="identity residuals", ylabel="relative residual")

    return ("identity", "t", "z_re", "z_im", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "residual"), rows, fig


def _run_decay(setup, quantity, N, n_lo, n_hi, a, zs):
    sp = compute_spectrum(setup, N)
    m = sp.indices >= 1
    n = sp.indices[m].astype(float)
    series = []
    if quantity == "norming":
        series.append((complex(np.nan, np.nan), sp.norming[m]))
    elif quantity == "eigenvalue-deviation":
        tp, _ = asymptotic_prediction(setup, n)
        series.append((complex(np.nan, np.nan), np.abs(np.sqrt(np.maximum(sp.eigenvalues[m], 0)) - tp)))
    else:
        ev = KernelEvaluator(setup, t_max=np.sqrt(np.max(np.abs(sp.eigenvalues))), breakpoints=(a,))
        J = ev.oversampling_kernel(a, np.array(zs), sp.eigenvalues[m].astype(complex))
        J = np.atleast_2d(J)
        for z, row in zip(zs, J):
            series.append((z, np.abs(row) / np.sqrt(sp.norming[m])))
    rows, fits = [], []
    for z, vals in series:
        f = decay_fit(n, vals, (n_lo, n_hi))
        rows.append((quantity, z.real, z.imag, n_lo, n_hi, f.slope, f.intercept, f.residual))
        fits.append((f"z={z:g}", f.slope, f.intercept, n[(n >= n_lo) & (n <= n_hi)]))

    def fig(path):
        from . import plotting

        plotting.loglog_series(path, [(f"z={z:g}", n, v) for z, v in series], title=quantity, fits=fits)

    return ("quantity", "z_re", "z_im", "n_lo", "n_hi", "slope", "intercept", "fit_residual"), rows, fig


def _prepare_pw(p: Params, seed):
    from .paleywiener import Packet, PWSetup, pw_noise, pw_reconstruct

    mode = p.str("mode", _REQUIRED)
    if mode not in ("exact", "oversample", "alias"):
        raise ConfigError("mode must be exact, oversample or alias")
    a = p.float("a", _REQUIRED)
    b = p.float("b", _REQUIRED) if mode != "exact" else None
    PWSetup(a, b)
    Ns = p.ints("N", _REQUIRED)
    deltas = p.floats("delta", "0") if mode == "oversample" else [0.0]
    packet = p.str("packet", "indicator")
    c = p.float("packet_c", a if mode != "alias" else b)
    terms = p.int("packet_terms", 3)
    if packet == "indicator":
        F = Packet.indicator(c)
    elif packet == "random":
        F = Packet.random(c, np.random.default_rng(seed), terms)
    else:
        raise ConfigError("packet must be indicator or random")
    z = np.linspace(p.float("grid_x_lo", -5.0), p.float("grid_x_hi", 5.0), p.int("grid_m", 101))

    def run():
        rows, errs, labels = [], [], []
        for N in Ns:
            for d in deltas:
                noise = pw_noise(d, N, seed) if d > 0 else None
                vals, truth, rep = pw_reconstruct(mode, F, a, N, z, b=b, noise=noise)
                errs.append(np.abs(vals - truth))
                labels.append(f"N={N} delta={d:g}")
                rows.append((mode, a, np.nan if b is None else b, N, d, rep.sup_error, rep.tail_estimate, rep.constant))

        def fig(path):
            from . import plotting

            plotting.error_profile(path, z.astype(complex), errs, f"Paley-Wiener {mode}", labels)

        return ("mode", "a", "b", "N", "delta", "sup_error", "tail_estimate", "constant"), rows, fig

    return run


# ---------------------------------------------------------------------------
# output


def _fmt(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def render_csv(kind, raw: dict, seed, header, rows) -> str:
    buf = io.StringIO()
    cfg = "; ".join(f"{k}={raw[k]}" for k in sorted(raw) if k != "seed")
    buf.write(f"# config: kind={kind}; seed={seed}; {cfg}\n")
    buf.write(",".join(header) + "\n")
    for r in rows:
        buf.write(",".join(_fmt(v) for v in r) + "\n")
    return buf.getvalue()


def run(kind, raw: dict, seed=0, out=None, figure=None) -> str:
    """Run one experiment; returns the CSV text (also written to ``out``)."""
    if kind not in KINDS:
        raise ConfigError(f"unknown experiment kind {kind!r}; expected one of {', '.join(KINDS)}")
    p = Params(kind, raw)
    thunk = _prepare(kind, p, seed)
    header, rows, fig = thunk()
    text = render_csv(kind, raw, seed, header, rows)
    if out is not None:
        Path(out).write_text(text)
    if figure is not None and fig is not None:
        fig(figure)
    return text


def _error_record(exc, code):
    return json.dumps({"error": type(exc).__name__, "exit_code": code, "message": str(exc)})


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="dbsampler", description="de Branges sampling experiments")
    ap.add_argument("kind", help=" | ".join(KINDS))
    ap.add_argument("--config", required=True, help="flat key = value config file")
    ap.add_argument("--out", help="CSV output path (default: stdout)")
    ap.add_argument("--seed", type=int, help="noise seed (overrides the config)")
    ap.add_argument("--figure", help="also render a PNG figure to this path")
    args = ap.parse_args(argv)
    try:
        raw = parse_config(Path(args.config).read_text())
        seed = args.seed if args.seed is not None else int(raw.get("seed", 0))
        if seed < 0 or seed >= 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        text = run(args.kind, raw, seed, args.out, args.figure)
    except (ValueError, OSError) as exc:
        print(_error_record(exc, 2), file=sys.stderr)
        return 2
    except (NumericalError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(_error_record(exc, 3), file=sys.stderr)
        return 3
    if args.out is None:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
