"""Systems, frames, the induced metric, and the six-condition verifier.

A frame is the 3x2 table f[i][j] of coefficients of the one-forms
w_i = f_i1 dx + f_i2 dt.  A system (F, G, delta) is verified against a frame
by checking, in order:

  C1  dependency pattern: f_i1 = f_i1(ux, vx), f_i2 = f_i2(u, v)
  C2  the sum of squared 2x2 minors of d(f_i1)/d(ux, vx) has a witness point
  C3..C5  the three local structure-equation residuals vanish identically
          (u_xt -> F, v_xt -> G substituted by construction)
  C6  nondegeneracy f11*f22 - f12*f21 has a witness point

C2 and C6 are open conditions, so a single robust witness found by seeded
sampling certifies them; C3..C5 are identities tested by ``expr.is_zero``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .expr import Expr, U, UX, V, VX

WITNESS_THRESHOLD = 1e-6


@dataclass(frozen=True)
class SystemSpec:
    """One hyperbolic system u_xt = F, v_xt = G with curvature sign delta.

    delta=+1 means pseudospherical (K=-1), delta=-1 spherical (K=+1).
    ``params`` maps parameter names to bound values; None marks a free
    parameter that verification samples over.
    """

    F: Expr
    G: Expr
    delta: int
    params: dict = field(default_factory=dict)
    label: str = ""

    def __post_init__(self):
        if self.delta not in (1, -1):
            raise ValueError("delta must be +1 or -1")

    def bound_params(self) -> dict:
        # expression-valued entries (recorded for provenance) are already
        # substituted into F, G and the frame, so only numbers matter here
        return {
            k: float(v)
            for k, v in self.params.items()
            if v is not None and isinstance(v, (int, float))
        }


@dataclass(frozen=True)
class Frame:
    """3x2 table of frame coefficients; rows are 1-indexed in the accessors."""

    rows: tuple

    def __post_init__(self):
        if len(self.rows) != 3 or any(len(r) != 2 for r in self.rows):
            raise ValueError("frame must be 3x2")

    @staticmethod
    def of(f11, f12, f21, f22, f31, f32) -> "Frame":
        to = ex.as_expr
        return Frame(((to(f11), to(f12)), (to(f21), to(f22)), (to(f31), to(f32))))

    @staticmethod
    def parse(entries) -> "Frame":
        rows = tuple(tuple(ex.parse(s) for s in row) for row in entries)
        return Frame(rows)

    def f(self, i: int, j: int) -> Expr:
        return self.rows[i - 1][j - 1]

    def with_entry(self, i: int, j: int, e: Expr) -> "Frame":
        rows = [list(r) for r in self.rows]
        rows[i - 1][j - 1] = ex.simplify(e)
        return Frame(tuple(tuple(r) for r in rows))

    def entries(self):
        for i in (1, 2, 3):
            for j in (1, 2):
                yield i, j, self.f(i, j)

    def to_strings(self):
        return [[ex.to_string(e) for e in row] for row in self.rows]


ZERO_FRAME = Frame.of(0, 0, 0, 0, 0, 0)


def check_dependencies(fr: Frame, fixed=None, seed=ex.DEFAULT_SEED) -> dict:
    """Per-entry booleans for the hyperbolic dependency pattern.

    Column 1 must not depend on (u, v); column 2 must not depend on (ux, vx).
    """
    out = {}
    for i in (1, 2, 3):
        for sym, tag in ((U, "u"), (V, "v")):
            d = ex.diff(fr.f(i, 1), sym)
            out[(i, 1, tag)] = ex.is_const_zero(d) or ex.is_zero(d, fixed=fixed, seed=seed)
        for sym, tag in ((UX, "ux"), (VX, "vx")):
            d = ex.diff(fr.f(i, 2), sym)
            out[(i, 2, tag)] = ex.is_const_zero(d) or ex.is_zero(d, fixed=fixed, seed=seed)
    return out


def dependencies_ok(fr: Frame, fixed=None, seed=ex.DEFAULT_SEED) -> bool:
    return all(check_dependencies(fr, fixed=fixed, seed=seed).values())


def column_jacobian(fr: Frame):
    """d f_i1 / d(ux, vx) as a 3x2 table of expressions."""
    return [[ex.diff(fr.f(i, 1), UX), ex.diff(fr.f(i, 1), VX)] for i in (1, 2, 3)]


def jacobian_minor_sum(fr: Frame) -> Expr:
    j = column_jacobian(fr)

    def minor(a, b):
        return j[a][0] * j[b][1] - j[a][1] * j[b][0]

    return ex.simplify(minor(0, 1) ** 2 + minor(1, 2) ** 2 + minor(0, 2) ** 2)


def nondegeneracy(fr: Frame) -> Expr:
    return ex.simplify(fr.f(1, 1) * fr.f(2, 2) - fr.f(1, 2) * fr.f(2, 1))


def _sample_point(rng, syms, fixed, box=None):
    env = dict(fixed)
    for s in syms:
        if s not in env and s.name not in env:
            env[s] = ex._draw(rng, box or {}, s)
    return env


def regularity_witness(
    fr: Frame,
    fixed=None,
    trials: int = ex.DEFAULT_TRIALS,
    seed: int = ex.DEFAULT_SEED,
    threshold: float = WITNESS_THRESHOLD,
):
    """A sampled point where the minor sum and f11*f22-f12*f21 both clear
    ``threshold`` in magnitude, or None if no witness is found."""
    minors = jacobian_minor_sum(fr)
    nd = nondegeneracy(fr)
    syms = sorted(ex.free_symbols(minors) | ex.free_symbols(nd))
    fixed_env = ex._normalize_env(fixed or {})
    rng = np.random.default_rng(seed)
    fn_names = sorted(ex.user_functions(minors) | ex.user_functions(nd))
    for _ in range(trials):
        env = _sample_point(rng, syms, fixed_env)
        fns = {name: ex._random_fn_triple(rng) for name in fn_names}
        try:
            m = ex.evaluate(minors, env, fns)
            d = ex.evaluate(nd, env, fns)
        except ex.ExprError:
            continue
        if abs(m) >= threshold and abs(d) >= threshold:
            return {s.name: v for s, v in env.items()} if env else {}
    return None


def structure_residuals(sys: SystemSpec, fr: Frame):
    """The three structure-equation residuals with u_xt -> F, v_xt -> G.

    R1 = -f11_ux F - f11_vx G + f12_u ux + f12_v vx - f31 f22 + f32 f21
    R2 = -f21_ux F - f21_vx G + f22_u ux + f22_v vx - f11 f32 + f12 f31
    R3 = -f31_ux F - f31_vx G + f32_u ux + f32_v vx - delta (f11 f22 - f12 f21)
    """
    F, G, d = sys.F, sys.G, sys.delta
    ux_, vx_ = ex.Var(UX), ex.Var(VX)

    def transport_part(i):
        f1, f2 = fr.f(i, 1), fr.f(i, 2)
        return (
            -ex.diff(f1, UX) * F
            - ex.diff(f1, VX) * G
            + ex.diff(f2, U) * ux_
            + ex.diff(f2, V) * vx_
        )

    r1 = transport_part(1) - fr.f(3, 1) * fr.f(2, 2) + fr.f(3, 2) * fr.f(2, 1)
    r2 = transport_part(2) - fr.f(1, 1) * fr.f(3, 2) + fr.f(1, 2) * fr.f(3, 1)
    r3 = transport_part(3) - d * fr.f(1, 1) * fr.f(2, 2) + d * fr.f(1, 2) * fr.f(2, 1)
    return ex.simplify(r1), ex.simplify(r2), ex.simplify(r3)


def metric(fr: Frame):
    """First fundamental form coefficients (g11, g12, g22) of w1^2 + w2^2."""
    f11, f12 = fr.f(1, 1), fr.f(1, 2)
    f21, f22 = fr.f(2, 1), fr.f(2, 2)
    g11 = ex.simplify(f11 * f11 + f21 * f21)
    g12 = ex.simplify(f11 * f12 + f21 * f22)
    g22 = ex.simplify(f12 * f12 + f22 * f22)
    return g11, g12, g22


def genericity(sys: SystemSpec, seed=ex.DEFAULT_SEED) -> bool:
    """True iff at least one of F_u, F_v, G_u, G_v is not identically zero."""
    fixed = sys.bound_params()
    for e in (sys.F, sys.G):
        for s in (U, V):
            d = ex.diff(e, s)
            if not (ex.is_const_zero(d) or ex.is_zero(d, fixed=fixed, seed=seed)):
                return True
    return False


@dataclass
class VerificationReport:
    passed: bool
    dependencies: dict
    witness: dict | None
    residual_zero: tuple
    residual_worst: tuple
    delta: int
    label: str
    seed: int
    tol: float

    def to_json(self) -> dict:
        deps = {f"f{i}{j}_{tag}": bool(v) for (i, j, tag), v in self.dependencies.items()}
        return {
            "label": self.label,
            "delta": self.delta,
            "passed": bool(self.passed),
            "conditions": {
                "dependencies": {"passed": all(self.dependencies.values()), "detail": deps},
                "regularity_witness": {
                    "passed": self.witness is not None,
                    "point": self.witness,
                    "threshold": WITNESS_THRESHOLD,
                },
                "residuals": {
                    f"R{k + 1}": {
                        "passed": bool(self.residual_zero[k]),
                        "worst_relative": self.residual_worst[k],
                    }
                    for k in range(3)
                },
            },
            "seed": self.seed,
            "tolerance": self.tol,
        }


def _worst_relative(e: Expr, fixed, trials, seed):
    """max over samples of |value| / (1 + max intermediate magnitude)."""
    e = ex.simplify(e)
    if isinstance(e, ex.Const):
        return abs(e.value)
    rng = np.random.default_rng(seed)
    syms = sorted(ex.free_symbols(e))
    fixed_env = ex._normalize_env(fixed or {})
    fn_names = sorted(ex.user_functions(e))
    worst = 0.0
    seen = 0
    attempts = 0
    while seen < trials and attempts < trials * 5:
        attempts += 1
        env = _sample_point(rng, syms, fixed_env)
        fns = {name: ex._random_fn_triple(rng) for name in fn_names}
        try:
            val, mag = ex.evaluate_with_scale(e, env, fns)
        except ex.ExprError:
            continue
        if not np.isfinite(val):
            continue
        worst = max(worst, abs(val) / (1.0 + mag))
        seen += 1
    return worst


def verify(
    sys: SystemSpec,
    fr: Frame,
    trials: int = ex.DEFAULT_TRIALS,
    tol: float = ex.DEFAULT_TOL,
    seed: int = ex.DEFAULT_SEED,
) -> VerificationReport:
    """Aggregate dependency, regularity, and residual checks."""
    fixed = sys.bound_params()
    deps = check_dependencies(fr, fixed=fixed, seed=seed)
    deps_ok = all(deps.values())

    witness = None
    if deps_ok:
        witness = regularity_witness(fr, fixed=fixed, trials=trials, seed=seed)

    res_zero = (False, False, False)
    res_worst = (float("nan"),) * 3
    if deps_ok:
        rs = structure_residuals(sys, fr)
        res_zero = tuple(
            ex.is_zero(r, trials=trials, tol=tol, seed=seed, fixed=fixed) for r in rs
        )
        res_worst = tuple(_worst_relative(r, fixed, min(trials, 30), seed) for r in rs)

    passed = deps_ok and witness is not None and all(res_zero)
    return VerificationReport(
        passed=passed,
        dependencies=deps,
        witness=witness,
        residual_zero=res_zero,
        residual_worst=res_worst,
        delta=sys.delta,
        label=sys.label,
        seed=seed,
        tol=tol,
    )


# ---------------------------------------------------------------------------
# JSON interchange: {label, delta, params, F, G, frame, constraints}


def system_to_json(sys: SystemSpec, fr: Frame, exclusions=None, constraints=None) -> dict:
    params = {}
    for name, val in sys.params.items():
        spec = {}
        if val is None:
            spec["free"] = True
        else:
            spec["value"] = val
        excl = (exclusions or {}).get(name)
        if excl:
            spec["exclusions"] = list(excl)
        params[name] = spec
    out = {
        "label": sys.label,
        "delta": sys.delta,
        "params": params,
        "F": ex.to_string(sys.F),
        "G": ex.to_string(sys.G),
        "frame": fr.to_strings(),
    }
    if constraints:
        out["constraints"] = list(constraints)
    return out


def system_from_json(obj: dict):
    label = obj.get("label", "")
    delta = int(obj["delta"])
    params = {}
    for name, spec in obj.get("params", {}).items():
        params[name] = None if spec.get("free") else float(spec["value"])
    F = ex.parse(obj["F"])
    G = ex.parse(obj["G"])
    fr = Frame.parse(obj["frame"])
    return SystemSpec(F=F, G=G, delta=delta, params=params, label=label), fr


def dump_json(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"
