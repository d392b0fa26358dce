"""Executable registry of the known systems, frames, and family reductions.

Every hyperbolic entry carries the printed frame together with the system it
verifies against; parameters are bound to numbers at ``get`` time so the
returned pair is fully concrete.  The two nonlinear-Schrodinger frames are
kept for reference (metric checks, dependency counterexamples) but are
evolution systems, so they carry no hyperbolic right-hand side.

Three deliberate deviations from the printed sources, each forced by the
structure equations themselves (the verifier is the arbiter):

  * "exp-affine" is registered as spherical and "exp-linear" as
    pseudospherical; the residual R3 vanishes only for those signs, and the
    four-parameter family reproduces both with exactly those delta choices.
  * "seven-param-ss" uses the repaired potential
    psi = k0*(cosh(th)/(2ab)*(a^2 u^2 + b^2 v^2) - sinh(th)*u*v) - ab*(...)
    and the sign layout produced by solving the structure equations; the
    circulating display is not eta-consistent for any sign reading.
  * the five-parameter families only require the denominator
    k2*q_vx - k1*q_ux to admit a nonzero witness; their named reductions set
    k1 or k2 to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import expr as ex
from . import classify as cl
from .expr import Expr
from .frames import Frame, SystemSpec


class CatalogError(Exception):
    pass


class UnknownKey(CatalogError):
    pass


class ParamViolation(CatalogError):
    pass


class CertificateFailure(CatalogError):
    pass


@dataclass(frozen=True)
class ParamSpec:
    default: object
    kind: str = "real"  # real | sign | expr
    exclusions: tuple = ()
    doc: str = ""


@dataclass
class CatalogEntry:
    key: str
    provenance: str
    params: dict
    build: object  # callable(bound: dict) -> (SystemSpec | None, Frame)
    delta: object = None  # fixed value, or "param" when delta is user-chosen
    hyperbolic: bool = True
    constraints: tuple = ()  # (description, callable(bound)->Expr) nonzero witnesses
    notes: str = ""

    def bind(self, overrides: dict) -> dict:
        bound = {}
        for name, spec in self.params.items():
            val = overrides.get(name, spec.default)
            if spec.kind == "real":
                val = float(val)
                if "nonzero" in spec.exclusions and val == 0.0:
                    raise ParamViolation(f"{self.key}: parameter {name} must be nonzero")
            elif spec.kind == "sign":
                val = int(val)
                if val not in (1, -1):
                    raise ParamViolation(f"{self.key}: parameter {name} must be +1 or -1")
            elif spec.kind == "expr":
                if isinstance(val, str):
                    val = ex.parse(val)
                val = ex.simplify(ex.as_expr(val))
            bound[name] = val
        unknown = set(overrides) - set(self.params)
        if unknown:
            raise ParamViolation(f"{self.key}: unknown parameters {sorted(unknown)}")
        for desc, builder in self.constraints:
            witness = builder(bound)
            if not cl._witness_nonzero(witness, {}, 60, ex.DEFAULT_SEED):
                raise ParamViolation(f"{self.key}: {desc} must not vanish identically")
        return bound

    def instantiate(self, **overrides):
        return self.build(self.bind(overrides))


_REGISTRY: dict = {}


def _register(entry: CatalogEntry):
    _REGISTRY[entry.key] = entry
    return entry


def keys():
    return sorted(_REGISTRY)


def entry(key: str) -> CatalogEntry:
    try:
        return _REGISTRY[key]
    except KeyError:
        raise UnknownKey(f"no catalog entry named {key!r}") from None


def get(key: str, **params):
    """Fully bound (SystemSpec, Frame) for a registry key."""
    return entry(key).instantiate(**params)


def _b(text: str, **vals) -> Expr:
    """Parse a template and bind named constants."""
    e = ex.parse(text)
    if vals:
        e = ex.simplify(ex.subst(e, {k: ex.Const(v) for k, v in vals.items()}))
    return e


def _sys(F, G, delta, bound, label):
    params = {k: (float(v) if isinstance(v, (int, float)) else ex.to_string(v))
              for k, v in bound.items()}
    return SystemSpec(F=F, G=G, delta=delta, params=params, label=label)


# ---------------------------------------------------------------------------
# reference frames for the nonlinear Schrodinger pair (evolution systems)


def _build_nls_pss(bound):
    eta = bound["eta"]
    fr = Frame.of(
        _b("2*u"), _b("-4*e*u - 2*vx", e=eta),
        _b("-2*v"), _b("4*e*v - 2*ux", e=eta),
        _b("2*e", e=eta), _b("-4*e^2 - 2*(u^2+v^2)", e=eta),
    )
    return None, fr


def _build_nls_ss(bound):
    eta = bound["eta"]
    fr = Frame.of(
        _b("2*v"), _b("-4*e*v + 2*ux", e=eta),
        _b("2*e", e=eta), _b("-4*e^2 + 2*(u^2+v^2)", e=eta),
        _b("-2*u"), _b("2*e*u + 2*vx", e=eta),
    )
    return None, fr


_register(CatalogEntry(
    key="nls-pss",
    provenance="focusing-type nonlinear Schrodinger system (pseudospherical frame)",
    params={"eta": ParamSpec(1.0, doc="spectral parameter")},
    build=_build_nls_pss,
    delta=1,
    hyperbolic=False,
    notes="evolution system; frame kept for metric and dependency checks",
))

_register(CatalogEntry(
    key="nls-ss",
    provenance="defocusing-type nonlinear Schrodinger system (spherical frame)",
    params={"eta": ParamSpec(1.0, doc="spectral parameter")},
    build=_build_nls_ss,
    delta=-1,
    hyperbolic=False,
    notes="evolution system; frame kept for reference",
))


# ---------------------------------------------------------------------------
# hyperbolic examples


def _build_plr(bound):
    eta = bound["eta"]
    F, G = _b("2*u*v*ux - u"), _b("-2*u*v*vx - v")
    fr = Frame.of(
        _b("e*(ux+vx)", e=eta), _b("(v-u)/e", e=eta),
        _b("e^2", e=eta), _b("-1/e^2 - 2*u*v", e=eta),
        _b("e*(ux-vx)", e=eta), _b("-(u+v)/e", e=eta),
    )
    return _sys(F, G, 1, bound, "plr"), fr


_register(CatalogEntry(
    key="plr",
    provenance="Pohlmeyer-Lund-Regge type system",
    params={"eta": ParamSpec(1.0, exclusions=("nonzero",))},
    build=_build_plr,
    delta=1,
))


def _build_konno_oono(bound):
    nu = bound["nu"]
    F, G = _b("-2*v*vx"), _b("2*v*ux")
    fr = Frame.of(
        _b("2*vx/n", n=nu), _b("0"),
        _b("2*ux/n", n=nu), _b("n", n=nu),
        _b("0"), _b("2*v"),
    )
    return _sys(F, G, 1, bound, "konno-oono"), fr


_register(CatalogEntry(
    key="konno-oono",
    provenance="Konno-Oono coupled integrable dispersionless system",
    params={"nu": ParamSpec(2.0, exclusions=("nonzero",))},
    build=_build_konno_oono,
    delta=1,
))


def _build_quadratic_pss(bound):
    eta, c = bound["eta"], bound["c"]
    F = _b("(u^2 - v^2 + c)*vx + u", c=c)
    G = _b("(u^2 - v^2 + c)*ux + v", c=c)
    fr = Frame.of(
        _b("-2^(1/2)*e*ux", e=eta), _b("2^(1/2)*v/e", e=eta),
        _b("e^2", e=eta), _b("1/e^2 + u^2 - v^2 + c", e=eta, c=c),
        _b("2^(1/2)*e*vx", e=eta), _b("-2^(1/2)*u/e", e=eta),
    )
    return _sys(F, G, 1, bound, "quadratic-pss"), fr


_register(CatalogEntry(
    key="quadratic-pss",
    provenance="quadratic-potential pseudospherical system",
    params={"eta": ParamSpec(1.0, exclusions=("nonzero",)), "c": ParamSpec(0.0)},
    build=_build_quadratic_pss,
    delta=1,
))


def _build_quadratic_ss(bound):
    eta, c = bound["eta"], bound["c"]
    F = _b("(u^2 + v^2 + c)*vx + u", c=c)
    G = _b("-(u^2 + v^2 + c)*ux + v", c=c)
    fr = Frame.of(
        _b("-2^(1/2)*e*vx", e=eta), _b("2^(1/2)*u/e", e=eta),
        _b("e^2", e=eta), _b("-1/e^2 + u^2 + v^2 + c", e=eta, c=c),
        _b("-2^(1/2)*e*ux", e=eta), _b("-2^(1/2)*v/e", e=eta),
    )
    return _sys(F, G, -1, bound, "quadratic-ss"), fr


_register(CatalogEntry(
    key="quadratic-ss",
    provenance="quadratic-potential spherical system",
    params={"eta": ParamSpec(1.0, exclusions=("nonzero",)), "c": ParamSpec(0.0)},
    build=_build_quadratic_ss,
    delta=-1,
))


def _build_exp_affine(bound):
    a, b, eta = bound["a"], bound["b"], bound["eta"]
    F = _b("(a*vx + b)*exp(u)", a=a, b=b)
    G = _b("-(2/a)*exp(u)*ux", a=a)
    fr = Frame.of(
        _b("ux"), _b("0"),
        _b("e", e=eta), _b("-exp(u)"),
        _b("e + a*vx + b", e=eta, a=a, b=b), _b("-exp(u)"),
    )
    return _sys(F, G, -1, bound, "exp-affine"), fr


_register(CatalogEntry(
    key="exp-affine",
    provenance="exponential system with affine gradient coupling",
    params={
        "a": ParamSpec(1.0, exclusions=("nonzero",)),
        "b": ParamSpec(0.0),
        "eta": ParamSpec(1.0, exclusions=("nonzero",)),
    },
    build=_build_exp_affine,
    delta=-1,
    notes="R3 vanishes only for the spherical sign, matching the "
          "four-parameter family reduction",
))


def _build_exp_shift(bound):
    eta = bound["eta"]
    F, G = _b("2*exp(u - vx)"), _b("ux*exp(u + vx)")
    fr = Frame.of(
        _b("-2^(1/2)/2*ux"), _b("0"),
        _b("e", e=eta), _b("2^(1/2)*exp(u)"),
        _b("-2^(1/2)*e + exp(-vx)", e=eta), _b("-2*exp(u)"),
    )
    return _sys(F, G, 1, bound, "exp-shift"), fr


_register(CatalogEntry(
    key="exp-shift",
    provenance="exponential system with shifted arguments",
    params={"eta": ParamSpec(1.0, exclusions=("nonzero",))},
    build=_build_exp_shift,
    delta=1,
))


def _build_exp_linear(bound):
    eta = bound["eta"]
    F, G = _b("-2*vx*exp(u)"), _b("ux*exp(u)")
    fr = Frame.of(
        _b("-2^(1/2)/2*ux"), _b("0"),
        _b("e", e=eta), _b("-2^(1/2)*exp(u)"),
        _b("-2^(1/2)*e + vx", e=eta), _b("2*exp(u)"),
    )
    return _sys(F, G, 1, bound, "exp-linear"), fr


_register(CatalogEntry(
    key="exp-linear",
    provenance="exponential system with linear gradient coupling",
    params={"eta": ParamSpec(1.0, exclusions=("nonzero",))},
    build=_build_exp_linear,
    delta=1,
    notes="R3 vanishes only for the pseudospherical sign, matching the "
          "four-parameter family reduction",
))


def _build_phi_monotone(bound):
    a, b, eta, delta = bound["a"], bound["b"], bound["eta"], bound["delta"]
    phi = bound["phi"]
    cl._only_depends_on(phi, ("vx",), "phi")
    dphi = ex.diff(phi, ex.VX)
    au_b = _b("a*u + b", a=a, b=b)
    F = ex.simplify(au_b * phi + ex.ONE)
    G = ex.simplify(ex.Const(delta * a * a) * ex.Var(ex.UX) * au_b / dphi)
    fr = Frame.of(
        _b("e*a*ux", e=eta, a=a), _b("0"),
        _b("e^2", e=eta), _b("a^2*u + a*b", a=a, b=b),
        ex.simplify(ex.Const(-eta) * phi), _b("a/e", a=a, e=eta),
    )
    return _sys(F, G, delta, bound, "phi-monotone"), fr


_register(CatalogEntry(
    key="phi-monotone",
    provenance="four-parameter system driven by a strictly monotone profile of vx",
    params={
        "a": ParamSpec(1.0, exclusions=("nonzero",)),
        "b": ParamSpec(0.0),
        "eta": ParamSpec(1.0, exclusions=("nonzero",)),
        "delta": ParamSpec(1, kind="sign"),
        "phi": ParamSpec("exp(vx)", kind="expr", doc="strictly monotone in vx"),
    },
    build=_build_phi_monotone,
    delta="param",
    constraints=(
        ("phi'(vx) (monotonicity witness)", lambda b: ex.diff(b["phi"], ex.VX)),
    ),
))


def _build_product_dispersionless(bound):
    nu, sigma = bound["nu"], bound["sigma"]
    F, G = _b("u*ux*vx"), _b("-u*(vx^2 + 1)")
    fr = Frame.of(
        _b("s*ux/n", s=sigma, n=nu), _b("0"),
        _b("ux*vx/n", n=nu), _b("n", n=nu),
        _b("0"), _b("s*u", s=sigma),
    )
    return _sys(F, G, 1, bound, "product-dispersionless"), fr


_register(CatalogEntry(
    key="product-dispersionless",
    provenance="dispersionless system with product nonlinearity",
    params={
        "nu": ParamSpec(1.0, exclusions=("nonzero",)),
        "sigma": ParamSpec(1, kind="sign"),
    },
    build=_build_product_dispersionless,
    delta=1,
))


# ---------------------------------------------------------------------------
# multi-parameter families


def _psi_trig(bound):
    k0, k1, k2, k3 = (bound[k] for k in ("k0", "k1", "k2", "k3"))
    a, b, th = bound["a"], bound["b"], bound["theta"]
    return _b(
        "k0*(cth/(2*a*b)*(a^2*u^2 - b^2*v^2) + sth*u*v) - a*b*(k1*u + k2*v + k3)",
        k0=k0, k1=k1, k2=k2, k3=k3, a=a, b=b,
        cth=math.cos(th), sth=math.sin(th),
    )


def _build_seven_param_pss(bound):
    k0, k1, k2 = bound["k0"], bound["k1"], bound["k2"]
    a, b, th, eta = bound["a"], bound["b"], bound["theta"], bound["eta"]
    psi = _psi_trig(bound)
    psiu, psiv = ex.diff(psi, ex.U), ex.diff(psi, ex.V)
    C = ex.Const
    ux_, vx_, u_, v_ = (ex.Var(s) for s in (ex.UX, ex.VX, ex.U, ex.V))
    sth, cth = math.sin(th), math.cos(th)
    F = ex.simplify(C(a * b * sth) * (ux_ * psi - C(k2))
                    - C(b * b * cth) * (vx_ * psi + C(k1)) + C(k0) * u_)
    G = ex.simplify(C(-a * a * cth) * (ux_ * psi - C(k2))
                    - C(a * b * sth) * (vx_ * psi + C(k1)) + C(k0) * v_)
    s2, c2 = math.sin(th / 2), math.cos(th / 2)
    fr = Frame.of(
        ex.simplify(C(eta) * (C(a * s2) * ux_ - C(b * c2) * vx_)),
        ex.simplify(C(1 / eta) * (C(b * c2) * psiu + C(a * s2) * psiv)),
        C(eta * eta),
        ex.simplify(C(k0 / eta ** 2) - C(a * b) * psi),
        ex.simplify(C(eta) * (C(a * c2) * ux_ + C(b * s2) * vx_)),
        ex.simplify(C(1 / eta) * (C(-b * s2) * psiu + C(a * c2) * psiv)),
    )
    return _sys(F, G, 1, bound, "seven-param-pss"), fr


_SEVEN_PARAMS = {
    "k0": ParamSpec(1.0, exclusions=("nonzero",)),
    "k1": ParamSpec(0.0),
    "k2": ParamSpec(0.0),
    "k3": ParamSpec(0.0),
    "a": ParamSpec(1.0, exclusions=("nonzero",)),
    "b": ParamSpec(1.0, exclusions=("nonzero",)),
    "theta": ParamSpec(0.7),
    "eta": ParamSpec(1.0, exclusions=("nonzero",)),
}

_register(CatalogEntry(
    key="seven-param-pss",
    provenance="seven-parameter pseudospherical family with trigonometric rotation",
    params=dict(_SEVEN_PARAMS),
    build=_build_seven_param_pss,
    delta=1,
))


def _psi_hyp(bound):
    k0, k1, k2, k3 = (bound[k] for k in ("k0", "k1", "k2", "k3"))
    a, b, th = bound["a"], bound["b"], bound["theta"]
    return _b(
        "k0*(cth/(2*a*b)*(a^2*u^2 + b^2*v^2) - sth*u*v) - a*b*(k1*u + k2*v + k3)",
        k0=k0, k1=k1, k2=k2, k3=k3, a=a, b=b,
        cth=math.cosh(th), sth=math.sinh(th),
    )


def _build_seven_param_ss(bound):
    k0, k1, k2 = bound["k0"], bound["k1"], bound["k2"]
    a, b, th, eta = bound["a"], bound["b"], bound["theta"], bound["eta"]
    psi = _psi_hyp(bound)
    psiu, psiv = ex.diff(psi, ex.U), ex.diff(psi, ex.V)
    C = ex.Const
    ux_, vx_, u_, v_ = (ex.Var(s) for s in (ex.UX, ex.VX, ex.U, ex.V))
    sth, cth = math.sinh(th), math.cosh(th)
    F = ex.simplify(C(-a * b * sth) * (ux_ * psi - C(k2))
                    + C(b * b * cth) * (vx_ * psi + C(k1)) - C(k0) * u_)
    G = ex.simplify(C(-a * a * cth) * (ux_ * psi - C(k2))
                    + C(a * b * sth) * (vx_ * psi + C(k1)) - C(k0) * v_)
    s2, c2 = math.sinh(th / 2), math.cosh(th / 2)
    fr = Frame.of(
        ex.simplify(C(eta) * (C(a * s2) * ux_ - C(b * c2) * vx_)),
        ex.simplify(C(1 / eta) * (C(b * c2) * psiu + C(a * s2) * psiv)),
        C(eta * eta),
        ex.simplify(C(k0 / eta ** 2) - C(a * b) * psi),
        ex.simplify(C(eta) * (C(a * c2) * ux_ - C(b * s2) * vx_)),
        ex.simplify(C(1 / eta) * (C(b * s2) * psiu + C(a * c2) * psiv)),
    )
    return _sys(F, G, -1, bound, "seven-param-ss"), fr


_register(CatalogEntry(
    key="seven-param-ss",
    provenance="seven-parameter spherical family with hyperbolic rotation",
    params=dict(_SEVEN_PARAMS),
    build=_build_seven_param_ss,
    delta=-1,
    notes="potential and system layout solved from the structure equations; "
          "the circulating display is not eta-consistent (see cross-check)",
))


def _build_four_param_exp(bound):
    k0, k1, k2, eta, delta = (bound[k] for k in ("k0", "k1", "k2", "eta", "delta"))
    psi = bound["psi"]
    cl._only_depends_on(psi, ("vx",), "psi")
    dpsi = ex.diff(psi, ex.VX)
    C = ex.Const
    expu = _b("exp(k0*u)", k0=k0)
    F = ex.simplify(C(k1) * expu * psi)
    G = ex.simplify(C(k1 * (delta / k2 ** 2 - k0 ** 2)) * expu * ex.Var(ex.UX) / dpsi)
    fr = Frame.of(
        _b("ux/k2", k2=k2), _b("0"),
        C(eta), ex.simplify(C(-k1 / k2) * expu),
        ex.simplify(C(eta * k0 * k2) + psi), ex.simplify(C(-k0 * k1) * expu),
    )
    return _sys(F, G, delta, bound, "four-param-exp"), fr


_register(CatalogEntry(
    key="four-param-exp",
    provenance="four-parameter exponential family driven by a monotone profile",
    params={
        "k0": ParamSpec(1.0, exclusions=("nonzero",)),
        "k1": ParamSpec(1.0, exclusions=("nonzero",)),
        "k2": ParamSpec(1.0, exclusions=("nonzero",)),
        "eta": ParamSpec(1.0),
        "delta": ParamSpec(1, kind="sign"),
        "psi": ParamSpec("vx", kind="expr", doc="strictly monotone in vx"),
    },
    build=_build_four_param_exp,
    delta="param",
    constraints=(
        ("psi'(vx) (monotonicity witness)", lambda b: ex.diff(b["psi"], ex.VX)),
    ),
))


def _five_param_denominator(bound):
    q = bound["q"]
    return ex.simplify(
        ex.Const(bound["k2"]) * ex.diff(q, ex.VX)
        - ex.Const(bound["k1"]) * ex.diff(q, ex.UX)
    )


def _build_five_param_linear(bound):
    k0, k1, k2, k3, eta, delta = (
        bound[k] for k in ("k0", "k1", "k2", "k3", "eta", "delta")
    )
    q = bound["q"]
    cl._only_depends_on(q, ("ux", "vx"), "q")
    C = ex.Const
    ux_, vx_ = ex.Var(ex.UX), ex.Var(ex.VX)
    qu, qv = ex.diff(q, ex.UX), ex.diff(q, ex.VX)
    den = _five_param_denominator(bound)
    lin = _b("k1*v + k2*u + k3", k1=k1, k2=k2, k3=k3)
    grad = C(k1) * vx_ + C(k2) * ux_
    F = ex.simplify((qv + lin * (C(delta * k1) * grad - q * qv)) * C(k0) / den)
    G = ex.simplify((qu + lin * (C(delta * k2) * grad - q * qu)) * C(-k0) / den)
    fr = Frame.of(
        ex.simplify(C(eta) * grad), _b("0"),
        C(eta * eta), ex.simplify(C(k0) * lin),
        ex.simplify(C(eta) * q), C(k0 / eta),
    )
    return _sys(F, G, delta, bound, "five-param-linear"), fr


_FIVE_PARAMS = {
    "k0": ParamSpec(1.0, exclusions=("nonzero",)),
    "k1": ParamSpec(2.0),
    "k2": ParamSpec(1.0),
    "k3": ParamSpec(0.0),
    "delta": ParamSpec(1, kind="sign"),
    "q": ParamSpec("2*ux", kind="expr", doc="smooth function of (ux, vx)"),
}

_register(CatalogEntry(
    key="five-param-linear",
    provenance="five-parameter family with linear second-column potential",
    params={**_FIVE_PARAMS, "eta": ParamSpec(1.0, exclusions=("nonzero",))},
    build=_build_five_param_linear,
    delta="param",
    constraints=(
        ("k2*q_vx - k1*q_ux (solvability witness)", _five_param_denominator),
    ),
    notes="k1 or k2 may vanish as long as the solvability witness holds",
))


def _build_five_param_dispersionless(bound):
    k0, k1, k2, k3, nu, delta = (
        bound[k] for k in ("k0", "k1", "k2", "k3", "nu", "delta")
    )
    q = bound["q"]
    cl._only_depends_on(q, ("ux", "vx"), "q")
    C = ex.Const
    ux_, vx_ = ex.Var(ex.UX), ex.Var(ex.VX)
    qu, qv = ex.diff(q, ex.UX), ex.diff(q, ex.VX)
    den = _five_param_denominator(bound)
    lin = _b("k1*v + k2*u + k3", k1=k1, k2=k2, k3=k3)
    grad = C(k1) * vx_ + C(k2) * ux_
    F = ex.simplify(C(delta) * (q * qv + C(k0 * k0 * k1) * grad) / den * lin)
    G = ex.simplify(C(-delta) * (q * qu + C(k0 * k0 * k2) * grad) / den * lin)
    fr = Frame.of(
        ex.simplify(C(delta * k0 / nu) * grad), _b("0"),
        ex.simplify(q * C(1 / nu)), C(nu),
        _b("0"), ex.simplify(C(k0) * lin),
    )
    return _sys(F, G, delta, bound, "five-param-dispersionless"), fr


_register(CatalogEntry(
    key="five-param-dispersionless",
    provenance="five-parameter dispersionless family generalizing Konno-Oono",
    params={**_FIVE_PARAMS, "nu": ParamSpec(1.0, exclusions=("nonzero",))},
    build=_build_five_param_dispersionless,
    delta="param",
    constraints=(
        ("k2*q_vx - k1*q_ux (solvability witness)", _five_param_denominator),
    ),
    notes="k1 or k2 may vanish as long as the solvability witness holds",
))


# ---------------------------------------------------------------------------
# certified reductions between families and single systems

HYPERBOLIC_KEYS = tuple(k for k in keys() if _REGISTRY[k].hyperbolic)

_SQ2 = math.sqrt(2.0)


@dataclass
class Reduction:
    source: str
    target: str
    map_params: object  # callable(target bound dict) -> source params dict
    note: str = ""


_REDUCTIONS: dict = {}


def _add_reduction(source, target, map_params, note=""):
    _REDUCTIONS[(source, target)] = Reduction(source, target, map_params, note)


_add_reduction(
    "seven-param-pss", "plr",
    lambda t: dict(k0=-1.0, k1=0.0, k2=0.0, k3=0.0, a=_SQ2, b=-_SQ2,
                   theta=math.pi / 2, eta=t["eta"]),
)

_add_reduction(
    "seven-param-pss", "quadratic-pss",
    lambda t: dict(k0=1.0, k1=0.0, k2=0.0, k3=t["c"] / 4.0, a=-_SQ2, b=_SQ2,
                   theta=math.pi, eta=t["eta"]),
)

_add_reduction(
    "seven-param-ss", "quadratic-ss",
    lambda t: dict(k0=-1.0, k1=0.0, k2=0.0, k3=t["c"] / 4.0, a=-_SQ2, b=_SQ2,
                   theta=0.0, eta=t["eta"]),
    note="uses the repaired hyperbolic potential",
)

_add_reduction(
    "four-param-exp", "exp-affine",
    lambda t: dict(k0=1.0, k1=1.0, k2=1.0, delta=-1,
                   psi=ex.simplify(ex.Const(t["a"]) * ex.Var(ex.VX) + ex.Const(t["b"])),
                   eta=t["eta"]),
)

_add_reduction(
    "four-param-exp", "exp-shift",
    lambda t: dict(k0=1.0, k1=2.0, k2=-_SQ2, delta=1, psi="exp(-vx)", eta=t["eta"]),
)

_add_reduction(
    "four-param-exp", "exp-linear",
    lambda t: dict(k0=1.0, k1=-2.0, k2=-_SQ2, delta=1, psi="vx", eta=t["eta"]),
)

_add_reduction(
    "five-param-linear", "phi-monotone",
    lambda t: dict(k0=t["a"], k1=0.0, k2=t["a"], k3=t["b"], delta=t["delta"],
                   q=ex.simplify(-t["phi"]), eta=t["eta"]),
)

_add_reduction(
    "five-param-dispersionless", "konno-oono",
    lambda t: dict(k0=1.0, k1=2.0, k2=0.0, k3=0.0, delta=1, q="2*ux", nu=t["nu"]),
)

_add_reduction(
    "five-param-dispersionless", "product-dispersionless",
    lambda t: dict(k0=float(t["sigma"]), k1=0.0, k2=1.0, k3=0.0, delta=1,
                   q="ux*vx", nu=t["nu"]),
)


def reductions():
    return sorted(_REDUCTIONS)


def reduce(source_key: str, target_key: str, seed=ex.DEFAULT_SEED, **target_params):
    """Instantiate a registered reduction and certify it.

    Returns (SystemSpec, Frame, certificate) built from the source family at
    the reduction's parameter values; the certificate records identity checks
    of F, G and each frame entry against the target.  A failed identity
    raises CertificateFailure.
    """
    try:
        red = _REDUCTIONS[(source_key, target_key)]
    except KeyError:
        raise UnknownKey(f"no registered reduction {source_key} -> {target_key}") from None
    target_entry = entry(target_key)
    tbound = target_entry.bind(target_params)
    sparams = red.map_params(tbound)
    ssys, sfr = get(source_key, **sparams)
    tsys, tfr = target_entry.build(tbound)

    cert = {
        "source": source_key,
        "target": target_key,
        "source_params": {k: (v if isinstance(v, (int, float)) else ex.to_string(ex.as_expr(v) if not isinstance(v, str) else ex.parse(v)))
                          for k, v in sparams.items()},
        "F_equal": bool(ex.is_zero(ssys.F - tsys.F, seed=seed)),
        "G_equal": bool(ex.is_zero(ssys.G - tsys.G, seed=seed)),
        "frame_equal": [
            [bool(ex.is_zero(sfr.f(i, j) - tfr.f(i, j), seed=seed)) for j in (1, 2)]
            for i in (1, 2, 3)
        ],
    }
    ok = cert["F_equal"] and cert["G_equal"] and all(all(r) for r in cert["frame_equal"])
    if not ok:
        raise CertificateFailure(f"reduction {source_key} -> {target_key} failed: {cert}")
    return ssys, sfr, cert
