"""Minimal symbolic core for expressions in (u, ux, v, vx) and named parameters.

Expressions are immutable trees built from constants, symbols, sums, products,
rational powers and one-argument function applications.  ``simplify`` puts a
tree into a canonical sum-of-products form (constants folded, like monomials
merged), which makes structural equality meaningful for exact-zero detection
of polynomial identities.  Everything transcendental is handled by ``is_zero``,
a seeded randomized identity test.

Partial derivatives treat u, ux, v, vx as four independent symbols.  Opaque
user functions carry a formal derivative order; orders above two are rejected.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

DEFAULT_SEED = 0xC0FFEE
DEFAULT_TRIALS = 100
DEFAULT_TOL = 1e-9
# default sampling magnitude window: |s| drawn from [0.1, 2], random sign,
# which keeps samples away from the coordinate hyperplanes where frames may
# have poles (1/eta terms and the like)
BOX_LO, BOX_HI = 0.1, 2.0

BUILTIN_FUNCTIONS = ("exp", "sin", "cos", "sinh", "cosh", "log")

_RESERVED = {"u", "ux", "v", "vx", "pi"}


class ExprError(Exception):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message, offset):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class UnknownIdentifierError(ExprError):
    pass


class DifferentiationError(ExprError):
    pass


class ThirdDerivativeError(DifferentiationError):
    pass


class EvalDomainError(ExprError):
    def __init__(self, message, subtree):
        super().__init__(f"{message} in {to_string(subtree)}")
        self.subtree = subtree


class UnboundSymbolError(ExprError):
    pass


class InconclusiveIdentityTest(ExprError):
    pass


class Sym:
    """Interned symbol: one of the four variables or a named real parameter."""

    __slots__ = ("name", "is_param")
    _interned: dict = {}

    def __new__(cls, name, is_param):
        key = (name, is_param)
        hit = cls._interned.get(key)
        if hit is not None:
            return hit
        obj = object.__new__(cls)
        object.__setattr__(obj, "name", name)
        object.__setattr__(obj, "is_param", is_param)
        cls._interned[key] = obj
        return obj

    def __setattr__(self, *a):
        raise AttributeError("Sym is immutable")

    def __repr__(self):
        return self.name

    def __lt__(self, other):
        return self.name < other.name


U = Sym("u", False)
UX = Sym("ux", False)
V = Sym("v", False)
VX = Sym("vx", False)
VARIABLES = (U, UX, V, VX)


def param(name: str) -> Sym:
    if not name:
        raise ValueError("parameter name must be nonempty")
    if name in _RESERVED:
        raise ValueError(f"{name!r} is reserved and cannot be a parameter")
    return Sym(name, True)


class Expr:
    """Immutable expression tree node."""

    __slots__ = ()

    def __add__(self, other):
        return Add((self, as_expr(other)))

    def __radd__(self, other):
        return Add((as_expr(other), self))

    def __sub__(self, other):
        return Add((self, Mul((Const(-1.0), as_expr(other)))))

    def __rsub__(self, other):
        return Add((as_expr(other), Mul((Const(-1.0), self))))

    def __mul__(self, other):
        return Mul((self, as_expr(other)))

    def __rmul__(self, other):
        return Mul((as_expr(other), self))

    def __truediv__(self, other):
        return Mul((self, Pow(as_expr(other), Fraction(-1))))

    def __rtruediv__(self, other):
        return Mul((as_expr(other), Pow(self, Fraction(-1))))

    def __pow__(self, q):
        return Pow(self, Fraction(q))

    def __neg__(self):
        return Mul((Const(-1.0), self))

    def __repr__(self):
        return to_string(self)


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        object.__setattr__(self, "value", float(value))

    def __setattr__(self, *a):
        raise AttributeError("Expr is immutable")

    def __eq__(self, other):
        return isinstance(other, Const) and self.value == other.value

    def __hash__(self):
        return hash(("c", self.value))


class Var(Expr):
    __slots__ = ("sym",)

    def __init__(self, sym):
        object.__setattr__(self, "sym", sym)

    def __setattr__(self, *a):
        raise AttributeError("Expr is immutable")

    def __eq__(self, other):
        return isinstance(other, Var) and self.sym is other.sym

    def __hash__(self):
        return hash(("v", self.sym.name, self.sym.is_param))


class Add(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms):
        object.__setattr__(self, "terms", tuple(terms))

    def __setattr__(self, *a):
        raise AttributeError("Expr is immutable")

    def __eq__(self, other):
        return isinstance(other, Add) and self.terms == other.terms

    def __hash__(self):
        return hash(("+",) + self.terms)


class Mul(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors):
        object.__setattr__(self, "factors", tuple(factors))

    def __setattr__(self, *a):
        raise AttributeError("Expr is immutable")

    def __eq__(self, other):
        return isinstance(other, Mul) and self.factors == other.factors

    def __hash__(self):
        return hash(("*",) + self.factors)


class Pow(Expr):
    """base ** exponent with a rational exponent (general e^f is exp(f))."""

    __slots__ = ("base", "exponent")

    def __init__(self, base, exponent):
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "exponent", Fraction(exponent))

    def __setattr__(self, *a):
        raise AttributeError("Expr is immutable")

    def __eq__(self, other):
        return (
            isinstance(other, Pow)
            and self.exponent == other.exponent
            and self.base == other.base
        )

    def __hash__(self):
        return hash(("^", self.base, self.exponent))


class Func(Expr):
    """Application of a one-argument function.

    ``name`` is a builtin (exp, sin, ...) or an opaque user function; ``order``
    counts formal derivatives, so phi, phi', phi'' are distinct linked nodes.
    """

    __slots__ = ("name", "order", "arg")

    def __init__(self, name, order, arg):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "order", int(order))
        object.__setattr__(self, "arg", arg)

    def __setattr__(self, *a):
        raise AttributeError("Expr is immutable")

    def __eq__(self, other):
        return (
            isinstance(other, Func)
            and self.name == other.name
            and self.order == other.order
            and self.arg == other.arg
        )

    def __hash__(self):
        return hash(("f", self.name, self.order, self.arg))


ZERO = Const(0.0)
ONE = Const(1.0)


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, float, Fraction)):
        return Const(float(x))
    if isinstance(x, Sym):
        return Var(x)
    raise TypeError(f"cannot interpret {x!r} as an expression")


def var(sym: Sym) -> Expr:
    return Var(sym)


def func(name: str, arg, order: int = 0) -> Expr:
    return Func(name, order, as_expr(arg))


# ---------------------------------------------------------------------------
# tree queries


def free_symbols(e: Expr) -> set:
    out = set()

    def walk(n):
        if isinstance(n, Var):
            out.add(n.sym)
        elif isinstance(n, Add):
            for t in n.terms:
                walk(t)
        elif isinstance(n, Mul):
            for f in n.factors:
                walk(f)
        elif isinstance(n, Pow):
            walk(n.base)
        elif isinstance(n, Func):
            walk(n.arg)

    walk(e)
    return out


def user_functions(e: Expr) -> set:
    """Names of non-builtin functions appearing anywhere in the tree."""
    out = set()

    def walk(n):
        if isinstance(n, Func):
            if n.name not in BUILTIN_FUNCTIONS:
                out.add(n.name)
            walk(n.arg)
        elif isinstance(n, Add):
            for t in n.terms:
                walk(t)
        elif isinstance(n, Mul):
            for f in n.factors:
                walk(f)
        elif isinstance(n, Pow):
            walk(n.base)

    walk(e)
    return out


def subst(e: Expr, mapping: dict) -> Expr:
    """Replace symbols by expressions (mapping keys: Sym or name string)."""
    table = {}
    for k, v in mapping.items():
        if isinstance(k, Sym):
            table[k] = as_expr(v)
        else:
            table[Sym(k, k not in _RESERVED)] = as_expr(v)
            if k in ("u", "ux", "v", "vx"):
                table[Sym(k, False)] = as_expr(v)

    def walk(n):
        if isinstance(n, Var):
            return table.get(n.sym, n)
        if isinstance(n, Add):
            return Add(tuple(walk(t) for t in n.terms))
        if isinstance(n, Mul):
            return Mul(tuple(walk(f) for f in n.factors))
        if isinstance(n, Pow):
            return Pow(walk(n.base), n.exponent)
        if isinstance(n, Func):
            return Func(n.name, n.order, walk(n.arg))
        return n

    return walk(e)


# ---------------------------------------------------------------------------
# canonicalization: polynomial normal form over "atoms"
#
# A poly is {monomial: coeff}; a monomial is a sorted tuple of (key, atom,
# exponent) with Fraction exponents.  Atoms are canonical non-polynomial
# units: variables, function applications, and unexpandable powers.

_MAX_EXPAND_POWER = 4


def _atom_key(atom: Expr) -> str:
    return to_string(atom)


def _poly_const(c: float):
    if c == 0.0:
        return {}
    return {(): c}


def _poly_atom(atom: Expr, exponent=Fraction(1)):
    key = _atom_key(atom)
    return {((key, atom, exponent),): 1.0}


def _poly_add(p, q):
    out = dict(p)
    for m, c in q.items():
        s = out.get(m, 0.0) + c
        if s == 0.0:
            out.pop(m, None)
        else:
            out[m] = s
    return out


def _mono_mul(m1, m2):
    exps = {}
    atoms = {}
    for key, atom, e in m1 + m2:
        exps[key] = exps.get(key, Fraction(0)) + e
        atoms[key] = atom
    items = [(k, atoms[k], e) for k, e in exps.items() if e != 0]
    items.sort(key=lambda it: (it[0], it[2]))
    return tuple(items)


def _poly_mul(p, q):
    out = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            m = _mono_mul(m1, m2)
            c = c1 * c2
            if c == 0.0:
                continue
            s = out.get(m, 0.0) + c
            if s == 0.0:
                out.pop(m, None)
            else:
                out[m] = s
    return out


def _mono_pow_int(m, k: int, coeff: float):
    # integer power of a single monomial distributes over its factors
    if k == 0:
        return _poly_const(1.0)
    c = coeff ** k
    items = [(key, atom, e * k) for key, atom, e in m]
    items.sort(key=lambda it: (it[0], it[2]))
    return {tuple(items): c}


_FOLDABLE = {
    "exp": math.exp,
    "sin": math.sin,
    "cos": math.cos,
    "sinh": math.sinh,
    "cosh": math.cosh,
}


def _to_poly(e: Expr):
    if isinstance(e, Const):
        return _poly_const(e.value)
    if isinstance(e, Var):
        return _poly_atom(e)
    if isinstance(e, Add):
        out = {}
        for t in e.terms:
            out = _poly_add(out, _to_poly(t))
        return out
    if isinstance(e, Mul):
        out = _poly_const(1.0)
        for f in e.factors:
            out = _poly_mul(out, _to_poly(f))
            if not out:
                return out
        return out
    if isinstance(e, Func):
        arg = simplify(e.arg)
        if isinstance(arg, Const) and e.order == 0 and e.name in _FOLDABLE:
            return _poly_const(_FOLDABLE[e.name](arg.value))
        if (
            isinstance(arg, Const)
            and e.order == 0
            and e.name == "log"
            and arg.value > 0.0
        ):
            return _poly_const(math.log(arg.value))
        return _poly_atom(Func(e.name, e.order, arg))
    if isinstance(e, Pow):
        q = e.exponent
        if q == 0:
            return _poly_const(1.0)
        p = _to_poly(e.base)
        if not p:  # base is identically zero
            if q > 0:
                return {}
            return _poly_atom(Pow(ZERO, q))
        if q == 1:
            return p
        if len(p) == 1:
            (m, c), = p.items()
            if q.denominator == 1:
                k = q.numerator
                if c == 0.0:
                    return {}
                if k > 0 or c != 0.0:
                    if not m:
                        return _poly_const(c ** k)
                    return _mono_pow_int(m, k, c)
            # fractional exponent: only safe to push through first powers
            if not m and c >= 0.0:
                return _poly_const(c ** float(q))
            if c == 1.0 and len(m) == 1 and m[0][2] == 1:
                return _poly_atom(m[0][1], q)
        elif q.denominator == 1:
            k = q.numerator
            if 2 <= k <= _MAX_EXPAND_POWER:
                out = p
                for _ in range(k - 1):
                    out = _poly_mul(out, p)
                return out
        # unexpandable: atomize the simplified base
        return _poly_atom(Pow(_from_poly(p), q))
    raise TypeError(f"unknown node {e!r}")


def _mono_to_expr(m, c: float) -> Expr:
    factors = []
    if c != 1.0 or not m:
        factors.append(Const(c))
    for _, atom, e in m:
        if e == 1:
            factors.append(atom)
        else:
            factors.append(Pow(atom, e))
    if len(factors) == 1:
        return factors[0]
    return Mul(tuple(factors))


def _from_poly(p) -> Expr:
    if not p:
        return ZERO
    terms = sorted(p.items(), key=lambda kv: tuple((k, e) for k, _, e in kv[0]))
    exprs = [_mono_to_expr(m, c) for m, c in terms]
    if len(exprs) == 1:
        return exprs[0]
    return Add(tuple(exprs))


def simplify(e: Expr) -> Expr:
    return _from_poly(_to_poly(e))


# ---------------------------------------------------------------------------
# differentiation

_DERIV_RULES = {
    "exp": lambda a: Func("exp", 0, a),
    "sin": lambda a: Func("cos", 0, a),
    "cos": lambda a: Mul((Const(-1.0), Func("sin", 0, a))),
    "sinh": lambda a: Func("cosh", 0, a),
    "cosh": lambda a: Func("sinh", 0, a),
    "log": lambda a: Pow(a, Fraction(-1)),
}


def diff(e: Expr, s: Sym) -> Expr:
    """Exact partial derivative; u, ux, v, vx are independent symbols."""
    if s.is_param:
        raise DifferentiationError(f"cannot differentiate with respect to parameter {s.name!r}")
    return simplify(_diff(e, s))


def _diff(e: Expr, s: Sym) -> Expr:
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.sym is s else ZERO
    if isinstance(e, Add):
        return Add(tuple(_diff(t, s) for t in e.terms))
    if isinstance(e, Mul):
        terms = []
        fs = e.factors
        for i in range(len(fs)):
            terms.append(Mul(fs[:i] + (_diff(fs[i], s),) + fs[i + 1:]))
        return Add(tuple(terms))
    if isinstance(e, Pow):
        q = e.exponent
        if q == 0:
            return ZERO
        return Mul((Const(float(q)), Pow(e.base, q - 1), _diff(e.base, s)))
    if isinstance(e, Func):
        if e.name in _DERIV_RULES:
            outer = _DERIV_RULES[e.name](e.arg)
        else:
            if e.order >= 2:
                raise ThirdDerivativeError(
                    f"third derivative of user function {e.name!r} is not available"
                )
            outer = Func(e.name, e.order + 1, e.arg)
        return Mul((outer, _diff(e.arg, s)))
    raise TypeError(f"unknown node {e!r}")


def is_const_zero(e: Expr) -> bool:
    s = simplify(e)
    return isinstance(s, Const) and s.value == 0.0


# ---------------------------------------------------------------------------
# evaluation


def _normalize_env(env: dict) -> dict:
    out = {}
    for k, v in (env or {}).items():
        if isinstance(k, Sym):
            out[k] = float(v)
        elif k in ("u", "ux", "v", "vx"):
            out[Sym(k, False)] = float(v)
        else:
            out[param(k)] = float(v)
    return out


class _Scale:
    __slots__ = ("max_abs",)

    def __init__(self):
        self.max_abs = 0.0

    def see(self, x):
        a = abs(x)
        if a > self.max_abs:
            self.max_abs = a
        return x


def evaluate(e: Expr, env: dict, fns: dict | None = None) -> float:
    """IEEE double evaluation; raises if a symbol or function is unbound."""
    val, _ = evaluate_with_scale(e, env, fns)
    return val


def evaluate_with_scale(e: Expr, env: dict, fns: dict | None = None):
    """Evaluate and also return the largest |value| over all subterms."""
    table = _normalize_env(env)
    fns = fns or {}
    scale = _Scale()

    def ev(n):
        if isinstance(n, Const):
            return scale.see(n.value)
        if isinstance(n, Var):
            try:
                return scale.see(table[n.sym])
            except KeyError:
                raise UnboundSymbolError(f"symbol {n.sym.name!r} is not bound") from None
        if isinstance(n, Add):
            return scale.see(sum(ev(t) for t in n.terms))
        if isinstance(n, Mul):
            out = 1.0
            for f in n.factors:
                out *= ev(f)
            return scale.see(out)
        if isinstance(n, Pow):
            b = ev(n.base)
            q = n.exponent
            if b == 0.0 and q < 0:
                raise EvalDomainError("division by zero", n)
            if b < 0.0 and q.denominator != 1:
                raise EvalDomainError("fractional power of a negative value", n)
            return scale.see(b ** float(q))
        if isinstance(n, Func):
            a = ev(n.arg)
            if n.name in BUILTIN_FUNCTIONS:
                if n.order != 0:
                    raise EvalDomainError("unexpected derivative marker on builtin", n)
                if n.name == "log":
                    if a <= 0.0:
                        raise EvalDomainError("log of a nonpositive value", n)
                    return scale.see(math.log(a))
                try:
                    return scale.see(getattr(math, n.name)(a))
                except OverflowError:
                    raise EvalDomainError("overflow", n) from None
            try:
                triple = fns[n.name]
            except KeyError:
                raise UnboundSymbolError(f"user function {n.name!r} is not bound") from None
            return scale.see(triple[n.order](a))
        raise TypeError(f"unknown node {n!r}")

    return ev(e), scale.max_abs


# ---------------------------------------------------------------------------
# randomized identity testing


def _draw(rng, box, sym):
    if box and sym in box:
        lo, hi = box[sym]
        return lo + (hi - lo) * rng.random()
    mag = BOX_LO + (BOX_HI - BOX_LO) * rng.random()
    return mag if rng.random() < 0.5 else -mag


def _normalize_box(box) -> dict:
    if not box:
        return {}
    out = {}
    for k, v in box.items():
        sym = k if isinstance(k, Sym) else (Sym(k, False) if k in ("u", "ux", "v", "vx") else param(k))
        out[sym] = (float(v[0]), float(v[1]))
    return out


def _random_fn_triple(rng):
    # smooth random instance with exact derivatives, used to quantify
    # identities over unbound user functions
    c0, c1, c2, c3 = (rng.uniform(-1.0, 1.0) for _ in range(4))

    def f(s):
        return c0 + c1 * s + c2 * s * s + c3 * math.sin(s)

    def f1(s):
        return c1 + 2.0 * c2 * s + c3 * math.cos(s)

    def f2(s):
        return 2.0 * c2 - c3 * math.sin(s)

    return (f, f1, f2)


def is_zero(
    e: Expr,
    box: dict | None = None,
    trials: int = DEFAULT_TRIALS,
    tol: float = DEFAULT_TOL,
    seed: int = DEFAULT_SEED,
    fixed: dict | None = None,
    fns: dict | None = None,
) -> bool:
    """Seeded randomized test that ``e`` vanishes identically.

    At each sample the acceptance criterion is magnitude-relative:
    |value| <= tol * (1 + largest intermediate magnitude).  Unbound params are
    sampled alongside the variables; unbound user functions get fresh random
    smooth instances per trial.  Domain errors at a sample are inconclusive
    and trigger a resample, with a bounded retry budget.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    e = simplify(e)
    if isinstance(e, Const):
        return e.value == 0.0
    rng = np.random.default_rng(seed)
    box = _normalize_box(box)
    fixed_env = _normalize_env(fixed or {})
    syms = sorted(free_symbols(e))
    free = [s for s in syms if s not in fixed_env]
    fn_names = sorted(user_functions(e) - set((fns or {}).keys()))
    budget = trials * 5
    done = 0
    while done < trials:
        if budget <= 0:
            raise InconclusiveIdentityTest(
                "identity test exhausted its retry budget on domain errors"
            )
        budget -= 1
        env = dict(fixed_env)
        for s in free:
            env[s] = _draw(rng, box, s)
        table = dict(fns or {})
        for name in fn_names:
            table[name] = _random_fn_triple(rng)
        try:
            val, mag = evaluate_with_scale(e, env, table)
        except EvalDomainError:
            continue
        if not math.isfinite(val):
            continue
        if abs(val) > tol * (1.0 + mag):
            return False
        done += 1
    return True


# ---------------------------------------------------------------------------
# printing


def _fmt_const(v: float) -> str:
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def _fmt_exponent(q: Fraction) -> str:
    if q.denominator == 1 and q >= 0:
        return str(q.numerator)
    if q.denominator == 1:
        return f"({q.numerator})"
    return f"({q.numerator}/{q.denominator})"


def _print_factor(e: Expr) -> str:
    if isinstance(e, (Var, Func)):
        return _print_node(e)
    if isinstance(e, Const):
        return _fmt_const(e.value) if e.value >= 0 else f"({_fmt_const(e.value)})"
    if isinstance(e, Pow):
        return _print_node(e)
    return f"({_print_node(e)})"


def _print_node(e: Expr) -> str:
    if isinstance(e, Const):
        return _fmt_const(e.value)
    if isinstance(e, Var):
        return e.sym.name
    if isinstance(e, Func):
        return f"{e.name}{chr(39) * e.order}({_print_node(e.arg)})"
    if isinstance(e, Pow):
        base = e.base
        if isinstance(base, (Var, Func)):
            b = _print_node(base)
        else:
            b = f"({_print_node(base)})"
        return f"{b}^{_fmt_exponent(e.exponent)}"
    if isinstance(e, Mul):
        factors = e.factors
        prefix = ""
        if factors and isinstance(factors[0], Const) and factors[0].value < 0:
            prefix = "-"
            c = factors[0].value
            if c == -1.0 and len(factors) > 1:
                factors = factors[1:]
            else:
                factors = (Const(-c),) + factors[1:]
        if len(factors) == 1:
            inner = factors[0]
            body = _print_factor(inner) if prefix else _print_node(inner)
            return prefix + body
        return prefix + "*".join(_print_factor(f) for f in factors)
    if isinstance(e, Add):
        parts = []
        for i, t in enumerate(e.terms):
            s = _print_node(t)
            if i == 0:
                parts.append(s)
            elif s.startswith("-"):
                parts.append(" - " + s[1:])
            else:
                parts.append(" + " + s)
        return "".join(parts)
    raise TypeError(f"unknown node {e!r}")


def to_string(e: Expr) -> str:
    return _print_node(e)


# ---------------------------------------------------------------------------
# parsing

_TOKEN_OPS = set("+-*/^(),")


def _tokenize(text: str):
    tokens = []  # (kind, value, offset)
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _TOKEN_OPS:
            tokens.append(("op", ch, i))
            i += 1
            continue
        if ch.isdigit() or ch == ".":
            j = i
            seen_dot = False
            seen_exp = False
            while j < n:
                c = text[j]
                if c.isdigit():
                    j += 1
                elif c == "." and not seen_dot and not seen_exp:
                    seen_dot = True
                    j += 1
                elif c in "eE" and j + 1 < n and (text[j + 1].isdigit() or text[j + 1] in "+-") and not seen_exp:
                    seen_exp = True
                    j += 2 if text[j + 1] in "+-" else 1
                else:
                    break
            try:
                val = float(text[i:j])
            except ValueError:
                raise ExprSyntaxError(f"bad number {text[i:j]!r}", i) from None
            tokens.append(("num", val, i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            while j < n and text[j] == "'":
                j += 1
            tokens.append(("ident", text[i:j], i))
            i = j
            continue
        raise ExprSyntaxError(f"unexpected character {ch!r}", i)
    tokens.append(("end", None, n))
    return tokens


class _Parser:
    def __init__(self, text, allowed_params=None):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0
        self.allowed = allowed_params

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def expect_op(self, op):
        kind, val, off = self.peek()
        if kind == "op" and val == op:
            return self.take()
        raise ExprSyntaxError(f"expected {op!r}", off)

    def parse(self):
        e = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {val!r}", off)
        return e

    def expr(self):
        terms = [self.term()]
        while True:
            kind, val, off = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                t = self.term()
                terms.append(t if val == "+" else Mul((Const(-1.0), t)))
            else:
                break
        return terms[0] if len(terms) == 1 else Add(tuple(terms))

    def term(self):
        factors = [self.signed_factor()]
        while True:
            kind, val, off = self.peek()
            if kind == "op" and val in "*/":
                self.take()
                f = self.signed_factor()
                factors.append(f if val == "*" else Pow(f, Fraction(-1)))
            else:
                break
        return factors[0] if len(factors) == 1 else Mul(tuple(factors))

    def signed_factor(self):
        kind, val, off = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return Mul((Const(-1.0), self.signed_factor()))
        if kind == "op" and val == "+":
            self.take()
            return self.signed_factor()
        return self.factor()

    def factor(self):
        base = self.primary()
        kind, val, off = self.peek()
        if kind == "op" and val == "^":
            self.take()
            q = self.exponent()
            return Pow(base, q)
        return base

    def exponent(self):
        kind, val, off = self.peek()
        sign = 1
        if kind == "op" and val in "+-":
            self.take()
            sign = -1 if val == "-" else 1
            kind, val, off = self.peek()
        if kind == "num":
            self.take()
            if val != int(val):
                raise ExprSyntaxError("exponent must be rational p or (p/q)", off)
            return Fraction(sign * int(val))
        if kind == "op" and val == "(":
            self.take()
            num = self._int_token()
            kind, val, off = self.peek()
            den = 1
            if kind == "op" and val == "/":
                self.take()
                den = self._int_token()
            self.expect_op(")")
            return Fraction(sign * num, den)
        raise ExprSyntaxError("expected exponent", off)

    def _int_token(self):
        kind, val, off = self.peek()
        sign = 1
        if kind == "op" and val in "+-":
            self.take()
            sign = -1 if val == "-" else 1
            kind, val, off = self.peek()
        if kind != "num" or val != int(val):
            raise ExprSyntaxError("expected integer", off)
        self.take()
        return sign * int(val)

    def primary(self):
        kind, val, off = self.peek()
        if kind == "num":
            self.take()
            return Const(val)
        if kind == "op" and val == "(":
            self.take()
            e = self.expr()
            self.expect_op(")")
            return e
        if kind == "ident":
            self.take()
            name = val
            order = 0
            while name.endswith("'"):
                order += 1
                name = name[:-1]
            nkind, nval, noff = self.peek()
            if nkind == "op" and nval == "(":
                self.take()
                arg = self.expr()
                self.expect_op(")")
                if name in BUILTIN_FUNCTIONS and order > 0:
                    raise ExprSyntaxError("builtin functions take no derivative marks", off)
                if order > 2:
                    raise ExprSyntaxError("at most two derivative marks are supported", off)
                return Func(name, order, arg)
            if order > 0:
                raise ExprSyntaxError("derivative marks require an argument list", off)
            if name in ("u", "ux", "v", "vx"):
                return Var(Sym(name, False))
            if name == "pi":
                return Const(math.pi)
            if name in BUILTIN_FUNCTIONS:
                raise ExprSyntaxError(f"function {name!r} requires an argument list", off)
            if self.allowed is not None and name not in self.allowed:
                raise UnknownIdentifierError(f"unknown identifier {name!r} at offset {off}")
            return Var(param(name))
        raise ExprSyntaxError("expected expression", off)


def parse(text: str, allowed_params=None, canonical: bool = True) -> Expr:
    """Parse the documented grammar; the result is canonicalized by default."""
    e = _Parser(text, allowed_params).parse()
    return simplify(e) if canonical else e


# ---------------------------------------------------------------------------
# vectorized compilation (for grid evaluation)

_NUMPY_FUNCS = {
    "exp": np.exp,
    "sin": np.sin,
    "cos": np.cos,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "log": np.log,
}


def to_callable(e: Expr, params: dict | None = None, fns: dict | None = None):
    """Compile to ``f(u, ux, v, vx) -> ndarray`` with params bound as numbers.

    User functions must be supplied in ``fns`` as (f, f', f'') triples of
    numpy-vectorized callables.
    """
    params = {k: float(v) for k, v in (params or {}).items()}
    fns = fns or {}
    slot = {"u": 0, "ux": 1, "v": 2, "vx": 3}

    def build(n):
        if isinstance(n, Const):
            c = n.value
            return lambda a: c
        if isinstance(n, Var):
            if not n.sym.is_param:
                i = slot[n.sym.name]
                return lambda a: a[i]
            name = n.sym.name
            if name not in params:
                raise UnboundSymbolError(f"parameter {name!r} is not bound")
            c = params[name]
            return lambda a: c
        if isinstance(n, Add):
            parts = [build(t) for t in n.terms]
            def f(a, parts=parts):
                out = parts[0](a)
                for p in parts[1:]:
                    out = out + p(a)
                return out
            return f
        if isinstance(n, Mul):
            parts = [build(t) for t in n.factors]
            def f(a, parts=parts):
                out = parts[0](a)
                for p in parts[1:]:
                    out = out * p(a)
                return out
            return f
        if isinstance(n, Pow):
            b = build(n.base)
            q = float(n.exponent)
            if n.exponent.denominator == 1:
                k = int(n.exponent)
                if k == -1:
                    return lambda a: 1.0 / b(a)
                if k == 2:
                    return lambda a: b(a) ** 2
                return lambda a: b(a) ** k
            return lambda a: np.power(b(a), q)
        if isinstance(n, Func):
            arg = build(n.arg)
            if n.name in _NUMPY_FUNCS:
                g = _NUMPY_FUNCS[n.name]
                return lambda a: g(arg(a))
            if n.name not in fns:
                raise UnboundSymbolError(f"user function {n.name!r} is not bound")
            g = fns[n.name][n.order]
            return lambda a: g(arg(a))
        raise TypeError(f"unknown node {n!r}")

    body = build(simplify(e))

    def compiled(u, ux, v, vx):
        return body((u, ux, v, vx))

    return compiled


# ---------------------------------------------------------------------------
# random expression trees (shared by tests and the generator round-trips)


def random_expr(rng, syms, depth: int = 3, allow_funcs: bool = True) -> Expr:
    """Small random smooth expression over the given symbols."""
    if depth <= 0 or rng.random() < 0.3:
        r = rng.random()
        if r < 0.45:
            return Var(syms[int(rng.integers(0, len(syms)))])
        return Const(round(float(rng.uniform(-2.0, 2.0)), 3))
    r = rng.random()
    if r < 0.35:
        return random_expr(rng, syms, depth - 1, allow_funcs) + random_expr(
            rng, syms, depth - 1, allow_funcs
        )
    if r < 0.7:
        return random_expr(rng, syms, depth - 1, allow_funcs) * random_expr(
            rng, syms, depth - 1, allow_funcs
        )
    if r < 0.85 and allow_funcs:
        name = ("sin", "cos", "exp")[int(rng.integers(0, 3))]
        inner = random_expr(rng, syms, depth - 1, allow_funcs)
        return Func(name, 0, Mul((Const(0.5), inner)))
    return Pow(random_expr(rng, syms, depth - 1, allow_funcs), Fraction(2))
