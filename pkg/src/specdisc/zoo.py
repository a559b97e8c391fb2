"""Concrete operators and their finite truncations.

Every operator is described by an :class:`OperatorSpec` with a canonical
string form ``kind:dim[:key=value,...]``, for example ``volterra:512``,
``mult-circle:64:f=z+0.3/z`` or ``rank-one:3:u=e1,phi=e2``.
"""
from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InputError
from .perturb import MomentFunctional, auto_window, hole_filling_functional
from .socle import RankOneOperator
from .spectra import HoleReport, detect_holes, suggest_thickening

KINDS = (
    "shift",
    "weighted_shift",
    "jordan",
    "volterra",
    "mult_circle",
    "rank_one",
    "circulant_closure",
)

# params each kind accepts
_ALLOWED = {
    "shift": set(),
    "weighted_shift": {"w"},
    "jordan": {"lam"},
    "volterra": {"T"},
    "mult_circle": {"f"},
    "rank_one": {"u", "phi"},
    "circulant_closure": set(),
}


# ---------------------------------------------------------------------------
# Symbol expressions
# ---------------------------------------------------------------------------

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNOPS = {ast.USub: operator.neg, ast.UAdd: operator.pos}
_FUNCS = {
    "exp": np.exp,
    "sin": np.sin,
    "cos": np.cos,
    "log": np.log,
    "sqrt": np.sqrt,
    "conj": np.conj,
    "abs": np.abs,
}
_CONSTS = {"pi": math.pi, "e": math.e, "i": 1j, "j": 1j}


def parse_symbol(expr: str) -> Callable[[np.ndarray], np.ndarray]:
    """Compile an arithmetic expression in ``z`` into a vectorized function.

    Only numbers, ``z``, ``+ - * / **``, the constants ``pi, e, i, j`` and the
    functions ``exp sin cos log sqrt conj abs`` are accepted.
    """
    try:
        tree = ast.parse(expr.strip().replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise InputError(f"bad symbol expression {expr!r}") from exc

    def ev(node, z):
        if isinstance(node, ast.Expression):
            return ev(node.body, z)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)):
            return node.value
        if isinstance(node, ast.Name):
            if node.id == "z":
                return z
            if node.id in _CONSTS:
                return _CONSTS[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left, z), ev(node.right, z))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](ev(node.operand, z))
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS
            and len(node.args) == 1
            and not node.keywords
        ):
            return _FUNCS[node.func.id](ev(node.args[0], z))
        raise InputError(f"unsupported construct in symbol expression {expr!r}")

    # validate eagerly
    ev(tree, np.ones(1, dtype=complex))

    def f(z):
        z = np.asarray(z, dtype=complex)
        with np.errstate(all="ignore"):
            return np.broadcast_to(np.asarray(ev(tree, z), dtype=complex), z.shape).copy()

    return f


def _parse_complex(s: str) -> complex:
    try:
        return complex(s.strip().replace("i", "j").replace(" ", ""))
    except ValueError as exc:
        raise InputError(f"bad number {s!r}") from exc


def _parse_vector(s: str, n: int) -> np.ndarray:
    """``ones``, ``e<k>`` (1-based basis vector) or a ``|``-separated list."""
    s = s.strip()
    if s == "ones":
        return np.ones(n, dtype=complex)
    if s.startswith("e") and s[1:].isdigit():
        k = int(s[1:])
        if not 1 <= k <= n:
            raise InputError(f"basis vector {s} out of range for dim {n}")
        v = np.zeros(n, dtype=complex)
        v[k - 1] = 1.0
        return v
    vals = [_parse_complex(t) for t in s.split("|")]
    if len(vals) != n:
        raise InputError(f"vector {s!r} has {len(vals)} entries, expected {n}")
    return np.array(vals, dtype=complex)


# ---------------------------------------------------------------------------
# OperatorSpec
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OperatorSpec:
    kind: str
    dim: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        kind = self.kind.replace("-", "_")
        if kind not in KINDS:
            raise InputError(f"unknown operator kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if int(self.dim) != self.dim or self.dim < 1:
            raise InputError(f"dim must be a positive integer, got {self.dim!r}")
        object.__setattr__(self, "dim", int(self.dim))
        extra = set(self.params) - _ALLOWED[kind]
        if extra:
            raise InputError(f"unknown parameter(s) {sorted(extra)} for kind {kind}")
        if kind == "mult_circle" and "f" not in self.params:
            raise InputError("mult_circle needs f=<expression in z>")
        if kind == "rank_one" and not {"u", "phi"} <= set(self.params):
            raise InputError("rank_one needs u=... and phi=...")

    @classmethod
    def parse(cls, text: str) -> "OperatorSpec":
        parts = text.strip().split(":", 2)
        if len(parts) < 2:
            raise InputError(f"operator spec must be kind:dim[:params], got {text!r}")
        kind = parts[0].strip()
        try:
            dim = int(parts[1])
        except ValueError as exc:
            raise InputError(f"bad dimension in {text!r}") from exc
        params: dict[str, str] = {}
        if len(parts) == 3 and parts[2].strip():
            for item in parts[2].split(","):
                if "=" not in item:
                    raise InputError(f"parameter {item!r} is not key=value")
                k, v = item.split("=", 1)
                params[k.strip()] = v.strip()
        return cls(kind, dim, params)

    def __str__(self) -> str:
        head = f"{self.kind.replace('_', '-')}:{self.dim}"
        if not self.params:
            return head
        return head + ":" + ",".join(f"{k}={v}" for k, v in self.params.items())


def build(spec: OperatorSpec | str) -> np.ndarray:
    """Dense matrix for an operator spec."""
    if isinstance(spec, str):
        spec = OperatorSpec.parse(spec)
    n, p = spec.dim, spec.params
    kind = spec.kind
    if kind == "shift":
        return shift(n)
    if kind == "circulant_closure":
        return circulant_closure(n)
    if kind == "jordan":
        return jordan(n, _parse_complex(p.get("lam", "0")))
    if kind == "weighted_shift":
        ws = [_parse_complex(t) for t in p.get("w", "1").split("|")]
        return weighted_shift(n, ws)
    if kind == "volterra":
        T = float(_parse_complex(p.get("T", repr(2 * math.pi))).real)
        return volterra(n, T)
    if kind == "mult_circle":
        return mult_circle(n, parse_symbol(p["f"]))
    if kind == "rank_one":
        return RankOneOperator(_parse_vector(p["u"], n), _parse_vector(p["phi"], n)).matrix
    raise InputError(f"unknown operator kind {kind!r}")  # pragma: no cover


def shift(n: int) -> np.ndarray:
    return np.diag(np.ones(n - 1, dtype=complex), -1)


def jordan(n: int, lam: complex = 0.0) -> np.ndarray:
    return lam * np.eye(n, dtype=complex) + np.diag(np.ones(n - 1, dtype=complex), 1)


def weighted_shift(n: int, weights) -> np.ndarray:
    """Subdiagonal shift with weights cycled to length ``n - 1``."""
    w = np.resize(np.asarray(weights, dtype=complex), max(n - 1, 0))
    if not np.all(np.isfinite(w)):
        raise InputError("weights must be finite")
    return np.diag(w, -1)


def circulant_closure(n: int) -> np.ndarray:
    C = shift(n)
    C[0, n - 1] = 1.0
    return C


def volterra_nodes(n: int, T: float = 2 * math.pi) -> np.ndarray:
    return np.linspace(0.0, T, n)


def trapezoid_weights(n: int, T: float = 2 * math.pi) -> np.ndarray:
    h = T / (n - 1)
    w = np.full(n, h)
    w[0] = w[-1] = h / 2
    return w


def volterra(n: int, T: float = 2 * math.pi) -> np.ndarray:
    """Composite-trapezoid discretization of ``(Vf)(t) = int_0^t f`` on ``n`` nodes.

    Row ``i`` integrates over nodes ``0..i`` with weights ``h (1/2, 1, ..., 1, 1/2)``;
    row 0 is zero.  The matrix is lower triangular with diagonal
    ``(0, h/2, ..., h/2)``.
    """
    if n < 2:
        raise InputError("volterra needs at least 2 nodes")
    if not (np.isfinite(T) and T > 0):
        raise InputError("interval length T must be positive")
    h = T / (n - 1)
    V = np.tril(np.full((n, n), h, dtype=complex))
    V[:, 0] = h / 2
    V[np.arange(n), np.arange(n)] = h / 2
    V[0, :] = 0.0
    return V


def volterra_pair(n: int, T: float = 2 * math.pi) -> tuple[np.ndarray, RankOneOperator]:
    """Volterra matrix and ``Q f = (int_0^T f) sin``: ``u = sin(t_i)``, ``phi`` = trapezoid weights."""
    if n < 8:
        raise InputError("volterra_pair needs n >= 8")
    t = volterra_nodes(n, T)
    return volterra(n, T), RankOneOperator(np.sin(t).astype(complex), trapezoid_weights(n, T).astype(complex))


def roots_of_unity(n: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(n) / n)


def mult_circle(n: int, f) -> np.ndarray:
    """``diag(f(z_i))`` at the ``n``-th roots of unity."""
    if isinstance(f, str):
        f = parse_symbol(f)
    vals = np.asarray(f(roots_of_unity(n)), dtype=complex)
    if not np.all(np.isfinite(vals)):
        raise InputError("symbol is not finite on the unit circle")
    return np.diag(vals)


@dataclass
class CircleModel:
    L: np.ndarray
    Pmat: np.ndarray
    holes: HoleReport
    functional: MomentFunctional

    def __iter__(self):
        # unpacks as (L, Pmat, holes)
        return iter((self.L, self.Pmat, self.holes))

    @property
    def samples(self) -> np.ndarray:
        return np.diag(self.L).copy()


def circle_model(f_samples, K: int, resolution: int = 400, thickening: float | None = None) -> CircleModel:
    """Multiplication operator ``diag(f_samples)`` with its hole-filling perturbation.

    The hole containing 0 is confirmed on a raster before the moment functional
    is built; the raster thickening defaults to :func:`suggest_thickening`.
    """
    a = np.atleast_1d(np.asarray(f_samples, dtype=complex))
    if thickening is None:
        w0 = auto_window(a, 0j, 0.0)
        thickening = suggest_thickening(a, w0, resolution)
    window = auto_window(a, 0j, 0.0, margin=2.5 * thickening)
    report = detect_holes(a, window, resolution, thickening)
    if len(report) == 0:
        raise InputError("sigma(L) has no hole at this raster scale")
    if report.hole_at(0j) is None:
        raise InputError("0 does not lie in a hole of sigma(L)")
    fun, P = hole_filling_functional(a, K)
    return CircleModel(np.diag(a), P, report, fun)
