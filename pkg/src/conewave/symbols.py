"""Symbols of model pseudo-differential operators: evaluation, the two-sided
ellipticity certificate, full-space inversion, wave-factorization inputs with
numerical support validation, the index decomposition ae - S = N + delta, and
the smoothness-shifting function Q_N.

Wave factorizations are *inputs*: the library ships two catalogue families
(the half-space family (xi_k + i(1+|xi'_K|))^gamma per block, and the 2D-cone
family (a^2 (xi_2 + i)^2 - xi_1^2)^p with integer p) and checks the factor
support property numerically instead of asserting it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .cones import ConeSpec, ConeError, indicator
from .lattice import (
    Grid,
    LatticeError,
    SampledField,
    _weight_array,
    norm_hs,
    transform,
)

__all__ = [
    "SymbolSpec",
    "SymbolError",
    "weight_power",
    "shifted_axis",
    "eskin_factor",
    "lorentz_factor",
    "product",
    "user_grid",
    "reciprocal",
    "eval_symbol",
    "EllipticityReport",
    "check_ellipticity",
    "apply_pdo",
    "solve_full_space",
    "SupportReport",
    "validate_factor_support",
    "FactorizedSymbol",
    "eskin_factorization",
    "IndexDecomposition",
    "decompose_index",
    "build_qn",
]

KINDS = (
    "weight-power",
    "shifted-axis",
    "halfspace-eskin-factor",
    "cone2d-lorentz-factor",
    "product",
    "user-grid",
)


class SymbolError(ValueError):
    """Raised on unknown symbol kinds or parameter/partition mismatches."""


@dataclass(frozen=True)
class SymbolSpec:
    """A symbol description; evaluate on a grid with :func:`eval_symbol`.

    ``order`` is the declared per-block growth vector alpha (checked, not
    trusted, by :func:`check_ellipticity`).
    """

    kind: str
    order: tuple[float, ...]
    gamma: tuple[float, ...] = ()          # weight-power / eskin exponents
    sign: int = +1                         # eskin / lorentz: +1 plus, -1 minus
    axis: int = 0                          # shifted-axis
    shift: complex = 1j                    # shifted-axis
    power: float = 1.0                     # shifted-axis
    block: int = 0                         # lorentz block index
    a: float = 1.0                         # lorentz slope
    p: int = 1                             # lorentz integer power
    children: tuple["SymbolSpec", ...] = ()
    values: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SymbolError(f"unknown symbol kind {self.kind!r}")


def weight_power(gamma: Sequence[float]) -> SymbolSpec:
    """A(xi) = prod_j (1 + |xi_{K_j}|)^{gamma_j}; the canonical elliptic symbol."""
    g = tuple(float(x) for x in gamma)
    return SymbolSpec("weight-power", order=g, gamma=g)


def shifted_axis(axis: int, shift: complex = 1j, power: float = 1.0,
                 order: Optional[Sequence[float]] = None) -> SymbolSpec:
    """A(xi) = (xi_axis + shift)^power; shift must be off the real axis."""
    if np.imag(shift) == 0:
        raise SymbolError("shifted-axis shift must have nonzero imaginary part")
    o = tuple(float(x) for x in order) if order is not None else (float(power),)
    return SymbolSpec("shifted-axis", order=o, axis=int(axis),
                      shift=complex(shift), power=float(power))


def eskin_factor(gamma: Sequence[float], sign: int = +1) -> SymbolSpec:
    """Half-space family prod_j (xi_{k_j} + sign*i*(1 + |xi'_{K_j}|))^{gamma_j}.

    sign=+1 gives a plus factor (kernel in {x_k >= 0} per block), sign=-1
    the mirror minus factor.
    """
    if sign not in (+1, -1):
        raise SymbolError("sign must be +1 or -1")
    g = tuple(float(x) for x in gamma)
    return SymbolSpec("halfspace-eskin-factor", order=g, gamma=g, sign=sign)


def lorentz_factor(nblocks: int, block: int, a: float, p: int,
                   sign: int = +1) -> SymbolSpec:
    """2D-cone family (a^2 (xi_2 + sign*i)^2 - xi_1^2)^p on one block.

    Only integer p: fractional powers hit the branch cut of the quadratic
    form on the tube.
    """
    if sign not in (+1, -1):
        raise SymbolError("sign must be +1 or -1")
    if int(p) != p:
        raise SymbolError("lorentz power must be an integer (branch-cut ambiguity)")
    order = [0.0] * nblocks
    order[block] = 2.0 * p
    return SymbolSpec("cone2d-lorentz-factor", order=tuple(order), block=int(block),
                      a=float(a), p=int(p), sign=sign)


def product(children: Sequence[SymbolSpec]) -> SymbolSpec:
    kids = tuple(children)
    if not kids:
        raise SymbolError("product needs at least one child")
    n = len(kids[0].order)
    if any(len(c.order) != n for c in kids):
        raise SymbolError("product children disagree on the number of blocks")
    order = tuple(float(sum(c.order[j] for c in kids)) for j in range(n))
    return SymbolSpec("product", order=order, children=kids)


def user_grid(values: np.ndarray, order: Sequence[float]) -> SymbolSpec:
    return SymbolSpec("user-grid", order=tuple(float(x) for x in order),
                      values=np.asarray(values, dtype=complex))


def reciprocal(spec: SymbolSpec) -> SymbolSpec:
    """Spec of 1/A, with all exponents negated."""
    neg = tuple(-x for x in spec.order)
    if spec.kind == "weight-power":
        return weight_power(neg)
    if spec.kind == "shifted-axis":
        return SymbolSpec("shifted-axis", order=neg, axis=spec.axis,
                          shift=spec.shift, power=-spec.power)
    if spec.kind == "halfspace-eskin-factor":
        return SymbolSpec("halfspace-eskin-factor", order=neg,
                          gamma=tuple(-g for g in spec.gamma), sign=spec.sign)
    if spec.kind == "cone2d-lorentz-factor":
        return SymbolSpec("cone2d-lorentz-factor", order=neg, block=spec.block,
                          a=spec.a, p=-spec.p, sign=spec.sign)
    if spec.kind == "product":
        return SymbolSpec("product", order=neg,
                          children=tuple(reciprocal(c) for c in spec.children))
    if spec.kind == "user-grid":
        return SymbolSpec("user-grid", order=neg, values=1.0 / spec.values)
    raise SymbolError(f"unknown symbol kind {spec.kind!r}")


def _check_blocks(spec: SymbolSpec, grid: Grid) -> None:
    n = grid.partition.nblocks
    if len(spec.order) != n:
        raise SymbolError(
            f"symbol declares {len(spec.order)} block orders, partition has {n}"
        )


def _primed_modulus(grid: Grid, j: int) -> np.ndarray:
    axes = grid.partition.blocks[j]
    if len(axes) == 1:
        return np.zeros([1] * grid.ndim)
    sq = 0.0
    for a in axes[:-1]:
        sq = sq + grid.freq_coord(a) ** 2
    return np.sqrt(sq)


def eval_symbol(spec: SymbolSpec, grid: Grid) -> SampledField:
    """Evaluate a symbol spec to a frequency-side field."""
    _check_blocks(spec, grid)
    part = grid.partition
    if spec.kind == "weight-power":
        vals = _weight_array(grid, spec.gamma).astype(complex)
    elif spec.kind == "shifted-axis":
        if not 0 <= spec.axis < grid.ndim:
            raise SymbolError(f"axis {spec.axis} out of range")
        base = grid.freq_coord(spec.axis).astype(complex) + spec.shift
        vals = np.broadcast_to(base ** spec.power, grid.shape).copy()
    elif spec.kind == "halfspace-eskin-factor":
        if len(spec.gamma) != part.nblocks:
            raise SymbolError("eskin gamma must have one entry per block")
        vals = np.ones(grid.shape, dtype=complex)
        for j, g in enumerate(spec.gamma):
            if g == 0.0:
                continue
            last = part.blocks[j][-1]
            base = grid.freq_coord(last) + 1j * spec.sign * (1.0 + _primed_modulus(grid, j))
            vals = vals * base ** g
    elif spec.kind == "cone2d-lorentz-factor":
        axes = part.blocks[spec.block]
        if len(axes) != 2:
            raise SymbolError(
                f"lorentz factor needs a 2-axis block, block {spec.block} has {len(axes)}"
            )
        xi1 = grid.freq_coord(axes[0])
        xi2 = grid.freq_coord(axes[1])
        base = spec.a ** 2 * (xi2 + 1j * spec.sign) ** 2 - xi1 ** 2
        if spec.p >= 0:
            vals = np.broadcast_to(base ** spec.p, grid.shape).copy().astype(complex)
        else:
            vals = np.broadcast_to(base ** float(spec.p), grid.shape).copy().astype(complex)
    elif spec.kind == "product":
        vals = np.ones(grid.shape, dtype=complex)
        for c in spec.children:
            vals = vals * eval_symbol(c, grid).values
    elif spec.kind == "user-grid":
        if spec.values is None or spec.values.shape != grid.shape:
            raise SymbolError("user-grid values missing or shaped unlike the grid")
        vals = spec.values.astype(complex)
    else:  # pragma: no cover
        raise SymbolError(f"unknown symbol kind {spec.kind!r}")
    return SampledField(grid, "frequency", vals)


# ----------------------------------------------------------------------------
# ellipticity and full-space inversion
# ----------------------------------------------------------------------------

@dataclass
class EllipticityReport:
    c1: float
    c2: float
    elliptic: bool
    argmin: tuple[int, ...]


def check_ellipticity(A: SampledField, alpha, tol: float = 1e-10) -> EllipticityReport:
    """Grid certificate of the two-sided bounds c1 w_alpha <= |A| <= c2 w_alpha."""
    if A.side != "frequency":
        raise SymbolError("symbols are frequency-side fields")
    w = _weight_array(A.grid, alpha)
    ratio = np.abs(A.values) / w
    imin = np.unravel_index(int(np.argmin(ratio)), ratio.shape)
    c1 = float(ratio[imin])
    c2 = float(np.max(ratio))
    return EllipticityReport(c1=c1, c2=c2, elliptic=bool(c1 > tol), argmin=imin)


def apply_pdo(A: SampledField, u: SampledField) -> SampledField:
    """Model operator: inverse transform of A(xi) * u~(xi)."""
    if u.grid != A.grid:
        raise SymbolError("symbol and field live on different grids")
    if u.side != "space":
        raise SymbolError("apply_pdo expects a space-side field")
    ut = transform(u, "forward")
    return transform(SampledField(u.grid, "frequency", A.values * ut.values), "inverse")


def solve_full_space(A: SampledField, v: SampledField, S, alpha,
                     tol: float = 1e-10) -> tuple[SampledField, float]:
    """Unique full-space solution u~ = v~ / A, with the a priori ratio
    ||u||_S / ||v||_{S-alpha} (guaranteed <= 1/c1 at grid level)."""
    report = check_ellipticity(A, alpha, tol=tol)
    if not report.elliptic:
        raise SymbolError(
            "symbol is not elliptic on this grid: min |A|/w_alpha = "
            f"{report.c1:.3e} at node index {report.argmin}"
        )
    if v.grid != A.grid:
        raise SymbolError("symbol and right-hand side live on different grids")
    vt = transform(v, "forward") if v.side == "space" else v
    ut = SampledField(v.grid, "frequency", vt.values / A.values)
    u = transform(ut, "inverse")
    s = v.grid.partition.check_vector(S, "S")
    a = v.grid.partition.check_vector(alpha, "alpha")
    denom = norm_hs(vt, s - a)
    ratio = norm_hs(ut, s) / denom if denom > 0 else 0.0
    return u, float(ratio)


# ----------------------------------------------------------------------------
# factor support validation (Paley--Wiener proxy)
# ----------------------------------------------------------------------------

@dataclass
class SupportReport:
    leak: float
    passed: bool
    mollified: bool


def _reflected_mask(inside: np.ndarray) -> np.ndarray:
    """Mask of -C: reflect the indicator through the origin (node x -> -x).

    On our grids the node set is symmetric except the single -l row per axis,
    which reflects onto itself.
    """
    out = inside
    for ax in range(inside.ndim):
        flipped = np.flip(out, axis=ax)
        out = np.roll(flipped, 1, axis=ax)
        # row at -l has no mirror node; keep its flipped value
        out = out.copy()
        edge = np.take(flipped, -1, axis=ax)
        sl = [slice(None)] * inside.ndim
        sl[ax] = 0
        out[tuple(sl)] = edge
    return out


def validate_factor_support(factor: SampledField, cone: ConeSpec, side: str,
                            tol: float = 1e-3, mollify: str = "auto") -> SupportReport:
    """Support form of the factor analyticity: the inverse transform of the
    factor's reciprocal must concentrate in the closed cone (plus side) or
    its reflection (minus side).

    leak = (squared mass outside the target support) / (total squared mass).
    A Gaussian frequency mollifier (std 1/4 of the per-axis Nyquist) tames
    growing reciprocals; with ``mollify="auto"`` it is applied only when the
    reciprocal actually grows toward the grid boundary, since smearing a
    bounded kernel across the cone boundary would dominate the leak.
    """
    if side not in ("plus", "minus"):
        raise SymbolError(f"side must be 'plus' or 'minus', got {side!r}")
    if mollify not in ("auto", "on", "off"):
        raise SymbolError(f"mollify must be 'auto', 'on' or 'off', got {mollify!r}")
    grid = factor.grid
    vals = factor.values
    if np.any(vals == 0):
        raise SymbolError("factor has a zero node; reciprocal undefined")
    recip = 1.0 / vals

    if mollify == "auto":
        mag = np.abs(recip)
        hi = float(np.max(mag))
        # growth heuristic: is the maximum attained near the frequency-box edge?
        interior = mag
        for ax in range(grid.ndim):
            m = grid.counts[ax]
            sl = [slice(None)] * grid.ndim
            sl[ax] = slice(m // 8, m - m // 8)
            interior = interior[tuple(sl)]
        apply_moll = hi > 2.0 * float(np.max(interior))
    else:
        apply_moll = mollify == "on"

    if apply_moll:
        moll = np.ones(grid.shape)
        for ax in range(grid.ndim):
            sd = grid.nyquist[ax] / 4.0
            moll = moll * np.exp(-grid.freq_coord(ax) ** 2 / (2.0 * sd * sd))
        recip = recip * moll

    kernel = transform(SampledField(grid, "frequency", recip), "inverse")
    inside = indicator(cone, grid).values.real > 0.5
    if side == "minus":
        inside = _reflected_mask(inside)
    mass = np.abs(kernel.values) ** 2
    total = float(np.sum(mass))
    leak = float(np.sum(mass[~inside]) / total) if total > 0 else 0.0
    return SupportReport(leak=leak, passed=bool(leak <= tol), mollified=apply_moll)


# ----------------------------------------------------------------------------
# factorized symbols, index decomposition, Q_N
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class FactorizedSymbol:
    """Wave-factorization input: A = plus * minus with index ae.

    The plus factor carries order ae, the minus factor alpha - ae.  The
    factorization is validated numerically (consistency + factor support),
    never assumed.
    """

    plus: SymbolSpec
    minus: SymbolSpec
    index_ae: tuple[float, ...]
    cone: ConeSpec
    total: Optional[SymbolSpec] = None

    @property
    def alpha(self) -> tuple[float, ...]:
        return tuple(p + m for p, m in zip(self.plus.order, self.minus.order))

    def total_spec(self) -> SymbolSpec:
        return self.total if self.total is not None else product([self.plus, self.minus])

    def consistency_error(self, grid: Grid) -> float:
        """Relative sup distance between plus*minus and the declared total."""
        prod_vals = eval_symbol(self.plus, grid).values * eval_symbol(self.minus, grid).values
        tot = eval_symbol(self.total_spec(), grid).values
        return float(np.max(np.abs(prod_vals - tot)) / np.max(np.abs(tot)))

    def validate(self, grid: Grid, tol: float = 1e-3,
                 consistency_tol: float = 1e-12) -> None:
        err = self.consistency_error(grid)
        if err > consistency_tol:
            raise SymbolError(f"factor product deviates from total symbol by {err:.3e}")
        for spec, side in ((self.plus, "plus"), (self.minus, "minus")):
            rep = validate_factor_support(eval_symbol(spec, grid), self.cone, side, tol=tol)
            if not rep.passed:
                raise SymbolError(
                    f"{side} factor fails the support check: leak {rep.leak:.3e} > {tol}"
                )


def eskin_factorization(gamma_plus, gamma_minus, cone: ConeSpec) -> FactorizedSymbol:
    """Catalogue half-space factorization with per-block exponents:
    A_plus = prod (xi_k + i(1+|xi'|))^{gamma_plus_j} and the mirror minus
    factor, so ae = gamma_plus and alpha = gamma_plus + gamma_minus."""
    gp = tuple(float(x) for x in np.atleast_1d(gamma_plus))
    gm = tuple(float(x) for x in np.atleast_1d(gamma_minus))
    if len(gp) != len(gm):
        raise SymbolError("plus and minus exponent vectors differ in length")
    return FactorizedSymbol(
        plus=eskin_factor(gp, sign=+1),
        minus=eskin_factor(gm, sign=-1),
        index_ae=gp,
        cone=cone,
    )


@dataclass(frozen=True)
class IndexDecomposition:
    """ae - S = N + delta with integer N >= 0 and |delta| < 1/2 per block."""

    N: tuple[int, ...]
    delta: tuple[float, ...]

    @property
    def theorem1_regime(self) -> bool:
        return all(n == 0 for n in self.N)


def decompose_index(S, ae, boundary_tol: float = 1e-9) -> IndexDecomposition:
    """The unique splitting ae_j - s_j = n_j + delta_j; errors name the block."""
    S = np.atleast_1d(np.asarray(S, dtype=float))
    ae = np.atleast_1d(np.asarray(ae, dtype=float))
    if S.shape != ae.shape:
        raise SymbolError("S and ae have different lengths")
    N: list[int] = []
    delta: list[float] = []
    for j, d in enumerate(ae - S):
        n = int(np.round(d))
        frac = d - n
        if abs(abs(frac) - 0.5) <= boundary_tol:
            raise SymbolError(
                f"component {j}: ae_j - s_j = {d} sits on the half-integer boundary"
            )
        if n < 0:
            raise SymbolError(
                f"component {j}: ae_j - s_j = {d} <= -1/2; no admissible decomposition"
            )
        N.append(n)
        delta.append(float(frac))
    return IndexDecomposition(N=tuple(N), delta=tuple(delta))


def build_qn(grid: Grid, N) -> SampledField:
    """Q_N(xi) = prod_j (xi_{k_j} + i(1+|xi'_{K_j}|))^{n_j}: nowhere zero, with
    |Q_N| equivalent to prod (1+|xi_{K_j}|)^{n_j} uniformly on every grid."""
    N = np.atleast_1d(np.asarray(N))
    if np.any(N != np.round(N)) or np.any(N < 0):
        raise SymbolError(f"N must be a nonnegative integer vector, got {N}")
    gamma = tuple(int(n) for n in N)
    if len(gamma) != grid.partition.nblocks:
        raise SymbolError("N must have one entry per block")
    return eval_symbol(eskin_factor(gamma, sign=+1), grid)
