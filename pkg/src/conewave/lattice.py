"""Block-partitioned uniform grids, the forward/inverse transform with the
e^{+i x.xi} kernel, anisotropic weights and Sobolev--Slobodetskii norms.

Conventions
-----------
Axes are zero-based.  Along axis ``i`` with half-extent ``l_i`` and (even)
point count ``m_i``:

* space nodes     x_j  = -l_i + j * h_i,          j = 0 .. m_i-1,  h_i = 2 l_i / m_i
* frequency nodes xi_k = (k - m_i/2) * pi / l_i,  k = 0 .. m_i-1

Both sides are stored in ascending coordinate order (row-major over axes).
The forward transform approximates  integral e^{+i x.xi} u(x) dx  by its
Riemann sum; the inverse carries the (2pi)^-M factor, so that
inverse(forward(u)) == u exactly at grid level.  The index map onto the
standard fast transform is

    forward  = h * (-1)^k * fftshift(m * ifft(u))    per axis,
    inverse  = fft(ifftshift((-1)^k * f)) / (2 l)    per axis,

which follows from x_j * xi_k = 2 pi j k / m - pi k.

Norms include a (2pi)^-M factor inside the integral so that the S = 0 norm
coincides with the discrete L2 norm (Plancherel is exact at grid level).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "BlockPartition",
    "Grid",
    "SampledField",
    "LatticeError",
    "make_grid",
    "transform",
    "weight",
    "norm_hs",
    "norm_l2",
    "norm_hs0_upper",
]


class LatticeError(ValueError):
    """Raised on malformed grids, partitions, or mismatched fields."""


@dataclass(frozen=True)
class BlockPartition:
    """Decomposition of the M coordinate axes into disjoint blocks K_1..K_n.

    Parameters
    ----------
    blocks:
        Ordered tuple of axis-index tuples.  The blocks must be pairwise
        disjoint and cover ``range(M)`` exactly.  Within a block the *last*
        axis plays the distinguished role (the ``x_{k_j}`` coordinate); the
        remaining axes are the primed coordinates ``x'_{K_j}``.
    """

    blocks: tuple[tuple[int, ...], ...]

    def __init__(self, blocks: Iterable[Iterable[int]]):
        object.__setattr__(
            self, "blocks", tuple(tuple(int(a) for a in b) for b in blocks)
        )
        self._validate()

    def _validate(self) -> None:
        if not self.blocks:
            raise LatticeError("partition needs at least one block")
        seen: list[int] = []
        for b in self.blocks:
            if not b:
                raise LatticeError("empty block in partition")
            seen.extend(b)
        if sorted(seen) != list(range(len(seen))):
            raise LatticeError(
                f"blocks must be disjoint and cover 0..M-1, got {self.blocks}"
            )

    @property
    def ndim(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def nblocks(self) -> int:
        return len(self.blocks)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    def last_axes(self) -> tuple[int, ...]:
        """Distinguished last axis of every block."""
        return tuple(b[-1] for b in self.blocks)

    def primed_axes(self) -> tuple[int, ...]:
        """All non-distinguished axes, in increasing order."""
        last = set(self.last_axes())
        return tuple(a for a in range(self.ndim) if a not in last)

    def check_vector(self, values, name: str = "vector") -> np.ndarray:
        """Validate a per-block real vector (smoothness, order, index...)."""
        v = np.asarray(values, dtype=float).reshape(-1)
        if v.size != self.nblocks:
            raise LatticeError(
                f"{name} has {v.size} entries, partition has {self.nblocks} blocks"
            )
        return v


@dataclass(frozen=True)
class Grid:
    """Uniform grid over the box prod_i [-l_i, l_i) with even point counts."""

    partition: BlockPartition
    extents: tuple[float, ...]
    counts: tuple[int, ...]

    @property
    def ndim(self) -> int:
        return len(self.counts)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.counts

    @property
    def spacings(self) -> tuple[float, ...]:
        return tuple(2.0 * l / m for l, m in zip(self.extents, self.counts))

    @property
    def freq_spacings(self) -> tuple[float, ...]:
        return tuple(np.pi / l for l in self.extents)

    @property
    def nyquist(self) -> tuple[float, ...]:
        return tuple(np.pi / h for h in self.spacings)

    def space_axis(self, axis: int) -> np.ndarray:
        l, m = self.extents[axis], self.counts[axis]
        return -l + (2.0 * l / m) * np.arange(m)

    def freq_axis(self, axis: int) -> np.ndarray:
        l, m = self.extents[axis], self.counts[axis]
        return (np.pi / l) * np.arange(-m // 2, m // 2)

    def _bcast(self, arr: np.ndarray, axis: int) -> np.ndarray:
        shape = [1] * self.ndim
        shape[axis] = self.counts[axis]
        return arr.reshape(shape)

    def space_coord(self, axis: int) -> np.ndarray:
        """Space coordinate of `axis`, broadcast against the full grid shape."""
        return self._bcast(self.space_axis(axis), axis)

    def freq_coord(self, axis: int) -> np.ndarray:
        return self._bcast(self.freq_axis(axis), axis)

    def block_freq_modulus(self, j: int) -> np.ndarray:
        """|xi_{K_j}| on the frequency grid (broadcastable shape)."""
        sq = 0.0
        for a in self.partition.blocks[j]:
            sq = sq + self.freq_coord(a) ** 2
        return np.sqrt(sq)

    def cell_volume(self) -> float:
        return float(np.prod(self.spacings))

    def freq_cell_volume(self) -> float:
        return float(np.prod(self.freq_spacings))


@dataclass
class SampledField:
    """Complex values on a grid, tagged space-side or frequency-side."""

    grid: Grid
    side: str  # "space" | "frequency"
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.side not in ("space", "frequency"):
            raise LatticeError(f"side must be 'space' or 'frequency', got {self.side!r}")
        self.values = np.ascontiguousarray(self.values, dtype=np.complex128)
        if self.values.shape != self.grid.shape:
            raise LatticeError(
                f"values shape {self.values.shape} does not match grid {self.grid.shape}"
            )

    def copy(self) -> "SampledField":
        return SampledField(self.grid, self.side, self.values.copy())

    def _like(self, values: np.ndarray) -> "SampledField":
        return SampledField(self.grid, self.side, values)

    def __add__(self, other: "SampledField") -> "SampledField":
        _check_same(self, other)
        return self._like(self.values + other.values)

    def __sub__(self, other: "SampledField") -> "SampledField":
        _check_same(self, other)
        return self._like(self.values - other.values)

    def __mul__(self, other) -> "SampledField":
        if isinstance(other, SampledField):
            _check_same(self, other)
            return self._like(self.values * other.values)
        return self._like(self.values * other)

    __rmul__ = __mul__


def _check_same(a: SampledField, b: SampledField) -> None:
    if a.grid != b.grid:
        raise LatticeError("fields live on different grids")
    if a.side != b.side:
        raise LatticeError(f"fields on different sides: {a.side} vs {b.side}")


def make_grid(partition: BlockPartition, extents: Sequence[float],
              counts: Sequence[int]) -> Grid:
    """Build a grid; extents are per-axis half box sizes, counts must be even."""
    ext = tuple(float(l) for l in extents)
    cnt = tuple(int(m) for m in counts)
    M = partition.ndim
    if len(ext) != M or len(cnt) != M:
        raise LatticeError(
            f"need {M} extents and counts (partition dimension), "
            f"got {len(ext)} and {len(cnt)}"
        )
    for i, l in enumerate(ext):
        if not (l > 0):
            raise LatticeError(f"extent of axis {i} must be positive, got {l}")
    for i, m in enumerate(cnt):
        if m < 2 or m % 2 != 0:
            raise LatticeError(f"count of axis {i} must be even and >= 2, got {m}")
    return Grid(partition, ext, cnt)


def _halfspectrum_signs(m: int) -> np.ndarray:
    # (-1)^k for k = -m/2 .. m/2-1, laid out in ascending-frequency order
    return (-1.0) ** np.arange(-m // 2, m // 2)


def transform(f: SampledField, direction: str = None) -> SampledField:
    """Forward (space->frequency, kernel e^{+i x.xi}) or inverse transform.

    When `direction` is omitted it is inferred from the field's side.
    """
    if direction is None:
        direction = "forward" if f.side == "space" else "inverse"
    if direction not in ("forward", "inverse"):
        raise LatticeError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    g = f.grid
    if direction == "forward":
        if f.side != "space":
            raise LatticeError("forward transform expects a space-side field")
        val = f.values
        for ax in range(g.ndim):
            m = g.counts[ax]
            h = g.spacings[ax]
            ph = g._bcast(h * _halfspectrum_signs(m), ax)
            val = np.fft.fftshift(m * np.fft.ifft(val, axis=ax), axes=ax) * ph
        return SampledField(g, "frequency", val)
    if f.side != "frequency":
        raise LatticeError("inverse transform expects a frequency-side field")
    val = f.values
    for ax in range(g.ndim):
        m = g.counts[ax]
        l = g.extents[ax]
        ph = g._bcast(_halfspectrum_signs(m), ax)
        val = np.fft.fft(np.fft.ifftshift(val * ph, axes=ax), axis=ax) / (2.0 * l)
    return SampledField(g, "space", val)


def _weight_array(grid: Grid, S) -> np.ndarray:
    """w_S(xi) = prod_j (1 + |xi_{K_j}|)^{s_j} as a real array."""
    s = grid.partition.check_vector(S, "smoothness vector")
    w = np.ones(grid.shape)
    for j, sj in enumerate(s):
        if sj != 0.0:
            w = w * (1.0 + grid.block_freq_modulus(j)) ** sj
    return w


def weight(grid: Grid, S) -> SampledField:
    """Frequency-side anisotropic weight field w_S; the norm uses w_S^2."""
    return SampledField(grid, "frequency", _weight_array(grid, S).astype(complex))


def norm_hs(f: SampledField, S) -> float:
    """Sobolev--Slobodetskii norm of smoothness S (Riemann sum, (2pi)^-M inside)."""
    ft = transform(f, "forward") if f.side == "space" else f
    g = f.grid
    w = _weight_array(g, S)
    dxi = g.freq_cell_volume() / (2.0 * np.pi) ** g.ndim
    return float(np.sqrt(np.sum(w * w * np.abs(ft.values) ** 2) * dxi))


def norm_l2(f: SampledField) -> float:
    """Discrete L2 norm; equals norm_hs(f, 0) for either side of the field."""
    if f.side == "space":
        return float(np.sqrt(np.sum(np.abs(f.values) ** 2) * f.grid.cell_volume()))
    return norm_hs(f, np.zeros(f.grid.partition.nblocks))


def norm_hs0_upper(v: SampledField, candidates: Sequence[SampledField], S,
                   inside: np.ndarray, rtol: float = 1e-12) -> float:
    """Upper bound for the inf-over-continuations norm of a cone-restricted field.

    `inside` is the boolean cone mask; every candidate must agree with `v`
    on the masked nodes.  Returns the minimum of norm_hs over the candidates,
    an upper bound for the true infimum over all continuations.
    """
    if v.side != "space":
        raise LatticeError("restricted fields are space-side")
    inside = np.asarray(inside, dtype=bool)
    if inside.shape != v.grid.shape:
        raise LatticeError("cone mask shape does not match the grid")
    if not candidates:
        raise LatticeError("need at least one continuation candidate")
    scale = float(np.max(np.abs(v.values[inside]), initial=0.0))
    best = np.inf
    for cand in candidates:
        _check_same(v, cand)
        if not np.allclose(cand.values[inside], v.values[inside],
                           rtol=rtol, atol=rtol * max(scale, 1.0)):
            raise LatticeError("candidate disagrees with the field on cone nodes")
        best = min(best, norm_hs(cand, S))
    return best
