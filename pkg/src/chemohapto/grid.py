"""Node-centered tensor grids with zero-flux boundaries, and the discrete
operators built on them.

The domain is a box (0, L_1) x ... x (0, L_N), N in {1, 2, 3}, sampled at the
nodes x_i = i * h_a along each axis (cells_a + 1 nodes per axis).  Zero-flux
(homogeneous Neumann) boundaries are realized by mirror ghost values,
f_{-1} = f_1, which is algebraically the same thing as a finite-volume scheme
on the dual cells: every node owns a box of volume prod_a w_a(i) with
trapezoid weights w_a = h_a/2 at the two boundary nodes and h_a inside.

Both the Laplacian and the upwind advective divergence below are written in
flux form, so the weighted node sum of either one telescopes to zero exactly
(up to roundoff): what leaves one dual cell enters its neighbour, and the
boundary faces carry no flux.  That discrete conservation is load-bearing for
the time integrator, which tracks cell mass over very many steps.

Fields are immutable-by-convention wrappers around C-ordered float64 arrays;
construction rejects non-finite entries, and operators re-check their output
when ``DEBUG_CHECKS`` is switched on (off by default, it costs a pass over
the array).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid",
    "ScalarField",
    "laplacian",
    "laplacian_data",
    "gradient_sup_norm",
    "gradient_sq",
    "advective_divergence",
    "integrate",
    "integrate_power",
    "sup_norm",
    "write_field",
    "read_field",
]

# Re-validate operator outputs (NaN/Inf) when True.  Costs one pass per call.
DEBUG_CHECKS = False


def _axslice(ndim: int, axis: int, sl: slice) -> tuple:
    """Index tuple selecting ``sl`` along ``axis`` and everything else."""
    idx = [slice(None)] * ndim
    idx[axis] = sl
    return tuple(idx)


@dataclass(frozen=True)
class Grid:
    """Rectangular node-centered grid.

    Parameters
    ----------
    cells : tuple of int
        Number of cells per axis (at least 2 each); there are cells + 1
        nodes per axis.
    extent : tuple of float
        Box side lengths.  Stored extents are renormalized to
        spacing * cells so the product identity holds exactly in floating
        point.
    """

    cells: tuple[int, ...]
    extent: tuple[float, ...]

    def __post_init__(self):
        cells = tuple(int(c) for c in self.cells)
        extent = tuple(float(L) for L in self.extent)
        if not 1 <= len(cells) <= 3:
            raise ValueError(f"dimension must be 1, 2 or 3, got {len(cells)}")
        if len(extent) != len(cells):
            raise ValueError("cells and extent must have the same length")
        if any(c < 2 for c in cells):
            raise ValueError(f"need at least 2 cells per axis, got {cells}")
        if any(not np.isfinite(L) or L <= 0 for L in extent):
            raise ValueError(f"extents must be positive and finite, got {extent}")
        # pin extent = spacing * cells exactly
        extent = tuple((L / c) * c for L, c in zip(extent, cells))
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "extent", extent)

    @property
    def dim(self) -> int:
        return len(self.cells)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / c for L, c in zip(self.extent, self.cells))

    @property
    def node_shape(self) -> tuple[int, ...]:
        return tuple(c + 1 for c in self.cells)

    @property
    def num_nodes(self) -> int:
        return int(np.prod(self.node_shape))

    def axis_coordinates(self, axis: int) -> np.ndarray:
        """Node coordinates i * h along one axis."""
        return np.arange(self.cells[axis] + 1) * self.spacing[axis]

    def meshgrid(self) -> tuple[np.ndarray, ...]:
        """Node coordinate arrays, one per axis, each of shape node_shape."""
        axes = [self.axis_coordinates(a) for a in range(self.dim)]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def node_volumes(self) -> np.ndarray:
        """Dual-cell volumes: tensor product of trapezoid weights."""
        vols = np.ones((1,) * self.dim)
        for a in range(self.dim):
            w = np.full(self.cells[a] + 1, self.spacing[a])
            w[0] *= 0.5
            w[-1] *= 0.5
            shape = [1] * self.dim
            shape[a] = w.size
            vols = vols * w.reshape(shape)
        return vols

    def volume(self) -> float:
        return float(np.prod(self.extent))


class ScalarField:
    """A float64 nodal field on a :class:`Grid`.

    The data array is owned by the field; callers that want to mutate it
    should go through ``with_data`` to get a fresh field.  Construction
    rejects NaN/Inf.
    """

    __slots__ = ("grid", "data")

    def __init__(self, grid: Grid, data: np.ndarray, *, _checked: bool = False):
        data = np.ascontiguousarray(data, dtype=np.float64)
        if data.shape != grid.node_shape:
            raise ValueError(
                f"field shape {data.shape} does not match grid nodes {grid.node_shape}"
            )
        if not _checked and not np.all(np.isfinite(data)):
            raise ValueError("field contains NaN or Inf")
        self.grid = grid
        self.data = data

    # --- constructors -------------------------------------------------

    @classmethod
    def full(cls, grid: Grid, value: float) -> "ScalarField":
        v = float(value)
        if not np.isfinite(v):
            raise ValueError("fill value must be finite")
        return cls(grid, np.full(grid.node_shape, v), _checked=True)

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls(grid, np.zeros(grid.node_shape), _checked=True)

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "ScalarField":
        """Sample ``fn(*coords)`` at the nodes."""
        return cls(grid, np.asarray(fn(*grid.meshgrid()), dtype=np.float64))

    @classmethod
    def from_values(cls, grid: Grid, values) -> "ScalarField":
        """Build from a flat array in C (lexicographic) node order."""
        arr = np.asarray(values, dtype=np.float64).reshape(grid.node_shape)
        return cls(grid, arr)

    def with_data(self, data: np.ndarray) -> "ScalarField":
        return ScalarField(self.grid, data, _checked=not DEBUG_CHECKS)

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.data.copy(), _checked=True)

    # --- tiny conveniences ---------------------------------------------

    @property
    def values(self) -> np.ndarray:
        """Flat view in C node order."""
        return self.data.reshape(-1)

    def min(self) -> float:
        return float(self.data.min())

    def max(self) -> float:
        return float(self.data.max())

    def __repr__(self):
        return (
            f"ScalarField(cells={self.grid.cells}, extent={self.grid.extent}, "
            f"min={self.min():.6g}, max={self.max():.6g})"
        )


def _check_same_grid(*fields: ScalarField) -> Grid:
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid != g:
            raise ValueError("fields live on different grids")
    return g


def _maybe_check(out: np.ndarray) -> None:
    if DEBUG_CHECKS and not np.all(np.isfinite(out)):
        raise FloatingPointError("operator produced NaN or Inf")


# --- differential operators ---------------------------------------------


def laplacian_data(grid: Grid, data: np.ndarray) -> np.ndarray:
    """Array-level core of :func:`laplacian` (used by the implicit solvers)."""
    nd = grid.dim
    out = np.zeros(grid.node_shape)
    for a in range(nd):
        h = grid.spacing[a]
        d = np.diff(data, axis=a) / h
        inner = _axslice(nd, a, slice(1, -1))
        first = _axslice(nd, a, slice(0, 1))
        last = _axslice(nd, a, slice(-1, None))
        out[inner] += (d[_axslice(nd, a, slice(1, None))] - d[_axslice(nd, a, slice(0, -1))]) / h
        out[first] += d[first] / (0.5 * h)
        out[last] += -d[last] / (0.5 * h)
    return out


def laplacian(f: ScalarField) -> ScalarField:
    """Mirror-ghost 5/7-point Laplacian in dual-cell flux form.

    Along each axis the face gradient d_i = (f_{i+1} - f_i)/h is formed on
    the interior faces; boundary faces carry zero flux.  Each node then
    receives (d_right - d_left) / w where w is its trapezoid weight (h/2 at
    the ends, h inside), which at the boundary reduces to the familiar
    mirror-ghost stencil 2 (f_1 - f_0) / h^2.

    Exactly conservative: sum_i V_i (lap f)_i telescopes to zero.
    Second-order accurate on smooth compatible fields, including at the
    boundary nodes.
    """
    out = laplacian_data(f.grid, f.data)
    _maybe_check(out)
    return ScalarField(f.grid, out, _checked=not DEBUG_CHECKS)


def _axis_gradients(f: ScalarField, axis: int) -> np.ndarray:
    """Nodal gradient along one axis: centered inside, one-sided at the ends."""
    g = f.grid
    nd = g.dim
    h = g.spacing[axis]
    out = np.empty(g.node_shape)
    inner = _axslice(nd, axis, slice(1, -1))
    lo = _axslice(nd, axis, slice(0, -2))
    hi = _axslice(nd, axis, slice(2, None))
    out[inner] = (f.data[hi] - f.data[lo]) / (2.0 * h)
    first = _axslice(nd, axis, slice(0, 1))
    second = _axslice(nd, axis, slice(1, 2))
    out[first] = (f.data[second] - f.data[first]) / h
    last = _axslice(nd, axis, slice(-1, None))
    penult = _axslice(nd, axis, slice(-2, -1))
    out[last] = (f.data[last] - f.data[penult]) / h
    return out


def gradient_sq(f: ScalarField) -> ScalarField:
    """Nodal |grad f|^2 (centered differences, one-sided at the boundary)."""
    g = f.grid
    acc = np.zeros(g.node_shape)
    for a in range(g.dim):
        d = _axis_gradients(f, a)
        acc += d * d
    _maybe_check(acc)
    return ScalarField(g, acc, _checked=not DEBUG_CHECKS)


def gradient_sup_norm(f: ScalarField) -> float:
    """max over nodes of |grad f| (Euclidean norm over axes)."""
    return float(np.sqrt(gradient_sq(f).data.max()))


def advective_divergence(
    density: ScalarField,
    potential: ScalarField,
    coeff: float,
    central: bool = False,
) -> ScalarField:
    """First-order upwind div(density * coeff * grad potential).

    Face velocities c = coeff * (phi_{i+1} - phi_i)/h drive the flux; the
    transported density is taken from the side the flux comes from
    (density_i when c > 0, density_{i+1} otherwise).  Boundary faces carry
    zero flux, matching the zero-flux boundary condition of the transport
    term.  Same dual-cell divergence as :func:`laplacian`, hence exactly
    conservative and, for c * dt small enough against the cell size,
    positivity-preserving when combined with an explicit Euler update.

    With central=True the face density is the arithmetic mean of its two
    neighbours instead: second-order accurate but with no positivity
    guarantee, intended for convergence studies only.

    Raises
    ------
    ValueError
        If the density carries negative entries below -1e-13 (upwinding a
        signed density silently breaks the positivity argument).
    """
    g = _check_same_grid(density, potential)
    if density.data.min() < -1e-13:
        raise ValueError(
            f"density must be nonnegative (min {density.data.min():.3e} < -1e-13)"
        )
    coeff = float(coeff)
    nd = g.dim
    out = np.zeros(g.node_shape)
    if coeff == 0.0:
        return ScalarField(g, out, _checked=True)
    for a in range(nd):
        h = g.spacing[a]
        c = coeff * np.diff(potential.data, axis=a) / h
        left = _axslice(nd, a, slice(0, -1))
        right = _axslice(nd, a, slice(1, None))
        if central:
            rho_face = 0.5 * (density.data[left] + density.data[right])
        else:
            rho_face = np.where(c > 0.0, density.data[left], density.data[right])
        flux = c * rho_face
        inner = _axslice(nd, a, slice(1, -1))
        first = _axslice(nd, a, slice(0, 1))
        last = _axslice(nd, a, slice(-1, None))
        out[inner] += (flux[_axslice(nd, a, slice(1, None))] - flux[_axslice(nd, a, slice(0, -1))]) / h
        out[first] += flux[first] / (0.5 * h)
        out[last] += -flux[last] / (0.5 * h)
    _maybe_check(out)
    return ScalarField(g, out, _checked=not DEBUG_CHECKS)


# --- integrals and norms --------------------------------------------------


def integrate(f: ScalarField) -> float:
    """Dual-cell (tensor trapezoid) integral of f over the box."""
    return float(np.sum(f.grid.node_volumes() * f.data))


def integrate_power(f: ScalarField, p: float) -> float:
    """Dual-cell integral of f^p for p >= 1.

    Fractional p requires a nonnegative field; integer p is evaluated
    directly and tolerates signed data (p = 2 on a Laplacian image, say).
    """
    p = float(p)
    if not p >= 1.0:
        raise ValueError(f"exponent must be >= 1, got {p}")
    if p == 1.0:
        return integrate(f)
    if p != np.floor(p) and f.data.min() < 0.0:
        raise ValueError(
            f"fractional exponent {p} needs a nonnegative field "
            f"(min {f.data.min():.3e})"
        )
    if p == np.floor(p):
        powed = f.data ** int(p)
    else:
        powed = f.data ** p
    return float(np.sum(f.grid.node_volumes() * powed))


def sup_norm(f: ScalarField) -> float:
    return float(np.abs(f.data).max())


# --- snapshot I/O ---------------------------------------------------------
#
# A field snapshot is a data file plus a sidecar text header `<path>.meta`
# holding dim / cells / extent.  Two data encodings:
#   binary : flat little-endian float64, C (lexicographic) node order;
#            round-trips bit-exactly.
#   csv    : one repr(value) per line, same order; also round-trips exactly
#            because repr of a Python float is shortest-round-trip.


def _meta_path(path) -> str:
    return str(path) + ".meta"


def write_field(f: ScalarField, path, fmt: str = "binary") -> None:
    if fmt not in ("binary", "csv"):
        raise ValueError(f"unknown snapshot format {fmt!r}")
    g = f.grid
    with open(_meta_path(path), "w") as meta:
        meta.write(f"dim = {g.dim}\n")
        meta.write("cells = " + " ".join(str(c) for c in g.cells) + "\n")
        meta.write("extent = " + " ".join(repr(L) for L in g.extent) + "\n")
        meta.write(f"format = {fmt}\n")
    if fmt == "binary":
        f.data.astype("<f8").tofile(path)
    else:
        with open(path, "w") as fh:
            for v in f.values:
                fh.write(repr(float(v)) + "\n")


def read_field(path) -> ScalarField:
    meta = {}
    with open(_meta_path(path)) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            key, _, val = line.partition("=")
            meta[key.strip()] = val.strip()
    try:
        dim = int(meta["dim"])
        cells = tuple(int(t) for t in meta["cells"].split())
        extent = tuple(float(t) for t in meta["extent"].split())
        fmt = meta.get("format", "binary")
    except (KeyError, ValueError) as exc:
        raise ValueError(f"bad snapshot header {_meta_path(path)}: {exc}") from exc
    if len(cells) != dim or len(extent) != dim:
        raise ValueError(f"inconsistent snapshot header {_meta_path(path)}")
    grid = Grid(cells, extent)
    if fmt == "binary":
        values = np.fromfile(path, dtype="<f8")
    else:
        with open(path) as fh:
            values = np.array([float(line) for line in fh if line.strip()])
    if values.size != grid.num_nodes:
        raise ValueError(
            f"snapshot {path} holds {values.size} values, grid wants {grid.num_nodes}"
        )
    return ScalarField.from_values(grid, values)
