"""Dense occupancy grid, random obstacle maps and the ``.scg`` file format."""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Tuple, Union

import numpy as np

Index = Tuple[int, int, int]
Point = Tuple[float, float, float]

SCG_MAGIC = b"SCG\x00"
SCG_VERSION = 1
# magic, version, nx, ny, nz, voxel_size, ox, oy, oz, run count
_HEADER = struct.Struct("<4sHIII4dQ")


class GridError(ValueError):
    """Invalid grid parameters or out-of-range voxel access."""


class GridFormatError(ValueError):
    """Malformed or incompatible ``.scg`` file."""


@dataclass
class VoxelGrid:
    """Boolean occupancy lattice; ``occupancy[i, j, k]`` is voxel ``(i, j, k)``.

    ``origin`` is the metric position of the min corner of voxel (0, 0, 0).
    """

    dims: Index
    voxel_size: float
    origin: Point = (0.0, 0.0, 0.0)
    occupancy: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        if len(self.dims) != 3 or min(self.dims) < 1:
            raise GridError(f"grid dims must be three positive integers, got {self.dims}")
        if not self.voxel_size > 0:
            raise GridError(f"voxel_size must be positive, got {self.voxel_size}")
        self.voxel_size = float(self.voxel_size)
        self.origin = tuple(float(o) for o in self.origin)
        if self.occupancy is None:
            self.occupancy = np.zeros(self.dims, dtype=bool)
        else:
            self.occupancy = np.asarray(self.occupancy, dtype=bool)
            if self.occupancy.shape != self.dims:
                raise GridError("occupancy shape does not match dims")

    def in_bounds(self, idx) -> bool:
        return all(0 <= int(i) < n for i, n in zip(idx, self.dims))

    def _check(self, idx) -> Index:
        if len(idx) != 3 or not self.in_bounds(idx):
            raise GridError(f"voxel index {tuple(idx)} outside grid {self.dims}")
        return tuple(int(i) for i in idx)

    def is_occupied(self, idx) -> bool:
        return bool(self.occupancy[self._check(idx)])

    def set_occupied(self, idx, value: bool = True) -> None:
        self.occupancy[self._check(idx)] = bool(value)

    def point_to_index(self, p) -> Index:
        """Voxel containing metric point ``p`` (may be out of range)."""
        return tuple(
            int(math.floor((float(x) - o) / self.voxel_size)) for x, o in zip(p, self.origin)
        )

    def index_to_center(self, idx) -> Point:
        return tuple(o + (int(i) + 0.5) * self.voxel_size for i, o in zip(idx, self.origin))

    def cell_box(self, idx):
        lo = np.array(self.origin) + np.asarray(idx, dtype=float) * self.voxel_size
        return lo, lo + self.voxel_size

    @property
    def n_occupied(self) -> int:
        return int(self.occupancy.sum())

    def __eq__(self, other) -> bool:
        if not isinstance(other, VoxelGrid):
            return NotImplemented
        return (
            self.dims == other.dims
            and self.voxel_size == other.voxel_size
            and self.origin == other.origin
            and np.array_equal(self.occupancy, other.occupancy)
        )


@dataclass(frozen=True)
class MapGenParams:
    extent_m: Point = (50.0, 12.0, 12.0)
    voxel_size: float = 0.3
    n_obstacles: int = 400
    obstacle_side_range_m: Tuple[float, float] = (0.9, 1.5)
    fill_probability: float = 0.5
    rng_seed: int = 0
    origin: Point = (0.0, 0.0, 0.0)

    def validate(self) -> None:
        lo, hi = self.obstacle_side_range_m
        if lo > hi or lo <= 0:
            raise GridError(f"bad obstacle side range {self.obstacle_side_range_m}")
        if not 0.0 <= self.fill_probability <= 1.0:
            raise GridError(f"fill_probability {self.fill_probability} not in [0, 1]")
        if self.n_obstacles < 0:
            raise GridError("n_obstacles must be >= 0")

    def side_range_voxels(self) -> Tuple[int, int]:
        lo, hi = self.obstacle_side_range_m
        return max(1, round(lo / self.voxel_size)), max(1, round(hi / self.voxel_size))


def create_grid(extent_m, voxel_size: float, origin=(0.0, 0.0, 0.0)) -> VoxelGrid:
    if not voxel_size > 0:
        raise GridError(f"voxel_size must be positive, got {voxel_size}")
    if len(extent_m) != 3 or min(extent_m) <= 0:
        raise GridError(f"extent must be three positive lengths, got {extent_m}")
    # ceil, but tolerate float noise such as 0.9 / 0.3 = 3.0000000000000004
    dims = tuple(max(1, math.ceil(e / voxel_size - 1e-9)) for e in extent_m)
    return VoxelGrid(dims, voxel_size, origin)


def generate_random_map(params: MapGenParams) -> VoxelGrid:
    """Scatter obstacle cubes with randomly filled voxels.

    Uses numpy's PCG64 generator seeded with ``params.rng_seed``. Each cube side
    is drawn uniformly from the integer voxel range, its min corner uniformly so
    that the cube lies fully inside the grid, and each of its voxels is occupied
    with ``fill_probability``.
    """
    params.validate()
    grid = create_grid(params.extent_m, params.voxel_size, params.origin)
    smin, smax = params.side_range_voxels()
    if smax > min(grid.dims):
        raise GridError(f"obstacle cube side {smax} exceeds grid dims {grid.dims}")
    rng = np.random.default_rng(params.rng_seed)
    occ = grid.occupancy
    for _ in range(params.n_obstacles):
        side = int(rng.integers(smin, smax + 1))
        corner = [int(rng.integers(0, n - side + 1)) for n in grid.dims]
        fill = rng.random((side, side, side)) < params.fill_probability
        x, y, z = corner
        occ[x:x + side, y:y + side, z:z + side] |= fill
    return grid


def obstacle_cubes(params: MapGenParams):
    """Replay the generator and return the (corner, side) of every cube."""
    params.validate()
    grid = create_grid(params.extent_m, params.voxel_size, params.origin)
    smin, smax = params.side_range_voxels()
    rng = np.random.default_rng(params.rng_seed)
    cubes = []
    for _ in range(params.n_obstacles):
        side = int(rng.integers(smin, smax + 1))
        corner = tuple(int(rng.integers(0, n - side + 1)) for n in grid.dims)
        rng.random((side, side, side))
        cubes.append((corner, side))
    return cubes


def rle_encode(bits: np.ndarray) -> np.ndarray:
    """Run lengths of a flat boolean array; the first run counts zeros (may be 0)."""
    bits = np.asarray(bits, dtype=bool).ravel()
    if bits.size == 0:
        return np.zeros(0, dtype=np.uint32)
    change = np.flatnonzero(bits[1:] != bits[:-1]) + 1
    bounds = np.concatenate(([0], change, [bits.size]))
    runs = np.diff(bounds)
    if bits[0]:
        runs = np.concatenate(([0], runs))
    return runs.astype(np.uint32)


def rle_decode(runs: np.ndarray, size: int) -> np.ndarray:
    runs = np.asarray(runs, dtype=np.int64)
    if runs.sum() != size:
        raise GridFormatError(f"run lengths sum to {runs.sum()}, expected {size}")
    values = np.arange(runs.size) % 2 == 1
    return np.repeat(values, runs)


def dumps_grid(grid: VoxelGrid) -> bytes:
    runs = rle_encode(grid.occupancy.ravel(order="F"))
    header = _HEADER.pack(SCG_MAGIC, SCG_VERSION, *grid.dims, grid.voxel_size, *grid.origin, runs.size)
    return header + runs.astype("<u4").tobytes()


def loads_grid(data: bytes) -> VoxelGrid:
    if len(data) < _HEADER.size:
        raise GridFormatError("file too short for header")
    magic, version, nx, ny, nz, vs, ox, oy, oz, nruns = _HEADER.unpack_from(data)
    if magic != SCG_MAGIC:
        raise GridFormatError(f"bad magic {magic!r}")
    if version != SCG_VERSION:
        raise GridFormatError(f"unsupported .scg version {version}")
    body = data[_HEADER.size:]
    if len(body) != 4 * nruns:
        raise GridFormatError(f"expected {nruns} runs, found {len(body) / 4:g}")
    runs = np.frombuffer(body, dtype="<u4")
    try:
        dims = (nx, ny, nz)
        flat = rle_decode(runs, nx * ny * nz)
        return VoxelGrid(dims, vs, (ox, oy, oz), flat.reshape(dims, order="F"))
    except GridError as exc:
        raise GridFormatError(str(exc)) from exc


def save_grid(grid: VoxelGrid, destination: Union[str, Path]) -> None:
    Path(destination).write_bytes(dumps_grid(grid))


def load_grid(source: Union[str, Path]) -> VoxelGrid:
    return loads_grid(Path(source).read_bytes())
