"""Axis-aligned boxes, their cube partitions, and voxel-sampled fields."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class DomainBox:
    """Axis-aligned box ``[lo, hi]`` partitioned into cubes of side ``cube_side``.

    The box sides must be integer multiples of ``cube_side`` (to 1e-9 relative).
    """

    lo: tuple[float, float, float]
    hi: tuple[float, float, float]
    cube_side: float | None = None

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != 3 or len(hi) != 3:
            raise ValueError("box corners must be 3-vectors")
        if not all(l < h for l, h in zip(lo, hi)):
            raise ValueError(f"box needs lo < hi componentwise, got {lo} / {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if self.cube_side is not None:
            b = float(self.cube_side)
            if not b > 0 or b > min(self.sides) * (1 + 1e-12):
                raise ValueError(f"cube_side must lie in (0, {min(self.sides)}], got {b}")
            n = np.array(self.sides) / b
            if np.any(np.abs(n - np.round(n)) > 1e-9 * np.maximum(n, 1.0)):
                raise ValueError(f"box sides {self.sides} are not multiples of cube_side {b}")
            object.__setattr__(self, "cube_side", b)

    @classmethod
    def unit(cls, cube_side: float | None = None) -> "DomainBox":
        return cls((0.0, 0.0, 0.0), (1.0, 1.0, 1.0), cube_side)

    @property
    def sides(self) -> tuple[float, float, float]:
        return tuple(h - l for l, h in zip(self.lo, self.hi))

    @property
    def volume(self) -> float:
        return float(np.prod(self.sides))

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (np.array(self.lo) + np.array(self.hi))

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.sides))

    def cube_shape(self) -> tuple[int, int, int]:
        if self.cube_side is None:
            raise ValueError("box has no cube partition")
        return tuple(int(round(s / self.cube_side)) for s in self.sides)

    def cubes(self) -> list["DomainBox"]:
        """The partition cells, in C order over (ix, iy, iz)."""
        b = self.cube_side
        nx, ny, nz = self.cube_shape()
        cells = []
        for i in range(nx):
            for j in range(ny):
                for k in range(nz):
                    lo = (self.lo[0] + i * b, self.lo[1] + j * b, self.lo[2] + k * b)
                    cells.append(DomainBox(lo, (lo[0] + b, lo[1] + b, lo[2] + b)))
        return cells

    def contains(self, points: np.ndarray, margin: float = 0.0) -> np.ndarray:
        """Boolean mask of points inside the box shrunk by ``margin``.

        Lower faces are closed and upper faces open, so adjacent cells never
        both claim a point on a shared face.
        """
        p = np.atleast_2d(points)
        lo = np.array(self.lo) + margin
        hi = np.array(self.hi) - margin
        return np.all((p >= lo) & (p < hi), axis=1)

    def to_dict(self) -> dict:
        return {"lo": list(self.lo), "hi": list(self.hi), "cube_side": self.cube_side}

    @classmethod
    def from_dict(cls, d: dict) -> "DomainBox":
        return cls(tuple(d["lo"]), tuple(d["hi"]), d.get("cube_side"))


@dataclass(frozen=True, eq=False)
class GridField:
    """Complex (or real) values at the voxel centers of a regular grid on ``box``.

    ``values`` has shape ``resolution`` and is indexed ``[ix, iy, iz]``;
    flattening in C order gives the row-major voxel ordering used on disk.
    """

    box: DomainBox
    resolution: tuple[int, int, int]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        res = tuple(int(n) for n in self.resolution)
        if len(res) != 3 or min(res) < 2:
            raise ValueError(f"resolution must be >= 2 per axis, got {res}")
        vals = np.asarray(self.values)
        if vals.shape != res:
            vals = vals.reshape(res)
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid values must be finite")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "resolution", res)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, box: DomainBox, resolution, value) -> "GridField":
        res = _as_res(resolution)
        return cls(box, res, np.full(res, value))

    @classmethod
    def from_function(cls, box: DomainBox, resolution, func) -> "GridField":
        res = _as_res(resolution)
        pts = voxel_centers(box, res)
        return cls(box, res, np.asarray(func(pts)).reshape(res))

    @property
    def spacing(self) -> np.ndarray:
        return np.array(self.box.sides) / np.array(self.resolution)

    @property
    def voxel_volume(self) -> float:
        return float(np.prod(self.spacing))

    def centers(self) -> np.ndarray:
        return voxel_centers(self.box, self.resolution)

    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def with_values(self, values) -> "GridField":
        return GridField(self.box, self.resolution, values)

    def conformal(self, other: "GridField") -> bool:
        return (
            self.resolution == other.resolution
            and np.allclose(self.box.lo, other.box.lo)
            and np.allclose(self.box.hi, other.box.hi)
        )

    def sample(self, points: np.ndarray) -> np.ndarray:
        """Nearest-voxel lookup; points outside the box get 0."""
        p = np.atleast_2d(points)
        idx = np.floor((p - np.array(self.box.lo)) / self.spacing).astype(int)
        res = np.array(self.resolution)
        # points on the upper face belong to the last voxel
        on_hi = np.isclose(p, np.array(self.box.hi), rtol=0, atol=1e-12)
        idx = np.where(on_hi, res - 1, idx)
        inside = np.all((idx >= 0) & (idx < res), axis=1)
        out = np.zeros(len(p), dtype=self.values.dtype)
        i = idx[inside]
        out[inside] = self.values[i[:, 0], i[:, 1], i[:, 2]]
        return out


def _as_res(resolution) -> tuple[int, int, int]:
    if np.isscalar(resolution):
        return (int(resolution),) * 3
    return tuple(int(n) for n in resolution)


def voxel_centers(box: DomainBox, resolution) -> np.ndarray:
    """Voxel centers as an (n, 3) array in C order."""
    res = _as_res(resolution)
    axes = [
        lo + (np.arange(n) + 0.5) * (hi - lo) / n
        for lo, hi, n in zip(box.lo, box.hi, res)
    ]
    X, Y, Z = np.meshgrid(*axes, indexing="ij")
    return np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)
