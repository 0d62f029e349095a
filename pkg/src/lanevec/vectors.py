"""Owned, aligned dense vectors: the leaves and destinations of expressions."""

import numpy as np

from .lanes import CONTAINER_ALIGNMENT, as_dtype

__all__ = ["DenseVector"]


def _aligned_empty(n: int, dtype: np.dtype) -> np.ndarray:
    """Uninitialized length-n array whose base address is 64-byte aligned."""
    nbytes = n * dtype.itemsize
    raw = np.empty(nbytes + CONTAINER_ALIGNMENT, dtype=np.uint8)
    start = (-raw.ctypes.data) % CONTAINER_ALIGNMENT
    return raw[start : start + nbytes].view(dtype)


class DenseVector:
    """Fixed-length contiguous array of f32 or f64 scalars.

    The length never changes after construction and the storage stays
    aligned for every lane backend, so evaluation loops can use aligned
    block access unconditionally. Zero-length vectors are legal and every
    loop degenerates cleanly over them.
    """

    __slots__ = ("_data", "_dtype")

    def __init__(self, data: np.ndarray, dtype: np.dtype):
        self._data = data
        self._dtype = dtype

    @classmethod
    def zeros(cls, n: int, dtype="f32") -> "DenseVector":
        if n < 0:
            raise ValueError(f"length must be >= 0, got {n}")
        dt = as_dtype(dtype)
        buf = _aligned_empty(n, dt)
        buf.fill(0)
        return cls(buf, dt)

    @classmethod
    def from_values(cls, values, dtype="f32") -> "DenseVector":
        dt = as_dtype(dtype)
        src = np.asarray(values, dtype=dt).reshape(-1)
        buf = _aligned_empty(src.shape[0], dt)
        buf[:] = src
        return cls(buf, dt)

    @property
    def dtype(self) -> np.dtype:
        return self._dtype

    def __len__(self) -> int:
        return self._data.shape[0]

    def get(self, i: int):
        self._check_index(i)
        return self._data[i]

    def set(self, i: int, value) -> None:
        self._check_index(i)
        self._data[i] = self._dtype.type(value)

    def _check_index(self, i: int) -> None:
        if not 0 <= i < self._data.shape[0]:
            raise IndexError(f"index {i} out of range for length {len(self)}")

    def __getitem__(self, i: int):
        return self.get(i)

    def __setitem__(self, i: int, value) -> None:
        self.set(i, value)

    def to_values(self) -> list:
        """Elements as a list of dtype scalars (not Python floats)."""
        return list(self._data)

    def to_array(self) -> np.ndarray:
        """Copy of the contents as a plain numpy array."""
        return self._data.copy()

    @property
    def address(self) -> int:
        """Base address of the storage, for alignment checks."""
        return self._data.ctypes.data

    # Block access used by evaluation loops. Reads return views: callers
    # treat them as immutable register images and never write through them.
    def read_block(self, lo: int, hi: int) -> np.ndarray:
        return self._data[lo:hi]

    def write_block(self, lo: int, hi: int, values) -> None:
        self._data[lo:hi] = values

    def read_element(self, i: int):
        return self._data[i]

    def write_element(self, i: int, value) -> None:
        self._data[i] = value

    def assign(self, expression, **plan_kwargs) -> None:
        """Evaluate a lazy expression into this vector in one fused pass."""
        from .engine import execute_assign
        from .expressions import AssignNode, Leaf, as_node

        execute_assign(AssignNode(Leaf(self), as_node(expression)), **plan_kwargs)

    # Arithmetic builds lazy expression nodes; nothing is computed here.
    # The imports are local to keep the container importable on its own.

    def __add__(self, other):
        from .expressions import add_nodes

        return add_nodes(self, other)

    def __sub__(self, other):
        from .expressions import sub_nodes

        return sub_nodes(self, other)

    def __mul__(self, other):
        from .expressions import mul_nodes

        return mul_nodes(self, other)

    def __rmul__(self, other):
        from .expressions import scale_node

        return scale_node(other, self)

    def __neg__(self):
        from .expressions import negate_node

        return negate_node(self)

    # Opt out of numpy's ufunc dispatch so np scalars defer to __rmul__.
    __array_ufunc__ = None

    def __repr__(self):
        n = len(self)
        shown = ", ".join(repr(float(v)) for v in self._data[:6])
        tail = ", ..." if n > 6 else ""
        return f"DenseVector([{shown}{tail}], len={n}, dtype={self._dtype})"
