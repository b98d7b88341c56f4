"""Table factors over ascending-id scopes, backed by numpy arrays."""

from typing import Mapping, Sequence, Tuple

import numpy as np

from ..core.network import Network
from ..core.numeric import Backend, ProbValue, backend_of_array, check_same_backend


class Factor:
    """Function table over ``scope`` (ascending variable ids).

    ``values`` has one axis per scope variable, states ascending, so the
    flattened array is row-major over the scope. Works unchanged for
    float64 and object (Fraction) arrays.
    """

    __slots__ = ("scope", "values")

    def __init__(self, scope: Sequence[int], values: np.ndarray):
        self.scope: Tuple[int, ...] = tuple(scope)
        self.values = values
        if values.ndim != len(self.scope):
            raise ValueError(f"factor over {self.scope} needs {len(self.scope)} axes, got {values.ndim}")

    @classmethod
    def scalar(cls, value: ProbValue, backend: Backend) -> "Factor":
        arr = np.empty((), dtype=backend.dtype)
        arr[()] = value
        return cls((), arr)

    @classmethod
    def from_cpt(cls, net: Network, i: int, fixed: Mapping[int, int]) -> "Factor":
        """CPT of variable i as a factor, with the variables in ``fixed`` instantiated."""
        axes = list(net.parents[i]) + [i]
        tensor = net.cpt_tensor(i)
        perm = sorted(range(len(axes)), key=lambda k: axes[k])
        factor = cls([axes[k] for k in perm], np.transpose(tensor, perm))
        return factor.slice(fixed)

    @property
    def dim(self) -> int:
        return int(self.values.size)

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def item(self) -> ProbValue:
        """The single entry of a scalar factor."""
        if self.values.size != 1:
            raise ValueError(f"factor over {self.scope} is not a scalar")
        return self.values.reshape(-1)[0]

    def slice(self, fixed: Mapping[int, int]) -> "Factor":
        """Instantiate the scope variables present in ``fixed``; their axes disappear."""
        if not any(v in fixed for v in self.scope):
            return self
        index = tuple(fixed[v] if v in fixed else slice(None) for v in self.scope)
        kept = [v for v in self.scope if v not in fixed]
        return Factor(kept, np.asarray(self.values[index], dtype=self.values.dtype))

    def expand(self, scope: Sequence[int], cardinalities: Sequence[int]) -> "Factor":
        """Broadcast onto a superset scope (new variables leave values unchanged)."""
        scope = tuple(scope)
        if scope == self.scope:
            return self
        shape = tuple(cardinalities[v] for v in scope)
        aligned = self.values.reshape(
            tuple(self.values.shape[self.scope.index(v)] if v in self.scope else 1 for v in scope)
        )
        return Factor(scope, np.array(np.broadcast_to(aligned, shape), dtype=self.values.dtype))

    def sum_out(self, variables) -> "Factor":
        drop = [k for k, v in enumerate(self.scope) if v in variables]
        if not drop:
            return self
        kept = [v for v in self.scope if v not in variables]
        summed = self.values.sum(axis=tuple(drop))
        return Factor(kept, np.asarray(summed, dtype=self.values.dtype))

    def __repr__(self) -> str:
        return f"Factor(scope={self.scope}, dim={self.dim})"


def multiply(factors: Sequence[Factor], backend: Backend) -> Factor:
    """Product of factors over the union of their scopes.

    Each factor is reshaped onto the sorted union scope with size-1 axes
    and the product is taken by broadcasting, in the given order.
    """
    if not factors:
        return Factor.scalar(backend.one, backend)
    check_same_backend(backend, *(backend_of_array(f.values) for f in factors))
    if len(factors) == 1:
        return factors[0]
    union = sorted(set().union(*(f.scope for f in factors)))
    sizes = {}
    for f in factors:
        for v, n in zip(f.scope, f.values.shape):
            sizes[v] = n
    result = None
    for f in factors:
        shape = tuple(sizes[v] if v in f.scope else 1 for v in union)
        aligned = f.values.reshape(shape)
        result = aligned if result is None else result * aligned
    full_shape = tuple(sizes[v] for v in union)
    values = np.array(np.broadcast_to(result, full_shape), dtype=backend.dtype)
    return Factor(union, values)
