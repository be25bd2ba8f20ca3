import cachetools.func
from typing import Callable, Optional, Tuple
import abc

import numpy as np

from ..modarith import cubic_residue

# a * a and (a * a mod M) * a + a stay below 2**63 when max(M, n) * n does.
_INT64_SAFE_PRODUCT = 1 << 62


class Backend(abc.ABC):
    """
    Abstract base class for residue-table strategies.

    A backend answers one question: among the values a**3 + a, 1 <= a <= n,
    which is the first pair that collides modulo m**2? Concrete backends differ
    only in how they store and search the table.

    Do not use this class directly.

    """

    def __init__(self, **kwargs):
        """
        Create a new Backend instance.

        Returns:
            None

        """
        ...

    @staticmethod
    def _check_arguments(n: int, m: int):
        if n < 1:
            raise ValueError(f"n must be at least 1, got {n}.")
        if m < 1:
            raise ValueError(f"m must be at least 1, got {m}.")

    def residues(self, n: int, m: int, start: int = 1) -> np.ndarray:
        """
        Compute a**3 + a mod m**2 for a = start .. n.

        Arguments:
            n (int): The last value of a (inclusive)
            m (int): The modulus root; residues are taken mod m**2
            start (int: 1): The first value of a

        Returns:
            np.ndarray: The residues, in order of a

        """
        self._check_arguments(n, m)
        modulus = m * m
        if max(modulus, n) * n < _INT64_SAFE_PRODUCT:
            a = np.arange(start, n + 1, dtype=np.int64)
            return ((a * a % modulus) * a + a) % modulus
        return np.array(
            [cubic_residue(a, modulus) for a in range(start, n + 1)], dtype=object
        )

    @abc.abstractmethod
    def first_collision(self, n: int, m: int) -> Optional[Tuple[int, int]]:
        """
        Find the lexicographically first collision modulo m**2.

        Arguments:
            n (int): Consider 1 <= a <= n
            m (int): The modulus root

        Returns:
            tuple: (a, b) with the smallest b, then the smallest a; or None if
                the residues are pairwise distinct

        """
        ...

    def is_injective(self, n: int, m: int) -> bool:
        """
        Return True if a**3 + a (1 <= a <= n) are pairwise distinct mod m**2.

        """
        return self.first_collision(n, m) is None


class CachedBackend(Backend):
    """
    A proxy Backend that serves as a cache for any other discrim Backend.

    """

    def __init__(self, backend: Backend): ...

    def first_collision(self, n: int, m: int) -> Optional[Tuple[int, int]]:
        return self.backend.first_collision(n, m)


class InMemoryCachedBackend(CachedBackend):
    """
    A proxy Backend that serves as a cache for any other discrim Backend.

    Wraps each public call to the Backend with a cachetools cache. Residue
    tables are immutable functions of (n, m), so nothing ever dirties the cache.

    """

    _cache_types = {
        "LRUCache": cachetools.func.lru_cache,
        "TTLCache": cachetools.func.ttl_cache,
        "LFUCache": cachetools.func.lfu_cache,
    }

    # Array results are large and cheap to recompute relative to their size.
    _default_uncacheable_methods = ["residues"]

    def __init__(
        self,
        backend: Backend,
        cache_type: str = "LRUCache",
        uncacheable_methods: list = None,
        **cache_kwargs,
    ):
        """
        Initialize a new in-memory cache, using the cachetools library.

        Arguments:
            backend (discrim.Backend): The backend to cache
            cache_type (str: "LRUCache"): The cache type to use. One of
                ["LRUCache", "TTLCache", "LFUCache"]
            uncacheable_methods (list: None): Methods to pass through uncached
            **cache_kwargs: Additional arguments to pass to the cache
                (for example maxsize, ttl)

        """
        self.backend = backend
        self._uncacheable_methods = (
            uncacheable_methods or self._default_uncacheable_methods
        )
        if cache_type not in self._cache_types:
            raise ValueError(
                f"Unknown cache type: {cache_type}. "
                f"Valid types are: {list(self._cache_types.keys())}"
            )
        self._cache_factory = lambda: self._cache_types[cache_type](**cache_kwargs)

        self._method_lookup = {}

        method_list = [
            attribute
            for attribute in dir(self.backend)
            if callable(getattr(self.backend, attribute))
            and not attribute.startswith("_")
        ]
        for method in method_list:
            if method in self._uncacheable_methods:
                setattr(self, method, getattr(self.backend, method))
            else:
                wrapped = self._wrapped(method)
                self._method_lookup[method] = wrapped
                setattr(self, method, wrapped)

    def _wrapped(self, method: str) -> Callable:
        return self._cache_factory()(getattr(self.backend, method))

    def clear_cache(self):
        """
        Clear the cache.

        """
        for _, method in self._method_lookup.items():
            method.cache_clear()

    def cache_info(self):
        return {
            method_name: method.cache_info()
            for method_name, method in self._method_lookup.items()
        }
