from .backend import Backend, CachedBackend, InMemoryCachedBackend
from ._dict import DictResidueBackend
from ._numpy import NumpyResidueBackend
from ._dataframe import DataFrameResidueBackend

BACKENDS = {
    "dict": DictResidueBackend,
    "numpy": NumpyResidueBackend,
    "dataframe": DataFrameResidueBackend,
}


def get_backend(name: str, cached: bool = True, **backend_kwargs) -> Backend:
    """
    Build a backend from its registry name.

    Arguments:
        name (str): One of the keys of BACKENDS
        cached (bool: True): Whether to wrap the backend in an LRU cache
        **backend_kwargs: Passed to the backend constructor

    Returns:
        Backend: The backend instance

    """
    if name not in BACKENDS:
        raise KeyError(f"Unknown backend: {name}. Valid backends are: {list(BACKENDS)}")
    backend = BACKENDS[name](**backend_kwargs)
    if cached:
        return InMemoryCachedBackend(backend, cache_type="LRUCache", maxsize=4096)
    return backend


__all__ = [
    "Backend",
    "CachedBackend",
    "InMemoryCachedBackend",
    "DictResidueBackend",
    "NumpyResidueBackend",
    "DataFrameResidueBackend",
    "BACKENDS",
    "get_backend",
]
