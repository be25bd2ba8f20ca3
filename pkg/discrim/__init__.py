"""
Discrim: the discriminator of a^3 + a.

"""

from typing import List, Optional, Tuple, Union

from .backends import BACKENDS, Backend, NumpyResidueBackend, get_backend
from . import casekit, expsum, modarith, verify


_DEFAULT_BACKEND = NumpyResidueBackend

__version__ = "0.1.0"


class Discriminator:
    """
    A discrim.Discriminator computes D(n) against a chosen residue backend.

    """

    def __init__(self, backend: Optional[Union[Backend, str, type]] = None, **backend_kwargs):
        """
        Create a new discrim.Discriminator.

        The only positional argument is the backend to use. All other arguments
        are passed to the backend's constructor, if a type or registry name is
        provided. Otherwise, kwargs are ignored.

        Arguments:
            backend (Backend): The backend to use. If none is provided, will
                default to _DEFAULT_BACKEND.

        """
        self.backend = backend or _DEFAULT_BACKEND
        self._backend_name = None

        # If you passed a class or a name instead of an instance, instantiate it
        # with kwargs from the constructor:
        if isinstance(self.backend, str):
            self._backend_name = self.backend
            self.backend = get_backend(self.backend, **backend_kwargs)
        elif isinstance(self.backend, type):
            self._backend_name = next(
                (name for name, cls in BACKENDS.items() if cls is self.backend), None
            )
            self.backend = self.backend(**backend_kwargs)

    def k_of(self, n: int) -> int:
        return verify.k_of(n)

    def residue_injective(self, n: int, m: int) -> Optional[Tuple[int, int]]:
        return verify.residue_injective(n, m, self.backend)

    def d_of(self, n: int) -> int:
        """
        Compute D(n).

        Arguments:
            n (int): At least 2

        Returns:
            int: The least m with a^3 + a (1 <= a <= n) distinct modulo m^2

        """
        return verify.d_of(n, self.backend)

    def check_theorem(self, n: int) -> verify.TheoremCheck:
        return verify.check_theorem(n, self.backend)

    def collide(self, n: int, m: int) -> casekit.CollisionCertificate:
        return casekit.collide(n, m)

    def lemma2_scan(self, n: int) -> List[casekit.CollisionCertificate]:
        return verify.lemma2_scan(n)

    def range_scan(self, n_lo: int, n_hi: int, **kwargs) -> verify.ScanReport:
        """
        Check D(n) = 3^k(n) over [n_lo, n_hi].

        Worker processes rebuild their backend by registry name, so a
        Discriminator built from an instance scans with DISCRIM_BACKEND.

        Arguments:
            n_lo (int): First n
            n_hi (int): Last n (inclusive)
            **kwargs: Passed to discrim.verify.range_scan

        Returns:
            ScanReport: One row per n

        """
        kwargs.setdefault("backend_name", self._backend_name)
        return verify.range_scan(n_lo, n_hi, **kwargs)


__all__ = [
    "Discriminator",
    "Backend",
    "casekit",
    "expsum",
    "modarith",
    "verify",
    "__version__",
]
