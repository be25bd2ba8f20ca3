from typing import Optional, Tuple

from .backend import Backend
from ..modarith import cubic_residue


class DictResidueBackend(Backend):
    """
    A hashed residue table.

    Residues are inserted in order of a, and the scan stops at the first
    residue that is already present. Since collisions of a**3 + a modulo m**2
    usually appear after roughly m steps, this is the fastest backend for the
    repeated "does m fail?" questions asked while computing D(n).

    """

    def __init__(self, **kwargs):
        """
        Create a new DictResidueBackend instance.

        Returns:
            None

        """
        self._kwargs = kwargs

    def first_collision(self, n: int, m: int) -> Optional[Tuple[int, int]]:
        """
        Find the lexicographically first collision modulo m**2.

        Arguments:
            n (int): Consider 1 <= a <= n
            m (int): The modulus root

        Returns:
            tuple: (a, b), or None if the residues are pairwise distinct

        """
        self._check_arguments(n, m)
        modulus = m * m
        seen = {}
        for b in range(1, n + 1):
            residue = cubic_residue(b, modulus)
            a = seen.get(residue)
            if a is not None:
                return a, b
            seen[residue] = b
        return None
