from typing import Optional, Tuple

import pandas as pd

from .backend import Backend


class DataFrameResidueBackend(Backend):
    """
    A residue table stored in a pandas Series indexed by a.

    """

    def __init__(self, **kwargs):
        """
        Create a new DataFrameResidueBackend instance.

        Returns:
            None

        """
        self._kwargs = kwargs

    def residue_table(self, n: int, m: int) -> pd.Series:
        """
        Return the residues a**3 + a mod m**2 as a Series indexed by a.

        """
        return pd.Series(self.residues(n, m), index=pd.RangeIndex(1, n + 1), name="r")

    def first_collision(self, n: int, m: int) -> Optional[Tuple[int, int]]:
        """
        Find the lexicographically first collision modulo m**2.

        Arguments:
            n (int): Consider 1 <= a <= n
            m (int): The modulus root

        Returns:
            tuple: (a, b), or None if the residues are pairwise distinct

        """
        table = self.residue_table(n, m)
        duplicated = table.duplicated(keep="first")
        if not duplicated.any():
            return None
        b = int(duplicated.idxmax())
        a = int(table.index[table == table[b]][0])
        return a, b
