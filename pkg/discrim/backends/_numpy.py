from typing import Optional, Tuple
import math

import numpy as np

from .backend import Backend

_DEFAULT_MAX_ENTRIES = 20_000_000
_INITIAL_PREFIX = 1 << 12


def _first_duplicate(values: np.ndarray, positions: np.ndarray):
    """
    Find the duplicate pair with the smallest second position.

    Arguments:
        values (np.ndarray): Residues
        positions (np.ndarray): The a-value of each residue, ascending

    Returns:
        tuple: (a, b) or None

    """
    if len(values) < 2:
        return None
    order = np.argsort(values, kind="stable")
    ordered = values[order]
    duplicate = np.flatnonzero(ordered[1:] == ordered[:-1])
    if len(duplicate) == 0:
        return None
    seconds = positions[order[duplicate + 1]]
    best = int(np.argmin(seconds))
    i = duplicate[best]
    return int(positions[order[i]]), int(positions[order[i + 1]])


class NumpyResidueBackend(Backend):
    """
    A sorted residue table, held in numpy arrays.

    When n exceeds `max_entries`, the residue range is split into buckets and
    each bucket is filled by a chunked pass over a, so no more than about
    `max_entries` residues are held in memory at once.

    """

    def __init__(self, max_entries: int = _DEFAULT_MAX_ENTRIES, **kwargs):
        """
        Create a new NumpyResidueBackend instance.

        Arguments:
            max_entries (int: 2e7): Memory cap, in residues, per table

        Returns:
            None

        """
        if max_entries < 2:
            raise ValueError(f"max_entries must be at least 2, got {max_entries}.")
        self._max_entries = max_entries

    def first_collision(self, n: int, m: int) -> Optional[Tuple[int, int]]:
        """
        Find the lexicographically first collision modulo m**2.

        Prefixes 1..L of the table are sorted for doubling L, so the scan
        stops at the first prefix that holds a collision. A collision with
        second element b lies in every prefix with L >= b, so the first one
        found has the smallest b.

        Arguments:
            n (int): Consider 1 <= a <= n
            m (int): The modulus root

        Returns:
            tuple: (a, b), or None if the residues are pairwise distinct

        """
        self._check_arguments(n, m)
        length = min(n, self._max_entries, _INITIAL_PREFIX)
        while length <= self._max_entries:
            found = _first_duplicate(
                self.residues(length, m), np.arange(1, length + 1, dtype=np.int64)
            )
            if found is not None or length == n:
                return found
            length = min(n, 2 * length)
        return self._bucketed_first_collision(n, m)

    def _bucketed_first_collision(self, n: int, m: int):
        modulus = m * m
        buckets = math.ceil(n / self._max_entries)
        width = math.ceil(modulus / buckets)

        best = None
        for lo in range(0, modulus, width):
            hi = lo + width
            kept_values, kept_positions = [], []
            for start in range(1, n + 1, self._max_entries):
                stop = min(start + self._max_entries - 1, n)
                chunk = self.residues(stop, m, start=start)
                mask = (chunk >= lo) & (chunk < hi)
                kept_values.append(chunk[mask])
                kept_positions.append(np.flatnonzero(mask) + start)
            found = _first_duplicate(
                np.concatenate(kept_values), np.concatenate(kept_positions)
            )
            if found is not None and (best is None or found[::-1] < best[::-1]):
                best = found
        return best
