"""
Verification harness: k(n), D(n), and range scans of D(n) = 3^k(n).

For a fixed m, the first collision of a^3 + a modulo m^2 does not depend on n.
Call its larger element the horizon of m. Then a^3 + a (1 <= a <= n) is
injective modulo m^2 exactly when n < horizon(m), and D(n) is the least
m >= ceil(sqrt(n)) whose horizon exceeds n. Horizons are cached by the
backend, so a range scan computes each one once per worker.

"""

from dataclasses import asdict, dataclass, field
from typing import Iterable, List, Optional, Tuple
import concurrent.futures
import hashlib
import json
import logging
import math
import os
import time

import numpy as np
import pandas as pd

from .backends import Backend, get_backend
from .casekit import CollisionCertificate, ExhaustionError, RangeError, collide
from .modarith import DomainError, three_power_exponent

log = logging.getLogger(__name__)

_DEFAULT_BACKEND_NAME = os.environ.get("DISCRIM_BACKEND", "numpy")
_CHUNKS_PER_WORKER = 4
_IDENTITY_SAMPLES = 100

_default_backend: Optional[Backend] = None


class UpperBoundViolation(RuntimeError):
    """
    Raised when a^3 + a is not injective modulo 9^k(n).

    """

    def __init__(self, n: int):
        super().__init__(f"a^3 + a collides modulo 9^k for n={n}.")
        self.n = n


class CheckpointError(OSError):
    """
    Raised when the checkpoint file cannot be read or written.

    `partial` holds the report for every n completed before the failure.

    """

    def __init__(self, message: str, partial: "ScanReport" = None):
        super().__init__(message)
        self.partial = partial


def default_backend() -> Backend:
    """
    Return the shared backend named by DISCRIM_BACKEND (default "numpy").

    """
    global _default_backend
    if _default_backend is None:
        _default_backend = get_backend(_DEFAULT_BACKEND_NAME)
    return _default_backend


@dataclass(frozen=True)
class TheoremCheck:
    n: int
    k: int
    D: int
    match: bool

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ScanReport:
    """
    The result of checking D(n) = 3^k(n) for every n in [n_lo, n_hi].

    """

    n_lo: int
    n_hi: int
    rows: List[TheoremCheck] = field(default_factory=list)
    wall_time: float = 0.0
    worker_count: int = 1

    @property
    def failures(self) -> List[int]:
        return [row.n for row in self.rows if not row.match]

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame(
            [row.to_dict() for row in self.rows], columns=["n", "k", "D", "match"]
        )

    def to_csv(self) -> str:
        """
        Serialize the rows as CSV with columns n,k,D,match.

        """
        df = self.to_dataframe()
        df["match"] = df["match"].map({True: "true", False: "false"})
        return df.to_csv(index=False)

    def to_dict(self, include_timing: bool = True) -> dict:
        record = {
            "n_lo": self.n_lo,
            "n_hi": self.n_hi,
            "rows": [row.to_dict() for row in self.rows],
            "failures": self.failures,
        }
        if include_timing:
            record["wall_time"] = self.wall_time
            record["worker_count"] = self.worker_count
        return record

    def to_json(self, include_timing: bool = True) -> str:
        """
        Serialize the report as a single JSON document.

        Arguments:
            include_timing (bool: True): Whether to include wall_time and
                worker_count. Without them the output depends only on the range.

        Returns:
            str: The JSON document

        """
        return json.dumps(self.to_dict(include_timing=include_timing))


def k_of(n: int) -> int:
    """
    Return k(n), the least positive j with 3^(2j) >= n.

    Arguments:
        n (int): At least 2

    Returns:
        int: k(n)

    """
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n}.")
    return three_power_exponent(n)


def residue_injective(
    n: int, m: int, backend: Backend = None
) -> Optional[Tuple[int, int]]:
    """
    Find the first collision of a^3 + a (1 <= a <= n) modulo m^2.

    Arguments:
        n (int): At least 2
        m (int): At least 1
        backend (Backend: None): The residue backend; defaults to the shared one

    Returns:
        tuple: (a, b) with the smallest b, then the smallest a; or None

    """
    return (backend or default_backend()).first_collision(n, m)


def collision_horizon(m: int, backend: Backend = None) -> int:
    """
    Return the b of the first collision modulo m^2, over all a >= 1.

    Among m^2 + 1 values two must agree, so the horizon is at most m^2 + 1.

    """
    a, b = residue_injective(m * m + 1, m, backend)
    return b


def d_of(n: int, backend: Backend = None) -> int:
    """
    Compute D(n), the least m with a^3 + a (1 <= a <= n) distinct modulo m^2.

    Any m < ceil(sqrt(n)) has m^2 < n residues available, so the search
    starts at ceil(sqrt(n)). Below 3^k(n) each m is decided by its cached
    horizon. At 3^k itself the horizon is 9^k + 1, so the table is only
    built up to n.

    Arguments:
        n (int): At least 2
        backend (Backend: None): The residue backend

    Returns:
        int: D(n)

    """
    k = k_of(n)
    for m in range(math.isqrt(n - 1) + 1, 3**k):
        if collision_horizon(m, backend) > n:
            return m
    if residue_injective(n, 3**k, backend) is None:
        return 3**k
    raise UpperBoundViolation(n)


def check_theorem(n: int, backend: Backend = None) -> TheoremCheck:
    k = k_of(n)
    D = d_of(n, backend)
    return TheoremCheck(n=n, k=k, D=D, match=D == 3**k)


def lemma1_check(n: int, backend: Backend = None, seed: int = 0) -> bool:
    """
    Check that a^3 + a (1 <= a <= n) is injective modulo 9^k(n).

    Also spot-checks, on random pairs a < b <= n, that
    b^3 + b - a^3 - a = (b - a)(a^2 + ab + b^2 + 1) and that 3 never divides
    a^2 + ab + b^2 + 1.

    Arguments:
        n (int): At least 2
        backend (Backend: None): The residue backend
        seed (int: 0): Seed for the pair sampler

    Returns:
        bool: Whether the residues are injective and every sampled pair
            satisfies both identities

    """
    k = k_of(n)
    rng = np.random.default_rng(seed)
    for _ in range(_IDENTITY_SAMPLES):
        a, b = sorted(int(x) + 1 for x in rng.choice(n, 2, replace=False))
        form = a * a + a * b + b * b + 1
        if b**3 + b - a**3 - a != (b - a) * form:
            log.error("Difference identity fails at (%d, %d).", a, b)
            return False
        if form % 3 == 0:
            log.error("3 divides a^2 + ab + b^2 + 1 at (%d, %d).", a, b)
            return False
    return residue_injective(n, 3**k, backend) is None


def lemma2_scan(n: int) -> List[CollisionCertificate]:
    """
    Produce a collision certificate for every m with sqrt(n) < m < 3^k(n).

    Arguments:
        n (int): At least 2

    Returns:
        list: One CollisionCertificate per m, in increasing m

    """
    k = k_of(n)
    certificates, failures = [], []
    for m in range(math.isqrt(n) + 1, 3**k):
        try:
            certificates.append(collide(n, m))
        except (ExhaustionError, RangeError) as e:
            log.error("No certificate for n=%d, m=%d: %s", n, m, e)
            failures.append(m)
    if failures:
        raise ExhaustionError(
            n, failures[0], f"No certificate for n={n} at m in {failures}."
        )
    return certificates


def _scan_chunk(lo: int, hi: int, backend_name: str) -> List[TheoremCheck]:
    backend = get_backend(backend_name)
    return [check_theorem(n, backend) for n in range(lo, hi + 1)]


def _digest(rows: List[dict]) -> str:
    return hashlib.sha256(json.dumps(rows, sort_keys=True).encode()).hexdigest()


def read_checkpoint(path: str) -> List[TheoremCheck]:
    """
    Read the completed rows from a checkpoint file.

    Each line is {"lo", "hi", "rows", "digest"}. Lines that do not parse or
    whose digest does not match their rows (a torn final write) are skipped.

    """
    if not os.path.exists(path):
        return []
    rows = []
    try:
        with open(path) as fh:
            for line in fh:
                try:
                    record = json.loads(line)
                except json.JSONDecodeError:
                    log.warning("Skipping unreadable checkpoint line in %s", path)
                    continue
                if _digest(record.get("rows", [])) != record.get("digest"):
                    log.warning(
                        "Skipping checkpoint chunk [%s, %s] with a bad digest",
                        record.get("lo"),
                        record.get("hi"),
                    )
                    continue
                rows.extend(TheoremCheck(**row) for row in record["rows"])
    except OSError as e:
        raise CheckpointError(f"Cannot read checkpoint {path}: {e}") from e
    return rows


def _write_chunk(fh, lo: int, hi: int, rows: List[TheoremCheck]):
    records = [row.to_dict() for row in rows]
    fh.write(
        json.dumps({"lo": lo, "hi": hi, "rows": records, "digest": _digest(records)})
        + "\n"
    )
    fh.flush()


def _chunks(values: List[int], chunk_size: int) -> Iterable[Tuple[int, int]]:
    """
    Split sorted values into contiguous runs of at most chunk_size.

    """
    start = 0
    while start < len(values):
        end = start + 1
        while (
            end < len(values)
            and end - start < chunk_size
            and values[end] == values[end - 1] + 1
        ):
            end += 1
        yield values[start], values[end - 1]
        start = end


def range_scan(
    n_lo: int,
    n_hi: int,
    workers: int = 1,
    checkpoint_path: str = None,
    backend_name: str = None,
    chunk_size: int = None,
) -> ScanReport:
    """
    Check D(n) = 3^k(n) for every n in [n_lo, n_hi].

    The range is cut into contiguous chunks that are run across a process
    pool. When a checkpoint path is given, every finished chunk is appended to
    it, and rows already present are not recomputed.

    Arguments:
        n_lo (int): First n, at least 2
        n_hi (int): Last n (inclusive)
        workers (int: 1): Number of worker processes; 1 runs in-process
        checkpoint_path (str: None): JSON-lines checkpoint file
        backend_name (str: None): Backend for each worker; DISCRIM_BACKEND
            by default
        chunk_size (int: None): Values of n per chunk

    Returns:
        ScanReport: Rows for every n, in increasing n

    """
    if n_lo < 2 or n_hi < n_lo:
        raise DomainError(f"Need 2 <= n_lo <= n_hi, got [{n_lo}, {n_hi}].")
    if workers < 1:
        raise ValueError(f"workers must be at least 1, got {workers}.")
    backend_name = backend_name or _DEFAULT_BACKEND_NAME
    started = time.perf_counter()

    done = {}
    if checkpoint_path:
        for row in read_checkpoint(checkpoint_path):
            if n_lo <= row.n <= n_hi:
                done[row.n] = row
    todo = [n for n in range(n_lo, n_hi + 1) if n not in done]
    log.info(
        "Scanning [%d, %d]: %d done, %d remaining, %d worker(s)",
        n_lo, n_hi, len(done), len(todo), workers,
    )

    chunk_size = chunk_size or max(1, -(-len(todo) // (workers * _CHUNKS_PER_WORKER)))
    chunks = list(_chunks(todo, chunk_size))

    def report() -> ScanReport:
        return ScanReport(
            n_lo=n_lo,
            n_hi=n_hi,
            rows=[done[n] for n in sorted(done)],
            wall_time=time.perf_counter() - started,
            worker_count=workers,
        )

    try:
        fh = open(checkpoint_path, "a") if checkpoint_path else None
    except OSError as e:
        raise CheckpointError(
            f"Cannot write checkpoint {checkpoint_path}: {e}", report()
        ) from e

    def finish(lo: int, hi: int, rows: List[TheoremCheck]):
        for row in rows:
            done[row.n] = row
        if fh is not None:
            try:
                _write_chunk(fh, lo, hi, rows)
            except OSError as e:
                raise CheckpointError(
                    f"Cannot write checkpoint {checkpoint_path}: {e}", report()
                ) from e
        log.info("Finished chunk [%d, %d]", lo, hi)

    try:
        if workers == 1:
            for lo, hi in chunks:
                finish(lo, hi, _scan_chunk(lo, hi, backend_name))
        else:
            with concurrent.futures.ProcessPoolExecutor(workers) as executor:
                futures = {
                    executor.submit(_scan_chunk, lo, hi, backend_name): (lo, hi)
                    for lo, hi in chunks
                }
                for future in concurrent.futures.as_completed(futures):
                    lo, hi = futures[future]
                    finish(lo, hi, future.result())
    finally:
        if fh is not None:
            fh.close()

    result = report()
    if result.failures:
        log.warning("D(n) != 3^k(n) at n in %s", result.failures)
    log.info("Scanned %d values in %.2fs", len(result.rows), result.wall_time)
    return result
