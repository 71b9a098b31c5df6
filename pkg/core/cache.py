from __future__ import annotations

import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Callable, Mapping

import duckdb
import numpy as np

from config import CACHE_FORMAT_VERSION, get_cache_dir
from pointgas.freefermi import SpectrumSlice

logger = logging.getLogger(__name__)

_DB_NAME = "spectra.duckdb"

_CREATE = """
CREATE TABLE IF NOT EXISTS spectra (
    fingerprint VARCHAR PRIMARY KEY,
    version INTEGER,
    kind VARCHAR,
    params VARCHAR,
    header VARCHAR,
    eigenvalues DOUBLE[],
    multiplicities BIGINT[]
)
"""


def fingerprint(kind: str, params: Mapping[str, Any]) -> str:
    """sha256 of the canonical JSON of the problem parameters and the cache format version."""

    canonical = json.dumps(
        {"kind": kind, "params": dict(params), "version": CACHE_FORMAT_VERSION},
        sort_keys=True,
        separators=(",", ":"),
        default=repr,
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class SpectrumCache:
    """Spectrum slices in one duckdb file, keyed by problem fingerprint.

    Connections are opened per call; duckdb's file lock serialises writers.
    """

    def __init__(self, directory: str | Path | None = None) -> None:
        self.directory = get_cache_dir(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.path = self.directory / _DB_NAME
        with duckdb.connect(str(self.path)) as con:
            con.execute(_CREATE)

    def get(self, kind: str, params: Mapping[str, Any]) -> SpectrumSlice | None:
        key = fingerprint(kind, params)
        with duckdb.connect(str(self.path), read_only=True) as con:
            row = con.execute(
                "SELECT header, eigenvalues, multiplicities FROM spectra WHERE fingerprint = ? AND version = ?",
                [key, CACHE_FORMAT_VERSION],
            ).fetchone()
        if row is None:
            return None
        logger.debug("cache hit %s %s", kind, key[:12])
        header = json.loads(row[0])
        return SpectrumSlice(
            eigenvalues=np.asarray(row[1], dtype=float),
            multiplicities=np.asarray(row[2], dtype=np.int64),
            bc=header["bc"],
            side=header["side"],
            cutoff=header["cutoff"],
            copies=header["copies"],
            kind=header["kind"],
            seed=header["seed"],
            meta=header["meta"],
        )

    def put(self, kind: str, params: Mapping[str, Any], spec: SpectrumSlice) -> str:
        key = fingerprint(kind, params)
        header = json.dumps(
            {
                "bc": spec.bc,
                "side": spec.side,
                "cutoff": spec.cutoff,
                "copies": spec.copies,
                "kind": spec.kind,
                "seed": spec.seed,
                "meta": spec.meta,
            },
            sort_keys=True,
        )
        with duckdb.connect(str(self.path)) as con:
            con.execute(
                "INSERT OR REPLACE INTO spectra VALUES (?, ?, ?, ?, ?, ?, ?)",
                [
                    key,
                    CACHE_FORMAT_VERSION,
                    kind,
                    json.dumps(dict(params), sort_keys=True, default=repr),
                    header,
                    spec.eigenvalues.tolist(),
                    spec.multiplicities.tolist(),
                ],
            )
        return key

    def get_or_compute(
        self, kind: str, params: Mapping[str, Any], compute: Callable[[], SpectrumSlice]
    ) -> SpectrumSlice:
        cached = self.get(kind, params)
        if cached is not None:
            return cached
        spec = compute()
        self.put(kind, params, spec)
        return spec

    def __len__(self) -> int:
        with duckdb.connect(str(self.path), read_only=True) as con:
            return int(con.execute("SELECT count(*) FROM spectra").fetchone()[0])


__all__ = ["SpectrumCache", "fingerprint"]
