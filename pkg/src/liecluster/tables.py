"""On-disk coupling tables: ``<cache_dir>/<hash>.json``.

The hash covers the structure constants and generator matrices of every
input and output rep, the order and the symmetric flag, so generic reps key
correctly. Tables loaded from disk and tables computed fresh go through the
same JSON text, which keeps downstream numbers identical either way.
"""
from __future__ import annotations

import hashlib
import json
import os
import tempfile
from typing import Optional, Sequence

from .algebra import Rep
from .coupling import (
    NULL_TOL, CouplingTensor, clebsch_gordan, coupling_cache_key, coupling_from_dict, coupling_to_json,
    rep_name, symmetric_coupling,
)
from .errors import ConfigurationError, InvalidArgumentError


class MissingTableError(ConfigurationError):
    pass


def write_text_atomic(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


class TableStore:
    """Coupling provider reading and writing JSON tables.

    Lookup order: explicitly listed table files, then the cache directory,
    then (if ``allow_compute``) a fresh solve written into the cache.
    """

    def __init__(self, cache_dir: Optional[str] = None, table_paths: Sequence[str] = (),
                 allow_compute: bool = True, tol: float = NULL_TOL):
        self.cache_dir = cache_dir
        self.allow_compute = allow_compute
        self.tol = tol
        self._explicit = []
        for p in table_paths:
            try:
                with open(p, encoding="utf-8") as fh:
                    self._explicit.append(json.load(fh))
            except (OSError, ValueError) as exc:
                raise ConfigurationError(f"cannot read coupling table {p}: {exc}") from exc
        self._memo = {}

    def _path(self, key: str) -> Optional[str]:
        return None if self.cache_dir is None else os.path.join(self.cache_dir, key + ".json")

    def _get(self, inputs: Sequence[Rep], output: Rep, order: int, symmetric: bool, compute,
             method: str = "auto"):
        key = coupling_cache_key(inputs, output, order, symmetric)
        if method != "auto" or self.tol != NULL_TOL:
            # non-default solver settings get their own cache entries
            key = hashlib.sha256(f"{key}/{method}/{self.tol!r}".encode()).hexdigest()
        if key in self._memo:
            return self._memo[key]
        names = [rep_name(r) for r in inputs]
        text = None
        for d in self._explicit:
            if (d.get("inputs") == names and d.get("output") == rep_name(output)
                    and d.get("order") == order and bool(d.get("symmetric")) == symmetric):
                ct = coupling_from_dict(d, inputs, output)
                self._memo[key] = ct
                return ct
        path = self._path(key)
        if path is not None and os.path.exists(path):
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        elif self.allow_compute:
            text = coupling_to_json(compute())
            if path is not None:
                write_text_atomic(path, text)
        else:
            kind = f"order-{order} symmetric" if symmetric else "pairwise"
            raise MissingTableError(f"missing {kind} coupling table {names} -> {rep_name(output)}")
        try:
            ct = coupling_from_dict(json.loads(text), inputs, output)
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise InvalidArgumentError(f"corrupt coupling table {path}: {exc}") from exc
        self._memo[key] = ct
        return ct

    def symmetric(self, rep: Rep, order: int, rep_out: Rep, method: str = "auto") -> CouplingTensor:
        return self._get((rep,) * order, rep_out, order, True,
                         lambda: symmetric_coupling(rep, order, rep_out, method=method, tol=self.tol),
                         method)

    def pairwise(self, rep1: Rep, rep2: Rep, rep_out: Rep) -> CouplingTensor:
        return self._get((rep1, rep2), rep_out, 2, False,
                         lambda: clebsch_gordan(rep1, rep2, rep_out, self.tol))
