"""Named host-by-feature matrices and their TSV form."""

from dataclasses import dataclass

import numpy as np

from .corpus import canonicalize_host
from .errors import FormatError
from .tsvio import read_rows


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    hosts: tuple
    columns: tuple
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "hosts", tuple(self.hosts))
        object.__setattr__(self, "columns", tuple(self.columns))
        if values.shape != (len(self.hosts), len(self.columns)):
            raise FormatError(
                f"matrix shape {values.shape} does not match "
                f"{len(self.hosts)} hosts x {len(self.columns)} columns"
            )
        if len(set(self.hosts)) != len(self.hosts):
            raise FormatError("duplicate host rows in feature matrix")
        object.__setattr__(self, "values", values)

    @property
    def shape(self):
        return self.values.shape

    def row_index(self):
        return {h: i for i, h in enumerate(self.hosts)}

    def select(self, hosts):
        """Rows for ``hosts`` in the given order (KeyError on unknown host)."""
        idx = self.row_index()
        rows = [idx[h] for h in hosts]
        return FeatureMatrix(tuple(hosts), self.columns, self.values[rows])

    def prefixed(self, tag):
        return FeatureMatrix(self.hosts, tuple(f"{tag}:{c}" for c in self.columns), self.values)

    def write_tsv(self, fh):
        fh.write("host\t" + "\t".join(self.columns) + "\n")
        for host, row in zip(self.hosts, self.values):
            fh.write(host + "\t" + "\t".join(repr(float(v)) for v in row) + "\n")

    @classmethod
    def read_tsv(cls, path):
        """Read a headed matrix; host names are canonicalized on read."""
        rows = read_rows(path)
        try:
            _, header = next(rows)
        except StopIteration:
            raise FormatError(f"{path}: empty feature file") from None
        columns = [c.strip() for c in header[1:]]
        hosts, data = [], []
        for lineno, fields in rows:
            if len(fields) != len(columns) + 1:
                raise FormatError(
                    f"{path}:{lineno}: expected {len(columns) + 1} fields, got {len(fields)}"
                )
            try:
                data.append([float(v) for v in fields[1:]])
            except ValueError:
                raise FormatError(f"{path}:{lineno}: non-numeric feature value") from None
            hosts.append(canonicalize_host(fields[0]))
        values = np.array(data, dtype=float).reshape(len(hosts), len(columns))
        if not np.all(np.isfinite(values)):
            raise FormatError(f"{path}: feature values must be finite")
        return cls(tuple(hosts), tuple(columns), values)
