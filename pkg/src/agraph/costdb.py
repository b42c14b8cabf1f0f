"""Circuit-level cost lookup.

A module's query (class, parameters, attributes) is answered by the
interface it names: either a cost table loaded from disk or an adaptor that
fronts an external estimator.  Tables are matched on exact keys only.

Table format (CSV with ``#`` comment lines)::

    # agraph-cost-table v1
    # interface: cmos
    class,technology,width,area[mm^2],leakage_power[mW],dynamic_energy[nJ]
    register,45,16,0.0012,0.0105,0.00021

Columns whose header ends in ``[unit]`` are metrics; the rest are key
fields.  An empty key cell means the row does not use that field; an empty
metric cell means the row does not provide that metric.
"""

import csv
import io
import os
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    AdaptorError,
    CostError,
    DuplicateInterface,
    DuplicateKey,
    MissingMetric,
    NoMatch,
    ParseError,
    UnitMismatch,
    UnknownInterface,
)
from .rational import freeze, normalize, to_rational

TABLE_MAGIC = "agraph-cost-table v1"
BUNDLED_TABLES = Path(__file__).parent / "bundled" / "tables"

# attributes that participate in table keys; frequency and the rest are informational
KEY_ATTRIBUTES = ("technology",)


@dataclass(frozen=True)
class CostQuery:
    interface: str
    cls: str
    params: dict = field(default_factory=dict)
    attributes: dict = field(default_factory=dict)

    def key(self):
        k = {"class": self.cls}
        k.update(normalize(dict(self.params)))
        for a in KEY_ATTRIBUTES:
            if a in self.attributes:
                k[a] = normalize(self.attributes[a])
        return k

    @classmethod
    def for_module(cls, node):
        """Build the query a module node would issue."""
        params = {k: v for k, v in node.query.items() if k != "class"}
        return cls(node.attributes.get("interface"), node.query["class"], params, dict(node.attributes))


@dataclass(frozen=True)
class CostRecord:
    metrics: dict  # metric -> (value, unit)
    provenance: str

    def value(self, metric):
        return self.metrics[metric][0]

    def unit(self, metric):
        return self.metrics[metric][1]


def _frozen_key(key):
    return tuple(sorted((k, freeze(v)) for k, v in key.items()))


class CostDatabase:
    """An immutable exact-key table of cost records for one interface."""

    def __init__(self, interface, entries=(), source=None):
        self.interface = interface
        self.source = source
        self.entries = []
        self._index = {}
        for key, record in entries:
            self._add(key, record)

    def _add(self, key, record):
        fk = _frozen_key(key)
        if fk in self._index:
            raise DuplicateKey(
                f"{self.interface}: key {dict(key)} defined twice "
                f"({self._index[fk].provenance} and {record.provenance})"
            )
        self._index[fk] = record
        self.entries.append((dict(key), record))

    def merged(self, other):
        out = CostDatabase(self.interface, self.entries, self.source)
        for key, record in other.entries:
            out._add(key, record)
        return out

    def classes(self):
        return sorted({k.get("class") for k, _ in self.entries if k.get("class") is not None})

    def lookup(self, key):
        record = self._index.get(_frozen_key(key))
        if record is None:
            raise NoMatch(key, self.nearest(key))
        return record

    def query(self, q):
        return self.lookup(q.key())

    def nearest(self, key, n=3):
        """Up to ``n`` table keys closest to ``key`` by Hamming distance over key fields."""
        scored = []
        for i, (k, _) in enumerate(self.entries):
            fields = set(k) | set(key)
            dist = sum(1 for f in fields if freeze(k.get(f, _MISSING)) != freeze(key.get(f, _MISSING)))
            scored.append((dist, i, k))
        scored.sort(key=lambda t: (t[0], t[1]))
        return [k for _, _, k in scored[:n]]

    def __len__(self):
        return len(self.entries)

    def __repr__(self):
        return f"<CostDatabase {self.interface!r}: {len(self)} entries>"


_MISSING = object()


def _parse_cell(text):
    text = text.strip()
    if text == "":
        return None
    try:
        return to_rational(text)
    except (ValueError, ZeroDivisionError):
        return text


def read_table(path):
    """Parse a cost table file into ``(directives, CostDatabase)``."""
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        lines = fh.read().splitlines()
    directives = {}
    body = []
    body_linenos = []
    first = True
    for lineno, line in enumerate(lines, 1):
        stripped = line.strip()
        if stripped.startswith("#"):
            text = stripped[1:].strip()
            if first:
                if text != TABLE_MAGIC:
                    raise ParseError(path, lineno, f"expected '# {TABLE_MAGIC}' header")
                first = False
                continue
            if ":" in text:
                k, v = text.split(":", 1)
                k = k.strip().lower()
                if k in ("interface", "kind", "source"):
                    directives[k] = v.strip()
            continue
        if first:
            raise ParseError(path, lineno, f"expected '# {TABLE_MAGIC}' header")
        if not stripped:
            continue
        body.append(line)
        body_linenos.append(lineno)
    if "interface" not in directives:
        raise ParseError(path, 1, "missing '# interface: <name>' directive")
    db = CostDatabase(directives["interface"], source=str(path))
    if not body:
        return directives, db
    rows = list(csv.reader(io.StringIO("\n".join(body))))
    header = [h.strip() for h in rows[0]]
    columns = []
    for h in header:
        if h.endswith("]") and "[" in h:
            name, unit = h[:-1].split("[", 1)
            columns.append(("metric", name.strip(), unit.strip()))
        else:
            columns.append(("key", h, None))
    if "class" not in header:
        raise ParseError(path, body_linenos[0], "table needs a 'class' column")
    for row, lineno in zip(rows[1:], body_linenos[1:]):
        if len(row) != len(header):
            raise ParseError(path, lineno, f"expected {len(header)} cells, got {len(row)}")
        key, metrics = {}, {}
        for (kind, name, unit), cell in zip(columns, row):
            value = _parse_cell(cell)
            if value is None:
                continue
            if kind == "key":
                key[name] = value
            else:
                if isinstance(value, str):
                    raise ParseError(path, lineno, f"metric {name!r} is not a number: {cell!r}")
                if value < 0:
                    raise ParseError(path, lineno, f"metric {name!r} is negative")
                metrics[name] = (value, unit)
        if "class" not in key:
            raise ParseError(path, lineno, "row has no class")
        try:
            db._add(key, CostRecord(metrics, f"{path.name}:{lineno}"))
        except DuplicateKey as exc:
            raise DuplicateKey(f"{path}:{lineno}: {exc}") from None
    return directives, db


def load_database(path):
    """Load one cost table as a ``CostDatabase``."""
    return read_table(path)[1]


class TableAdaptor:
    """File-backed stand-in for an external estimator (e.g. a memory model).

    It answers queries from a pre-tabulated table but goes through the
    adaptor path, so provenance names the adaptor.
    """

    def __init__(self, name, path):
        self.name = name
        self.database = load_database(path)

    def query(self, q):
        record = self.database.query(q)
        return CostRecord(record.metrics, f"adaptor:{self.name} ({record.provenance})")


class CostRegistry:
    """Interface name -> database or adaptor.  Built once, then read-only."""

    def __init__(self):
        self._databases = {}
        self._adaptors = {}

    def interfaces(self):
        return sorted(set(self._databases) | set(self._adaptors))

    def register_database(self, db):
        if db.interface in self._databases or db.interface in self._adaptors:
            raise DuplicateInterface(f"interface {db.interface!r} already registered")
        self._databases[db.interface] = db

    def register_adaptor(self, name, adaptor):
        if name in self._databases or name in self._adaptors:
            raise DuplicateInterface(f"interface {name!r} already registered")
        self._adaptors[name] = adaptor

    def database(self, name):
        return self._databases[name]

    def query(self, q, required=None):
        """Resolve ``q``; ``required`` maps metric -> unit that the record must carry."""
        if q.interface in self._databases:
            record = self._databases[q.interface].query(q)
        elif q.interface in self._adaptors:
            adaptor = self._adaptors[q.interface]
            try:
                record = adaptor.query(q) if hasattr(adaptor, "query") else adaptor(q)
            except CostError:
                raise
            except Exception as exc:
                raise AdaptorError(q.interface, f"{type(exc).__name__}: {exc}") from exc
            if not isinstance(record, CostRecord):
                raise AdaptorError(q.interface, f"returned {type(record).__name__}, not CostRecord")
        else:
            raise UnknownInterface(f"no cost interface named {q.interface!r}")
        for metric, unit in sorted((required or {}).items()):
            if metric not in record.metrics:
                raise MissingMetric(metric, f"class {q.cls!r} via {q.interface!r} ({record.provenance})")
            if record.metrics[metric][1] != unit:
                raise UnitMismatch(
                    f"metric {metric!r}: database unit {record.metrics[metric][1]!r} "
                    f"does not match declared unit {unit!r} ({record.provenance})"
                )
        return record


def search_path(extra=None):
    """Directories searched for cost tables, highest precedence first."""
    dirs = [Path(p) for p in (extra or [])]
    env = os.environ.get("AGRAPH_DB_PATH", "")
    dirs += [Path(p) for p in env.split(os.pathsep) if p]
    dirs.append(BUNDLED_TABLES)
    return dirs


def default_registry(extra_dirs=None):
    """Registry over every table on the search path.

    Tables in one directory that share an interface are merged; a directory
    earlier on the path shadows later ones for the interfaces it defines.
    Tables marked ``# kind: adaptor-stub`` are registered as adaptors.
    """
    registry = CostRegistry()
    for directory in search_path(extra_dirs):
        if not directory.is_dir():
            continue
        found = {}
        stubs = {}
        for path in sorted(directory.glob("*.csv")):
            directives, db = read_table(path)
            if directives.get("kind") == "adaptor-stub":
                stubs[db.interface] = path
            elif db.interface in found:
                found[db.interface] = found[db.interface].merged(db)
            else:
                found[db.interface] = db
        for name, db in sorted(found.items()):
            if name not in registry.interfaces():
                registry.register_database(db)
        for name, path in sorted(stubs.items()):
            if name not in registry.interfaces():
                registry.register_adaptor(name, TableAdaptor(name, path))
    return registry
