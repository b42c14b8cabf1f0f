"""Structured-text dialect shared by every file this package reads or writes.

The dialect is YAML restricted to mappings, lists and scalars, with two
changes to number handling so that values survive a round trip exactly:

* decimal literals (``93.84``) load as ``Fraction`` built from the literal
  text, never as binary floats;
* rationals without a finite decimal expansion are written as
  ``!rational 1/3``.

Output is deterministic: mapping keys are sorted and the emitter settings are
fixed, so identical data always produces identical bytes.
"""

from fractions import Fraction

import yaml

from .errors import ParseError
from .rational import exact_decimal, is_terminating, normalize


class Loader(yaml.SafeLoader):
    pass


def _construct_float(loader, node):
    text = loader.construct_scalar(node).replace("_", "")
    lowered = text.lower()
    if lowered in (".inf", "+.inf", "-.inf", ".nan"):
        raise yaml.constructor.ConstructorError(
            None, None, f"non-finite number {text!r} is not allowed", node.start_mark
        )
    q = Fraction(text)
    return q.numerator if q.denominator == 1 else q


def _construct_rational(loader, node):
    q = Fraction(loader.construct_scalar(node).strip())
    return q.numerator if q.denominator == 1 else q


def _construct_mapping(loader, node, deep=False):
    loader.flatten_mapping(node)
    seen = {}
    for key_node, _ in node.value:
        key = loader.construct_object(key_node, deep=deep)
        if key in seen:
            raise yaml.constructor.ConstructorError(
                "while constructing a mapping", node.start_mark,
                f"duplicate key {key!r}", key_node.start_mark,
            )
        seen[key] = True
    return yaml.SafeLoader.construct_mapping(loader, node, deep=deep)


Loader.add_constructor("tag:yaml.org,2002:float", _construct_float)
Loader.add_constructor("!rational", _construct_rational)
Loader.add_constructor(
    "tag:yaml.org,2002:map", lambda loader, node: _construct_mapping(loader, node, deep=True)
)


class Dumper(yaml.SafeDumper):
    def ignore_aliases(self, data):
        return True


def _represent_fraction(dumper, q):
    if q.denominator == 1:
        return dumper.represent_int(q.numerator)
    if is_terminating(q):
        return dumper.represent_scalar("tag:yaml.org,2002:float", exact_decimal(q))
    return dumper.represent_scalar("!rational", f"{q.numerator}/{q.denominator}")


def _represent_tuple(dumper, t):
    return dumper.represent_list(list(t))


Dumper.add_representer(Fraction, _represent_fraction)
Dumper.add_representer(tuple, _represent_tuple)


def dumps(data):
    """Serialise ``data`` deterministically."""
    return yaml.dump(
        normalize(data),
        Dumper=Dumper,
        sort_keys=True,
        default_flow_style=None,
        allow_unicode=True,
        width=100,
        indent=2,
    )


def loads(text, path="<string>"):
    try:
        return yaml.load(text, Loader=Loader)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        line = mark.line + 1 if mark is not None else 0
        raise ParseError(path, line, exc.problem or str(exc)) from None
    except yaml.YAMLError as exc:
        raise ParseError(path, 0, str(exc)) from None
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(path, 0, str(exc)) from None


def load_file(path):
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read(), path)


def dump_file(data, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(data))
