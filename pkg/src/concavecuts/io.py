"""Instance files.

An instance is a JSON object with sorted keys and two-space indentation::

    {
      "a": [4.0, 100.0, 100.0],
      "f": {"family": "sqrt", "scale": 1.0},
      "k": 2,
      "n": 3
    }

``f`` holds ``family`` plus that family's parameters (``scale``, ``p``, ``c``,
or ``breakpoints`` and ``slopes``). Generated instances may also carry
``lambda`` (a list of n returns) and ``epsilon``. :func:`dumps_instance`
emits this canonical form, so ``dumps(loads(text)) == text`` for any file it
wrote. Indices never appear in the file; the CLI reads and prints them 1-based.
"""
from __future__ import annotations

import json
from pathlib import Path

from .core import ConcaveFunction, Instance, InputError

EXTRA_KEYS = ("lambda", "epsilon")


def instance_to_dict(inst: Instance, extras: dict | None = None) -> dict:
    d = {"n": inst.n, "k": inst.k, "a": list(inst.a), "f": inst.f.to_dict()}
    for key, val in (extras or {}).items():
        if key not in EXTRA_KEYS:
            raise InputError(f"unsupported extra field {key!r}")
        d[key] = [float(v) for v in val] if key == "lambda" else float(val)
    return d


def dumps_instance(inst: Instance, extras: dict | None = None) -> str:
    return json.dumps(instance_to_dict(inst, extras), sort_keys=True, indent=2) + "\n"


def loads_instance(text: str) -> tuple[Instance, dict]:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"instance file is not valid JSON: {exc}") from None
    if not isinstance(d, dict):
        raise InputError("instance file must hold a JSON object")
    unknown = set(d) - {"n", "k", "a", "f", *EXTRA_KEYS}
    if unknown:
        raise InputError(f"unknown fields {sorted(unknown)}")
    for key in ("n", "k", "a", "f"):
        if key not in d:
            raise InputError(f"missing field {key!r}")
    if not isinstance(d["a"], list) or len(d["a"]) != d["n"]:
        raise InputError("field 'a' must be a list of n weights")
    if not isinstance(d["f"], dict):
        raise InputError("field 'f' must be an object")
    inst = Instance(tuple(d["a"]), d["k"], ConcaveFunction.from_dict(d["f"]))
    extras = {key: d[key] for key in EXTRA_KEYS if key in d}
    if "lambda" in extras and len(extras["lambda"]) != inst.n:
        raise InputError("field 'lambda' must have n entries")
    return inst, extras


def load_instance(path) -> tuple[Instance, dict]:
    return loads_instance(Path(path).read_text())


def save_instance(path, inst: Instance, extras: dict | None = None) -> None:
    Path(path).write_text(dumps_instance(inst, extras))
