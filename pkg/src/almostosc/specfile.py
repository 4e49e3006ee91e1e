"""Equation spec files.

A spec file is a flat TOML document. Required keys::

    r, q, e        coefficient expressions (strings in the sequence language)
    c              nonnegative rational, e.g. "1/2"
    k              nonnegative integer delay
    gamma, alpha   odd ratios, e.g. "3" or "5/3"

Optional keys::

    p              weight sequence expression (default "1")
    d, M, R        positive constants for the criterion (R defaults to max r_n)
    mode           "exact" (default) or "float"
    horizon        simulation horizon N (default 1000)
    init           table with n0 (default 1) and x: list of k+2 values
    solution       closed form of a known solution, used by verify-example
    expect         expected classifier tag, used by verify-example
    description    free text

Any other key is rejected.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .criteria import CriterionParams
from .equation import DEFAULT_HORIZON, MAX_HORIZON, EquationSpec, InitialData
from .numerics import Mode, OddRatio, to_value
from .seqlang import SeqExpr, SeqLangError, parse_seq

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

REQUIRED = ("r", "q", "e", "c", "k", "gamma", "alpha")
OPTIONAL = ("p", "d", "M", "R", "mode", "horizon", "init", "solution", "expect", "description")
BUNDLED = ("example1", "example2", "example3")


class SpecFileError(ValueError):
    def __init__(self, message: str, key: str | None = None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


@dataclass(frozen=True)
class SpecFile:
    spec: EquationSpec
    params: CriterionParams
    init: InitialData | None
    mode: Mode
    horizon: int
    solution: SeqExpr | None = None
    expect: str | None = None
    description: str = ""
    source: str = ""


def _expr(doc, key):
    try:
        return parse_seq(str(doc[key]))
    except SeqLangError as exc:
        raise SpecFileError(str(exc), key) from None


def _number(doc, key):
    value = doc[key]
    if isinstance(value, bool):
        raise SpecFileError("expected a number", key)
    try:
        return to_value(value)
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise SpecFileError(f"not a rational number ({exc})", key) from None


def parse_spec_document(doc: dict, source: str = "<document>") -> SpecFile:
    unknown = sorted(set(doc) - set(REQUIRED) - set(OPTIONAL))
    if unknown:
        raise SpecFileError(f"unknown key(s): {', '.join(unknown)}")
    for key in REQUIRED:
        if key not in doc:
            raise SpecFileError("missing required key", key)
    k = doc["k"]
    if isinstance(k, bool) or not isinstance(k, int) or k < 0:
        raise SpecFileError("expected a nonnegative integer", "k")
    exps = {}
    for key in ("gamma", "alpha"):
        try:
            exps[key] = OddRatio.parse(doc[key])
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            raise SpecFileError(str(exc), key) from None
    c = _number(doc, "c")
    if c < 0:
        raise SpecFileError("must be nonnegative", "c")
    spec = EquationSpec(_expr(doc, "r"), _expr(doc, "q"), _expr(doc, "e"), c, k,
                        exps["gamma"], exps["alpha"])

    defaulted = set()
    kwargs = {}
    if "p" in doc:
        kwargs["p"] = _expr(doc, "p")
    else:
        defaulted.add("p")
    for key in ("d", "M", "R"):
        if key in doc:
            kwargs[key] = _number(doc, key)
            if kwargs[key] <= 0:
                raise SpecFileError("must be positive", key)
        else:
            defaulted.add(key)
    params = CriterionParams(defaulted=defaulted, **kwargs)

    try:
        mode = Mode(str(doc.get("mode", "exact")).lower())
    except ValueError:
        raise SpecFileError("must be 'exact' or 'float'", "mode") from None
    horizon = doc.get("horizon", DEFAULT_HORIZON)
    if isinstance(horizon, bool) or not isinstance(horizon, int) or not 1 <= horizon <= MAX_HORIZON:
        raise SpecFileError(f"expected an integer in [1, {MAX_HORIZON}]", "horizon")

    init = None
    if "init" in doc:
        block = doc["init"]
        if not isinstance(block, dict):
            raise SpecFileError("expected a table with n0 and x", "init")
        extra = sorted(set(block) - {"n0", "x"})
        if extra:
            raise SpecFileError(f"unknown key(s): {', '.join(extra)}", "init")
        if "x" not in block:
            raise SpecFileError("missing required key", "init.x")
        n0 = block.get("n0", 1)
        if isinstance(n0, bool) or not isinstance(n0, int) or n0 < 1:
            raise SpecFileError("expected a positive integer", "init.n0")
        try:
            values = tuple(to_value(v) for v in block["x"])
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            raise SpecFileError(f"bad value ({exc})", "init.x") from None
        if len(values) != k + 2:
            raise SpecFileError(f"needs k+2 = {k + 2} values, got {len(values)}", "init.x")
        init = InitialData(n0, values)

    solution = _expr(doc, "solution") if "solution" in doc else None
    return SpecFile(spec, params, init, mode, horizon, solution, doc.get("expect"),
                    str(doc.get("description", "")), source)


def load_spec_file(path: str | Path) -> SpecFile:
    """Load a spec file from disk, or a bundled example by name."""
    p = Path(path)
    if not p.exists() and str(path) in BUNDLED:
        return load_bundled(str(path))
    try:
        text = p.read_text()
    except OSError as exc:
        raise SpecFileError(f"cannot read {path}: {exc.strerror}") from None
    return loads(text, str(path))


def loads(text: str, source: str = "<string>") -> SpecFile:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise SpecFileError(f"{source}: {exc}") from None
    return parse_spec_document(doc, source)


def bundled_text(name: str) -> str:
    if name not in BUNDLED:
        raise SpecFileError(f"unknown bundled example {name!r}; choose from {', '.join(BUNDLED)}")
    return resources.files("almostosc.data").joinpath(f"{name}.toml").read_text()


def load_bundled(name: str) -> SpecFile:
    return loads(bundled_text(name), name)
