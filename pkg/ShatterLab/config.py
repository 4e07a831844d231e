"""Strict JSON campaign configs.

One document per campaign; the ``"campaign"`` key picks the parser. Unknown
keys and wrongly typed values are InputErrors naming the JSON pointer of the
offending field; values outside their mathematical range are DomainErrors.
"""
from __future__ import annotations

import contextlib
import numbers
from typing import Any, Callable, Dict, Optional

from .errors import DomainError, InputError
from .experiment_agent import (
    AreaCampaignConfig,
    CouponCampaignConfig,
    InequalityCampaignConfig,
    ShatterCampaignConfig,
    SpecrCampaignConfig,
    TailCampaignConfig,
)
from .family_agent import FamilyKind, MatrixFamily
from .io_agent import IO_Agent

_REQUIRED = object()


@contextlib.contextmanager
def _located(pointer: str):
    try:
        yield
    except DomainError as exc:
        if "(at /" in str(exc):
            raise
        raise DomainError(f"{exc} (at {pointer or '/'})") from exc


class _Section:
    """Typed, strict view of one JSON object."""

    def __init__(self, payload: Any, pointer: str = ""):
        if not isinstance(payload, dict):
            raise InputError(f"Expected a JSON object, got {type(payload).__name__}.", pointer=pointer or "/")
        self.payload = payload
        self.pointer = pointer
        self.seen = set()

    def _raw(self, key: str, default):
        self.seen.add(key)
        if key not in self.payload:
            if default is _REQUIRED:
                raise InputError(f"Missing required field {key!r}.", pointer=f"{self.pointer}/{key}")
            return default, False
        return self.payload[key], True

    def _fail(self, key: str, expected: str, value) -> InputError:
        return InputError(f"Field {key!r} must be {expected}, got {json_type(value)}.", pointer=f"{self.pointer}/{key}")

    def number(self, key: str, default=_REQUIRED, nullable: bool = False) -> Optional[float]:
        value, present = self._raw(key, default)
        if not present or (nullable and value is None):
            return value
        if isinstance(value, bool) or not isinstance(value, numbers.Real):
            raise self._fail(key, "a number", value)
        return float(value)

    def integer(self, key: str, default=_REQUIRED, nullable: bool = False) -> Optional[int]:
        value, present = self._raw(key, default)
        if not present or (nullable and value is None):
            return value
        if isinstance(value, bool) or not isinstance(value, numbers.Integral):
            raise self._fail(key, "an integer", value)
        return int(value)

    def string(self, key: str, default=_REQUIRED, nullable: bool = False) -> Optional[str]:
        value, present = self._raw(key, default)
        if not present or (nullable and value is None):
            return value
        if not isinstance(value, str):
            raise self._fail(key, "a string", value)
        return value

    def boolean(self, key: str, default=_REQUIRED) -> bool:
        value, present = self._raw(key, default)
        if present and not isinstance(value, bool):
            raise self._fail(key, "true or false", value)
        return value

    def complex_value(self, key: str, default=_REQUIRED) -> complex:
        """A number, a [re, im] pair, or a string such as "1+2j"."""
        value, present = self._raw(key, default)
        if not present:
            return value
        if isinstance(value, numbers.Real) and not isinstance(value, bool):
            return complex(value)
        if isinstance(value, list) and len(value) == 2 and all(
            isinstance(part, numbers.Real) and not isinstance(part, bool) for part in value
        ):
            return complex(value[0], value[1])
        if isinstance(value, str):
            try:
                return complex(value.replace(" ", "").replace("i", "j"))
            except ValueError:
                pass
        raise self._fail(key, "a complex number ([re, im], number or string)", value)

    def list_of(self, key: str, item: str, default=_REQUIRED) -> list:
        value, present = self._raw(key, default)
        if not present:
            return value
        if not isinstance(value, list):
            raise self._fail(key, f"a list of {item}s", value)
        out = []
        for index, entry in enumerate(value):
            pointer = f"{self.pointer}/{key}/{index}"
            is_number = isinstance(entry, numbers.Real) and not isinstance(entry, bool)
            if item == "number" and is_number:
                out.append(float(entry))
            elif item == "integer" and is_number and isinstance(entry, numbers.Integral):
                out.append(int(entry))
            elif item == "rho" and (is_number or isinstance(entry, str)):
                out.append(float(entry) if is_number else entry)
            else:
                raise InputError(f"Entry must be a {item}, got {json_type(entry)}.", pointer=pointer)
        return out

    def section(self, key: str) -> "_Section":
        value, _ = self._raw(key, _REQUIRED)
        return _Section(value, f"{self.pointer}/{key}")

    def finish(self) -> None:
        unknown = sorted(set(self.payload) - self.seen)
        if unknown:
            raise InputError(f"Unknown field {unknown[0]!r}.", pointer=f"{self.pointer}/{unknown[0]}")


def json_type(value: Any) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "a boolean"
    if isinstance(value, numbers.Real):
        return "a number"
    if isinstance(value, str):
        return "a string"
    if isinstance(value, list):
        return "a list"
    if isinstance(value, dict):
        return "an object"
    return type(value).__name__


def parse_family(section: _Section, n_default: Optional[int] = None) -> MatrixFamily:
    kinds = [kind.value for kind in FamilyKind]
    kind = section.string("kind")
    if kind not in kinds:
        raise InputError(f"Unknown family kind {kind!r}; expected one of {kinds}.", pointer=f"{section.pointer}/kind")
    n = section.integer("n", _REQUIRED if n_default is None else n_default)
    family = dict(
        kind=FamilyKind(kind),
        n=n,
        norm_target=section.number("norm_target", 1.0, nullable=True),
        spread=section.number("spread", 0.0),
        path=section.string("path", None, nullable=True),
        seed=section.integer("seed", 0),
    )
    section.finish()
    with _located(section.pointer):
        return MatrixFamily(**family)


def _tail(root: _Section) -> TailCampaignConfig:
    family = parse_family(root.section("family"))
    values = dict(
        family=family,
        rho=root.number("rho"),
        eps_grid=tuple(root.list_of("eps_grid", "number")),
        m=root.integer("m", 0),
        shift_z=root.complex_value("shift_z", 0j),
        trials=root.integer("trials", 4000),
        seed=root.integer("seed", 0),
        scale=root.number("scale", 1.0),
        pair=root.boolean("pair", False),
    )
    root.finish()
    with _located(""):
        return TailCampaignConfig(**values)


def _shatter(root: _Section) -> ShatterCampaignConfig:
    n_list = root.list_of("n_list", "integer")
    if not n_list:
        raise InputError("n_list must not be empty.", pointer="/n_list")
    family = parse_family(root.section("family"), n_default=n_list[0])
    values = dict(
        family=family,
        rho_list=tuple(root.list_of("rho_list", "rho")),
        n_list=tuple(n_list),
        trials=root.integer("trials", 200),
        seed=root.integer("seed", 0),
        scale=root.number("scale", 1.0),
    )
    root.finish()
    with _located(""):
        return ShatterCampaignConfig(**values)


def _area(root: _Section) -> AreaCampaignConfig:
    family = parse_family(root.section("family"))
    values = dict(
        family=family,
        rho=root.number("rho", None, nullable=True),
        eps_grid=tuple(root.list_of("eps_grid", "number")),
        trials=root.integer("trials", 200),
        grid_resolution=root.integer("grid_resolution", 24),
        seed=root.integer("seed", 0),
        scale=root.number("scale", 1.0),
        method=root.string("method", "windows"),
    )
    root.finish()
    with _located(""):
        return AreaCampaignConfig(**values)


def _coupon(root: _Section) -> CouponCampaignConfig:
    values = dict(
        n=root.integer("n"),
        c_list=tuple(root.list_of("c_list", "number")),
        trials=root.integer("trials", 2000),
        seed=root.integer("seed", 0),
    )
    root.finish()
    with _located(""):
        return CouponCampaignConfig(**values)


def _specr(root: _Section) -> SpecrCampaignConfig:
    family = parse_family(root.section("family"))
    values = dict(
        family=family,
        rho=root.number("rho"),
        eps=root.number("eps"),
        delta=root.number("delta"),
        trials=root.integer("trials", 50),
        seed=root.integer("seed", 0),
        k_override=root.integer("k", None, nullable=True),
    )
    root.finish()
    with _located(""):
        return SpecrCampaignConfig(**values)


def _inequalities(root: _Section) -> InequalityCampaignConfig:
    values = dict(
        n=root.integer("n", 8),
        instances=root.integer("instances", 500),
        seed=root.integer("seed", 0),
        eps=root.number("eps", 1e-3),
    )
    root.finish()
    with _located(""):
        return InequalityCampaignConfig(**values)


PARSERS: Dict[str, Callable[[_Section], Any]] = {
    "tail": _tail,
    "shatter": _shatter,
    "area": _area,
    "coupon": _coupon,
    "specr": _specr,
    "inequalities": _inequalities,
}


def parse_campaign(payload: Any):
    root = _Section(payload)
    kind = root.string("campaign")
    if kind not in PARSERS:
        raise InputError(f"Unknown campaign {kind!r}; expected one of {sorted(PARSERS)}.", pointer="/campaign")
    return PARSERS[kind](root)


def load_campaign(path: str):
    return parse_campaign(IO_Agent.read_json(path))
