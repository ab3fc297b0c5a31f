"""Currency parsing and labelling."""

from __future__ import annotations

import re
from decimal import ROUND_HALF_EVEN, Decimal, InvalidOperation

_SUFFIXES = {
    "": Decimal(1),
    "k": Decimal(1_000),
    "m": Decimal(1_000_000),
    "mn": Decimal(1_000_000),
    "bn": Decimal(1_000_000_000),
}
_CURRENCY = re.compile(r"^\s*(-?)\$?\s*([0-9][0-9_,]*\.?[0-9]*(?:[eE][-+]?[0-9]+)?)\s*([a-zA-Z]*)\s*$")


def parse_cents(text) -> int:
    """Parse ``"1.25mn"``, ``"500k"``, ``"53.1e6"``, ``"$2,000"`` or a number into integer cents."""
    if isinstance(text, bool):
        raise ValueError(f"not a currency amount: {text!r}")
    if isinstance(text, int):
        return text * 100
    if isinstance(text, float):
        text = repr(text)
    m = _CURRENCY.match(str(text))
    if not m:
        raise ValueError(f"not a currency amount: {text!r}")
    sign, number, suffix = m.groups()
    suffix = suffix.lower()
    if suffix not in _SUFFIXES:
        raise ValueError(f"unknown currency suffix {suffix!r} in {text!r}")
    try:
        amount = Decimal(number.replace("_", "").replace(",", "")) * _SUFFIXES[suffix] * 100
    except InvalidOperation as exc:
        raise ValueError(f"not a currency amount: {text!r}") from exc
    cents = int(amount.quantize(Decimal(1), rounding=ROUND_HALF_EVEN))
    return -cents if sign else cents


def parse_currency(text) -> float:
    """Currency amount in dollars, exact to the cent."""
    return parse_cents(text) / 100


def money_label(amount: float) -> str:
    """Short label: 500000 -> '500k', 1.25e6 -> '1.25mn'."""
    if abs(amount) >= 1e6:
        return f"{amount / 1e6:g}mn"
    if abs(amount) >= 1e3:
        return f"{amount / 1e3:g}k"
    return f"{amount:g}"
