"""Reference implementations written independently of the package code."""

from __future__ import annotations


def to_base(value: int, base: int) -> str:
    """Digits of ``value`` in ``base`` by repeated division."""
    if value == 0:
        return "0"
    digits = []
    while value:
        value, digit = divmod(value, base)
        digits.append("0123456789"[digit])
    return "".join(reversed(digits))


def octal_digits_value(digits: str) -> int:
    """Horner evaluation, one octal digit at a time."""
    acc = 0
    for ch in digits:
        d = ord(ch) - ord("0")
        assert 0 <= d <= 7, ch
        acc = acc * 8 + d
    return acc


def octal_literal_rewrite(literal: str) -> str:
    """What an octal literal should become: decimal for B, CHR(decimal) for C."""
    decimal = to_base(octal_digits_value(literal[:-1]), 10)
    return decimal if literal.endswith("B") else f"CHR({decimal})"
