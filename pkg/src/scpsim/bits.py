"""Bit-string helpers. Bit strings are written most-significant first, so
position 0 of ``"100"`` is qubit/variable 0 and the integer value is 4."""


def to_int(bits):
    if isinstance(bits, str):
        if bits == "" or set(bits) - {"0", "1"}:
            raise ValueError(f"not a bit string: {bits!r}")
        return int(bits, 2)
    return int(bits)


def to_bits(value, width):
    if value < 0 or value >> width:
        raise ValueError(f"{value} does not fit in {width} bits")
    return format(value, f"0{width}b") if width else ""


def weight(value):
    return int(value).bit_count()


def bit_at(value, index, width):
    """Bit ``index`` (0 = most significant) of a ``width``-bit value."""
    return (value >> (width - 1 - index)) & 1


def mask_of(indices, width):
    """Integer with the given MSB-first positions set."""
    out = 0
    for i in indices:
        out |= 1 << (width - 1 - i)
    return out


def positions(value, width):
    """MSB-first positions of the set bits."""
    return [i for i in range(width) if (value >> (width - 1 - i)) & 1]
