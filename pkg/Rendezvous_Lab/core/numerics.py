"""
Exact integer mathematics shared by every algorithm in Rendezvous Lab.

Covers the iterated logarithm, base-2 string codecs, the suffix-free
encoding and the Cole-Vishkin colour choice built on top of it.

Bit strings are plain ``str`` objects over '0'/'1' written most significant
bit first, so ``"101"`` is five. Index 0 always refers to the least
significant (rightmost) character.
"""

from errors import PreconditionError, ResourceLimitError


# tower(5) = 2**65536 is the largest tower value ever materialised
MAX_TOWER_LEVEL = 5


def tower(k: int) -> int:
    """
    Return the power tower of height k: tower(0)=1, tower(k)=2**tower(k-1).

    Args:
        k: Tower height, 0 <= k <= MAX_TOWER_LEVEL

    Returns:
        The tower value as an exact integer

    Raises:
        PreconditionError: If k is negative
        ResourceLimitError: If k exceeds MAX_TOWER_LEVEL
    """
    if k < 0:
        raise PreconditionError(f"tower height must be non-negative, got {k}")
    if k > MAX_TOWER_LEVEL:
        raise ResourceLimitError(
            f"tower({k}) is too large to materialise (limit is tower({MAX_TOWER_LEVEL}))"
        )
    value = 1
    for _ in range(k):
        value = 1 << value
    return value


def log_star(n: int) -> int:
    """
    Iterated base-2 logarithm of n.

    Returns 0 for n <= 1 and otherwise the least k with tower(k) >= n. The
    recursion uses ceil(log2 n) == (n - 1).bit_length(), so no tower value is
    ever built and no floating point is involved.

    Args:
        n: Non-negative integer of any size

    Returns:
        log*(n)
    """
    k = 0
    while n > 1:
        n = (n - 1).bit_length()
        k += 1
    return k


def binary_rep(n: int) -> str:
    """
    Base-2 representation of n without leading zeros ("0" for zero).

    Raises:
        PreconditionError: If n is negative
    """
    if n < 0:
        raise PreconditionError(f"binary_rep needs a non-negative integer, got {n}")
    return format(n, "b")


def int_val(s: str) -> int:
    """
    Integer value of a bit string; leading zeros are ignored.

    Raises:
        PreconditionError: If s is empty or contains characters other than 0/1
    """
    if not s or s.strip("01"):
        raise PreconditionError(f"not a bit string: {s!r}")
    return int(s, 2)


def bit_at(s: str, i: int) -> int:
    """Bit of s at LSB-index i (index 0 is the rightmost character)."""
    if not 0 <= i < len(s):
        raise PreconditionError(f"index {i} outside bit string of length {len(s)}")
    return 1 if s[len(s) - 1 - i] == "1" else 0


def encode_sf(s: str) -> str:
    """
    Suffix-free encoding: 0 -> 01, 1 -> 10, then prepend 00.

    In LSB-indexed terms out[2i+1] = s[i], out[2i] = 1 - s[i] and the two
    top positions are 0. No encoded string is a suffix of another.

    Example:
        encode_sf("101") == "00100110"
    """
    if not s or s.strip("01"):
        raise PreconditionError(f"not a bit string: {s!r}")
    return "00" + "".join("10" if bit == "1" else "01" for bit in s)


def decode_sf(s: str) -> str:
    """
    Inverse of encode_sf.

    Raises:
        PreconditionError: If s is not the image of a non-empty bit string
    """
    if len(s) < 4 or len(s) % 2 or not s.startswith("00") or s.strip("01"):
        raise PreconditionError(f"not a suffix-free encoding: {s!r}")
    decoded = []
    for pos in range(2, len(s), 2):
        pair = s[pos:pos + 2]
        if pair == "10":
            decoded.append("1")
        elif pair == "01":
            decoded.append("0")
        else:
            raise PreconditionError(f"not a suffix-free encoding: {s!r}")
    return "".join(decoded)


def _encoded_value(n: int) -> int:
    return int(encode_sf(binary_rep(n)), 2)


def first_diff_index(my: int, other: int) -> int:
    """
    Least LSB-index where the suffix-free encodings of my and other differ.

    The index is at most min(2|my|+1, 2|other|+1) where |x| is the length of
    binary_rep(x), so it is found inside both strings.

    Raises:
        PreconditionError: If my == other
    """
    return _first_diff(my, other)[0]


def _first_diff(my: int, other: int):
    if my == other:
        raise PreconditionError(f"colours must differ, both are {my}")
    my_encoded = _encoded_value(my)
    diff = my_encoded ^ _encoded_value(other)
    return (diff & -diff).bit_length() - 1, my_encoded


def cv_choice(my: int, other: int) -> int:
    """
    Cole-Vishkin colour choice over suffix-free encodings.

    Finds the least index i where the encodings differ and returns the value
    of binary_rep(i) followed by my encoding's bit at i. The result lies in
    {0, ..., 8*lmin + 3} where lmin = len(binary_rep(min(my, other))).

    Args:
        my: Own colour
        other: Parent's colour (0 stands in for a special colour)

    Returns:
        The new colour as a non-negative integer

    Raises:
        PreconditionError: If my == other
    """
    i, my_encoded = _first_diff(my, other)
    my_bit = (my_encoded >> i) & 1
    return int_val(binary_rep(i) + str(my_bit))
