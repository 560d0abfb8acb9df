"""
Rijndael / AES block cipher, written out transformation by transformation.

The State is a 4x4 octet matrix filled column by column from the 16-octet
block (octet i lands in row i % 4, column i // 4). Tables are plain lookups:
this module is a performance-model testbed and makes no constant-time claims,
do not use it to protect real data.
"""
from typing import Iterable, List, Sequence, Tuple, Union

from hopcrypt.models.base_models import BLOCK_SIZE, NB, AesParams, AesVariant, CipherKey, RoundDirection
from hopcrypt.models.errors import BlockLengthError, ScheduleMismatchError


REDUCTION_POLY = 0x11B
AFFINE_CONSTANT = 0x63


# ============= GF(2^8) ARITHMETIC =============

def xtime(a: int) -> int:
    """Multiply by x (i.e. {02}) modulo x^8 + x^4 + x^3 + x + 1"""
    a <<= 1
    if a & 0x100:
        a ^= REDUCTION_POLY
    return a & 0xFF


def gf_mul(a: int, b: int) -> int:
    result = 0
    while b:
        if b & 1:
            result ^= a
        a = xtime(a)
        b >>= 1
    return result


def gf_inverse(a: int) -> int:
    """Multiplicative inverse, with 0 mapped to 0"""
    if a == 0:
        return 0
    # a^254 = a^-1 in GF(2^8)
    result, base, exponent = 1, a, 254
    while exponent:
        if exponent & 1:
            result = gf_mul(result, base)
        base = gf_mul(base, base)
        exponent >>= 1
    return result


def _rotl8(x: int, shift: int) -> int:
    return ((x << shift) | (x >> (8 - shift))) & 0xFF


class SBoxTables:
    """Forward and inverse substitution tables"""

    __slots__ = ("forward", "inverse")

    def __init__(self, forward: Sequence[int], inverse: Sequence[int]):
        if len(forward) != 256 or len(inverse) != 256:
            raise ValueError("S-box tables must have 256 entries")
        self.forward: Tuple[int, ...] = tuple(forward)
        self.inverse: Tuple[int, ...] = tuple(inverse)

    @classmethod
    def generate(cls) -> 'SBoxTables':
        """Build the tables from the field inverse followed by the affine transform"""
        forward = [0] * 256
        for x in range(256):
            b = gf_inverse(x)
            forward[x] = (
                b ^ _rotl8(b, 1) ^ _rotl8(b, 2) ^ _rotl8(b, 3) ^ _rotl8(b, 4) ^ AFFINE_CONSTANT
            )
        inverse = [0] * 256
        for x, y in enumerate(forward):
            inverse[y] = x
        return cls(forward, inverse)

    def is_bijection(self) -> bool:
        return sorted(self.forward) == list(range(256)) and all(
            self.inverse[self.forward[x]] == x for x in range(256)
        )


SBOX = SBoxTables.generate()
_FWD = SBOX.forward
_INV = SBOX.inverse

_MUL2 = tuple(gf_mul(x, 0x02) for x in range(256))
_MUL3 = tuple(gf_mul(x, 0x03) for x in range(256))
_MUL9 = tuple(gf_mul(x, 0x09) for x in range(256))
_MUL11 = tuple(gf_mul(x, 0x0B) for x in range(256))
_MUL13 = tuple(gf_mul(x, 0x0D) for x in range(256))
_MUL14 = tuple(gf_mul(x, 0x0E) for x in range(256))


def _round_constants(count: int) -> Tuple[int, ...]:
    rcon = [0x00, 0x01]
    while len(rcon) <= count:
        rcon.append(xtime(rcon[-1]))
    return tuple(rcon)


# Rcon[i] for i >= 1; AES-128 is the deepest user at i = 10
RCON = _round_constants(10)


# ============= STATE =============

class AesState:
    """Immutable 4x4 octet matrix, stored column-major as 16 ints"""

    __slots__ = ("cells",)

    def __init__(self, cells: Iterable[int]):
        cells = tuple(cells)
        if len(cells) != BLOCK_SIZE:
            raise BlockLengthError(f"State must hold {BLOCK_SIZE} octets, got {len(cells)}")
        object.__setattr__(self, "cells", cells)

    def __setattr__(self, name, value):
        raise AttributeError("AesState is immutable")

    @classmethod
    def from_block(cls, block: bytes) -> 'AesState':
        return cls(block)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> 'AesState':
        return cls(rows[i % 4][i // 4] for i in range(BLOCK_SIZE))

    def to_block(self) -> bytes:
        return bytes(self.cells)

    def cell(self, row: int, col: int) -> int:
        return self.cells[row + 4 * col]

    def row(self, r: int) -> List[int]:
        return [self.cells[r + 4 * c] for c in range(4)]

    def column(self, c: int) -> List[int]:
        return list(self.cells[4 * c:4 * c + 4])

    def __xor__(self, other: 'AesState') -> 'AesState':
        return AesState(a ^ b for a, b in zip(self.cells, other.cells))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, AesState) and self.cells == other.cells

    def __hash__(self) -> int:
        return hash(self.cells)

    def __repr__(self) -> str:
        return f"AesState({self.to_block().hex()})"


# ============= ROUND TRANSFORMATIONS =============
# The underscored forms work in place on a 16-int list and are what the
# block functions use; the public forms wrap them around AesState.

def _sub_bytes(s: List[int], table: Tuple[int, ...]) -> None:
    for i in range(BLOCK_SIZE):
        s[i] = table[s[i]]


def _shift_rows(s: List[int]) -> None:
    # row r rotates left by r columns
    s[1], s[5], s[9], s[13] = s[5], s[9], s[13], s[1]
    s[2], s[6], s[10], s[14] = s[10], s[14], s[2], s[6]
    s[3], s[7], s[11], s[15] = s[15], s[3], s[7], s[11]


def _inv_shift_rows(s: List[int]) -> None:
    s[1], s[5], s[9], s[13] = s[13], s[1], s[5], s[9]
    s[2], s[6], s[10], s[14] = s[10], s[14], s[2], s[6]
    s[3], s[7], s[11], s[15] = s[7], s[11], s[15], s[3]


def _mix_columns(s: List[int]) -> None:
    for c in range(0, BLOCK_SIZE, 4):
        a0, a1, a2, a3 = s[c], s[c + 1], s[c + 2], s[c + 3]
        s[c] = _MUL2[a0] ^ _MUL3[a1] ^ a2 ^ a3
        s[c + 1] = a0 ^ _MUL2[a1] ^ _MUL3[a2] ^ a3
        s[c + 2] = a0 ^ a1 ^ _MUL2[a2] ^ _MUL3[a3]
        s[c + 3] = _MUL3[a0] ^ a1 ^ a2 ^ _MUL2[a3]


def _inv_mix_columns(s: List[int]) -> None:
    for c in range(0, BLOCK_SIZE, 4):
        a0, a1, a2, a3 = s[c], s[c + 1], s[c + 2], s[c + 3]
        s[c] = _MUL14[a0] ^ _MUL11[a1] ^ _MUL13[a2] ^ _MUL9[a3]
        s[c + 1] = _MUL9[a0] ^ _MUL14[a1] ^ _MUL11[a2] ^ _MUL13[a3]
        s[c + 2] = _MUL13[a0] ^ _MUL9[a1] ^ _MUL14[a2] ^ _MUL11[a3]
        s[c + 3] = _MUL11[a0] ^ _MUL13[a1] ^ _MUL9[a2] ^ _MUL14[a3]


def _add_round_key(s: List[int], round_key: bytes) -> None:
    for i in range(BLOCK_SIZE):
        s[i] ^= round_key[i]


def sub_bytes(state: AesState, direction: RoundDirection = RoundDirection.FORWARD) -> AesState:
    cells = list(state.cells)
    _sub_bytes(cells, _INV if direction == RoundDirection.INVERSE else _FWD)
    return AesState(cells)


def shift_rows(state: AesState, direction: RoundDirection = RoundDirection.FORWARD) -> AesState:
    cells = list(state.cells)
    if direction == RoundDirection.INVERSE:
        _inv_shift_rows(cells)
    else:
        _shift_rows(cells)
    return AesState(cells)


def mix_columns(state: AesState, direction: RoundDirection = RoundDirection.FORWARD) -> AesState:
    cells = list(state.cells)
    if direction == RoundDirection.INVERSE:
        _inv_mix_columns(cells)
    else:
        _mix_columns(cells)
    return AesState(cells)


def add_round_key(state: AesState, round_key: bytes) -> AesState:
    if len(round_key) != BLOCK_SIZE:
        raise BlockLengthError(f"Round key must be {BLOCK_SIZE} octets, got {len(round_key)}")
    cells = list(state.cells)
    _add_round_key(cells, round_key)
    return AesState(cells)


# ============= KEY SCHEDULE =============

def _sub_word(word: int) -> int:
    return (
        (_FWD[(word >> 24) & 0xFF] << 24)
        | (_FWD[(word >> 16) & 0xFF] << 16)
        | (_FWD[(word >> 8) & 0xFF] << 8)
        | _FWD[word & 0xFF]
    )


def _rot_word(word: int) -> int:
    return ((word << 8) & 0xFFFFFFFF) | (word >> 24)


class KeySchedule:
    """Expanded key: Nr + 1 round keys of 16 octets, immutable once built"""

    __slots__ = ("params", "words", "round_keys")

    def __init__(self, params: AesParams, words: Sequence[int]):
        expected = NB * (params.nr + 1)
        if len(words) != expected:
            raise ScheduleMismatchError(
                f"Schedule for Nr={params.nr} needs {expected} words, got {len(words)}"
            )
        words = tuple(words)
        round_keys = tuple(
            b"".join(w.to_bytes(4, "big") for w in words[NB * r:NB * r + NB])
            for r in range(params.nr + 1)
        )
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "words", words)
        object.__setattr__(self, "round_keys", round_keys)

    def __setattr__(self, name, value):
        raise AttributeError("KeySchedule is immutable")

    @property
    def rounds(self) -> int:
        return self.params.nr

    def __len__(self) -> int:
        return len(self.round_keys)


def expand_key(key: Union[CipherKey, bytes]) -> KeySchedule:
    """KeyExpansion: derive the Nr + 1 round keys from the cipher key"""
    if not isinstance(key, CipherKey):
        key = CipherKey.from_octets(bytes(key))
    params = AesParams.for_variant(key.variant)
    nk = params.nk
    words = [int.from_bytes(key.octets[4 * i:4 * i + 4], "big") for i in range(nk)]
    for i in range(nk, NB * (params.nr + 1)):
        temp = words[i - 1]
        if i % nk == 0:
            temp = _sub_word(_rot_word(temp)) ^ (RCON[i // nk] << 24)
        elif nk > 6 and i % nk == 4:
            temp = _sub_word(temp)
        words.append(words[i - nk] ^ temp)
    return KeySchedule(params, words)


# ============= BLOCK CIPHER =============

def _check_inputs(block: bytes, schedule: KeySchedule) -> None:
    if len(block) != BLOCK_SIZE:
        raise BlockLengthError(f"Block must be {BLOCK_SIZE} octets, got {len(block)}")
    if len(schedule.round_keys) != schedule.params.nr + 1:
        raise ScheduleMismatchError(
            f"Schedule has {len(schedule.round_keys)} round keys, expected {schedule.params.nr + 1}"
        )


def encrypt_block(plaintext: bytes, schedule: KeySchedule) -> bytes:
    _check_inputs(plaintext, schedule)
    round_keys = schedule.round_keys
    nr = schedule.params.nr
    s = list(plaintext)
    _add_round_key(s, round_keys[0])
    for r in range(1, nr):
        _sub_bytes(s, _FWD)
        _shift_rows(s)
        _mix_columns(s)
        _add_round_key(s, round_keys[r])
    # final round has no MixColumns
    _sub_bytes(s, _FWD)
    _shift_rows(s)
    _add_round_key(s, round_keys[nr])
    return bytes(s)


def decrypt_block(ciphertext: bytes, schedule: KeySchedule) -> bytes:
    """Inverse cipher: inverse transformations applied in reverse order"""
    _check_inputs(ciphertext, schedule)
    round_keys = schedule.round_keys
    nr = schedule.params.nr
    s = list(ciphertext)
    _add_round_key(s, round_keys[nr])
    for r in range(nr - 1, 0, -1):
        _inv_shift_rows(s)
        _sub_bytes(s, _INV)
        _add_round_key(s, round_keys[r])
        _inv_mix_columns(s)
    _inv_shift_rows(s)
    _sub_bytes(s, _INV)
    _add_round_key(s, round_keys[0])
    return bytes(s)


class AesCipher:
    """A cipher key bound to its expanded schedule"""

    def __init__(self, key: Union[CipherKey, bytes]):
        self.key = key if isinstance(key, CipherKey) else CipherKey.from_octets(bytes(key))
        self.schedule = expand_key(self.key)

    @property
    def variant(self) -> AesVariant:
        return self.key.variant

    def encrypt_block(self, plaintext: bytes) -> bytes:
        return encrypt_block(plaintext, self.schedule)

    def decrypt_block(self, ciphertext: bytes) -> bytes:
        return decrypt_block(ciphertext, self.schedule)
