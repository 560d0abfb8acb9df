"""
Cipher Block Chaining over the AES block functions.

Blocks of one message are processed strictly in order: each ciphertext block
feeds the next block's input, so a single message cannot be encrypted in
parallel. Contexts are immutable and safe to share between threads.
"""
from typing import Union

from hopcrypt.models.base_models import BLOCK_SIZE, CipherKey, PaddingPolicy
from hopcrypt.models.errors import BlockLengthError, HopcryptError, PaddingError
from hopcrypt.services.aes_core import KeySchedule, decrypt_block, encrypt_block, expand_key



def count_blocks(length: int) -> int:
    return length // BLOCK_SIZE


def pkcs7_pad(data: bytes) -> bytes:
    pad = BLOCK_SIZE - len(data) % BLOCK_SIZE
    return data + bytes([pad]) * pad


def pkcs7_unpad(data: bytes) -> bytes:
    if not data or len(data) % BLOCK_SIZE:
        raise PaddingError(f"Padded data length {len(data)} is not a positive multiple of {BLOCK_SIZE}")
    pad = data[-1]
    if pad < 1 or pad > BLOCK_SIZE or data[-pad:] != bytes([pad]) * pad:
        raise PaddingError("Malformed PKCS#7 padding")
    return data[:-pad]


def _xor(a: bytes, b: bytes) -> bytes:
    return bytes(x ^ y for x, y in zip(a, b))


def _check_block_multiple(data: bytes, what: str) -> None:
    if not data or len(data) % BLOCK_SIZE:
        raise BlockLengthError(
            f"{what} length {len(data)} is not a positive multiple of {BLOCK_SIZE} octets"
        )


class CbcContext:
    """Key schedule plus initialization vector"""

    __slots__ = ("schedule", "iv")

    def __init__(self, schedule: KeySchedule, iv: bytes):
        if len(iv) != BLOCK_SIZE:
            raise BlockLengthError(f"IV must be exactly {BLOCK_SIZE} octets, got {len(iv)}")
        object.__setattr__(self, "schedule", schedule)
        object.__setattr__(self, "iv", bytes(iv))

    def __setattr__(self, name, value):
        raise AttributeError("CbcContext is immutable")

    @classmethod
    def from_key(cls, key: Union[CipherKey, bytes], iv: bytes) -> 'CbcContext':
        return cls(expand_key(key), iv)

    @classmethod
    def from_hex(cls, key_hex: str, iv_hex: str) -> 'CbcContext':
        """Build a context from the lowercase hex strings used at the CLI boundary"""
        try:
            key = bytes.fromhex(key_hex.strip())
            iv = bytes.fromhex(iv_hex.strip())
        except ValueError as e:
            raise HopcryptError(f"Key and IV must be hexadecimal: {e}") from None
        return cls(expand_key(CipherKey.from_octets(key)), iv)


def cbc_encrypt(
    ctx: CbcContext,
    plaintext: bytes,
    padding: PaddingPolicy = PaddingPolicy.NONE_REQUIRED,
) -> bytes:
    """c[0] = E(p[0] ^ iv); c[i] = E(p[i] ^ c[i-1])"""
    if padding == PaddingPolicy.PKCS7:
        plaintext = pkcs7_pad(plaintext)
    _check_block_multiple(plaintext, "Plaintext")

    schedule = ctx.schedule
    previous = ctx.iv
    out = bytearray()
    for offset in range(0, len(plaintext), BLOCK_SIZE):
        block = plaintext[offset:offset + BLOCK_SIZE]
        previous = encrypt_block(_xor(block, previous), schedule)
        out += previous
    return bytes(out)


def cbc_decrypt(
    ctx: CbcContext,
    ciphertext: bytes,
    padding: PaddingPolicy = PaddingPolicy.NONE_REQUIRED,
) -> bytes:
    """p[i] = D(c[i]) ^ c[i-1], with c[-1] = iv"""
    _check_block_multiple(ciphertext, "Ciphertext")

    schedule = ctx.schedule
    previous = ctx.iv
    out = bytearray()
    for offset in range(0, len(ciphertext), BLOCK_SIZE):
        block = ciphertext[offset:offset + BLOCK_SIZE]
        out += _xor(decrypt_block(block, schedule), previous)
        previous = block
    if padding == PaddingPolicy.PKCS7:
        return pkcs7_unpad(bytes(out))
    return bytes(out)
