import os
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', '..'))

from hopcrypt.models.base_models import CalibrationTable, CipherKey, DelayParams
from hopcrypt.services.aes_core import expand_key
from hopcrypt.services.block_modes import CbcContext

FIPS_PLAINTEXT = bytes.fromhex("00112233445566778899aabbccddeeff")
FIPS_KEY_128 = bytes.fromhex("000102030405060708090a0b0c0d0e0f")
FIPS_KEY_192 = bytes.fromhex("000102030405060708090a0b0c0d0e0f1011121314151617")
FIPS_KEY_256 = bytes.fromhex("000102030405060708090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f")

NIST_CBC_KEY = bytes.fromhex("2b7e151628aed2a6abf7158809cf4f3c")
NIST_CBC_IV = bytes.fromhex("000102030405060708090a0b0c0d0e0f")
NIST_CBC_PLAINTEXT = bytes.fromhex(
    "6bc1bee22e409f96e93d7e117393172a"
    "ae2d8a571e03ac9c9eb76fac45af8e51"
    "30c81c46a35ce411e5fbc1191a0a52ef"
    "f69f2445df4f9b17ad2b417be66c3710"
)
NIST_CBC_CIPHERTEXT = bytes.fromhex(
    "7649abac8119b246cee98e9b12e9197d"
    "5086cb9b507219ee95db113a917678b2"
    "73bed6b8e3c1743b7116e69e22229516"
    "3ff1caa1681fac09120eca307586e1a7"
)


@pytest.fixture
def aes128_key():
    """FIPS-197 example AES-128 key"""
    return CipherKey.from_octets(FIPS_KEY_128)


@pytest.fixture
def aes128_schedule(aes128_key):
    return expand_key(aes128_key)


@pytest.fixture
def nist_cbc_context():
    """SP 800-38A CBC-AES128 key and IV"""
    return CbcContext.from_key(NIST_CBC_KEY, NIST_CBC_IV)


@pytest.fixture
def calibration():
    """Built-in calibration rows"""
    return CalibrationTable.builtin()


@pytest.fixture
def default_delays():
    """449 ms enc, 456 ms dec, 10 ms transfer, no channel-access delay"""
    return DelayParams()


@pytest.fixture
def aes_oracle():
    """Independent AES implementation from the cryptography package"""
    pytest.importorskip("cryptography")
    from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

    class Oracle:
        @staticmethod
        def ecb_encrypt(key: bytes, block: bytes) -> bytes:
            encryptor = Cipher(algorithms.AES(key), modes.ECB()).encryptor()
            return encryptor.update(block) + encryptor.finalize()

        @staticmethod
        def ecb_decrypt(key: bytes, block: bytes) -> bytes:
            decryptor = Cipher(algorithms.AES(key), modes.ECB()).decryptor()
            return decryptor.update(block) + decryptor.finalize()

        @staticmethod
        def cbc_encrypt(key: bytes, iv: bytes, data: bytes) -> bytes:
            encryptor = Cipher(algorithms.AES(key), modes.CBC(iv)).encryptor()
            return encryptor.update(data) + encryptor.finalize()

        @staticmethod
        def cbc_decrypt(key: bytes, iv: bytes, data: bytes) -> bytes:
            decryptor = Cipher(algorithms.AES(key), modes.CBC(iv)).decryptor()
            return decryptor.update(data) + decryptor.finalize()

    return Oracle()
