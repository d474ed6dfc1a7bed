"""Bit-level serialization: universal integer codes, arithmetic coding,
power-law index models, and the rule-tagged code container."""

from .bits import Bits, BitReader, DecodeError
from .elias import (
    elias_gamma_encode,
    elias_gamma_decode,
    elias_delta_encode,
    elias_delta_decode,
    gamma_length,
    delta_length,
)
from .arith import ArithmeticEncoder, ArithmeticDecoder, PrecisionExhausted, quantize_p0
from .zeta import ZetaModel, Unfittable, OutOfRange, fit_zeta, zeta_encode, zeta_decode
from .stream import (
    serialize,
    deserialize,
    encode_payload,
    decode_payload,
    encode_global_payload,
    decode_global_payload,
    encode_dyadic_payload,
    decode_dyadic_payload,
    encode_sample_payload,
    decode_sample_payload,
    payload_length,
)

__all__ = [
    "Bits",
    "BitReader",
    "DecodeError",
    "elias_gamma_encode",
    "elias_gamma_decode",
    "elias_delta_encode",
    "elias_delta_decode",
    "gamma_length",
    "delta_length",
    "ArithmeticEncoder",
    "ArithmeticDecoder",
    "PrecisionExhausted",
    "quantize_p0",
    "ZetaModel",
    "Unfittable",
    "OutOfRange",
    "fit_zeta",
    "zeta_encode",
    "zeta_decode",
    "serialize",
    "deserialize",
    "encode_payload",
    "decode_payload",
    "encode_global_payload",
    "decode_global_payload",
    "encode_dyadic_payload",
    "decode_dyadic_payload",
    "encode_sample_payload",
    "decode_sample_payload",
    "payload_length",
]
