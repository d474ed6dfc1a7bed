import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from relcode.codecs import (
    ArithmeticDecoder,
    ArithmeticEncoder,
    BitReader,
    Bits,
    DecodeError,
    OutOfRange,
    Unfittable,
    ZetaModel,
    delta_length,
    deserialize,
    elias_delta_decode,
    elias_delta_encode,
    elias_gamma_decode,
    elias_gamma_encode,
    encode_dyadic_payload,
    encode_global_payload,
    encode_payload,
    encode_sample_payload,
    decode_payload,
    fit_zeta,
    gamma_length,
    quantize_p0,
    serialize,
    zeta_decode,
    zeta_encode,
)
from relcode.distributions import gaussian_pair_for_targets
from relcode.engine import SplitRule, decode, encode, encode_batch
from relcode.randomness import derive_seeds

PAIR = gaussian_pair_for_targets(3.0, 5.0)


class TestBits:
    def test_round_trip_01(self):
        b = Bits.from01("0110100")
        assert b.to01() == "0110100"
        assert len(b) == 7
        assert list(b) == [0, 1, 1, 0, 1, 0, 0]

    def test_concat_associative(self):
        a, b, c = Bits.from01("01"), Bits.from01("1"), Bits.from01("001")
        assert (a + b) + c == a + (b + c)

    def test_bytes_round_trip(self):
        b = Bits.from01("101100111000101")
        packed = b.to_bytes()
        assert len(packed) == 2
        assert Bits.from_bytes(packed, nbits=len(b)) == b

    def test_reader_exhaustion(self):
        r = BitReader(Bits.from01("1"))
        assert r.read_bit() == 1
        with pytest.raises(DecodeError):
            r.read_bit()

    def test_rejects_non_bits(self):
        with pytest.raises(ValueError):
            Bits([0, 2])


class TestElias:
    def test_gamma_reference_values(self):
        assert elias_gamma_encode(1).to01() == "1"
        assert elias_gamma_encode(2).to01() == "010"
        assert elias_gamma_encode(5).to01() == "00101"

    def test_delta_reference_values(self):
        assert elias_delta_encode(1).to01() == "1"
        assert elias_delta_encode(17).to01() == "001010001"

    def test_rejects_nonpositive(self):
        for bad in (0, -3):
            with pytest.raises(ValueError):
                elias_gamma_encode(bad)
            with pytest.raises(ValueError):
                elias_delta_encode(bad)

    def test_truncated_stream(self):
        with pytest.raises(DecodeError):
            elias_gamma_decode(BitReader(Bits.from01("001")))

    @given(st.integers(1, 10**5))
    def test_round_trip_and_lengths(self, n):
        g = elias_gamma_encode(n)
        assert len(g) == gamma_length(n) == 2 * math.floor(math.log2(n)) + 1
        r = BitReader(g)
        assert elias_gamma_decode(r) == n and r.remaining == 0
        d = elias_delta_encode(n)
        lg = math.floor(math.log2(n))
        assert len(d) == delta_length(n) == lg + 2 * math.floor(math.log2(lg + 1)) + 1
        r = BitReader(d)
        assert elias_delta_decode(r) == n and r.remaining == 0

    def test_prefix_free_concatenation(self):
        rng = np.random.default_rng(0)
        values = [int(v) for v in rng.integers(1, 10**6, 100)]
        for enc, dec in (
            (elias_gamma_encode, elias_gamma_decode),
            (elias_delta_encode, elias_delta_decode),
        ):
            stream = Bits()
            for v in values:
                stream = stream + enc(v)
            reader = BitReader(stream)
            assert [dec(reader) for _ in values] == values
            assert reader.remaining == 0


class TestArithmeticCoder:
    def test_overhead_bound(self):
        rng = np.random.default_rng(1)
        for _ in range(300):
            k = int(rng.integers(1, 60))
            probs = rng.random(k) * 0.98 + 0.01
            bits = (rng.random(k) < probs).astype(int)  # correlated with model
            enc = ArithmeticEncoder()
            ideal = 0.0
            for b, p in zip(bits, probs):
                enc.encode_bit(int(b), quantize_p0(p))
                ideal += -math.log2(p if b == 0 else 1.0 - p)
            code = enc.finish()
            assert len(code) <= ideal + 2.0 + 1e-9

    def test_decode_exact_consumption_with_tail(self):
        rng = np.random.default_rng(2)
        for trial in range(300):
            k = int(rng.integers(1, 50))
            probs = rng.random(k) * 0.98 + 0.01
            bits = [int(b) for b in rng.random(k) < 0.5]
            enc = ArithmeticEncoder()
            for b, p in zip(bits, probs):
                enc.encode_bit(b, quantize_p0(p))
            code = enc.finish()
            tail = Bits([int(b) for b in rng.random(int(rng.integers(0, 40))) < 0.5])
            reader = BitReader(code + tail)
            dec = ArithmeticDecoder(reader)
            assert [dec.decode_bit(quantize_p0(p)) for p in probs] == bits
            assert dec.bits_consumed() == len(code)
            reader.advance(dec.bits_consumed())
            assert reader.tail() == tail

    def test_general_intervals(self):
        cum = [0, 5, 9, 40, 100]
        rng = np.random.default_rng(3)
        syms = [int(s) for s in rng.integers(0, 4, 500)]
        enc = ArithmeticEncoder()
        for s in syms:
            enc.encode(cum[s], cum[s + 1], 100)
        code = enc.finish()
        dec = ArithmeticDecoder(BitReader(code))
        out = []
        for _ in syms:
            v = dec.decode_target(100)
            s = max(i for i in range(4) if cum[i] <= v)
            dec.consume(cum[s], cum[s + 1], 100)
            out.append(s)
        assert out == syms


class TestZeta:
    def test_normalizer_against_dense_sum(self):
        # independent reference: dense summation to 2**22 plus an integral
        # remainder bounded below 1e-7
        lam = 1.7
        n = np.arange(1, 1 << 22, dtype=np.float64)
        dense = float((n ** -lam).sum())
        a = float(1 << 22) - 0.5
        remainder = a ** (1 - lam) / (lam - 1)
        model = ZetaModel(lam, n_max=1 << 62)
        # the model truncates at n_max; the reference sums everything, and
        # the strict-truncation difference is below the quadrature slack
        assert model._norm == pytest.approx(dense + remainder, abs=2e-6)

    def test_mean_log_fit_against_dense_sum(self):
        model = fit_zeta([1.0] * 5)
        lam = model.exponent
        n = np.arange(1, 1 << 22, dtype=np.float64)
        w = n ** -lam
        dense_mean = float((w * np.log2(n)).sum() / w.sum())
        assert dense_mean == pytest.approx(1.0, abs=1e-4)
        assert model.mean_log2() == pytest.approx(1.0, abs=1e-6)

    def test_degenerate_point_mass(self):
        model = fit_zeta([0.0] * 8)
        assert model.exponent == 20.0
        assert len(zeta_encode(1, model)) <= 2

    def test_unfittable(self):
        with pytest.raises(Unfittable):
            fit_zeta([55.0] * 3)

    def test_out_of_range(self):
        model = ZetaModel(2.0)
        with pytest.raises(OutOfRange):
            zeta_encode(model.n_max + 1, model)

    def test_codeword_length_bound(self):
        model = ZetaModel(2.0)
        assert len(zeta_encode(1, model)) <= -math.log2(model.pmf(1)) + 2

    def test_normalized_to_machine_precision(self):
        for lam in (1.05, 1.7, 4.0, 20.0):
            model = ZetaModel(lam)
            assert abs(model.cdf_before(model.n_max + 1) - 1.0) < 1e-12

    def test_round_trip_fitted_models(self):
        rng = np.random.default_rng(4)
        fits = [
            fit_zeta(rng.uniform(0.0, 2.0, 200)),
            fit_zeta(rng.uniform(0.5, 4.0, 200)),
            fit_zeta(rng.uniform(2.0, 8.0, 200)),
        ]
        for model in fits:
            for n in list(range(1, 200)) + [10**3, 10**4]:
                reader = BitReader(zeta_encode(n, model))
                assert zeta_decode(reader, model) == n
                assert reader.remaining == 0

    def test_prefix_free_stream(self):
        model = fit_zeta(np.random.default_rng(5).uniform(0.0, 3.0, 100))
        values = [int(v) for v in model.sample(np.random.default_rng(6), 100)]
        stream = Bits()
        for v in values:
            stream = stream + zeta_encode(v, model)
        reader = BitReader(stream)
        assert [zeta_decode(reader, model) for _ in values] == values
        assert reader.remaining == 0

    def test_expected_length_within_two_bits_of_entropy(self):
        model = fit_zeta(np.random.default_rng(7).uniform(0.2, 2.5, 500))
        draws = model.sample(np.random.default_rng(8), 100_000)
        lengths = np.fromiter(
            (len(zeta_encode(int(n), model)) for n in draws), dtype=float
        )
        assert lengths.mean() <= model.entropy_bits() + 2.0

    def test_fitted_model_beats_delta_on_low_divergence_indices(self):
        # amortized cost (-log2 pmf, what a joint arithmetic coder pays per
        # symbol) under the fitted model, against self-delimiting delta
        # codes, on real encoder indices in the many-small-dimensions regime
        pair = gaussian_pair_for_targets(0.2, 1.1)
        seeds = derive_seeds(77, 0, 20, 10_000)
        out = encode_batch(pair, SplitRule.DYADIC, seeds)
        idx = [int(i) for i in out.heap_indices]
        model = fit_zeta(np.log2(np.asarray(idx, dtype=float)))
        amortized = np.mean([-math.log2(model.pmf(n)) for n in idx])
        delta_mean = np.mean([len(elias_delta_encode(n)) for n in idx])
        assert amortized <= delta_mean


class TestPayloads:
    def test_global_payload(self):
        assert encode_global_payload(0).to01() == "1"
        reader = BitReader(encode_global_payload(9))
        assert decode_payload(reader, SplitRule.GLOBAL) == (9, 512)

    def test_dyadic_reference(self):
        # depth 3, index 13 (path 101): gamma(4) ++ 101
        payload = encode_dyadic_payload(3, 13)
        assert payload.to01() == "00100" + "101"
        assert len(payload) == 8
        assert decode_payload(BitReader(payload), SplitRule.DYADIC) == (3, 13)

    def test_zero_depth_is_one_bit(self):
        assert len(encode_dyadic_payload(0, 1)) == 1
        assert len(encode_sample_payload(0, 1, seed=3)) == 1

    def test_depth_mismatch_rejected(self):
        with pytest.raises(ValueError):
            encode_dyadic_payload(2, 13)

    @pytest.mark.parametrize("rule", list(SplitRule))
    def test_round_trip_with_tail(self, rule):
        rng = np.random.default_rng(9)
        for seed in range(300):
            res = encode(PAIR, rule, seed)
            payload = encode_payload(res)
            tail = Bits([int(b) for b in rng.random(11) < 0.5])
            reader = BitReader(payload + tail)
            depth_, index_ = decode_payload(reader, rule, seed=seed)
            assert (depth_, index_) == (res.depth, res.heap_index)
            assert reader.tail() == tail

    def test_sample_payload_len_tracks_path_cost(self):
        # arithmetic-coded bound sequence: within 2+1 bits of -log2 P(S_D)
        seeds = derive_seeds(21, 2, 0, 300)
        for s in seeds[:300]:
            res = encode(PAIR, SplitRule.SAMPLE, int(s))
            payload = encode_sample_payload(res.depth, res.heap_index, int(s))
            ac_bits = len(payload) - gamma_length(res.depth + 1)
            ideal = -math.log2(res.proposal_mass)
            if res.depth:
                assert ac_bits <= ideal + 3.0


class TestContainer:
    @pytest.mark.parametrize("rule", list(SplitRule))
    def test_serialize_deserialize(self, rule):
        for seed in range(100):
            res = encode(PAIR, rule, seed)
            blob = serialize(res)
            rule2, depth2, index2, end = deserialize(blob, seed=seed)
            assert (rule2, depth2, index2) == (res.rule, res.depth, res.heap_index)
            assert end == len(blob)
            assert decode(PAIR.proposal, rule2, seed, index2) == res.sample

    def test_bad_magic(self):
        res = encode(PAIR, SplitRule.DYADIC, 5)
        blob = serialize(res)
        corrupted = Bits([1 - blob[0]]) + blob[1:]
        with pytest.raises(DecodeError):
            deserialize(corrupted, seed=5)

    def test_bytes_round_trip_with_padding(self):
        res = encode(PAIR, SplitRule.DYADIC, 11)
        blob = serialize(res)
        packed = blob.to_bytes()
        recovered = Bits.from_bytes(packed)  # includes zero padding
        rule2, depth2, index2, _ = deserialize(recovered, seed=11)
        assert (rule2, depth2, index2) == (res.rule, res.depth, res.heap_index)
