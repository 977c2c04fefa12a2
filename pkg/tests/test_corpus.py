import numpy as np
import pytest

from xppgpca.corpus import (
    AudioBuffer,
    FeatureBundle,
    load_manifest,
    read_feature_file,
    read_wav,
    write_feature_file,
    write_wav,
)
from xppgpca.errors import AudioError, FeatureFileError, ManifestError

from conftest import SR, make_manifest


class TestManifest:
    def test_three_rows_in_order(self, tmp_path):
        path = make_manifest(
            tmp_path,
            [{"utterance_id": f"u{i}", "rating": str(i + 1)} for i in range(3)],
        )
        records = load_manifest(path)
        assert [r.utterance_id for r in records] == ["u0", "u1", "u2"]
        assert [r.rating for r in records] == [1.0, 2.0, 3.0]

    def test_duplicate_id_rejected(self, tmp_path):
        path = make_manifest(tmp_path, [{"utterance_id": "dup"}, {"utterance_id": "dup"}])
        with pytest.raises(ManifestError, match="dup"):
            load_manifest(path)

    def test_empty_rating_is_absent(self, tmp_path):
        path = make_manifest(tmp_path, [{"utterance_id": "u0", "rating": ""}])
        assert load_manifest(path)[0].rating is None

    def test_missing_wav_names_utterance(self, tmp_path):
        path = make_manifest(tmp_path, [{"utterance_id": "ghost", "skip_wav": True}])
        with pytest.raises(ManifestError, match="ghost"):
            load_manifest(path)

    def test_parse_error_names_row(self, tmp_path):
        path = make_manifest(tmp_path, [{"utterance_id": "u0"}])
        with open(path, "a", encoding="utf-8") as fh:
            fh.write("too,few,columns\n")
        with pytest.raises(ManifestError, match="row 3"):
            load_manifest(path)

    def test_bad_rating_names_row_and_column(self, tmp_path):
        path = make_manifest(tmp_path, [{"utterance_id": "u0", "rating": "abc"}])
        with pytest.raises(ManifestError, match="row 2.*rating"):
            load_manifest(path)

    def test_phoneme_ref_split(self, tmp_path):
        path = make_manifest(tmp_path, [{"utterance_id": "u0", "phoneme_ref": "k a t"}])
        assert load_manifest(path)[0].phoneme_ref == ("k", "a", "t")


class TestWav:
    def test_mono_16bit_roundtrip(self, tmp_path):
        t = np.arange(SR) / SR
        buf = AudioBuffer(samples=0.25 * np.sin(2 * np.pi * 100 * t), sample_rate_hz=SR)
        write_wav(buf, tmp_path / "a.wav")
        back = read_wav(tmp_path / "a.wav")
        assert back.sample_rate_hz == SR
        assert back.samples.size == SR
        assert np.max(np.abs(back.samples - buf.samples)) < 1.0 / 32768.0

    def test_opposite_channels_cancel(self, tmp_path):
        from scipy.io import wavfile

        x = (np.sin(np.linspace(0, 50, 4000)) * 20000).astype(np.int16)
        wavfile.write(tmp_path / "st.wav", SR, np.stack([x, -x], axis=1))
        assert np.all(read_wav(tmp_path / "st.wav").samples == 0.0)

    def test_int16_min_maps_to_minus_one(self, tmp_path):
        from scipy.io import wavfile

        data = np.full(100, -32768, dtype=np.int16)
        wavfile.write(tmp_path / "m.wav", SR, data)
        assert np.all(read_wav(tmp_path / "m.wav").samples == -1.0)

    def test_float32_passthrough(self, tmp_path):
        buf = AudioBuffer(samples=np.linspace(-1, 1, 500), sample_rate_hz=SR)
        write_wav(buf, tmp_path / "f.wav", encoding="float32")
        back = read_wav(tmp_path / "f.wav")
        assert np.max(np.abs(back.samples - buf.samples)) < 1e-7

    def test_unsupported_encoding(self, tmp_path):
        from scipy.io import wavfile

        wavfile.write(tmp_path / "i32.wav", SR, np.zeros(100, dtype=np.int32))
        with pytest.raises(AudioError, match="unsupported"):
            read_wav(tmp_path / "i32.wav")

    def test_truncated_file(self, tmp_path):
        buf = AudioBuffer(samples=np.ones(1000) * 0.1, sample_rate_hz=SR)
        write_wav(buf, tmp_path / "t.wav")
        raw = (tmp_path / "t.wav").read_bytes()
        (tmp_path / "t.wav").write_bytes(raw[:20])
        with pytest.raises(AudioError):
            read_wav(tmp_path / "t.wav")

    def test_low_sample_rate_rejected(self):
        with pytest.raises(AudioError, match="8 kHz"):
            AudioBuffer(samples=np.zeros(10) + 0.1, sample_rate_hz=4000)


class TestFeatureFile:
    def test_roundtrip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        m = rng.standard_normal((2, 3)).astype(np.float32)
        write_feature_file(m, tmp_path / "m.xpgf")
        back = read_feature_file(tmp_path / "m.xpgf")
        assert back.dtype == np.float32
        assert np.array_equal(back, m)

    def test_single_value_file_is_20_bytes(self, tmp_path):
        write_feature_file(np.array([[0.5]], dtype=np.float32), tmp_path / "one.xpgf")
        assert (tmp_path / "one.xpgf").stat().st_size == 20

    def test_payload_length_mismatch(self, tmp_path):
        write_feature_file(np.ones((4, 4), dtype=np.float32), tmp_path / "m.xpgf")
        raw = (tmp_path / "m.xpgf").read_bytes()
        (tmp_path / "m.xpgf").write_bytes(raw[:-4])  # drop one float
        with pytest.raises(FeatureFileError, match="15"):
            read_feature_file(tmp_path / "m.xpgf")

    def test_bad_magic(self, tmp_path):
        (tmp_path / "bad.xpgf").write_bytes(b"NOPE" + b"\x00" * 16)
        with pytest.raises(FeatureFileError, match="magic"):
            read_feature_file(tmp_path / "bad.xpgf")

    def test_xvector_shape(self, tmp_path):
        write_feature_file(np.zeros((1, 192), dtype=np.float32), tmp_path / "x.xpgf")
        assert read_feature_file(tmp_path / "x.xpgf").shape == (1, 192)

    def test_empty_rejected(self, tmp_path):
        with pytest.raises(FeatureFileError):
            write_feature_file(np.zeros((0, 3), dtype=np.float32), tmp_path / "e.xpgf")

    def test_nan_rejected(self, tmp_path):
        with pytest.raises(FeatureFileError):
            write_feature_file(np.array([[np.nan]]), tmp_path / "n.xpgf")

    def test_roundtrip_many_random(self, tmp_path):
        rng = np.random.default_rng(7)
        for i in range(20):
            rows, cols = int(rng.integers(1, 9)), int(rng.integers(1, 9))
            scale = 10.0 ** float(rng.integers(-3, 4))
            m = (rng.standard_normal((rows, cols)) * scale).astype(np.float32)
            write_feature_file(m, tmp_path / "r.xpgf")
            assert np.array_equal(read_feature_file(tmp_path / "r.xpgf"), m)


class TestFeatureBundle:
    def test_ppg_probability_range_enforced(self):
        with pytest.raises(FeatureFileError, match=r"\[0, 1\]"):
            FeatureBundle(xvec=np.zeros((1, 4)), ppg=np.array([[0.5, 1.5]]))

    def test_xvec_must_be_single_row(self):
        with pytest.raises(FeatureFileError, match="1xD"):
            FeatureBundle(xvec=np.zeros((2, 4)), ppg=np.array([[0.5, 0.5]]))
