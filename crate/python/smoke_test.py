"""Smoke test for the reskew_py extension module.

Install with `pip install ./crates/python` (maturin backend), or copy
target/release/libreskew_py.so to reskew_py.so on PYTHONPATH.
"""

import json
import math
import os
import tempfile

import reskew_py as rs


def main():
    assert abs(rs.skewness([0.0, 0.0, 1.0]) - 1 / math.sqrt(2)) < 1e-12

    formants = dict(rs.VOWELS)["ae"]
    voice = rs.synthesize_voice(120.0, formants, "negative", seed=1)
    assert voice.sample_rate == 16000 and len(voice) == 16000

    for method in ("reskew", "reskew-res", "reskew-glot"):
        d = rs.detect_polarity(voice, method=method)
        flipped = rs.detect_polarity(-voice, method=method)
        assert d.polarity == "negative", d
        assert flipped.polarity == "positive"
        assert flipped.statistic == -d.statistic

    residual, glottal = rs.excitation_signals(voice)
    assert len(residual) == len(glottal) == len(voice)

    sections = rs.elliptic_highpass(400.0, 16000)
    assert len(sections) == 5

    noise = rs.white_noise(len(voice), 16000, seed=3)
    noisy = rs.mix_noise(voice, noise, 5.0)
    assert abs(rs.measured_snr_db(voice, noisy) - 5.0) < 1e-6

    rir = rs.room_impulse_response(300.0)
    assert abs(rs.decay_time_s(rir, -60.0) - 0.3) < 0.045
    wet = rs.reverberate(voice, rir)
    assert rs.detect_polarity(wet).polarity == "negative"

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "v.wav")
        rs.write_wav(path, voice)
        assert len(rs.read_wav(path)) == len(voice)
        manifest = rs.write_synthetic_corpus(os.path.join(tmp, "corpus"))
        report = json.loads(rs.evaluate_manifest(manifest, methods=["reskew"], snr_db=10.0, seed=7))
        assert report["per_method"]["reskew"]["n_files"] == 150
        print("reskew error rate at 10 dB:", report["per_method"]["reskew"]["error_rate"])

    try:
        rs.detect_polarity(rs.Signal([0.0] * 8000, 16000))
    except ValueError as e:
        print("silence rejected:", e)
    else:
        raise AssertionError("silence should not yield a verdict")

    print("ok")


if __name__ == "__main__":
    main()
