import numpy as np
import pytest

import spinphoto as sp
from spinphoto.errors import AliasingError, ValidationError


def column_major_index_oracle(rows, cols):
    """Hand enumeration: walk columns left to right, rows top to bottom."""
    mapping = {}
    k = 0
    for c in range(cols):
        for r in range(rows):
            mapping[(r, c)] = k
            k += 1
    return mapping


class TestBitsToHarmonics:
    def test_single_bit_slot_index(self):
        # 4x4 image, one set bit at (row 2, col 1): linear index 1*4 + 2 = 6
        bits = np.zeros((4, 4), dtype=int)
        bits[2, 1] = 1
        img = sp.BitImage(4, 4, bits)
        hs = sp.bits_to_harmonics(img, f_start=100.0, spacing=20.0, amp_one=1.0)
        oracle = column_major_index_oracle(4, 4)
        assert oracle[(2, 1)] == 6
        nonzero = np.flatnonzero(hs.amplitudes)
        assert list(nonzero) == [6]
        assert hs.frequencies[6] == 100.0 + 6 * 20.0

    def test_full_mapping_matches_oracle(self):
        rng = np.random.default_rng(0)
        bits = rng.integers(0, 2, size=(5, 3))
        img = sp.BitImage(5, 3, bits)
        hs = sp.bits_to_harmonics(img, f_start=-140.0, spacing=20.0, amp_one=2.0)
        oracle = column_major_index_oracle(5, 3)
        for (r, c), k in oracle.items():
            assert hs.frequencies[k] == -140.0 + k * 20.0
            assert hs.amplitudes[k] == (2.0 if bits[r, c] else 0.0)

    def test_paper_scale_span(self):
        img = sp.BitImage(32, 32, np.ones((32, 32), dtype=int))
        hs = sp.bits_to_harmonics(img, f_start=0.0, spacing=20.0, amp_one=1.2)
        assert len(hs) == 1024
        assert hs.frequencies[-1] == 20.0 * 1023  # 20460 Hz span

    def test_zero_slots_retained(self):
        img = sp.BitImage(2, 2, [[1, 0], [0, 0]])
        hs = sp.bits_to_harmonics(img, 0.0, 40.0, 1.0)
        assert len(hs) == 4
        assert np.count_nonzero(hs.amplitudes) == 1

    def test_round_trip_bits(self):
        rng = np.random.default_rng(7)
        bits = rng.integers(0, 2, size=(4, 4))
        img = sp.BitImage(4, 4, bits)
        hs = sp.bits_to_harmonics(img, -300.0, 40.0, 1.2)
        flat = (hs.amplitudes > 0).astype(np.uint8)
        recovered = flat.reshape(4, 4, order="F")  # columns fastest, inverse mapping
        assert np.array_equal(recovered, bits)

    def test_centered_start_symmetric(self):
        assert sp.centered_start(1024, 20.0) == -10230.0
        img = sp.BitImage(2, 2, np.ones((2, 2), dtype=int))
        hs = sp.bits_to_harmonics(img, sp.centered_start(4, 40.0), 40.0, 1.0)
        assert hs.frequencies[0] == -hs.frequencies[-1]


class TestRowHarmonics:
    def test_comb_interval_paper_scale(self):
        hs = sp.row_harmonics(0, 0.0, 20.0, n_cols=32, n_rows=32, amp=9.0)
        assert np.allclose(np.diff(hs.frequencies), 640.0)  # 20 * 32

    def test_row_increment_shifts_by_spacing(self):
        a = sp.row_harmonics(3, 0.0, 20.0, 32, 32, 9.0)
        b = sp.row_harmonics(4, 0.0, 20.0, 32, 32, 9.0)
        assert np.allclose(b.frequencies - a.frequencies, 20.0)

    def test_small_comb_frozen(self):
        hs = sp.row_harmonics(0, 50.0, 20.0, n_cols=4, n_rows=4, amp=1.0)
        assert np.allclose(hs.frequencies, 50.0 + np.array([0.0, 80.0, 160.0, 240.0]))

    def test_comb_hits_own_row_slots(self):
        # tooth m of row r must coincide with the slot of bit (r, m)
        f0, spacing, rows, cols = -300.0, 40.0, 4, 4
        for r in range(rows):
            hs = sp.row_harmonics(r, f0, spacing, cols, rows, 1.0)
            slots = [f0 + (m * rows + r) * spacing for m in range(cols)]
            assert np.allclose(hs.frequencies, slots)

    def test_row_out_of_range(self):
        with pytest.raises(ValidationError):
            sp.row_harmonics(4, 0.0, 20.0, 4, 4, 1.0)


class TestSynthesize:
    def test_constant_single_harmonic(self):
        wf = sp.synthesize(sp.HarmonicSet([0.0], [2.1], [0.0]), 1.0, 1024)
        assert np.allclose(wf.steps[:, 0], 2.1, atol=1e-15)
        assert np.allclose(wf.steps[:, 1], 0.0, atol=1e-15)

    def test_zero_amplitudes_zero_waveform(self):
        wf = sp.synthesize(sp.HarmonicSet([10.0, 20.0], [0.0, 0.0], [0.0, 0.0]), 0.5, 64)
        assert not np.any(wf.steps)

    def test_opposite_frequencies_cancel_by(self):
        f, a = 25.0, 1.5
        wf = sp.synthesize(sp.HarmonicSet([-f, f], [a, a], [0.0, 0.0]), 0.8, 4096)
        t = (np.arange(4096) + 0.5) * wf.dt
        assert np.abs(wf.steps[:, 1]).max() < 1e-12
        assert np.allclose(wf.steps[:, 0], 2 * a * np.cos(2 * np.pi * f * t), atol=1e-12)

    def test_linearity(self):
        hs_a = sp.HarmonicSet([-50.0, 10.0], [1.0, 2.0], [0.1, 0.2])
        hs_b = sp.HarmonicSet([-20.0, 35.0], [0.5, 1.5], [0.0, 0.3])
        union = sp.HarmonicSet(
            [-50.0, -20.0, 10.0, 35.0], [1.0, 0.5, 2.0, 1.5], [0.1, 0.0, 0.2, 0.3]
        )
        wa = sp.synthesize(hs_a, 0.4, 2048)
        wb = sp.synthesize(hs_b, 0.4, 2048)
        wu = sp.synthesize(union, 0.4, 2048)
        assert np.abs(wu.steps - (wa.steps + wb.steps)).max() < 1e-12

    def test_mean_power_matches_amplitudes(self):
        # incommensurate frequencies, duration 10 / min-spacing
        freqs = [-61.803, -23.607, 14.142, 42.426]
        amps = [1.0, 2.0, 0.5, 1.5]
        min_spacing = min(np.diff(freqs))
        duration = 10.0 / min_spacing
        wf = sp.synthesize(sp.HarmonicSet(freqs, amps, [0.0] * 4), duration, 16384)
        mean_power = float((wf.steps**2).sum(axis=1).mean())
        assert abs(mean_power - sum(a * a for a in amps)) / sum(a * a for a in amps) < 0.02

    def test_undersampling_rejected(self):
        with pytest.raises(AliasingError):
            sp.synthesize(sp.HarmonicSet([1000.0], [1.0], [0.0]), 1.0, 100)

    def test_reference_offset_shifts_frequencies(self):
        base = sp.synthesize(sp.HarmonicSet([5.0], [1.0], [0.0]), 0.5, 512)
        shifted = sp.synthesize(
            sp.HarmonicSet([0.0], [1.0], [0.0]), 0.5, 512, reference_offset=5.0
        )
        assert np.abs(base.steps - shifted.steps).max() < 1e-12


class TestRotatePhase:
    def test_quarter_turn_exact(self):
        wf = sp.synthesize(sp.HarmonicSet([-30.0, 20.0], [1.0, 2.0], [0.0, 0.5]), 0.3, 1024)
        quarter = sp.rotate_phase(wf, np.pi / 2)
        assert np.array_equal(quarter.steps[:, 0], -wf.steps[:, 1])
        assert np.array_equal(quarter.steps[:, 1], wf.steps[:, 0])

    def test_pi_is_exact_negation(self):
        wf = sp.synthesize(sp.HarmonicSet([11.0], [1.3], [0.2]), 0.2, 256)
        flipped = sp.rotate_phase(wf, np.pi)
        assert np.array_equal(flipped.steps, -wf.steps)

    def test_opposite_quarter_turns_mirror(self):
        wf = sp.synthesize(sp.HarmonicSet([7.0], [1.0], [0.0]), 0.2, 256)
        plus = sp.rotate_phase(wf, np.pi / 2)
        minus = sp.rotate_phase(wf, -np.pi / 2)
        assert np.array_equal(plus.steps, -minus.steps)

    def test_matches_harmonic_phase_shift(self):
        phi = 0.7
        hs = sp.HarmonicSet([12.0], [1.0], [0.0])
        hs_shift = sp.HarmonicSet([12.0], [1.0], [phi])
        a = sp.rotate_phase(sp.synthesize(hs, 0.25, 512), phi)
        b = sp.synthesize(hs_shift, 0.25, 512)
        assert np.abs(a.steps - b.steps).max() < 1e-12


class TestImageIO:
    def test_pbm_round_trip(self, tmp_path):
        rng = np.random.default_rng(3)
        img = sp.BitImage(6, 5, rng.integers(0, 2, size=(6, 5)))
        path = tmp_path / "img.pbm"
        sp.save_pbm(img, path)
        assert sp.load_pbm(path) == img

    def test_pbm_comments_and_whitespace(self, tmp_path):
        path = tmp_path / "c.pbm"
        path.write_text("P1\n# a comment\n2 2\n1 0 # trailing\n0 1\n")
        img = sp.load_pbm(path)
        assert np.array_equal(img.bits, [[1, 0], [0, 1]])

    def test_pbm_bad_magic(self, tmp_path):
        path = tmp_path / "bad.pbm"
        path.write_text("P4\n2 2\n1 0 0 1\n")
        with pytest.raises(ValidationError):
            sp.load_pbm(path)

    def test_image_validation(self):
        with pytest.raises(ValidationError):
            sp.BitImage(2, 2, [[0, 2], [0, 0]])
        with pytest.raises(ValidationError):
            sp.BitImage(65, 64, np.zeros((65, 64), dtype=int))


class TestWaveformIO:
    def test_round_trip_byte_identical(self, tmp_path):
        wf = sp.synthesize(
            sp.HarmonicSet([-45.0, 33.3], [1.7, 0.9], [0.0, 1.1]), 0.3, 777
        )
        p1 = tmp_path / "wf.csv"
        sp.save_waveform(wf, p1)
        back = sp.load_waveform(p1)
        p2 = tmp_path / "wf2.csv"
        sp.save_waveform(back, p2)
        assert p1.read_bytes() == p2.read_bytes()
        assert p1.with_suffix(".json").read_bytes() == p2.with_suffix(".json").read_bytes()

    def test_segment_is_prefix_slice(self):
        wf = sp.synthesize(sp.HarmonicSet([10.0], [1.0], [0.0]), 0.4, 400)
        seg = wf.segment(100, 300)
        assert seg.n_steps == 200
        assert np.array_equal(seg.steps, wf.steps[100:300])
        assert abs(seg.dt - wf.dt) < 1e-18

    def test_segment_bad_range(self):
        wf = sp.synthesize(sp.HarmonicSet([10.0], [1.0], [0.0]), 0.4, 100)
        with pytest.raises(ValidationError):
            wf.segment(50, 40)
        with pytest.raises(ValidationError):
            wf.segment(0, 101)
