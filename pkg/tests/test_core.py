import numpy as np
import pytest

from fbssvep.core import Recording, StimulusTable, SubBandStack, Window, validate_recording


def make_recording(n_samples=1000, trials=((0, 500, 0), (500, 500, 1))):
    data = np.zeros((1, n_samples))
    return Recording("S00", 250.0, ("Oz",), data, tuple(trials))


TABLE = StimulusTable.from_frequencies((12.0, 15.0))


class TestStimulusTable:
    def test_from_frequencies_spaces_phases(self):
        t = StimulusTable.from_frequencies((8.0, 9.0, 10.0))
        assert t.n_classes == 3
        assert np.allclose(t.phases, [0.0, 0.5 * np.pi, np.pi])

    def test_rejects_nonpositive_frequency(self):
        with pytest.raises(ValueError):
            StimulusTable(((0, -1.0, 0.0),))

    def test_rejects_duplicate_frequencies(self):
        with pytest.raises(ValueError):
            StimulusTable(((0, 12.0, 0.0), (1, 12.0, 0.0)))

    def test_rejects_noncontiguous_indices(self):
        with pytest.raises(ValueError):
            StimulusTable(((0, 12.0, 0.0), (2, 15.0, 0.0)))


class TestWindow:
    def test_length_follows_sampling_rate(self):
        w = Window(np.zeros(125), 250.0, 0)
        assert w.samples.shape == (125,)

    def test_wrong_length_rejected(self):
        with pytest.raises(ValueError):
            Window(np.zeros(124), 250.0, 0)

    def test_band_stack_counts_bands(self):
        s = SubBandStack(np.zeros((10, 125)), 250.0, 0)
        assert s.n_bands == 10
        with pytest.raises(ValueError):
            SubBandStack(np.zeros(125), 250.0, 0)


class TestValidateRecording:
    def test_well_formed_recording_passes(self):
        assert validate_recording(make_recording(), TABLE) == []

    def test_trial_past_data_end(self):
        rec = make_recording(trials=((0, 500, 0), (800, 500, 1)))
        problems = validate_recording(rec, TABLE)
        assert len(problems) == 1
        assert "outside data bounds" in problems[0]

    def test_unknown_label(self):
        rec = make_recording(trials=((0, 500, 99),))
        problems = validate_recording(rec, TABLE)
        assert len(problems) == 1
        assert "label 99" in problems[0]

    def test_without_table_labels_unchecked(self):
        rec = make_recording(trials=((0, 500, 99),))
        assert validate_recording(rec) == []
