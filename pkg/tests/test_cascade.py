import numpy as np
import pytest

from eitcascade.cascade import LinkBudget, apply_link, check_timing, detect_peaks, peak_rois, run_cascade
from eitcascade.errors import ConfigurationError, InvalidInputError
from eitcascade.model import ControlEnvelope, TimeGrid
from eitcascade.pipeline import Experiment
from eitcascade.shaping import EnvelopeSpec, Window, make_envelope
from eitcascade.solver import energy, input_pulse


def test_link_composition():
    b = LinkBudget(0.9, 0.51778)
    assert b.transmission == pytest.approx(0.9 * 0.51778)
    assert b.loss == pytest.approx(1 - b.transmission)
    t = LinkBudget.from_total_loss(0.534)
    assert t.transmission == pytest.approx(0.466)
    with pytest.raises(InvalidInputError):
        LinkBudget(1.2, 1.0)


def test_apply_link():
    grid = TimeGrid.span(0.0, 4.0, 1e-3)
    E = input_pulse(grid, 1.0, 1.0, 1.17)
    np.testing.assert_array_equal(apply_link(E, LinkBudget(1.0, 1.0), grid), E)
    out = apply_link(E, LinkBudget.from_total_loss(0.534), grid)
    assert energy(out, grid) == pytest.approx(0.545, abs=1e-3)
    shifted = apply_link(E, LinkBudget(1.0, 1.0, delay=0.25), grid)
    np.testing.assert_allclose(shifted[250:], E[:-250])
    half = apply_link(E, LinkBudget(1.0, 1.0, delay=5e-4), grid)
    np.testing.assert_allclose(half[1:], 0.5 * (E[1:] + E[:-1]), atol=1e-12)


def _controls(grid, read2_amp=22.0):
    c1 = make_envelope(EnvelopeSpec("ttl_square", Window(0.0, 1.9, 10.0), Window(2.1, 0.3, 30.0)), grid)
    c2 = make_envelope(EnvelopeSpec("ttl_square", Window(0.0, 2.4, 10.0),
                                    Window(3.0, 0.4, read2_amp)), grid)
    return c1, c2


def test_detect_peaks_zero_and_synthetic():
    grid = TimeGrid.span(0.0, 5.0, 1e-3)
    c1, c2 = _controls(grid)
    peaks = detect_peaks(np.zeros(grid.nt), c1, c2)
    assert [p.label for p in peaks] == ["A", "B", "C"]
    assert all(p.energy == 0 for p in peaks)
    rois = peak_rois(c1, c2)
    trace = np.zeros(grid.nt)
    t = grid.times
    for lab, centre in (("A", 1.0), ("B", 2.5), ("C", 3.5)):
        bump = np.exp(-((t - centre) / 0.05) ** 2)
        trace += bump / (bump.sum() * grid.dt)
        assert rois[lab][0] < centre < rois[lab][1]
    np.testing.assert_allclose([p.energy for p in detect_peaks(trace, c1, c2)], 1.0, atol=1e-9)


def test_peaks_ordered_and_factorised(few_photon):
    exp, res = few_photon
    a, b, c = res.peaks
    assert a.roi[1] <= b.roi[0] and b.roi[1] <= c.roi[0]
    assert res.eta_T == pytest.approx(res.eta1 * res.link.transmission * res.eta2, rel=1e-9)
    assert res.eta_T <= res.stage1.eta_store * res.link.transmission * res.eta2 + 1e-6


def test_blocked_second_read_removes_c(few_photon):
    exp, _ = few_photon
    blocked = Experiment(exp.config.with_value("control2.read.amplitude", 0.0)).cascade()
    assert blocked.peak("C").energy < 1e-6 * blocked.input_energy


def test_linearity_in_photon_number(few_photon):
    # linear up to probe saturation, which is O((κ|E|)^2) relative
    exp, res = few_photon
    scaled = Experiment(exp.config.with_value("input_pulse.mean_photons", 3 * 8.0)).cascade()
    for p, q in zip(res.peaks, scaled.peaks):
        assert q.energy == pytest.approx(3 * p.energy, rel=1e-6)


def test_eta_t_monotone_in_link_loss(few_photon):
    exp, _ = few_photon
    etas = [Experiment(exp.config.with_value("link.propagation_transmission", t)).cascade().eta_T
            for t in (1.0, 0.7, 0.4)]
    assert etas[0] >= etas[1] >= etas[2]


def test_timing_mismatch_rejected():
    grid = TimeGrid.span(0.0, 5.0, 1e-3)
    c1, _ = _controls(grid)
    late = make_envelope(EnvelopeSpec("ttl_square", Window(3.5, 0.2, 10.0), Window(4.0, 0.4, 20.0)), grid)
    with pytest.raises(ConfigurationError):
        check_timing(late, (2.1, 3.3))
    with pytest.raises(ConfigurationError):
        check_timing(ControlEnvelope.zeros(grid), (2.1, 3.3))


def test_run_cascade_direct(few_photon):
    exp, res = few_photon
    again = run_cascade(exp.params1, exp.params2, exp.input, exp.control1, exp.control2,
                        exp.link, exp.tgrid)
    assert again.eta_T == res.eta_T
    s = again.summary()
    assert set(s["peaks"]) == {"A", "B", "C"}
    assert s["etaT"] == res.eta_T
