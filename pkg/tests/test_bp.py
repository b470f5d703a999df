"""Tail-integral convergence classifier."""

import numpy as np
import pytest

from orliczmax.bp import Verdict, analytic_verdict, classify
from orliczmax.errors import VerdictConflict
from orliczmax.young import Power, PowerLog, PowerLogLog, complementary


def test_power_below_p_converges():
    v = classify(Power(1.5), 2.0, mode="bp")
    assert v.label == "Converges"
    assert v.analytic == "Converges"


def test_power_above_p_diverges():
    v = classify(Power(3.0), 2.0, mode="bp")
    assert v.label == "Diverges"


def test_power_at_p_diverges():
    # boundary r == p gives a bare dt/t tail
    v = classify(Power(2.0), 2.0, mode="bp")
    assert v.label == "Diverges"


def test_bp_star_power():
    assert classify(Power(1.5), 2.0, n=2, mode="bp_star").label == "Converges"
    assert classify(Power(3.0), 2.0, n=2, mode="bp_star").label == "Diverges"


def test_flagship_split_between_modes():
    # t^2 / log^(3/2): one-parameter condition holds, the n=2 starred one fails
    phi = PowerLog(2.0, 1.5)
    assert classify(phi, 2.0, mode="bp").label == "Converges"
    assert classify(phi, 2.0, n=2, mode="bp_star").label == "Diverges"


def test_log_power_threshold_moves_with_n():
    # beta = 2.5 sits between the n=2 and n=3 starred thresholds
    phi = PowerLog(2.0, 2.5)
    assert classify(phi, 2.0, n=2, mode="bp_star").label == "Converges"
    assert classify(phi, 2.0, n=3, mode="bp_star").label == "Diverges"


def test_weak_log_diverges_even_unstarred():
    v = classify(PowerLog(2.0, 0.5), 2.0, mode="bp")
    assert v.label == "Diverges"


def test_borderline_is_inconclusive_not_conflicting():
    # beta exactly at the unstarred threshold: numeric exponent sits in the
    # dead band, analytic boundary rule says Diverges, no conflict raised
    v = classify(PowerLog(2.0, 1.0), 2.0, mode="bp")
    assert v.label in ("Inconclusive", "Diverges")


def test_conjugate_classification():
    assert classify(complementary(Power(1.5)), 2.0, mode="bp_star").label == "Diverges"
    assert classify(complementary(Power(3.0)), 2.0, mode="bp_star").label == "Converges"


def test_scale_constant_does_not_change_verdict():
    phi = PowerLog(2.0, 1.5)
    for c in (0.5, 1.0, 4.0):
        assert classify(phi, 2.0, mode="bp", c=c).label == "Converges"


def test_trace_has_numeric_evidence():
    v = classify(Power(1.5), 2.0, mode="bp")
    d = v.to_dict()
    tr = d["trace"]
    assert len(tr["partials"]) == len(tr["cutoffs"])
    assert np.all(np.diff(tr["partials"]) >= 0)
    assert "rho" in tr and "sigma" in tr


def test_analytic_rules():
    assert analytic_verdict(Power(1.9), 2.0) == "Converges"
    assert analytic_verdict(PowerLog(2.0, 2.5), 2.0, n=3, mode="bp_star") == "Diverges"
    assert analytic_verdict(PowerLogLog(2.0, 2.0, 1.5), 2.0, mode="bp") == "Converges"
    assert analytic_verdict(complementary(Power(2.0)), 2.0) is None


def test_verdict_conflict_guard():
    tr = classify(Power(1.5), 2.0).trace
    with pytest.raises(VerdictConflict):
        Verdict(label="Diverges", trace=tr, analytic="Converges")


def test_bad_mode_rejected():
    with pytest.raises(ValueError):
        classify(Power(2.0), 2.0, mode="bp_plus")
