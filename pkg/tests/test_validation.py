from rwpcorr import mobility, validation
from rwpcorr.validation import ValidationSettings


def test_quick_settings_shrink_the_run():
    s = ValidationSettings(quick=True).effective()
    assert s.N <= 10 and s.M <= 2 and s.K <= 10 and s.replications <= 10
    assert ValidationSettings().effective() == ValidationSettings()


def test_quick_validation_passes():
    results = validation.validate(ValidationSettings(quick=True))
    assert [r.name for r in results] == [name for name, _ in validation.CHECKS]
    assert all(r.passed for r in results), validation.report(results)
    assert all(r.seconds >= 0 for r in results)


def test_report_lists_each_check():
    text = validation.report([validation.CheckResult("x", False, "bad", 0.5)])
    assert "FAIL" in text and "bad" in text


def test_oracle_check_catches_wrong_kernel(monkeypatch):
    real = mobility.kernel_tau2

    def shifted(cfg, *args, **kw):
        k = real(cfg, *args, **kw)
        probs = k.probs.copy()
        probs[:, 2] += 1e-6
        probs[:, 0] -= 1e-6 * (probs[:, 0] > 1e-6)
        return mobility.DisplacementKernel(k.tau, k.n_points, k.exact, probs=probs)

    monkeypatch.setattr(mobility, "kernel_tau2", shifted)
    s = ValidationSettings(quick=True).effective()
    passed, detail = validation.check_oracle(s)
    assert not passed, detail


def test_published_end_point_factor_fails_validation(monkeypatch):
    real = mobility.kernel_tau2
    monkeypatch.setattr(mobility, "kernel_tau2", lambda cfg: real(cfg, published_boundary=True))
    results = {r.name: r for r in validation.validate(ValidationSettings(quick=True))}
    assert not results["chain oracle"].passed
    assert "ProbabilityRangeError" in results["chain oracle"].detail
    assert results["closed forms"].passed
