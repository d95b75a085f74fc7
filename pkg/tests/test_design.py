import numpy as np
import pytest

from mlabeam import (Carrier, DesignInput, InfeasibleArrayError, count_peaks,
                     design_num_arrays, design_sweep, spacing_for_aperture)

LAM = Carrier.from_wavelength(0.02)


def test_count_unimodal():
    xs = np.linspace(-0.4, 0.4, 301)
    assert count_peaks(np.sinc(64 * xs / 60.0) ** 2) == 1


def test_count_five_cosine_maxima():
    # envelope times cos^2(pi x / w) with maxima at 0, +-w, +-2w inside the window
    w = 0.1
    xs = np.linspace(-2.4 * w, 2.4 * w, 301)
    sig = np.sinc(xs / (3 * w)) ** 2 * np.cos(np.pi * xs / w) ** 2
    assert count_peaks(sig) == 5


def test_count_constant():
    assert count_peaks(np.ones(301)) == 0


def test_count_needs_three_samples():
    with pytest.raises(ValueError):
        count_peaks(np.array([1.0, 2.0]))


def test_count_endpoint_maxima_excluded():
    xs = np.linspace(0.0, 1.0, 301)
    # maxima at 0, 0.2, ..., 1.0; the two window edges must not count
    assert count_peaks(0.5 + 0.5 * np.cos(10 * np.pi * xs)) == 4


def test_prominence_threshold():
    xs = np.linspace(0, 1, 501)
    main = np.exp(-(((xs - 0.3) / 0.05) ** 2))
    side = np.exp(-(((xs - 0.75) / 0.03) ** 2))
    assert count_peaks(main + 2e-3 * side) == 1
    assert count_peaks(main + 5e-2 * side) == 2


def test_design_n64_needs_two():
    res = design_num_arrays(DesignInput(2.0, 30.0, 64, LAM, spacing=0.01))
    assert res.num_subarrays == 2
    assert res.final_peak_count == 1
    assert res.single_peak and not res.guard_limited
    assert res.gap == pytest.approx(0.73, abs=1e-12)


def test_design_returned_layout_feasible():
    for n in (8, 16, 32, 64):
        res = design_num_arrays(DesignInput(2.0, 30.0, n, LAM, spacing=0.01))
        assert res.num_subarrays % 2 == 0
        assert spacing_for_aperture(2.0, res.num_subarrays, n, 0.01) >= 0.01 - 1e-12


def test_design_sweep_monotone():
    counts = (1, 2, 4, 8, 16, 32, 64)
    results = design_sweep(2.0, 30.0, counts, LAM, spacing=0.01)
    Ls = [r.num_subarrays for r in results]
    assert Ls == [200, 100, 50, 24, 12, 6, 2]
    assert all(a >= b for a, b in zip(Ls, Ls[1:]))


def test_design_filled_aperture_boundary():
    # N=100: the first even L makes a contiguous 2 m aperture, exactly the guard
    res = design_num_arrays(DesignInput(2.0, 30.0, 100, LAM, spacing=0.01))
    assert res.num_subarrays == 2
    assert res.aperture_filled
    assert res.single_peak


def test_design_guard_limited_single_element():
    res = design_num_arrays(DesignInput(2.0, 30.0, 1, LAM, spacing=0.01))
    assert res.num_subarrays == 200
    assert res.guard_limited
    assert res.final_peak_count > 1


def test_design_trace_records_iterations():
    res = design_num_arrays(DesignInput(2.0, 30.0, 32, LAM, spacing=0.01))
    Ls = [L for L, _ in res.peak_trace]
    assert Ls == sorted(Ls)
    assert Ls[0] == 2 and Ls[-1] == res.num_subarrays


def test_design_infeasible_from_start():
    # N*delta below D but even the first layout cannot fit its gaps
    with pytest.raises(InfeasibleArrayError):
        design_num_arrays(DesignInput(2.0, 30.0, 150, LAM, spacing=0.01))


def test_design_input_validation():
    with pytest.raises(ValueError):
        DesignInput(2.0, 30.0, 300, LAM, spacing=0.01)  # single sub-array overfills
    with pytest.raises(ValueError):
        DesignInput(2.0, 30.0, 16, LAM, spacing=0.01, grid_points=8)
