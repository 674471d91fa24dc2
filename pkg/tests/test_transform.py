import numpy as np
import pytest

from dirstft import (
    ComplexFrequencyPoint,
    EtaTooLarge,
    PairingDegenerate,
    SampledField,
    WindowBank,
    bump_window,
    custom_window,
    dstft_at,
    dstft_forward,
    eval_ridge_atom,
    gaussian_window,
    invert,
    make_lattice,
    parseval_check,
    synthesis,
)
from dirstft.directions import build_frame, canonical_frame
from dirstft.signals import SignalRecipe, render


@pytest.fixture(scope="module")
def gauss2d():
    lat = make_lattice([-8.0, -8.0], [0.25, 0.25], [64, 64])
    return render(SignalRecipe("gaussian"), lat)


def _bank(sigma=1.0):
    return WindowBank.of([gaussian_window(sigma)])


def test_forward_zero_field():
    lat = make_lattice([-2.0, -2.0], [0.25, 0.25], [16, 16])
    f = SampledField(lat, np.zeros((16, 16), complex))
    c = dstft_forward(f, canonical_frame(1, 2), _bank(), make_lattice([-1], [0.5], [4]))
    assert np.all(c.values == 0)


def test_forward_matches_classical_stft_quadrature():
    # n = k = 1 against a hand-rolled windowed-Fourier quadrature
    lat = make_lattice([-8.0], [1.0 / 16], [256])
    t = lat.axis_points(0)
    f = SampledField(lat, np.exp(-(t**2)) + 0j)
    shift = make_lattice([-2.0], [0.5], [9])
    c = dstft_forward(f, canonical_frame(1, 1), _bank(), shift)
    freqs = c.freq_lattice.axis_freqs(0)
    step = lat.step[0]
    worst = 0.0
    for xi_idx, x in enumerate(shift.axis_points(0)):
        win = np.exp(-((t - x) ** 2) / 2)
        for m in (0, 64, 128, 200, 255):
            direct = np.sum(f.values * win * np.exp(-2j * np.pi * t * freqs[m])) * step
            worst = max(worst, abs(c.grid()[xi_idx, m] - direct))
    assert worst <= 1e-10


def test_fast_path_matches_quadrature_oracle(gauss2d):
    frame = canonical_frame(1, 2)
    bank = _bank()
    shift = make_lattice([-6.0], [1.0], [12])
    c = dstft_forward(gauss2d, frame, bank, shift)
    rng = np.random.default_rng(5)
    grid = c.grid()
    for _ in range(5):
        si = int(rng.integers(0, 12))
        m1, m2 = rng.integers(0, 64, size=2)
        xi = [c.freq_lattice.axis_freqs(0)[m1], c.freq_lattice.axis_freqs(1)[m2]]
        z = ComplexFrequencyPoint(xi=xi, eta=[0.0, 0.0])
        oracle = dstft_at(gauss2d, frame, bank, [shift.axis_points(0)[si]], z)
        fast = grid[si, m1, m2]
        assert abs(fast - oracle) <= 1e-10 * (1 + abs(oracle))


def test_general_direction_matches_oracle():
    lat = make_lattice([-4.0, -4.0], [0.125, 0.125], [64, 64])
    f = render(SignalRecipe("gaussian"), lat)
    frame = build_frame([[0.6, 0.8]], 2)
    bank = _bank()
    shift = make_lattice([-1.0], [0.5], [4])
    c = dstft_forward(f, frame, bank, shift)
    z = ComplexFrequencyPoint(xi=[c.freq_lattice.axis_freqs(0)[40],
                                  c.freq_lattice.axis_freqs(1)[20]], eta=[0.0, 0.0])
    oracle = dstft_at(f, frame, bank, [0.5], z)
    fast = c.grid()[3, 40, 20]
    assert abs(fast - oracle) <= 1e-10 * (1 + abs(oracle))


def test_modulation_covariance_is_circular_shift(gauss2d):
    # origin*count*freq_step is integral here, so the shift is exact
    frame = canonical_frame(1, 2)
    shift = make_lattice([-1.0], [1.0], [3])
    c0 = dstft_forward(gauss2d, frame, _bank(), shift)
    freq = c0.freq_lattice
    m0 = (3, -5)
    xi0 = [m0[0] * freq.step[0], m0[1] * freq.step[1]]
    pts = gauss2d.lattice.points()
    mod = SampledField(gauss2d.lattice,
                       gauss2d.values * np.exp(2j * np.pi * (pts @ np.asarray(xi0))))
    c1 = dstft_forward(mod, frame, _bank(), shift)
    rolled = np.roll(c0.grid(), shift=m0, axis=(1, 2))
    np.testing.assert_allclose(c1.grid(), rolled, atol=1e-12 * np.abs(c0.values).max())


def test_translation_covariance(gauss2d):
    frame = canonical_frame(1, 2)
    shift = make_lattice([-2.0], [0.5], [9])
    c0 = dstft_forward(gauss2d, frame, _bank(), shift)
    tau = np.array([0.5, -0.75])  # lattice vector, and u.tau = 0.5 on the shift grid
    jtau = np.rint(tau / gauss2d.lattice.step).astype(int)
    shifted = SampledField(gauss2d.lattice,
                           np.roll(gauss2d.values, jtau, axis=(0, 1)))
    c1 = dstft_forward(shifted, frame, _bank(), shift)
    freqs = [c0.freq_lattice.axis_freqs(a) for a in range(2)]
    phase = np.exp(-2j * np.pi * (tau[0] * freqs[0][:, None] + tau[1] * freqs[1][None, :]))
    # x index offset: u . tau / dx = 1
    expect = c0.grid()[:-1] * phase[None]
    np.testing.assert_allclose(c1.grid()[1:], expect, atol=1e-10)


def test_conjugate_symmetry_for_real_data(gauss2d):
    c = dstft_forward(gauss2d, canonical_frame(1, 2), _bank(),
                      make_lattice([-1.0], [1.0], [3]))
    g = c.grid()
    # bins closed under negation exclude the unmatched -N/2 row/column
    inner = g[:, 1:, 1:]
    flipped = np.conj(inner[:, ::-1, ::-1])
    np.testing.assert_allclose(inner, flipped, atol=1e-12)


def test_k_equals_n_reproduces_2d_stft():
    lat = make_lattice([-4.0, -4.0], [0.25, 0.25], [32, 32])
    f = render(SignalRecipe("gaussian"), lat)
    frame = canonical_frame(2, 2)
    bank = WindowBank.of([gaussian_window(1.0), gaussian_window(0.5)])
    shift = make_lattice([-1.0, -1.0], [1.0, 1.0], [3, 3])
    c = dstft_forward(f, frame, bank, shift)
    t = lat.points()
    x = np.array([0.0, -1.0])
    win = np.exp(-((t[..., 0] - x[0]) ** 2) / 2) * np.exp(
        -((t[..., 1] - x[1]) ** 2) / (2 * 0.25)
    )
    xi = np.array([c.freq_lattice.axis_freqs(0)[20], c.freq_lattice.axis_freqs(1)[9]])
    direct = np.sum(f.values * win * np.exp(-2j * np.pi * (t @ xi))) * lat.cell_volume
    fast = c.grid()[1, 0, 20, 9]
    assert abs(fast - direct) <= 1e-10 * (1 + abs(direct))


def test_dstft_at_eta_weighting_and_guard():
    lat = make_lattice([-2.0], [0.125], [32])
    t = lat.axis_points(0)
    f = SampledField(lat, np.exp(-4 * t**2) + 0j)
    frame = canonical_frame(1, 1)
    bank = _bank()
    z = ComplexFrequencyPoint(xi=[0.5], eta=[0.25])
    val = dstft_at(f, frame, bank, [0.0], z)
    win = np.exp(-(t**2) / 2)
    direct = np.sum(f.values * win * np.exp(-2j * np.pi * t * 0.5)
                    * np.exp(2 * np.pi * t * 0.25)) * lat.step[0]
    assert val == pytest.approx(direct, rel=1e-12)
    with pytest.raises(EtaTooLarge):
        dstft_at(f, frame, bank, [0.0], ComplexFrequencyPoint(xi=[0.0], eta=[80.0]))


def test_dstft_at_zero_field_any_z():
    lat = make_lattice([-2.0, -2.0], [0.25, 0.25], [16, 16])
    f = SampledField(lat, np.zeros((16, 16), complex))
    z = ComplexFrequencyPoint(xi=[1.0, -2.0], eta=[0.3, 0.1])
    assert dstft_at(f, canonical_frame(1, 2), _bank(), [0.5], z) == 0


def test_synthesis_zero_and_single_atom():
    lat = make_lattice([-4.0, -4.0], [0.25, 0.25], [32, 32])
    f = render(SignalRecipe("gaussian"), lat)
    frame = canonical_frame(1, 2)
    bank = _bank()
    shift = make_lattice([-1.0], [0.5], [5])
    c = dstft_forward(f, frame, bank, shift)

    zeros = type(c)(frame=c.frame, bank=c.bank, shift_lattice=c.shift_lattice,
                    freq_lattice=c.freq_lattice, signal_lattice=c.signal_lattice,
                    values=np.zeros_like(c.values))
    out = synthesis(zeros, bank.synthesis, lat)
    assert np.all(out.values == 0)

    onehot = np.zeros_like(c.values)
    amp = 2.0 - 1.5j
    onehot[3, 20 * 32 + 9] = amp
    single = type(c)(frame=c.frame, bank=c.bank, shift_lattice=c.shift_lattice,
                     freq_lattice=c.freq_lattice, signal_lattice=c.signal_lattice,
                     values=onehot)
    out = synthesis(single, bank.synthesis, lat)
    x0 = [shift.axis_points(0)[3]]
    xi0 = [c.freq_lattice.axis_freqs(0)[20], c.freq_lattice.axis_freqs(1)[9]]
    weight = shift.cell_volume * c.freq_lattice.cell_volume
    pts = lat.points()
    expected = amp * weight * np.array(
        [[eval_ridge_atom(bank.synthesis, frame, x0, xi0, pts[i, j])
          for j in range(32)] for i in range(32)]
    )
    np.testing.assert_allclose(out.values, expected, atol=1e-12)


def test_invert_roundtrip_small():
    lat = make_lattice([-8.0, -8.0], [0.25, 0.25], [64, 64])
    f = render(SignalRecipe("gaussian"), lat)
    frame = canonical_frame(1, 2)
    bank = _bank()
    shift = make_lattice([-6.0], [0.5], [24])
    c = dstft_forward(f, frame, bank, shift)
    rec = invert(c, bank, lat)
    err = np.linalg.norm(rec.values - f.values) / np.linalg.norm(f.values)
    assert err <= 1e-3


def test_invert_zero_and_scaling():
    lat = make_lattice([-4.0, -4.0], [0.25, 0.25], [32, 32])
    f = render(SignalRecipe("gaussian"), lat)
    frame = canonical_frame(1, 2)
    bank = _bank()
    shift = make_lattice([-2.0], [0.5], [8])
    c = dstft_forward(f, frame, bank, shift)
    zero = type(c)(frame=c.frame, bank=c.bank, shift_lattice=c.shift_lattice,
                   freq_lattice=c.freq_lattice, signal_lattice=c.signal_lattice,
                   values=np.zeros_like(c.values))
    assert np.all(invert(zero, bank, lat).values == 0)
    doubled = type(c)(frame=c.frame, bank=c.bank, shift_lattice=c.shift_lattice,
                      freq_lattice=c.freq_lattice, signal_lattice=c.signal_lattice,
                      values=2.0 * c.values)
    np.testing.assert_array_equal(invert(doubled, bank, lat).values,
                                  2.0 * invert(c, bank, lat).values)


def test_invert_refuses_degenerate_pairing():
    lat = make_lattice([-4.0], [0.125], [64])
    t = lat.axis_points(0)
    f = SampledField(lat, np.exp(-(t**2)) + 0j)
    g_vals = np.exp(-t**2 / 2) + 0j
    h_vals = np.exp(-((t - 0.3) ** 2)) + 0j
    proj = np.sum(h_vals * np.conj(g_vals)) / np.sum(np.abs(g_vals) ** 2)
    bank = WindowBank.of(
        [custom_window(SampledField(lat, g_vals))],
        [custom_window(SampledField(lat, h_vals - proj * g_vals))],
    )
    frame = canonical_frame(1, 1)
    shift = make_lattice([-2.0], [0.5], [8])
    c = dstft_forward(f, frame, bank, shift)
    with pytest.raises(PairingDegenerate):
        invert(c, bank, lat, quad_lattice=lat)


def test_localization_bitwise():
    # compact window: mutations outside the slab cannot touch ball coefficients
    lat = make_lattice([-8.0, -8.0], [1.0 / 16, 1.0 / 16], [256, 256])
    f = render(SignalRecipe("jump_ridge", u=(1.0, 0.0), sigma=1.0), lat)
    frame = canonical_frame(1, 2)
    bank = WindowBank.of([bump_window(1.0)])
    shift = make_lattice([-1.0], [0.25], [9])  # covers the ball around 0.5
    base = dstft_forward(f, frame, bank, shift)

    mutated = f.copy()
    t1 = lat.axis_points(0)
    outside = np.abs(t1 - 0.5) > 1.5 + lat.step[0]
    mutated.values[outside, :] += 1e6 * (1 + 1j)
    after = dstft_forward(mutated, frame, bank, shift)

    ball_rows = [i for i, x in enumerate(shift.axis_points(0)) if abs(x - 0.5) <= 0.5]
    assert np.array_equal(base.values[ball_rows], after.values[ball_rows])
    far_rows = [i for i, x in enumerate(shift.axis_points(0)) if abs(x - 0.5) > 1.0]
    assert not np.array_equal(base.values[far_rows], after.values[far_rows])


def test_threaded_forward_and_synthesis_deterministic(gauss2d):
    frame = canonical_frame(1, 2)
    bank = _bank()
    shift = make_lattice([-2.0], [0.5], [9])
    c1 = dstft_forward(gauss2d, frame, bank, shift, threads=1)
    c2 = dstft_forward(gauss2d, frame, bank, shift, threads=4)
    assert np.array_equal(c1.values, c2.values)
    r1 = synthesis(c1, bank.synthesis, gauss2d.lattice, threads=1)
    r2 = synthesis(c1, bank.synthesis, gauss2d.lattice, threads=4)
    assert np.array_equal(r1.values, r2.values)


def test_parseval_identity_and_orthogonal_pair(gauss2d):
    frame = canonical_frame(1, 2)
    shift = make_lattice([-6.0], [0.5], [24])
    g = [gaussian_window(1.0)]
    rep = parseval_check(gauss2d, gauss2d, g, g, frame, shift)
    assert rep.rel_err <= 1e-3
    assert rep.lhs.real > 0

    pts = gauss2d.lattice.points()
    odd = SampledField(gauss2d.lattice, pts[..., 0] * gauss2d.values)
    rep2 = parseval_check(odd, gauss2d, g, g, frame, shift)
    scale = odd.norm_l2 * gauss2d.norm_l2 * abs(
        parseval_check(gauss2d, gauss2d, g, g, frame, shift).rhs
        / gauss2d.norm_l2**2
    )
    assert rep2.rhs_degenerate or abs(rep2.rhs) < 1e-9 * scale
    assert abs(rep2.lhs) <= 1e-6 * scale


def test_parseval_conjugated_form_with_complex_windows(gauss2d):
    # the right-hand side carries conjugated windows; with a genuinely
    # complex analysis window the identity only balances in that form
    lat1 = make_lattice([-8.0], [1.0 / 64], [1024])
    t = lat1.axis_points(0)
    gc = custom_window(SampledField(lat1, np.exp(-t**2 / 2) * np.exp(1j * t)))
    frame = canonical_frame(1, 2)
    shift = make_lattice([-6.0], [0.5], [24])
    rep = parseval_check(gauss2d, gauss2d, [gc], [gaussian_window(1.0)],
                         frame, shift)
    assert rep.rel_err <= 1e-3


def test_parseval_zero_field(gauss2d):
    frame = canonical_frame(1, 2)
    shift = make_lattice([-2.0], [1.0], [5])
    zero = SampledField(gauss2d.lattice, np.zeros_like(gauss2d.values))
    rep = parseval_check(gauss2d, zero, [gaussian_window(1.0)],
                         [gaussian_window(1.0)], frame, shift)
    assert rep.lhs == 0 and rep.rhs == 0
    assert rep.rhs_degenerate


def test_synthesis_grid_mismatch_rejected(gauss2d):
    frame = canonical_frame(1, 2)
    bank = _bank()
    shift = make_lattice([-1.0], [1.0], [3])
    c = dstft_forward(gauss2d, frame, bank, shift)
    bad = make_lattice([-8.0, -8.0], [0.5, 0.5], [64, 64])
    from dirstft import LatticeMismatch

    with pytest.raises(LatticeMismatch):
        synthesis(c, bank.synthesis, bad)
