import numpy as np
import pytest

from rakeroom.acoustics import (
    Medium,
    MicArray,
    green,
    high_pass,
    noise_std_for_snr,
    render_mic_signals,
    steering_matrix,
    steering_vector,
    synthesize_rir,
    tapered_sinc,
)
from rakeroom.errors import EmptySignal, NotEnoughImages, SourceOnMicrophone
from rakeroom.geometry import Room, enumerate_images


def single(room, s):
    return enumerate_images(room, s, 0)


def test_array_layouts():
    lin = MicArray.linear((2.0, 1.5), 4, 0.08)
    np.testing.assert_allclose(lin.positions[:, 0], [1.88, 1.96, 2.04, 2.12])
    np.testing.assert_allclose(lin.center, (2.0, 1.5))
    circ = MicArray.circular((2.0, 1.5), 12, 0.15)
    np.testing.assert_allclose(np.linalg.norm(circ.positions - circ.center, axis=1), 0.15)


def test_steering_vector_dc(circ12, medium):
    s = np.array([1.0, 4.0])
    a = steering_vector(circ12, s, 0.0, medium)
    d = np.linalg.norm(circ12.positions - s, axis=1)
    np.testing.assert_allclose(a, 1.0 / (4 * np.pi * d))


def test_steering_vector_full_cycle():
    arr = MicArray(np.array([[0.0, 0.0]]), "custom")
    a = steering_vector(arr, (1.0, 0.0), 2 * np.pi * 343.0, Medium(343.0))
    assert a[0] == pytest.approx(1 / (4 * np.pi), rel=1e-12)
    assert abs(a[0].imag) < 1e-15


def test_steering_vector_phase(rng):
    arr = MicArray(np.array([[0.0, 0.0]]), "custom")
    med = Medium()
    for _ in range(20):
        f, d = rng.uniform(50, 4000), rng.uniform(0.2, 10)
        a = steering_vector(arr, (d, 0.0), 2 * np.pi * f, med)[0]
        expected = np.exp(-2j * np.pi * f * d / med.speed_of_sound)
        assert np.angle(a / expected) == pytest.approx(0.0, abs=1e-9)


def test_magnitude_inverse_distance():
    arr = MicArray(np.array([[0.0, 0.0]]), "custom")
    a1 = steering_vector(arr, (1.5, 0.0), 2000.0, Medium())
    a2 = steering_vector(arr, (3.0, 0.0), 2000.0, Medium())
    assert abs(a1[0]) / abs(a2[0]) == pytest.approx(2.0)


def test_steering_matrix(room, circ12, medium):
    images = enumerate_images(room, (1.0, 4.5), 2)
    omega = 2 * np.pi * 1000
    A = steering_matrix(circ12, images, omega, medium, 4)
    assert A.shape == (12, 5)
    np.testing.assert_allclose(A[:, 0], steering_vector(circ12, images[0], omega, medium))
    cols = [steering_vector(circ12, images[k], omega, medium) for k in range(5)]
    np.testing.assert_allclose(A.sum(axis=1), np.sum(cols, axis=0))
    assert np.linalg.norm(A) ** 2 == pytest.approx(sum(np.linalg.norm(c) ** 2 for c in cols))
    with pytest.raises(NotEnoughImages):
        steering_matrix(circ12, images, omega, medium, 13)


def test_source_on_microphone(medium):
    with pytest.raises(SourceOnMicrophone):
        green(np.array([[1.0, 1.0]]), np.array([[1.0, 1.0]]), 1.0, 100.0, medium)


def test_rir_integer_delay():
    med = Medium(343.0, 8000.0)
    room = Room.shoebox(20.0, 20.0)
    d = 100 * 343.0 / 8000.0
    mic = np.array([1.0, 1.0])
    rir = synthesize_rir(mic, single(room, mic + (d, 0.0)), med)
    taps = rir.at(np.arange(-100, 400))
    expected = np.zeros_like(taps)
    expected[200] = 1 / (4 * np.pi * d)
    np.testing.assert_allclose(taps, expected, atol=1e-15)


def test_rir_fractional_delay_pointwise():
    med = Medium(343.0, 8000.0)
    room = Room.shoebox(20.0, 20.0)
    d = 100.5 * 343.0 / 8000.0
    mic = np.array([1.0, 1.0])
    H = 81
    rir = synthesize_rir(mic, single(room, mic + (d, 0.0)), med, H)
    n = np.arange(-50, 300)
    u = n - 100.5
    taper = np.where(np.abs(u) < H, 0.5 * (1 + np.cos(np.pi * u / H)), 0.0)
    expected = taper * np.sin(np.pi * u) / (np.pi * u) / (4 * np.pi * d)
    np.testing.assert_allclose(rir.at(n), expected, atol=1e-15)


def test_rir_linearity(room, medium):
    mic = np.array([2.0, 1.5])
    images = enumerate_images(room, (1.0, 4.5), 1)
    both = synthesize_rir(mic, images.first(2), medium)
    a = synthesize_rir(mic, images.first(1), medium)
    b_set = type(images)(room, images[1], (), 0)
    b = synthesize_rir(mic, b_set, medium)
    n = np.arange(-100, 500)
    np.testing.assert_allclose(both.at(n), a.at(n) + b.at(n), atol=1e-15)


def test_rir_energy_bound(room, medium):
    mic = np.array([2.0, 1.5])
    src = single(room, (3.3, 4.9))
    rir = synthesize_rir(mic, src, medium)
    d = np.linalg.norm(src.positions[0] - mic)
    assert np.sum(rir.taps**2) <= (1 / (4 * np.pi * d)) ** 2


@pytest.mark.parametrize("H", [64, 81])
def test_rir_dtft_matches_steering_vector(H):
    med = Medium()
    room = Room.shoebox(30.0, 30.0)
    mic = np.array([1.0, 1.0])
    src = single(room, (9.37, 12.11))
    rir = synthesize_rir(mic, src, med, H)
    n = np.arange(len(rir.taps)) + rir.offset
    arr = MicArray(mic[None, :], "custom")
    worst = 0.0
    for f in np.linspace(300, 3400, 60):
        dtft = np.sum(rir.taps * np.exp(-2j * np.pi * f / med.sampling_rate * n))
        a = steering_vector(arr, src[0], 2 * np.pi * f, med)[0]
        worst = max(worst, abs(dtft - a) / abs(a))
    assert worst <= 1e-3


def test_render_impulse_equals_rir(room, medium):
    arr = MicArray.linear((2.0, 1.5), 3, 0.1)
    images = enumerate_images(room, (1.0, 4.5), 2)
    y = render_mic_signals([(images, np.array([1.0]))], arr, medium)
    for m, r in enumerate(arr.positions):
        rir = synthesize_rir(r, images, medium)
        np.testing.assert_allclose(y[m], rir.at(np.arange(y.shape[1])), atol=1e-15)


def test_render_linearity_and_noise(room, medium, rng):
    arr = MicArray.linear((2.0, 1.5), 4, 0.08)
    a = (enumerate_images(room, (1.0, 4.5), 2), rng.standard_normal(800))
    b = (enumerate_images(room, (3.0, 2.5), 2), rng.standard_normal(800))
    N = 1500
    both = render_mic_signals([a, b], arr, medium, 0.01, seed=5, length=N)
    ya = render_mic_signals([a], arr, medium, length=N)
    yb = render_mic_signals([b], arr, medium, length=N)
    noise = render_mic_signals([(a[0], np.zeros(1))], arr, medium, 0.01, seed=5, length=N)
    np.testing.assert_allclose(both, ya + yb + noise, atol=1e-12)
    again = render_mic_signals([a, b], arr, medium, 0.01, seed=5, length=N)
    assert np.array_equal(both, again)
    with pytest.raises(EmptySignal):
        render_mic_signals([(a[0], np.zeros(0))], arr, medium)


def test_render_snr_at_centroid(room, medium):
    arr = MicArray.circular((2.0, 1.5), 12, 0.15)
    s = (1.0, 4.5)
    x = np.random.default_rng(0).standard_normal(80_000)
    std = noise_std_for_snr(s, arr, x, 20.0)
    direct = render_mic_signals([(enumerate_images(room, s, 0), x)], arr, medium)
    noise = render_mic_signals([(enumerate_images(room, s, 0), np.zeros(1))], arr, medium, std, seed=1,
                               length=direct.shape[1])
    snr = 10 * np.log10(np.mean(direct[:, 200:-200] ** 2) / np.mean(noise**2))
    assert snr == pytest.approx(20.0, abs=0.5)


def test_high_pass_removes_low_band():
    fs = 8000.0
    t = np.arange(16000) / fs
    low = high_pass(np.sin(2 * np.pi * 50 * t), fs)
    high = high_pass(np.sin(2 * np.pi * 1000 * t), fs)
    assert np.std(low[4000:]) < 0.01
    assert np.std(high[4000:]) == pytest.approx(np.sqrt(0.5), rel=0.01)
