"""Exponentially windowed discrete Fourier pipeline.

Transient analysis samples the response period T at N equally spaced
instants and works with the damped signal e^{-eta t} P(t).  Forward and
inverse transforms use the plain DFT pair

    P_hat(k) = (1/N) sum_n e^{-eta n dt} P(n dt) e^{-2 pi i n k / N}
    R(n dt)  = e^{+eta n dt} sum_k W_k R_hat(k) e^{+2 pi i n k / N}

with an optional frequency-domain data window W applied on inversion
only.  Damping enters the frequency-domain systems as the complex shift
omega_k = k*dw - i*eta; the rule of thumb eta = kappa ln(10) / T damps
the periodic wrap-around to 10^-kappa over one period.

Only the first N/2+1 spectral values are ever computed by the solver;
conjugate_fill completes the spectrum using the conjugate symmetry of
real-signal transforms.  The DC and Nyquist bins are projected onto the
real axis: their exact values are real for a real transfer path, and the
discarded imaginary parts (iterative-solver noise, and the Nyquist
artifact of sampling a complex-frequency response) would otherwise leak
into the reconstructed signal.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

WINDOW_KINDS = ("rectangular", "hanning", "blackman")

# Reconstruction with a properly filled spectrum is real to roundoff;
# anything past the check level indicates an upstream symmetry bug.
IMAG_RESIDUE_CHECK = 1e-10
IMAG_RESIDUE_HARD_ERROR = 1e-8


class SpectrumSymmetryError(RuntimeError):
    """Inverse transform produced a significantly complex signal."""


@dataclass(frozen=True)
class TimeSignal:
    """Boundary-condition time signal on [0, T).

    kind is one of:
      * "zero"
      * "heaviside": amplitude * H(t), with H(0) = 1
      * "tabulated": linear interpolation of (times, values) samples,
        clamped at the ends; resampled onto the sweep grid.
    """

    kind: str = "zero"
    amplitude: float = 0.0
    times: np.ndarray | None = field(default=None)
    values: np.ndarray | None = field(default=None)

    def sample(self, period: float, n_samples: int) -> np.ndarray:
        """Sample onto the grid t_n = n * period / n_samples, n < n_samples."""
        t = np.arange(n_samples) * (period / n_samples)
        if self.kind == "zero":
            return np.zeros(n_samples)
        if self.kind == "heaviside":
            return np.full(n_samples, float(self.amplitude))
        if self.kind == "tabulated":
            if self.times is None or self.values is None:
                raise ValueError("tabulated signal without samples")
            return np.interp(t, self.times, self.values)
        raise ValueError(f"unknown signal kind {self.kind!r}")

    @classmethod
    def heaviside(cls, amplitude: float) -> "TimeSignal":
        return cls(kind="heaviside", amplitude=float(amplitude))

    @classmethod
    def zero(cls) -> "TimeSignal":
        return cls(kind="zero")

    @classmethod
    def tabulated(cls, times, values) -> "TimeSignal":
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape or times.size < 2:
            raise ValueError("tabulated signal needs matching 1-D arrays")
        if not np.all(np.diff(times) > 0):
            raise ValueError("tabulated signal times must be increasing")
        return cls(kind="tabulated", times=times, values=values)


@dataclass
class Spectrum:
    """Complex spectral values at omega_k = k*dw - i*eta, k = 0..N-1."""

    values: np.ndarray
    period: float
    eta: float

    @property
    def n_omega(self) -> int:
        return len(self.values)

    @property
    def delta_omega(self) -> float:
        return 2.0 * math.pi / self.period

    def frequencies(self) -> np.ndarray:
        """The complex sampling frequencies omega_k."""
        return np.arange(self.n_omega) * self.delta_omega - 1j * self.eta


def eta_from_kappa(kappa: float, period: float) -> float:
    """Damping coefficient eta = kappa * ln(10) / T."""
    if kappa < 0:
        raise ValueError("kappa must be >= 0")
    if period <= 0:
        raise ValueError("period must be positive")
    return kappa * math.log(10.0) / period


def forward_mft(signal: TimeSignal, period: float, n_omega: int,
                eta: float) -> Spectrum:
    """Damped forward transform of a boundary signal.

    Computed with an FFT; identical to the direct double sum to roundoff
    for any even or odd N (the FFT used is mixed-radix).
    """
    if n_omega < 2:
        raise ValueError("need at least 2 samples")
    samples = signal.sample(period, n_omega)
    dt = period / n_omega
    damped = samples * np.exp(-eta * dt * np.arange(n_omega))
    return Spectrum(values=np.fft.fft(damped) / n_omega, period=period, eta=eta)


def conjugate_fill(half_values, period: float, eta: float) -> Spectrum:
    """Extend solver output for k = 0..N/2 to a full conjugate-symmetric
    spectrum of even length N.

    The DC and Nyquist bins keep only their real parts (see module
    docstring); every other missing bin is the conjugate of its mirror.
    """
    half = np.asarray(half_values, dtype=complex)
    if half.ndim != 1 or half.size < 2:
        raise ValueError("half spectrum must be 1-D with at least 2 values")
    n_half = half.size
    n_omega = 2 * (n_half - 1)
    values = np.empty(n_omega, dtype=complex)
    values[:n_half] = half
    values[0] = half[0].real
    values[n_half - 1] = half[n_half - 1].real
    values[n_half:] = np.conj(values[1 : n_omega - n_half + 1][::-1])
    return Spectrum(values=values, period=period, eta=eta)


def window_weights(kind: str, n_omega: int) -> np.ndarray:
    """Frequency-domain data window weights W_k, k = 0..N-1.

    Hanning:  0.5 * (1 + cos(2 pi k / N))
    Blackman: 0.42 + 0.5 cos(2 pi k / N) + 0.08 cos(4 pi k / N)

    Both are 1 at DC and 0 at the Nyquist bin, tapering symmetrically so
    conjugate spectral symmetry is preserved.
    """
    if n_omega < 2:
        raise ValueError("need at least 2 samples")
    if kind == "rectangular":
        return np.ones(n_omega)
    k = np.arange(n_omega)
    phase = 2.0 * math.pi * k / n_omega
    if kind == "hanning":
        return 0.5 * (1.0 + np.cos(phase))
    if kind == "blackman":
        return 0.42 + 0.5 * np.cos(phase) + 0.08 * np.cos(2.0 * phase)
    raise ValueError(f"unknown window kind {kind!r}; expected one of {WINDOW_KINDS}")


def inverse_mft(spectrum: Spectrum, window: str, eta: float) -> np.ndarray:
    """Windowed inverse transform with exponential rescaling.

    Returns the real time samples R(n dt).  The imaginary residue of the
    raw inverse is checked before being discarded: above 1e-8 relative it
    raises (a conjugate-fill bug upstream), above 1e-10 it is logged as a
    warning.
    """
    values = spectrum.values * window_weights(window, spectrum.n_omega)
    complex_signal = np.fft.ifft(values) * spectrum.n_omega
    scale = np.abs(complex_signal).max()
    if scale > 0.0:
        residue = np.abs(complex_signal.imag).max() / scale
        if residue > IMAG_RESIDUE_HARD_ERROR:
            raise SpectrumSymmetryError(
                f"imaginary residue {residue:.3e} exceeds "
                f"{IMAG_RESIDUE_HARD_ERROR}; spectrum is not conjugate symmetric"
            )
        if residue > IMAG_RESIDUE_CHECK:
            logging.getLogger(__name__).warning(
                "inverse transform imaginary residue %.3e above %.0e",
                residue, IMAG_RESIDUE_CHECK)
    n = spectrum.n_omega
    dt = spectrum.period / n
    return complex_signal.real * np.exp(eta * dt * np.arange(n))


def frequency_grid(period: float, n_omega: int, eta: float) -> np.ndarray:
    """Sweep frequencies omega_k = k*dw - i*eta for k = 0..N/2."""
    if n_omega % 2 or n_omega < 4:
        raise ValueError("n_omega must be even and >= 4")
    dw = 2.0 * math.pi / period
    return np.arange(n_omega // 2 + 1) * dw - 1j * eta
