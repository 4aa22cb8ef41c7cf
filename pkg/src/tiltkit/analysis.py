"""Evaluation metrics and signal diagnostics.

All operations are pure and safe for concurrent use.

Spectrum normalisation (documented so area figures are comparable across
runs): signals are zero-padded to the next power of two, no window is
applied, and the one-sided magnitude uses 2/N amplitude scaling with the
DC and Nyquist bins unscaled by the 2.  Under this convention
:func:`spectrum_energy` reproduces the signal energy exactly (Parseval).
"""

from dataclasses import dataclass, field
from math import isfinite, log10

import csv
import io

import numpy as np

from .errors import ParameterError


def mse(ref, est):
    """Mean squared error between a reference and an estimate sequence."""
    ref = np.asarray(ref, dtype=float)
    est = np.asarray(est, dtype=float)
    if ref.shape != est.shape or ref.ndim != 1:
        raise ParameterError(f"sequences must be 1-D and equal length, "
                             f"got {ref.shape} and {est.shape}")
    if ref.size == 0:
        raise ParameterError("sequences must be nonempty")
    resid = ref - est
    return float(resid @ resid) / ref.size


@dataclass(frozen=True)
class Spectrum:
    """One-sided magnitude spectrum of a real signal."""

    frequencies: np.ndarray  # Hz, 0 .. 1/(2*dt)
    magnitudes: np.ndarray   # amplitude units of the input signal
    dt: float
    n_samples: int           # original (unpadded) length

    @property
    def n_fft(self):
        return 2 * (len(self.frequencies) - 1)


def noise_spectrum(signal, dt):
    """FFT magnitude spectrum of a signal, zero-padded to a power of two.

    The even magnitude symmetry of the real-input FFT is verified
    internally before the spectrum is one-sided.
    """
    signal = np.asarray(signal, dtype=float)
    if signal.ndim != 1 or signal.size < 2:
        raise ParameterError("signal must be 1-D with at least two samples")
    if not dt > 0:
        raise ParameterError("dt must be positive")
    n = signal.size
    n_fft = 1 << (n - 1).bit_length()
    padded = np.zeros(n_fft)
    padded[:n] = signal
    X = np.fft.fft(padded)
    mag_full = np.abs(X)
    # real input: |X[j]| must mirror |X[N-j]|
    if not np.allclose(mag_full[1:n_fft // 2], mag_full[-1:n_fft // 2:-1],
                       rtol=1e-9, atol=1e-9 * (1.0 + mag_full.max())):
        raise ParameterError("input produced an asymmetric spectrum; is it real?")
    half = n_fft // 2
    mags = mag_full[:half + 1].copy()
    mags[1:half] *= 2.0
    mags /= n_fft
    freqs = np.fft.rfftfreq(n_fft, dt)
    return Spectrum(frequencies=freqs, magnitudes=mags, dt=float(dt), n_samples=n)


def spectrum_energy(sp):
    """Signal energy implied by the spectrum (Parseval identity).

    Equals ``sum(signal**2)`` of the padded input under the documented
    normalisation.
    """
    m = sp.magnitudes
    n_fft = sp.n_fft
    mid = m[1:-1]
    return float(n_fft * (m[0] ** 2 + m[-1] ** 2 + 0.5 * float(mid @ mid)))


def spectrum_area(sp):
    """Trapezoidal integral of magnitude over frequency."""
    return float(np.trapezoid(sp.magnitudes, sp.frequencies))


def snr_db(signal, noise):
    """10*log10 of the signal-to-noise energy ratio.

    Zero noise energy returns the +inf sentinel (and -inf for a zero
    signal over nonzero noise is the natural limit).
    """
    signal = np.asarray(signal, dtype=float)
    noise = np.asarray(noise, dtype=float)
    if signal.shape != noise.shape:
        raise ParameterError("signal and noise must have equal length")
    e_s = float(signal @ signal)
    e_n = float(noise @ noise)
    if e_n == 0.0:
        return float("inf")
    if e_s == 0.0:
        return float("-inf")
    return 10.0 * log10(e_s / e_n)


_REPORT_PARAMS = ("alpha", "beta", "theta", "gamma", "T_c", "q1", "q2", "r")


@dataclass
class Report:
    """Tuning report: text table plus machine-readable rows.

    ``rows`` are plain dicts (one per tuning result); ``trajectory_rows``
    optionally carry plot-ready (t, truth, corrected, estimate) samples.
    """

    text: str
    rows: list
    trajectory_rows: list = field(default_factory=list)

    def results_csv(self):
        """Render the result rows as CSV text (repr floats, round-trip exact)."""
        if not self.rows:
            return ""
        fields = list(self.rows[0].keys())
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(fields)
        for row in self.rows:
            writer.writerow([_cell(row.get(f)) for f in fields])
        return buf.getvalue()

    def trajectories_csv(self):
        if not self.trajectory_rows:
            return ""
        fields = list(self.trajectory_rows[0].keys())
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(fields)
        for row in self.trajectory_rows:
            writer.writerow([_cell(row.get(f)) for f in fields])
        return buf.getvalue()

    def write(self, outdir):
        """Write report.txt, results.csv and (if present) trajectories.csv."""
        import os
        os.makedirs(outdir, exist_ok=True)
        with open(os.path.join(outdir, "report.txt"), "w") as fh:
            fh.write(self.text)
        with open(os.path.join(outdir, "results.csv"), "w", newline="") as fh:
            fh.write(self.results_csv())
        if self.trajectory_rows:
            with open(os.path.join(outdir, "trajectories.csv"), "w", newline="") as fh:
                fh.write(self.trajectories_csv())


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return value


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        if isfinite(value):
            return f"{value:.5f}"
        return "nan"
    return str(value)


def make_report(results, logs_metadata=None, trajectories=None):
    """Assemble per-filter, per-sample-time tables from tuning results.

    ``results`` is an iterable of :class:`tiltkit.tuning.TuningResult`;
    ``trajectories`` is an optional (t, phi_true, phi_bar, phi_hat) tuple of
    equal-length arrays for plot-ready CSV output, with an optional fifth
    array carrying the uncompensated arctangent tilt.  Output is
    deterministic for identical inputs.
    """
    results = list(results)
    if not results:
        raise ParameterError("no tuning results to report")

    rows = []
    for res in results:
        row = {"variant": res.variant, "dt_ms": res.dt * 1000.0}
        for name in _REPORT_PARAMS:
            row[name] = (float(res.parameters[name])
                         if name in res.parameters else None)
        row["mse_training"] = float(res.training_mse)
        row["mse_verification"] = float(res.verification_mse)
        report = res.stability_report
        row["stability"] = report.classification if report is not None else ""
        row["max_eig_magnitude"] = (float(report.max_magnitude)
                                    if report is not None else None)
        row["iterations"] = res.iterations
        row["converged"] = res.converged
        rows.append(row)

    headers = list(rows[0].keys())
    widths = {h: max(len(h), max(len(_fmt(r[h])) for r in rows)) for h in headers}
    lines = []
    if logs_metadata:
        lines.append(str(logs_metadata))
        lines.append("")
    lines.append("  ".join(h.ljust(widths[h]) for h in headers))
    lines.append("  ".join("-" * widths[h] for h in headers))
    for row in rows:
        lines.append("  ".join(_fmt(row[h]).ljust(widths[h]) for h in headers))
    text = "\n".join(lines) + "\n"

    trajectory_rows = []
    if trajectories is not None:
        t, phi_true, phi_bar, phi_hat = trajectories[:4]
        raw = trajectories[4] if len(trajectories) > 4 else None
        for k in range(len(t)):
            row = {
                "t": float(t[k]),
                "phi_true_deg": float(phi_true[k]),
                "phi_bar_deg": float(phi_bar[k]),
                "phi_hat_deg": float(phi_hat[k]),
            }
            if raw is not None:
                row["arctan_raw_deg"] = float(raw[k])
            trajectory_rows.append(row)

    return Report(text=text, rows=rows, trajectory_rows=trajectory_rows)
