"""Pure-numpy reference implementations of the hot kernels.

Same contracts as the Cython module; used as the import-time fallback and
as the comparison side of the kernel benchmark.
"""

import math

import numpy as np

TWO_PI = 2.0 * math.pi


def conv1d_fwd(x, w, b, stride):
    """Valid 1-D cross-correlation, pre-activation.

    x: [B, L, C_in], w: [C_out, C_in, K], b: [C_out] -> z: [B, L_out, C_out]
    with L_out = (L - K)//stride + 1.
    """
    B, L, _ = x.shape
    c_out, _, k = w.shape
    l_out = (L - k) // stride + 1
    z = np.empty((B, l_out, c_out), dtype=x.dtype)
    z[:] = b
    stop = (l_out - 1) * stride + 1
    for tau in range(k):
        z += x[:, tau : tau + stop : stride, :] @ w[:, :, tau].T
    return z


def conv1d_bwd(x, w, stride, gz):
    """Gradients of conv1d_fwd w.r.t. input, weights and bias."""
    _, _, k = w.shape
    l_out = gz.shape[1]
    gx = np.zeros_like(x)
    gw = np.zeros_like(w)
    gb = gz.sum(axis=(0, 1))
    stop = (l_out - 1) * stride + 1
    for tau in range(k):
        sl = slice(tau, tau + stop, stride)
        gw[:, :, tau] = np.einsum("blo,blc->oc", gz, x[:, sl, :])
        gx[:, sl, :] += gz @ w[:, :, tau]
    return gx, gw, gb


def fading_powers(phases, los_phase, cluster_dopplers, los_doppler, k_lin, dt, n_slots):
    """Subchannel-averaged fading power for a segment of slots.

    Per subchannel s and slot i (time i*dt from the segment start):
        g = sqrt(K/(K+1)) * exp(j*(los_phase + 2*pi*f_los*t))
          + sqrt(1/((K+1)*C)) * sum_c exp(j*(phases[s,c] + 2*pi*f_c*t))
    Returns (mean_s |g|^2 per slot, advanced phases, advanced los_phase).
    Phase accumulators are not wrapped; both backends share that convention.
    """
    _, c = phases.shape
    t = np.arange(n_slots) * dt
    a_los = math.sqrt(k_lin / (k_lin + 1.0))
    a_sc = math.sqrt(1.0 / ((k_lin + 1.0) * c))
    ang = phases[None, :, :] + TWO_PI * cluster_dopplers[None, None, :] * t[:, None, None]
    g = a_sc * np.exp(1j * ang).sum(axis=2)  # [n, s]
    g += a_los * np.exp(1j * (los_phase + TWO_PI * los_doppler * t))[:, None]
    powers = np.mean(g.real**2 + g.imag**2, axis=1)
    span = TWO_PI * n_slots * dt
    phases_out = phases + span * cluster_dopplers[None, :]
    los_phase_out = los_phase + span * los_doppler
    return powers, phases_out, los_phase_out
