"""Independent reference implementations used as test oracles.

Everything here is written against numpy only, by direct transcription of
the operation definitions, so it shares no code path with the package.
"""
import numpy as np


def elu(x):
    return np.where(x > 0, x, np.exp(np.minimum(x, 0.0)) - 1.0)


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def leaky_relu(x, slope=0.2):
    return np.where(x > 0, x, slope * x)


def naive_conv2d(x, w, b, stride=1, dilation=1, padding=0):
    """Direct nested-loop 2d cross-correlation with zero padding.

    x: [N, C_in, H, W]; w: [C_out, C_in, k, k]; b: [C_out] or None.
    """
    n, c_in, h, wid = x.shape
    c_out, _, kh, kw = w.shape
    if padding:
        x = np.pad(x, ((0, 0), (0, 0), (padding, padding),
                       (padding, padding)))
    h_out = (x.shape[2] - dilation * (kh - 1) - 1) // stride + 1
    w_out = (x.shape[3] - dilation * (kw - 1) - 1) // stride + 1
    out = np.zeros((n, c_out, h_out, w_out), dtype=np.float64)
    for bi in range(n):
        for co in range(c_out):
            for oy in range(h_out):
                for ox in range(w_out):
                    acc = 0.0
                    for ci in range(c_in):
                        for ky in range(kh):
                            for kx in range(kw):
                                iy = oy * stride + ky * dilation
                                ix = ox * stride + kx * dilation
                                acc += x[bi, ci, iy, ix] * w[co, ci, ky, kx]
                    out[bi, co, oy, ox] = acc
            if b is not None:
                out[bi, co] += b[co]
    return out


def naive_gated_conv2d(x, fw, fb, gw, gb, stride=1, dilation=1):
    """ELU(conv(x; feature)) * sigmoid(conv(x; gate)), same padding."""
    pad = dilation * (fw.shape[-1] - 1) // 2
    feat = naive_conv2d(x, fw, fb, stride, dilation, pad)
    gate = naive_conv2d(x, gw, gb, stride, dilation, pad)
    return elu(feat) * sigmoid(gate)


def pixel_shuffle_oracle(x):
    """out[n, c, 2h+dy, 2w+dx] = in[n, 4c + 2*dy + dx, h, w]."""
    n, c4, h, w = x.shape
    assert c4 % 4 == 0
    c = c4 // 4
    out = np.zeros((n, c, 2 * h, 2 * w), dtype=x.dtype)
    for ni in range(n):
        for ci in range(c):
            for hy in range(h):
                for wx in range(w):
                    for dy in (0, 1):
                        for dx in (0, 1):
                            out[ni, ci, 2 * hy + dy, 2 * wx + dx] = \
                                x[ni, 4 * ci + 2 * dy + dx, hy, wx]
    return out


def gram_oracle(features):
    """[N, C, H, W] -> [N, C, C] via explicit matrix products."""
    n, c, h, w = features.shape
    out = np.zeros((n, c, c), dtype=np.float64)
    for ni in range(n):
        flat = features[ni].reshape(c, h * w)
        out[ni] = flat @ flat.T / (c * h * w)
    return out


def top_singular_value(matrix):
    return float(np.linalg.svd(np.asarray(matrix, dtype=np.float64),
                               compute_uv=False)[0])


def central_difference_grad(f, x, eps=1e-4):
    """Central finite-difference gradient of scalar f w.r.t. numpy array x."""
    x = x.astype(np.float64)
    grad = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        hi = f(x)
        flat[i] = orig - eps
        lo = f(x)
        flat[i] = orig
        gflat[i] = (hi - lo) / (2.0 * eps)
    return grad
