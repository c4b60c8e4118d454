"""Vectorized NumPy implementation of the hot per-instance kernels.

Parameter rows follow the block layout ``[intercept, quantitative weights...,
categorical slots...]``; the slot of qualitative attribute ``k`` holding
category ``j`` is ``1 + n_quant + offsets[k] + j``.
"""
import numpy as np


def scores(xq, xcat, offsets, params):
    """Linear score of every instance under every parameter block.

    xq      : (N, K) float64 quantitative values
    xcat    : (N, I) int64 category indices
    offsets : (I,) int64 starts of each categorical block
    params  : (B, D) float64 parameter blocks
    returns : (N, B) float64
    """
    n_quant = xq.shape[1]
    out = params[:, 0][None, :] + xq @ params[:, 1:1 + n_quant].T
    base = 1 + n_quant
    for k in range(xcat.shape[1]):
        out += params[:, base + offsets[k] + xcat[:, k]].T
    return np.ascontiguousarray(out)


def accumulate(xq, xcat, offsets, coef, n_slots):
    """Sum of per-instance feature vectors weighted by ``coef``.

    coef    : (N, B) float64 per-instance, per-block weights
    returns : (B, n_slots) float64 with entry [b, f] = sum_l coef[l, b] * phi_f(x_l)
    """
    n_quant = xq.shape[1]
    n_blocks = coef.shape[1]
    out = np.zeros((n_blocks, n_slots))
    out[:, 0] = coef.sum(axis=0)
    if n_quant:
        out[:, 1:1 + n_quant] = coef.T @ xq
    base = 1 + n_quant
    out_t = out.T
    for k in range(xcat.shape[1]):
        np.add.at(out_t, base + offsets[k] + xcat[:, k], coef)
    return out
